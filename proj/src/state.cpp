#include "entsim/state.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace entsim {

namespace {

bool finite(const Amplitude& a) { return std::isfinite(a.real()) && std::isfinite(a.imag()); }

double norm_sq(const std::vector<Amplitude>& amps) {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    return s;
}

// Enumerates all patterns over the bits set in `mask`, ascending as packed
// values; the classic (s - mask) & mask walk.
struct SubmaskRange {
    std::uint64_t mask;
    template <typename F>
    void for_each(F&& f) const {
        std::uint64_t s = 0;
        while (true) {
            f(s);
            if (s == mask) break;
            s = (s - mask) & mask;
        }
    }
};

Amplitude sparse_dot(const std::vector<std::pair<std::uint64_t, Amplitude>>& a,
                     const std::vector<std::pair<std::uint64_t, Amplitude>>& b) {
    Amplitude acc{0.0, 0.0};
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first) {
            ++i;
        } else if (a[i].first > b[j].first) {
            ++j;
        } else {
            acc += std::conj(a[i].second) * b[j].second;
            ++i;
            ++j;
        }
    }
    return acc;
}

} // namespace

StateVector make_state(int num_qubits, std::vector<Amplitude> amps,
                       std::vector<QubitLabel> labels) {
    if (num_qubits < 1 || num_qubits > kMaxQubits)
        throw std::invalid_argument("make_state: num_qubits must be in [1, " +
                                    std::to_string(kMaxQubits) + "]");
    const std::size_t dim = std::size_t{1} << num_qubits;
    if (amps.size() != dim)
        throw std::invalid_argument("make_state: expected " + std::to_string(dim) +
                                    " amplitudes, got " + std::to_string(amps.size()));
    for (const auto& a : amps)
        if (!finite(a)) throw std::invalid_argument("make_state: non-finite amplitude");
    const double n = std::sqrt(norm_sq(amps));
    if (!(n > 1e-12)) throw std::invalid_argument("make_state: zero-norm input");
    for (auto& a : amps) a /= n;

    if (labels.empty()) labels.assign(static_cast<std::size_t>(num_qubits), QubitLabel{});
    if (labels.size() != static_cast<std::size_t>(num_qubits))
        throw std::invalid_argument("make_state: labels must have one entry per qubit");
    return StateVector{num_qubits, std::move(amps), std::move(labels)};
}

StateVector tensor(const StateVector& left, const StateVector& right) {
    if (left.num_qubits + right.num_qubits > kMaxQubits)
        throw std::invalid_argument("tensor: register would exceed " +
                                    std::to_string(kMaxQubits) + " qubits");
    StateVector out;
    out.num_qubits = left.num_qubits + right.num_qubits;
    out.amps.resize(left.dim() * right.dim());
    for (std::size_t i = 0; i < left.dim(); ++i)
        for (std::size_t j = 0; j < right.dim(); ++j)
            out.amps[i * right.dim() + j] = left.amps[i] * right.amps[j];
    out.labels = left.labels;
    out.labels.insert(out.labels.end(), right.labels.begin(), right.labels.end());
    return out;
}

double norm(const StateVector& state) { return std::sqrt(norm_sq(state.amps)); }

double fidelity(const StateVector& a, const StateVector& b) {
    if (a.num_qubits != b.num_qubits)
        throw std::invalid_argument("fidelity: dimension mismatch");
    Amplitude acc{0.0, 0.0};
    for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a.amps[i]) * b.amps[i];
    return std::abs(acc);
}

LocalUnitary make_local_unitary(int qubit, std::array<std::array<Amplitude, 2>, 2> m) {
    if (qubit < 0) throw std::invalid_argument("make_local_unitary: negative qubit index");
    // U†U = I within 1e-10
    const Amplitude g00 = std::conj(m[0][0]) * m[0][0] + std::conj(m[1][0]) * m[1][0];
    const Amplitude g01 = std::conj(m[0][0]) * m[0][1] + std::conj(m[1][0]) * m[1][1];
    const Amplitude g11 = std::conj(m[0][1]) * m[0][1] + std::conj(m[1][1]) * m[1][1];
    if (std::abs(g00 - 1.0) > 1e-10 || std::abs(g11 - 1.0) > 1e-10 || std::abs(g01) > 1e-10)
        throw std::invalid_argument("make_local_unitary: matrix is not unitary");
    return LocalUnitary{qubit, m};
}

LocalUnitary spin_pi_rotation(int qubit, Axis axis) {
    const Amplitude i{0.0, 1.0};
    switch (axis) {
        case Axis::x: return make_local_unitary(qubit, {{{0.0, -i}, {-i, 0.0}}});
        case Axis::y: return make_local_unitary(qubit, {{{0.0, -1.0}, {1.0, 0.0}}});
        case Axis::z: return make_local_unitary(qubit, {{{-i, 0.0}, {0.0, i}}});
    }
    throw std::logic_error("spin_pi_rotation: bad axis");
}

StateVector apply_local(const StateVector& state, const LocalUnitary& u) {
    if (u.qubit >= state.num_qubits)
        throw std::out_of_range("apply_local: qubit index out of range");
    StateVector out = state;
    const std::uint64_t bit = std::uint64_t{1} << (state.num_qubits - 1 - u.qubit);
    for (std::uint64_t i = 0; i < out.dim(); ++i) {
        if (i & bit) continue;
        const Amplitude a0 = out.amps[i];
        const Amplitude a1 = out.amps[i | bit];
        out.amps[i] = u.matrix[0][0] * a0 + u.matrix[0][1] * a1;
        out.amps[i | bit] = u.matrix[1][0] * a0 + u.matrix[1][1] * a1;
    }
    return out;
}

ProjectiveMeasurement::ProjectiveMeasurement(StateVector state,
                                             std::vector<SubspaceSpec> projectors)
    : state_(std::move(state)), projectors_(std::move(projectors)) {
    if (projectors_.empty())
        throw std::invalid_argument("measure: empty projector list");

    const std::vector<int>& qubits = projectors_[0].qubits;
    if (qubits.empty()) throw std::invalid_argument("measure: no measured qubits");
    if (!std::is_sorted(qubits.begin(), qubits.end()) ||
        std::adjacent_find(qubits.begin(), qubits.end()) != qubits.end())
        throw std::invalid_argument("measure: measured qubits must be sorted and unique");
    if (qubits.front() < 0 || qubits.back() >= state_.num_qubits)
        throw std::out_of_range("measure: measured qubit out of range");
    for (const auto& spec : projectors_)
        if (spec.qubits != qubits)
            throw std::invalid_argument("measure: projectors must share one qubit set");

    const int m = static_cast<int>(qubits.size());
    const std::uint64_t sub_dim = std::uint64_t{1} << m;

    measured_bitpos_.resize(static_cast<std::size_t>(m));
    std::uint64_t measured_mask = 0;
    for (int t = 0; t < m; ++t) {
        measured_bitpos_[static_cast<std::size_t>(t)] = state_.num_qubits - 1 - qubits[static_cast<std::size_t>(t)];
        measured_mask |= std::uint64_t{1} << measured_bitpos_[static_cast<std::size_t>(t)];
    }
    rest_mask_ = (state_.dim() - 1) & ~measured_mask;

    // Orthonormality and completeness on the measured sub-register.
    std::size_t total_dim = 0;
    std::vector<const std::vector<std::pair<std::uint64_t, Amplitude>>*> all;
    for (auto& spec : projectors_) {
        if (spec.basis.empty())
            throw std::invalid_argument("measure: projector with empty basis");
        for (auto& v : spec.basis) {
            if (v.empty()) throw std::invalid_argument("measure: empty basis vector");
            std::sort(v.begin(), v.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (std::size_t e = 1; e < v.size(); ++e)
                if (v[e].first == v[e - 1].first)
                    throw std::invalid_argument("measure: duplicate index in basis vector");
            if (v.back().first >= sub_dim)
                throw std::out_of_range("measure: basis index outside measured sub-register");
            all.push_back(&v);
        }
        total_dim += spec.basis.size();
    }
    if (total_dim != sub_dim)
        throw std::invalid_argument("measure: projector set is not complete");
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i; j < all.size(); ++j) {
            const Amplitude g = sparse_dot(*all[i], *all[j]);
            const double want = (i == j) ? 1.0 : 0.0;
            if (std::abs(g - want) > kProjectorTol)
                throw std::invalid_argument("measure: projector basis is not orthonormal");
        }
    }

    // Born probabilities: for each basis vector v and each assignment r of
    // the unmeasured qubits, accumulate |<v (x) e_r | psi>|^2.
    probabilities_.assign(projectors_.size(), 0.0);
    for (std::size_t s = 0; s < projectors_.size(); ++s) {
        double p = 0.0;
        for (const auto& v : projectors_[s].basis) {
            SubmaskRange{rest_mask_}.for_each([&](std::uint64_t r) {
                Amplitude c{0.0, 0.0};
                for (const auto& [sub, amp] : v)
                    c += std::conj(amp) * state_.amps[expand_sub_index(sub) | r];
                p += std::norm(c);
            });
        }
        probabilities_[s] = p;
    }
}

std::uint64_t ProjectiveMeasurement::expand_sub_index(std::uint64_t sub) const {
    const int m = static_cast<int>(measured_bitpos_.size());
    std::uint64_t full = 0;
    for (int t = 0; t < m; ++t)
        if ((sub >> (m - 1 - t)) & 1u)
            full |= std::uint64_t{1} << measured_bitpos_[static_cast<std::size_t>(t)];
    return full;
}

int ProjectiveMeasurement::sample_index(RngStream& rng) const {
    const double u = rng.next_double();
    double cum = 0.0;
    int last_nonzero = 0;
    for (std::size_t s = 0; s < probabilities_.size(); ++s) {
        if (probabilities_[s] > 0.0) last_nonzero = static_cast<int>(s);
        cum += probabilities_[s];
        if (u < cum) return static_cast<int>(s);
    }
    return last_nonzero;  // u fell in the fp slack past the last outcome
}

MeasurementRecord ProjectiveMeasurement::realize(int index) const {
    if (index < 0 || static_cast<std::size_t>(index) >= projectors_.size())
        throw std::out_of_range("measure: outcome index out of range");
    const SubspaceSpec& spec = projectors_[static_cast<std::size_t>(index)];

    std::vector<Amplitude> post(state_.dim(), Amplitude{0.0, 0.0});
    for (const auto& v : spec.basis) {
        SubmaskRange{rest_mask_}.for_each([&](std::uint64_t r) {
            Amplitude c{0.0, 0.0};
            for (const auto& [sub, amp] : v)
                c += std::conj(amp) * state_.amps[expand_sub_index(sub) | r];
            if (c == Amplitude{0.0, 0.0}) return;
            for (const auto& [sub, amp] : v)
                post[expand_sub_index(sub) | r] += c * amp;
        });
    }

    const double p = probabilities_[static_cast<std::size_t>(index)];
    if (!(p > 0.0))
        throw std::invalid_argument("measure: cannot realize a zero-probability outcome");
    return MeasurementRecord{spec.outcome, p,
                             make_state(state_.num_qubits, std::move(post), state_.labels)};
}

MeasurementRecord measure_projectors(const StateVector& state,
                                     const std::vector<SubspaceSpec>& projectors,
                                     RngStream& rng) {
    return ProjectiveMeasurement(state, projectors).sample(rng);
}

std::vector<SubspaceSpec> z_basis_projectors(int qubit) {
    std::vector<SubspaceSpec> specs(2);
    specs[0] = SubspaceSpec{0, {qubit}, {{{0, 1.0}}}};
    specs[1] = SubspaceSpec{1, {qubit}, {{{1, 1.0}}}};
    return specs;
}

} // namespace entsim
