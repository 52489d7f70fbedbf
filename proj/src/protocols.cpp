#include "entsim/protocols.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace entsim {

namespace {

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

std::vector<std::pair<std::uint64_t, Amplitude>> sparse_from(const StateVector& s) {
    std::vector<std::pair<std::uint64_t, Amplitude>> out;
    for (std::uint64_t i = 0; i < s.dim(); ++i)
        if (s.amps[i] != Amplitude{0.0, 0.0}) out.emplace_back(i, s.amps[i]);
    return out;
}

} // namespace

QubitState make_qubit_state(Amplitude a, Amplitude b) {
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    if (!(n > 1e-12)) throw std::invalid_argument("make_qubit_state: zero-norm input");
    return QubitState{a / n, b / n};
}

QubitState random_qubit_state(RngStream& rng) {
    const double cos_theta = 1.0 - 2.0 * rng.next_double();
    const double phi = 2.0 * std::numbers::pi * rng.next_double();
    const double half = std::acos(cos_theta) / 2.0;
    return QubitState{std::cos(half),
                      Amplitude{std::cos(phi), std::sin(phi)} * std::sin(half)};
}

StateVector to_state(const QubitState& q, Owner owner, const std::string& role) {
    return make_state(1, {q.a, q.b}, {QubitLabel{owner, role}});
}

PairSpec make_pair_spec(double p) {
    if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("pair spec: p must be in (0, 1]");
    return PairSpec{p};
}

StateVector make_psi_alpha(PairSpec spec) {
    make_pair_spec(spec.p);
    const double alpha = std::sqrt(spec.p);
    const double beta = std::sqrt(1.0 - spec.p);
    return make_state(2, {alpha, 0.0, 0.0, beta},
                      {QubitLabel{Owner::alice, "pair.a"}, QubitLabel{Owner::bob, "pair.b"}});
}

StateVector make_singlet() {
    return make_state(2, {0.0, kInvSqrt2, -kInvSqrt2, 0.0},
                      {QubitLabel{Owner::alice, "pair.a"}, QubitLabel{Owner::bob, "pair.b"}});
}

std::array<StateVector, 4> bell_basis() {
    const std::vector<QubitLabel> kb{QubitLabel{Owner::bob, "message"}, QubitLabel{Owner::bob, "bob"}};
    return {make_state(2, {0.0, kInvSqrt2, kInvSqrt2, 0.0}, kb),    // psi+
            make_state(2, {0.0, kInvSqrt2, -kInvSqrt2, 0.0}, kb),   // psi-
            make_state(2, {kInvSqrt2, 0.0, 0.0, kInvSqrt2}, kb),    // phi+
            make_state(2, {kInvSqrt2, 0.0, 0.0, -kInvSqrt2}, kb)};  // phi-
}

std::vector<SubspaceSpec> bell_projectors(int qubit_a, int qubit_b) {
    if (qubit_a >= qubit_b)
        throw std::invalid_argument("bell_projectors: qubit indices must be ascending");
    const auto basis = bell_basis();
    std::vector<SubspaceSpec> specs;
    specs.reserve(4);
    for (int o = 0; o < 4; ++o)
        specs.push_back(SubspaceSpec{o, {qubit_a, qubit_b}, {sparse_from(basis[static_cast<std::size_t>(o)])}});
    return specs;
}

CorrectionAxis correction_for(BellOutcome outcome) {
    switch (outcome) {
        case BellOutcome::psi_plus: return CorrectionAxis::z;   // a|u> - b|d>
        case BellOutcome::psi_minus: return CorrectionAxis::none;
        case BellOutcome::phi_plus: return CorrectionAxis::y;   // a|d> - b|u>
        case BellOutcome::phi_minus: return CorrectionAxis::x;  // a|d> + b|u>
    }
    throw std::logic_error("correction_for: bad outcome");
}

namespace {

TeleportTranscript run_teleport(const QubitState& input, int forced_outcome, RngStream* rng) {
    // Register order: the message spin (held at Bob's end), then the shared singlet.
    const StateVector message = to_state(input, Owner::bob, "message");
    const StateVector joint = tensor(message, make_singlet());

    ProjectiveMeasurement bell(joint, bell_projectors(0, 2));
    const int index = (forced_outcome >= 0) ? forced_outcome : bell.sample_index(*rng);
    const MeasurementRecord record = bell.realize(index);
    const auto outcome = static_cast<BellOutcome>(index);

    StateVector post = record.post_state;
    const CorrectionAxis axis = correction_for(outcome);
    switch (axis) {
        case CorrectionAxis::none: break;
        case CorrectionAxis::x: post = apply_local(post, spin_pi_rotation(1, Axis::x)); break;
        case CorrectionAxis::y: post = apply_local(post, spin_pi_rotation(1, Axis::y)); break;
        case CorrectionAxis::z: post = apply_local(post, spin_pi_rotation(1, Axis::z)); break;
    }

    // The post-measurement state factorizes as (Bell outcome on the message
    // and Bob spins) x (Alice's spin); contract the outcome away to read
    // Alice's qubit.
    const StateVector bell_state = bell_basis()[static_cast<std::size_t>(index)];
    Amplitude a{0.0, 0.0}, b{0.0, 0.0};
    for (std::uint64_t kb = 0; kb < 4; ++kb) {
        if (bell_state.amps[kb] == Amplitude{0.0, 0.0}) continue;
        // kb bits are (message, bob); the full index interleaves Alice at bit 1.
        const std::uint64_t k_bit = (kb >> 1) & 1u, b_bit = kb & 1u;
        const std::uint64_t base = (k_bit << 2) | b_bit;
        a += std::conj(bell_state.amps[kb]) * post.amps[base];
        b += std::conj(bell_state.amps[kb]) * post.amps[base | 2u];
    }

    TeleportTranscript t;
    t.outcome = outcome;
    t.classical_bits = {index / 2, index % 2};  // (psi=0/phi=1, +=0/-=1)
    t.correction = axis;
    t.alice_final = make_state(1, {a, b}, {QubitLabel{Owner::alice, "alice"}});
    return t;
}

} // namespace

TeleportTranscript teleport(const QubitState& input, RngStream& rng) {
    return run_teleport(input, -1, &rng);
}

TeleportTranscript teleport_with_outcome(const QubitState& input, BellOutcome outcome) {
    return run_teleport(input, static_cast<int>(outcome), nullptr);
}

KeyPair otp_keygen(std::int64_t n_pairs, OtpConvention convention, RngStream& rng) {
    if (n_pairs < 1) throw std::invalid_argument("otp_keygen: need at least one pair");
    // Photon pairs agree outright under matched polarizers; spin singlets
    // anticorrelate and Bob complements his record.
    const StateVector pair =
        convention == OtpConvention::photon_same
            ? make_state(2, {kInvSqrt2, 0.0, 0.0, kInvSqrt2},
                         {QubitLabel{Owner::alice, "pair.a"}, QubitLabel{Owner::bob, "pair.b"}})
            : make_singlet();

    KeyPair keys;
    keys.alice.reserve(static_cast<std::size_t>(n_pairs));
    keys.bob.reserve(static_cast<std::size_t>(n_pairs));
    const auto alice_z = z_basis_projectors(0);
    const auto bob_z = z_basis_projectors(1);
    ProjectiveMeasurement alice_measure(pair, alice_z);
    for (std::int64_t i = 0; i < n_pairs; ++i) {
        const MeasurementRecord a = alice_measure.sample(rng);
        const MeasurementRecord b = measure_projectors(a.post_state, bob_z, rng);
        keys.alice.push_back(static_cast<std::uint8_t>(a.outcome));
        std::uint8_t bob_bit = static_cast<std::uint8_t>(b.outcome);
        if (convention == OtpConvention::spin_flip) bob_bit ^= 1u;
        keys.bob.push_back(bob_bit);
    }
    return keys;
}

Bits otp_encrypt(const Bits& message, const Bits& key) {
    if (message.size() != key.size())
        throw std::invalid_argument("otp: message and key lengths differ");
    Bits out(message.size());
    for (std::size_t i = 0; i < message.size(); ++i)
        out[i] = static_cast<std::uint8_t>((message[i] ^ key[i]) & 1u);
    return out;
}

Bits otp_decrypt(const Bits& cipher, const Bits& key) { return otp_encrypt(cipher, key); }

FilterSpec make_filter_spec(double x, double y) {
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0)
        throw std::invalid_argument("filter spec: x and y must be in [0, 1]");
    if (std::abs(x * x + y * y - 1.0) > 1e-10)
        throw std::invalid_argument("filter spec: x^2 + y^2 must equal 1");
    return FilterSpec{x, y};
}

FilterSpec canonical_filter(PairSpec spec) {
    make_pair_spec(spec.p);
    const double x_sq = (1.0 - spec.p) / spec.p;
    if (x_sq > 1.0)
        throw std::invalid_argument("canonical_filter: p < 1/2 puts x outside [0, 1]");
    return FilterSpec{std::sqrt(x_sq), std::sqrt(1.0 - x_sq)};
}

FilterOutcome local_filter(PairSpec spec, FilterSpec filter, RngStream& rng) {
    make_pair_spec(spec.p);
    make_filter_spec(filter.x, filter.y);

    // Kraus pair diag(x, 1) / diag(y, 0) on Alice's spin; the pass branch of
    // sqrt(p)|uu> + sqrt(1-p)|dd> is x sqrt(p)|uu> + sqrt(1-p)|dd>.
    const double absorb_probability = spec.p * filter.y * filter.y;
    FilterOutcome out;
    out.pass_probability = 1.0 - absorb_probability;
    out.passed = !rng.next_bernoulli(absorb_probability);
    if (out.passed)
        out.post_state = make_state(
            2, {filter.x * std::sqrt(spec.p), 0.0, 0.0, std::sqrt(1.0 - spec.p)},
            {QubitLabel{Owner::alice, "pair.a"}, QubitLabel{Owner::bob, "pair.b"}});
    return out;
}

FilterOutcome local_filter(PairSpec spec, RngStream& rng) {
    return local_filter(spec, canonical_filter(spec), rng);
}

} // namespace entsim
