#include "entsim/schmidt.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace entsim {

namespace {

void check_cut(const StateVector& state, const Bipartition& cut) {
    if (cut.side_a.empty() || cut.side_b.empty())
        throw std::invalid_argument("schmidt: both sides of the cut must be nonempty");
    std::vector<char> seen(static_cast<std::size_t>(state.num_qubits), 0);
    for (const auto& side : {cut.side_a, cut.side_b}) {
        for (int q : side) {
            if (q < 0 || q >= state.num_qubits)
                throw std::out_of_range("schmidt: cut qubit out of range");
            if (seen[static_cast<std::size_t>(q)]++)
                throw std::invalid_argument("schmidt: cut sides must be disjoint");
        }
    }
    for (char s : seen)
        if (!s) throw std::invalid_argument("schmidt: cut must cover every qubit");
}

// Packs the bits of `index` belonging to `side` (ascending qubit order,
// big-endian within the side).
std::uint64_t side_index(std::uint64_t index, const std::vector<int>& side, int num_qubits) {
    std::uint64_t out = 0;
    for (int q : side) out = (out << 1) | ((index >> (num_qubits - 1 - q)) & 1u);
    return out;
}

} // namespace

Bipartition alice_bob_cut(const StateVector& state) {
    Bipartition cut;
    for (int q = 0; q < state.num_qubits; ++q) {
        switch (state.labels[static_cast<std::size_t>(q)].owner) {
            case Owner::alice: cut.side_a.push_back(q); break;
            case Owner::bob: cut.side_b.push_back(q); break;
            case Owner::ancilla:
                throw std::invalid_argument("alice_bob_cut: register holds ancilla qubits");
        }
    }
    if (cut.side_a.empty() || cut.side_b.empty())
        throw std::invalid_argument("alice_bob_cut: one side owns no qubits");
    return cut;
}

SchmidtSpectrum schmidt_spectrum(const StateVector& state, const Bipartition& cut) {
    check_cut(state, cut);
    std::vector<int> a = cut.side_a;
    std::vector<int> b = cut.side_b;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());

    const std::uint64_t dim_a = std::uint64_t{1} << a.size();
    const std::uint64_t dim_b = std::uint64_t{1} << b.size();
    Eigen::MatrixXcd coeff(static_cast<Eigen::Index>(dim_a), static_cast<Eigen::Index>(dim_b));
    coeff.setZero();
    for (std::uint64_t i = 0; i < state.dim(); ++i)
        coeff(static_cast<Eigen::Index>(side_index(i, a, state.num_qubits)),
              static_cast<Eigen::Index>(side_index(i, b, state.num_qubits))) = state.amps[i];

    // Reduced density operator on the smaller side; both sides share the
    // nonzero spectrum.
    Eigen::MatrixXcd rho;
    if (dim_a <= dim_b)
        rho = coeff * coeff.adjoint();
    else
        rho = (coeff.adjoint() * coeff).conjugate();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("schmidt: eigensolver failed");

    std::vector<double> weights(solver.eigenvalues().data(),
                                solver.eigenvalues().data() + solver.eigenvalues().size());
    double sum = 0.0;
    for (double& w : weights) {
        if (w < 0.0) {
            if (w < -1e-12) throw std::runtime_error("schmidt: reduced operator not PSD");
            w = 0.0;
        }
        sum += w;
    }
    if (!(sum > 0.0)) throw std::runtime_error("schmidt: degenerate spectrum");
    for (double& w : weights) w /= sum;
    std::sort(weights.begin(), weights.end(), std::greater<>());
    return SchmidtSpectrum{std::move(weights)};
}

double entropy_of_entanglement(const SchmidtSpectrum& spectrum) {
    double e = 0.0;
    for (double w : spectrum.weights)
        if (w > 0.0) e -= w * std::log2(w);
    return e;
}

double entanglement_of(const StateVector& state, const Bipartition& cut) {
    return entropy_of_entanglement(schmidt_spectrum(state, cut));
}

double binary_entropy(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("binary_entropy: p outside [0,1]");
    double e = 0.0;
    if (p > 0.0) e -= p * std::log2(p);
    if (p < 1.0) e -= (1.0 - p) * std::log2(1.0 - p);
    return e;
}

} // namespace entsim
