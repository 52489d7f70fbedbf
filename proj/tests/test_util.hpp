// Shared helpers for the test suites: deterministic random states and
// unitaries built on RngStream, plus small numeric utilities.

#pragma once

#include "entsim/rng.hpp"
#include "entsim/state.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace entsim::test {

inline double gaussian(RngStream& rng) {
    // Box-Muller; u in (0,1] to keep the log finite.
    const double u = 1.0 - rng.next_double();
    const double v = rng.next_double();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

inline StateVector random_state(int num_qubits, RngStream& rng) {
    std::vector<Amplitude> amps(std::size_t{1} << num_qubits);
    for (auto& a : amps) a = Amplitude{gaussian(rng), gaussian(rng)};
    return make_state(num_qubits, std::move(amps));
}

// Random SU(2) element from three angles.
inline LocalUnitary random_local_unitary(int qubit, RngStream& rng) {
    const double theta = std::acos(1.0 - 2.0 * rng.next_double()) / 2.0;
    const double alpha = 2.0 * std::numbers::pi * rng.next_double();
    const double beta = 2.0 * std::numbers::pi * rng.next_double();
    const Amplitude ea{std::cos(alpha), std::sin(alpha)};
    const Amplitude eb{std::cos(beta), std::sin(beta)};
    const double c = std::cos(theta), s = std::sin(theta);
    return make_local_unitary(
        qubit, {{{ea * c, eb * s}, {-std::conj(eb) * s, std::conj(ea) * c}}});
}

inline double three_sigma_binomial(double p, std::int64_t n) {
    return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

} // namespace entsim::test
