// schmidt.hpp
// Bipartite structure of pure states: Schmidt spectrum via the reduced
// density operator and the entropy of entanglement in bits.

#pragma once

#include "entsim/state.hpp"

#include <vector>

namespace entsim {

// A two-sided split of the register; sides are disjoint, jointly cover all
// qubits and are both nonempty.
struct Bipartition {
    std::vector<int> side_a;
    std::vector<int> side_b;
};

// Builds the Alice|Bob cut from the register labels; throws if any qubit is
// an ancilla or either side is empty.
Bipartition alice_bob_cut(const StateVector& state);

// Squared Schmidt coefficients, sorted descending; sums to 1.
struct SchmidtSpectrum {
    std::vector<double> weights;
};

// Eigenvalues of the reduced density operator across the cut. Round-off
// eigenvalues in (-1e-12, 0) are clamped to zero and the spectrum is
// renormalized; anything more negative is treated as a numerical failure.
SchmidtSpectrum schmidt_spectrum(const StateVector& state, const Bipartition& cut);

// Shannon entropy (base 2) of the spectrum with 0 log 0 = 0.
double entropy_of_entanglement(const SchmidtSpectrum& spectrum);

double entanglement_of(const StateVector& state, const Bipartition& cut);

// -p log2 p - (1-p) log2 (1-p); the entanglement of sqrt(p)|00> + sqrt(1-p)|11>.
double binary_entropy(double p);

} // namespace entsim
