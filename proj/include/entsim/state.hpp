// state.hpp
// Dense pure-state algebra on a labeled qubit register: construction,
// tensor products, local unitaries, and projective measurement with exact
// Born probabilities.
//
// Conventions:
//   * Basis indices are big-endian: qubit 0 is the most significant bit of
//     the index. A register of pairs places pair i on qubits 2i (Alice) and
//     2i+1 (Bob).
//   * All operations are pure: inputs are never modified, results are fresh
//     values. RNG streams are explicit parameters.
//   * States are compared by fidelity, never amplitude-wise, since protocol
//     corrections restore states only up to a global phase.

#pragma once

#include "entsim/rng.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace entsim {

using Amplitude = std::complex<double>;

inline constexpr int kMaxQubits = 26;       // explicit simulation limit (13 pairs)
inline constexpr double kNormTol = 1e-10;   // stored-state norm tolerance
inline constexpr double kProjectorTol = 1e-8;

enum class Owner { alice, bob, ancilla };

struct QubitLabel {
    Owner owner = Owner::ancilla;
    std::string role;
};

// Normalized amplitude vector over a labeled qubit register.
struct StateVector {
    int num_qubits = 0;
    std::vector<Amplitude> amps;     // length 2^num_qubits
    std::vector<QubitLabel> labels;  // one per qubit

    std::size_t dim() const { return amps.size(); }
};

// Builds a normalized state from raw amplitudes. Any input with nonzero
// norm is accepted and renormalized; zero-norm or non-finite input throws.
// When labels is empty every qubit defaults to an unnamed ancilla.
StateVector make_state(int num_qubits, std::vector<Amplitude> amps,
                       std::vector<QubitLabel> labels = {});

// Kronecker product; the left factor occupies the high-order qubits and
// labels concatenate.
StateVector tensor(const StateVector& left, const StateVector& right);

double norm(const StateVector& state);

// |<a|b>|, insensitive to global phase.
double fidelity(const StateVector& a, const StateVector& b);

// Single-qubit unitary acting on one register position.
struct LocalUnitary {
    int qubit = 0;
    std::array<std::array<Amplitude, 2>, 2> matrix{};
};

// Validates U†U = I within 1e-10.
LocalUnitary make_local_unitary(int qubit, std::array<std::array<Amplitude, 2>, 2> matrix);

enum class Axis { x, y, z };

// Spin-pi rotation exp(-i pi sigma_axis / 2) about the given axis.
LocalUnitary spin_pi_rotation(int qubit, Axis axis);

StateVector apply_local(const StateVector& state, const LocalUnitary& u);

// One outcome subspace of a projective measurement, given as an orthonormal
// basis over the measured sub-register. Basis vectors are sparse lists of
// (sub-index, amplitude) pairs; sub-indices are big-endian over the measured
// qubits in ascending qubit order.
struct SubspaceSpec {
    int outcome = 0;
    std::vector<int> qubits;
    std::vector<std::vector<std::pair<std::uint64_t, Amplitude>>> basis;
};

struct MeasurementRecord {
    int outcome = 0;
    double probability = 0.0;
    StateVector post_state;
};

// A validated projective measurement bound to one state. Validation
// (orthonormality + completeness on the measured qubits, within 1e-8) and
// the Born probabilities are computed once; outcomes can then be sampled
// repeatedly and post-states realized on demand.
class ProjectiveMeasurement {
  public:
    ProjectiveMeasurement(StateVector state, std::vector<SubspaceSpec> projectors);

    const std::vector<double>& probabilities() const { return probabilities_; }

    // Index into the projector list, drawn with exact Born probability.
    int sample_index(RngStream& rng) const;

    // Builds the renormalized post-measurement state for one outcome.
    MeasurementRecord realize(int index) const;

    MeasurementRecord sample(RngStream& rng) const { return realize(sample_index(rng)); }

    int outcome_label(int index) const { return projectors_[index].outcome; }

  private:
    StateVector state_;
    std::vector<SubspaceSpec> projectors_;
    std::vector<double> probabilities_;
    std::vector<int> measured_bitpos_;   // full-index bit position per measured sub-bit
    std::uint64_t rest_mask_ = 0;        // bits of the unmeasured qubits

    std::uint64_t expand_sub_index(std::uint64_t sub) const;
};

// One-shot convenience over ProjectiveMeasurement.
MeasurementRecord measure_projectors(const StateVector& state,
                                     const std::vector<SubspaceSpec>& projectors,
                                     RngStream& rng);

// {|up>, |down>} measurement of a single qubit; outcomes 0 (up) and 1 (down).
std::vector<SubspaceSpec> z_basis_projectors(int qubit);

} // namespace entsim
