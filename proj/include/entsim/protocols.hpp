// protocols.hpp
// Single-pair entanglement protocols: teleportation through a shared
// singlet, one-time-pad keying from singlet measurements, and probabilistic
// local filtering of a partially entangled pair.

#pragma once

#include "entsim/rng.hpp"
#include "entsim/state.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace entsim {

// The unknown single-qubit state a|up> + b|down> to be teleported.
struct QubitState {
    Amplitude a;
    Amplitude b;
};

// Normalizes (a, b); zero-norm input throws.
QubitState make_qubit_state(Amplitude a, Amplitude b);

// Haar-random qubit state.
QubitState random_qubit_state(RngStream& rng);

StateVector to_state(const QubitState& q, Owner owner, const std::string& role);

// A partially entangled pair sqrt(p)|uu> + sqrt(1-p)|dd>, parameterized by
// p = alpha^2 in (0, 1].
struct PairSpec {
    double p = 0.5;
};

PairSpec make_pair_spec(double p);

// sqrt(p)|uu> + sqrt(1-p)|dd> on qubits (0: Alice, 1: Bob).
StateVector make_psi_alpha(PairSpec spec);

// (|ud> - |du>)/sqrt(2) on qubits (0: Alice, 1: Bob).
StateVector make_singlet();

enum class BellOutcome { psi_plus, psi_minus, phi_plus, phi_minus };

// The four Bell states in the order psi+, psi-, phi+, phi-.
std::array<StateVector, 4> bell_basis();

// Bell measurement subspaces on two register qubits, outcome-labeled by
// BellOutcome order.
std::vector<SubspaceSpec> bell_projectors(int qubit_a, int qubit_b);

enum class CorrectionAxis { none, x, y, z };

// The spin-pi rotation axis that repairs Alice's qubit for each outcome.
CorrectionAxis correction_for(BellOutcome outcome);

struct TeleportTranscript {
    BellOutcome outcome;
    std::array<int, 2> classical_bits;  // (psi/phi, +/-)
    CorrectionAxis correction;
    StateVector alice_final;            // single qubit, replicates the input
};

// Full protocol: entangle the unknown qubit with a shared singlet, Bell-
// measure the two spins at Bob's end, then rotate Alice's spin per the
// broadcast two-bit outcome. Each outcome occurs with probability 1/4.
TeleportTranscript teleport(const QubitState& input, RngStream& rng);

// Same protocol conditioned on a fixed Bell outcome.
TeleportTranscript teleport_with_outcome(const QubitState& input, BellOutcome outcome);

using Bits = std::vector<std::uint8_t>;

// Whether matched measurements on a shared pair agree directly (photons) or
// only after Bob flips his bit (spin-1/2 singlets).
enum class OtpConvention { photon_same, spin_flip };

struct KeyPair {
    Bits alice;
    Bits bob;
};

// Measures n shared pairs on both sides along z and returns the two bit
// sequences; under either convention alice == bob.
KeyPair otp_keygen(std::int64_t n_pairs, OtpConvention convention, RngStream& rng);

Bits otp_encrypt(const Bits& message, const Bits& key);
Bits otp_decrypt(const Bits& cipher, const Bits& key);

// Filter transmission/absorption amplitudes with x^2 + y^2 = 1.
struct FilterSpec {
    double x;
    double y;
};

FilterSpec make_filter_spec(double x, double y);

// x = sqrt((1-p)/p), the choice that turns a passed pair into an exact
// ebit; requires p >= 1/2.
FilterSpec canonical_filter(PairSpec spec);

struct FilterOutcome {
    bool passed = false;
    double pass_probability = 0.0;           // exact, = 1 - p y^2
    std::optional<StateVector> post_state;   // present iff passed
};

// Runs Alice's spin through the selective filter, realized as a two-outcome
// generalized measurement diag(x, 1) / diag(y, 0) on her qubit.
FilterOutcome local_filter(PairSpec spec, FilterSpec filter, RngStream& rng);
FilterOutcome local_filter(PairSpec spec, RngStream& rng);  // canonical filter

} // namespace entsim
