// concentration.hpp
// Collective concentration of k identically prepared partially entangled
// pairs: total-spin measurement onto equal-coefficient superpositions,
// power-of-2 batching of term counts into ebits, exact and Monte Carlo
// yield rates, and the typical-subspace dimension count that certifies
// reversibility via compression.
//
// Two computation paths are kept deliberately separate: explicit state
// vectors for k <= 13 pairs (a verification oracle) and exact combinatorics
// in log space for arbitrary k.

#pragma once

#include "entsim/bigcount.hpp"
#include "entsim/protocols.hpp"
#include "entsim/rng.hpp"
#include "entsim/state.hpp"

#include <cstdint>
#include <vector>

namespace entsim {

struct EnsembleSpec {
    std::int64_t k = 1;  // pair count
    PairSpec pair;
};

inline constexpr std::int64_t kMaxExplicitPairs = kMaxQubits / 2;

// |psi_alpha>^(x)k with pair i on qubits (2i: Alice, 2i+1: Bob).
StateVector make_pair_ensemble(const EnsembleSpec& spec);

// Total-z measurement subspaces over the given qubits; outcome j is the
// number of down spins, spanned by the C(m, j) basis strings of weight j.
std::vector<SubspaceSpec> total_z_projectors(const std::vector<int>& qubits);

// Explicit path (k <= 13): builds the ensemble and measures the z-component
// of total spin on Alice's side. Outcome j leaves the pairs in an equal
// superposition of C(k, j) biorthogonal terms.
MeasurementRecord collective_z_measure(const EnsembleSpec& spec, RngStream& rng);

struct OutcomeEntry {
    int j = 0;                 // number of down pairs
    double probability = 0.0;  // C(k,j) p^(k-j) (1-p)^j
    TermCount term_count;      // C(k,j)
    double log2_terms = 0.0;
};

struct OutcomeDistribution {
    std::vector<OutcomeEntry> entries;  // j = 0..k
};

// Combinatorial path; no register limit.
OutcomeDistribution outcome_distribution(const EnsembleSpec& spec);

struct BatchPlan {
    TermCount accumulated_terms;      // product of the term counts
    std::uint64_t target_power = 0;   // floor(log2(accumulated))
    double trim_success_prob = 1.0;   // 2^target_power / accumulated, in (1/2, 1]
};

// Accumulates equal-coefficient superpositions until the term count is
// nearly a power of 2; trimming to 2^n terms succeeds with probability
// 2^n / m (e.g. nine terms trim to eight with probability 8/9).
BatchPlan batch_terms(const std::vector<TermCount>& term_counts);
BatchPlan batch_terms(const std::vector<std::uint64_t>& term_counts);

// (1/k) sum_j P(j) log2 C(k, j): the expected ebit rate before batching
// losses. Approaches the entropy of entanglement from below as k grows.
double exact_entropy_rate(const EnsembleSpec& spec);

// What happens to the residual when a trim misses the power-of-2 target.
enum class TrimStrategy { discard_residual, retrim_residual };

struct YieldReport {
    EnsembleSpec spec;
    double mean_rate = 0.0;           // ebits per input pair
    double exact_entropy_rate = 0.0;  // combinatorial expectation, no trimming loss
    double target_entropy = 0.0;      // entropy of entanglement of the pair
    std::int64_t trials = 0;
    double std_error = 0.0;
};

// Monte Carlo over outcome draws (sampling path, no state vectors): each
// trial accumulates batch_size pairs' worth of collective measurements,
// batches the term counts, and Bernoulli-trims to the nearest power of 2.
// Trial t draws from RngStream::derive(seed, t), so results are identical
// for any thread count. Pairs already at p = 1/2 are ebits outright and
// report rate 1 with no sampling.
YieldReport simulate_yield(const EnsembleSpec& spec, std::int64_t batch_size,
                           std::int64_t trials, std::uint64_t seed, int threads = 1,
                           TrimStrategy strategy = TrimStrategy::discard_residual);
YieldReport simulate_yield(const EnsembleSpec& spec, std::int64_t batch_size,
                           std::int64_t trials, RngStream& rng);

// log2 of the dimension of the smallest whole-shell subspace capturing
// probability >= 1 - epsilon of the single-spin outcome strings, shells
// ordered by decreasing per-string weight (ties in ascending j).
double typical_subspace_log_dim(const EnsembleSpec& spec, double epsilon);

} // namespace entsim
