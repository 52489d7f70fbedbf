#include "entsim/concentration.hpp"

#include "entsim/schmidt.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace entsim {

namespace {

void check_spec(const EnsembleSpec& spec) {
    if (spec.k < 1) throw std::invalid_argument("ensemble: pair count must be >= 1");
    make_pair_spec(spec.pair.p);
}

double log2_binomial(std::int64_t k, std::int64_t j) {
    return (std::lgamma(static_cast<double>(k) + 1.0) -
            std::lgamma(static_cast<double>(j) + 1.0) -
            std::lgamma(static_cast<double>(k - j) + 1.0)) /
           std::numbers::ln2;
}

// log2 of the per-string weight p^(k-j) q^j; -inf when the weight vanishes.
double log2_string_weight(std::int64_t k, std::int64_t j, double p) {
    const double q = 1.0 - p;
    double lw = static_cast<double>(k - j) * std::log2(p);
    if (j > 0) {
        if (q == 0.0) return -std::numeric_limits<double>::infinity();
        lw += static_cast<double>(j) * std::log2(q);
    }
    return lw;
}

double outcome_probability(std::int64_t k, std::int64_t j, double p) {
    const double lw = log2_string_weight(k, j, p);
    if (std::isinf(lw)) return 0.0;
    return std::exp2(log2_binomial(k, j) + lw);
}

// log2(2^a + 2^b) without leaving log space.
double log2_add(double a, double b) {
    if (std::isinf(a) && a < 0.0) return b;
    if (std::isinf(b) && b < 0.0) return a;
    const double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log2(1.0 + std::exp2(lo - hi));
}

struct TrialStats {
    double sum = 0.0;
    double sum_sq = 0.0;
};

} // namespace

StateVector make_pair_ensemble(const EnsembleSpec& spec) {
    check_spec(spec);
    if (spec.k > kMaxExplicitPairs)
        throw std::invalid_argument("ensemble: explicit path is limited to " +
                                    std::to_string(kMaxExplicitPairs) + " pairs");
    StateVector state = make_psi_alpha(spec.pair);
    for (std::int64_t i = 1; i < spec.k; ++i) state = tensor(state, make_psi_alpha(spec.pair));
    return state;
}

std::vector<SubspaceSpec> total_z_projectors(const std::vector<int>& qubits) {
    const int m = static_cast<int>(qubits.size());
    if (m == 0) throw std::invalid_argument("total_z_projectors: no qubits");
    std::vector<SubspaceSpec> specs(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j <= m; ++j) {
        specs[static_cast<std::size_t>(j)].outcome = j;
        specs[static_cast<std::size_t>(j)].qubits = qubits;
    }
    const std::uint64_t dim = std::uint64_t{1} << m;
    for (std::uint64_t idx = 0; idx < dim; ++idx) {
        const int j = std::popcount(idx);
        specs[static_cast<std::size_t>(j)].basis.push_back({{idx, Amplitude{1.0, 0.0}}});
    }
    return specs;
}

MeasurementRecord collective_z_measure(const EnsembleSpec& spec, RngStream& rng) {
    std::vector<int> alice;
    for (std::int64_t i = 0; i < spec.k; ++i) alice.push_back(static_cast<int>(2 * i));
    return ProjectiveMeasurement(make_pair_ensemble(spec), total_z_projectors(alice)).sample(rng);
}

OutcomeDistribution outcome_distribution(const EnsembleSpec& spec) {
    check_spec(spec);
    OutcomeDistribution dist;
    dist.entries.reserve(static_cast<std::size_t>(spec.k) + 1);
    for (std::int64_t j = 0; j <= spec.k; ++j) {
        OutcomeEntry e;
        e.j = static_cast<int>(j);
        e.probability = outcome_probability(spec.k, j, spec.pair.p);
        e.term_count = TermCount::binomial(spec.k, j);
        e.log2_terms = log2_binomial(spec.k, j);
        dist.entries.push_back(std::move(e));
    }
    return dist;
}

BatchPlan batch_terms(const std::vector<TermCount>& term_counts) {
    if (term_counts.empty()) throw std::invalid_argument("batch_terms: empty term-count list");
    BatchPlan plan;
    for (const TermCount& c : term_counts) plan.accumulated_terms *= c;
    plan.target_power = plan.accumulated_terms.floor_log2();
    plan.trim_success_prob = plan.accumulated_terms.pow2_ratio(plan.target_power);
    return plan;
}

BatchPlan batch_terms(const std::vector<std::uint64_t>& term_counts) {
    std::vector<TermCount> counts;
    counts.reserve(term_counts.size());
    for (std::uint64_t c : term_counts) counts.push_back(TermCount::from_u64(c));
    return batch_terms(counts);
}

double exact_entropy_rate(const EnsembleSpec& spec) {
    check_spec(spec);
    double sum = 0.0;
    for (std::int64_t j = 0; j <= spec.k; ++j) {
        const double pj = outcome_probability(spec.k, j, spec.pair.p);
        if (pj > 0.0) sum += pj * log2_binomial(spec.k, j);
    }
    return sum / static_cast<double>(spec.k);
}

namespace {

// Ebits extracted from one accumulated batch under the chosen trim policy.
std::uint64_t trim_batch(TermCount terms, TrimStrategy strategy, RngStream& rng) {
    std::uint64_t ebits = 0;
    while (!terms.is_one()) {
        const std::uint64_t n = terms.floor_log2();
        if (n == 0) break;  // between 1 and 2 terms; nothing further to trim out
        if (rng.next_bernoulli(terms.pow2_ratio(n))) {
            ebits += n;
            break;
        }
        if (strategy == TrimStrategy::discard_residual) break;
        terms = terms.minus_pow2(n);
    }
    return ebits;
}

} // namespace

YieldReport simulate_yield(const EnsembleSpec& spec, std::int64_t batch_size,
                           std::int64_t trials, std::uint64_t seed, int threads,
                           TrimStrategy strategy) {
    check_spec(spec);
    if (trials < 1) throw std::invalid_argument("simulate_yield: trials must be >= 1");
    if (batch_size < spec.k)
        throw std::invalid_argument("simulate_yield: batch size must cover at least one draw of k pairs");
    if (threads < 1) throw std::invalid_argument("simulate_yield: thread count must be >= 1");

    YieldReport report;
    report.spec = spec;
    report.trials = trials;
    report.exact_entropy_rate = exact_entropy_rate(spec);
    report.target_entropy = binary_entropy(spec.pair.p);

    // Pairs at p = 1/2 already are ebits; the protocol keeps them as-is.
    if (spec.pair.p == 0.5) {
        report.mean_rate = 1.0;
        report.std_error = 0.0;
        return report;
    }

    const OutcomeDistribution dist = outcome_distribution(spec);
    std::vector<double> cumulative(dist.entries.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < dist.entries.size(); ++j) {
        acc += dist.entries[j].probability;
        cumulative[j] = acc;
    }

    const std::int64_t draws_per_batch = batch_size / spec.k;
    const double pairs_per_batch = static_cast<double>(draws_per_batch * spec.k);

    auto run_trial = [&](std::uint64_t t) {
        RngStream stream = RngStream::derive(seed, t);
        std::vector<TermCount> counts;
        counts.reserve(static_cast<std::size_t>(draws_per_batch));
        for (std::int64_t d = 0; d < draws_per_batch; ++d) {
            const double u = stream.next_double();
            const std::size_t j =
                static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end() - 1, u) -
                                         cumulative.begin());
            counts.push_back(dist.entries[j].term_count);
        }
        TermCount accumulated;
        for (const TermCount& c : counts) accumulated *= c;
        const std::uint64_t ebits = trim_batch(accumulated, strategy, stream);
        return static_cast<double>(ebits) / pairs_per_batch;
    };

    // Fixed-size trial blocks reduced in index order: sums are byte-identical
    // for any thread count.
    constexpr std::int64_t kBlock = 1024;
    const std::int64_t num_blocks = (trials + kBlock - 1) / kBlock;
    std::vector<TrialStats> blocks(static_cast<std::size_t>(num_blocks));

    auto run_block = [&](std::int64_t b) {
        TrialStats s;
        const std::int64_t hi = std::min(trials, (b + 1) * kBlock);
        for (std::int64_t t = b * kBlock; t < hi; ++t) {
            const double rate = run_trial(static_cast<std::uint64_t>(t));
            s.sum += rate;
            s.sum_sq += rate * rate;
        }
        blocks[static_cast<std::size_t>(b)] = s;
    };

    if (threads == 1 || num_blocks == 1) {
        for (std::int64_t b = 0; b < num_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::int64_t> next{0};
        std::vector<std::thread> pool;
        const int n = std::min<std::int64_t>(threads, num_blocks);
        pool.reserve(static_cast<std::size_t>(n));
        for (int w = 0; w < n; ++w)
            pool.emplace_back([&] {
                for (std::int64_t b = next.fetch_add(1); b < num_blocks; b = next.fetch_add(1))
                    run_block(b);
            });
        for (auto& th : pool) th.join();
    }

    double sum = 0.0, sum_sq = 0.0;
    for (const TrialStats& s : blocks) {
        sum += s.sum;
        sum_sq += s.sum_sq;
    }
    const double n = static_cast<double>(trials);
    report.mean_rate = sum / n;
    if (trials > 1) {
        const double var = std::max(0.0, (sum_sq - n * report.mean_rate * report.mean_rate) / (n - 1.0));
        report.std_error = std::sqrt(var / n);
    }
    return report;
}

YieldReport simulate_yield(const EnsembleSpec& spec, std::int64_t batch_size,
                           std::int64_t trials, RngStream& rng) {
    return simulate_yield(spec, batch_size, trials, rng.next_u64());
}

double typical_subspace_log_dim(const EnsembleSpec& spec, double epsilon) {
    check_spec(spec);
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("typical_subspace_log_dim: epsilon must be in (0, 1)");

    std::vector<std::int64_t> shells(static_cast<std::size_t>(spec.k) + 1);
    std::iota(shells.begin(), shells.end(), std::int64_t{0});
    std::stable_sort(shells.begin(), shells.end(), [&](std::int64_t a, std::int64_t b) {
        const double wa = log2_string_weight(spec.k, a, spec.pair.p);
        const double wb = log2_string_weight(spec.k, b, spec.pair.p);
        if (wa != wb) return wa > wb;
        return a < b;  // all shells tie at p = 1/2
    });

    double mass = 0.0;
    double log2_count = -std::numeric_limits<double>::infinity();
    for (std::int64_t j : shells) {
        mass += outcome_probability(spec.k, j, spec.pair.p);
        log2_count = log2_add(log2_count, log2_binomial(spec.k, j));
        if (mass >= 1.0 - epsilon) break;
    }
    return log2_count;
}

} // namespace entsim
