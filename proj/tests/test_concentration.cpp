#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "entsim/concentration.hpp"
#include "entsim/schmidt.hpp"
#include "test_util.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <vector>

using namespace entsim;
using entsim::test::three_sigma_binomial;

namespace {

// Test-side combinatorics, kept independent of the library path.
std::uint64_t choose(std::uint64_t k, std::uint64_t j) {
    unsigned __int128 c = 1;
    if (j > k - j) j = k - j;
    for (std::uint64_t i = 0; i < j; ++i) {
        c *= k - i;
        c /= i + 1;
    }
    return static_cast<std::uint64_t>(c);
}

double log2_choose(std::int64_t k, std::int64_t j) {
    return (std::lgamma(static_cast<double>(k) + 1.0) - std::lgamma(static_cast<double>(j) + 1.0) -
            std::lgamma(static_cast<double>(k - j) + 1.0)) /
           std::numbers::ln2;
}

double outcome_prob(std::int64_t k, std::int64_t j, double p) {
    return std::exp2(log2_choose(k, j) + static_cast<double>(k - j) * std::log2(p) +
                     (j > 0 ? static_cast<double>(j) * std::log2(1.0 - p) : 0.0));
}

// Expected ebits from trimming an m-term superposition.
double expected_trim_ebits(std::uint64_t m, TrimStrategy strategy) {
    if (m <= 1) return 0.0;
    const std::uint64_t n = static_cast<std::uint64_t>(std::bit_width(m)) - 1;
    const double succeed = std::ldexp(1.0, static_cast<int>(n)) / static_cast<double>(m);
    double e = succeed * static_cast<double>(n);
    if (strategy == TrimStrategy::retrim_residual)
        e += (1.0 - succeed) * expected_trim_ebits(m - (std::uint64_t{1} << n), strategy);
    return e;
}

struct YieldExpectation {
    double mean = 0.0;
    double sd = 0.0;
};

// Exact expectation of the per-trial rate by enumerating outcome multisets.
YieldExpectation exact_yield_expectation(std::int64_t k, double p, std::int64_t draws,
                                         TrimStrategy strategy) {
    std::vector<double> prob(static_cast<std::size_t>(k) + 1);
    for (std::int64_t j = 0; j <= k; ++j)
        prob[static_cast<std::size_t>(j)] = outcome_prob(k, j, p);

    const double pairs = static_cast<double>(draws * k);
    double mean = 0.0, second = 0.0;

    // walk (m_0, ..., m_k) with sum = draws
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k) + 1, 0);
    auto recurse = [&](auto&& self, std::int64_t j, std::int64_t remaining, double log_weight,
                       std::uint64_t terms) -> void {
        if (j == k) {
            counts[static_cast<std::size_t>(j)] = remaining;
            double lw = log_weight + static_cast<double>(remaining) *
                                         std::log(prob[static_cast<std::size_t>(j)]);
            lw -= std::lgamma(static_cast<double>(remaining) + 1.0);
            std::uint64_t m = terms;  // C(k,k) = 1 contributes nothing
            const double pr = std::exp(lw + std::lgamma(static_cast<double>(draws) + 1.0));
            if (strategy == TrimStrategy::discard_residual && m > 1) {
                const std::uint64_t n = static_cast<std::uint64_t>(std::bit_width(m)) - 1;
                const double succeed =
                    std::ldexp(1.0, static_cast<int>(n)) / static_cast<double>(m);
                const double rate = static_cast<double>(n) / pairs;
                mean += pr * succeed * rate;
                second += pr * succeed * rate * rate;
            } else if (strategy == TrimStrategy::retrim_residual) {
                // mean via linearity; second moment by expanding the branch tree
                std::uint64_t mm = m;
                double reach = 1.0;  // probability the process is still running
                double won = 0.0;    // ebits banked so far (deterministic per branch here)
                while (mm > 1) {
                    const std::uint64_t n = static_cast<std::uint64_t>(std::bit_width(mm)) - 1;
                    if (n == 0) break;
                    const double succeed =
                        std::ldexp(1.0, static_cast<int>(n)) / static_cast<double>(mm);
                    const double rate = (won + static_cast<double>(n)) / pairs;
                    mean += pr * reach * succeed * rate;
                    second += pr * reach * succeed * rate * rate;
                    reach *= 1.0 - succeed;
                    mm -= std::uint64_t{1} << n;
                }
            }
            return;
        }
        for (std::int64_t take = 0; take <= remaining; ++take) {
            counts[static_cast<std::size_t>(j)] = take;
            double lw = log_weight;
            if (take > 0)
                lw += static_cast<double>(take) * std::log(prob[static_cast<std::size_t>(j)]);
            lw -= std::lgamma(static_cast<double>(take) + 1.0);
            std::uint64_t t = terms;
            for (std::int64_t c = 0; c < take; ++c) t *= choose(static_cast<std::uint64_t>(k),
                                                                static_cast<std::uint64_t>(j));
            self(self, j + 1, remaining - take, lw, t);
        }
    };
    recurse(recurse, 0, draws, 0.0, 1);

    YieldExpectation out;
    out.mean = mean;
    out.sd = std::sqrt(std::max(0.0, second - mean * mean));
    return out;
}

} // namespace

TEST_CASE("two pairs expand into the four-spin superposition") {
    const double p = 0.75;
    const StateVector two = make_pair_ensemble({2, {p}});
    const double alpha = std::sqrt(p), beta = std::sqrt(1.0 - p);
    // alpha^2 |uuuu> + beta^2 |dddd> + alpha beta (|uudd> + |dduu>)
    CHECK(std::abs(two.amps[0b0000] - alpha * alpha) < 1e-12);
    CHECK(std::abs(two.amps[0b1111] - beta * beta) < 1e-12);
    CHECK(std::abs(two.amps[0b0011] - alpha * beta) < 1e-12);
    CHECK(std::abs(two.amps[0b1100] - alpha * beta) < 1e-12);
    CHECK(std::abs(two.amps[0b0101]) == 0.0);
    CHECK(fidelity(two, tensor(make_psi_alpha({p}), make_psi_alpha({p}))) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two pairs: the zero-total-spin outcome is an ebit") {
    const EnsembleSpec spec{2, {0.75}};
    const StateVector ensemble = make_pair_ensemble(spec);
    const ProjectiveMeasurement m(ensemble, total_z_projectors({0, 2}));

    CHECK(m.probabilities()[1] == doctest::Approx(2.0 * 0.75 * 0.25).epsilon(1e-14));

    const MeasurementRecord r = m.realize(1);
    CHECK(r.outcome == 1);

    // (|uu dd> + |dd uu>)/sqrt(2) over pairs (A,B), (A',B')
    std::vector<Amplitude> bracket(16, Amplitude{0.0, 0.0});
    bracket[0b0011] = 1.0;
    bracket[0b1100] = 1.0;
    CHECK(fidelity(r.post_state, make_state(4, bracket, r.post_state.labels)) ==
          doctest::Approx(1.0).epsilon(1e-12));

    // relabeled as a two-level pair it is exactly one ebit across Alice|Bob
    CHECK(std::abs(entanglement_of(r.post_state, alice_bob_cut(r.post_state)) - 1.0) < 1e-10);
}

TEST_CASE("three pairs conditioned on one down pair") {
    const EnsembleSpec spec{3, {0.6}};
    const ProjectiveMeasurement m(make_pair_ensemble(spec), total_z_projectors({0, 2, 4}));
    const MeasurementRecord r = m.realize(1);

    // equal superposition of the three placements of the down pair
    std::vector<Amplitude> expected(64, Amplitude{0.0, 0.0});
    expected[0b000011] = 1.0;  // down pair on (A'', B'')
    expected[0b001100] = 1.0;  // down pair on (A', B')
    expected[0b110000] = 1.0;  // down pair on (A, B)
    CHECK(fidelity(r.post_state, make_state(6, expected, r.post_state.labels)) >= 1.0 - 1e-10);
    CHECK(std::abs(entanglement_of(r.post_state, alice_bob_cut(r.post_state)) -
                   std::log2(3.0)) < 1e-9);
}

TEST_CASE("one pair collapses to a product state") {
    RngStream rng(55);
    const EnsembleSpec spec{1, {0.75}};
    const ProjectiveMeasurement m(make_pair_ensemble(spec), total_z_projectors({0}));
    const MeasurementRecord r = m.realize(0);
    CHECK(fidelity(r.post_state, make_state(2, {1.0, 0.0, 0.0, 0.0}, r.post_state.labels)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(entanglement_of(r.post_state, alice_bob_cut(r.post_state)) ==
          doctest::Approx(0.0).epsilon(1e-12));

    const MeasurementRecord sampled = collective_z_measure(spec, rng);
    CHECK((sampled.outcome == 0 || sampled.outcome == 1));
}

TEST_CASE("the explicit path refuses oversized registers") {
    RngStream rng(56);
    CHECK_THROWS_AS(collective_z_measure({14, {0.75}}, rng), std::invalid_argument);
}

TEST_CASE("outcome distribution for two pairs") {
    const OutcomeDistribution d = outcome_distribution({2, {0.75}});
    REQUIRE(d.entries.size() == 3);
    CHECK(d.entries[0].probability == doctest::Approx(0.5625).epsilon(1e-14));
    CHECK(d.entries[1].probability == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(d.entries[2].probability == doctest::Approx(0.0625).epsilon(1e-14));
    CHECK(d.entries[0].term_count.to_u64() == 1);
    CHECK(d.entries[1].term_count.to_u64() == 2);
    CHECK(d.entries[2].term_count.to_u64() == 1);
}

TEST_CASE("outcome distribution for one pair and for a product source") {
    const OutcomeDistribution d1 = outcome_distribution({1, {0.3}});
    CHECK(d1.entries[0].probability == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(d1.entries[1].probability == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(d1.entries[0].term_count.to_u64() == 1);
    CHECK(d1.entries[1].term_count.to_u64() == 1);

    const OutcomeDistribution dp = outcome_distribution({8, {1.0}});
    CHECK(dp.entries[0].probability == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t j = 1; j < dp.entries.size(); ++j)
        CHECK(dp.entries[j].probability == 0.0);
}

TEST_CASE("distribution entries stay consistent at scale") {
    for (std::int64_t k : {40, 60}) {
        const OutcomeDistribution d = outcome_distribution({k, {0.7}});
        double total = 0.0;
        for (const auto& e : d.entries) {
            total += e.probability;
            CHECK(e.term_count.exact());
            CHECK(e.term_count.to_u64() == choose(static_cast<std::uint64_t>(k),
                                                  static_cast<std::uint64_t>(e.j)));
            CHECK(std::abs(e.log2_terms - e.term_count.log2()) < 1e-9);
        }
        CHECK(std::abs(total - 1.0) < 1e-10);
    }
    // beyond the exact range the counts carry log2 values only
    const OutcomeDistribution big = outcome_distribution({1000, {0.7}});
    double total = 0.0;
    for (const auto& e : big.entries) total += e.probability;
    CHECK(std::abs(total - 1.0) < 1e-10);
    CHECK_FALSE(big.entries[500].term_count.exact());
    CHECK(std::abs(big.entries[500].term_count.log2() - log2_choose(1000, 500)) < 1e-6);
}

TEST_CASE("batching nine terms costs one in nine") {
    const BatchPlan plan = batch_terms(std::vector<std::uint64_t>{3, 3});
    CHECK(plan.accumulated_terms.to_u64() == 9);
    CHECK(plan.target_power == 3);
    CHECK(plan.trim_success_prob == 8.0 / 9.0);
}

TEST_CASE("exact powers of two batch losslessly") {
    const BatchPlan eight = batch_terms(std::vector<std::uint64_t>{8});
    CHECK(eight.target_power == 3);
    CHECK(eight.trim_success_prob == 1.0);

    const BatchPlan cube = batch_terms(std::vector<std::uint64_t>{2, 2, 2});
    CHECK(cube.target_power == 3);
    CHECK(cube.trim_success_prob == 1.0);

    CHECK_THROWS_AS(batch_terms(std::vector<TermCount>{}), std::invalid_argument);
}

TEST_CASE("trim probability always lands in (1/2, 1]") {
    RngStream rng(57);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint64_t> counts(1 + rng.next_u64() % 8);
        for (auto& c : counts) c = 1 + rng.next_u64() % 1000;
        const BatchPlan plan = batch_terms(counts);
        CHECK(plan.trim_success_prob > 0.5);
        CHECK(plan.trim_success_prob <= 1.0);
        const double bits = plan.accumulated_terms.log2();
        CHECK(static_cast<double>(plan.target_power) <= bits + 1e-9);
        CHECK(bits < static_cast<double>(plan.target_power) + 1.0 + 1e-9);
    }
}

TEST_CASE("batch accumulation survives past 512 bits") {
    // 60 copies of C(60,30) is ~3400 bits; the plan degrades to log2 form
    std::vector<TermCount> counts(60, TermCount::binomial(60, 30));
    const BatchPlan plan = batch_terms(counts);
    CHECK_FALSE(plan.accumulated_terms.exact());
    const double expect_log2 = 60.0 * std::log2(static_cast<double>(choose(60, 30)));
    CHECK(std::abs(plan.accumulated_terms.log2() - expect_log2) < 1e-6);
    CHECK(plan.trim_success_prob > 0.5);
    CHECK(plan.trim_success_prob <= 1.0);
}

TEST_CASE("exact entropy rate: small and hand-checked values") {
    CHECK(exact_entropy_rate({1, {0.3}}) == 0.0);
    // (1/2) * 2 p (1-p) * log2 C(2,1) = p (1-p)
    CHECK(exact_entropy_rate({2, {0.75}}) == doctest::Approx(0.1875).epsilon(1e-15));
}

TEST_CASE("exact entropy rate approaches the entropy of entanglement") {
    for (double p : {0.6, 0.75, 0.9}) {
        const double target = binary_entropy(p);
        const double rate = exact_entropy_rate({4096, {p}});
        CHECK(rate < target);
        CHECK(target - rate < 0.01);

        // independent log-gamma oracle
        double oracle = 0.0;
        for (std::int64_t j = 0; j <= 4096; ++j) {
            const double pj = outcome_prob(4096, j, p);
            if (pj > 0.0) oracle += pj * log2_choose(4096, j);
        }
        oracle /= 4096.0;
        CHECK(rate == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("rate is nondecreasing along doubling pair counts") {
    for (double p : {0.6, 0.75, 0.9}) {
        double previous = -1.0;
        for (std::int64_t k = 2; k <= 4096; k *= 2) {
            const double rate = exact_entropy_rate({k, {p}});
            CHECK(rate >= previous - 1e-12);
            previous = rate;
        }
        CHECK(previous <= binary_entropy(p));
    }
}

TEST_CASE("yield simulation endpoints") {
    const YieldReport half = simulate_yield({4, {0.5}}, 64, 100, 1);
    CHECK(half.mean_rate == 1.0);
    CHECK(half.std_error == 0.0);
    CHECK(half.target_entropy == doctest::Approx(1.0).epsilon(1e-15));

    const YieldReport product = simulate_yield({4, {1.0}}, 64, 100, 1);
    CHECK(product.mean_rate == 0.0);
    CHECK(product.target_entropy == 0.0);
}

TEST_CASE("yield simulation matches the exact expectation") {
    const std::int64_t trials = 10000;
    for (TrimStrategy strategy : {TrimStrategy::discard_residual, TrimStrategy::retrim_residual}) {
        const YieldExpectation expect = exact_yield_expectation(4, 0.75, 16, strategy);
        const YieldReport report = simulate_yield({4, {0.75}}, 64, trials, 99, 1, strategy);
        const double bound = 3.0 * expect.sd / std::sqrt(static_cast<double>(trials));
        CHECK(std::abs(report.mean_rate - expect.mean) < bound);
        CHECK(report.mean_rate <= report.exact_entropy_rate + 3.0 * report.std_error);
    }
}

TEST_CASE("retrimming recovers part of the residual") {
    const YieldExpectation discard = exact_yield_expectation(4, 0.75, 16, TrimStrategy::discard_residual);
    const YieldExpectation retrim = exact_yield_expectation(4, 0.75, 16, TrimStrategy::retrim_residual);
    CHECK(retrim.mean > discard.mean);
    CHECK(retrim.mean <= exact_entropy_rate({4, {0.75}}) + 1e-12);
}

TEST_CASE("yield simulation is deterministic across thread counts") {
    const YieldReport serial = simulate_yield({4, {0.75}}, 64, 5000, 1234, 1);
    const YieldReport parallel = simulate_yield({4, {0.75}}, 64, 5000, 1234, 4);
    CHECK(serial.mean_rate == parallel.mean_rate);
    CHECK(serial.std_error == parallel.std_error);
}

TEST_CASE("yield simulation validates input") {
    RngStream rng(58);
    CHECK_THROWS_AS(simulate_yield({4, {0.75}}, 2, 10, 1), std::invalid_argument);   // batch < k
    CHECK_THROWS_AS(simulate_yield({4, {0.75}}, 64, 0, 1), std::invalid_argument);   // no trials
    CHECK_THROWS_AS(simulate_yield({0, {0.75}}, 64, 10, 1), std::invalid_argument);  // no pairs
}

TEST_CASE("typical subspace of a deterministic source is a point") {
    CHECK(typical_subspace_log_dim({16, {1.0}}, 0.01) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("typical subspace at p = 1/2 spans almost everything") {
    // shells accumulate in ascending j until 0.99 of the mass is covered:
    // j <= 8 holds 1013/1024, so shell 9 joins and the count is 1023
    const double log_dim = typical_subspace_log_dim({10, {0.5}}, 0.01);
    CHECK(log_dim == doctest::Approx(std::log2(1023.0)).epsilon(1e-12));
}

TEST_CASE("typical subspace matches the shell-sum oracle at k = 1024") {
    for (double p : {0.6, 0.75, 0.9}) {
        const double log_dim = typical_subspace_log_dim({1024, {p}}, 0.01);

        // independent shell accumulation, high shells first
        double mass = 0.0;
        double count_log2 = -std::numeric_limits<double>::infinity();
        for (std::int64_t j = 0; j <= 1024; ++j) {  // weight is decreasing in j for p > 1/2
            mass += outcome_prob(1024, j, p);
            const double lc = log2_choose(1024, j);
            const double hi = std::max(count_log2, lc), lo = std::min(count_log2, lc);
            count_log2 = std::isinf(lo) ? hi : hi + std::log2(1.0 + std::exp2(lo - hi));
            if (mass >= 0.99) break;
        }
        CHECK(log_dim == doctest::Approx(count_log2).epsilon(1e-9));
    }
}

TEST_CASE("typical subspace epsilon validation") {
    CHECK_THROWS_AS(typical_subspace_log_dim({8, {0.75}}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(typical_subspace_log_dim({8, {0.75}}, 1.0), std::invalid_argument);
}

TEST_CASE("explicit measurement agrees with the combinatorial distribution") {
    const std::int64_t trials = 100000;
    for (std::int64_t k = 2; k <= 6; ++k) {
        for (double p : {0.6, 0.75, 0.9}) {
            const EnsembleSpec spec{k, {p}};
            std::vector<int> alice;
            for (std::int64_t i = 0; i < k; ++i) alice.push_back(static_cast<int>(2 * i));
            const ProjectiveMeasurement m(make_pair_ensemble(spec), total_z_projectors(alice));
            const OutcomeDistribution dist = outcome_distribution(spec);

            // exact probabilities agree outright
            for (std::int64_t j = 0; j <= k; ++j)
                CHECK(std::abs(m.probabilities()[static_cast<std::size_t>(j)] -
                               dist.entries[static_cast<std::size_t>(j)].probability) < 1e-10);

            // sampled frequencies stay within 3 sigma
            RngStream rng(1000 + static_cast<std::uint64_t>(k));
            std::vector<std::int64_t> counts(static_cast<std::size_t>(k) + 1, 0);
            for (std::int64_t t = 0; t < trials; ++t)
                ++counts[static_cast<std::size_t>(m.sample_index(rng))];
            for (std::int64_t j = 0; j <= k; ++j) {
                const double pj = dist.entries[static_cast<std::size_t>(j)].probability;
                const double freq = static_cast<double>(counts[static_cast<std::size_t>(j)]) /
                                    static_cast<double>(trials);
                CHECK(std::abs(freq - pj) <= three_sigma_binomial(pj, trials) + 1e-12);
            }

            // post-state entanglement equals log2 C(k, j)
            for (std::int64_t j = 0; j <= k; ++j) {
                const MeasurementRecord r = m.realize(static_cast<int>(j));
                CHECK(std::abs(entanglement_of(r.post_state, alice_bob_cut(r.post_state)) -
                               dist.entries[static_cast<std::size_t>(j)].log2_terms) < 1e-9);
            }
        }
    }
}

TEST_CASE("term counts: exact binomials up to 64 bits, log2 beyond") {
    CHECK(TermCount::binomial(60, 30).to_u64() == 118264581564861424ull);
    CHECK(TermCount::binomial(66, 33).to_u64() == 7219428434016265740ull);
    CHECK(TermCount::binomial(13, 6).to_u64() == 1716);
    CHECK_FALSE(TermCount::binomial(67, 33).exact());
    CHECK(std::abs(TermCount::binomial(67, 33).log2() - log2_choose(67, 33)) < 1e-9);
    CHECK_THROWS_AS(TermCount::from_u64(0), std::invalid_argument);
    CHECK_THROWS_AS(TermCount::binomial(4, 5), std::invalid_argument);
}

TEST_CASE("term counts: products, ratios and residuals") {
    TermCount nine = TermCount::from_u64(3);
    nine *= TermCount::from_u64(3);
    CHECK(nine.to_u64() == 9);
    CHECK(nine.floor_log2() == 3);
    CHECK(nine.pow2_ratio(3) == 8.0 / 9.0);
    CHECK(nine.minus_pow2(3).to_u64() == 1);
    CHECK_THROWS_AS(TermCount::from_u64(8).minus_pow2(3), std::invalid_argument);

    // exact product across many limbs: 2^400 stays exact, 2^600 does not
    TermCount two_400;
    for (int i = 0; i < 10; ++i) two_400 *= TermCount::from_u64(std::uint64_t{1} << 40);
    CHECK(two_400.exact());
    CHECK(two_400.floor_log2() == 400);
    CHECK(two_400.pow2_ratio(400) == 1.0);
    TermCount two_600 = two_400;
    for (int i = 0; i < 5; ++i) two_600 *= TermCount::from_u64(std::uint64_t{1} << 40);
    CHECK_FALSE(two_600.exact());
    CHECK(two_600.log2() == doctest::Approx(600.0).epsilon(1e-12));
    CHECK_THROWS_AS(two_400.to_u64(), std::overflow_error);

    // approximate residual: log2(2^600 - 2^599) = 599
    const TermCount residual = two_600.minus_pow2(599);
    CHECK(residual.log2() == doctest::Approx(599.0).epsilon(1e-9));
}

TEST_CASE("the rng-stream entry point to the yield simulation") {
    RngStream rng(404);
    const YieldReport r = simulate_yield({4, {0.75}}, 64, 500, rng);
    CHECK(r.trials == 500);
    CHECK(r.mean_rate > 0.0);
    CHECK(r.mean_rate < r.target_entropy + 0.1);
}

TEST_CASE("the projection step conserves entropy only asymptotically") {
    for (double p : {0.6, 0.75, 0.9}) {
        for (std::int64_t k : {2, 4, 8, 64, 1024, 4096}) {
            const double expected_post = exact_entropy_rate({k, {p}}) * static_cast<double>(k);
            const double input = static_cast<double>(k) * binary_entropy(p);
            CHECK(expected_post <= input);
        }
        const double ratio = exact_entropy_rate({4096, {p}}) / binary_entropy(p);
        CHECK(ratio > 0.99);
    }
}
