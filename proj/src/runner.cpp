#include "entsim/runner.hpp"

#include "entsim/concentration.hpp"
#include "entsim/protocols.hpp"
#include "entsim/rng.hpp"
#include "entsim/schmidt.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace entsim {

namespace {

// Per-block accumulator: elementwise sums plus running minima.
struct Accum {
    std::vector<double> sums;
    std::vector<double> mins;

    Accum(std::size_t n_sums, std::size_t n_mins)
        : sums(n_sums, 0.0), mins(n_mins, std::numeric_limits<double>::infinity()) {}

    void merge(const Accum& other) {
        for (std::size_t i = 0; i < sums.size(); ++i) sums[i] += other.sums[i];
        for (std::size_t i = 0; i < mins.size(); ++i) mins[i] = std::min(mins[i], other.mins[i]);
    }
};

// Runs `trials` per-trial closures in fixed blocks of 1024 and reduces the
// block accumulators in index order, so the result is byte-identical for
// any thread count.
template <typename PerTrial>
Accum run_trials(std::int64_t trials, int threads, std::size_t n_sums, std::size_t n_mins,
                 PerTrial&& per_trial) {
    constexpr std::int64_t kBlock = 1024;
    const std::int64_t num_blocks = (trials + kBlock - 1) / kBlock;
    std::vector<Accum> blocks(static_cast<std::size_t>(num_blocks), Accum(n_sums, n_mins));

    auto run_block = [&](std::int64_t b) {
        Accum& acc = blocks[static_cast<std::size_t>(b)];
        const std::int64_t hi = std::min(trials, (b + 1) * kBlock);
        for (std::int64_t t = b * kBlock; t < hi; ++t) per_trial(static_cast<std::uint64_t>(t), acc);
    };

    if (threads <= 1 || num_blocks == 1) {
        for (std::int64_t b = 0; b < num_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::int64_t> next{0};
        std::vector<std::thread> pool;
        const int n = static_cast<int>(std::min<std::int64_t>(threads, num_blocks));
        pool.reserve(static_cast<std::size_t>(n));
        for (int w = 0; w < n; ++w)
            pool.emplace_back([&] {
                for (std::int64_t b = next.fetch_add(1); b < num_blocks; b = next.fetch_add(1))
                    run_block(b);
            });
        for (auto& th : pool) th.join();
    }

    Accum total(n_sums, n_mins);
    for (const Accum& b : blocks) total.merge(b);
    return total;
}

double binomial_stderr(double rate, std::int64_t n) {
    return std::sqrt(std::max(0.0, rate * (1.0 - rate)) / static_cast<double>(n));
}

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

std::vector<Metric> run_entropy(const RunConfig& c) {
    const StateVector pair = make_psi_alpha(make_pair_spec(c.p));
    const double e = entanglement_of(pair, alice_bob_cut(pair));
    return {{"entanglement_bits", e, std::nullopt, binary_entropy(c.p)}};
}

std::vector<Metric> run_teleport(const RunConfig& c, int threads) {
    require(c.trials >= 1, "teleport: trials must be >= 1");
    // sums: fidelity, outcome counts (psi+, psi-, phi+, phi-); mins: fidelity
    const Accum acc = run_trials(c.trials, threads, 5, 1, [&](std::uint64_t t, Accum& a) {
        RngStream stream = RngStream::derive(c.seed, t);
        const QubitState input = random_qubit_state(stream);
        const TeleportTranscript tr = teleport(input, stream);
        const double fid = fidelity(tr.alice_final, to_state(input, Owner::alice, "alice"));
        a.sums[0] += fid;
        a.sums[1 + static_cast<std::size_t>(tr.outcome)] += 1.0;
        a.mins[0] = std::min(a.mins[0], fid);
    });
    const double n = static_cast<double>(c.trials);
    std::vector<Metric> metrics{{"mean_fidelity", acc.sums[0] / n, std::nullopt, 1.0},
                                {"min_fidelity", acc.mins[0], std::nullopt, 1.0}};
    const char* names[4] = {"freq_psi_plus", "freq_psi_minus", "freq_phi_plus", "freq_phi_minus"};
    for (std::size_t o = 0; o < 4; ++o) {
        const double f = acc.sums[1 + o] / n;
        metrics.push_back({names[o], f, binomial_stderr(f, c.trials), 0.25});
    }
    return metrics;
}

std::vector<Metric> run_filter(const RunConfig& c, int threads) {
    require(c.trials >= 1, "filter: trials must be >= 1");
    const PairSpec spec = make_pair_spec(c.p);
    canonical_filter(spec);  // reject p < 1/2 up front

    // sums: pass count, passed entanglement; mins: passed entanglement
    const Accum acc = run_trials(c.trials, threads, 2, 1, [&](std::uint64_t t, Accum& a) {
        RngStream stream = RngStream::derive(c.seed, t);
        const FilterOutcome out = local_filter(spec, stream);
        if (!out.passed) return;
        const double e = entanglement_of(*out.post_state, alice_bob_cut(*out.post_state));
        a.sums[0] += 1.0;
        a.sums[1] += e;
        a.mins[0] = std::min(a.mins[0], e);
    });

    const double n = static_cast<double>(c.trials);
    const double pass_rate = acc.sums[0] / n;
    const bool any_passed = acc.sums[0] > 0.0;
    const double mean_passed = any_passed ? acc.sums[1] / acc.sums[0] : 0.0;
    const double min_passed = any_passed ? acc.mins[0] : 0.0;
    const double expected_pass = 2.0 * (1.0 - c.p);

    const StateVector pair = make_psi_alpha(spec);
    return {{"pass_rate", pass_rate, binomial_stderr(pass_rate, c.trials), expected_pass},
            {"mean_passed_entanglement", mean_passed, std::nullopt, 1.0},
            {"min_passed_entanglement", min_passed, std::nullopt, 1.0},
            {"expected_output_entanglement", pass_rate * mean_passed, std::nullopt, expected_pass},
            {"input_entanglement", entanglement_of(pair, alice_bob_cut(pair)), std::nullopt,
             binary_entropy(c.p)}};
}

std::vector<Metric> run_otp(const RunConfig& c) {
    require(c.k >= 1, "otp: k (pair count) must be >= 1");
    RngStream key_stream = RngStream::derive(c.seed, 0);
    const KeyPair keys = otp_keygen(c.k, OtpConvention::spin_flip, key_stream);

    RngStream msg_stream = RngStream::derive(c.seed, 1);
    Bits message(static_cast<std::size_t>(c.k));
    for (auto& b : message) b = static_cast<std::uint8_t>(msg_stream.next_u64() & 1u);

    const Bits cipher = otp_encrypt(message, keys.alice);
    const Bits round_trip = otp_decrypt(cipher, keys.bob);

    double ones = 0.0;
    for (std::uint8_t b : keys.alice) ones += b;
    const double bias = ones / static_cast<double>(c.k);

    return {{"key_length", static_cast<double>(keys.alice.size()), std::nullopt,
             static_cast<double>(c.k)},
            {"keys_agree", keys.alice == keys.bob ? 1.0 : 0.0, std::nullopt, 1.0},
            {"alice_bit_bias", bias, binomial_stderr(bias, c.k), 0.5},
            {"roundtrip_ok", round_trip == message ? 1.0 : 0.0, std::nullopt, 1.0}};
}

std::vector<Metric> run_concentrate(const RunConfig& c, int threads) {
    const YieldReport yr =
        simulate_yield(EnsembleSpec{c.k, make_pair_spec(c.p)}, c.batch_size, c.trials, c.seed, threads);
    return {{"mean_rate", yr.mean_rate, yr.std_error, yr.target_entropy},
            {"exact_entropy_rate", yr.exact_entropy_rate, std::nullopt, yr.target_entropy}};
}

std::vector<Metric> run_yield_curve(const RunConfig& c) {
    const std::int64_t k_max = c.k >= 2 ? c.k : 4096;
    const double target = binary_entropy(c.p);
    std::vector<Metric> metrics;
    for (std::int64_t k = 2; k <= k_max; k *= 2)
        metrics.push_back({"exact_entropy_rate[k=" + std::to_string(k) + "]",
                           exact_entropy_rate(EnsembleSpec{k, make_pair_spec(c.p)}), std::nullopt,
                           target});
    return metrics;
}

std::vector<Metric> run_typical_dim(const RunConfig& c) {
    require(c.k >= 1, "typical-dim: k must be >= 1");
    const double log_dim = typical_subspace_log_dim(EnsembleSpec{c.k, make_pair_spec(c.p)}, c.epsilon);
    return {{"log2_dim", log_dim, std::nullopt, std::nullopt},
            {"log2_dim_per_pair", log_dim / static_cast<double>(c.k), std::nullopt,
             binary_entropy(c.p)}};
}

} // namespace

Report run(const RunConfig& config, int threads) {
    require(threads >= 1, "run: thread count must be >= 1");
    const auto start = std::chrono::steady_clock::now();

    Report report;
    report.config = config;
    switch (config.command) {
        case Command::entropy: report.metrics = run_entropy(config); break;
        case Command::teleport: report.metrics = run_teleport(config, threads); break;
        case Command::filter: report.metrics = run_filter(config, threads); break;
        case Command::otp: report.metrics = run_otp(config); break;
        case Command::concentrate: report.metrics = run_concentrate(config, threads); break;
        case Command::yield_curve: report.metrics = run_yield_curve(config); break;
        case Command::typical_dim: report.metrics = run_typical_dim(config); break;
    }

    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

} // namespace entsim
