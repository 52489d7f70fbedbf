// entsim — seeded experiment runner for the entanglement protocol library.
//
// Subcommands: entropy, teleport, filter, otp, concentrate, yield-curve,
// typical-dim. Reports go to stdout (or --out) as json or csv; identical
// (config, seed) runs emit identical bytes for any --threads value.

#include "entsim/report.hpp"
#include "entsim/runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"entanglement protocol simulator"};
    app.require_subcommand(1);

    entsim::RunConfig config;
    std::string format = "json";
    std::string out;
    int threads = 1;

    const auto add_common = [&](CLI::App* sub, bool wants_p) {
        if (wants_p)
            sub->add_option("--p", config.p, "pair parameter p = alpha^2, in (0, 1]")
                ->check(CLI::Range(1e-12, 1.0));
        sub->add_option("--seed", config.seed, "64-bit RNG seed");
        sub->add_option("--format", format, "report format")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--out", out, "write the report to this path instead of stdout");
        sub->add_option("--threads", threads, "worker threads for sampled trials")
            ->check(CLI::PositiveNumber);
    };

    auto* entropy = app.add_subcommand("entropy", "entanglement of one pair");
    add_common(entropy, true);

    auto* teleport = app.add_subcommand("teleport", "teleport random states through singlets");
    add_common(teleport, false);
    teleport->add_option("--trials", config.trials)->check(CLI::PositiveNumber);

    auto* filter = app.add_subcommand("filter", "local filtering trials on one pair");
    add_common(filter, true);
    filter->add_option("--trials", config.trials)->check(CLI::PositiveNumber);

    auto* otp = app.add_subcommand("otp", "one-time-pad keying from shared singlets");
    add_common(otp, false);
    otp->add_option("--k", config.k, "number of shared pairs / message bits")
        ->check(CLI::PositiveNumber);

    auto* concentrate = app.add_subcommand("concentrate", "Monte Carlo concentration yield");
    add_common(concentrate, true);
    concentrate->add_option("--k", config.k, "pairs per collective measurement")
        ->check(CLI::PositiveNumber);
    concentrate->add_option("--trials", config.trials)->check(CLI::PositiveNumber);
    concentrate->add_option("--batch-size", config.batch_size, "pairs accumulated per batch")
        ->check(CLI::PositiveNumber);

    auto* yield_curve = app.add_subcommand("yield-curve", "exact rate over k = 2, 4, ..., k_max");
    add_common(yield_curve, true);
    yield_curve->add_option("--k", config.k, "largest pair count on the curve (default 4096)");

    auto* typical_dim = app.add_subcommand("typical-dim", "typical-subspace log dimension");
    add_common(typical_dim, true);
    typical_dim->add_option("--k", config.k)->check(CLI::PositiveNumber);
    typical_dim->add_option("--epsilon", config.epsilon, "excluded probability mass")
        ->check(CLI::Range(1e-12, 1.0));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    if (entropy->parsed()) config.command = entsim::Command::entropy;
    if (teleport->parsed()) config.command = entsim::Command::teleport;
    if (filter->parsed()) config.command = entsim::Command::filter;
    if (otp->parsed()) config.command = entsim::Command::otp;
    if (concentrate->parsed()) config.command = entsim::Command::concentrate;
    if (yield_curve->parsed()) config.command = entsim::Command::yield_curve;
    if (typical_dim->parsed()) config.command = entsim::Command::typical_dim;
    config.format = (format == "csv") ? entsim::Format::csv : entsim::Format::json;
    if (!out.empty()) config.out = out;
    if (yield_curve->parsed() && config.k < 2) config.k = 4096;

    try {
        const entsim::Report report = entsim::run(config, threads);
        entsim::emit_to(report, config.format, config.out);
        std::fprintf(stderr, "# elapsed_seconds=%s\n",
                     entsim::format_real(report.elapsed_seconds).c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
