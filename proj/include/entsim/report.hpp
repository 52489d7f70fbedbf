// report.hpp
// Machine-readable run reports. JSON output has a fixed key order and
// renders reals with 17 significant digits so that identical (config, seed)
// runs produce byte-identical bytes and values round-trip losslessly.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace entsim {

enum class Command { entropy, teleport, filter, otp, concentrate, yield_curve, typical_dim };
enum class Format { json, csv };

std::string command_name(Command c);
std::string format_name(Format f);

struct RunConfig {
    Command command = Command::entropy;
    double p = 0.75;
    std::int64_t k = 1;
    std::int64_t trials = 10000;
    std::int64_t batch_size = 64;
    double epsilon = 0.01;
    std::uint64_t seed = 0;
    Format format = Format::json;
    std::optional<std::string> out;
};

struct Metric {
    std::string name;
    double value = 0.0;
    std::optional<double> std_error;  // present for sampled quantities
    std::optional<double> reference;  // analytic target where one exists
};

struct Report {
    RunConfig config;
    std::vector<Metric> metrics;
    // Wall time is kept out of the emitted bytes (they must be a pure
    // function of config and seed); the CLI prints it on stderr.
    double elapsed_seconds = 0.0;
};

// %.17g rendering used for every real in reports.
std::string format_real(double value);

// json: one object, keys in fixed order (command, config, results);
// csv: "name,value,stderr,reference" header then one row per metric.
std::string emit(const Report& report, Format format);

// Emits to the given path, or to stdout when none is set.
void emit_to(const Report& report, Format format, const std::optional<std::string>& out);

} // namespace entsim
