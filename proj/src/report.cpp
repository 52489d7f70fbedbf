#include "entsim/report.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace entsim {

std::string command_name(Command c) {
    switch (c) {
        case Command::entropy: return "entropy";
        case Command::teleport: return "teleport";
        case Command::filter: return "filter";
        case Command::otp: return "otp";
        case Command::concentrate: return "concentrate";
        case Command::yield_curve: return "yield-curve";
        case Command::typical_dim: return "typical-dim";
    }
    throw std::logic_error("command_name: bad command");
}

std::string format_name(Format f) { return f == Format::json ? "json" : "csv"; }

std::string format_real(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

std::string emit_json(const Report& r) {
    const RunConfig& c = r.config;
    std::string s;
    s += "{\n";
    s += "  \"command\": \"" + command_name(c.command) + "\",\n";
    s += "  \"config\": {\n";
    s += "    \"p\": " + format_real(c.p) + ",\n";
    s += "    \"k\": " + std::to_string(c.k) + ",\n";
    s += "    \"trials\": " + std::to_string(c.trials) + ",\n";
    s += "    \"batch_size\": " + std::to_string(c.batch_size) + ",\n";
    s += "    \"epsilon\": " + format_real(c.epsilon) + ",\n";
    s += "    \"seed\": " + std::to_string(c.seed) + ",\n";
    s += "    \"format\": \"" + format_name(c.format) + "\",\n";
    s += "    \"out\": " + (c.out ? "\"" + json_escape(*c.out) + "\"" : std::string("null")) + "\n";
    s += "  },\n";
    s += "  \"results\": [";
    for (std::size_t i = 0; i < r.metrics.size(); ++i) {
        const Metric& m = r.metrics[i];
        s += (i == 0) ? "\n" : ",\n";
        s += "    {\"name\": \"" + json_escape(m.name) + "\", \"value\": " + format_real(m.value);
        if (m.std_error) s += ", \"stderr\": " + format_real(*m.std_error);
        if (m.reference) s += ", \"reference\": " + format_real(*m.reference);
        s += "}";
    }
    s += r.metrics.empty() ? "]\n" : "\n  ]\n";
    s += "}\n";
    return s;
}

std::string emit_csv(const Report& r) {
    std::string s = "name,value,stderr,reference\n";
    for (const Metric& m : r.metrics) {
        s += m.name + "," + format_real(m.value) + ",";
        if (m.std_error) s += format_real(*m.std_error);
        s += ",";
        if (m.reference) s += format_real(*m.reference);
        s += "\n";
    }
    return s;
}

} // namespace

std::string emit(const Report& report, Format format) {
    return format == Format::json ? emit_json(report) : emit_csv(report);
}

void emit_to(const Report& report, Format format, const std::optional<std::string>& out) {
    const std::string bytes = emit(report, format);
    if (!out) {
        std::cout << bytes;
        std::cout.flush();
        return;
    }
    std::ofstream f(*out, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open output path: " + *out);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("failed writing output path: " + *out);
}

} // namespace entsim
