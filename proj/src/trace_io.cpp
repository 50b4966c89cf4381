#include "morsekit/trace_io.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "morsekit/errors.hpp"
#include "morsekit/version.hpp"

namespace morsekit {
namespace {

constexpr std::string_view kHeader = "frequency_hz,value";

void append_number(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    out += buf;
}

double parse_number(std::string_view field, int line) {
    // std::from_chars is locale-independent and rejects trailing junk.
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("malformed number '" + std::string(field) + "'", line);
    return value;
}

} // namespace

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string fnv1a_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

std::string to_csv(const SpectrumTrace& trace) {
    if (trace.frequency_hz.size() != trace.value.size())
        throw DomainError("trace axis and values differ in length");
    std::string out;
    out.reserve(trace.size() * 32 + 128);
    out += "# morsekit ";
    out += version;
    out += '\n';
    out += "# kind = ";
    out += to_string(trace.kind);
    out += '\n';
    for (const auto& [key, value] : trace.meta) {
        out += "# ";
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    }
    out += kHeader;
    out += '\n';
    for (std::size_t i = 0; i < trace.size(); ++i) {
        append_number(out, trace.frequency_hz[i]);
        out += ',';
        append_number(out, trace.value[i]);
        out += '\n';
    }
    return out;
}

std::string write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw Error("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot move '" + tmp.string() + "' to '" + path.string() +
                    "': " + ec.message());
    }
    return fnv1a_hex(bytes);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

std::string write_csv(const std::filesystem::path& path, const SpectrumTrace& trace) {
    return write_file(path, to_csv(trace));
}

SpectrumTrace parse_csv(const std::string& bytes) {
    std::istringstream in(bytes);

    SpectrumTrace trace;
    trace.kind = TraceKind::mors_power;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty() && line.front() == '#') {
            // `# key = value` comments round-trip into meta; anything else
            // (like the version banner) is informational.
            const std::size_t eq = line.find('=');
            if (eq != std::string::npos && eq > 1) {
                auto trim = [](std::string_view s) {
                    const auto a = s.find_first_not_of(" \t");
                    if (a == std::string_view::npos) return std::string();
                    const auto b = s.find_last_not_of(" \t");
                    return std::string(s.substr(a, b - a + 1));
                };
                const std::string key =
                    trim(std::string_view(line).substr(1, eq - 1));
                const std::string value = trim(std::string_view(line).substr(eq + 1));
                if (key == "kind") {
                    try {
                        trace.kind = trace_kind_from_string(value);
                    } catch (const Error&) {
                        throw ParseError("unknown trace kind '" + value + "'", line_no);
                    }
                } else if (!key.empty()) {
                    trace.meta[key] = value;
                }
            }
            continue;
        }
        if (!header_seen) {
            if (line != kHeader)
                throw ParseError("expected header '" + std::string(kHeader) + "', got '" +
                                     line + "'",
                                 line_no);
            header_seen = true;
            continue;
        }
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw ParseError("expected exactly two comma-separated fields", line_no);
        const double f = parse_number(std::string_view(line).substr(0, comma), line_no);
        const double v = parse_number(std::string_view(line).substr(comma + 1), line_no);
        if (!std::isfinite(f) || !std::isfinite(v))
            throw ParseError("non-finite sample", line_no);
        if (!trace.frequency_hz.empty() && !(f > trace.frequency_hz.back()))
            throw ParseError("frequencies must be strictly increasing", line_no);
        trace.frequency_hz.push_back(f);
        trace.value.push_back(v);
    }
    if (!header_seen) throw ParseError("missing header line", std::max(line_no, 1));
    return trace;
}

SpectrumTrace read_csv(const std::filesystem::path& path) {
    return parse_csv(read_file(path));
}

} // namespace morsekit
