#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "morsekit/spectrum.hpp"

namespace morsekit {

/// FNV-1a (64-bit) digest of a byte string, as 16 lowercase hex digits.
/// Used to fingerprint written traces so runs can be compared cheaply.
std::uint64_t fnv1a(const std::string& bytes);
std::string fnv1a_hex(const std::string& bytes);

/// Render a trace as CSV: leading `# key = value` comment lines carrying the
/// toolkit version, the trace kind, and any meta entries (config digest,
/// seed, ...), then the header `frequency_hz,value` and one row per sample.
/// 15-significant-digit numbers, LF line endings.
std::string to_csv(const SpectrumTrace& trace);

/// Write a trace atomically (temp file + rename); returns the hex digest of
/// the exact bytes written.
std::string write_csv(const std::filesystem::path& path, const SpectrumTrace& trace);

/// Strict CSV reader for the same schema. Throws ParseError (with the
/// 1-based line number) on malformed headers, rows, or numbers.
SpectrumTrace parse_csv(const std::string& bytes);
SpectrumTrace read_csv(const std::filesystem::path& path);

/// Read a whole file as bytes (throws Error when unreadable).
std::string read_file(const std::filesystem::path& path);

/// Atomic text write (temp file + rename); returns the digest of the bytes.
std::string write_file(const std::filesystem::path& path, const std::string& bytes);

} // namespace morsekit
