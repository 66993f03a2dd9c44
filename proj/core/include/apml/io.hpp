#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace apml {

// Writes content to a temp file in the target directory, then renames.
// Failed writes never leave a partial file at `path`.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// FNV-1a, used for config hashes embedded in artifact files and for the
// dataset checksum audit in the attack sweep.
uint64_t fnv1a(const std::string& data);
std::string fnv1a_hex(const std::string& data);

// Fixed-format floating point with 6 decimal places (table serialization).
std::string format_fixed6(double v);

}  // namespace apml
