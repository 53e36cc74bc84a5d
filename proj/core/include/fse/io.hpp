#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace fse::io {

std::string read_file(const std::filesystem::path& path);

// Reads a file line by line, stripping a trailing '\r' if present. The
// callback receives (1-based line number, line). Empty trailing line ignored.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, const std::string&)>& fn);

// Write-temp-then-rename so interrupted runs never leave half-written files.
void atomic_write(const std::filesystem::path& path, const std::string& content);

// Hex-encoded SHA-256 of a byte string / of a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// Splits a line on hard tabs. No quoting or escaping; column content is
// whatever sits between tabs.
std::vector<std::string> split_tsv(const std::string& line);

// Shortest round-trip formatting for doubles, identical across runs.
std::string format_double(double v);

}  // namespace fse::io
