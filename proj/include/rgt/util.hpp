#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace rgt {

namespace fs = std::filesystem;

using Millis = std::chrono::milliseconds;
using Clock = std::chrono::steady_clock;

inline Millis since(Clock::time_point start) {
    return std::chrono::duration_cast<Millis>(Clock::now() - start);
}

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& content);

/// Relative paths of all regular files under root, sorted.
std::vector<std::string> list_tree_files(const fs::path& root);

/// Recursive copy of a directory of regular files.
void copy_tree(const fs::path& from, const fs::path& to);

std::vector<std::string> split(const std::string& s, char sep);
bool starts_with(const std::string& s, const std::string& prefix);

/// SHA-256 of a byte string, lowercase hex.
std::string sha256_hex(const std::string& bytes);

/// Digest of a source tree: SHA-256 over "<relpath>\0<size>\0<content>" of
/// every regular file in sorted relpath order. Identical content in a
/// different directory yields an identical digest.
std::string digest_tree(const fs::path& root);

std::string digest_file(const fs::path& path);

}  // namespace rgt
