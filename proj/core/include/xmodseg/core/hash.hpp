#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace xmodseg {

// SHA-256 hex digests, used for config hashes, artifact provenance and
// stage caching.
std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file_hex(const std::filesystem::path& path);

// Combined digest over a set of files (sorted by relative path) so a whole
// directory tree can act as one cache key.
std::string sha256_tree_hex(const std::filesystem::path& root);

}  // namespace xmodseg
