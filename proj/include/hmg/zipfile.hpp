#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hmg::zipfile {

struct Entry {
  std::string name;
  bool is_directory = false;
  std::uint64_t uncompressed_size = 0;
};

std::vector<Entry> list_entries(const std::filesystem::path& archive);

/// Extracts all entries (stored or deflated) under `out_dir`. Rejects paths
/// escaping the output directory.
void extract(const std::filesystem::path& archive,
             const std::filesystem::path& out_dir);

}  // namespace hmg::zipfile
