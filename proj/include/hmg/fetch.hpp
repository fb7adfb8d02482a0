#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace hmg::fetch {

/// Dataset names the downloader knows (TUDataset archive names; PTC is the
/// PTC_MR archive under its conventional short name).
std::vector<std::string> known_datasets();

/// Downloads and unpacks the named TUDataset archive into
/// `cache_dir/<name>/` with files renamed to the `<name>_*.txt` convention.
/// Idempotent: a warm cache does no network access. `base_url` overrides the
/// archive host (default https://www.chrsmrrs.com/graphkerneldatasets, or
/// the HMG_MIRROR environment variable when set).
std::filesystem::path fetch_dataset(const std::string& name,
                                    const std::filesystem::path& cache_dir,
                                    const std::string& base_url = {});

/// HTTP(S) GET to a file; verifies Content-Length when the server sends it.
void download(const std::string& url, const std::filesystem::path& target);

}  // namespace hmg::fetch
