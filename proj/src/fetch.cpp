#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "hmg/fetch.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <stdexcept>

#include "hmg/zipfile.hpp"
#include "httplib.h"

namespace hmg::fetch {
namespace {

constexpr const char* kDefaultBase =
    "https://www.chrsmrrs.com/graphkerneldatasets";

// name -> TUDataset archive stem
const std::map<std::string, std::string>& registry() {
  static const std::map<std::string, std::string> names = {
      {"MUTAG", "MUTAG"},       {"PTC", "PTC_MR"},
      {"PTC_MR", "PTC_MR"},     {"PTC_MM", "PTC_MM"},
      {"PTC_FR", "PTC_FR"},     {"PTC_FM", "PTC_FM"},
      {"NCI1", "NCI1"},         {"PROTEINS", "PROTEINS"},
      {"Mutagenicity", "Mutagenicity"},
  };
  return names;
}

const std::vector<std::string> kSuffixes = {
    "A", "graph_indicator", "graph_labels", "node_labels", "edge_labels"};

bool cache_is_warm(const std::filesystem::path& dir, const std::string& name) {
  for (const auto& suffix :
       {"A", "graph_indicator", "graph_labels", "node_labels"}) {
    if (!std::filesystem::exists(dir /
                                 (name + "_" + std::string(suffix) + ".txt"))) {
      return false;
    }
  }
  return true;
}

struct Url {
  bool https = false;
  std::string host;
  int port = 0;
  std::string path;
};

Url parse_url(const std::string& url) {
  Url out;
  std::string rest;
  if (url.starts_with("https://")) {
    out.https = true;
    out.port = 443;
    rest = url.substr(8);
  } else if (url.starts_with("http://")) {
    out.port = 80;
    rest = url.substr(7);
  } else {
    throw std::runtime_error("unsupported URL scheme: " + url);
  }
  const auto slash = rest.find('/');
  std::string authority = rest.substr(0, slash);
  out.path = slash == std::string::npos ? "/" : rest.substr(slash);
  const auto colon = authority.find(':');
  if (colon != std::string::npos) {
    out.port = std::stoi(authority.substr(colon + 1));
    authority = authority.substr(0, colon);
  }
  out.host = authority;
  return out;
}

}  // namespace

std::vector<std::string> known_datasets() {
  std::vector<std::string> names;
  for (const auto& [name, stem] : registry()) names.push_back(name);
  return names;
}

void download(const std::string& url, const std::filesystem::path& target) {
  const Url parsed = parse_url(url);
  httplib::Result result;
  const auto get = [&](auto& client) {
    client.set_follow_location(true);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    result = client.Get(parsed.path);
  };
  if (parsed.https) {
    httplib::SSLClient client(parsed.host, parsed.port);
    get(client);
  } else {
    httplib::Client client(parsed.host, parsed.port);
    get(client);
  }
  if (!result || result->status != 200) {
    throw std::runtime_error("download failed for " + url +
                             (result ? " (status " +
                                           std::to_string(result->status) + ")"
                                     : " (no connection)"));
  }
  if (result->has_header("Content-Length")) {
    const auto expected =
        std::stoull(result->get_header_value("Content-Length"));
    if (expected != result->body.size()) {
      throw std::runtime_error("size mismatch downloading " + url +
                               ": expected " + std::to_string(expected) +
                               " bytes, got " +
                               std::to_string(result->body.size()));
    }
  }
  std::ofstream out(target, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + target.string());
  out.write(result->body.data(),
            static_cast<std::streamsize>(result->body.size()));
}

std::filesystem::path fetch_dataset(const std::string& name,
                                    const std::filesystem::path& cache_dir,
                                    const std::string& base_url) {
  const auto it = registry().find(name);
  if (it == registry().end()) {
    std::string known;
    for (const auto& n : known_datasets()) known += n + " ";
    throw std::runtime_error("unknown dataset '" + name +
                             "'; known datasets: " + known);
  }
  const std::string& stem = it->second;
  const auto dataset_dir = cache_dir / name;
  if (cache_is_warm(dataset_dir, name)) return dataset_dir;

  std::string base = base_url;
  if (base.empty()) {
    if (const char* env = std::getenv("HMG_MIRROR")) base = env;
  }
  if (base.empty()) base = kDefaultBase;
  while (!base.empty() && base.back() == '/') base.pop_back();

  std::filesystem::create_directories(cache_dir);
  const auto archive = cache_dir / (stem + ".zip");
  download(base + "/" + stem + ".zip", archive);

  const auto staging = cache_dir / (stem + ".unpack");
  std::filesystem::remove_all(staging);
  zipfile::extract(archive, staging);

  // archives hold <stem>/<stem>_X.txt; restage under the requested name
  std::filesystem::create_directories(dataset_dir);
  bool found_any = false;
  for (const auto& suffix : kSuffixes) {
    const auto source = staging / stem / (stem + "_" + suffix + ".txt");
    if (!std::filesystem::exists(source)) continue;
    std::filesystem::copy_file(
        source, dataset_dir / (name + "_" + suffix + ".txt"),
        std::filesystem::copy_options::overwrite_existing);
    found_any = true;
  }
  std::filesystem::remove_all(staging);
  std::filesystem::remove(archive);
  if (!found_any || !cache_is_warm(dataset_dir, name)) {
    throw std::runtime_error("archive for " + name +
                             " did not contain the expected files");
  }
  return dataset_dir;
}

}  // namespace hmg::fetch
