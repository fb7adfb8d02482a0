#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "hmg/fetch.hpp"

#include <zlib.h>

#include <atomic>
#include <cstring>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "hmg/dataset.hpp"
#include "hmg/zipfile.hpp"
#include "httplib.h"
#include "testutil.hpp"

using namespace hmg;
using test::TempDir;

namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::string raw_deflate(const std::string& data) {
  z_stream stream{};
  REQUIRE(deflateInit2(&stream, Z_BEST_COMPRESSION, Z_DEFLATED, -15, 8,
                       Z_DEFAULT_STRATEGY) == Z_OK);
  std::string out(deflateBound(&stream, data.size()), '\0');
  stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  stream.avail_in = static_cast<uInt>(data.size());
  stream.next_out = reinterpret_cast<Bytef*>(out.data());
  stream.avail_out = static_cast<uInt>(out.size());
  REQUIRE(deflate(&stream, Z_FINISH) == Z_STREAM_END);
  out.resize(stream.total_out);
  deflateEnd(&stream);
  return out;
}

// minimal zip writer (independent of the reader under test)
std::string make_zip(const std::vector<std::pair<std::string, std::string>>&
                         files,
                     bool deflated) {
  std::string out;
  struct Central {
    std::string name;
    std::uint32_t crc, csize, usize, offset;
    std::uint16_t method;
  };
  std::vector<Central> centrals;
  for (const auto& [name, data] : files) {
    const std::uint32_t crc =
        crc32(0, reinterpret_cast<const Bytef*>(data.data()), data.size());
    const std::string packed = deflated ? raw_deflate(data) : data;
    Central central{name, crc, static_cast<std::uint32_t>(packed.size()),
                    static_cast<std::uint32_t>(data.size()),
                    static_cast<std::uint32_t>(out.size()),
                    static_cast<std::uint16_t>(deflated ? 8 : 0)};
    put_u32(out, 0x04034b50);
    put_u16(out, 20);
    put_u16(out, 0);
    put_u16(out, central.method);
    put_u16(out, 0);
    put_u16(out, 0);
    put_u32(out, crc);
    put_u32(out, central.csize);
    put_u32(out, central.usize);
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    put_u16(out, 0);
    out += name;
    out += packed;
    centrals.push_back(central);
  }
  const std::uint32_t central_start = static_cast<std::uint32_t>(out.size());
  for (const auto& central : centrals) {
    put_u32(out, 0x02014b50);
    put_u16(out, 20);
    put_u16(out, 20);
    put_u16(out, 0);
    put_u16(out, central.method);
    put_u16(out, 0);
    put_u16(out, 0);
    put_u32(out, central.crc);
    put_u32(out, central.csize);
    put_u32(out, central.usize);
    put_u16(out, static_cast<std::uint16_t>(central.name.size()));
    put_u16(out, 0);
    put_u16(out, 0);
    put_u16(out, 0);
    put_u16(out, 0);
    put_u32(out, 0);
    put_u32(out, central.offset);
    out += central.name;
  }
  const std::uint32_t central_size =
      static_cast<std::uint32_t>(out.size()) - central_start;
  put_u32(out, 0x06054b50);
  put_u16(out, 0);
  put_u16(out, 0);
  put_u16(out, static_cast<std::uint16_t>(centrals.size()));
  put_u16(out, static_cast<std::uint16_t>(centrals.size()));
  put_u32(out, central_size);
  put_u32(out, central_start);
  put_u16(out, 0);
  return out;
}

std::string tiny_archive(const std::string& stem, bool deflated) {
  const std::string prefix = stem + "/" + stem + "_";
  return make_zip(
      {{prefix + "A.txt", "1, 2\n2, 1\n"},
       {prefix + "graph_indicator.txt", "1\n1\n"},
       {prefix + "graph_labels.txt", "1\n"},
       {prefix + "node_labels.txt", "0\n1\n"},
       {prefix + "edge_labels.txt", "0\n0\n"}},
      deflated);
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class LocalServer {
 public:
  explicit LocalServer(std::map<std::string, std::string> files)
      : files_(std::move(files)) {
    server_.Get(".*", [this](const httplib::Request& req,
                             httplib::Response& res) {
      ++hits_;
      auto it = files_.find(req.path);
      if (it == files_.end()) {
        res.status = 404;
        return;
      }
      res.set_content(it->second, "application/zip");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string base_url() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }
  int hits() const { return hits_; }

 private:
  std::map<std::string, std::string> files_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
};

}  // namespace

TEST_CASE("zip reader handles stored and deflated entries") {
  for (bool deflated : {false, true}) {
    CAPTURE(deflated);
    TempDir tmp(deflated ? "zip_deflated" : "zip_stored");
    const auto archive = tmp.path() / "a.zip";
    test::write_file(archive, tiny_archive("TOY", deflated));

    const auto entries = zipfile::list_entries(archive);
    CHECK(entries.size() == 5);

    zipfile::extract(archive, tmp.path() / "out");
    CHECK(read_file(tmp.path() / "out" / "TOY" / "TOY_A.txt") ==
          "1, 2\n2, 1\n");
    CHECK(read_file(tmp.path() / "out" / "TOY" / "TOY_node_labels.txt") ==
          "0\n1\n");
  }
}

TEST_CASE("zip reader rejects escaping paths and garbage") {
  TempDir tmp("zip_bad");
  const auto escape = tmp.path() / "escape.zip";
  test::write_file(escape, make_zip({{"../evil.txt", "boo"}}, false));
  CHECK_THROWS_WITH_AS(zipfile::extract(escape, tmp.path() / "out"),
                       doctest::Contains("escapes"), std::runtime_error);

  const auto garbage = tmp.path() / "garbage.zip";
  test::write_file(garbage, "this is not a zip file at all");
  CHECK_THROWS_AS(zipfile::extract(garbage, tmp.path() / "out"),
                  std::runtime_error);
}

TEST_CASE("fetch_dataset downloads, unpacks and restages") {
  LocalServer server({{"/MUTAG.zip", tiny_archive("MUTAG", true)}});
  TempDir cache("fetch_cache");

  const auto dir =
      fetch::fetch_dataset("MUTAG", cache.path(), server.base_url());
  CHECK(dir == cache.path() / "MUTAG");
  for (const char* suffix : {"A", "graph_indicator", "graph_labels",
                             "node_labels", "edge_labels"}) {
    CHECK(std::filesystem::exists(
        dir / ("MUTAG_" + std::string(suffix) + ".txt")));
  }
  // the staged files parse
  const auto bundle = graphio::parse_tudataset(dir, "MUTAG");
  CHECK(bundle.num_graphs() == 1);

  SUBCASE("second call is served from the warm cache") {
    const int hits_before = server.hits();
    const auto again =
        fetch::fetch_dataset("MUTAG", cache.path(), server.base_url());
    CHECK(again == dir);
    CHECK(server.hits() == hits_before);
  }
}

TEST_CASE("fetch_dataset renames aliased archives") {
  // PTC resolves to the PTC_MR archive but is staged under the short name
  LocalServer server({{"/PTC_MR.zip", tiny_archive("PTC_MR", true)}});
  TempDir cache("fetch_alias");
  const auto dir = fetch::fetch_dataset("PTC", cache.path(), server.base_url());
  CHECK(dir == cache.path() / "PTC");
  CHECK(std::filesystem::exists(dir / "PTC_A.txt"));
}

TEST_CASE("unknown dataset names are rejected with the known list") {
  TempDir cache("fetch_unknown");
  CHECK_THROWS_WITH_AS(fetch::fetch_dataset("NOPE", cache.path()),
                       doctest::Contains("unknown dataset"),
                       std::runtime_error);
}

TEST_CASE("download failures and size mismatches are reported") {
  LocalServer server({{"/MUTAG.zip", tiny_archive("MUTAG", false)}});
  TempDir cache("fetch_fail");

  SUBCASE("missing archive") {
    CHECK_THROWS_WITH_AS(
        fetch::fetch_dataset("NCI1", cache.path(), server.base_url()),
        doctest::Contains("download failed"), std::runtime_error);
  }
  SUBCASE("archive without the expected files") {
    LocalServer wrong({{"/PROTEINS.zip", tiny_archive("OTHER", true)}});
    CHECK_THROWS_WITH_AS(
        fetch::fetch_dataset("PROTEINS", cache.path(), wrong.base_url()),
        doctest::Contains("expected files"), std::runtime_error);
  }
  SUBCASE("no server at all") {
    CHECK_THROWS_AS(
        fetch::fetch_dataset("MUTAG", cache.path(), "http://127.0.0.1:1"),
        std::runtime_error);
  }
}
