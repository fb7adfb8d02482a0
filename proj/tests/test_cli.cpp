#include "hmg/cli.hpp"

#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "testutil.hpp"

using namespace hmg;
using nlohmann::json;
using test::TempDir;

namespace {

json load_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  REQUIRE(in);
  return json::parse(in);
}

std::string data_dir_arg() { return test::data_dir().string(); }

}  // namespace

TEST_CASE("bad flags exit with code 2, help with 0") {
  CHECK(cli::run_command({"--help"}) == 0);
  CHECK(cli::run_command({"vocab", "--help"}) == 0);
  CHECK(cli::run_command({"vocab", "--no-such-flag"}) == 2);
  CHECK(cli::run_command({"frobnicate"}) == 2);
  CHECK(cli::run_command({}) == 2);
  CHECK(cli::run_command({"vocab"}) == 2);  // missing required --dataset
}

TEST_CASE("module errors exit with code 1") {
  TempDir tmp("cli_errors");
  CHECK(cli::run_command({"vocab", "-d", "DOES_NOT_EXIST", "--data-dir",
                          tmp.path().string(), "-o",
                          (tmp.path() / "out").string()}) == 1);
}

TEST_CASE("vocab artifact embeds version, config and motif records") {
  TempDir tmp("cli_vocab");
  const auto out = tmp.path() / "out";
  REQUIRE(cli::run_command({"vocab", "-d", "MUTAG", "--data-dir",
                            data_dir_arg(), "-o", out.string()}) == 0);
  const auto doc = load_json(out / "vocab.json");
  CHECK(doc.at("version").get<std::string>().find("hmg") == 0);
  CHECK(doc.at("config").at("command") == "vocab");
  CHECK(doc.at("config").at("keep_ratio").get<double>() == 1.0);
  CHECK(doc.at("motifs").size() == doc.at("vocab_size").get<std::size_t>());
  CHECK(std::filesystem::exists(out / "config.json"));
}

TEST_CASE("graph command writes vocab and hetgraph artifacts") {
  TempDir tmp("cli_graph");
  const auto out = tmp.path() / "out";
  REQUIRE(cli::run_command({"graph", "-d", "MUTAG", "--data-dir",
                            data_dir_arg(), "-o", out.string()}) == 0);
  const auto het = load_json(out / "hetgraph.json");
  CHECK(het.at("molecule_nodes").size() == 188);
  CHECK(het.at("edges").size() > 0);
}

TEST_CASE("sample command: first-hop edges are all motif-molecule at starts") {
  TempDir tmp("cli_sample");
  const auto out = tmp.path() / "out";
  REQUIRE(cli::run_command({"sample", "-d", "MUTAG", "--data-dir",
                            data_dir_arg(), "--rule", "all,1,2", "--starts",
                            "1", "--seed", "0", "-o", out.string()}) == 0);
  const auto doc = load_json(out / "subgraph.json");
  REQUIRE(doc.at("starting_nodes").size() == 1);
  const int start = doc.at("starting_nodes").at(0).get<int>();
  // every motif-molecule edge in the subgraph touches the start
  int start_edges = 0;
  for (const auto& edge : doc.at("edges")) {
    if (edge.at("type") == "motif-molecule") {
      CHECK((edge.at("u").get<int>() == start ||
             edge.at("v").get<int>() == start));
      ++start_edges;
    }
  }
  CHECK(start_edges > 0);
}

TEST_CASE("config file values are overridden by explicit flags") {
  TempDir tmp("cli_config");
  const auto config_file = tmp.path() / "config.json";
  test::write_file(config_file,
                   R"({"epochs": 1, "hidden_units": 4, "folds": 2,
                       "dropout": 0.0, "seed": 7})");
  const auto out = tmp.path() / "out";
  REQUIRE(cli::run_command({"cv", "-d", "MUTAG", "--data-dir", data_dir_arg(),
                            "-c", config_file.string(), "--hidden", "8", "-o",
                            out.string()}) == 0);
  const auto doc = load_json(out / "report.json");
  CHECK(doc.at("config").at("hidden_units").get<int>() == 8);   // flag wins
  CHECK(doc.at("config").at("epochs").get<int>() == 1);         // file value
  CHECK(doc.at("config").at("seed").get<std::uint64_t>() == 7);
  CHECK(doc.at("report").at("fold_accuracy").size() == 2);

  SUBCASE("unknown config keys are rejected") {
    test::write_file(config_file, R"({"epochz": 1})");
    CHECK(cli::run_command({"cv", "-d", "MUTAG", "--data-dir", data_dir_arg(),
                            "-c", config_file.string(), "-o",
                            out.string()}) == 1);
  }
}

TEST_CASE("cv report contains fold accuracies, csv exists") {
  TempDir tmp("cli_cv");
  const auto out = tmp.path() / "out";
  REQUIRE(cli::run_command({"cv", "-d", "MUTAG", "--data-dir", data_dir_arg(),
                            "--epochs", "2", "--hidden", "4", "--folds", "10",
                            "--seed", "0", "-o", out.string()}) == 0);
  const auto doc = load_json(out / "report.json");
  const auto& report = doc.at("report");
  CHECK(report.at("fold_accuracy").size() == 10);
  CHECK(report.contains("mean"));
  CHECK(report.contains("stddev"));
  CHECK(std::filesystem::exists(out / "report.csv"));

  std::ifstream csv(out / "report.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "dataset,fold,epoch,metric,value");
}

TEST_CASE("train command writes a checkpoint") {
  TempDir tmp("cli_train");
  const auto out = tmp.path() / "out";
  REQUIRE(cli::run_command({"train", "-d", "MUTAG", "--data-dir",
                            data_dir_arg(), "--epochs", "2", "--hidden", "4",
                            "-o", out.string()}) == 0);
  CHECK(std::filesystem::exists(out / "checkpoint.json"));
  const auto doc = load_json(out / "report.json");
  CHECK(doc.at("final_loss").get<double>() > 0.0);
}

TEST_CASE("multitask command reports per dataset") {
  TempDir tmp("cli_multi");
  const auto out = tmp.path() / "out";
  REQUIRE(cli::run_command({"multitask", "-d", "PTC", "-d", "PTC_FR",
                            "--data-dir", data_dir_arg(), "--epochs", "2",
                            "--hidden", "4", "--repetitions", "2",
                            "--train-fraction", "0.5", "-o",
                            out.string()}) == 0);
  const auto doc = load_json(out / "report.json");
  REQUIRE(doc.at("reports").size() == 2);
  CHECK(doc.at("reports").at(0).at("dataset") == "PTC");
  CHECK(doc.at("reports").at(1).at("dataset") == "PTC_FR");
}

TEST_CASE("sweep command emits one CSV row per grid point") {
  TempDir tmp("cli_sweep");
  const auto out = tmp.path() / "out";
  REQUIRE(cli::run_command({"sweep", "-d", "MUTAG", "--data-dir",
                            data_dir_arg(), "--kind", "keep_ratio", "--grid",
                            "0.5", "1.0", "--epochs", "1", "--folds", "2",
                            "--hidden", "4", "-o", out.string()}) == 0);
  std::ifstream csv(out / "sweep.csv");
  std::string line;
  int rows = 0;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 2);
}

TEST_CASE("identical config and seed give byte-identical reports") {
  TempDir tmp("cli_determinism");
  const auto out_a = tmp.path() / "a";
  const auto out_b = tmp.path() / "b";
  const std::vector<std::string> args = {
      "cv",      "-d",     "MUTAG", "--data-dir", data_dir_arg(),
      "--epochs", "2",     "--hidden", "4",       "--folds",
      "3",       "--seed", "11"};
  auto with_out = [&](const std::filesystem::path& out) {
    auto a = args;
    a.push_back("-o");
    a.push_back(out.string());
    return a;
  };
  REQUIRE(cli::run_command(with_out(out_a)) == 0);
  REQUIRE(cli::run_command(with_out(out_b)) == 0);

  auto strip_timing = [](json doc) {
    doc.at("report").erase("wall_clock_seconds");
    return doc.dump();
  };
  CHECK(strip_timing(load_json(out_a / "report.json")) ==
        strip_timing(load_json(out_b / "report.json")));
}
