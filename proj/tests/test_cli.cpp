#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fairtext/cli.hpp"
#include "fairtext/reports.hpp"

using namespace fairtext;
namespace fs = std::filesystem;

namespace {

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fairtext");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream sink;
  auto* old_out = std::cout.rdbuf(sink.rdbuf());
  auto* old_err = std::cerr.rdbuf(sink.rdbuf());
  int rc = cli::run(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return rc;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config accepts comments and rejects unknown keys") {
  auto c = cli::parse_config(R"({
    // line comment
    "bins": [5, 10], /* block */
    "seed": 7,
    "classifier": {"max_features": 100, "features": "counts"},
    "audit": {"uncertainty_zone": [0.3, 0.7]},
    "debias": {"pipeline": "tfidf_filt,gen_sub", "fraction": 0.1}
  })");
  CHECK(c.cohort.bins == std::set<int>{5, 10});
  CHECK(*c.seed == 7);
  CHECK(c.features.max_features == 100);
  CHECK(c.features.kind == FeatureKind::Counts);
  CHECK(c.audit.parity.zone.lo == 0.3);
  CHECK(c.debias_fraction == 0.1);
  CHECK_THROWS_AS(cli::parse_config(R"({"bins": [5], "colour": 1})"), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(R"({"classifier": {"epoch": 3}})"), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(R"({"test_fraction": 1.5})"), ConfigError);
  CHECK_THROWS_AS(cli::parse_config(R"({"debias": {"pipeline": "bogus"}})"), ConfigError);
  CHECK_THROWS_AS(cli::parse_config("{"), ConfigError);
  CHECK_FALSE(cli::parse_config("{}").seed);
  CHECK_THROWS_AS(cli::parse_config("{}").require_seed("train"), ConfigError);
}

TEST_CASE("config hash tracks content") {
  auto a = cli::parse_config(R"({"seed": 1})");
  auto b = cli::parse_config(R"({"seed": 1 /* same */})");
  auto c = cli::parse_config(R"({"seed": 2})");
  CHECK(cli::config_hash(a) == cli::config_hash(b));
  CHECK(cli::config_hash(a) != cli::config_hash(c));
  auto round = cli::parse_config(cli::config_to_json(a).dump());
  CHECK(cli::config_hash(round) == cli::config_hash(a));
}

TEST_CASE("shipped default config parses") {
  auto c = cli::load_config(fs::path(FAIRTEXT_DATA_DIR) / "default_config.json");
  CHECK(c.cohort.bins == std::set<int>{5, 8, 10, 12, 15});
  CHECK(c.cohort.dedup_threshold == 0.8);
}

TEST_CASE("command line end to end") {
  auto dir = fs::temp_directory_path() / "fairtext_cli_test";
  fs::remove_all(dir);
  const std::string d = dir.string();
  CHECK(invoke({"--run-dir", d, "cohort", "--seed", "1"}) == 1);
  CHECK(invoke({"--run-dir", d, "synth"}) == 2);
  CHECK(invoke({"--run-dir", d, "bogus"}) == 2);
  REQUIRE(invoke({"--run-dir", d, "--seed", "3", "synth", "-n", "160"}) == 0);
  CHECK(fs::exists(dir / "corpus" / "notes.jsonl"));
  CHECK(fs::exists(dir / "corpus" / "manifest.json"));
  CHECK(slurp(dir / "corpus" / "verify.txt").find("FAIL") == std::string::npos);
  REQUIRE(invoke({"--run-dir", d, "--seed", "3", "ingest"}) == 0);
  REQUIRE(invoke({"--run-dir", d, "--seed", "3", "cohort"}) == 0);
  auto docs = cli::read_documents(dir / "cohort" / "documents.jsonl");
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].bin == 5);
  CHECK(docs[0].docs.size() == docs[0].labels.size());
  REQUIRE(invoke({"--run-dir", d, "--seed", "3", "stats"}) == 0);
  CHECK(fs::exists(dir / "stats" / "stats.txt"));
  REQUIRE(invoke({"--run-dir", d, "--seed", "3", "debias", "--pipeline", "tfidf_filt,gen_sub"}) == 0);
  REQUIRE(invoke({"--run-dir", d, "--seed", "3", "train"}) == 0);
  auto preds = read_predictions(dir / "train" / "predictions.jsonl");
  CHECK(preds.warnings.empty());
  CHECK(preds.records.size() == docs[0].split.test.size());
  REQUIRE(invoke({"--run-dir", d, "--seed", "3", "audit"}) == 0);
  CHECK(slurp(dir / "audit" / "parity.jsonl").find("\"privileged\":\"M\"") != std::string::npos);
  REQUIRE(invoke({"--run-dir", d, "--seed", "3", "explain"}) == 0);
  CHECK(fs::exists(dir / "explain" / "explanations.jsonl"));

  auto first = slurp(dir / "train" / "predictions.jsonl");
  REQUIRE(invoke({"--run-dir", d, "--seed", "3", "train"}) == 0);
  CHECK(slurp(dir / "train" / "predictions.jsonl") == first);
  fs::remove_all(dir);
}
