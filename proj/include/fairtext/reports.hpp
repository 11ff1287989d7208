#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairtext/lexical.hpp"
#include "fairtext/pipeline.hpp"

namespace fairtext::cli {

// documents.jsonl: one member per line with bin, patient_id, label, split,
// attributes and the note texts.
void write_documents(const std::filesystem::path& path, const std::vector<BinDataset>& bins);
std::vector<BinDataset> read_documents(const std::filesystem::path& path);

void write_members(const std::filesystem::path& path, const std::vector<CohortBin>& bins,
                   const std::vector<BinDataset>& data);

struct BinStats {
  int bin = 0;
  std::size_t count = 0;
  double case_pct = 0;
  std::map<std::string, double> attribute_pct;  // e.g. "sex=F" -> 36
  DistributionStats overall;
  DistributionReport by_sex;
  DistributionReport by_race;
};

void write_stats_jsonl(const std::filesystem::path& path, const std::vector<BinStats>& stats);
// Per-bin table, then per-subgroup tables within each bin.
std::string format_stats_tables(const std::vector<BinStats>& stats);

class Manifest {
 public:
  Manifest(std::string command, nlohmann::ordered_json config, std::string config_hash);
  void count(const std::string& stage, std::size_t in, std::size_t out);
  void input(const std::filesystem::path& p);
  void artifact(const std::filesystem::path& p);
  void note(const std::string& key, nlohmann::ordered_json value);
  void write(const std::filesystem::path& dir) const;

 private:
  nlohmann::ordered_json j_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace fairtext::cli
