#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairtext/explain.hpp"
#include "fairtext/fairness.hpp"
#include "fairtext/pipeline.hpp"
#include "fairtext/synth.hpp"

namespace fairtext::cli {

struct Paths {
  std::filesystem::path notes, patients, diagnoses;  // empty: <run_dir>/corpus/*.jsonl
  std::filesystem::path codes, stopwords, medical_terms, first_names;  // empty: shipped lexicons
};

struct AuditConfig {
  std::string attribute = "sex";
  std::string privileged = "M";
  ParityOptions parity;
  std::size_t per_class_top = 10;
  std::size_t top_k = 5;
  std::size_t lime_samples = 500;
};

struct RunConfig {
  Paths paths;
  CohortOptions cohort;
  double test_fraction = 0.2;
  std::string debias_pipeline;
  double debias_fraction = 0.2;
  FeatureOptions features;
  TrainOptions train;
  AuditConfig audit;
  SynthConfig synth;
  std::optional<std::uint64_t> seed;
  std::filesystem::path run_dir = "runs/default";
  nlohmann::ordered_json source;  // the parsed file, for the manifest snapshot

  std::uint64_t require_seed(std::string_view stage) const;
  std::filesystem::path notes_path() const;
  std::filesystem::path patients_path() const;
  std::filesystem::path diagnoses_path() const;
};

// JSON with // and /* */ comments. Unknown keys are configuration errors.
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

int run(int argc, char** argv);

}  // namespace fairtext::cli
