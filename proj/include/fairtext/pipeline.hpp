#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "fairtext/cohort.hpp"
#include "fairtext/corpus.hpp"
#include "fairtext/debias.hpp"
#include "fairtext/model.hpp"

namespace fairtext {

struct CorpusData {
  std::vector<PatientRecord> patients;
  std::vector<RawNote> notes;
  std::vector<DiagnosisEvent> diagnoses;
};

struct CohortOptions {
  std::set<std::string> note_types{"Progress Notes", "Telephone Encounters"};
  double dedup_threshold = 0.8;
  bool dedup_global = false;  // compare notes across patients instead of within each chart
  std::size_t recent_k = 25;
  std::set<int> bins{5, 8, 10, 12, 15};
  MatchCriteria criteria;
  std::uint64_t seed = 0;
};

struct StageCount {
  std::string stage;
  std::size_t in = 0;
  std::size_t out = 0;
};

struct CohortResult {
  std::vector<CohortBin> bins;
  std::vector<IngestWarning> warnings;
  std::vector<StageCount> counts;
};

// Note-type filter, per-patient near-duplicate removal, case finding and
// matching. Bins that end up empty are reported in the warnings and skipped
// unless `require_all_bins` is set.
CohortResult build_cohort(const CorpusData& corpus, const CodeSet& codes, const CohortOptions& options,
                          const StopwordSet& stopwords, bool require_all_bins = false);

struct BinDataset {
  int bin = 0;
  std::vector<Document> docs;  // one per member, in member order
  std::vector<int> labels;
  std::vector<PredictionRecord> roster;  // label, bin and attributes; probability unset
  SplitIndices split;
};

BinDataset make_dataset(const CohortBin& bin, double test_fraction, std::uint64_t seed);

struct ExperimentOptions {
  std::vector<Transform> pipeline;
  double fraction = 0.2;
  FeatureOptions features;
  TrainOptions train;
  GenSubOptions gen_sub = GenSubOptions::shipped();
  std::uint64_t seed = 0;
};

struct ExperimentResult {
  TfIdfModel tfidf;
  std::vector<Document> transformed;
  Classifier classifier;
  std::vector<PredictionRecord> test_predictions;
};

// Fits tf-idf statistics on the original training documents, applies the
// de-biasing pipeline to every document, trains on the transformed training
// split and predicts the transformed test split.
ExperimentResult run_experiment(const BinDataset& data, const ExperimentOptions& options, const StopwordSet& stopwords);

}  // namespace fairtext
