#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairtext/corpus.hpp"

namespace fairtext {

class CodeSet {
 public:
  CodeSet() = default;
  explicit CodeSet(std::set<std::pair<CodeVocabulary, std::string>> entries);
  // Lines of vocabulary<TAB>code<TAB>description.
  static CodeSet load(const std::filesystem::path& path);
  static const CodeSet& shipped();

  bool contains(CodeVocabulary v, std::string_view code) const;
  std::size_t size() const { return entries_.size(); }
  const std::set<std::pair<CodeVocabulary, std::string>>& entries() const { return entries_; }

 private:
  std::set<std::pair<CodeVocabulary, std::string>> entries_;
};

struct MatchCriteria {
  int birth_window_days = 30;
  bool same_sex = true;
  int encounter_window_months = 18;
  // Months converted at 365.25 / 12 days each, rounded (18 -> 548).
  int encounter_window_days() const;
  void validate() const;
};

struct CaseDefinition {
  std::string patient_id;
  Date first_dx_date;
  int age_at_dx_years = 0;
};

// Lookup tables shared by case finding and matching.
struct CohortIndex {
  std::unordered_map<std::string, PatientRecord> patients;
  // All note timestamps per patient (any note type), ascending.
  std::unordered_map<std::string, std::vector<Timestamp>> encounters;
  // Earliest date of a code-set diagnosis per patient.
  std::unordered_map<std::string, Date> first_code_date;

  static CohortIndex build(const std::vector<PatientRecord>& patients, const std::vector<RawNote>& all_notes,
                           const std::vector<DiagnosisEvent>& diagnoses, const CodeSet& codes,
                           std::vector<IngestWarning>* warnings = nullptr);
  // At least one encounter in [cutoff - window_days, cutoff).
  bool has_encounter(const std::string& patient_id, Date cutoff, int window_days) const;
};

// One case per patient with a code-set diagnosis and an encounter in the
// window before the first such diagnosis. Sorted by patient_id.
std::vector<CaseDefinition> find_cases(const CohortIndex& index, const MatchCriteria& criteria,
                                       std::vector<IngestWarning>* warnings = nullptr);

// Whole years at first diagnosis if that age is one of `bins`. Throws
// DataError when the diagnosis predates birth.
std::optional<int> assign_bin(const CaseDefinition& c, const PatientRecord& patient, const std::set<int>& bins);

bool control_eligible(const CaseDefinition& c, const PatientRecord& case_patient, const PatientRecord& candidate,
                      const CohortIndex& index, const MatchCriteria& criteria);

// Index into a list of `n` eligible candidates, uniform under `seed`.
std::size_t seeded_choice(std::size_t n, std::uint64_t seed);

// Uniformly chosen eligible candidate from `pool` (taken in the given order).
std::optional<PatientRecord> match_control(const CaseDefinition& c, const std::vector<PatientRecord>& pool,
                                           const CohortIndex& index, const MatchCriteria& criteria,
                                           std::uint64_t seed);

// Notes strictly before the start of `cutoff`.
PatientTimeline truncate_history(const PatientTimeline& timeline, Date cutoff);

enum class Label { Control = 0, Case = 1 };
std::string_view to_string(Label l);

struct CohortMember {
  PatientTimeline timeline;
  Label label = Label::Case;
  std::size_t pair_id = 0;
  Date cutoff;
};

struct CohortBin {
  int bin = 0;
  // Pairs in order: members[2k] is the case and members[2k+1] its control.
  std::vector<CohortMember> members;
  std::vector<std::string> log;
  std::size_t cases() const { return members.size() / 2; }
};

struct BinOptions {
  MatchCriteria criteria;
  std::size_t recent_k = 25;
  std::uint64_t seed = 0;
  // Return empty bins (with their log) instead of failing.
  bool allow_empty_bins = false;
};

// Builds the requested bins in ascending order. Patients that are cases of
// any requested bin never serve as controls, and a control is used at most
// once across all bins. `timelines` carry the already type-filtered and
// de-duplicated notes; members are truncated at the case's first diagnosis
// and cut to the recent_k latest notes. Pairs with an empty member are
// dropped. Throws DataError for a bin that ends up empty.
std::vector<CohortBin> build_bins(const std::vector<PatientTimeline>& timelines, const CohortIndex& index,
                                  const std::vector<CaseDefinition>& cases, const std::set<int>& bins,
                                  const BinOptions& options);

CohortBin build_bin(const std::vector<PatientTimeline>& timelines, const CohortIndex& index,
                    const std::vector<CaseDefinition>& cases, int bin, const BinOptions& options);

struct SplitIndices {
  std::vector<std::size_t> train;  // member indices
  std::vector<std::size_t> test;
};

// Seeded split by matched pair, so a case and its control stay together.
SplitIndices split_pairs(const CohortBin& bin, double test_fraction, std::uint64_t seed);

}  // namespace fairtext
