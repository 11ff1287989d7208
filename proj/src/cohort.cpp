#include "fairtext/cohort.hpp"

#include <algorithm>
#include <map>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

namespace fairtext {

CodeSet::CodeSet(std::set<std::pair<CodeVocabulary, std::string>> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ConfigError("code set is empty");
}

CodeSet CodeSet::load(const std::filesystem::path& path) {
  std::set<std::pair<CodeVocabulary, std::string>> entries;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    auto cols = split(line, '\t');
    if (cols.size() < 2) throw DataError(path.string() + ": code line " + std::to_string(lineno) + " has no code column");
    auto v = parse_code_vocabulary(cols[0]);
    if (!v) throw DataError(path.string() + ": unknown vocabulary '" + cols[0] + "'");
    std::string code(trim(cols[1]));
    if (code.empty()) throw DataError(path.string() + ": empty code on line " + std::to_string(lineno));
    entries.emplace(*v, code);
  }
  return CodeSet(std::move(entries));
}

const CodeSet& CodeSet::shipped() {
  static const CodeSet codes = load(data_path("anxiety_codes.tsv"));
  return codes;
}

bool CodeSet::contains(CodeVocabulary v, std::string_view code) const {
  return entries_.count({v, std::string(trim(code))}) > 0;
}

int MatchCriteria::encounter_window_days() const {
  return static_cast<int>(std::lround(encounter_window_months * 365.25 / 12.0));
}

void MatchCriteria::validate() const {
  if (birth_window_days < 0) throw ConfigError("birth_window_days must be >= 0");
  if (encounter_window_months < 1) throw ConfigError("encounter_window_months must be >= 1");
}

CohortIndex CohortIndex::build(const std::vector<PatientRecord>& patients, const std::vector<RawNote>& all_notes,
                               const std::vector<DiagnosisEvent>& diagnoses, const CodeSet& codes,
                               std::vector<IngestWarning>* warnings) {
  CohortIndex idx;
  for (const auto& p : patients) idx.patients.emplace(p.patient_id, p);
  for (const auto& n : all_notes) idx.encounters[n.patient_id].push_back(n.timestamp);
  for (auto& [id, ts] : idx.encounters) std::sort(ts.begin(), ts.end());
  std::set<std::string> unknown;
  for (const auto& d : diagnoses) {
    if (!codes.contains(d.vocabulary, d.code)) continue;
    if (!idx.patients.count(d.patient_id)) {
      unknown.insert(d.patient_id);
      continue;
    }
    auto [it, fresh] = idx.first_code_date.try_emplace(d.patient_id, d.date);
    if (!fresh && d.date < it->second) it->second = d.date;
  }
  if (warnings) {
    for (const auto& id : unknown) {
      warnings->push_back({0, "diagnosis references unknown patient " + id + "; excluded"});
    }
  }
  return idx;
}

bool CohortIndex::has_encounter(const std::string& patient_id, Date cutoff, int window_days) const {
  auto it = encounters.find(patient_id);
  if (it == encounters.end()) return false;
  Timestamp hi = start_of(cutoff);
  Timestamp lo = start_of(cutoff - std::chrono::days{window_days});
  auto pos = std::lower_bound(it->second.begin(), it->second.end(), lo);
  return pos != it->second.end() && *pos < hi;
}

std::vector<CaseDefinition> find_cases(const CohortIndex& index, const MatchCriteria& criteria,
                                       std::vector<IngestWarning>* warnings) {
  criteria.validate();
  std::vector<CaseDefinition> out;
  for (const auto& [id, dx] : index.first_code_date) {
    if (!index.has_encounter(id, dx, criteria.encounter_window_days())) continue;
    const PatientRecord& p = index.patients.at(id);
    if (dx < p.birth_date) {
      if (warnings) warnings->push_back({0, "patient " + id + " diagnosed before birth; excluded"});
      continue;
    }
    out.push_back({id, dx, whole_years_between(p.birth_date, dx)});
  }
  std::sort(out.begin(), out.end(),
            [](const CaseDefinition& a, const CaseDefinition& b) { return a.patient_id < b.patient_id; });
  return out;
}

std::optional<int> assign_bin(const CaseDefinition& c, const PatientRecord& patient, const std::set<int>& bins) {
  if (bins.empty()) throw ConfigError("bin list is empty");
  if (c.first_dx_date < patient.birth_date) {
    throw DataError("case " + c.patient_id + ": first diagnosis " + format_date(c.first_dx_date) +
                    " precedes birth date " + format_date(patient.birth_date));
  }
  int age = whole_years_between(patient.birth_date, c.first_dx_date);
  if (bins.count(age)) return age;
  return std::nullopt;
}

bool control_eligible(const CaseDefinition& c, const PatientRecord& case_patient, const PatientRecord& candidate,
                      const CohortIndex& index, const MatchCriteria& criteria) {
  if (candidate.patient_id == case_patient.patient_id) return false;
  if (criteria.same_sex && candidate.sex != case_patient.sex) return false;
  auto gap = (candidate.birth_date - case_patient.birth_date).count();
  if (std::abs(gap) > criteria.birth_window_days) return false;
  auto dx = index.first_code_date.find(candidate.patient_id);
  if (dx != index.first_code_date.end() && dx->second <= c.first_dx_date) return false;
  return index.has_encounter(candidate.patient_id, c.first_dx_date, criteria.encounter_window_days());
}

std::size_t seeded_choice(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("seeded_choice over an empty set");
  std::mt19937_64 rng(seed);
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::optional<PatientRecord> match_control(const CaseDefinition& c, const std::vector<PatientRecord>& pool,
                                           const CohortIndex& index, const MatchCriteria& criteria,
                                           std::uint64_t seed) {
  const PatientRecord& case_patient = index.patients.at(c.patient_id);
  std::vector<const PatientRecord*> eligible;
  for (const auto& cand : pool) {
    if (control_eligible(c, case_patient, cand, index, criteria)) eligible.push_back(&cand);
  }
  if (eligible.empty()) return std::nullopt;
  return *eligible[seeded_choice(eligible.size(), seed)];
}

PatientTimeline truncate_history(const PatientTimeline& timeline, Date cutoff) {
  PatientTimeline out;
  out.patient = timeline.patient;
  Timestamp limit = start_of(cutoff);
  for (const auto& n : timeline.notes) {
    if (n.timestamp < limit) out.notes.push_back(n);
  }
  for (const auto& id : timeline.empty_notes) {
    for (const auto& n : out.notes) {
      if (n.note_id == id) {
        out.empty_notes.push_back(id);
        break;
      }
    }
  }
  return out;
}

std::string_view to_string(Label l) { return l == Label::Case ? "case" : "control"; }

std::vector<CohortBin> build_bins(const std::vector<PatientTimeline>& timelines, const CohortIndex& index,
                                  const std::vector<CaseDefinition>& cases, const std::set<int>& bins,
                                  const BinOptions& options) {
  options.criteria.validate();
  if (options.recent_k == 0) throw ConfigError("recent-k must be at least 1");

  std::unordered_map<std::string, const PatientTimeline*> by_id;
  for (const auto& t : timelines) by_id.emplace(t.patient.patient_id, &t);

  std::map<int, std::vector<const CaseDefinition*>> per_bin;
  std::unordered_set<std::string> case_ids;
  std::vector<std::string> rejected;
  for (const auto& c : cases) {
    auto pit = index.patients.find(c.patient_id);
    if (pit == index.patients.end()) continue;
    std::optional<int> b;
    try {
      b = assign_bin(c, pit->second, bins);
    } catch (const DataError& e) {
      rejected.push_back(e.what());
      continue;
    }
    if (!b) continue;
    per_bin[*b].push_back(&c);
    case_ids.insert(c.patient_id);
  }

  std::vector<PatientRecord> pool;
  for (const auto& [id, p] : index.patients) {
    if (!case_ids.count(id)) pool.push_back(p);
  }
  std::sort(pool.begin(), pool.end(),
            [](const PatientRecord& a, const PatientRecord& b) { return a.patient_id < b.patient_id; });

  auto prepare = [&](const std::string& id, Date cutoff) {
    auto it = by_id.find(id);
    PatientTimeline t;
    if (it == by_id.end()) {
      t.patient = index.patients.at(id);
    } else {
      t = select_recent(truncate_history(*it->second, cutoff), options.recent_k);
    }
    return t;
  };

  std::vector<CohortBin> out;
  for (int b : bins) {
    CohortBin cb;
    cb.bin = b;
    cb.log = rejected;
    for (const CaseDefinition* c : per_bin[b]) {
      std::uint64_t seed = derive_seed(options.seed, "match/" + std::to_string(b) + "/" + c->patient_id);
      auto control = match_control(*c, pool, index, options.criteria, seed);
      if (!control) {
        cb.log.push_back("case " + c->patient_id + ": no eligible control; dropped");
        continue;
      }
      std::erase_if(pool, [&](const PatientRecord& p) { return p.patient_id == control->patient_id; });
      PatientTimeline case_t = prepare(c->patient_id, c->first_dx_date);
      PatientTimeline ctrl_t = prepare(control->patient_id, c->first_dx_date);
      if (case_t.notes.empty() || ctrl_t.notes.empty()) {
        cb.log.push_back("pair " + c->patient_id + "/" + control->patient_id +
                         ": member without notes before the index date; dropped");
        continue;
      }
      std::size_t pair = cb.members.size() / 2;
      cb.members.push_back({std::move(case_t), Label::Case, pair, c->first_dx_date});
      cb.members.push_back({std::move(ctrl_t), Label::Control, pair, c->first_dx_date});
    }
    if (cb.members.empty() && !options.allow_empty_bins) throw DataError("age bin " + std::to_string(b) + " is empty after matching");
    out.push_back(std::move(cb));
  }
  return out;
}

CohortBin build_bin(const std::vector<PatientTimeline>& timelines, const CohortIndex& index,
                    const std::vector<CaseDefinition>& cases, int bin, const BinOptions& options) {
  return std::move(build_bins(timelines, index, cases, {bin}, options).front());
}

SplitIndices split_pairs(const CohortBin& bin, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) throw ConfigError("test fraction must lie in [0, 1)");
  std::size_t pairs = bin.cases();
  std::vector<std::size_t> order(pairs);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, "split/" + std::to_string(bin.bin)));
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t n_test = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(pairs)));
  SplitIndices s;
  for (std::size_t k = 0; k < pairs; ++k) {
    auto& dst = k < n_test ? s.test : s.train;
    dst.push_back(2 * order[k]);
    dst.push_back(2 * order[k] + 1);
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace fairtext
