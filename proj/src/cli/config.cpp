#include <fstream>

#include "fairtext/cli.hpp"
#include "fairtext/util.hpp"

namespace fairtext::cli {

using json = nlohmann::ordered_json;

namespace {

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError("unknown config key '" + where_ + it.key() + "'");
    }
  }

  template <class T>
  void get(const char* key, T& out) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + where_ + key + "' has the wrong type");
    }
  }
  void path(const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
    std::string s;
    get(key, s);
    if (s.empty()) return;
    std::filesystem::path p(s);
    out = p.is_absolute() || base.empty() ? p : base / p;
  }
  const json* child(const char* key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }
  std::string prefix(const char* key) const { return where_ + key + "."; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

void read_profile(const json& j, const std::string& where, SexProfile& p) {
  Reader r(j, where);
  r.get("length_mean", p.length_mean);
  r.get("length_sd", p.length_sd);
  r.get("signal_density", p.signal_density);
}

void read_synth(const json& j, SynthConfig& s) {
  Reader r(j, "synth.");
  std::string preset = s.preset;
  r.get("preset", preset);
  if (preset != s.preset) {
    auto seed = s.seed;
    s = synth_preset(preset);
    s.seed = seed;
  }
  r.get("n_patients", s.n_patients);
  r.get("female_ratio", s.female_ratio);
  r.get("case_ratio", s.case_ratio);
  r.get("white_ratio", s.white_ratio);
  r.get("bin", s.bin);
  if (auto* m = r.child("male")) read_profile(*m, "synth.male.", s.male);
  if (auto* f = r.child("female")) read_profile(*f, "synth.female.", s.female);
  r.get("male_boilerplate_share", s.male_boilerplate_share);
  r.get("control_signal_factor", s.control_signal_factor);
  r.get("severity_shape", s.severity_shape);
  r.get("biased_rate", s.biased_rate);
  r.get("name_share", s.name_share);
  r.get("case_biased_factor", s.case_biased_factor);
  r.get("stopword_rate", s.stopword_rate);
  r.get("signal_vocab", s.signal_vocab);
  r.get("clinical_vocab", s.clinical_vocab);
  r.get("shared_vocab", s.shared_vocab);
  r.get("filler_vocab", s.filler_vocab);
  r.get("filler_rate", s.filler_rate);
  r.get("boilerplate_sentence_tokens", s.boilerplate_sentence_tokens);
  r.get("clinical_sentence_tokens", s.clinical_sentence_tokens);
  r.get("notes_min", s.notes_min);
  r.get("notes_max", s.notes_max);
  r.get("duplicate_rate", s.duplicate_rate);
  r.get("other_type_rate", s.other_type_rate);
  r.get("post_index_rate", s.post_index_rate);
  r.get("telephone_share", s.telephone_share);
}

}  // namespace

std::uint64_t RunConfig::require_seed(std::string_view stage) const {
  if (!seed) throw ConfigError(std::string(stage) + " is stochastic and needs a seed (config 'seed' or --seed)");
  return *seed;
}

std::filesystem::path RunConfig::notes_path() const { return paths.notes.empty() ? run_dir / "corpus" / "notes.jsonl" : paths.notes; }
std::filesystem::path RunConfig::patients_path() const {
  return paths.patients.empty() ? run_dir / "corpus" / "patients.jsonl" : paths.patients;
}
std::filesystem::path RunConfig::diagnoses_path() const {
  return paths.diagnoses.empty() ? run_dir / "corpus" / "diagnoses.jsonl" : paths.diagnoses;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  c.source = j;
  Reader r(j, "");
  if (auto* p = r.child("paths")) {
    Reader pr(*p, "paths.");
    pr.path("notes", c.paths.notes, base_dir);
    pr.path("patients", c.paths.patients, base_dir);
    pr.path("diagnoses", c.paths.diagnoses, base_dir);
    pr.path("codes", c.paths.codes, base_dir);
    pr.path("stopwords", c.paths.stopwords, base_dir);
    pr.path("medical_terms", c.paths.medical_terms, base_dir);
    pr.path("first_names", c.paths.first_names, base_dir);
  }
  std::vector<std::string> types(c.cohort.note_types.begin(), c.cohort.note_types.end());
  r.get("note_types", types);
  c.cohort.note_types = {types.begin(), types.end()};
  r.get("dedup_threshold", c.cohort.dedup_threshold);
  std::string scope = c.cohort.dedup_global ? "global" : "patient";
  r.get("dedup_scope", scope);
  if (scope != "patient" && scope != "global") throw ConfigError("dedup_scope must be \"patient\" or \"global\"");
  c.cohort.dedup_global = scope == "global";
  r.get("recent_k", c.cohort.recent_k);
  std::vector<int> bins(c.cohort.bins.begin(), c.cohort.bins.end());
  r.get("bins", bins);
  c.cohort.bins = {bins.begin(), bins.end()};
  if (auto* m = r.child("match")) {
    Reader mr(*m, "match.");
    mr.get("birth_window_days", c.cohort.criteria.birth_window_days);
    mr.get("same_sex", c.cohort.criteria.same_sex);
    mr.get("encounter_window_months", c.cohort.criteria.encounter_window_months);
  }
  r.get("test_fraction", c.test_fraction);
  if (auto* d = r.child("debias")) {
    Reader dr(*d, "debias.");
    dr.get("pipeline", c.debias_pipeline);
    dr.get("fraction", c.debias_fraction);
  }
  if (auto* m = r.child("classifier")) {
    Reader mr(*m, "classifier.");
    mr.get("max_features", c.features.max_features);
    std::string kind(to_string(c.features.kind));
    mr.get("features", kind);
    c.features.kind = parse_feature_kind(kind);
    mr.get("keep_words", c.features.keep_words);
    mr.get("epochs", c.train.epochs);
    mr.get("learning_rate", c.train.learning_rate);
    mr.get("l2", c.train.l2);
  }
  if (auto* a = r.child("audit")) {
    Reader ar(*a, "audit.");
    ar.get("attribute", c.audit.attribute);
    ar.get("privileged", c.audit.privileged);
    ar.get("threshold", c.audit.parity.threshold);
    std::vector<double> zone{c.audit.parity.zone.lo, c.audit.parity.zone.hi};
    ar.get("uncertainty_zone", zone);
    if (zone.size() != 2 || zone[0] > zone[1]) throw ConfigError("audit.uncertainty_zone must be [lo, hi] with lo <= hi");
    c.audit.parity.zone = {zone[0], zone[1]};
    ar.get("min_group_size", c.audit.parity.min_group_size);
    ar.get("per_class_top", c.audit.per_class_top);
    ar.get("top_k", c.audit.top_k);
    ar.get("lime_samples", c.audit.lime_samples);
  }
  if (auto* s = r.child("synth")) read_synth(*s, c.synth);
  std::uint64_t seed = 0;
  if (j.contains("seed") && !j["seed"].is_null()) {
    r.get("seed", seed);
    c.seed = seed;
  } else {
    r.get("seed", seed);
  }
  std::string run_dir;
  r.get("run_dir", run_dir);
  if (!run_dir.empty()) c.run_dir = std::filesystem::path(run_dir).is_absolute() || base_dir.empty() ? std::filesystem::path(run_dir) : base_dir / run_dir;

  c.cohort.criteria.validate();
  if (!(c.cohort.dedup_threshold > 0.0 && c.cohort.dedup_threshold <= 1.0)) throw ConfigError("dedup_threshold must lie in (0, 1]");
  if (c.cohort.recent_k == 0) throw ConfigError("recent_k must be at least 1");
  if (c.cohort.bins.empty()) throw ConfigError("bins must not be empty");
  if (c.cohort.note_types.empty()) throw ConfigError("note_types must not be empty");
  if (!(c.test_fraction > 0.0 && c.test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  if (!(c.debias_fraction >= 0.0 && c.debias_fraction < 1.0)) throw ConfigError("debias.fraction must lie in [0, 1)");
  parse_pipeline(c.debias_pipeline);
  for (const auto* p : {&c.paths.codes, &c.paths.stopwords, &c.paths.medical_terms, &c.paths.first_names}) {
    if (!p->empty() && !std::filesystem::exists(*p)) throw ConfigError("configured lexicon file does not exist: " + p->string());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  return parse_config(read_file(path), path.parent_path());
}

json config_to_json(const RunConfig& c) {
  json j;
  auto p = [](const std::filesystem::path& x) { return x.empty() ? json() : json(x.string()); };
  j["paths"] = {{"notes", c.notes_path().string()},
                {"patients", c.patients_path().string()},
                {"diagnoses", c.diagnoses_path().string()},
                {"codes", p(c.paths.codes)},
                {"stopwords", p(c.paths.stopwords)},
                {"medical_terms", p(c.paths.medical_terms)},
                {"first_names", p(c.paths.first_names)}};
  j["note_types"] = c.cohort.note_types;
  j["dedup_threshold"] = c.cohort.dedup_threshold;
  j["dedup_scope"] = c.cohort.dedup_global ? "global" : "patient";
  j["recent_k"] = c.cohort.recent_k;
  j["bins"] = c.cohort.bins;
  j["match"] = {{"birth_window_days", c.cohort.criteria.birth_window_days},
                {"same_sex", c.cohort.criteria.same_sex},
                {"encounter_window_months", c.cohort.criteria.encounter_window_months}};
  j["test_fraction"] = c.test_fraction;
  j["debias"] = {{"pipeline", c.debias_pipeline}, {"fraction", c.debias_fraction}};
  j["classifier"] = {{"max_features", c.features.max_features},
                     {"features", to_string(c.features.kind)},
                     {"keep_words", c.features.keep_words},
                     {"epochs", c.train.epochs},
                     {"learning_rate", c.train.learning_rate},
                     {"l2", c.train.l2}};
  j["audit"] = {{"attribute", c.audit.attribute},
                {"privileged", c.audit.privileged},
                {"threshold", c.audit.parity.threshold},
                {"uncertainty_zone", {c.audit.parity.zone.lo, c.audit.parity.zone.hi}},
                {"min_group_size", c.audit.parity.min_group_size},
                {"per_class_top", c.audit.per_class_top},
                {"top_k", c.audit.top_k},
                {"lime_samples", c.audit.lime_samples}};
  const auto& s = c.synth;
  auto prof = [](const SexProfile& x) {
    return json{{"length_mean", x.length_mean}, {"length_sd", x.length_sd}, {"signal_density", x.signal_density}};
  };
  j["synth"] = {{"preset", s.preset},
                {"n_patients", s.n_patients},
                {"female_ratio", s.female_ratio},
                {"case_ratio", s.case_ratio},
                {"white_ratio", s.white_ratio},
                {"bin", s.bin},
                {"male", prof(s.male)},
                {"female", prof(s.female)},
                {"male_boilerplate_share", s.male_boilerplate_share},
                {"control_signal_factor", s.control_signal_factor},
                {"severity_shape", s.severity_shape},
                {"biased_rate", s.biased_rate},
                {"name_share", s.name_share},
                {"case_biased_factor", s.case_biased_factor},
                {"stopword_rate", s.stopword_rate},
                {"signal_vocab", s.signal_vocab},
                {"clinical_vocab", s.clinical_vocab},
                {"shared_vocab", s.shared_vocab},
                {"filler_vocab", s.filler_vocab},
                {"filler_rate", s.filler_rate},
                {"boilerplate_sentence_tokens", s.boilerplate_sentence_tokens},
                {"clinical_sentence_tokens", s.clinical_sentence_tokens},
                {"notes_min", s.notes_min},
                {"notes_max", s.notes_max},
                {"duplicate_rate", s.duplicate_rate},
                {"other_type_rate", s.other_type_rate},
                {"post_index_rate", s.post_index_rate},
                {"telephone_share", s.telephone_share}};
  j["seed"] = c.seed ? json(*c.seed) : json();
  j["run_dir"] = c.run_dir.string();
  return j;
}

std::string config_hash(const RunConfig& config) {
  json j = config_to_json(config);
  j.erase("run_dir");
  return hex64(fnv1a64(j.dump()));
}

}  // namespace fairtext::cli
