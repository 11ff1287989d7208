#include "fairtext/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "fairtext/kernels.hpp"

namespace fairtext {

using nlohmann::json;

std::string_view to_string(Sex s) { return s == Sex::M ? "M" : "F"; }
std::string_view to_string(CodeVocabulary v) { return v == CodeVocabulary::ICD9CM ? "ICD9CM" : "ICD10CM"; }

std::optional<Sex> parse_sex(std::string_view s) {
  s = trim(s);
  if (s == "M") return Sex::M;
  if (s == "F") return Sex::F;
  return std::nullopt;
}

std::optional<CodeVocabulary> parse_code_vocabulary(std::string_view s) {
  s = trim(s);
  if (s == "ICD9CM") return CodeVocabulary::ICD9CM;
  if (s == "ICD10CM") return CodeVocabulary::ICD10CM;
  return std::nullopt;
}

namespace {

class LineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw LineError(std::string("missing field '") + name + "'");
  if (!it->is_string()) throw LineError(std::string("field '") + name + "' is not a string");
  return it->get<std::string>();
}

template <class T, class Parse>
Ingested<T> ingest(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file: " + path.string());
  Ingested<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      if (!j.is_object()) throw LineError("record is not an object");
      out.records.push_back(parse(j));
    } catch (const json::exception& e) {
      out.warnings.push_back({lineno, std::string("invalid JSON: ") + e.what()});
    } catch (const LineError& e) {
      out.warnings.push_back({lineno, e.what()});
    }
  }
  return out;
}

}  // namespace

Ingested<RawNote> ingest_notes(const std::filesystem::path& path) {
  std::unordered_set<std::string> seen;
  auto out = ingest<RawNote>(path, [&](const json& j) {
    RawNote n;
    n.patient_id = field(j, "patient_id");
    n.note_id = field(j, "note_id");
    n.note_type = field(j, "note_type");
    std::string ts = field(j, "timestamp");
    auto t = parse_timestamp(ts);
    if (!t) throw LineError("unparseable timestamp '" + ts + "'");
    n.timestamp = *t;
    n.text = field(j, "text");
    if (n.patient_id.empty() || n.note_id.empty()) throw LineError("empty identifier");
    if (!seen.insert(n.note_id).second) throw LineError("duplicate note_id '" + n.note_id + "'");
    return n;
  });
  return out;
}

Ingested<PatientRecord> ingest_patients(const std::filesystem::path& path) {
  std::unordered_set<std::string> seen;
  return ingest<PatientRecord>(path, [&](const json& j) {
    PatientRecord p;
    p.patient_id = field(j, "patient_id");
    std::string sex = field(j, "sex");
    auto s = parse_sex(sex);
    if (!s) throw LineError("sex must be M or F, got '" + sex + "'");
    p.sex = *s;
    p.race = field(j, "race");
    std::string bd = field(j, "birth_date");
    auto d = parse_date(bd);
    if (!d) throw LineError("unparseable birth_date '" + bd + "'");
    p.birth_date = *d;
    if (p.patient_id.empty()) throw LineError("empty patient_id");
    if (!seen.insert(p.patient_id).second) throw LineError("duplicate patient_id '" + p.patient_id + "'");
    return p;
  });
}

Ingested<DiagnosisEvent> ingest_diagnoses(const std::filesystem::path& path) {
  return ingest<DiagnosisEvent>(path, [](const json& j) {
    DiagnosisEvent e;
    e.patient_id = field(j, "patient_id");
    e.code = std::string(trim(field(j, "code")));
    if (e.code.empty()) throw LineError("empty code");
    std::string voc = field(j, "vocabulary");
    auto v = parse_code_vocabulary(voc);
    if (!v) throw LineError("vocabulary must be ICD9CM or ICD10CM, got '" + voc + "'");
    e.vocabulary = *v;
    std::string ds = field(j, "date");
    auto d = parse_date(ds);
    if (!d) throw LineError("unparseable date '" + ds + "'");
    e.date = *d;
    return e;
  });
}

void write_notes(std::ostream& out, const std::vector<RawNote>& notes) {
  for (const auto& n : notes) {
    json j = {{"patient_id", n.patient_id},
              {"note_id", n.note_id},
              {"note_type", n.note_type},
              {"timestamp", format_timestamp(n.timestamp)},
              {"text", n.text}};
    out << j.dump() << '\n';
  }
}

void write_patients(std::ostream& out, const std::vector<PatientRecord>& patients) {
  for (const auto& p : patients) {
    json j = {{"patient_id", p.patient_id},
              {"sex", std::string(to_string(p.sex))},
              {"race", p.race},
              {"birth_date", format_date(p.birth_date)}};
    out << j.dump() << '\n';
  }
}

void write_diagnoses(std::ostream& out, const std::vector<DiagnosisEvent>& diagnoses) {
  for (const auto& d : diagnoses) {
    json j = {{"patient_id", d.patient_id},
              {"code", d.code},
              {"vocabulary", std::string(to_string(d.vocabulary))},
              {"date", format_date(d.date)}};
    out << j.dump() << '\n';
  }
}

std::vector<RawNote> filter_note_types(const std::vector<RawNote>& notes, const std::set<std::string>& allowed) {
  if (allowed.empty()) throw ConfigError("note-type allowlist is empty");
  std::set<std::string, std::less<>> keys;
  for (const auto& a : allowed) keys.emplace(trim(a));
  std::vector<RawNote> out;
  for (const auto& n : notes) {
    if (keys.count(trim(n.note_type))) out.push_back(n);
  }
  return out;
}

void sort_notes(std::vector<RawNote>& notes) {
  std::sort(notes.begin(), notes.end(), [](const RawNote& a, const RawNote& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.note_id < b.note_id;
  });
}

std::vector<PatientTimeline> build_timelines(const std::vector<PatientRecord>& patients,
                                             const std::vector<RawNote>& notes,
                                             std::vector<IngestWarning>* warnings) {
  std::map<std::string, PatientTimeline> by_id;
  for (const auto& p : patients) by_id[p.patient_id].patient = p;
  for (const auto& n : notes) {
    auto it = by_id.find(n.patient_id);
    if (it == by_id.end()) {
      if (warnings) warnings->push_back({0, "note " + n.note_id + " references unknown patient " + n.patient_id});
      continue;
    }
    if (n.timestamp < start_of(it->second.patient.birth_date)) {
      if (warnings) warnings->push_back({0, "note " + n.note_id + " predates birth of patient " + n.patient_id});
      continue;
    }
    it->second.notes.push_back(n);
  }
  std::vector<PatientTimeline> out;
  out.reserve(by_id.size());
  for (auto& [id, t] : by_id) {
    sort_notes(t.notes);
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

// Dense count vectors over the timeline's local vocabulary.
struct LocalVectors {
  std::vector<std::vector<double>> rows;
  std::vector<double> norm2;
  std::size_t width = 0;
};

LocalVectors local_vectors(const PatientTimeline& t, const StopwordSet& stopwords) {
  std::unordered_map<std::string, std::size_t> ids;
  std::vector<std::vector<std::size_t>> token_ids(t.notes.size());
  for (std::size_t i = 0; i < t.notes.size(); ++i) {
    for (auto& tok : tokenize(t.notes[i].text, stopwords)) {
      auto [it, fresh] = ids.try_emplace(std::move(tok), ids.size());
      token_ids[i].push_back(it->second);
    }
  }
  LocalVectors lv;
  lv.width = ids.size();
  lv.rows.assign(t.notes.size(), std::vector<double>(lv.width, 0.0));
  lv.norm2.resize(t.notes.size());
  for (std::size_t i = 0; i < t.notes.size(); ++i) {
    for (std::size_t id : token_ids[i]) lv.rows[i][id] += 1.0;
    lv.norm2[i] = kernels::sum_squares(lv.rows[i]);
  }
  return lv;
}

// cos >= threshold, evaluated on exact integer counts.
bool similar(double dot, double na, double nb, double threshold) {
  long double lhs = static_cast<long double>(dot) * dot;
  // 0.8 is stored slightly above 0.8; an exact 16/20 must still count.
  long double rhs = static_cast<long double>(threshold) * threshold * na * nb * (1.0L - 1e-12L);
  return dot > 0 && lhs >= rhs;
}

void check_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("dedup threshold must lie in (0, 1]");
}

}  // namespace

PatientTimeline dedup_notes(const PatientTimeline& timeline, double threshold, const StopwordSet& stopwords,
                            DedupStats* stats) {
  check_threshold(threshold);
  LocalVectors lv = local_vectors(timeline, stopwords);
  PatientTimeline out;
  out.patient = timeline.patient;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < timeline.notes.size(); ++i) {
    const RawNote& note = timeline.notes[i];
    if (lv.norm2[i] == 0.0) {
      out.notes.push_back(note);
      out.empty_notes.push_back(note.note_id);
      if (stats) ++stats->empty;
      continue;
    }
    bool dup = false;
    for (std::size_t j : kept) {
      double d = kernels::dot(lv.rows[i], lv.rows[j]);
      if (similar(d, lv.norm2[i], lv.norm2[j], threshold)) {
        dup = true;
        break;
      }
    }
    if (dup) {
      if (stats) ++stats->dropped;
      continue;
    }
    kept.push_back(i);
    out.notes.push_back(note);
  }
  return out;
}

std::vector<PatientTimeline> dedup_notes_global(const std::vector<PatientTimeline>& timelines, double threshold,
                                                const StopwordSet& stopwords, DedupStats* stats) {
  check_threshold(threshold);
  struct Ref {
    std::size_t patient, note;
  };
  std::vector<Ref> order;
  for (std::size_t p = 0; p < timelines.size(); ++p) {
    for (std::size_t n = 0; n < timelines[p].notes.size(); ++n) order.push_back({p, n});
  }
  std::sort(order.begin(), order.end(), [&](const Ref& a, const Ref& b) {
    const RawNote& x = timelines[a.patient].notes[a.note];
    const RawNote& y = timelines[b.patient].notes[b.note];
    if (x.timestamp != y.timestamp) return x.timestamp < y.timestamp;
    return x.note_id < y.note_id;
  });

  std::vector<PatientTimeline> out(timelines.size());
  for (std::size_t p = 0; p < timelines.size(); ++p) out[p].patient = timelines[p].patient;
  std::vector<std::vector<bool>> keep(timelines.size());
  for (std::size_t p = 0; p < timelines.size(); ++p) keep[p].assign(timelines[p].notes.size(), false);

  std::unordered_map<std::string, std::vector<std::pair<std::size_t, double>>> postings;
  std::vector<double> retained_norm2;
  std::vector<double> acc;
  for (const Ref& r : order) {
    const RawNote& note = timelines[r.patient].notes[r.note];
    TermCounts counts = count_terms(tokenize(note.text, stopwords));
    if (counts.empty()) {
      keep[r.patient][r.note] = true;
      out[r.patient].empty_notes.push_back(note.note_id);
      if (stats) ++stats->empty;
      continue;
    }
    double n2 = 0;
    for (auto& [tok, c] : counts) n2 += static_cast<double>(c) * static_cast<double>(c);
    acc.assign(retained_norm2.size(), 0.0);
    for (auto& [tok, c] : counts) {
      auto it = postings.find(tok);
      if (it == postings.end()) continue;
      for (auto [doc, v] : it->second) acc[doc] += v * static_cast<double>(c);
    }
    bool dup = false;
    for (std::size_t d = 0; d < acc.size() && !dup; ++d) dup = similar(acc[d], n2, retained_norm2[d], threshold);
    if (dup) {
      if (stats) ++stats->dropped;
      continue;
    }
    std::size_t id = retained_norm2.size();
    retained_norm2.push_back(n2);
    for (auto& [tok, c] : counts) postings[tok].emplace_back(id, static_cast<double>(c));
    keep[r.patient][r.note] = true;
  }
  for (std::size_t p = 0; p < timelines.size(); ++p) {
    for (std::size_t n = 0; n < timelines[p].notes.size(); ++n) {
      if (keep[p][n]) out[p].notes.push_back(timelines[p].notes[n]);
    }
  }
  return out;
}

PatientTimeline select_recent(const PatientTimeline& timeline, std::size_t k) {
  if (k == 0) throw ConfigError("recent-k must be at least 1");
  PatientTimeline out;
  out.patient = timeline.patient;
  out.notes = timeline.notes;
  sort_notes(out.notes);
  if (out.notes.size() > k) out.notes.erase(out.notes.begin(), out.notes.end() - static_cast<std::ptrdiff_t>(k));
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

std::string concatenate(const PatientTimeline& timeline) {
  std::string out;
  for (const auto& n : timeline.notes) {
    if (trim(n.text).empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out += n.text;
  }
  return out;
}

}  // namespace fairtext
