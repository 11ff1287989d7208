#include "fairtext/reports.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "fairtext/kernels.hpp"
#include "fairtext/util.hpp"

namespace fairtext::cli {

using json = nlohmann::ordered_json;

namespace {
std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}
}  // namespace

void write_documents(const std::filesystem::path& path, const std::vector<BinDataset>& bins) {
  auto out = open_out(path);
  for (const auto& b : bins) {
    std::vector<std::string> split(b.docs.size(), "train");
    for (auto i : b.split.test) split[i] = "test";
    for (std::size_t i = 0; i < b.docs.size(); ++i) {
      json j;
      j["bin"] = b.bin;
      j["patient_id"] = b.docs[i].id;
      j["label"] = to_string(b.roster[i].true_label);
      j["split"] = split[i];
      j["attributes"] = b.roster[i].attributes;
      j["notes"] = b.docs[i].notes;
      out << j.dump() << '\n';
    }
  }
}

std::vector<BinDataset> read_documents(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("stage input missing: " + path.string());
  std::ifstream in(path);
  std::map<int, BinDataset> bins;
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (trim(line).empty()) continue;
    try {
      auto j = json::parse(line);
      int bin = j.at("bin").get<int>();
      auto& b = bins[bin];
      b.bin = bin;
      Document d;
      d.id = j.at("patient_id").get<std::string>();
      d.notes = j.at("notes").get<std::vector<std::string>>();
      PredictionRecord r;
      r.patient_id = d.id;
      r.true_label = j.at("label").get<std::string>() == "case" ? Label::Case : Label::Control;
      r.bin = bin;
      r.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
      std::size_t idx = b.docs.size();
      (j.at("split").get<std::string>() == "test" ? b.split.test : b.split.train).push_back(idx);
      b.labels.push_back(r.true_label == Label::Case ? 1 : 0);
      b.docs.push_back(std::move(d));
      b.roster.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(ln) + ": " + e.what());
    }
  }
  std::vector<BinDataset> out;
  for (auto& [_, b] : bins) out.push_back(std::move(b));
  return out;
}

void write_members(const std::filesystem::path& path, const std::vector<CohortBin>& bins,
                   const std::vector<BinDataset>& data) {
  auto out = open_out(path);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    std::vector<std::string> split(bins[k].members.size(), "train");
    for (auto i : data[k].split.test) split[i] = "test";
    for (std::size_t i = 0; i < bins[k].members.size(); ++i) {
      const auto& m = bins[k].members[i];
      json j;
      j["bin"] = bins[k].bin;
      j["pair"] = m.pair_id;
      j["patient_id"] = m.timeline.patient.patient_id;
      j["label"] = to_string(m.label);
      j["sex"] = to_string(m.timeline.patient.sex);
      j["race"] = m.timeline.patient.race;
      j["birth_date"] = format_date(m.timeline.patient.birth_date);
      j["cutoff"] = format_date(m.cutoff);
      j["notes"] = m.timeline.notes.size();
      j["split"] = split[i];
      out << j.dump() << '\n';
    }
  }
}

namespace {
json stats_json(const DistributionStats& s) {
  return json{{"group", s.group},
              {"n_docs", s.n_docs},
              {"avg_length_words", s.avg_length_words},
              {"term_pct", s.term_pct},
              {"biased_pct", s.biased_pct},
              {"vocabulary_size", s.vocabulary_size},
              {"term_vocabulary_size", s.term_vocabulary_size}};
}

json report_json(const DistributionReport& r) {
  json j;
  j["groups"] = json::array();
  for (const auto& g : r.groups) j["groups"].push_back(stats_json(g));
  j["pairs"] = json::array();
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(); };
  for (const auto& p : r.pairs) {
    j["pairs"].push_back({{"a", p.group_a},
                          {"b", p.group_b},
                          {"jaccard_vocab", p.jaccard_vocab},
                          {"familiarity_vocab", opt(p.familiarity_vocab)},
                          {"jaccard_terms", opt(p.jaccard_terms)},
                          {"familiarity_terms", opt(p.familiarity_terms)}});
  }
  j["flags"] = r.flags;
  return j;
}

std::string num(std::optional<double> v, const char* fmt) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}
}  // namespace

void write_stats_jsonl(const std::filesystem::path& path, const std::vector<BinStats>& stats) {
  auto out = open_out(path);
  for (const auto& s : stats) {
    json j;
    j["bin"] = s.bin;
    j["count"] = s.count;
    j["case_pct"] = s.case_pct;
    j["attribute_pct"] = s.attribute_pct;
    j["overall"] = stats_json(s.overall);
    j["by_sex"] = report_json(s.by_sex);
    j["by_race"] = report_json(s.by_race);
    out << j.dump() << '\n';
  }
}

std::string format_stats_tables(const std::vector<BinStats>& stats) {
  std::ostringstream os;
  auto row = [&](const std::string& label, auto cell) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-28s", label.c_str());
    os << buf;
    for (const auto& s : stats) {
      std::snprintf(buf, sizeof buf, "%12s", cell(s).c_str());
      os << buf;
    }
    os << '\n';
  };
  os << "Per-bin statistics (training split)\n";
  row("", [](const BinStats& s) { return "Bin " + std::to_string(s.bin); });
  row("count, total", [](const BinStats& s) { return std::to_string(s.count); });
  row("%, cases", [](const BinStats& s) { return num(s.case_pct, "%.0f"); });
  std::set<std::string> keys;
  for (const auto& s : stats) {
    for (const auto& [k, _] : s.attribute_pct) keys.insert(k);
  }
  for (const auto& k : keys) {
    row("%, " + k, [&](const BinStats& s) {
      auto it = s.attribute_pct.find(k);
      return it == s.attribute_pct.end() ? std::string("0") : num(it->second, "%.0f");
    });
  }
  row("Av length", [](const BinStats& s) { return num(s.overall.avg_length_words, "%.0f"); });
  row("Av terms, %", [](const BinStats& s) { return num(s.overall.term_pct, "%.0f"); });
  row("Av biased words, %", [](const BinStats& s) { return num(s.overall.biased_pct, "%.1f"); });

  for (auto which : {&BinStats::by_sex, &BinStats::by_race}) {
    os << '\n' << (which == &BinStats::by_sex ? "Subgroups by sex" : "Subgroups by race") << '\n';
    for (const auto& s : stats) {
      const DistributionReport& r = s.*which;
      os << "Bin " << s.bin << '\n';
      char buf[160];
      std::snprintf(buf, sizeof buf, "  %-10s %6s %10s %8s %10s\n", "group", "n", "Av length", "terms%", "biased%");
      os << buf;
      for (const auto& g : r.groups) {
        std::snprintf(buf, sizeof buf, "  %-10s %6zu %10.0f %8.1f %10.1f\n", g.group.c_str(), g.n_docs, g.avg_length_words,
                      g.term_pct, g.biased_pct);
        os << buf;
      }
      for (const auto& p : r.pairs) {
        std::snprintf(buf, sizeof buf, "  %s/%s: Jaccard vocab %.2f, Familiarity vocab %s, Jaccard terms %s, Familiarity terms %s\n",
                      p.group_a.c_str(), p.group_b.c_str(), p.jaccard_vocab, num(p.familiarity_vocab, "%.2f").c_str(),
                      num(p.jaccard_terms, "%.2f").c_str(), num(p.familiarity_terms, "%.2f").c_str());
        os << buf;
      }
      for (const auto& f : r.flags) os << "  ! " << f << '\n';
    }
  }
  return os.str();
}

Manifest::Manifest(std::string command, json config, std::string config_hash) : start_(std::chrono::steady_clock::now()) {
  j_["command"] = std::move(command);
  j_["config_hash"] = std::move(config_hash);
  j_["config"] = std::move(config);
  j_["versions"] = {{"fairtext", FAIRTEXT_VERSION},
                    {"compiler", __VERSION__},
                    {"kernels", kernels::isa_name(kernels::active().isa)}};
  j_["threads"] = thread_limit();
  j_["inputs"] = json::array();
  j_["artifacts"] = json::array();
  j_["counts"] = json::array();
}

void Manifest::count(const std::string& stage, std::size_t in, std::size_t out) {
  j_["counts"].push_back({{"stage", stage}, {"in", in}, {"out", out}});
}

void Manifest::input(const std::filesystem::path& p) {
  j_["inputs"].push_back({{"path", p.string()}, {"fnv1a64", hex64(fnv1a64(read_file(p)))}});
}

void Manifest::artifact(const std::filesystem::path& p) {
  j_["artifacts"].push_back({{"path", p.filename().string()}, {"fnv1a64", hex64(fnv1a64(read_file(p)))}});
}

void Manifest::note(const std::string& key, json value) { j_[key] = std::move(value); }

void Manifest::write(const std::filesystem::path& dir) const {
  json j = j_;
  j["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  auto out = open_out(dir / "manifest.json");
  out << j.dump(2) << '\n';
}

}  // namespace fairtext::cli
