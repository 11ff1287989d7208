#include "fairtext/fairness.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fairtext/util.hpp"

namespace fairtext {

namespace {
const std::string& attribute_of(const PredictionRecord& r, const std::string& attribute) {
  auto it = r.attributes.find(attribute);
  if (it == r.attributes.end()) throw DataError("record " + r.patient_id + " has no attribute '" + attribute + "'");
  return it->second;
}

std::optional<double> ratio_of(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace

ConfusionCounts confusion(std::span<const PredictionRecord> records, double threshold) {
  ConfusionCounts c;
  for (const auto& r : records) {
    bool pred = r.probability >= threshold;
    bool truth = r.true_label == Label::Case;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return c;
}

std::map<std::string, ConfusionCounts> confusion_by(std::span<const PredictionRecord> records,
                                                    const std::string& attribute, double threshold) {
  std::map<std::string, ConfusionCounts> out;
  for (const auto& r : records) {
    auto& c = out[attribute_of(r, attribute)];
    auto one = confusion(std::span<const PredictionRecord>(&r, 1), threshold);
    c.tp += one.tp;
    c.fp += one.fp;
    c.tn += one.tn;
    c.fn += one.fn;
  }
  return out;
}

std::optional<double> fpr(const ConfusionCounts& c) { return ratio_of(c.fp, c.fp + c.tn); }
std::optional<double> fnr(const ConfusionCounts& c) { return ratio_of(c.fn, c.fn + c.tp); }

std::optional<double> ber(const ConfusionCounts& c) {
  auto a = fpr(c), b = fnr(c);
  if (!a || !b) return std::nullopt;
  return ber(*a, *b);
}

double ber(double fpr, double fnr) { return (fpr + fnr) / 2.0; }

double uncertainty_pct(std::span<const PredictionRecord> records, Zone zone) {
  if (records.empty()) return 0.0;
  std::size_t k = 0;
  for (const auto& r : records) {
    if (r.probability >= zone.lo && r.probability <= zone.hi) ++k;
  }
  return 100.0 * static_cast<double>(k) / static_cast<double>(records.size());
}

GroupMetrics group_metrics(std::string value, std::span<const PredictionRecord> records, const ParityOptions& options) {
  GroupMetrics g;
  g.value = std::move(value);
  g.n = records.size();
  g.counts = confusion(records, options.threshold);
  g.accuracy = g.n ? static_cast<double>(g.counts.tp + g.counts.tn) / static_cast<double>(g.n) : 0.0;
  g.unc_pct = uncertainty_pct(records, options.zone);
  g.fpr = fpr(g.counts);
  g.fnr = fnr(g.counts);
  g.ber = ber(g.counts);
  g.low_confidence = g.n < options.min_group_size || !g.ber;
  return g;
}

std::string_view to_string(RatioFlag f) {
  switch (f) {
    case RatioFlag::Acceptable: return "acceptable";
    case RatioFlag::BiasTowardPrivileged: return "significant_bias_privileged";
    case RatioFlag::FavorsNonPrivileged: return "significant_bias_nonprivileged";
    case RatioFlag::Undefined: return "undefined";
  }
  return "?";
}

RatioFlag classify_ratio(double ratio, double upper, double lower) {
  if (ratio > upper) return RatioFlag::BiasTowardPrivileged;
  if (ratio < lower) return RatioFlag::FavorsNonPrivileged;
  return RatioFlag::Acceptable;
}

RatioVerdict ber_ratio(std::optional<double> non_privileged_ber, std::optional<double> privileged_ber, double upper,
                       double lower) {
  RatioVerdict v;
  if (!non_privileged_ber || !privileged_ber || *privileged_ber <= 0.0) return v;
  v.ratio = *non_privileged_ber / *privileged_ber;
  v.flag = classify_ratio(*v.ratio, upper, lower);
  return v;
}

ParityReport parity_report(std::span<const PredictionRecord> records, const std::string& attribute,
                           const std::string& privileged, const ParityOptions& options) {
  std::map<std::string, std::vector<PredictionRecord>> by;
  std::vector<PredictionRecord> rest;
  std::set<int> bins;
  for (const auto& r : records) {
    const auto& v = attribute_of(r, attribute);
    by[v].push_back(r);
    if (v != privileged) rest.push_back(r);
    bins.insert(r.bin);
  }
  if (!by.count(privileged)) throw DataError("no records with " + attribute + "=" + privileged);
  if (by.size() < 2) throw DataError("attribute '" + attribute + "' has a single value; parity needs two");

  ParityReport rep;
  rep.attribute = attribute;
  rep.privileged = privileged;
  rep.bin = bins.size() == 1 ? *bins.begin() : 0;
  rep.groups.push_back(group_metrics(privileged, by[privileged], options));
  for (auto& [v, recs] : by) {
    if (v != privileged) rep.groups.push_back(group_metrics(v, recs, options));
  }
  rep.non_privileged = by.size() == 2 ? rep.groups[1] : group_metrics("non-" + privileged, rest, options);
  const GroupMetrics& p = rep.groups.front();
  const GroupMetrics& q = rep.non_privileged;
  rep.ratio = ber_ratio(q.ber, p.ber, options.upper_flag, options.lower_flag);
  if (p.fnr && q.fnr) rep.fnr_gap = *q.fnr - *p.fnr;
  rep.accuracy_gap = q.accuracy - p.accuracy;
  rep.unc_gap = q.unc_pct - p.unc_pct;
  rep.low_confidence = std::any_of(rep.groups.begin(), rep.groups.end(), [](const auto& g) { return g.low_confidence; });
  return rep;
}

GapSummary aggregate_gaps(std::span<const ParityReport> reports) {
  GapSummary s;
  s.reports = reports.size();
  if (reports.empty()) return s;
  for (const auto& r : reports) {
    s.mean_accuracy_gap += r.accuracy_gap;
    s.mean_unc_gap += r.unc_gap;
    if (r.fnr_gap) {
      s.mean_fnr_gap += *r.fnr_gap;
      ++s.fnr_defined;
    }
  }
  s.mean_accuracy_gap /= static_cast<double>(reports.size());
  s.mean_unc_gap /= static_cast<double>(reports.size());
  if (s.fnr_defined) s.mean_fnr_gap /= static_cast<double>(s.fnr_defined);
  return s;
}

namespace {
nlohmann::ordered_json opt(std::optional<double> v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); }

nlohmann::ordered_json group_json(const GroupMetrics& g) {
  nlohmann::ordered_json j;
  j["value"] = g.value;
  j["n"] = g.n;
  j["tp"] = g.counts.tp;
  j["fp"] = g.counts.fp;
  j["tn"] = g.counts.tn;
  j["fn"] = g.counts.fn;
  j["accuracy"] = g.accuracy;
  j["unc_pct"] = g.unc_pct;
  j["fpr"] = opt(g.fpr);
  j["fnr"] = opt(g.fnr);
  j["ber"] = opt(g.ber);
  j["low_confidence"] = g.low_confidence;
  return j;
}

std::string cell(std::optional<double> v, const char* fmt = "%.2f") {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}
}  // namespace

void write_report_jsonl(std::ostream& out, std::span<const ParityReport> reports) {
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["attribute"] = r.attribute;
    j["privileged"] = r.privileged;
    j["bin"] = r.bin;
    j["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : r.groups) j["groups"].push_back(group_json(g));
    j["ber_ratio"] = opt(r.ratio.ratio);
    j["flag"] = to_string(r.ratio.flag);
    j["fnr_gap"] = opt(r.fnr_gap);
    j["accuracy_gap"] = r.accuracy_gap;
    j["unc_gap"] = r.unc_gap;
    j["low_confidence"] = r.low_confidence;
    out << j.dump() << '\n';
  }
}

std::string format_report_table(std::span<const ParityReport> reports) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-5s %-8s %6s %6s %6s %6s %6s %6s  %-7s %8s  %s\n", "bin", "group", "n", "Acc",
                "unc%", "FPR", "FNR", "BER", "BER r.", "FNR gap", "flag");
  os << line;
  for (const auto& r : reports) {
    for (std::size_t i = 0; i < r.groups.size(); ++i) {
      const auto& g = r.groups[i];
      bool first = i == 0;
      std::snprintf(line, sizeof line, "%-5s %-8s %6zu %6.2f %6.1f %6s %6s %6s  %-7s %8s  %s\n",
                    first ? std::to_string(r.bin).c_str() : "", (g.value + (g.low_confidence ? "*" : "")).c_str(), g.n,
                    g.accuracy, g.unc_pct, cell(g.fpr).c_str(), cell(g.fnr).c_str(), cell(g.ber).c_str(),
                    first ? cell(r.ratio.ratio).c_str() : "", first ? cell(r.fnr_gap, "%+.3f").c_str() : "",
                    first ? std::string(to_string(r.ratio.flag)).c_str() : "");
      os << line;
    }
  }
  if (reports.size() > 1) {
    auto s = aggregate_gaps(reports);
    std::snprintf(line, sizeof line, "mean over %zu bins: FNR gap %+.3f, accuracy gap %+.3f, unc gap %+.1f\n", s.reports,
                  s.mean_fnr_gap, s.mean_accuracy_gap, s.mean_unc_gap);
    os << line;
  }
  os << "(* = below minimum group size or undefined BER)\n";
  return os.str();
}

}  // namespace fairtext
