#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "fairtext/fairness.hpp"

using namespace fairtext;

namespace {

void add(std::vector<PredictionRecord>& out, const std::string& group, int bin, Label truth, double p, int n) {
  for (int i = 0; i < n; ++i) {
    PredictionRecord r;
    r.patient_id = group + std::to_string(bin) + std::to_string(out.size());
    r.true_label = truth;
    r.probability = p;
    r.attributes = {{"sex", group}, {"race", group == "M" ? "white" : "other"}};
    r.bin = bin;
    out.push_back(r);
  }
}

// tp, fn, fp, tn patients for one group.
void group(std::vector<PredictionRecord>& out, const std::string& g, int tp, int fn, int fp, int tn, int bin = 5) {
  add(out, g, bin, Label::Case, 0.9, tp);
  add(out, g, bin, Label::Case, 0.1, fn);
  add(out, g, bin, Label::Control, 0.8, fp);
  add(out, g, bin, Label::Control, 0.2, tn);
}

}  // namespace

TEST_CASE("confusion counts use a closed threshold") {
  std::vector<PredictionRecord> r;
  add(r, "M", 5, Label::Case, 0.5, 1);
  add(r, "M", 5, Label::Control, 0.5, 1);
  add(r, "M", 5, Label::Case, 0.4999, 1);
  add(r, "M", 5, Label::Control, 0.0, 2);
  auto c = confusion(r);
  CHECK(c == ConfusionCounts{1, 1, 2, 1});
  CHECK(*fpr(c) == doctest::Approx(1.0 / 3));
  CHECK(*fnr(c) == 0.5);
  CHECK(*ber(c) == doctest::Approx((1.0 / 3 + 0.5) / 2));
  CHECK_FALSE(fnr(ConfusionCounts{0, 3, 3, 0}));
  CHECK_FALSE(ber(ConfusionCounts{0, 3, 3, 0}));
}

TEST_CASE("uncertainty zone is closed on both ends") {
  std::vector<PredictionRecord> r;
  for (double p : {0.39, 0.4, 0.5, 0.6, 0.61}) add(r, "M", 5, Label::Case, p, 1);
  CHECK(uncertainty_pct(r) == doctest::Approx(60.0));
  CHECK(uncertainty_pct({}) == 0.0);
}

TEST_CASE("ratio flags treat the boundaries as acceptable") {
  CHECK(classify_ratio(1.25) == RatioFlag::Acceptable);
  CHECK(classify_ratio(0.85) == RatioFlag::Acceptable);
  CHECK(classify_ratio(1.2501) == RatioFlag::BiasTowardPrivileged);
  CHECK(classify_ratio(0.8499) == RatioFlag::FavorsNonPrivileged);
  CHECK(ber_ratio(0.3, 0.0).flag == RatioFlag::Undefined);
  CHECK_FALSE(ber_ratio(std::nullopt, 0.2).ratio);
  CHECK(*ber_ratio(0.3, 0.2).ratio == doctest::Approx(1.5));
  CHECK(to_string(RatioFlag::BiasTowardPrivileged) == "significant_bias_privileged");
}

TEST_CASE("parity report for two groups") {
  std::vector<PredictionRecord> r;
  group(r, "M", 30, 10, 5, 15);  // fnr .25, fpr .25
  group(r, "F", 20, 20, 10, 10);  // fnr .5, fpr .5
  auto rep = parity_report(r, "sex", "M");
  REQUIRE(rep.groups.size() == 2);
  CHECK(rep.groups[0].value == "M");
  CHECK(*rep.groups[0].ber == doctest::Approx(0.25));
  CHECK(*rep.non_privileged.ber == doctest::Approx(0.5));
  CHECK(*rep.ratio.ratio == doctest::Approx(2.0));
  CHECK(rep.ratio.flag == RatioFlag::BiasTowardPrivileged);
  CHECK(*rep.fnr_gap == doctest::Approx(0.25));
  CHECK(rep.accuracy_gap == doctest::Approx(30.0 / 60 - 45.0 / 60));
  CHECK(rep.bin == 5);
  CHECK_FALSE(rep.low_confidence);
  CHECK_THROWS_AS(parity_report(r, "sex", "X"), DataError);
  CHECK_THROWS_AS(parity_report(r, "language", "M"), DataError);
}

TEST_CASE("non-privileged values are pooled") {
  std::vector<PredictionRecord> r;
  group(r, "white", 10, 10, 10, 10);
  group(r, "black", 10, 0, 0, 10);
  group(r, "asian", 0, 10, 10, 0);
  for (auto& x : r) x.attributes["race"] = x.attributes["sex"];
  auto rep = parity_report(r, "race", "white");
  REQUIRE(rep.groups.size() == 3);
  CHECK(rep.groups[1].value == "asian");
  CHECK(rep.non_privileged.n == 40);
  CHECK(*rep.non_privileged.fnr == doctest::Approx(0.5));
  CHECK(*rep.non_privileged.ber == doctest::Approx(0.5));
  CHECK(*rep.ratio.ratio == doctest::Approx(1.0));
  CHECK_FALSE(rep.low_confidence);
  group(r, "asian", 2, 0, 0, 0);
  for (auto& x : r) x.attributes["race"] = x.attributes["sex"];
  CHECK(parity_report(r, "race", "white").groups[1].n == 22);
  r.erase(r.end() - 12, r.end());
  CHECK(parity_report(r, "race", "white").low_confidence);
}

TEST_CASE("small groups are marked low confidence") {
  std::vector<PredictionRecord> r;
  group(r, "M", 3, 2, 2, 2);
  group(r, "F", 20, 20, 10, 10);
  auto rep = parity_report(r, "sex", "M");
  CHECK(rep.groups[0].low_confidence);
  CHECK_FALSE(rep.groups[1].low_confidence);
  ParityOptions o;
  o.min_group_size = 9;
  CHECK_FALSE(parity_report(r, "sex", "M", o).low_confidence);
}

TEST_CASE("gap aggregation is an unweighted mean over defined gaps") {
  std::vector<ParityReport> reps(3);
  reps[0].fnr_gap = 0.1;
  reps[0].accuracy_gap = 1;
  reps[1].fnr_gap = 0.3;
  reps[1].accuracy_gap = 2;
  reps[2].accuracy_gap = 3;
  auto s = aggregate_gaps(reps);
  CHECK(s.reports == 3);
  CHECK(s.fnr_defined == 2);
  CHECK(s.mean_fnr_gap == doctest::Approx(0.2));
  CHECK(s.mean_accuracy_gap == doctest::Approx(2.0));
}

TEST_CASE("reports serialize") {
  std::vector<PredictionRecord> r;
  group(r, "M", 30, 10, 5, 15, 8);
  group(r, "F", 20, 20, 10, 10, 8);
  std::vector<ParityReport> reps{parity_report(r, "sex", "M")};
  std::ostringstream out;
  write_report_jsonl(out, reps);
  auto j = nlohmann::json::parse(out.str());
  CHECK(j["bin"] == 8);
  CHECK(j["privileged"] == "M");
  CHECK(j["ber_ratio"].get<double>() == doctest::Approx(2.0));
  auto table = format_report_table(reps);
  CHECK(table.find("significant_bias_privileged") != std::string::npos);
}
