#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "fairtext/explain.hpp"

using namespace fairtext;

namespace {

// Additive in token presence, so an exact linear surrogate exists.
PredictFn additive(std::map<std::string, double> w) {
  return [w](const TokenList& toks) {
    std::set<std::string> seen(toks.begin(), toks.end());
    double s = 0.3;
    for (const auto& t : seen) {
      auto it = w.find(t);
      if (it != w.end()) s += it->second;
    }
    return s;
  };
}

}  // namespace

TEST_CASE("surrogate recovers additive effects") {
  std::map<std::string, double> w{{"fever", 0.2}, {"cough", -0.1}, {"rash", 0.05}, {"sleep", 0.0}, {"she", 0.15}};
  ExplainOptions o;
  o.ridge = 1e-8;
  o.n_samples = 400;
  auto coef = surrogate_coefficients({"fever", "she", "cough", "fever", "rash", "sleep"}, additive(w), o);
  REQUIRE(coef.size() == 5);
  CHECK(coef[0].first == "fever");
  CHECK(coef[1].first == "she");
  for (const auto& [t, c] : coef) CHECK(c == doctest::Approx(w[t]).epsilon(1e-6).scale(1));
}

TEST_CASE("explanations rank by magnitude and are reproducible") {
  std::map<std::string, double> w{{"a", 0.01}, {"b", -0.3}, {"c", 0.2}, {"d", 0.05}};
  ExplainOptions o;
  o.k = 2;
  o.seed = 9;
  auto e = explain("doc", std::string_view("A b c. d"), additive(w), o);
  REQUIRE(e.words.size() == 2);
  CHECK(e.words[0].first == "b");
  CHECK(e.words[1].first == "c");
  CHECK(e.probability == doctest::Approx(0.26));
  CHECK(e.predicted == Label::Control);
  CHECK(e.confidence == doctest::Approx(0.74));
  auto again = explain("doc", std::string_view("A b c. d"), additive(w), o);
  CHECK(again.words == e.words);
  CHECK_FALSE(e.uninformative);
  auto flat = explain("doc", std::string_view("x y z"), [](const TokenList&) { return 0.7; }, o);
  CHECK(flat.uninformative);
  for (const auto& [t, c] : surrogate_coefficients({"x", "y", "z", "x"}, [](const TokenList&) { return 0.7; }, o)) {
    CHECK(std::abs(c) < 1e-3);
  }
  CHECK(flat.predicted == Label::Case);
}

TEST_CASE("influence vocabulary counts top-k membership") {
  std::vector<Explanation> ex(3);
  ex[0].words = {{"he", 0.4}, {"fever", 0.2}};
  ex[1].words = {{"he", -0.2}, {"anna", 0.1}};
  ex[2].words = {{"fever", 0.3}};
  auto biased = [](std::string_view w) { return w == "he" || w == "anna"; };
  auto v = collate_influence(Label::Case, ex, 5, biased);
  CHECK(v.examples == 3);
  CHECK(v.short_of_examples);
  CHECK(v.words.at("he").frequency == 2);
  CHECK(v.words.at("he").mean_abs_weight == doctest::Approx(0.3));
  CHECK(v.biased_pct == doctest::Approx(200.0 / 3));
  CHECK(v.biased_mean_freq == doctest::Approx(1.5));
  auto r = v.ranked();
  CHECK(r[0].first == "he");
  CHECK(r[1].first == "fever");
  CHECK(r[2].first == "anna");
}

TEST_CASE("audit explains the most confident predictions per class") {
  std::vector<PredictionRecord> recs;
  std::unordered_map<std::string, std::string> docs;
  const char* ids[] = {"p1", "p2", "p3", "p4", "p5"};
  double probs[] = {0.9, 0.95, 0.2, 0.9, 0.45};
  for (int i = 0; i < 5; ++i) {
    PredictionRecord r;
    r.patient_id = ids[i];
    r.probability = probs[i];
    recs.push_back(r);
    docs[ids[i]] = "fever she rash";
  }
  AuditOptions o;
  o.per_class_top = 2;
  o.explain.n_samples = 50;
  auto a = audit_influential(recs, docs, additive({{"fever", 0.2}, {"she", 0.3}}), shipped_biased_words(), o);
  REQUIRE(a.explanations.size() == 4);
  CHECK(a.explanations[0].doc_id == "p2");
  CHECK(a.explanations[1].doc_id == "p1");
  CHECK(a.explanations[2].doc_id == "p3");
  CHECK(a.explanations[3].doc_id == "p5");
  CHECK(a.cases.examples == 2);
  CHECK(a.cases.words.at("she").frequency == 2);
  CHECK(a.cases.biased_pct > 0);
  docs.erase("p3");
  CHECK_THROWS_AS(audit_influential(recs, docs, additive({}), shipped_biased_words(), o), DataError);
  std::ostringstream out;
  write_explanations_jsonl(out, a.explanations);
  CHECK(out.str().find("\"p2\"") != std::string::npos);
  CHECK(format_influence_table(a).find("she") != std::string::npos);
}

TEST_CASE("shipped biased words") {
  auto b = shipped_biased_words();
  CHECK(b("she"));
  CHECK(b("his"));
  CHECK_FALSE(b("fever"));
}
