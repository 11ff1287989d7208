#include "fairtext/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include <Eigen/Dense>
#include <json.hpp>

#include "fairtext/util.hpp"

namespace fairtext {

PredictFn classifier_predict_fn(const Classifier& classifier) {
  return [&classifier](const TokenList& raw) {
    return classifier.model.predict_proba(classifier.features.vectorize_tokens(classifier.features.filter(raw)));
  };
}

namespace {

struct Perturbation {
  std::vector<std::string> distinct;
  Eigen::MatrixXd presence;  // samples x distinct
  Eigen::VectorXd target;
  Eigen::VectorXd weight;
  double original = 0;
};

Perturbation perturb(const TokenList& raw, const PredictFn& predict, const ExplainOptions& o) {
  if (raw.empty()) throw DataError("cannot explain an empty document");
  if (o.n_samples < 2) throw ConfigError("explanations need at least two samples");
  Perturbation p;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::size_t> token_slot(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, fresh] = slot.try_emplace(raw[i], p.distinct.size());
    if (fresh) p.distinct.push_back(raw[i]);
    token_slot[i] = it->second;
  }
  const std::size_t d = p.distinct.size();
  const std::size_t n = o.n_samples;
  const double width = o.kernel_width.value_or(0.75 * std::sqrt(static_cast<double>(d)));
  if (!(width > 0)) throw ConfigError("kernel width must be positive");

  p.presence.setOnes(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  std::mt19937_64 rng(o.seed);
  std::bernoulli_distribution drop(0.5);
  for (std::size_t s = 1; s < n; ++s) {
    for (std::size_t j = 0; j < d; ++j) {
      if (drop(rng)) p.presence(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = 0.0;
    }
  }
  p.target.resize(static_cast<Eigen::Index>(n));
  p.weight.resize(static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t s) {
    const auto row = static_cast<Eigen::Index>(s);
    TokenList kept;
    kept.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (p.presence(row, static_cast<Eigen::Index>(token_slot[i])) != 0.0) kept.push_back(raw[i]);
    }
    p.target(row) = predict(kept);
    double present = p.presence.row(row).sum();
    double cosine = present > 0 ? std::sqrt(present / static_cast<double>(d)) : 0.0;
    double dist = 1.0 - cosine;
    p.weight(row) = std::exp(-dist * dist / (width * width));
  });
  p.original = p.target(0);
  return p;
}

// Weighted ridge with an unpenalized intercept, via centering. Uses the
// n x n dual system when there are more tokens than samples.
Eigen::VectorXd fit_surrogate(const Perturbation& p, double ridge) {
  const Eigen::VectorXd& w = p.weight;
  const double wsum = w.sum();
  Eigen::RowVectorXd xbar = (w.transpose() * p.presence) / wsum;
  double ybar = w.dot(p.target) / wsum;
  Eigen::VectorXd sw = w.cwiseSqrt();
  Eigen::MatrixXd z = sw.asDiagonal() * (p.presence.rowwise() - xbar);
  Eigen::VectorXd t = sw.cwiseProduct((p.target.array() - ybar).matrix());
  const auto n = z.rows(), d = z.cols();
  if (d <= n) {
    Eigen::MatrixXd a = z.transpose() * z;
    a.diagonal().array() += ridge;
    return a.ldlt().solve(z.transpose() * t);
  }
  Eigen::MatrixXd g = z * z.transpose();
  g.diagonal().array() += ridge;
  return z.transpose() * g.ldlt().solve(t);
}

}  // namespace

std::vector<std::pair<std::string, double>> surrogate_coefficients(const TokenList& raw_tokens, const PredictFn& predict,
                                                                    const ExplainOptions& options) {
  auto p = perturb(raw_tokens, predict, options);
  Eigen::VectorXd beta = fit_surrogate(p, options.ridge);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t j = 0; j < p.distinct.size(); ++j) out.emplace_back(p.distinct[j], beta(static_cast<Eigen::Index>(j)));
  return out;
}

Explanation explain(std::string doc_id, const TokenList& raw_tokens, const PredictFn& predict,
                    const ExplainOptions& options) {
  auto p = perturb(raw_tokens, predict, options);
  Eigen::VectorXd beta = fit_surrogate(p, options.ridge);
  Explanation e;
  e.doc_id = std::move(doc_id);
  e.probability = p.original;
  e.predicted = p.original >= 0.5 ? Label::Case : Label::Control;
  e.confidence = std::max(p.original, 1.0 - p.original);
  e.uninformative = (p.target.maxCoeff() - p.target.minCoeff()) < 1e-12;

  std::vector<std::size_t> order(p.distinct.size());
  std::iota(order.begin(), order.end(), 0);
  auto mag = [&](std::size_t j) { return std::abs(beta(static_cast<Eigen::Index>(j))); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mag(a) > mag(b); });
  if (order.size() > options.k) order.resize(options.k);
  for (auto j : order) e.words.emplace_back(p.distinct[j], beta(static_cast<Eigen::Index>(j)));
  return e;
}

Explanation explain(std::string doc_id, std::string_view text, const PredictFn& predict, const ExplainOptions& options) {
  return explain(std::move(doc_id), raw_tokens(text), predict, options);
}

std::vector<std::pair<std::string, WordInfluence>> InfluenceVocabulary::ranked() const {
  std::vector<std::pair<std::string, WordInfluence>> out(words.begin(), words.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.second.frequency != b.second.frequency) return a.second.frequency > b.second.frequency;
    return a.second.mean_abs_weight > b.second.mean_abs_weight;
  });
  return out;
}

BiasedWordFn shipped_biased_words() {
  auto names = std::make_shared<std::unordered_set<std::string>>(load_first_names(data_path("first_names.txt")));
  auto gender = std::make_shared<GenderLexicon>();
  return [names, gender](std::string_view w) { return gender->is_pronoun(w) || names->count(std::string(w)) > 0; };
}

InfluenceVocabulary collate_influence(Label label, std::span<const Explanation> ex, std::size_t wanted,
                                      const BiasedWordFn& biased) {
  InfluenceVocabulary v;
  v.label = label;
  v.examples = ex.size();
  v.short_of_examples = ex.size() < wanted;
  std::map<std::string, double> weight_sum;
  for (const auto& e : ex) {
    for (const auto& [w, c] : e.words) {
      ++v.words[w].frequency;
      weight_sum[w] += std::abs(c);
    }
  }
  std::size_t nb = 0, fb = 0;
  for (auto& [w, info] : v.words) {
    info.mean_abs_weight = weight_sum[w] / static_cast<double>(info.frequency);
    if (biased && biased(w)) {
      ++nb;
      fb += info.frequency;
    }
  }
  if (!v.words.empty()) v.biased_pct = 100.0 * static_cast<double>(nb) / static_cast<double>(v.words.size());
  if (nb) v.biased_mean_freq = static_cast<double>(fb) / static_cast<double>(nb);
  return v;
}

InfluenceAudit audit_influential(std::span<const PredictionRecord> records,
                                 const std::unordered_map<std::string, std::string>& docs, const PredictFn& predict,
                                 const BiasedWordFn& biased, const AuditOptions& options) {
  std::vector<const PredictionRecord*> by_class[2];
  for (const auto& r : records) by_class[r.probability >= 0.5 ? 1 : 0].push_back(&r);
  InfluenceAudit audit;
  for (int cls = 1; cls >= 0; --cls) {
    auto& list = by_class[cls];
    std::stable_sort(list.begin(), list.end(), [](const PredictionRecord* a, const PredictionRecord* b) {
      double ca = std::max(a->probability, 1 - a->probability), cb = std::max(b->probability, 1 - b->probability);
      return ca != cb ? ca > cb : a->patient_id < b->patient_id;
    });
    if (list.size() > options.per_class_top) list.resize(options.per_class_top);
    std::vector<Explanation> ex;
    for (const auto* r : list) {
      auto it = docs.find(r->patient_id);
      if (it == docs.end()) throw DataError("no document for patient " + r->patient_id);
      ExplainOptions eo = options.explain;
      eo.seed = derive_seed(options.explain.seed, "explain/" + r->patient_id);
      auto e = explain(r->patient_id, std::string_view(it->second), predict, eo);
      ex.push_back(e);
      audit.explanations.push_back(std::move(e));
    }
    auto vocab = collate_influence(cls ? Label::Case : Label::Control, ex, options.per_class_top, biased);
    (cls ? audit.cases : audit.controls) = std::move(vocab);
  }
  return audit;
}

void write_explanations_jsonl(std::ostream& out, std::span<const Explanation> explanations) {
  for (const auto& e : explanations) {
    nlohmann::ordered_json j;
    j["doc_id"] = e.doc_id;
    j["class"] = to_string(e.predicted);
    j["confidence"] = e.confidence;
    j["words"] = nlohmann::ordered_json::array();
    for (const auto& [w, c] : e.words) j["words"].push_back({w, c});
    if (e.uninformative) j["uninformative"] = true;
    out << j.dump() << '\n';
  }
}

std::string format_influence_table(const InfluenceAudit& audit, std::size_t top) {
  std::ostringstream os;
  char line[256];
  for (const InfluenceVocabulary* v : {&audit.cases, &audit.controls}) {
    auto ranked = v->ranked();
    std::snprintf(line, sizeof line, "%s (%zu examples%s): biased words %.1f%%, mean freq %.2f\n",
                  std::string(to_string(v->label)).c_str(), v->examples, v->short_of_examples ? ", fewer than requested" : "",
                  v->biased_pct, v->biased_mean_freq);
    os << line;
    for (std::size_t i = 0; i < ranked.size() && i < top; ++i) {
      std::snprintf(line, sizeof line, "  %-20s %4zu  %.4f\n", ranked[i].first.c_str(), ranked[i].second.frequency,
                    ranked[i].second.mean_abs_weight);
      os << line;
    }
  }
  return os.str();
}

}  // namespace fairtext
