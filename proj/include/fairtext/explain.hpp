#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fairtext/model.hpp"

namespace fairtext {

// Scores a document given as its lowercased word tokens (stopwords included).
// Must be safe to call concurrently.
using PredictFn = std::function<double(const TokenList& raw_tokens)>;

PredictFn classifier_predict_fn(const Classifier& classifier);

struct ExplainOptions {
  std::size_t n_samples = 500;
  std::optional<double> kernel_width;  // default 0.75 * sqrt(distinct tokens)
  std::size_t k = 5;
  double ridge = 1e-3;
  std::uint64_t seed = 0;
};

struct Explanation {
  std::string doc_id;
  Label predicted = Label::Control;
  double confidence = 0;
  double probability = 0;
  std::vector<std::pair<std::string, double>> words;  // |weight| descending
  bool uninformative = false;
};

// LIME-style surrogate: each distinct token is dropped (all occurrences) with
// probability 0.5, samples are weighted by exp(-d^2 / width^2) with d the
// cosine distance to the original presence vector, and a weighted ridge
// regression with a free intercept is fitted to the predictions.
Explanation explain(std::string doc_id, const TokenList& raw_tokens, const PredictFn& predict,
                    const ExplainOptions& options = {});
Explanation explain(std::string doc_id, std::string_view text, const PredictFn& predict,
                    const ExplainOptions& options = {});

// Full coefficient vector over the document's distinct tokens (in order of
// first occurrence), for diagnostics and tests.
std::vector<std::pair<std::string, double>> surrogate_coefficients(const TokenList& raw_tokens, const PredictFn& predict,
                                                                    const ExplainOptions& options = {});

struct WordInfluence {
  std::size_t frequency = 0;  // examples whose top-k contains the word
  double mean_abs_weight = 0;
};

struct InfluenceVocabulary {
  Label label = Label::Control;
  std::size_t examples = 0;
  bool short_of_examples = false;
  std::map<std::string, WordInfluence> words;
  double biased_pct = 0;
  double biased_mean_freq = 0;
  std::vector<std::pair<std::string, WordInfluence>> ranked() const;  // frequency, then weight
};

struct AuditOptions {
  std::size_t per_class_top = 10;
  ExplainOptions explain;
};

using BiasedWordFn = std::function<bool(std::string_view lower)>;
// Gendered pronouns plus the shipped first-name dictionary.
BiasedWordFn shipped_biased_words();

// Collates the words of `explanations` into one vocabulary; `wanted` is the
// number of examples that were requested.
InfluenceVocabulary collate_influence(Label label, std::span<const Explanation> explanations, std::size_t wanted,
                                      const BiasedWordFn& biased);

struct InfluenceAudit {
  InfluenceVocabulary cases;
  InfluenceVocabulary controls;
  std::vector<Explanation> explanations;
};

// Explains the per_class_top most confident predictions of each predicted
// class (confidence max(p, 1 - p), ties by patient_id) and collates the top-k
// words into per-class frequency vocabularies.
InfluenceAudit audit_influential(std::span<const PredictionRecord> records,
                                 const std::unordered_map<std::string, std::string>& docs, const PredictFn& predict,
                                 const BiasedWordFn& biased, const AuditOptions& options = {});

void write_explanations_jsonl(std::ostream& out, std::span<const Explanation> explanations);
std::string format_influence_table(const InfluenceAudit& audit, std::size_t top = 10);

}  // namespace fairtext
