#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fairtext/cohort.hpp"
#include "fairtext/corpus.hpp"
#include "fairtext/lexical.hpp"

namespace fairtext {

// Counts: raw token counts. Rates: occurrences per 1000 document tokens,
// centered and scaled with training-split moments.
enum class FeatureKind { Counts, Rates };
std::string_view to_string(FeatureKind k);
FeatureKind parse_feature_kind(std::string_view s);

struct FeatureOptions {
  std::size_t max_features = 5000;
  FeatureKind kind = FeatureKind::Rates;
  // Stopwords that stay in the token stream (e.g. pronouns for audits).
  std::vector<std::string> keep_words;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  const double* data() const { return data_.data(); }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

class FeatureSpace {
 public:
  // Top-V tokens by training document frequency, ties broken lexicographically.
  // Only training documents are accepted.
  static FeatureSpace build(const std::vector<std::string>& train_texts, const StopwordSet& stopwords,
                            const FeatureOptions& options = {});

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::optional<std::size_t> index(std::string_view token) const;
  FeatureKind kind() const { return kind_; }

  TokenList tokens_of(std::string_view text) const;
  // Drops the stopwords of this space from an already lowercased token list.
  TokenList filter(const TokenList& raw) const;
  std::vector<double> vectorize(std::string_view text) const;
  std::vector<double> vectorize_tokens(const TokenList& tokens) const;
  Matrix matrix(const std::vector<std::string>& texts) const;

  void save(std::ostream& out) const;
  static FeatureSpace load(std::istream& in);

 private:
  std::vector<double> raw_vector(const TokenList& tokens) const;

  FeatureKind kind_ = FeatureKind::Counts;
  StopwordSet stopwords_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> mean_, scale_;
};

struct TrainOptions {
  int epochs = 300;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0;
  TrainOptions options;

  double score(std::span<const double> x) const;
  double predict_proba(std::span<const double> x) const;
};

double sigmoid(double z);

// Mean logistic loss plus (l2 / 2) * |w|^2; the bias is not penalized.
double objective(const LinearModel& m, const Matrix& x, const std::vector<int>& y, double l2);
void gradient(const LinearModel& m, const Matrix& x, const std::vector<int>& y, double l2,
              std::vector<double>& grad_w, double& grad_b);

// Full-batch gradient descent from zero weights.
LinearModel train(const Matrix& x, const std::vector<int>& y, const TrainOptions& options);

struct Classifier {
  FeatureSpace features;
  LinearModel model;

  double predict_proba(std::string_view text) const;
  void save(const std::filesystem::path& path) const;
  static Classifier load(const std::filesystem::path& path);
};

Classifier fit_classifier(const std::vector<std::string>& train_texts, const std::vector<int>& labels,
                          const StopwordSet& stopwords, const FeatureOptions& features, const TrainOptions& options);

struct PredictionRecord {
  std::string patient_id;
  Label true_label = Label::Control;
  double probability = 0.5;
  std::map<std::string, std::string> attributes;
  int bin = 0;
};

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records);
Ingested<PredictionRecord> read_predictions(const std::filesystem::path& path);

// Joins {patient_id, probability} rows with the roster's label, bin and
// attributes. Unknown patients and probabilities outside [0, 1] are skipped
// with a warning.
Ingested<PredictionRecord> load_external_predictions(
    const std::filesystem::path& path, const std::unordered_map<std::string, PredictionRecord>& roster);

}  // namespace fairtext
