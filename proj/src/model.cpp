#include "fairtext/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "fairtext/kernels.hpp"
#include "fairtext/util.hpp"

namespace fairtext {

namespace {
constexpr std::string_view kCheckpointMagic = "fairtext-model";
constexpr int kCheckpointVersion = 1;

std::string exact(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view s) {
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw DataError("bad number in checkpoint: " + std::string(s));
  return v;
}
}  // namespace

std::string_view to_string(FeatureKind k) { return k == FeatureKind::Counts ? "counts" : "rates"; }

FeatureKind parse_feature_kind(std::string_view s) {
  if (s == "counts") return FeatureKind::Counts;
  if (s == "rates") return FeatureKind::Rates;
  throw ConfigError("feature kind must be 'counts' or 'rates', got '" + std::string(s) + "'");
}

FeatureSpace FeatureSpace::build(const std::vector<std::string>& train_texts, const StopwordSet& stopwords,
                                 const FeatureOptions& options) {
  if (train_texts.empty()) throw DataError("feature space needs at least one training document");
  if (options.max_features == 0) throw ConfigError("max_features must be positive");
  FeatureSpace fs;
  fs.kind_ = options.kind;
  fs.stopwords_ = stopwords;
  for (const auto& w : options.keep_words) fs.stopwords_.erase(to_lower(w));

  std::vector<TokenList> docs(train_texts.size());
  parallel_for(docs.size(), [&](std::size_t i) { docs[i] = fs.tokens_of(train_texts[i]); });
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& d : docs) {
    for (const auto& t : vocabulary_of(d)) ++df[t];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(df.begin(), df.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > options.max_features) ranked.resize(options.max_features);
  for (auto& [tok, _] : ranked) {
    fs.index_.emplace(tok, fs.tokens_.size());
    fs.tokens_.push_back(tok);
  }

  const std::size_t v = fs.tokens_.size();
  fs.mean_.assign(v, 0.0);
  fs.scale_.assign(v, 1.0);
  if (fs.kind_ == FeatureKind::Rates) {
    std::vector<double> sq(v, 0.0);
    for (const auto& d : docs) {
      auto x = fs.raw_vector(d);
      for (std::size_t j = 0; j < v; ++j) {
        fs.mean_[j] += x[j];
        sq[j] += x[j] * x[j];
      }
    }
    const double n = static_cast<double>(docs.size());
    for (std::size_t j = 0; j < v; ++j) {
      fs.mean_[j] /= n;
      double var = sq[j] / n - fs.mean_[j] * fs.mean_[j];
      double sd = var > 0 ? std::sqrt(var) : 0.0;
      fs.scale_[j] = sd > 1e-12 ? 1.0 / sd : 1.0;
    }
  }
  return fs;
}

std::optional<std::size_t> FeatureSpace::index(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenList FeatureSpace::tokens_of(std::string_view text) const { return tokenize(text, stopwords_); }

TokenList FeatureSpace::filter(const TokenList& raw) const {
  TokenList out;
  out.reserve(raw.size());
  for (const auto& t : raw) {
    if (!stopwords_.count(t)) out.push_back(t);
  }
  return out;
}

std::vector<double> FeatureSpace::raw_vector(const TokenList& tokens) const {
  std::vector<double> x(tokens_.size(), 0.0);
  for (const auto& t : tokens) {
    auto it = index_.find(t);
    if (it != index_.end()) x[it->second] += 1.0;
  }
  if (kind_ == FeatureKind::Rates && !tokens.empty()) {
    const double per = 1000.0 / static_cast<double>(tokens.size());
    for (auto& e : x) e *= per;
  }
  return x;
}

std::vector<double> FeatureSpace::vectorize_tokens(const TokenList& tokens) const {
  auto x = raw_vector(tokens);
  if (kind_ == FeatureKind::Rates) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = (x[j] - mean_[j]) * scale_[j];
  }
  return x;
}

std::vector<double> FeatureSpace::vectorize(std::string_view text) const { return vectorize_tokens(tokens_of(text)); }

Matrix FeatureSpace::matrix(const std::vector<std::string>& texts) const {
  Matrix m(texts.size(), size());
  parallel_for(texts.size(), [&](std::size_t i) {
    auto x = vectorize(texts[i]);
    std::copy(x.begin(), x.end(), m.row(i).begin());
  });
  return m;
}

void FeatureSpace::save(std::ostream& out) const {
  out << "features " << tokens_.size() << ' ' << to_string(kind_) << '\n';
  std::vector<std::string> stop(stopwords_.begin(), stopwords_.end());
  std::sort(stop.begin(), stop.end());
  out << "stopwords " << stop.size() << '\n';
  for (const auto& s : stop) out << s << '\n';
  for (std::size_t j = 0; j < tokens_.size(); ++j) {
    out << tokens_[j] << '\t' << exact(mean_[j]) << '\t' << exact(scale_[j]) << '\n';
  }
}

FeatureSpace FeatureSpace::load(std::istream& in) {
  FeatureSpace fs;
  std::string tag, kind;
  std::size_t v = 0, ns = 0;
  if (!(in >> tag >> v >> kind) || tag != "features") throw DataError("checkpoint: expected feature header");
  fs.kind_ = parse_feature_kind(kind);
  if (!(in >> tag >> ns) || tag != "stopwords") throw DataError("checkpoint: expected stopword header");
  in.ignore(1);
  std::string line;
  for (std::size_t i = 0; i < ns; ++i) {
    if (!std::getline(in, line)) throw DataError("checkpoint: truncated stopword list");
    fs.stopwords_.insert(line);
  }
  for (std::size_t j = 0; j < v; ++j) {
    if (!std::getline(in, line)) throw DataError("checkpoint: truncated feature list");
    auto parts = split(line, '\t');
    if (parts.size() != 3) throw DataError("checkpoint: bad feature row " + std::to_string(j));
    fs.index_.emplace(parts[0], j);
    fs.tokens_.push_back(parts[0]);
    fs.mean_.push_back(parse_double(parts[1]));
    fs.scale_.push_back(parse_double(parts[2]));
  }
  return fs;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double LinearModel::score(std::span<const double> x) const { return kernels::dot(weights, x) + bias; }

double LinearModel::predict_proba(std::span<const double> x) const { return sigmoid(score(x)); }

namespace {
void scores(const LinearModel& m, const Matrix& x, std::vector<double>& out) {
  out.resize(x.rows());
  if (x.rows() == 0) return;
  if (x.cols() == 0) {
    std::fill(out.begin(), out.end(), m.bias);
    return;
  }
  kernels::active().gemv(x.data(), x.rows(), x.cols(), x.cols(), m.weights.data(), out.data());
  for (auto& s : out) s += m.bias;
}

void check_shapes(const LinearModel& m, const Matrix& x, const std::vector<int>& y) {
  if (x.rows() != y.size()) throw DataError("label count does not match the number of documents");
  if (m.weights.size() != x.cols()) throw DataError("weight vector does not match the feature count");
}
}  // namespace

double objective(const LinearModel& m, const Matrix& x, const std::vector<int>& y, double l2) {
  check_shapes(m, x, y);
  std::vector<double> s;
  scores(m, x, s);
  double loss = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    // log(1 + e^s) - y s, evaluated stably
    double z = s[i];
    double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    loss += softplus - (y[i] ? z : 0.0);
  }
  loss /= static_cast<double>(std::max<std::size_t>(1, s.size()));
  return loss + 0.5 * l2 * kernels::sum_squares(m.weights);
}

void gradient(const LinearModel& m, const Matrix& x, const std::vector<int>& y, double l2,
              std::vector<double>& grad_w, double& grad_b) {
  check_shapes(m, x, y);
  std::vector<double> s;
  scores(m, x, s);
  grad_w.assign(x.cols(), 0.0);
  grad_b = 0;
  const double inv_n = 1.0 / static_cast<double>(std::max<std::size_t>(1, x.rows()));
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double r = (sigmoid(s[i]) - (y[i] ? 1.0 : 0.0)) * inv_n;
    grad_b += r;
    kernels::axpy(r, x.row(i), grad_w);
  }
  kernels::axpy(l2, m.weights, grad_w);
}

LinearModel train(const Matrix& x, const std::vector<int>& y, const TrainOptions& options) {
  if (options.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (!(options.learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (options.l2 < 0) throw ConfigError("l2 must be non-negative");
  bool has_pos = std::any_of(y.begin(), y.end(), [](int v) { return v != 0; });
  bool has_neg = std::any_of(y.begin(), y.end(), [](int v) { return v == 0; });
  if (!has_pos || !has_neg) throw DataError("training data must contain both classes");

  LinearModel m;
  m.options = options;
  m.weights.assign(x.cols(), 0.0);
  std::vector<double> gw;
  double gb = 0;
  for (int e = 0; e < options.epochs; ++e) {
    gradient(m, x, y, options.l2, gw, gb);
    kernels::axpy(-options.learning_rate, gw, m.weights);
    m.bias -= options.learning_rate * gb;
  }
  for (double w : m.weights) {
    if (!std::isfinite(w)) throw DataError("training diverged (non-finite weight); lower the learning rate");
  }
  return m;
}

double Classifier::predict_proba(std::string_view text) const { return model.predict_proba(features.vectorize(text)); }

void Classifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "epochs " << model.options.epochs << '\n';
  out << "learning_rate " << exact(model.options.learning_rate) << '\n';
  out << "l2 " << exact(model.options.l2) << '\n';
  out << "seed " << model.options.seed << '\n';
  out << "bias " << exact(model.bias) << '\n';
  features.save(out);
  out << "weights " << model.weights.size() << '\n';
  for (double w : model.weights) out << exact(w) << '\n';
}

Classifier Classifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  std::string magic, key, val;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic) throw DataError(path.string() + " is not a model checkpoint");
  if (version != kCheckpointVersion) throw DataError("unsupported checkpoint version " + std::to_string(version));
  Classifier c;
  for (const char* expected : {"epochs", "learning_rate", "l2", "seed", "bias"}) {
    if (!(in >> key >> val) || key != expected) throw DataError(std::string("checkpoint: expected ") + expected);
    if (key == "epochs") c.model.options.epochs = std::stoi(val);
    else if (key == "learning_rate") c.model.options.learning_rate = parse_double(val);
    else if (key == "l2") c.model.options.l2 = parse_double(val);
    else if (key == "seed") c.model.options.seed = std::stoull(val);
    else c.model.bias = parse_double(val);
  }
  in.ignore(1);
  c.features = FeatureSpace::load(in);
  std::size_t n = 0;
  if (!(in >> key >> n) || key != "weights" || n != c.features.size()) throw DataError("checkpoint: weight count mismatch");
  c.model.weights.resize(n);
  for (auto& w : c.model.weights) {
    if (!(in >> val)) throw DataError("checkpoint: truncated weights");
    w = parse_double(val);
  }
  return c;
}

Classifier fit_classifier(const std::vector<std::string>& train_texts, const std::vector<int>& labels,
                          const StopwordSet& stopwords, const FeatureOptions& features, const TrainOptions& options) {
  Classifier c;
  c.features = FeatureSpace::build(train_texts, stopwords, features);
  c.model = train(c.features.matrix(train_texts), labels, options);
  return c;
}

void write_predictions(std::ostream& out, const std::vector<PredictionRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["patient_id"] = r.patient_id;
    j["label"] = to_string(r.true_label);
    j["probability"] = r.probability;
    j["bin"] = r.bin;
    j["attributes"] = r.attributes;
    out << j.dump() << '\n';
  }
}

Ingested<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  Ingested<PredictionRecord> res;
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      PredictionRecord r;
      r.patient_id = j.at("patient_id").get<std::string>();
      std::string label = j.at("label").get<std::string>();
      if (label != "case" && label != "control") throw std::invalid_argument("label must be case or control");
      r.true_label = label == "case" ? Label::Case : Label::Control;
      r.probability = j.at("probability").get<double>();
      if (!(r.probability >= 0.0 && r.probability <= 1.0)) throw std::invalid_argument("probability outside [0, 1]");
      r.bin = j.value("bin", 0);
      if (j.contains("attributes")) r.attributes = j["attributes"].get<std::map<std::string, std::string>>();
      res.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      res.warnings.push_back({ln, e.what()});
    }
  }
  return res;
}

Ingested<PredictionRecord> load_external_predictions(
    const std::filesystem::path& path, const std::unordered_map<std::string, PredictionRecord>& roster) {
  Ingested<PredictionRecord> res;
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  std::string line;
  std::size_t ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      std::string id = j.at("patient_id").get<std::string>();
      double p = j.at("probability").get<double>();
      if (!(p >= 0.0 && p <= 1.0)) {
        res.warnings.push_back({ln, "probability " + exact(p) + " outside [0, 1]; row rejected"});
        continue;
      }
      auto it = roster.find(id);
      if (it == roster.end()) {
        res.warnings.push_back({ln, "unknown patient_id '" + id + "'; row skipped"});
        continue;
      }
      PredictionRecord r = it->second;
      r.probability = p;
      res.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      res.warnings.push_back({ln, e.what()});
    }
  }
  return res;
}

}  // namespace fairtext
