#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fairtext/kernels.hpp"
#include "fairtext/model.hpp"

using namespace fairtext;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "fairtext_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

struct Data {
  Matrix x;
  std::vector<int> y;
};

Data gaussian_data(std::uint64_t seed, std::size_t n, std::size_t d) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0, 1);
  Data out{Matrix(n, d), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : out.x.row(i)) v = g(rng);
    out.y[i] = out.x.row(i)[0] - 0.5 * out.x.row(i)[1] + 0.3 * g(rng) > 0;
  }
  return out;
}

}  // namespace

TEST_CASE("feature space keeps the most frequent tokens, ties lexicographic") {
  StopwordSet stop{"the", "he"};
  std::vector<std::string> train{"b a the", "a c", "c d he", "e"};
  FeatureOptions o;
  o.max_features = 3;
  o.kind = FeatureKind::Counts;
  auto fs = FeatureSpace::build(train, stop, o);
  CHECK(fs.tokens() == std::vector<std::string>{"a", "c", "b"});
  CHECK(fs.vectorize("c c a zz") == std::vector<double>{1, 2, 0});
  CHECK_FALSE(fs.index("the"));
  o.keep_words = {"He"};
  o.max_features = 10;
  auto kept = FeatureSpace::build(train, stop, o);
  CHECK(kept.index("he"));
  CHECK(kept.filter({"the", "he", "x"}) == TokenList{"he", "x"});
  CHECK_THROWS_AS(FeatureSpace::build({}, stop, o), DataError);
  o.max_features = 0;
  CHECK_THROWS_AS(FeatureSpace::build(train, stop, o), ConfigError);
}

TEST_CASE("rate features are standardized with training moments") {
  StopwordSet stop;
  std::vector<std::string> train{"a a b b", "a b b b", "b b b b"};
  FeatureOptions o;
  auto fs = FeatureSpace::build(train, stop, o);
  REQUIRE(fs.tokens() == std::vector<std::string>{"b", "a"});
  // rates of a: 500, 250, 0 -> mean 250, sd sqrt(125000 / 3)
  auto v = fs.vectorize("a a b b");
  CHECK(v[1] == doctest::Approx(250.0 / std::sqrt(125000.0 / 3.0)));
  CHECK(fs.vectorize("a b b b")[1] == doctest::Approx(0.0));
  CHECK(parse_feature_kind("counts") == FeatureKind::Counts);
  CHECK_THROWS_AS(parse_feature_kind("tfidf"), ConfigError);
}

TEST_CASE("objective and gradient match hand values") {
  Matrix x(2, 1);
  x.row(0)[0] = 1;
  x.row(1)[0] = -2;
  LinearModel m{{0.5}, 0.25, {}};
  std::vector<int> y{1, 0};
  double s0 = 0.75, s1 = -0.75;
  double want = (std::log1p(std::exp(-s0)) + std::log1p(std::exp(s1))) / 2 + 0.5 * 0.1 * 0.25;
  CHECK(objective(m, x, y, 0.1) == doctest::Approx(want).epsilon(1e-14));
  std::vector<double> gw;
  double gb;
  gradient(m, x, y, 0.1, gw, gb);
  double r0 = sigmoid(s0) - 1, r1 = sigmoid(s1);
  CHECK(gb == doctest::Approx((r0 + r1) / 2));
  CHECK(gw[0] == doctest::Approx((r0 * 1 + r1 * -2) / 2 + 0.05));
  CHECK(sigmoid(800) == 1.0);
  CHECK(sigmoid(-800) == doctest::Approx(0.0));
  CHECK(std::isfinite(objective(LinearModel{{1000}, 0, {}}, x, y, 0)));
}

TEST_CASE("gradient matches central differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto d = gaussian_data(seed, 15, 5);
    std::mt19937_64 rng(seed + 100);
    std::normal_distribution<double> g(0, 1);
    LinearModel m;
    m.weights.resize(5);
    for (auto& w : m.weights) w = g(rng);
    m.bias = g(rng);
    std::vector<double> gw;
    double gb;
    gradient(m, d.x, d.y, 0.02, gw, gb);
    for (int j = 0; j <= 5; ++j) {
      LinearModel up = m, dn = m;
      const double h = 1e-5;
      (j < 5 ? up.weights[j] : up.bias) += h;
      (j < 5 ? dn.weights[j] : dn.bias) -= h;
      double fd = (objective(up, d.x, d.y, 0.02) - objective(dn, d.x, d.y, 0.02)) / (2 * h);
      double an = j < 5 ? gw[j] : gb;
      CHECK(std::abs(fd - an) <= 1e-6 * std::max({std::abs(fd), std::abs(an), 1e-3}));
    }
  }
}

TEST_CASE("training fits separable data and is deterministic") {
  auto d = gaussian_data(1, 200, 6);
  TrainOptions o;
  auto m = train(d.x, d.y, o);
  std::size_t right = 0;
  for (std::size_t i = 0; i < 200; ++i) right += (m.predict_proba(d.x.row(i)) >= 0.5) == (d.y[i] == 1);
  CHECK(right >= 180);
  CHECK(objective(m, d.x, d.y, o.l2) < objective(LinearModel{std::vector<double>(6), 0, o}, d.x, d.y, o.l2));
  auto again = train(d.x, d.y, o);
  CHECK(again.weights == m.weights);
  CHECK(again.bias == m.bias);

  o.epochs = 0;
  auto zero = train(d.x, d.y, o);
  CHECK(zero.predict_proba(d.x.row(0)) == 0.5);
  std::vector<int> one(200, 1);
  CHECK_THROWS_AS(train(d.x, one, TrainOptions{}), DataError);
  o.learning_rate = 0;
  CHECK_THROWS_AS(train(d.x, d.y, o), ConfigError);
}

TEST_CASE("training agrees across kernel variants") {
  if (!kernels::avx2_table()) return;
  auto d = gaussian_data(4, 120, 37);
  kernels::force_isa(kernels::Isa::Scalar);
  auto a = train(d.x, d.y, TrainOptions{});
  kernels::force_isa(kernels::Isa::Avx2);
  auto b = train(d.x, d.y, TrainOptions{});
  for (std::size_t j = 0; j < a.weights.size(); ++j) CHECK(a.weights[j] == doctest::Approx(b.weights[j]).epsilon(1e-9));
}

TEST_CASE("checkpoints round-trip exactly") {
  std::vector<std::string> texts{"anxiety worry panic", "calm sleep well", "panic worry", "sleep calm calm"};
  std::vector<int> y{1, 0, 1, 0};
  TrainOptions o;
  o.seed = 12;
  auto c = fit_classifier(texts, y, default_stopwords(), {}, o);
  auto p = temp_path("model.txt");
  c.save(p);
  auto back = Classifier::load(p);
  CHECK(back.model.weights == c.model.weights);
  CHECK(back.model.bias == c.model.bias);
  CHECK(back.model.options.seed == 12);
  CHECK(back.features.tokens() == c.features.tokens());
  for (const auto& t : texts) CHECK(back.predict_proba(t) == c.predict_proba(t));
  CHECK(c.predict_proba("panic worry anxiety") > 0.5);
  std::ofstream(temp_path("junk.txt")) << "hello";
  CHECK_THROWS_AS(Classifier::load(temp_path("junk.txt")), DataError);
}

TEST_CASE("prediction files") {
  std::vector<PredictionRecord> recs(2);
  recs[0] = {"P1", Label::Case, 0.75, {{"sex", "F"}}, 5};
  recs[1] = {"P2", Label::Control, 0.1, {{"sex", "M"}}, 5};
  auto p = temp_path("pred.jsonl");
  {
    std::ofstream out(p);
    write_predictions(out, recs);
    out << "{\"patient_id\":\"P3\",\"label\":\"case\",\"probability\":1.5}\n";
  }
  auto r = read_predictions(p);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0].attributes.at("sex") == "F");
  CHECK(r.records[0].probability == 0.75);
  CHECK(r.warnings.size() == 1);
  CHECK(r.warnings[0].line == 3);

  auto ext = temp_path("external.jsonl");
  std::ofstream(ext) << "{\"patient_id\":\"P1\",\"probability\":0.3}\n"
                     << "{\"patient_id\":\"P9\",\"probability\":0.3}\n"
                     << "{\"patient_id\":\"P2\",\"probability\":-0.1}\n";
  std::unordered_map<std::string, PredictionRecord> roster{{"P1", recs[0]}, {"P2", recs[1]}};
  auto e = load_external_predictions(ext, roster);
  REQUIRE(e.records.size() == 1);
  CHECK(e.records[0].probability == 0.3);
  CHECK(e.records[0].true_label == Label::Case);
  CHECK(e.warnings.size() == 2);
}
