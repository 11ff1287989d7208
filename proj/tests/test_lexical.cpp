#include <doctest.h>

#include <cmath>

#include "fairtext/lexical.hpp"
#include "fairtext/util.hpp"

using namespace fairtext;

TEST_CASE("tokenization folds case and splits on punctuation") {
  CHECK(raw_tokens("Hello, World! it's 5mg.") == TokenList{"hello", "world", "it", "s", "5mg"});
  StopwordSet stop{"it", "s"};
  CHECK(tokenize("It's fine", stop) == TokenList{"fine"});
  CHECK(word_count("  pt. stable,\ncalm  ") == 3);
  CHECK(raw_tokens("").empty());
  auto spans = word_spans("a-b  c");
  REQUIRE(spans.size() == 3);
  CHECK(spans[2] == Span{5, 6});
}

TEST_CASE("shipped stopwords contain pronouns") {
  const auto& s = default_stopwords();
  for (const char* w : {"he", "she", "his", "her", "the", "and"}) CHECK(s.count(w) == 1);
}

TEST_CASE("jaccard and familiarity") {
  Vocabulary a{"x", "y", "z"}, b{"y", "z", "w"};
  CHECK(jaccard(a, b) == doctest::Approx(0.5));
  CHECK(*familiarity(a, b) == doctest::Approx(2.0));
  CHECK(*familiarity(a, b) == doctest::Approx(1.0 / (1.0 - jaccard(a, b))));
  CHECK_FALSE(familiarity(a, a).has_value());
  CHECK(jaccard(a, {}) == 0.0);
  CHECK(*familiarity(a, {}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(jaccard({}, {}), DataError);
  CHECK_THROWS_AS(familiarity({}, {}), DataError);
}

TEST_CASE("term lexicon prefers the longest match") {
  TermLexicon lx({"heart", "heart rate", "heart rate variability", "rash"});
  CHECK(lx.size() == 4);
  TokenList t{"heart", "rate", "variability", "and", "heart", "rate", "rash", "heart"};
  auto m = lx.matches(t);
  REQUIRE(m.size() == 4);
  CHECK(m[0] == std::pair<std::size_t, std::size_t>{0, 3});
  CHECK(m[1] == std::pair<std::size_t, std::size_t>{4, 6});
  CHECK(lx.count_term_tokens(t) == 7);
  CHECK(lx.term_vocabulary(t) == Vocabulary{"heart rate variability", "heart rate", "rash", "heart"});
  CHECK(term_percentage(t, lx) == doctest::Approx(87.5));
  CHECK(term_percentage({}, lx) == 0.0);
  CHECK_THROWS_AS(term_percentage(t, TermLexicon{}), ConfigError);
}

TEST_CASE("name detector") {
  StopwordSet stop{"the", "she"};
  TermLexicon med({"tylenol"});
  HeuristicNameDetector det({"anna"}, &med, &stop);
  std::string text = "Anna met Dr Kowalski. Tylenol given by The nurse to Smith";
  auto spans = det.detect(text);
  std::vector<std::string> found;
  for (auto s : spans) found.push_back(text.substr(s.begin, s.size()));
  // "Dr" is title-cased mid-sentence and unknown, so the heuristic takes it too.
  CHECK(found == std::vector<std::string>{"Anna", "Dr", "Kowalski", "Smith"});
  CHECK(det.detect("ANNA and anna").empty());
}

TEST_CASE("biased word percentage counts pronouns and names") {
  GenderLexicon g;
  g.names = std::make_shared<HeuristicNameDetector>(std::unordered_set<std::string>{"peter"}, nullptr, nullptr);
  CHECK(biased_word_percentage("Peter said he is fine", g) == doctest::Approx(40.0));
  CHECK(biased_word_percentage("", g) == 0.0);
}

TEST_CASE("tf-idf uses smoothed idf and df zero for unseen tokens") {
  auto m = TfIdfModel::fit({{"a", "b", "a"}, {"b"}, {"c"}});
  CHECK(m.document_count() == 3);
  CHECK(m.document_frequency("a") == 1);
  CHECK(m.document_frequency("b") == 2);
  CHECK(m.idf("a") == doctest::Approx(std::log(4.0 / 2.0) + 1));
  CHECK(m.idf("zzz") == doctest::Approx(std::log(4.0) + 1));
  CHECK(m.score("a", TermCounts{{"a", 3}}) == doctest::Approx(3 * (std::log(2.0) + 1)));
  CHECK(m.score("a", TermCounts{}) == 0.0);
  CHECK_THROWS_AS(TfIdfModel::fit({}), DataError);
  CHECK_THROWS_AS(TfIdfModel::from_counts(2, {{"x", 3}}), DataError);
}

TEST_CASE("sentence splitting") {
  CHECK(split_sentences("Pt calm. Sleeps well!\nNo rash 3.5 mg given?  ") ==
        std::vector<std::string>{"Pt calm.", "Sleeps well!", "No rash 3.5 mg given?"});
  CHECK(split_sentences(" \n\n ").empty());
  auto s = sentence_spans("a. b");
  REQUIRE(s.size() == 2);
  CHECK(s[1] == Span{3, 4});
}

TEST_CASE("distribution statistics") {
  StopwordSet stop{"the"};
  TermLexicon med({"rash", "fever"});
  LexicalResources res;
  res.stopwords = &stop;
  res.terms = &med;
  std::vector<GroupedDocument> docs{{"F", "the rash she had"}, {"F", "fever fever"}, {"M", "rash and he"}};
  auto r = distribution_stats(docs, res, {"F", "M", "X"});
  REQUIRE(r.groups.size() == 2);
  CHECK(r.groups[0].group == "F");
  CHECK(r.groups[0].n_docs == 2);
  CHECK(r.groups[0].avg_length_words == doctest::Approx(3.0));
  // F: rash, she, had, fever / M: rash, and, he
  CHECK(r.groups[0].vocabulary_size == 4);
  CHECK(r.groups[0].biased_pct == doctest::Approx(12.5));
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.pairs[0].jaccard_vocab == doctest::Approx(1.0 / 6.0));
  CHECK(*r.pairs[0].jaccard_terms == doctest::Approx(0.5));
  CHECK(r.flags.size() == 1);
}
