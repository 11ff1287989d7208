#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace fairtext {

using TokenList = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;
using Vocabulary = std::unordered_set<std::string>;
using TermCounts = std::unordered_map<std::string, std::size_t>;

// Byte range [begin, end) into a text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

StopwordSet load_stopwords(const std::filesystem::path& path);
// The shipped English list, loaded once.
const StopwordSet& default_stopwords();

bool is_punctuation(char c);
// Maximal runs of bytes that are neither whitespace nor ASCII punctuation.
std::vector<Span> word_spans(std::string_view text);
// Case-folded word tokens with punctuation mapped to spaces; nothing removed.
TokenList raw_tokens(std::string_view text);
TokenList tokenize(std::string_view text, const StopwordSet& stopwords);
// Whitespace-separated chunks of the raw text.
std::size_t word_count(std::string_view text);

TermCounts count_terms(const TokenList& tokens);
Vocabulary vocabulary_of(const TokenList& tokens);

// |A ∩ B| / |A ∪ B|. Throws DataError when both are empty.
double jaccard(const Vocabulary& a, const Vocabulary& b);
// |A ∪ B| / |A Δ B|; nullopt for identical vocabularies. Throws DataError when
// both are empty.
std::optional<double> familiarity(const Vocabulary& a, const Vocabulary& b);

// Medical-term lexicon. Multi-word terms match greedily, longest first.
class TermLexicon {
 public:
  TermLexicon() = default;
  explicit TermLexicon(const std::vector<std::string>& terms);
  static TermLexicon load(const std::filesystem::path& path);
  static const TermLexicon& shipped();

  bool empty() const { return size_ == 0; }
  std::size_t size() const { return size_; }
  bool contains_word(std::string_view word) const;

  // Left-to-right matches over a token list, each as [first, last) token index.
  std::vector<std::pair<std::size_t, std::size_t>> matches(const TokenList& tokens) const;
  std::size_t count_term_tokens(const TokenList& tokens) const;
  // Matched terms, multi-word terms joined by a single space.
  Vocabulary term_vocabulary(const TokenList& tokens) const;

 private:
  std::unordered_map<std::string, std::vector<TokenList>> by_first_;
  std::unordered_set<std::string> single_;
  std::size_t size_ = 0;
};

// Percent of tokens covered by lexicon terms; 0 for an empty list.
double term_percentage(const TokenList& tokens, const TermLexicon& lexicon);

class NameDetector {
 public:
  virtual ~NameDetector() = default;
  virtual std::vector<Span> detect(std::string_view text) const = 0;
};

// A word is a name when it is title-cased and either found in the first-name
// dictionary (any position) or appears mid-sentence while being neither a
// stopword nor a medical term.
class HeuristicNameDetector : public NameDetector {
 public:
  HeuristicNameDetector(std::unordered_set<std::string> first_names, const TermLexicon* medical,
                        const StopwordSet* stopwords);
  static std::shared_ptr<const HeuristicNameDetector> shipped();
  std::vector<Span> detect(std::string_view text) const override;
  bool in_dictionary(std::string_view lower) const { return first_names_.count(std::string(lower)) > 0; }

 private:
  std::unordered_set<std::string> first_names_;
  const TermLexicon* medical_;
  const StopwordSet* stopwords_;
};

std::unordered_set<std::string> load_first_names(const std::filesystem::path& path);

struct GenderLexicon {
  std::vector<std::string> pronouns{"he", "she", "his", "her", "him", "hers"};
  std::shared_ptr<const NameDetector> names;

  bool is_pronoun(std::string_view lower) const;
  static GenderLexicon shipped();
};

// 100 * (name tokens + pronoun tokens) / all word tokens, without stopword removal.
double biased_word_percentage(std::string_view text, const GenderLexicon& lexicon);

class TfIdfModel {
 public:
  static TfIdfModel fit(const std::vector<TokenList>& documents);
  static TfIdfModel from_counts(std::size_t n_docs, std::unordered_map<std::string, std::size_t> df);

  std::size_t document_count() const { return n_docs_; }
  std::size_t document_frequency(std::string_view token) const;
  const std::unordered_map<std::string, std::size_t>& document_frequencies() const { return df_; }
  // ln((1 + N) / (1 + df)) + 1. Tokens unseen at fit time get df = 0.
  double idf(std::string_view token) const;
  double score(std::string_view token, const TermCounts& document) const;

 private:
  std::size_t n_docs_ = 0;
  std::unordered_map<std::string, std::size_t> df_;
};

// Sentences end at a newline or at '.', '?' or '!' followed by whitespace.
// Spans exclude surrounding whitespace and are never empty.
std::vector<Span> sentence_spans(std::string_view text);
std::vector<std::string> split_sentences(std::string_view text);

struct DistributionStats {
  std::string group;
  std::size_t n_docs = 0;
  double avg_length_words = 0;
  double term_pct = 0;
  double biased_pct = 0;
  std::size_t vocabulary_size = 0;
  std::size_t term_vocabulary_size = 0;
};

struct PairSimilarity {
  std::string group_a;
  std::string group_b;
  double jaccard_vocab = 0;
  std::optional<double> familiarity_vocab;
  std::optional<double> jaccard_terms;  // nullopt when neither group has a term
  std::optional<double> familiarity_terms;
};

struct DistributionReport {
  std::vector<DistributionStats> groups;  // sorted by group name
  std::vector<PairSimilarity> pairs;
  std::vector<std::string> flags;
};

struct GroupedDocument {
  std::string group;
  std::string text;
};

struct LexicalResources {
  const StopwordSet* stopwords = nullptr;
  const TermLexicon* terms = nullptr;
  GenderLexicon gender;
  static LexicalResources shipped();
};

// Per-group averages over documents, plus Jaccard and Familiarity between the
// pooled vocabularies of every pair of groups. `expected_groups` lists groups
// that must be reported even when empty (flagged).
DistributionReport distribution_stats(const std::vector<GroupedDocument>& docs,
                                      const LexicalResources& res,
                                      const std::vector<std::string>& expected_groups = {});

}  // namespace fairtext
