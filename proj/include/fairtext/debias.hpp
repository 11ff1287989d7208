#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fairtext/lexical.hpp"

namespace fairtext {

// A patient document: the ordered notes that are concatenated (newline
// separated) for scoring and classification.
struct Document {
  std::string id;
  std::vector<std::string> notes;
  std::string text() const;
};

struct SentenceScore {
  std::size_t index = 0;
  double score = 0;
  std::string sentence;
};

struct FilterResult {
  Document document;
  std::size_t sentences = 0;
  std::vector<std::size_t> removed;  // ascending sentence indices
  bool empty_input = false;
};

// Mean of tf(t, document) * idf(t) over the sentence's content tokens, for
// every sentence of the document in order.
std::vector<SentenceScore> score_sentences(const Document& doc, const TfIdfModel& model,
                                           const StopwordSet& stopwords);

// Removes floor(fraction * S) sentences, chosen uniformly without replacement.
FilterResult rnd_filt(const Document& doc, double fraction, std::uint64_t seed);
// Removes the floor(fraction * S) lowest-scoring sentences, earlier index first on ties.
FilterResult tfidf_filt(const Document& doc, const TfIdfModel& model, const StopwordSet& stopwords,
                        double fraction);

std::string rnd_filt(std::string_view text, double fraction, std::uint64_t seed);
std::string tfidf_filt(std::string_view text, const TfIdfModel& model, const StopwordSet& stopwords,
                       double fraction);

std::size_t edit_distance(std::string_view a, std::string_view b);

// Connected components of names under normalized edit distance
// d(a, b) / max(|a|, |b|) <= max_norm_distance, compared case-folded.
// Groups are ordered by the first appearance of any member in `names`, and
// members keep input order.
std::vector<std::vector<std::string>> group_names(const std::vector<std::string>& names,
                                                  double max_norm_distance = 0.25);

struct PronounMap {
  std::map<std::string, std::string> mapping{
      {"he", "they"}, {"she", "they"}, {"him", "them"}, {"his", "their"}, {"her", "their"}, {"hers", "theirs"}};
};

struct GenSubOptions {
  std::shared_ptr<const NameDetector> detector;
  PronounMap pronouns;
  double max_norm_distance = 0.25;
  static GenSubOptions shipped();
};

std::vector<Span> detect_names(std::string_view text, const NameDetector& detector);

// Replaces detected names by person<K> identifiers (numbered per call in
// order of first appearance) and mapped pronouns by their neutral forms,
// keeping a leading capital. All other bytes are untouched.
std::string gen_sub(std::string_view note_text, const GenSubOptions& options);
// Applies gen_sub to each note separately.
Document gen_sub(const Document& doc, const GenSubOptions& options);

enum class Transform { RndFilt, TfidfFilt, GenSub };
std::string_view to_string(Transform t);
// Comma- or whitespace-separated names, e.g. "tfidf_filt,gen_sub". Empty means identity.
std::vector<Transform> parse_pipeline(std::string_view text);

struct DebiasContext {
  const TfIdfModel* model = nullptr;  // required by tfidf_filt
  const StopwordSet* stopwords = nullptr;
  GenSubOptions gen_sub;
  double fraction = 0.2;
  std::uint64_t seed = 0;  // rnd_filt uses derive_seed(seed, document id)
};

Document compose(const Document& doc, const std::vector<Transform>& pipeline, const DebiasContext& ctx);

}  // namespace fairtext
