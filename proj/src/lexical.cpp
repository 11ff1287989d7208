#include "fairtext/lexical.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>
#include <set>

#include "fairtext/util.hpp"

namespace fairtext {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_word_byte(char c) { return !is_space(c) && !is_punctuation(c); }

char fold(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool title_case(std::string_view w) {
  if (w.empty() || !std::isupper(static_cast<unsigned char>(w[0]))) return false;
  bool has_lower = false;
  for (std::size_t i = 1; i < w.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(w[i]);
    if (std::isupper(c) || std::isdigit(c)) return false;
    if (std::islower(c)) has_lower = true;
  }
  return has_lower || w.size() == 1;
}

}  // namespace

StopwordSet load_stopwords(const std::filesystem::path& path) {
  StopwordSet out;
  for (auto& line : read_lines(path)) out.insert(to_lower(line));
  return out;
}

const StopwordSet& default_stopwords() {
  static const StopwordSet words = load_stopwords(data_path("stopwords_en.txt"));
  return words;
}

bool is_punctuation(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::vector<Span> word_spans(std::string_view text) {
  std::vector<Span> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(text[i])) ++i;
    std::size_t b = i;
    while (i < text.size() && is_word_byte(text[i])) ++i;
    if (i > b) spans.push_back({b, i});
  }
  return spans;
}

TokenList raw_tokens(std::string_view text) {
  TokenList out;
  std::string cur;
  for (char c : text) {
    if (is_word_byte(c)) {
      cur.push_back(fold(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

TokenList tokenize(std::string_view text, const StopwordSet& stopwords) {
  TokenList out = raw_tokens(text);
  std::erase_if(out, [&](const std::string& t) { return stopwords.count(t) > 0; });
  return out;
}

std::size_t word_count(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    bool space = is_space(c);
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

TermCounts count_terms(const TokenList& tokens) {
  TermCounts counts;
  for (const auto& t : tokens) ++counts[t];
  return counts;
}

Vocabulary vocabulary_of(const TokenList& tokens) { return Vocabulary(tokens.begin(), tokens.end()); }

namespace {
std::size_t intersection_size(const Vocabulary& a, const Vocabulary& b) {
  const Vocabulary& small = a.size() <= b.size() ? a : b;
  const Vocabulary& large = a.size() <= b.size() ? b : a;
  std::size_t n = 0;
  for (const auto& w : small) n += large.count(w);
  return n;
}
}  // namespace

double jaccard(const Vocabulary& a, const Vocabulary& b) {
  if (a.empty() && b.empty()) throw DataError("jaccard undefined for two empty vocabularies");
  std::size_t inter = intersection_size(a, b);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::optional<double> familiarity(const Vocabulary& a, const Vocabulary& b) {
  if (a.empty() && b.empty()) throw DataError("familiarity undefined for two empty vocabularies");
  std::size_t inter = intersection_size(a, b);
  std::size_t uni = a.size() + b.size() - inter;
  std::size_t sym = uni - inter;
  if (sym == 0) return std::nullopt;
  return static_cast<double>(uni) / static_cast<double>(sym);
}

TermLexicon::TermLexicon(const std::vector<std::string>& terms) {
  std::set<TokenList> seen;
  for (const auto& term : terms) {
    TokenList toks = raw_tokens(term);
    if (toks.empty() || !seen.insert(toks).second) continue;
    if (toks.size() == 1) single_.insert(toks[0]);
    by_first_[toks[0]].push_back(toks);
  }
  for (auto& [first, list] : by_first_) {
    std::stable_sort(list.begin(), list.end(),
                     [](const TokenList& x, const TokenList& y) { return x.size() > y.size(); });
  }
  size_ = seen.size();
}

TermLexicon TermLexicon::load(const std::filesystem::path& path) { return TermLexicon(read_lines(path)); }

const TermLexicon& TermLexicon::shipped() {
  static const TermLexicon lexicon = load(data_path("medical_terms.txt"));
  return lexicon;
}

bool TermLexicon::contains_word(std::string_view word) const { return single_.count(std::string(word)) > 0; }

std::vector<std::pair<std::size_t, std::size_t>> TermLexicon::matches(const TokenList& tokens) const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    auto it = by_first_.find(tokens[i]);
    std::size_t len = 0;
    if (it != by_first_.end()) {
      for (const auto& cand : it->second) {
        if (i + cand.size() > tokens.size()) continue;
        if (std::equal(cand.begin(), cand.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
          len = cand.size();
          break;
        }
      }
    }
    if (len > 0) {
      out.emplace_back(i, i + len);
      i += len;
    } else {
      ++i;
    }
  }
  return out;
}

std::size_t TermLexicon::count_term_tokens(const TokenList& tokens) const {
  std::size_t n = 0;
  for (auto [b, e] : matches(tokens)) n += e - b;
  return n;
}

Vocabulary TermLexicon::term_vocabulary(const TokenList& tokens) const {
  Vocabulary out;
  for (auto [b, e] : matches(tokens)) {
    std::string term = tokens[b];
    for (std::size_t k = b + 1; k < e; ++k) term += " " + tokens[k];
    out.insert(std::move(term));
  }
  return out;
}

double term_percentage(const TokenList& tokens, const TermLexicon& lexicon) {
  if (lexicon.empty()) throw ConfigError("term lexicon is empty");
  if (tokens.empty()) return 0.0;
  return 100.0 * static_cast<double>(lexicon.count_term_tokens(tokens)) / static_cast<double>(tokens.size());
}

std::unordered_set<std::string> load_first_names(const std::filesystem::path& path) {
  std::unordered_set<std::string> out;
  for (auto& line : read_lines(path)) out.insert(to_lower(line));
  return out;
}

HeuristicNameDetector::HeuristicNameDetector(std::unordered_set<std::string> first_names,
                                             const TermLexicon* medical, const StopwordSet* stopwords)
    : first_names_(std::move(first_names)), medical_(medical), stopwords_(stopwords) {}

std::shared_ptr<const HeuristicNameDetector> HeuristicNameDetector::shipped() {
  static const auto detector = std::make_shared<const HeuristicNameDetector>(
      load_first_names(data_path("first_names.txt")), &TermLexicon::shipped(), &default_stopwords());
  return detector;
}

std::vector<Span> HeuristicNameDetector::detect(std::string_view text) const {
  std::vector<Span> out;
  std::size_t prev_end = 0;
  bool first = true;
  for (const Span& s : word_spans(text)) {
    bool sentence_start = first;
    for (std::size_t k = prev_end; k < s.begin && !sentence_start; ++k) {
      char c = text[k];
      if (c == '.' || c == '?' || c == '!' || c == '\n') sentence_start = true;
    }
    first = false;
    prev_end = s.end;
    std::string_view word = text.substr(s.begin, s.size());
    if (!title_case(word)) continue;
    std::string lower = to_lower(word);
    if (first_names_.count(lower)) {
      out.push_back(s);
      continue;
    }
    if (sentence_start) continue;
    if (stopwords_ && stopwords_->count(lower)) continue;
    if (medical_ && medical_->contains_word(lower)) continue;
    out.push_back(s);
  }
  return out;
}

bool GenderLexicon::is_pronoun(std::string_view lower) const {
  return std::find(pronouns.begin(), pronouns.end(), lower) != pronouns.end();
}

GenderLexicon GenderLexicon::shipped() {
  GenderLexicon g;
  g.names = HeuristicNameDetector::shipped();
  return g;
}

double biased_word_percentage(std::string_view text, const GenderLexicon& lexicon) {
  auto spans = word_spans(text);
  if (spans.empty()) return 0.0;
  std::vector<Span> names;
  if (lexicon.names) names = lexicon.names->detect(text);
  std::size_t ni = 0;
  std::size_t hits = 0;
  for (const Span& s : spans) {
    while (ni < names.size() && names[ni].end <= s.begin) ++ni;
    bool is_name = ni < names.size() && names[ni].begin < s.end;
    if (is_name || lexicon.is_pronoun(to_lower(text.substr(s.begin, s.size())))) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(spans.size());
}

TfIdfModel TfIdfModel::fit(const std::vector<TokenList>& documents) {
  if (documents.empty()) throw DataError("cannot fit tf-idf on zero documents");
  TfIdfModel m;
  m.n_docs_ = documents.size();
  for (const auto& doc : documents) {
    for (const auto& t : vocabulary_of(doc)) ++m.df_[t];
  }
  return m;
}

TfIdfModel TfIdfModel::from_counts(std::size_t n_docs, std::unordered_map<std::string, std::size_t> df) {
  if (n_docs == 0) throw DataError("tf-idf model needs at least one document");
  for (const auto& [t, c] : df) {
    if (c < 1 || c > n_docs) throw DataError("document frequency out of range for token '" + t + "'");
  }
  TfIdfModel m;
  m.n_docs_ = n_docs;
  m.df_ = std::move(df);
  return m;
}

std::size_t TfIdfModel::document_frequency(std::string_view token) const {
  auto it = df_.find(std::string(token));
  return it == df_.end() ? 0 : it->second;
}

double TfIdfModel::idf(std::string_view token) const {
  double n = static_cast<double>(n_docs_);
  double df = static_cast<double>(document_frequency(token));
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

double TfIdfModel::score(std::string_view token, const TermCounts& document) const {
  auto it = document.find(std::string(token));
  if (it == document.end()) return 0.0;
  return static_cast<double>(it->second) * idf(token);
}

std::vector<Span> sentence_spans(std::string_view text) {
  std::vector<Span> out;
  auto emit = [&](std::size_t b, std::size_t e) {
    while (b < e && is_space(text[b])) ++b;
    while (e > b && is_space(text[e - 1])) --e;
    if (e > b) out.push_back({b, e});
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') {
      emit(start, i);
      start = i + 1;
    } else if ((c == '.' || c == '?' || c == '!') && i + 1 < text.size() && is_space(text[i + 1])) {
      emit(start, i + 1);
      start = i + 1;
    }
  }
  emit(start, text.size());
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (const Span& s : sentence_spans(text)) out.emplace_back(text.substr(s.begin, s.size()));
  return out;
}

LexicalResources LexicalResources::shipped() {
  LexicalResources r;
  r.stopwords = &default_stopwords();
  r.terms = &TermLexicon::shipped();
  r.gender = GenderLexicon::shipped();
  return r;
}

DistributionReport distribution_stats(const std::vector<GroupedDocument>& docs, const LexicalResources& res,
                                      const std::vector<std::string>& expected_groups) {
  if (!res.stopwords || !res.terms) throw ConfigError("lexical resources are incomplete");
  struct PerDoc {
    double length = 0, term_pct = 0, biased_pct = 0;
    Vocabulary vocab, terms;
  };
  std::vector<PerDoc> per(docs.size());
  parallel_for(docs.size(), [&](std::size_t i) {
    const std::string& text = docs[i].text;
    TokenList toks = tokenize(text, *res.stopwords);
    per[i].length = static_cast<double>(word_count(text));
    per[i].term_pct = term_percentage(toks, *res.terms);
    per[i].biased_pct = biased_word_percentage(text, res.gender);
    per[i].terms = res.terms->term_vocabulary(toks);
    per[i].vocab = vocabulary_of(toks);
  });

  struct Acc {
    DistributionStats stats;
    Vocabulary vocab, terms;
  };
  std::map<std::string, Acc> groups;
  for (const auto& g : expected_groups) groups[g].stats.group = g;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Acc& a = groups[docs[i].group];
    a.stats.group = docs[i].group;
    ++a.stats.n_docs;
    a.stats.avg_length_words += per[i].length;
    a.stats.term_pct += per[i].term_pct;
    a.stats.biased_pct += per[i].biased_pct;
    a.vocab.merge(per[i].vocab);
    a.terms.merge(per[i].terms);
  }

  DistributionReport report;
  std::vector<const Acc*> present;
  for (auto& [name, a] : groups) {
    if (a.stats.n_docs == 0) {
      report.flags.push_back("group '" + name + "' has no documents; statistics omitted");
      continue;
    }
    double n = static_cast<double>(a.stats.n_docs);
    a.stats.avg_length_words /= n;
    a.stats.term_pct /= n;
    a.stats.biased_pct /= n;
    a.stats.vocabulary_size = a.vocab.size();
    a.stats.term_vocabulary_size = a.terms.size();
    report.groups.push_back(a.stats);
    present.push_back(&a);
  }
  for (std::size_t i = 0; i < present.size(); ++i) {
    for (std::size_t j = i + 1; j < present.size(); ++j) {
      const Acc& a = *present[i];
      const Acc& b = *present[j];
      PairSimilarity p;
      p.group_a = a.stats.group;
      p.group_b = b.stats.group;
      if (a.vocab.empty() && b.vocab.empty()) {
        report.flags.push_back("groups '" + p.group_a + "' and '" + p.group_b + "' have empty vocabularies");
        continue;
      }
      p.jaccard_vocab = jaccard(a.vocab, b.vocab);
      p.familiarity_vocab = familiarity(a.vocab, b.vocab);
      if (!p.familiarity_vocab) {
        report.flags.push_back("identical vocabularies for '" + p.group_a + "' and '" + p.group_b +
                               "'; familiarity undefined");
      }
      if (!a.terms.empty() || !b.terms.empty()) {
        p.jaccard_terms = jaccard(a.terms, b.terms);
        p.familiarity_terms = familiarity(a.terms, b.terms);
      }
      report.pairs.push_back(std::move(p));
    }
  }
  return report;
}

}  // namespace fairtext
