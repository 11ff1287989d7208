#include "fairtext/debias.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <random>
#include <unordered_map>

#include "fairtext/util.hpp"

namespace fairtext {

std::string Document::text() const {
  std::string out;
  for (const auto& n : notes) {
    if (trim(n).empty()) continue;
    if (!out.empty()) out.push_back('\n');
    out += n;
  }
  return out;
}

namespace {

struct SentenceRef {
  std::size_t note;
  Span span;
};

std::vector<SentenceRef> collect_sentences(const Document& doc) {
  std::vector<SentenceRef> out;
  for (std::size_t n = 0; n < doc.notes.size(); ++n) {
    for (const Span& s : sentence_spans(doc.notes[n])) out.push_back({n, s});
  }
  return out;
}

// Drops each removed sentence together with the whitespace that follows it
// (up to the next sentence of the same note).
Document remove_sentences(const Document& doc, const std::vector<SentenceRef>& refs,
                          const std::vector<bool>& drop) {
  Document out;
  out.id = doc.id;
  out.notes.reserve(doc.notes.size());
  std::size_t r = 0;
  for (std::size_t n = 0; n < doc.notes.size(); ++n) {
    const std::string& text = doc.notes[n];
    std::size_t first = r;
    while (r < refs.size() && refs[r].note == n) ++r;
    std::string kept;
    std::size_t cursor = 0;
    for (std::size_t k = first; k < r; ++k) {
      if (!drop[k]) continue;
      std::size_t begin = refs[k].span.begin;
      std::size_t end = k + 1 < r ? refs[k + 1].span.begin : text.size();
      kept.append(text, cursor, begin - cursor);
      cursor = end;
    }
    kept.append(text, cursor, std::string::npos);
    out.notes.push_back(std::move(kept));
  }
  return out;
}

std::size_t removal_count(double fraction, std::size_t sentences) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("filter fraction must lie in [0, 1)");
  auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(sentences)));
  if (sentences > 0 && k >= sentences) k = sentences - 1;
  return k;
}

FilterResult finish(const Document& doc, const std::vector<SentenceRef>& refs, std::vector<std::size_t> removed) {
  std::sort(removed.begin(), removed.end());
  std::vector<bool> drop(refs.size(), false);
  for (auto i : removed) drop[i] = true;
  FilterResult res;
  res.document = remove_sentences(doc, refs, drop);
  res.sentences = refs.size();
  res.removed = std::move(removed);
  return res;
}

Document single(std::string_view text) {
  Document d;
  d.notes.emplace_back(text);
  return d;
}

}  // namespace

std::vector<SentenceScore> score_sentences(const Document& doc, const TfIdfModel& model,
                                           const StopwordSet& stopwords) {
  auto refs = collect_sentences(doc);
  TermCounts counts;
  std::vector<TokenList> toks(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    std::string_view s = std::string_view(doc.notes[refs[i].note]).substr(refs[i].span.begin, refs[i].span.size());
    toks[i] = tokenize(s, stopwords);
    for (const auto& t : toks[i]) ++counts[t];
  }
  std::unordered_map<std::string, double> cache;
  std::vector<SentenceScore> out(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    out[i].index = i;
    out[i].sentence = doc.notes[refs[i].note].substr(refs[i].span.begin, refs[i].span.size());
    if (toks[i].empty()) continue;
    double sum = 0;
    for (const auto& t : toks[i]) {
      auto [it, fresh] = cache.try_emplace(t, 0.0);
      if (fresh) it->second = model.score(t, counts);
      sum += it->second;
    }
    out[i].score = sum / static_cast<double>(toks[i].size());
  }
  return out;
}

FilterResult rnd_filt(const Document& doc, double fraction, std::uint64_t seed) {
  auto refs = collect_sentences(doc);
  std::size_t k = removal_count(fraction, refs.size());
  if (refs.empty()) {
    FilterResult r{doc, 0, {}, true};
    return r;
  }
  std::vector<std::size_t> idx(refs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  return finish(doc, refs, std::move(idx));
}

FilterResult tfidf_filt(const Document& doc, const TfIdfModel& model, const StopwordSet& stopwords,
                        double fraction) {
  auto refs = collect_sentences(doc);
  std::size_t k = removal_count(fraction, refs.size());
  if (refs.empty()) {
    FilterResult r{doc, 0, {}, true};
    return r;
  }
  auto scores = score_sentences(doc, model, stopwords);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].score < scores[b].score; });
  order.resize(k);
  return finish(doc, refs, std::move(order));
}

std::string rnd_filt(std::string_view text, double fraction, std::uint64_t seed) {
  return rnd_filt(single(text), fraction, seed).document.notes.front();
}

std::string tfidf_filt(std::string_view text, const TfIdfModel& model, const StopwordSet& stopwords,
                       double fraction) {
  return tfidf_filt(single(text), model, stopwords, fraction).document.notes.front();
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<std::vector<std::string>> group_names(const std::vector<std::string>& names,
                                                  double max_norm_distance) {
  std::vector<std::string> folded;
  folded.reserve(names.size());
  for (const auto& n : names) folded.push_back(to_lower(n));
  std::vector<std::size_t> parent(names.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      std::size_t len = std::max(folded[i].size(), folded[j].size());
      double d = len == 0 ? 0.0
                          : static_cast<double>(edit_distance(folded[i], folded[j])) / static_cast<double>(len);
      if (d <= max_norm_distance) {
        std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::vector<std::string>> groups;
  std::unordered_map<std::size_t, std::size_t> slot;
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto [it, fresh] = slot.try_emplace(find(i), groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(names[i]);
  }
  return groups;
}

GenSubOptions GenSubOptions::shipped() {
  GenSubOptions o;
  o.detector = HeuristicNameDetector::shipped();
  return o;
}

std::vector<Span> detect_names(std::string_view text, const NameDetector& detector) {
  auto spans = detector.detect(text);
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.begin < b.begin; });
  std::vector<Span> out;
  for (const Span& s : spans) {
    if (s.size() == 0) continue;
    if (!out.empty() && s.begin < out.back().end) continue;
    out.push_back(s);
  }
  return out;
}

std::string gen_sub(std::string_view text, const GenSubOptions& options) {
  std::vector<Span> names;
  if (options.detector) names = detect_names(text, *options.detector);
  std::erase_if(names, [&](const Span& s) { return options.pronouns.mapping.count(to_lower(text.substr(s.begin, s.size()))) > 0; });

  std::vector<std::string> distinct;
  std::unordered_map<std::string, std::size_t> seen;
  for (const Span& s : names) {
    std::string f = to_lower(text.substr(s.begin, s.size()));
    if (seen.try_emplace(f, distinct.size()).second) distinct.push_back(f);
  }
  std::unordered_map<std::string, std::string> ident;
  auto groups = group_names(distinct, options.max_norm_distance);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (const auto& member : groups[g]) ident[member] = "person" + std::to_string(g + 1);
  }

  struct Edit {
    Span span;
    std::string with;
  };
  std::vector<Edit> edits;
  std::size_t ni = 0;
  for (const Span& w : word_spans(text)) {
    while (ni < names.size() && names[ni].end <= w.begin) ++ni;
    if (ni < names.size() && names[ni].begin < w.end) continue;  // part of a name span
    std::string_view word = text.substr(w.begin, w.size());
    auto it = options.pronouns.mapping.find(to_lower(word));
    if (it == options.pronouns.mapping.end()) continue;
    std::string rep = it->second;
    if (!rep.empty() && std::isupper(static_cast<unsigned char>(word[0]))) {
      rep[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(rep[0])));
    }
    edits.push_back({w, std::move(rep)});
  }
  for (const Span& s : names) edits.push_back({s, ident.at(to_lower(text.substr(s.begin, s.size())))});
  std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) { return a.span.begin < b.span.begin; });

  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (const Edit& e : edits) {
    out.append(text.substr(cursor, e.span.begin - cursor));
    out += e.with;
    cursor = e.span.end;
  }
  out.append(text.substr(cursor));
  return out;
}

Document gen_sub(const Document& doc, const GenSubOptions& options) {
  Document out;
  out.id = doc.id;
  out.notes.reserve(doc.notes.size());
  for (const auto& n : doc.notes) out.notes.push_back(gen_sub(n, options));
  return out;
}

std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::RndFilt: return "rnd_filt";
    case Transform::TfidfFilt: return "tfidf_filt";
    case Transform::GenSub: return "gen_sub";
  }
  return "?";
}

std::vector<Transform> parse_pipeline(std::string_view text) {
  std::vector<Transform> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    std::string name = to_lower(cur);
    std::erase_if(name, [](char c) { return c == '-' || c == '_'; });
    if (name == "rndfilt") out.push_back(Transform::RndFilt);
    else if (name == "tfidffilt") out.push_back(Transform::TfidfFilt);
    else if (name == "gensub") out.push_back(Transform::GenSub);
    else throw ConfigError("unknown transform '" + cur + "' (expected rnd_filt, tfidf_filt or gen_sub)");
    cur.clear();
  };
  for (char c : text) {
    if (c == ',' || c == '+' || std::isspace(static_cast<unsigned char>(c))) flush();
    else cur.push_back(c);
  }
  flush();
  return out;
}

Document compose(const Document& doc, const std::vector<Transform>& pipeline, const DebiasContext& ctx) {
  Document cur = doc;
  for (Transform t : pipeline) {
    switch (t) {
      case Transform::RndFilt:
        cur = rnd_filt(cur, ctx.fraction, derive_seed(ctx.seed, "rnd_filt/" + doc.id)).document;
        break;
      case Transform::TfidfFilt:
        if (!ctx.model || !ctx.stopwords) throw ConfigError("tfidf_filt needs a fitted tf-idf model");
        cur = tfidf_filt(cur, *ctx.model, *ctx.stopwords, ctx.fraction).document;
        break;
      case Transform::GenSub:
        cur = gen_sub(cur, ctx.gen_sub);
        break;
    }
  }
  return cur;
}

}  // namespace fairtext
