#pragma once

// Brute-force reference implementations. They recompute everything from raw
// inputs with plain containers and share no code with the library beyond
// tokenization and sentence splitting, which have their own unit tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fairtext/cohort.hpp"
#include "fairtext/corpus.hpp"
#include "fairtext/lexical.hpp"

namespace oracle {

using fairtext::StopwordSet;
using fairtext::TokenList;

inline std::map<std::string, double> counts(const TokenList& toks) {
  std::map<std::string, double> c;
  for (const auto& t : toks) c[t] += 1.0;
  return c;
}

inline double cosine(const TokenList& a, const TokenList& b) {
  auto ca = counts(a), cb = counts(b);
  double dot = 0, na = 0, nb = 0;
  for (const auto& [t, v] : ca) {
    na += v * v;
    auto it = cb.find(t);
    if (it != cb.end()) dot += v * it->second;
  }
  for (const auto& [t, v] : cb) nb += v * v;
  if (na == 0 || nb == 0) return 0;
  return dot / std::sqrt(na * nb);
}

// cos(a, b) >= num / den in exact integer arithmetic.
inline bool at_least(const TokenList& a, const TokenList& b, std::uint64_t num, std::uint64_t den) {
  auto ca = counts(a), cb = counts(b);
  std::uint64_t dot = 0, na = 0, nb = 0;
  for (const auto& [t, v] : ca) {
    auto x = static_cast<std::uint64_t>(v);
    na += x * x;
    auto it = cb.find(t);
    if (it != cb.end()) dot += x * static_cast<std::uint64_t>(it->second);
  }
  for (const auto& [t, v] : cb) nb += static_cast<std::uint64_t>(v) * static_cast<std::uint64_t>(v);
  return dot > 0 && dot * dot * den * den >= num * num * na * nb;
}

// Indices of retained notes: a note survives unless its cosine against an
// earlier survivor reaches num / den. Token-less notes always survive and are
// never compared.
inline std::vector<std::size_t> dedup(const std::vector<std::string>& texts, std::uint64_t num, std::uint64_t den,
                                      const StopwordSet& stop) {
  std::vector<TokenList> toks;
  for (const auto& t : texts) toks.push_back(fairtext::tokenize(t, stop));
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    bool dup = false;
    if (!toks[i].empty()) {
      for (auto j : kept) {
        if (!toks[j].empty() && at_least(toks[i], toks[j], num, den)) {
          dup = true;
          break;
        }
      }
    }
    if (!dup) kept.push_back(i);
  }
  return kept;
}

struct Idf {
  double n = 0;
  std::map<std::string, double> df;
  double operator()(const std::string& t) const {
    auto it = df.find(t);
    double d = it == df.end() ? 0.0 : it->second;
    return std::log((1.0 + n) / (1.0 + d)) + 1.0;
  }
};

inline Idf fit_idf(const std::vector<TokenList>& docs) {
  Idf m;
  m.n = static_cast<double>(docs.size());
  for (const auto& d : docs) {
    std::set<std::string> seen(d.begin(), d.end());
    for (const auto& t : seen) m.df[t] += 1.0;
  }
  return m;
}

// Per-sentence mean of tf(t, whole document) * idf(t) over content tokens.
inline std::vector<double> sentence_scores(const std::vector<std::string>& sentences, const std::string& doc_text,
                                           const Idf& idf, const StopwordSet& stop) {
  auto tf = counts(fairtext::tokenize(doc_text, stop));
  std::vector<double> out;
  for (const auto& s : sentences) {
    auto toks = fairtext::tokenize(s, stop);
    if (toks.empty()) {
      out.push_back(0);
      continue;
    }
    double sum = 0;
    for (const auto& t : toks) sum += tf[t] * idf(t);
    out.push_back(sum / static_cast<double>(toks.size()));
  }
  return out;
}

struct Patient {
  std::string id;
  fairtext::Sex sex;
  fairtext::Date birth;
  std::vector<fairtext::Timestamp> notes;
  std::optional<fairtext::Date> first_code;
};

inline int age_years(fairtext::Date birth, fairtext::Date at) {
  using namespace std::chrono;
  year_month_day b{birth}, a{at};
  int years = int(a.year()) - int(b.year());
  unsigned bm = unsigned(b.month()), bd = unsigned(b.day());
  if (bm == 2 && bd == 29 && !a.year().is_leap()) {
    bm = 3;
    bd = 1;
  }
  if (unsigned(a.month()) < bm || (unsigned(a.month()) == bm && unsigned(a.day()) < bd)) --years;
  return years;
}

inline bool encounter_before(const Patient& p, fairtext::Date index, int window_days) {
  auto hi = fairtext::Timestamp{index};
  auto lo = fairtext::Timestamp{index - std::chrono::days{window_days}};
  for (auto t : p.notes) {
    if (t >= lo && t < hi) return true;
  }
  return false;
}

inline bool is_case(const Patient& p, int bin, int window_days) {
  return p.first_code && encounter_before(p, *p.first_code, window_days) && age_years(p.birth, *p.first_code) == bin;
}

inline bool eligible(const Patient& c, const Patient& cand, int window_days, const std::set<std::string>& cases) {
  if (cases.count(cand.id) || cand.sex != c.sex) return false;
  if (std::abs((cand.birth - c.birth).count()) > 30) return false;
  if (cand.first_code && *cand.first_code <= *c.first_code) return false;
  return encounter_before(cand, *c.first_code, window_days);
}

struct Pool {
  std::vector<fairtext::PatientRecord> patients;
  std::vector<fairtext::RawNote> notes;
  std::vector<fairtext::DiagnosisEvent> diagnoses;
  std::vector<Patient> truth;
};

// Births cluster in groups 90 days apart with a 40-day spread, so some
// candidates sit just inside and some just outside the 30-day window. About
// 30% receive a code at age 5, 10% a code around ages 4 to 6.
inline Pool make_pool(std::uint64_t seed, int n, const std::pair<fairtext::CodeVocabulary, std::string>& code) {
  using namespace fairtext;
  std::mt19937_64 rng(seed);
  Pool out;
  Date day0 = std::chrono::sys_days{std::chrono::year{2005} / 1 / 1};
  for (int i = 0; i < n; ++i) {
    Patient p;
    char id[16];
    std::snprintf(id, sizeof id, "P%03d", i);
    p.id = id;
    p.sex = rng() % 2 ? Sex::F : Sex::M;
    int cluster = static_cast<int>(rng() % static_cast<unsigned>(std::max(1, n / 7)));
    p.birth = day0 + std::chrono::days{cluster * 90 + static_cast<int>(rng() % 41)};
    int roll = static_cast<int>(rng() % 100);
    if (roll < 30) {
      p.first_code = add_years(p.birth, 5) + std::chrono::days{static_cast<int>(rng() % 365)};
    } else if (roll < 40) {
      p.first_code = add_years(p.birth, 4) + std::chrono::days{static_cast<int>(rng() % 900)};
    }
    int n_notes = static_cast<int>(rng() % 5);
    for (int k = 0; k < n_notes; ++k) {
      auto ts = Timestamp{add_years(p.birth, 3) + std::chrono::days{static_cast<int>(rng() % 1460)}} +
                std::chrono::hours{rng() % 24};
      p.notes.push_back(ts);
      out.notes.push_back({p.id, p.id + "-N" + std::to_string(k), "Progress Notes", ts, "patient seen for follow up"});
    }
    if (p.first_code) out.diagnoses.push_back({p.id, code.second, code.first, *p.first_code});
    out.patients.push_back({p.id, p.sex, "white", p.birth});
    out.truth.push_back(p);
  }
  return out;
}

struct MatchCheck {
  std::size_t oracle_cases = 0, pairs = 0, contended = 0;
  std::size_t ineligible = 0, unexplained = 0, extra = 0, layout = 0;
  bool ok() const { return ineligible == 0 && unexplained == 0 && extra == 0 && layout == 0 && pairs > 0; }
};

// Every pair must satisfy the criteria, no control may repeat, and an
// oracle case may only be missing when each of its eligible candidates is
// already taken by another pair.
inline MatchCheck check_bin(const fairtext::CohortBin& bin, const std::vector<Patient>& pool, int bin_age,
                            int window_days) {
  using fairtext::Label;
  MatchCheck r;
  std::set<std::string> cases;
  for (const auto& p : pool) {
    if (is_case(p, bin_age, window_days)) cases.insert(p.id);
  }
  std::map<std::string, const Patient*> by_id;
  for (const auto& p : pool) by_id[p.id] = &p;
  std::set<std::string> got, used;
  if (bin.members.size() % 2) ++r.layout;
  for (std::size_t k = 0; k + 1 < bin.members.size(); k += 2) {
    const auto& c = bin.members[k];
    const auto& ctl = bin.members[k + 1];
    if (c.label != Label::Case || ctl.label != Label::Control || c.pair_id != ctl.pair_id) ++r.layout;
    const auto& cid = c.timeline.patient.patient_id;
    const auto& kid = ctl.timeline.patient.patient_id;
    if (!got.insert(cid).second || !used.insert(kid).second) ++r.layout;
    if (!cases.count(cid)) ++r.extra;
    else if (!eligible(*by_id[cid], *by_id[kid], window_days, cases)) ++r.ineligible;
  }
  for (const auto& id : cases) {
    if (got.count(id)) continue;
    bool any = false, free = false;
    for (const auto& cand : pool) {
      if (!eligible(*by_id[id], cand, window_days, cases)) continue;
      any = true;
      free = free || !used.count(cand.id);
    }
    r.unexplained += free;
    r.contended += any;
  }
  r.oracle_cases = cases.size();
  r.pairs = got.size();
  return r;
}

}  // namespace oracle
