#include "fairtext/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "fairtext/util.hpp"

namespace fairtext {

namespace {

constexpr std::string_view kProgress = "Progress Notes";
constexpr std::string_view kTelephone = "Telephone Encounters";
constexpr std::string_view kExcludedType = "Patient Instructions";

const std::vector<std::string> kSignalWords{
    "worry",     "nervous",   "panic",    "restless",   "fearful",      "tense",   "irritable", "insomnia",
    "avoidance", "clingy",    "tearful",  "reassurance", "separation",  "dread",   "jittery",   "overwhelmed",
    "shaky",     "rumination", "phobia", "startle"};

const std::vector<std::string> kOtherCodes{"J06.9", "Z00.129", "H66.90", "R51.9", "L20.9", "K59.00"};

bool alpha_word(std::string_view w) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return std::islower(static_cast<unsigned char>(c)); });
}

std::string capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

struct Lexicons {
  std::vector<std::string> signal, clinical, shared, filler[2], names, stopwords;
  std::vector<std::string> pronouns[2]{{"he", "him", "his"}, {"she", "her", "hers"}};
};

class PseudoWords {
 public:
  explicit PseudoWords(std::unordered_set<std::string> taken) : taken_(std::move(taken)) {}
  std::string next() {
    static constexpr std::string_view cons = "bdfgklmnprstvz";
    static constexpr std::string_view vows = "aeiou";
    for (;;) {
      std::uint64_t h = splitmix64(0x5eed0000ULL + counter_++);
      int syll = 2 + static_cast<int>(h % 3);
      h /= 3;
      std::string w;
      for (int s = 0; s < syll; ++s) {
        w.push_back(cons[h % cons.size()]);
        h /= cons.size();
        w.push_back(vows[h % vows.size()]);
        h /= vows.size();
      }
      if (h % 4 == 0) w.push_back(cons[(h / 4) % cons.size()]);
      if (taken_.insert(w).second) return w;
    }
  }

 private:
  std::unordered_set<std::string> taken_;
  std::uint64_t counter_ = 0;
};

Lexicons build_lexicons(const SynthConfig& c) {
  Lexicons lx;
  std::unordered_set<std::string> taken;
  const auto& stop = default_stopwords();
  static const std::unordered_set<std::string> gendered{"he", "she", "his", "her", "him", "hers"};
  for (const auto& s : stop) {
    taken.insert(s);
    if (alpha_word(s) && !gendered.count(s)) lx.stopwords.push_back(s);
  }
  std::sort(lx.stopwords.begin(), lx.stopwords.end());
  for (const auto& n : read_lines(data_path("first_names.txt"))) {
    std::string low = to_lower(trim(n));
    if (!alpha_word(low) || !taken.insert(low).second) continue;
    lx.names.push_back(capitalize(low));
  }
  auto medical = read_lines(data_path("medical_terms.txt"));
  for (auto& m : medical) taken.insert(to_lower(trim(m)));
  for (const auto& w : kSignalWords) taken.insert(w);

  PseudoWords pseudo(taken);
  for (std::size_t i = 0; i < c.signal_vocab; ++i) lx.signal.push_back(i < kSignalWords.size() ? kSignalWords[i] : pseudo.next());
  const std::size_t medical_share = std::min<std::size_t>(c.clinical_vocab * 3 / 10, medical.size());
  for (const auto& m : medical) {
    if (lx.clinical.size() >= medical_share) break;
    std::string low = to_lower(trim(m));
    if (alpha_word(low) && std::find(lx.signal.begin(), lx.signal.end(), low) == lx.signal.end()) lx.clinical.push_back(low);
  }
  while (lx.clinical.size() < c.clinical_vocab) lx.clinical.push_back(pseudo.next());
  for (std::size_t i = 0; i < c.shared_vocab; ++i) lx.shared.push_back(pseudo.next());
  for (auto& f : lx.filler) {
    for (std::size_t i = 0; i < c.filler_vocab; ++i) f.push_back(pseudo.next());
  }
  return lx;
}

template <class V>
const std::string& pick(const V& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

struct DocumentDraw {
  std::vector<std::string> sentences;
  std::size_t signal_tokens = 0;
};

DocumentDraw draw_document(const SynthConfig& c, const Lexicons& lx, Sex sex, Label label, std::mt19937_64& rng) {
  const bool female = sex == Sex::F;
  const SexProfile& prof = female ? c.female : c.male;
  std::normal_distribution<double> len_d(prof.length_mean, prof.length_sd);
  const double words = std::max(300.0, len_d(rng));
  const double cf = c.content_fraction();
  const double content = words * cf;
  const double bs = female ? c.female_boilerplate_share() : c.male_boilerplate_share;
  const double lb = static_cast<double>(c.boilerplate_sentence_tokens);
  const double lc = static_cast<double>(c.clinical_sentence_tokens);
  const double w0 = bs / lb, w1 = (1 - bs) / lc;
  const auto n_sent = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(content * (w0 + w1))));
  std::bernoulli_distribution is_boiler(w0 / (w0 + w1));

  std::gamma_distribution<double> sev(c.severity_shape, 1.0 / c.severity_shape);
  const double v = sev(rng) * (label == Label::Case ? 1.0 : c.control_signal_factor);
  std::bernoulli_distribution is_signal(std::min(1.0, c.signal_per_clinical_token() * v));
  std::bernoulli_distribution is_filler(c.filler_rate);
  std::geometric_distribution<int> extras(cf);
  const double biased = c.biased_rate * (label == Label::Case ? c.case_biased_factor : 1.0);
  std::bernoulli_distribution extra_biased(std::min(1.0, biased / (1.0 - cf)));
  std::bernoulli_distribution extra_name(c.name_share);
  const int sx = female ? 1 : 0;

  DocumentDraw doc;
  doc.sentences.reserve(n_sent);
  std::string s;
  for (std::size_t i = 0; i < n_sent; ++i) {
    const bool boiler = is_boiler(rng);
    const std::size_t n_tok = boiler ? c.boilerplate_sentence_tokens : c.clinical_sentence_tokens;
    s.clear();
    for (std::size_t t = 0; t < n_tok; ++t) {
      for (int k = extras(rng); k > 0; --k) {
        if (!s.empty()) s.push_back(' ');
        if (extra_biased(rng)) s += extra_name(rng) ? pick(lx.names, rng) : pick(lx.pronouns[sx], rng);
        else s += pick(lx.stopwords, rng);
      }
      if (!s.empty()) s.push_back(' ');
      if (boiler) {
        s += (!lx.filler[sx].empty() && is_filler(rng)) ? pick(lx.filler[sx], rng) : pick(lx.shared, rng);
      } else if (is_signal(rng)) {
        s += pick(lx.signal, rng);
        ++doc.signal_tokens;
      } else {
        s += pick(lx.clinical, rng);
      }
    }
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    s.push_back('.');
    doc.sentences.push_back(s);
  }
  return doc;
}

std::string join_sentences(const std::vector<std::string>& s, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) out.push_back(' ');
    out += s[i];
  }
  return out;
}

struct PatientDraw {
  std::vector<RawNote> notes;
  std::vector<std::string> duplicates;
  std::size_t signal_tokens = 0;
  std::size_t words = 0;
};

Timestamp at(Date d, std::mt19937_64& rng, int max_hour = 20) {
  std::uniform_int_distribution<int> sec(8 * 3600, max_hour * 3600);
  return start_of(d) + std::chrono::seconds(sec(rng));
}

PatientDraw draw_patient(const SynthConfig& c, const Lexicons& lx, const PatientRecord& p, Label label, Date index,
                         std::mt19937_64& rng) {
  PatientDraw out;
  auto doc = draw_document(c, lx, p.sex, label, rng);
  out.signal_tokens = doc.signal_tokens;
  const std::size_t ns = doc.sentences.size();
  std::uniform_int_distribution<int> nn(c.notes_min, c.notes_max);
  std::size_t n_notes = std::min<std::size_t>(static_cast<std::size_t>(nn(rng)), ns);
  std::vector<std::size_t> cuts(ns - 1);
  std::iota(cuts.begin(), cuts.end(), 1);
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(n_notes - 1);
  cuts.push_back(0);
  cuts.push_back(ns);
  std::sort(cuts.begin(), cuts.end());

  std::uniform_int_distribution<int> back(1, 540);
  std::vector<Date> days(n_notes);
  for (auto& d : days) d = index - std::chrono::days(back(rng));
  std::sort(days.begin(), days.end());
  std::bernoulli_distribution tele(c.telephone_share), dup(c.duplicate_rate);
  int serial = 0;
  auto note_id = [&](char kind) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "-%c%03d", kind, ++serial);
    return p.patient_id + buf;
  };
  for (std::size_t k = 0; k < n_notes; ++k) {
    RawNote n;
    n.patient_id = p.patient_id;
    n.note_id = note_id('n');
    n.note_type = std::string(tele(rng) ? kTelephone : kProgress);
    n.timestamp = at(days[k], rng);
    n.text = join_sentences(doc.sentences, cuts[k], cuts[k + 1]);
    out.words += word_count(n.text);
    if (dup(rng)) {
      RawNote d = n;
      d.note_id = note_id('d');
      d.timestamp = n.timestamp + std::chrono::hours(1);
      out.duplicates.push_back(d.note_id);
      out.notes.push_back(std::move(d));
    }
    out.notes.push_back(std::move(n));
  }

  auto short_note = [&](Label l, std::string_view type, Timestamp ts) {
    SynthConfig tiny = c;
    tiny.male.length_mean = tiny.female.length_mean = 120;
    tiny.male.length_sd = tiny.female.length_sd = 0;
    auto d = draw_document(tiny, lx, p.sex, l, rng);
    RawNote n;
    n.patient_id = p.patient_id;
    n.note_id = note_id(type == kExcludedType ? 'x' : 'p');
    n.note_type = std::string(type);
    n.timestamp = ts;
    n.text = join_sentences(d.sentences, 0, d.sentences.size());
    return n;
  };
  if (std::bernoulli_distribution(c.other_type_rate)(rng)) {
    out.notes.push_back(short_note(label, kExcludedType, at(index - std::chrono::days(back(rng)), rng)));
  }
  if (label == Label::Case && std::bernoulli_distribution(c.post_index_rate)(rng)) {
    std::uniform_int_distribution<int> after(0, 200);
    int extra = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < extra; ++i) out.notes.push_back(short_note(Label::Case, kProgress, at(index + std::chrono::days(after(rng)), rng)));
  }
  sort_notes(out.notes);
  return out;
}

Date pick_birth(std::mt19937_64& rng) {
  using namespace std::chrono;
  std::uniform_int_distribution<int> d(0, 4000);
  Date b = sys_days(year{2005} / January / 1) + days(d(rng));
  year_month_day ymd(b);
  if (ymd.month() == February && ymd.day() == day{29}) b += days(1);
  return b;
}

Date pick_index(Date birth, int bin, std::mt19937_64& rng) {
  Date lo = add_years(birth, bin), hi = add_years(birth, bin + 1);
  std::uniform_int_distribution<int> d(0, static_cast<int>((hi - lo).count()) - 1);
  return lo + std::chrono::days(d(rng));
}

}  // namespace

double SynthConfig::signal_per_clinical_token() const { return male.signal_density / (1.0 - male_boilerplate_share); }

double SynthConfig::female_boilerplate_share() const {
  if (male.signal_density <= 0) return male_boilerplate_share;
  return 1.0 - (female.signal_density / male.signal_density) * (1.0 - male_boilerplate_share);
}

void SynthConfig::validate() const {
  auto unit = [](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0, 1]");
  };
  unit(female_ratio, "female_ratio");
  unit(white_ratio, "white_ratio");
  unit(biased_rate, "biased_rate");
  unit(name_share, "name_share");
  unit(stopword_rate, "stopword_rate");
  unit(filler_rate, "filler_rate");
  unit(duplicate_rate, "duplicate_rate");
  unit(other_type_rate, "other_type_rate");
  unit(post_index_rate, "post_index_rate");
  unit(telephone_share, "telephone_share");
  unit(control_signal_factor, "control_signal_factor");
  if (case_ratio != 0.5) throw ConfigError("case_ratio is fixed at 0.5 (1:1 matched design)");
  for (const SexProfile* s : {&male, &female}) {
    if (!(s->length_mean > 0) || s->length_sd < 0) throw ConfigError("note lengths must be positive");
    if (!(s->signal_density >= 0.0 && s->signal_density <= 1.0)) throw ConfigError("signal density must lie in [0, 1]");
  }
  if (!(male_boilerplate_share >= 0.0 && male_boilerplate_share < 1.0)) throw ConfigError("male_boilerplate_share must lie in [0, 1)");
  if (signal_per_clinical_token() > 1.0) throw ConfigError("signal density exceeds the clinical token budget (infeasible)");
  if (female.signal_density > 0 && male.signal_density <= 0) throw ConfigError("female signal needs a positive male density");
  double fb = female_boilerplate_share();
  if (!(fb >= 0.0 && fb < 1.0)) throw ConfigError("female signal density cannot be realised with this boilerplate share");
  if (content_fraction() <= 0.05) throw ConfigError("stopword_rate + biased_rate leaves no room for content");
  if (biased_rate * case_biased_factor > 1.0 - content_fraction() + 1e-12) throw ConfigError("case_biased_factor too large");
  if (case_biased_factor <= 0) throw ConfigError("case_biased_factor must be positive");
  if (signal_vocab == 0 || clinical_vocab == 0 || shared_vocab == 0) throw ConfigError("lexicon sizes must be positive");
  if (filler_rate > 0 && filler_vocab == 0) throw ConfigError("filler_rate needs filler_vocab > 0");
  if (boilerplate_sentence_tokens == 0 || clinical_sentence_tokens == 0) throw ConfigError("sentence lengths must be positive");
  if (notes_min < 1 || notes_max < notes_min) throw ConfigError("notes range must satisfy 1 <= min <= max");
  if (bin < 0 || bin > 30) throw ConfigError("bin out of range");
  if (!(severity_shape > 0)) throw ConfigError("severity_shape must be positive");
}

SynthConfig synth_preset(const std::string& name) {
  SynthConfig c;
  c.preset = name;
  if (name == "default") return c;
  if (name == "subgroups-bin5") {
    c.n_patients = 4188;
    return c;
  }
  if (name == "unbiased") {
    c.male = c.female = SexProfile{3800, 900, 0.012};
    return c;
  }
  if (name == "planted-pronoun") {
    c.n_patients = 400;
    c.female_ratio = 0.5;
    c.male = c.female = SexProfile{500, 80, 0.04};
    c.biased_rate = 0.02;
    c.case_biased_factor = 4.0;
    c.name_share = 0.2;
    c.notes_min = 2;
    c.notes_max = 5;
    return c;
  }
  throw ConfigError("unknown synth preset '" + name + "'");
}

std::vector<std::string> synth_preset_names() { return {"default", "subgroups-bin5", "planted-pronoun", "unbiased"}; }

std::set<std::string> synth_note_types() { return {std::string(kProgress), std::string(kTelephone)}; }

SynthCorpus generate(const SynthConfig& config) {
  config.validate();
  SynthCorpus corpus;
  const std::size_t n = config.n_patients;
  if (n == 0) return corpus;
  const Lexicons lx = build_lexicons(config);
  const auto& codes = CodeSet::shipped().entries();
  std::vector<std::pair<CodeVocabulary, std::string>> code_list(codes.begin(), codes.end());

  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), 1);
  std::mt19937_64 id_rng(derive_seed(config.seed, "synth/ids"));
  std::shuffle(ids.begin(), ids.end(), id_rng);
  auto id_of = [&](std::size_t slot) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "P%05zu", ids[slot]);
    return std::string(buf);
  };

  struct Slot {
    PatientRecord patient;
    Label label;
    Date index;
    std::string pair;
    PatientDraw draw;
    std::vector<DiagnosisEvent> dx;
  };
  std::vector<Slot> slots(n);
  const std::size_t pairs = n / 2;
  parallel_for((n + 1) / 2, [&](std::size_t k) {
    std::mt19937_64 rng(derive_seed(config.seed, "synth/pair/" + std::to_string(k)));
    const bool lone = k == pairs;
    Sex sex = std::bernoulli_distribution(config.female_ratio)(rng) ? Sex::F : Sex::M;
    Date birth = pick_birth(rng);
    Date index = pick_index(birth, config.bin, rng);
    std::uniform_int_distribution<int> jitter(-30, 30);
    for (int m = 0; m < (lone ? 1 : 2); ++m) {
      std::size_t at_slot = lone ? 2 * k : 2 * k + static_cast<std::size_t>(m);
      Slot& s = slots[at_slot];
      s.label = (m == 0 && !lone) ? Label::Case : Label::Control;
      s.index = index;
      s.pair = "pair" + std::to_string(k);
      s.patient.patient_id = id_of(at_slot);
      s.patient.sex = sex;
      s.patient.birth_date = m == 0 ? birth : birth + std::chrono::days(jitter(rng));
      s.patient.race = std::bernoulli_distribution(config.white_ratio)(rng) ? "White" : "Other";
      std::mt19937_64 text_rng(derive_seed(config.seed, "synth/text/" + s.patient.patient_id));
      s.draw = draw_patient(config, lx, s.patient, s.label, index, text_rng);
      auto code = [&]() { return code_list[std::uniform_int_distribution<std::size_t>(0, code_list.size() - 1)(rng)]; };
      if (s.label == Label::Case) {
        auto [voc, cd] = code();
        s.dx.push_back({s.patient.patient_id, cd, voc, index});
        int later = std::uniform_int_distribution<int>(0, 2)(rng);
        for (int i = 0; i < later; ++i) {
          auto [v2, c2] = code();
          s.dx.push_back({s.patient.patient_id, c2, v2, index + std::chrono::days(std::uniform_int_distribution<int>(1, 700)(rng))});
        }
      } else if (std::bernoulli_distribution(0.1)(rng)) {
        auto [voc, cd] = code();
        s.dx.push_back({s.patient.patient_id, cd, voc, index + std::chrono::days(std::uniform_int_distribution<int>(400, 1500)(rng))});
      }
      if (std::bernoulli_distribution(0.3)(rng)) {
        const auto& other = kOtherCodes[std::uniform_int_distribution<std::size_t>(0, kOtherCodes.size() - 1)(rng)];
        s.dx.push_back({s.patient.patient_id, other, CodeVocabulary::ICD10CM,
                        index - std::chrono::days(std::uniform_int_distribution<int>(1, 900)(rng))});
      }
    }
  });

  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) { return a.patient.patient_id < b.patient.patient_id; });
  for (auto& s : slots) {
    corpus.patients.push_back(s.patient);
    GroundTruthRow t;
    t.patient_id = s.patient.patient_id;
    t.label = s.label;
    t.sex = s.patient.sex;
    t.race = s.patient.race;
    t.index_date = s.index;
    t.pair = s.pair;
    t.signal_tokens = s.draw.signal_tokens;
    t.words = s.draw.words;
    corpus.truth.push_back(std::move(t));
    for (auto& note : s.draw.notes) corpus.notes.push_back(std::move(note));
    for (auto& d : s.draw.duplicates) corpus.duplicate_note_ids.push_back(std::move(d));
    std::sort(s.dx.begin(), s.dx.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
    for (auto& d : s.dx) corpus.diagnoses.push_back(std::move(d));
  }
  return corpus;
}

bool SynthVerification::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const SynthCheck& c) { return c.pass; });
}

SynthVerification verify(const SynthCorpus& corpus, const SynthConfig& config, double sigmas) {
  SynthVerification out;
  const std::size_t n = corpus.patients.size();
  if (n == 0) return out;
  auto add = [&](std::string name, double expected, double measured, double se) {
    double tol = sigmas * se;
    out.checks.push_back({std::move(name), expected, measured, tol, std::abs(measured - expected) <= tol});
  };

  std::size_t females = 0;
  for (const auto& p : corpus.patients) females += p.sex == Sex::F;
  {
    const double p = config.female_ratio;
    const double units = static_cast<double>(n / 2);
    double var = 4.0 * units * p * (1 - p) + (n % 2 ? p * (1 - p) : 0.0);
    add("female_ratio", p, static_cast<double>(females) / static_cast<double>(n), std::sqrt(var) / static_cast<double>(n));
  }

  std::unordered_map<std::string, const GroundTruthRow*> truth;
  for (const auto& t : corpus.truth) truth.emplace(t.patient_id, &t);
  std::unordered_set<std::string> dups(corpus.duplicate_note_ids.begin(), corpus.duplicate_note_ids.end());
  const auto kept_types = synth_note_types();
  std::unordered_map<std::string, std::size_t> words;
  std::size_t total_words = 0, biased_words = 0;
  double expected_biased = 0;
  const GenderLexicon lexicon = GenderLexicon::shipped();
  for (const auto& note : corpus.notes) {
    auto it = truth.find(note.patient_id);
    if (it == truth.end() || dups.count(note.note_id) || !kept_types.count(note.note_type)) continue;
    if (note.timestamp >= start_of(it->second->index_date)) continue;
    words[note.patient_id] += word_count(note.text);
    const auto spans = word_spans(note.text).size();
    const double pct = biased_word_percentage(note.text, lexicon);
    biased_words += static_cast<std::size_t>(std::llround(pct * static_cast<double>(spans) / 100.0));
    total_words += spans;
    expected_biased += static_cast<double>(spans) * config.biased_rate *
                       (it->second->label == Label::Case ? config.case_biased_factor : 1.0);
  }

  for (Sex sex : {Sex::M, Sex::F}) {
    const SexProfile& prof = sex == Sex::F ? config.female : config.male;
    double sum = 0;
    std::size_t k = 0;
    for (const auto& t : corpus.truth) {
      if (t.sex != sex) continue;
      sum += static_cast<double>(words[t.patient_id]);
      ++k;
    }
    if (k == 0) continue;
    // Between-document spread plus the sentence-kind and interleaving noise.
    const double cf = config.content_fraction();
    const double bs = sex == Sex::F ? config.female_boilerplate_share() : config.male_boilerplate_share;
    const double lb = static_cast<double>(config.boilerplate_sentence_tokens), lc = static_cast<double>(config.clinical_sentence_tokens);
    const double w0 = bs / lb, w1 = (1 - bs) / lc, pb = w0 / (w0 + w1);
    const double tokens = prof.length_mean * cf;
    const double var_tokens = tokens * (w0 + w1) * pb * (1 - pb) * (lb - lc) * (lb - lc);
    const double var_within = var_tokens / (cf * cf) + tokens * (1 - cf) / (cf * cf);
    const double se = std::sqrt(prof.length_sd * prof.length_sd + var_within) / std::sqrt(static_cast<double>(k));
    add(std::string("length_mean_") + std::string(to_string(sex)), prof.length_mean, sum / static_cast<double>(k), se);
  }

  if (total_words > 0) {
    const double p = expected_biased / static_cast<double>(total_words);
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(total_words));
    add("biased_pct", 100.0 * p, 100.0 * static_cast<double>(biased_words) / static_cast<double>(total_words), 100.0 * se);
  }
  return out;
}

void write_ground_truth(std::ostream& out, const std::vector<GroundTruthRow>& rows) {
  for (const auto& t : rows) {
    nlohmann::ordered_json j;
    j["patient_id"] = t.patient_id;
    j["label"] = to_string(t.label);
    j["sex"] = to_string(t.sex);
    j["race"] = t.race;
    j["index_date"] = format_date(t.index_date);
    j["pair"] = t.pair;
    j["signal_tokens"] = t.signal_tokens;
    j["words"] = t.words;
    out << j.dump() << '\n';
  }
}

}  // namespace fairtext
