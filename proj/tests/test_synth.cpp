#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "fairtext/synth.hpp"

using namespace fairtext;

TEST_CASE("presets validate") {
  for (const auto& name : synth_preset_names()) {
    auto c = synth_preset(name);
    CHECK(c.preset == name);
    CHECK_NOTHROW(c.validate());
  }
  CHECK_THROWS_AS(synth_preset("nope"), ConfigError);
}

TEST_CASE("boilerplate shares equalize signal per clinical token") {
  SynthConfig c;
  CHECK(c.female_boilerplate_share() == doctest::Approx(1 - 0.7 * 0.78));
  double male = c.male.signal_density / (1 - c.male_boilerplate_share);
  double female = c.female.signal_density / (1 - c.female_boilerplate_share());
  CHECK(male == doctest::Approx(female));
  c.case_ratio = 0.4;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SynthConfig{};
  c.female.signal_density = 0.05;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SynthConfig{};
  c.notes_max = 2;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("generated corpus is deterministic and consistent") {
  auto c = synth_preset("default");
  c.n_patients = 240;
  c.seed = 5;
  auto a = generate(c);
  auto b = generate(c);
  REQUIRE(a.notes.size() == b.notes.size());
  for (std::size_t i = 0; i < a.notes.size(); ++i) CHECK(a.notes[i].text == b.notes[i].text);
  CHECK(a.patients.size() == 240);
  CHECK(a.truth.size() == 240);
  c.seed = 6;
  CHECK(generate(c).notes[0].text != a.notes[0].text);

  std::map<std::string, const PatientRecord*> pat;
  for (const auto& p : a.patients) pat[p.patient_id] = &p;
  std::size_t cases = 0;
  std::map<std::string, int> per_pair;
  std::map<std::string, Date> first_dx;
  for (const auto& d : a.diagnoses) {
    if (!CodeSet::shipped().contains(d.vocabulary, d.code)) continue;
    auto it = first_dx.find(d.patient_id);
    if (it == first_dx.end() || d.date < it->second) first_dx[d.patient_id] = d.date;
  }
  for (const auto& t : a.truth) {
    REQUIRE(pat.count(t.patient_id));
    CHECK(pat[t.patient_id]->sex == t.sex);
    ++per_pair[t.pair];
    if (t.label != Label::Case) {
      CHECK((!first_dx.count(t.patient_id) || first_dx[t.patient_id] > t.index_date));
      continue;
    }
    ++cases;
    CHECK(whole_years_between(pat[t.patient_id]->birth_date, t.index_date) == c.bin);
    REQUIRE(first_dx.count(t.patient_id));
    CHECK(first_dx[t.patient_id] == t.index_date);
  }
  CHECK(cases == 120);
  for (const auto& [p, n] : per_pair) CHECK(n == 2);

  std::set<std::string> ids;
  std::map<std::string, std::size_t> types;
  for (const auto& n : a.notes) {
    CHECK(ids.insert(n.note_id).second);
    ++types[n.note_type];
  }
  auto keep = synth_note_types();
  std::size_t other = 0;
  for (const auto& [t, k] : types) other += keep.count(t) ? 0 : k;
  CHECK(other > 0);
  CHECK_FALSE(a.duplicate_note_ids.empty());
  CHECK(verify(a, c).pass());
}

TEST_CASE("verification detects a corpus that does not match its config") {
  auto c = synth_preset("default");
  c.n_patients = 200;
  c.seed = 2;
  auto corpus = generate(c);
  auto wrong = c;
  wrong.female_ratio = 0.9;
  auto v = verify(corpus, wrong);
  CHECK_FALSE(v.pass());
  std::ostringstream out;
  write_ground_truth(out, corpus.truth);
  auto text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 200);
}
