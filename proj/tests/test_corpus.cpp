#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fairtext/corpus.hpp"
#include "oracles.hpp"

using namespace fairtext;
using namespace std::chrono;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  auto dir = std::filesystem::temp_directory_path() / "fairtext_tests";
  std::filesystem::create_directories(dir);
  auto p = dir / name;
  std::ofstream(p) << body;
  return p;
}

RawNote note(std::string pid, std::string id, int day, std::string text, std::string type = "Progress Notes") {
  return {std::move(pid), std::move(id), std::move(type), Timestamp{sys_days{year{2020} / 1 / 1} + days{day}},
          std::move(text)};
}

}  // namespace

TEST_CASE("ingest skips malformed lines with their line numbers") {
  auto p = temp_file("notes.jsonl",
                     R"({"patient_id":"P1","note_id":"N1","note_type":"Progress Notes","timestamp":"2020-01-01T10:00:00Z","text":"calm"})"
                     "\n\n"
                     "not json\n"
                     R"({"patient_id":"P1","note_id":"N2","note_type":"Progress Notes","timestamp":"yesterday","text":"x"})"
                     "\n"
                     R"({"patient_id":"P1","note_id":"N1","note_type":"Progress Notes","timestamp":"2020-01-02","text":"dup id"})"
                     "\n"
                     R"({"patient_id":"P1","note_id":"N3","note_type":"Progress Notes","timestamp":"2020-01-02"})"
                     "\n");
  auto r = ingest_notes(p);
  REQUIRE(r.records.size() == 1);
  REQUIRE(r.warnings.size() == 4);
  CHECK(r.warnings[0].line == 3);
  CHECK(r.warnings[1].line == 4);
  CHECK(r.warnings[2].line == 5);
  CHECK(r.warnings[3].line == 6);
  CHECK_THROWS_AS(ingest_notes("/nonexistent/notes.jsonl"), DataError);
}

TEST_CASE("records round-trip through the writers") {
  std::vector<PatientRecord> pats{{"P1", Sex::F, "white", sys_days{year{2012} / 2 / 29}}};
  std::vector<DiagnosisEvent> dx{{"P1", "F41.1", CodeVocabulary::ICD10CM, sys_days{year{2018} / 5 / 1}}};
  std::vector<RawNote> notes{note("P1", "N1", 3, "line one\nline \"two\"")};
  std::ostringstream a, b, c;
  write_patients(a, pats);
  write_diagnoses(b, dx);
  write_notes(c, notes);
  auto rp = ingest_patients(temp_file("p.jsonl", a.str()));
  auto rd = ingest_diagnoses(temp_file("d.jsonl", b.str()));
  auto rn = ingest_notes(temp_file("n.jsonl", c.str()));
  REQUIRE(rp.records.size() == 1);
  CHECK(rp.records[0].sex == Sex::F);
  CHECK(rp.records[0].birth_date == pats[0].birth_date);
  REQUIRE(rd.records.size() == 1);
  CHECK(rd.records[0].code == "F41.1");
  REQUIRE(rn.records.size() == 1);
  CHECK(rn.records[0].text == notes[0].text);
  CHECK(rn.records[0].timestamp == notes[0].timestamp);
}

TEST_CASE("note type filter trims both sides") {
  std::vector<RawNote> n{note("P", "a", 0, "x", " Progress Notes "), note("P", "b", 0, "x", "Patient Instructions")};
  auto out = filter_note_types(n, {"Progress Notes  "});
  REQUIRE(out.size() == 1);
  CHECK(out[0].note_id == "a");
}

TEST_CASE("timelines drop unknown patients and notes before birth") {
  std::vector<PatientRecord> pats{{"P1", Sex::M, "white", sys_days{year{2020} / 1 / 5}}};
  std::vector<RawNote> n{note("P1", "b", 9, "later"), note("P1", "a", 9, "same time"), note("P1", "c", 1, "early"),
                         note("P9", "d", 9, "stranger")};
  std::vector<IngestWarning> w;
  auto t = build_timelines(pats, n, &w);
  REQUIRE(t.size() == 1);
  REQUIRE(t[0].notes.size() == 2);
  CHECK(t[0].notes[0].note_id == "a");
  CHECK(w.size() == 2);
}

TEST_CASE("dedup matches the brute-force oracle") {
  const auto& stop = default_stopwords();
  const char* vocab[] = {"fever", "cough", "rash", "pain", "sleep", "worry", "the", "dose"};
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    PatientTimeline tl;
    std::vector<std::string> texts;
    for (int i = 0; i < 40; ++i) {
      std::string t;
      if (i > 2 && rng() % 3 == 0) {
        t = texts[rng() % texts.size()] + (rng() % 2 ? " fever" : "");
      } else {
        int len = 1 + static_cast<int>(rng() % 6);
        for (int k = 0; k < len; ++k) t += std::string(k ? " " : "") + vocab[rng() % 8];
      }
      texts.push_back(t);
      char id[8];
      std::snprintf(id, sizeof id, "N%02d", i);
      tl.notes.push_back(note("P", id, i, t));
    }
    for (auto [num, den] : {std::pair<int, int>{4, 5}, {1, 2}, {1, 1}}) {
      auto got = dedup_notes(tl, static_cast<double>(num) / den, stop);
      auto want = oracle::dedup(texts, num, den, stop);
      std::vector<std::size_t> idx;
      for (const auto& n : got.notes) idx.push_back(std::stoul(n.note_id.substr(1)));
      CHECK(idx == want);
    }
  }
}

TEST_CASE("dedup boundary cases") {
  const auto& stop = default_stopwords();
  PatientTimeline tl;
  tl.notes = {note("P", "a", 0, "fever cough rash nausea pain"), note("P", "b", 1, "fever cough rash"),
              note("P", "c", 2, "the of and"), note("P", "d", 3, "the of and")};
  DedupStats st;
  auto out = dedup_notes(tl, 0.8, stop, &st);
  CHECK(out.notes.size() == 4);  // cosine 0.7746 stays, token-less notes are never compared
  CHECK(st.empty == 2);
  CHECK(out.empty_notes == std::vector<std::string>{"c", "d"});

  // Exactly 0.8 (16 / 20) is a duplicate.
  tl.notes = {note("P", "a", 0, "cough school sleep sleep refill school calm stomach calm nausea tired tired"),
              note("P", "b", 1, "school refill nausea calm refill cough stomach school visit stomach calm sleep")};
  CHECK(oracle::at_least(tokenize(tl.notes[0].text, stop), tokenize(tl.notes[1].text, stop), 4, 5));
  CHECK(dedup_notes(tl, 0.8, stop).notes.size() == 1);
  CHECK_THROWS_AS(dedup_notes(tl, 0.0, stop), ConfigError);
  CHECK_THROWS_AS(dedup_notes(tl, 1.5, stop), ConfigError);
}

TEST_CASE("global dedup compares notes across patients in time order") {
  const auto& stop = default_stopwords();
  PatientTimeline a, b;
  a.patient.patient_id = "A";
  b.patient.patient_id = "B";
  a.notes = {note("A", "a1", 5, "fever cough rash"), note("A", "a2", 6, "sleep worry")};
  b.notes = {note("B", "b1", 1, "fever cough rash"), note("B", "b2", 7, "sleep worry dose")};
  auto out = dedup_notes_global({a, b}, 0.8, stop);
  REQUIRE(out.size() == 2);
  CHECK(out[0].notes.size() == 1);
  CHECK(out[0].notes[0].note_id == "a2");
  CHECK(out[1].notes.size() == 1);  // b2 vs a2: cosine 2 / sqrt(6) = 0.816
}

TEST_CASE("select_recent keeps the latest notes with larger ids on ties") {
  PatientTimeline tl;
  tl.notes = {note("P", "n1", 1, "x"), note("P", "n3", 5, "x"), note("P", "n2", 5, "x"), note("P", "n4", 3, "x")};
  auto out = select_recent(tl, 2);
  REQUIRE(out.notes.size() == 2);
  CHECK(out.notes[0].note_id == "n2");
  CHECK(out.notes[1].note_id == "n3");
  out = select_recent(tl, 1);
  CHECK(out.notes[0].note_id == "n3");
  CHECK_THROWS_AS(select_recent(tl, 0), ConfigError);
  tl.notes = {note("P", "a", 0, "one"), note("P", "b", 1, "  "), note("P", "c", 2, "two")};
  CHECK(concatenate(tl) == "one\ntwo");
}
