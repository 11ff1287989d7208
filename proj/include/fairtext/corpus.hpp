#pragma once

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "fairtext/dates.hpp"
#include "fairtext/lexical.hpp"
#include "fairtext/util.hpp"

namespace fairtext {

enum class Sex { M, F };
enum class CodeVocabulary { ICD9CM, ICD10CM };

std::string_view to_string(Sex s);
std::string_view to_string(CodeVocabulary v);
std::optional<Sex> parse_sex(std::string_view s);
std::optional<CodeVocabulary> parse_code_vocabulary(std::string_view s);

struct RawNote {
  std::string patient_id;
  std::string note_id;
  std::string note_type;
  Timestamp timestamp;
  std::string text;
};

struct PatientRecord {
  std::string patient_id;
  Sex sex = Sex::M;
  std::string race;
  Date birth_date;
};

struct DiagnosisEvent {
  std::string patient_id;
  std::string code;
  CodeVocabulary vocabulary = CodeVocabulary::ICD10CM;
  Date date;
};

// Notes ascending by (timestamp, note_id).
struct PatientTimeline {
  PatientRecord patient;
  std::vector<RawNote> notes;
  // note_ids whose text is empty after cleaning (kept, never compared)
  std::vector<std::string> empty_notes;
};

template <class T>
struct Ingested {
  std::vector<T> records;
  std::vector<IngestWarning> warnings;
};

// Line-delimited JSON readers. Malformed lines are skipped with a warning
// carrying their 1-based line number; an unreadable file throws DataError.
Ingested<RawNote> ingest_notes(const std::filesystem::path& path);
Ingested<PatientRecord> ingest_patients(const std::filesystem::path& path);
Ingested<DiagnosisEvent> ingest_diagnoses(const std::filesystem::path& path);

void write_notes(std::ostream& out, const std::vector<RawNote>& notes);
void write_patients(std::ostream& out, const std::vector<PatientRecord>& patients);
void write_diagnoses(std::ostream& out, const std::vector<DiagnosisEvent>& diagnoses);

// Keeps notes whose trimmed note_type is in `allowed` (also trimmed).
std::vector<RawNote> filter_note_types(const std::vector<RawNote>& notes, const std::set<std::string>& allowed);

void sort_notes(std::vector<RawNote>& notes);

// Groups notes by patient; one timeline per known patient, ordered by
// patient_id. Notes of unknown patients, or dated before the patient's
// birth, are dropped with a warning.
std::vector<PatientTimeline> build_timelines(const std::vector<PatientRecord>& patients,
                                             const std::vector<RawNote>& notes,
                                             std::vector<IngestWarning>* warnings = nullptr);

struct DedupStats {
  std::size_t dropped = 0;
  std::size_t empty = 0;
};

// Scans notes in timeline order and drops a note when its count-vector cosine
// against any retained note is >= threshold. Counts are taken over
// tokenize(text, stopwords).
PatientTimeline dedup_notes(const PatientTimeline& timeline, double threshold, const StopwordSet& stopwords,
                            DedupStats* stats = nullptr);

// Same rule applied across all patients at once (notes ordered by timestamp,
// then note_id).
std::vector<PatientTimeline> dedup_notes_global(const std::vector<PatientTimeline>& timelines,
                                                double threshold, const StopwordSet& stopwords,
                                                DedupStats* stats = nullptr);

// The k latest notes, ties at the cutoff resolved by note_id descending.
PatientTimeline select_recent(const PatientTimeline& timeline, std::size_t k);

// Texts of non-empty notes joined by newlines.
std::string concatenate(const PatientTimeline& timeline);

}  // namespace fairtext
