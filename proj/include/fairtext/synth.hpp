#pragma once

#include <cstdint>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "fairtext/cohort.hpp"

namespace fairtext {

struct SexProfile {
  double length_mean = 4000;  // words per concatenated pre-index document
  double length_sd = 900;
  double signal_density = 0.02;  // signal tokens per content token in case documents
};

struct SynthConfig {
  std::string preset = "default";
  std::size_t n_patients = 2000;
  double female_ratio = 0.36;
  double case_ratio = 0.5;
  double white_ratio = 0.68;
  int bin = 5;
  SexProfile male{4139, 900, 0.012};
  SexProfile female{3443, 900, 0.0084};
  // Share of male content tokens sitting in boilerplate sentences; the female
  // share follows from the density ratio so that signal per clinical token is
  // equal for both sexes.
  double male_boilerplate_share = 0.22;
  double control_signal_factor = 0.3;
  double severity_shape = 30;  // gamma shape of the per-patient signal multiplier
  double biased_rate = 0.03;   // names + gendered pronouns per word
  double name_share = 0.25;    // of biased words
  double case_biased_factor = 1.0;
  double stopword_rate = 0.32;
  std::size_t signal_vocab = 15;
  std::size_t clinical_vocab = 200;
  std::size_t shared_vocab = 1000;
  std::size_t filler_vocab = 0;  // per sex
  double filler_rate = 0.0;      // share of boilerplate tokens drawn from the sex's filler lexicon
  std::size_t boilerplate_sentence_tokens = 30;
  std::size_t clinical_sentence_tokens = 8;
  int notes_min = 6;
  int notes_max = 20;
  double duplicate_rate = 0.05;      // extra verbatim copies of a note
  double other_type_rate = 0.1;      // extra notes with an excluded note type
  double post_index_rate = 0.5;      // cases with notes after diagnosis
  double telephone_share = 0.15;
  std::uint64_t seed = 0;

  double female_boilerplate_share() const;
  double signal_per_clinical_token() const;
  double content_fraction() const { return 1.0 - stopword_rate - biased_rate; }
  void validate() const;
};

// Named presets: "default", "subgroups-bin5", "planted-pronoun", "unbiased".
SynthConfig synth_preset(const std::string& name);
std::vector<std::string> synth_preset_names();

struct GroundTruthRow {
  std::string patient_id;
  Label label = Label::Control;
  Sex sex = Sex::M;
  std::string race;
  Date index_date;
  std::string pair;
  std::size_t signal_tokens = 0;
  std::size_t words = 0;
};

struct SynthCorpus {
  std::vector<PatientRecord> patients;
  std::vector<RawNote> notes;
  std::vector<DiagnosisEvent> diagnoses;
  std::vector<GroundTruthRow> truth;
  std::vector<std::string> duplicate_note_ids;
};

std::set<std::string> synth_note_types();  // the types a pipeline should keep

SynthCorpus generate(const SynthConfig& config);

struct SynthCheck {
  std::string name;
  double expected = 0;
  double measured = 0;
  double tolerance = 0;
  bool pass = false;
};

struct SynthVerification {
  std::vector<SynthCheck> checks;
  bool pass() const;
};

// Measures female ratio, per-sex pre-index document lengths and the biased
// word rate. Tolerances are sigmas times the sampling standard error implied
// by the config.
SynthVerification verify(const SynthCorpus& corpus, const SynthConfig& config, double sigmas = 3.0);

void write_ground_truth(std::ostream& out, const std::vector<GroundTruthRow>& rows);

}  // namespace fairtext
