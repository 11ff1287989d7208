#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "fairtext/cli.hpp"
#include "fairtext/reports.hpp"
#include "fairtext/util.hpp"

namespace fairtext::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Resources {
  StopwordSet stopwords;
  TermLexicon terms;
  CodeSet codes;
  std::shared_ptr<const HeuristicNameDetector> detector;

  explicit Resources(const Paths& p) {
    stopwords = p.stopwords.empty() ? default_stopwords() : load_stopwords(p.stopwords);
    terms = p.medical_terms.empty() ? TermLexicon::shipped() : TermLexicon::load(p.medical_terms);
    codes = p.codes.empty() ? CodeSet::shipped() : CodeSet::load(p.codes);
    auto names = load_first_names(p.first_names.empty() ? data_path("first_names.txt") : p.first_names);
    detector = std::make_shared<const HeuristicNameDetector>(std::move(names), &terms, &stopwords);
  }
  GenderLexicon gender() const {
    GenderLexicon g;
    g.names = detector;
    return g;
  }
  LexicalResources lexical() const { return {&stopwords, &terms, gender()}; }
  GenSubOptions gen_sub() const {
    GenSubOptions o;
    o.detector = detector;
    return o;
  }
};

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void require_input(const fs::path& p) {
  if (!fs::exists(p)) throw DataError("stage input missing: " + p.string());
}

void write_warnings(const fs::path& path, const std::string& source, const std::vector<IngestWarning>& warnings) {
  auto out = open_out(path);
  for (const auto& w : warnings) out << json{{"source", source}, {"line", w.line}, {"message", w.message}}.dump() << '\n';
}

Manifest manifest_for(const std::string& command, const RunConfig& cfg) {
  return Manifest(command, config_to_json(cfg), config_hash(cfg));
}

CorpusData load_corpus(const RunConfig& cfg, Manifest& m, std::vector<IngestWarning>& warnings) {
  for (const auto& p : {cfg.notes_path(), cfg.patients_path(), cfg.diagnoses_path()}) require_input(p);
  CorpusData c;
  auto notes = ingest_notes(cfg.notes_path());
  auto patients = ingest_patients(cfg.patients_path());
  auto dx = ingest_diagnoses(cfg.diagnoses_path());
  for (auto* w : {&notes.warnings, &patients.warnings, &dx.warnings}) warnings.insert(warnings.end(), w->begin(), w->end());
  c.notes = std::move(notes.records);
  c.patients = std::move(patients.records);
  c.diagnoses = std::move(dx.records);
  for (const auto& p : {cfg.notes_path(), cfg.patients_path(), cfg.diagnoses_path()}) m.input(p);
  m.count("ingest_notes", c.notes.size() + notes.warnings.size(), c.notes.size());
  m.count("ingest_patients", c.patients.size() + patients.warnings.size(), c.patients.size());
  m.count("ingest_diagnoses", c.diagnoses.size() + dx.warnings.size(), c.diagnoses.size());
  return c;
}

int cmd_synth(RunConfig& cfg) {
  auto m = manifest_for("synth", cfg);
  cfg.synth.seed = cfg.require_seed("synth");
  auto corpus = generate(cfg.synth);
  auto check = verify(corpus, cfg.synth);
  const fs::path dir = cfg.run_dir / "corpus";
  {
    auto o = open_out(dir / "notes.jsonl");
    write_notes(o, corpus.notes);
  }
  {
    auto o = open_out(dir / "patients.jsonl");
    write_patients(o, corpus.patients);
  }
  {
    auto o = open_out(dir / "diagnoses.jsonl");
    write_diagnoses(o, corpus.diagnoses);
  }
  {
    auto o = open_out(dir / "ground_truth.jsonl");
    write_ground_truth(o, corpus.truth);
  }
  {
    auto o = open_out(dir / "verify.txt");
    char buf[160];
    for (const auto& c : check.checks) {
      std::snprintf(buf, sizeof buf, "%-16s expected %10.4f measured %10.4f tolerance %8.4f  %s\n", c.name.c_str(), c.expected,
                    c.measured, c.tolerance, c.pass ? "ok" : "FAIL");
      o << buf;
    }
  }
  for (const char* f : {"notes.jsonl", "patients.jsonl", "diagnoses.jsonl", "ground_truth.jsonl", "verify.txt"}) m.artifact(dir / f);
  m.count("patients", cfg.synth.n_patients, corpus.patients.size());
  m.count("notes", 0, corpus.notes.size());
  m.count("diagnoses", 0, corpus.diagnoses.size());
  m.note("verification", check.pass() ? "pass" : "fail");
  m.write(dir);
  std::cout << "synth: " << corpus.patients.size() << " patients, " << corpus.notes.size() << " notes -> " << dir.string()
            << (check.pass() ? "" : " (verification FAILED, see verify.txt)") << '\n';
  return 0;
}

int cmd_ingest(RunConfig& cfg) {
  auto m = manifest_for("ingest", cfg);
  std::vector<IngestWarning> warnings;
  auto c = load_corpus(cfg, m, warnings);
  const fs::path dir = cfg.run_dir / "ingest";
  write_warnings(dir / "warnings.jsonl", "corpus", warnings);
  std::map<std::string, std::size_t> types;
  for (const auto& n : c.notes) ++types[n.note_type];
  auto timelines = build_timelines(c.patients, c.notes, &warnings);
  json summary{{"notes", c.notes.size()},
               {"patients", c.patients.size()},
               {"diagnoses", c.diagnoses.size()},
               {"note_types", types},
               {"timelines", timelines.size()},
               {"warnings", warnings.size()}};
  open_out(dir / "summary.json") << summary.dump(2) << '\n';
  m.artifact(dir / "warnings.jsonl");
  m.artifact(dir / "summary.json");
  m.write(dir);
  std::cout << "ingest: " << c.notes.size() << " notes, " << c.patients.size() << " patients, " << c.diagnoses.size()
            << " diagnoses, " << warnings.size() << " warnings\n";
  return 0;
}

int cmd_cohort(RunConfig& cfg) {
  auto m = manifest_for("cohort", cfg);
  const std::uint64_t seed = cfg.require_seed("cohort");
  Resources res(cfg.paths);
  std::vector<IngestWarning> warnings;
  auto corpus = load_corpus(cfg, m, warnings);
  CohortOptions co = cfg.cohort;
  co.seed = seed;
  auto cohort = build_cohort(corpus, res.codes, co, res.stopwords);
  warnings.insert(warnings.end(), cohort.warnings.begin(), cohort.warnings.end());
  std::vector<BinDataset> data;
  for (const auto& b : cohort.bins) data.push_back(make_dataset(b, cfg.test_fraction, seed));

  const fs::path dir = cfg.run_dir / "cohort";
  write_members(dir / "members.jsonl", cohort.bins, data);
  write_documents(dir / "documents.jsonl", data);
  {
    auto o = open_out(dir / "log.txt");
    for (const auto& b : cohort.bins) {
      for (const auto& l : b.log) o << "bin " << b.bin << ": " << l << '\n';
    }
    for (const auto& w : warnings) o << "warning (line " << w.line << "): " << w.message << '\n';
  }
  for (const auto& c : cohort.counts) m.count(c.stage, c.in, c.out);
  for (const char* f : {"members.jsonl", "documents.jsonl", "log.txt"}) m.artifact(dir / f);
  m.write(dir);
  for (const auto& b : cohort.bins) std::cout << "cohort: bin " << b.bin << ": " << b.cases() << " matched pairs\n";
  return 0;
}

std::vector<BinDataset> load_cohort(const RunConfig& cfg, Manifest& m) {
  const fs::path p = cfg.run_dir / "cohort" / "documents.jsonl";
  auto data = read_documents(p);
  m.input(p);
  if (data.empty()) throw DataError("cohort has no documents: " + p.string());
  return data;
}

int cmd_stats(RunConfig& cfg) {
  auto m = manifest_for("stats", cfg);
  Resources res(cfg.paths);
  auto data = load_cohort(cfg, m);
  std::vector<BinStats> all;
  for (const auto& b : data) {
    BinStats s;
    s.bin = b.bin;
    std::vector<GroupedDocument> overall, by_sex, by_race;
    std::map<std::string, std::size_t> attr;
    std::size_t cases = 0;
    for (auto i : b.split.train) {
      std::string text = b.docs[i].text();
      overall.push_back({"all", text});
      by_sex.push_back({b.roster[i].attributes.at("sex"), text});
      by_race.push_back({b.roster[i].attributes.at("race"), text});
      for (const auto& [k, v] : b.roster[i].attributes) ++attr[k + "=" + v];
      cases += b.labels[i];
    }
    s.count = b.split.train.size();
    if (s.count) {
      s.case_pct = 100.0 * static_cast<double>(cases) / static_cast<double>(s.count);
      for (const auto& [k, n] : attr) s.attribute_pct[k] = 100.0 * static_cast<double>(n) / static_cast<double>(s.count);
    }
    auto lex = res.lexical();
    auto o = distribution_stats(overall, lex);
    if (!o.groups.empty()) s.overall = o.groups.front();
    s.by_sex = distribution_stats(by_sex, lex, {"F", "M"});
    s.by_race = distribution_stats(by_race, lex);
    all.push_back(std::move(s));
  }
  const fs::path dir = cfg.run_dir / "stats";
  write_stats_jsonl(dir / "stats.jsonl", all);
  auto table = format_stats_tables(all);
  open_out(dir / "stats.txt") << table;
  m.artifact(dir / "stats.jsonl");
  m.artifact(dir / "stats.txt");
  m.write(dir);
  std::cout << table;
  return 0;
}

ExperimentOptions experiment_options(const RunConfig& cfg, const Resources& res, const std::string& pipeline, std::uint64_t seed) {
  ExperimentOptions eo;
  eo.pipeline = parse_pipeline(pipeline);
  eo.fraction = cfg.debias_fraction;
  eo.features = cfg.features;
  eo.train = cfg.train;
  eo.gen_sub = res.gen_sub();
  eo.seed = seed;
  return eo;
}

int cmd_debias(RunConfig& cfg, const std::optional<std::string>& pipeline) {
  if (pipeline) cfg.debias_pipeline = *pipeline;
  auto m = manifest_for("debias", cfg);
  const std::uint64_t seed = cfg.require_seed("debias");
  Resources res(cfg.paths);
  auto data = load_cohort(cfg, m);
  auto steps = parse_pipeline(cfg.debias_pipeline);
  std::size_t before = 0, after = 0;
  for (auto& b : data) {
    std::vector<TokenList> train_tokens;
    for (auto i : b.split.train) train_tokens.push_back(tokenize(b.docs[i].text(), res.stopwords));
    auto tfidf = TfIdfModel::fit(train_tokens);
    DebiasContext ctx{&tfidf, &res.stopwords, res.gen_sub(), cfg.debias_fraction, seed};
    std::vector<Document> out(b.docs.size());
    parallel_for(b.docs.size(), [&](std::size_t i) { out[i] = compose(b.docs[i], steps, ctx); });
    for (std::size_t i = 0; i < out.size(); ++i) {
      before += word_count(b.docs[i].text());
      after += word_count(out[i].text());
    }
    b.docs = std::move(out);
  }
  const fs::path dir = cfg.run_dir / "debias";
  write_documents(dir / "documents.jsonl", data);
  m.count("words", before, after);
  m.note("pipeline", cfg.debias_pipeline);
  m.artifact(dir / "documents.jsonl");
  m.write(dir);
  std::cout << "debias [" << (cfg.debias_pipeline.empty() ? "identity" : cfg.debias_pipeline) << "]: " << before << " -> "
            << after << " words\n";
  return 0;
}

int cmd_train(RunConfig& cfg, const std::optional<std::string>& pipeline) {
  if (pipeline) cfg.debias_pipeline = *pipeline;
  auto m = manifest_for("train", cfg);
  const std::uint64_t seed = cfg.require_seed("train");
  Resources res(cfg.paths);
  auto data = load_cohort(cfg, m);
  const fs::path dir = cfg.run_dir / "train";
  fs::create_directories(dir);
  std::vector<PredictionRecord> preds;
  std::vector<BinDataset> seen;
  for (const auto& b : data) {
    auto r = run_experiment(b, experiment_options(cfg, res, cfg.debias_pipeline, derive_seed(seed, "bin/" + std::to_string(b.bin))), res.stopwords);
    const fs::path model = dir / ("model_bin" + std::to_string(b.bin) + ".txt");
    r.classifier.save(model);
    m.artifact(model);
    m.count("bin " + std::to_string(b.bin) + " train/test", b.split.train.size(), b.split.test.size());
    preds.insert(preds.end(), r.test_predictions.begin(), r.test_predictions.end());
    BinDataset t = b;
    t.docs = std::move(r.transformed);
    seen.push_back(std::move(t));
  }
  {
    auto o = open_out(dir / "predictions.jsonl");
    write_predictions(o, preds);
  }
  write_documents(dir / "documents.jsonl", seen);
  m.note("pipeline", cfg.debias_pipeline);
  m.artifact(dir / "predictions.jsonl");
  m.artifact(dir / "documents.jsonl");
  m.write(dir);
  std::cout << "train [" << (cfg.debias_pipeline.empty() ? "identity" : cfg.debias_pipeline) << "]: " << data.size()
            << " bin model(s), " << preds.size() << " test predictions\n";
  return 0;
}

int cmd_audit(RunConfig& cfg, const std::optional<fs::path>& external) {
  auto m = manifest_for("audit", cfg);
  std::vector<PredictionRecord> records;
  std::vector<IngestWarning> warnings;
  if (external) {
    require_input(*external);
    auto data = load_cohort(cfg, m);
    std::unordered_map<std::string, PredictionRecord> roster;
    for (const auto& b : data) {
      for (const auto& r : b.roster) roster.emplace(r.patient_id, r);
    }
    auto got = load_external_predictions(*external, roster);
    records = std::move(got.records);
    warnings = std::move(got.warnings);
    m.input(*external);
  } else {
    const fs::path p = cfg.run_dir / "train" / "predictions.jsonl";
    require_input(p);
    auto got = read_predictions(p);
    records = std::move(got.records);
    warnings = std::move(got.warnings);
    m.input(p);
  }
  if (records.empty()) throw DataError("no usable predictions to audit");
  std::map<int, std::vector<PredictionRecord>> by_bin;
  for (auto& r : records) by_bin[r.bin].push_back(r);
  std::vector<ParityReport> reports;
  for (auto& [bin, recs] : by_bin) reports.push_back(parity_report(recs, cfg.audit.attribute, cfg.audit.privileged, cfg.audit.parity));

  const fs::path dir = cfg.run_dir / "audit";
  {
    auto o = open_out(dir / "parity.jsonl");
    write_report_jsonl(o, reports);
    auto s = aggregate_gaps(reports);
    o << json{{"summary", true},
              {"bins", s.reports},
              {"mean_fnr_gap", s.mean_fnr_gap},
              {"mean_accuracy_gap", s.mean_accuracy_gap},
              {"mean_unc_gap", s.mean_unc_gap}}
             .dump()
      << '\n';
  }
  auto table = format_report_table(reports);
  open_out(dir / "parity.txt") << table;
  write_warnings(dir / "warnings.jsonl", external ? external->string() : "predictions", warnings);
  m.count("predictions", records.size() + warnings.size(), records.size());
  for (const char* f : {"parity.jsonl", "parity.txt", "warnings.jsonl"}) m.artifact(dir / f);
  m.write(dir);
  std::cout << table;
  return 0;
}

int cmd_explain(RunConfig& cfg) {
  auto m = manifest_for("explain", cfg);
  const std::uint64_t seed = cfg.require_seed("explain");
  Resources res(cfg.paths);
  const fs::path tdir = cfg.run_dir / "train";
  require_input(tdir / "predictions.jsonl");
  auto preds = read_predictions(tdir / "predictions.jsonl").records;
  auto docs = read_documents(tdir / "documents.jsonl");
  m.input(tdir / "predictions.jsonl");
  m.input(tdir / "documents.jsonl");
  auto biased = [names = res.detector, gender = res.gender()](std::string_view w) {
    return gender.is_pronoun(w) || names->in_dictionary(w);
  };
  std::vector<Explanation> all;
  const fs::path dir = cfg.run_dir / "explain";
  std::ostringstream table;
  for (const auto& b : docs) {
    const fs::path model = tdir / ("model_bin" + std::to_string(b.bin) + ".txt");
    require_input(model);
    auto clf = Classifier::load(model);
    m.input(model);
    std::unordered_map<std::string, std::string> texts;
    for (const auto& d : b.docs) texts.emplace(d.id, d.text());
    std::vector<PredictionRecord> recs;
    for (const auto& r : preds) {
      if (r.bin == b.bin) recs.push_back(r);
    }
    AuditOptions ao;
    ao.per_class_top = cfg.audit.per_class_top;
    ao.explain.k = cfg.audit.top_k;
    ao.explain.n_samples = cfg.audit.lime_samples;
    ao.explain.seed = derive_seed(seed, "explain/bin/" + std::to_string(b.bin));
    auto audit = audit_influential(recs, texts, classifier_predict_fn(clf), biased, ao);
    table << "Bin " << b.bin << '\n' << format_influence_table(audit) << '\n';
    all.insert(all.end(), audit.explanations.begin(), audit.explanations.end());
  }
  InfluenceAudit pooled;
  std::vector<Explanation> cases, controls;
  for (const auto& e : all) (e.predicted == Label::Case ? cases : controls).push_back(e);
  pooled.cases = collate_influence(Label::Case, cases, cfg.audit.per_class_top * docs.size(), biased);
  pooled.controls = collate_influence(Label::Control, controls, cfg.audit.per_class_top * docs.size(), biased);
  table << "All bins\n" << format_influence_table(pooled);
  {
    auto o = open_out(dir / "explanations.jsonl");
    write_explanations_jsonl(o, all);
  }
  open_out(dir / "influence.txt") << table.str();
  m.count("explanations", preds.size(), all.size());
  m.artifact(dir / "explanations.jsonl");
  m.artifact(dir / "influence.txt");
  m.write(dir);
  std::cout << table.str();
  return 0;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"fairtext: fairness audits and text de-biasing for clinical note classifiers"};
  app.require_subcommand(1);
  std::string config_path, run_dir;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  app.add_option("-c,--config", config_path, "JSON config (comments allowed)");
  app.add_option("--run-dir", run_dir, "Output directory (overrides FAIRTEXT_RUN_DIR and the config)");
  app.add_option("--seed", seed, "Run seed");
  app.add_option("--threads", threads, "Worker thread cap (0 = hardware)");
  app.fallthrough();

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus into <run-dir>/corpus");
  std::optional<std::string> preset;
  std::optional<std::size_t> n_patients;
  synth->add_option("--preset", preset, "Preset name")->check(CLI::IsMember(synth_preset_names()));
  synth->add_option("-n,--patients", n_patients, "Number of patients");
  app.add_subcommand("ingest", "Validate and summarise the corpus files");
  app.add_subcommand("cohort", "Match cases and controls per age bin and split pairs");
  app.add_subcommand("stats", "Text distribution statistics per bin and subgroup");
  std::optional<std::string> pipeline;
  auto* debias = app.add_subcommand("debias", "Apply the de-biasing pipeline to the cohort documents");
  debias->add_option("--pipeline", pipeline, "Transforms, e.g. tfidf_filt,gen_sub");
  auto* train = app.add_subcommand("train", "Train one classifier per bin and predict the test split");
  train->add_option("--pipeline", pipeline, "Transforms applied before training");
  auto* audit = app.add_subcommand("audit", "Classification parity report");
  std::optional<std::string> external, attribute, privileged;
  audit->add_option("--predictions", external, "External {patient_id, probability} file");
  audit->add_option("--attribute", attribute, "Grouping attribute");
  audit->add_option("--privileged", privileged, "Privileged attribute value");
  app.add_subcommand("explain", "LIME explanations of the most confident test predictions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? parse_config("{}") : load_config(config_path);
    if (const char* env = std::getenv("FAIRTEXT_RUN_DIR"); env && *env) cfg.run_dir = env;
    if (!run_dir.empty()) cfg.run_dir = run_dir;
    if (seed) cfg.seed = seed;
    set_thread_limit(threads);
    if (preset) {
      auto s = cfg.synth.seed;
      cfg.synth = synth_preset(*preset);
      cfg.synth.seed = s;
    }
    if (n_patients) cfg.synth.n_patients = *n_patients;
    if (attribute) cfg.audit.attribute = *attribute;
    if (privileged) cfg.audit.privileged = *privileged;

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "synth") return cmd_synth(cfg);
    if (cmd == "ingest") return cmd_ingest(cfg);
    if (cmd == "cohort") return cmd_cohort(cfg);
    if (cmd == "stats") return cmd_stats(cfg);
    if (cmd == "debias") return cmd_debias(cfg, pipeline);
    if (cmd == "train") return cmd_train(cfg, pipeline);
    if (cmd == "audit") return cmd_audit(cfg, external ? std::optional<fs::path>(*external) : std::nullopt);
    if (cmd == "explain") return cmd_explain(cfg);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace fairtext::cli
