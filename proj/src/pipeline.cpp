#include "fairtext/pipeline.hpp"

#include <algorithm>

#include "fairtext/util.hpp"

namespace fairtext {

CohortResult build_cohort(const CorpusData& corpus, const CodeSet& codes, const CohortOptions& options,
                          const StopwordSet& stopwords, bool require_all_bins) {
  CohortResult res;
  auto typed = filter_note_types(corpus.notes, options.note_types);
  res.counts.push_back({"note_type_filter", corpus.notes.size(), typed.size()});

  auto timelines = build_timelines(corpus.patients, typed, &res.warnings);
  std::size_t before = 0, after = 0;
  for (const auto& t : timelines) before += t.notes.size();
  std::vector<PatientTimeline> clean(timelines.size());
  if (options.dedup_global) {
    clean = dedup_notes_global(timelines, options.dedup_threshold, stopwords);
  } else {
    parallel_for(timelines.size(), [&](std::size_t i) {
      clean[i] = dedup_notes(timelines[i], options.dedup_threshold, stopwords);
    });
  }
  for (const auto& t : clean) after += t.notes.size();
  res.counts.push_back({"dedup", before, after});

  auto index = CohortIndex::build(corpus.patients, corpus.notes, corpus.diagnoses, codes, &res.warnings);
  auto cases = find_cases(index, options.criteria, &res.warnings);
  res.counts.push_back({"find_cases", corpus.patients.size(), cases.size()});

  BinOptions bo;
  bo.criteria = options.criteria;
  bo.recent_k = options.recent_k;
  bo.seed = options.seed;
  bo.allow_empty_bins = !require_all_bins;
  for (auto& b : build_bins(clean, index, cases, options.bins, bo)) {
    if (b.members.empty()) {
      res.warnings.push_back({0, "age bin " + std::to_string(b.bin) + " is empty after matching; skipped"});
      continue;
    }
    res.bins.push_back(std::move(b));
  }
  if (res.bins.empty()) throw DataError("every requested age bin is empty after matching");
  for (const auto& b : res.bins) res.counts.push_back({"bin " + std::to_string(b.bin), b.cases(), b.members.size()});
  return res;
}

BinDataset make_dataset(const CohortBin& bin, double test_fraction, std::uint64_t seed) {
  BinDataset d;
  d.bin = bin.bin;
  for (const auto& m : bin.members) {
    Document doc;
    doc.id = m.timeline.patient.patient_id;
    for (const auto& n : m.timeline.notes) {
      if (!trim(n.text).empty()) doc.notes.push_back(n.text);
    }
    d.docs.push_back(std::move(doc));
    d.labels.push_back(m.label == Label::Case ? 1 : 0);
    PredictionRecord r;
    r.patient_id = m.timeline.patient.patient_id;
    r.true_label = m.label;
    r.bin = bin.bin;
    r.attributes["sex"] = std::string(to_string(m.timeline.patient.sex));
    r.attributes["race"] = m.timeline.patient.race;
    d.roster.push_back(std::move(r));
  }
  d.split = split_pairs(bin, test_fraction, seed);
  return d;
}

ExperimentResult run_experiment(const BinDataset& data, const ExperimentOptions& options, const StopwordSet& stopwords) {
  ExperimentResult res;
  std::vector<TokenList> train_tokens(data.split.train.size());
  parallel_for(train_tokens.size(), [&](std::size_t i) {
    train_tokens[i] = tokenize(data.docs[data.split.train[i]].text(), stopwords);
  });
  res.tfidf = TfIdfModel::fit(train_tokens);

  DebiasContext ctx;
  ctx.model = &res.tfidf;
  ctx.stopwords = &stopwords;
  ctx.gen_sub = options.gen_sub;
  ctx.fraction = options.fraction;
  ctx.seed = options.seed;
  res.transformed.resize(data.docs.size());
  parallel_for(data.docs.size(), [&](std::size_t i) { res.transformed[i] = compose(data.docs[i], options.pipeline, ctx); });

  std::vector<std::string> train_texts, test_texts;
  std::vector<int> train_labels;
  for (auto i : data.split.train) {
    train_texts.push_back(res.transformed[i].text());
    train_labels.push_back(data.labels[i]);
  }
  TrainOptions to = options.train;
  to.seed = options.seed;
  res.classifier = fit_classifier(train_texts, train_labels, stopwords, options.features, to);

  res.test_predictions.resize(data.split.test.size());
  parallel_for(data.split.test.size(), [&](std::size_t k) {
    std::size_t i = data.split.test[k];
    PredictionRecord r = data.roster[i];
    r.probability = res.classifier.predict_proba(res.transformed[i].text());
    res.test_predictions[k] = std::move(r);
  });
  return res;
}

}  // namespace fairtext
