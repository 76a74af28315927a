#include "triage/evaluation.h"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <set>
#include <thread>

#include "triage/hash.h"

namespace triage {

void PipelineConfig::Validate() const {
  const auto bad = [](const std::string& what) {
    throw TriageError(ErrorKind::kInvalidArgument, "config: " + what);
  };
  if (min_fixes < 1) bad("min_fixes must be >= 1");
  if (min_df < 1) bad("min_df must be >= 1");
  if (k_min < 1 || k_max < k_min) bad("need 1 <= k_min <= k_max");
  if (coherence_top_n < 2) bad("coherence_top_n must be >= 2");
  if (fold_in_sweeps < 1) bad("fold_in_sweeps must be >= 1");
  if (!(fallback.penalty_factor > 0.0)) bad("penalty_factor must be > 0");
  if (threads < 1) bad("threads must be >= 1");
  LdaConfig probe = lda;
  probe.num_topics = k_min;
  probe.Validate();
}

TrainedPipeline TrainPipeline(std::span<const BugReport> train,
                              const PipelineConfig& config) {
  config.Validate();
  Dataset dataset;
  try {
    dataset = FilterAndOrder(train, config.min_fixes);
  } catch (const TriageError& e) {
    if (e.kind() != ErrorKind::kEmptyData) throw;
    throw TriageError(ErrorKind::kEmptyData,
                      "training slice of " + std::to_string(train.size()) +
                          " reports has no developer with >= " +
                          std::to_string(config.min_fixes) + " fixes");
  }

  Corpus corpus = BuildCorpus(dataset, config.stoplist, config.min_df);
  std::vector<TokenizedDocument> fit_docs;
  fit_docs.reserve(corpus.documents.size());
  for (const auto& doc : corpus.documents) {
    if (!doc.tokens.empty()) fit_docs.push_back(doc);
  }

  TopicSelection selection =
      SelectTopicCount(fit_docs, corpus.vocabulary.size(), config.k_min, config.k_max,
                       config.lda, config.coherence_top_n);

  TrainedPipeline trained;
  trained.train_reports = dataset.reports.size();
  trained.train_labels =
      LabelDocuments(selection.best_model, corpus.documents, config.fold_in_sweeps);
  trained.scores = BuildScoreMatrix(dataset.reports, trained.train_labels,
                                    dataset.developers, selection.best_num_topics,
                                    config.fallback);
  trained.developers = std::move(dataset.developers);
  trained.vocabulary = std::move(corpus.vocabulary);
  trained.model = std::move(selection.best_model);
  trained.coherence = std::move(selection.scores);
  return trained;
}

std::vector<LabeledBug> LabelNewReports(const TrainedPipeline& trained,
                                        std::span<const BugReport> reports,
                                        const PipelineConfig& config) {
  std::vector<TokenizedDocument> docs;
  docs.reserve(reports.size());
  for (const auto& r : reports) {
    docs.push_back(EncodeDocument(trained.vocabulary, r.id, r.description, config.stoplist));
  }
  // Held-out documents must not pick up a training theta row by id.
  TopicModel heldout_view;
  heldout_view.config = trained.model.config;
  heldout_view.vocabulary_size = trained.model.vocabulary_size;
  heldout_view.topic_word_counts = trained.model.topic_word_counts;
  heldout_view.topic_totals = trained.model.topic_totals;

  std::vector<LabeledBug> bugs;
  bugs.reserve(reports.size());
  for (const auto& label : LabelDocuments(heldout_view, docs, config.fold_in_sweeps)) {
    bugs.push_back({label.bug_id, label.topic});
  }
  return bugs;
}

std::uint64_t Fingerprint(const TrainedPipeline& trained) {
  std::uint64_t h = Fnv1aValue(trained.vocabulary.Hash(), kFnvOffset);
  h = Fnv1aValue(trained.model.num_topics(), h);
  for (const int c : trained.model.topic_word_counts.data()) h = Fnv1aValue(c, h);
  for (const auto& dev : trained.developers) h = Fnv1a(dev, Fnv1a("\n", h));
  for (const double s : trained.scores.scores().data()) h = Fnv1aValue(s, h);
  for (const auto& c : trained.coherence) h = Fnv1aValue(c.coherence, h);
  return h;
}

std::vector<FoldSpec> MakeFolds(std::size_t dataset_size) {
  if (dataset_size < kMinEvaluationRecords) {
    throw TriageError(ErrorKind::kEmptyData,
                      "dataset too small for evaluation: " + std::to_string(dataset_size) +
                          " records, need >= " + std::to_string(kMinEvaluationRecords));
  }
  const std::size_t s = dataset_size / 10;
  std::vector<FoldSpec> folds;
  for (int k = 1; k <= kFoldCount; ++k) {
    const std::size_t edge = static_cast<std::size_t>(k) * s;
    folds.push_back({k, {0, edge}, {edge, edge + s}});
  }
  return folds;
}

LoadStats SummarizeLoad(const std::map<std::string, int>& load) {
  LoadStats stats;
  if (load.empty()) return stats;
  stats.min = load.begin()->second;
  stats.max = stats.min;
  double total = 0.0;
  for (const auto& [dev, count] : load) {
    stats.min = std::min(stats.min, count);
    stats.max = std::max(stats.max, count);
    total += count;
  }
  stats.mean = total / static_cast<double>(load.size());
  return stats;
}

double TimeReductionPct(double real_total_hours, double predicted_total_hours) {
  if (real_total_hours <= 0.0) {
    throw TriageError(ErrorKind::kEmptyData, "test slice has zero real fixing time");
  }
  return 100.0 * (real_total_hours - predicted_total_hours) / real_total_hours;
}

FoldReport RunFold(const Dataset& dataset, const FoldSpec& fold,
                   const PipelineConfig& config) {
  if (fold.train.begin != 0 || fold.train.end != fold.test.begin ||
      fold.test.end > dataset.reports.size() || fold.test.size() == 0 ||
      fold.train.size() == 0) {
    throw TriageError(ErrorKind::kInvalidArgument,
                      "fold " + std::to_string(fold.fold_index) + " does not fit the dataset");
  }
  const std::span<const BugReport> all(dataset.reports);
  const auto train = all.subspan(fold.train.begin, fold.train.size());
  const auto test = all.subspan(fold.test.begin, fold.test.size());

  const TrainedPipeline trained = TrainPipeline(train, config);
  const std::vector<LabeledBug> bugs = LabelNewReports(trained, test, config);
  const AssignmentPlan plan = IterativeAssign(bugs, trained.developers, trained.scores);

  FoldReport report;
  report.fold_index = fold.fold_index;
  report.train_size = train.size();
  report.test_size = test.size();
  report.selected_topics = trained.model.num_topics();
  report.coherence = trained.coherence;
  report.developer_count = trained.developers.size();
  report.batches = plan.batches;
  for (const auto& r : test) report.real_total_hours += EffectiveFixingHours(r);
  report.predicted_total_hours = plan.PredictedTotalHours();
  report.time_reduction_pct =
      TimeReductionPct(report.real_total_hours, report.predicted_total_hours);
  report.optimized_load = SummarizeLoad(plan.load);

  std::map<std::string, int> real_load;
  for (const auto& dev : trained.developers) real_load.emplace(dev, 0);
  for (const auto& r : test) ++real_load[r.assignee];
  report.real_load = SummarizeLoad(real_load);
  report.model_fingerprint = Fingerprint(trained);
  return report;
}

EvaluationSummary Summarize(std::span<const FoldReport> folds, std::size_t failures) {
  EvaluationSummary summary;
  summary.completed_folds = folds.size();
  summary.failed_folds = failures;
  double total = 0.0;
  for (const auto& f : folds) {
    total += f.time_reduction_pct;
    summary.worst_load_spread =
        std::max(summary.worst_load_spread, f.optimized_load.max - f.optimized_load.min);
    summary.worst_real_load_spread =
        std::max(summary.worst_real_load_spread, f.real_load.max - f.real_load.min);
  }
  if (!folds.empty()) summary.mean_time_reduction_pct = total / folds.size();
  return summary;
}

EvaluationResult RunAll(const Dataset& dataset, const PipelineConfig& config) {
  config.Validate();
  const std::vector<FoldSpec> folds = MakeFolds(dataset.reports.size());

  struct Outcome {
    std::optional<FoldReport> report;
    std::optional<FoldFailure> failure;
  };
  std::vector<Outcome> outcomes(folds.size());
  const auto run_one = [&](std::size_t i) {
    try {
      outcomes[i].report = RunFold(dataset, folds[i], config);
    } catch (const TriageError& e) {
      outcomes[i].failure = FoldFailure{folds[i].fold_index, e.kind(), e.what()};
    } catch (const std::exception& e) {
      outcomes[i].failure = FoldFailure{folds[i].fold_index, ErrorKind::kInvariant, e.what()};
    }
  };

  const auto workers = std::min<std::size_t>(config.threads, folds.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < folds.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < folds.size(); i = next++) run_one(i);
      });
    }
  }

  EvaluationResult result;
  for (auto& o : outcomes) {
    if (o.report) result.folds.push_back(std::move(*o.report));
    if (o.failure) result.failures.push_back(std::move(*o.failure));
  }
  result.summary = Summarize(result.folds, result.failures.size());
  return result;
}

}  // namespace triage
