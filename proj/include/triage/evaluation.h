#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "triage/assignment.h"
#include "triage/errors.h"
#include "triage/ingestion.h"
#include "triage/scoring.h"
#include "triage/text_pipeline.h"
#include "triage/topic_model.h"

namespace triage {

struct PipelineConfig {
  int min_fixes = kDefaultMinFixes;
  Stoplist stoplist = DefaultStoplist();
  int min_df = kDefaultMinDf;
  int k_min = kDefaultMinTopics;
  int k_max = kDefaultMaxTopics;
  // num_topics is overwritten by the topic-count search.
  LdaConfig lda;
  int coherence_top_n = kDefaultCoherenceTopN;
  int fold_in_sweeps = kDefaultFoldInSweeps;
  FallbackPolicy fallback;
  // Folds solved concurrently by RunAll; results do not depend on it.
  int threads = 1;

  void Validate() const;
};

// Everything learned from one training slice.
struct TrainedPipeline {
  std::vector<std::string> developers;
  Vocabulary vocabulary;
  TopicModel model;
  std::vector<TopicCountScore> coherence;
  ScoreMatrix scores;
  // Per retained training report, in chronological order.
  std::vector<TopicLabel> train_labels;
  std::size_t train_reports = 0;
};

// Filters the slice by min_fixes, builds the corpus, picks K by coherence,
// fits LDA on the nonempty documents and scores developers. Throws kEmptyData
// with a diagnostic when the slice leaves no developers or no vocabulary.
TrainedPipeline TrainPipeline(std::span<const BugReport> train,
                              const PipelineConfig& config);

// Topic labels for unseen reports by fold-in against the trained model.
std::vector<LabeledBug> LabelNewReports(const TrainedPipeline& trained,
                                        std::span<const BugReport> reports,
                                        const PipelineConfig& config);

// Stable hash of the learned artifacts (vocabulary, K, topic-word counts,
// scores). Identical training data and config give identical fingerprints.
std::uint64_t Fingerprint(const TrainedPipeline& trained);

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct FoldSpec {
  int fold_index = 0;  // 1..9
  IndexRange train;
  IndexRange test;
  friend bool operator==(const FoldSpec&, const FoldSpec&) = default;
};

inline constexpr std::size_t kMinEvaluationRecords = 20;
inline constexpr int kFoldCount = 9;

// Rolling origin with slice s = floor(N / 10): fold k trains on [0, k*s) and
// tests on [k*s, (k+1)*s). Records past 10*s are not used. Throws
// kEmptyData when N < 20.
std::vector<FoldSpec> MakeFolds(std::size_t dataset_size);

struct LoadStats {
  int min = 0;
  int max = 0;
  double mean = 0.0;
};

// Summary of per-developer counts.
LoadStats SummarizeLoad(const std::map<std::string, int>& load);

struct FoldReport {
  int fold_index = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  int selected_topics = 0;
  std::vector<TopicCountScore> coherence;
  std::size_t developer_count = 0;
  int batches = 0;
  double real_total_hours = 0.0;
  double predicted_total_hours = 0.0;
  double time_reduction_pct = 0.0;
  LoadStats optimized_load;
  LoadStats real_load;
  std::uint64_t model_fingerprint = 0;
};

// 100 * (real - predicted) / real. Throws kEmptyData when real is zero.
double TimeReductionPct(double real_total_hours, double predicted_total_hours);

// Trains on fold.train, assigns fold.test and compares with ground truth.
// Real load counts ground-truth assignments of the test slice over the
// eligible developers plus any other test assignee.
FoldReport RunFold(const Dataset& dataset, const FoldSpec& fold,
                   const PipelineConfig& config);

struct FoldFailure {
  int fold_index = 0;
  ErrorKind kind = ErrorKind::kInvariant;
  std::string message;
};

struct EvaluationSummary {
  std::size_t completed_folds = 0;
  std::size_t failed_folds = 0;
  double mean_time_reduction_pct = 0.0;
  // Largest max-min optimized load over completed folds.
  int worst_load_spread = 0;
  int worst_real_load_spread = 0;
};

struct EvaluationResult {
  std::vector<FoldReport> folds;  // by fold_index
  std::vector<FoldFailure> failures;
  EvaluationSummary summary;
};

EvaluationSummary Summarize(std::span<const FoldReport> folds, std::size_t failures);

// All nine folds. Fold errors are collected rather than thrown; only an
// undersized dataset throws.
EvaluationResult RunAll(const Dataset& dataset, const PipelineConfig& config);

}  // namespace triage
