#include "triage/evaluation.h"

#include <gtest/gtest.h>

#include <map>

#include "support/synthetic.h"
#include "triage/errors.h"

namespace triage {
namespace {

using testing::GenerateStream;
using testing::QuickPipeline;

Dataset Stream(const testing::StreamSpec& spec) {
  const auto reports = GenerateStream(spec);
  return FilterAndOrder(reports, 1);
}

TEST(MakeFoldsTest, HundredRecords) {
  const auto folds = MakeFolds(100);
  ASSERT_EQ(folds.size(), 9u);
  EXPECT_EQ(folds[0], (FoldSpec{1, {0, 10}, {10, 20}}));
  EXPECT_EQ(folds[8], (FoldSpec{9, {0, 90}, {90, 100}}));
  for (const auto& f : folds) {
    EXPECT_EQ(f.train.end, f.test.begin);
    EXPECT_EQ(f.test.size(), 10u);
  }
}

TEST(MakeFoldsTest, MinimumAndRemainder) {
  const auto small = MakeFolds(20);
  EXPECT_EQ(small[0], (FoldSpec{1, {0, 2}, {2, 4}}));
  EXPECT_EQ(small[8].test, (IndexRange{18, 20}));
  EXPECT_EQ(MakeFolds(105)[8].test, (IndexRange{90, 100}));
  try {
    MakeFolds(10);
    FAIL();
  } catch (const TriageError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyData);
  }
}

TEST(TimeReductionPctTest, Arithmetic) {
  EXPECT_DOUBLE_EQ(TimeReductionPct(100.0, 60.0), 40.0);
  EXPECT_DOUBLE_EQ(TimeReductionPct(50.0, 75.0), -50.0);
  EXPECT_THROW(TimeReductionPct(0.0, 1.0), TriageError);
}

TEST(SummarizeTest, MeanAndSpread) {
  std::vector<FoldReport> folds(3);
  const double reductions[] = {10, 20, 30};
  for (int i = 0; i < 3; ++i) {
    folds[i].time_reduction_pct = reductions[i];
    folds[i].optimized_load = {i, i + 1, 0.0};
    folds[i].real_load = {0, 4 * i, 0.0};
  }
  const EvaluationSummary s = Summarize(folds, 1);
  EXPECT_DOUBLE_EQ(s.mean_time_reduction_pct, 20.0);
  EXPECT_EQ(s.completed_folds, 3u);
  EXPECT_EQ(s.failed_folds, 1u);
  EXPECT_EQ(s.worst_load_spread, 1);
  EXPECT_EQ(s.worst_real_load_spread, 8);
}

TEST(SummarizeLoadTest, Stats) {
  const LoadStats s = SummarizeLoad({{"a", 3}, {"b", 1}, {"c", 2}});
  EXPECT_EQ(s.min, 1);
  EXPECT_EQ(s.max, 3);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
}

TEST(RunFoldTest, OptimalHistoryGivesZeroReduction) {
  const Dataset ds = Stream(testing::OptimalStream(300, 3));
  const FoldReport report = RunFold(ds, MakeFolds(ds.reports.size())[0], QuickPipeline());
  EXPECT_NEAR(report.time_reduction_pct, 0.0, 1e-6);
  EXPECT_EQ(report.developer_count, 3u);
  EXPECT_EQ(report.batches, 10);
}

TEST(RunFoldTest, SlowestHistoryGivesPositiveReduction) {
  const Dataset ds = Stream(testing::SlowestStream(400, 11));
  const auto folds = MakeFolds(ds.reports.size());
  const FoldReport report = RunFold(ds, folds[2], QuickPipeline());
  EXPECT_GT(report.time_reduction_pct, 0.0);
  EXPECT_LE(report.time_reduction_pct, 100.0);
  EXPECT_LE(report.optimized_load.max - report.optimized_load.min, 1);
  EXPECT_EQ(report.test_size, 40u);
  EXPECT_EQ(report.batches, 10);
}

TEST(RunFoldTest, TestSliceDoesNotReachTraining) {
  const Dataset ds = Stream(testing::SlowestStream(200, 5));
  const FoldSpec fold = MakeFolds(ds.reports.size())[3];
  const PipelineConfig config = QuickPipeline();
  const FoldReport base = RunFold(ds, fold, config);

  Dataset altered = ds;
  for (std::size_t i = fold.test.begin; i < fold.test.end; ++i) {
    auto& r = altered.reports[i];
    r.description = "socket packet proxy router handshake cipher vault " + r.description;
    r.time_spent_hours = 99.0;
    r.assignee = "mallory";
  }
  const FoldReport changed = RunFold(altered, fold, config);
  EXPECT_EQ(base.model_fingerprint, changed.model_fingerprint);

  const std::span<const BugReport> train(ds.reports.data(), fold.train.end);
  EXPECT_EQ(Fingerprint(TrainPipeline(train, config)), base.model_fingerprint);
}

TEST(RunFoldTest, InvariantUnderDeveloperRenaming) {
  const Dataset ds = Stream(testing::SlowestStream(200, 9));
  const FoldSpec fold = MakeFolds(ds.reports.size())[4];
  std::vector<BugReport> renamed = ds.reports;
  for (auto& r : renamed) r.assignee = "zz-" + std::string(r.assignee.rbegin(), r.assignee.rend());
  const Dataset other = FilterAndOrder(renamed, 1);
  const FoldReport a = RunFold(ds, fold, QuickPipeline());
  const FoldReport b = RunFold(other, fold, QuickPipeline());
  EXPECT_NEAR(a.time_reduction_pct, b.time_reduction_pct, 1e-9);
}

TEST(RunFoldTest, InvariantUnderTimeScaling) {
  const Dataset ds = Stream(testing::SlowestStream(200, 13));
  const FoldSpec fold = MakeFolds(ds.reports.size())[5];
  Dataset scaled = ds;
  for (auto& r : scaled.reports) *r.time_spent_hours *= 3.5;
  const FoldReport a = RunFold(ds, fold, QuickPipeline());
  const FoldReport b = RunFold(scaled, fold, QuickPipeline());
  EXPECT_NEAR(a.time_reduction_pct, b.time_reduction_pct, 1e-9);
  EXPECT_NEAR(b.real_total_hours, 3.5 * a.real_total_hours, 1e-9 * b.real_total_hours);
}

TEST(RunFoldTest, NoEligibleDevelopersIsDiagnosed) {
  const Dataset ds = Stream(testing::SlowestStream(100, 2));
  PipelineConfig config = QuickPipeline();
  config.min_fixes = 50;
  try {
    RunFold(ds, MakeFolds(ds.reports.size())[0], config);
    FAIL();
  } catch (const TriageError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyData);
    EXPECT_NE(std::string(e.what()).find("no developer"), std::string::npos);
  }
}

TEST(RunAllTest, NineFoldsOnHundredRecords) {
  const Dataset ds = Stream(testing::SlowestStream(100, 21));
  PipelineConfig config = QuickPipeline();
  config.min_fixes = 2;
  const EvaluationResult result = RunAll(ds, config);
  ASSERT_EQ(result.folds.size(), 9u) << (result.failures.empty() ? ""
                                                                  : result.failures[0].message);
  double total = 0.0;
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(result.folds[i].fold_index, static_cast<int>(i) + 1);
    total += result.folds[i].time_reduction_pct;
  }
  EXPECT_DOUBLE_EQ(result.summary.mean_time_reduction_pct, total / 9.0);
  EXPECT_LE(result.summary.worst_load_spread, 1);
}

TEST(RunAllTest, ThreadCountDoesNotChangeResults) {
  const Dataset ds = Stream(testing::SlowestStream(120, 4));
  PipelineConfig config = QuickPipeline();
  const EvaluationResult serial = RunAll(ds, config);
  config.threads = 4;
  const EvaluationResult parallel = RunAll(ds, config);
  ASSERT_EQ(serial.folds.size(), parallel.folds.size());
  for (std::size_t i = 0; i < serial.folds.size(); ++i) {
    EXPECT_EQ(serial.folds[i].fold_index, parallel.folds[i].fold_index);
    EXPECT_EQ(serial.folds[i].model_fingerprint, parallel.folds[i].model_fingerprint);
    EXPECT_EQ(serial.folds[i].time_reduction_pct, parallel.folds[i].time_reduction_pct);
  }
}

TEST(RunAllTest, FoldErrorsAreCollected) {
  const Dataset ds = Stream(testing::SlowestStream(100, 2));
  PipelineConfig config = QuickPipeline();
  config.min_fixes = 12;
  const EvaluationResult result = RunAll(ds, config);
  EXPECT_FALSE(result.failures.empty());
  EXPECT_EQ(result.folds.size() + result.failures.size(), 9u);
  EXPECT_EQ(result.failures[0].fold_index, 1);
  EXPECT_EQ(result.summary.failed_folds, result.failures.size());
}

TEST(PipelineConfigTest, Validation) {
  PipelineConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.k_min = 0;
  EXPECT_THROW(c.Validate(), TriageError);
  c = PipelineConfig{};
  c.threads = 0;
  EXPECT_THROW(c.Validate(), TriageError);
  c = PipelineConfig{};
  c.lda.beta = -1;
  EXPECT_THROW(c.Validate(), TriageError);
}

}  // namespace
}  // namespace triage
