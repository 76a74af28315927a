#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "triage/grid.h"
#include "triage/ingestion.h"
#include "triage/topic_model.h"

namespace triage {

inline constexpr double kMinScoreHours = 1e-6;
inline constexpr double kDefaultPenaltyFactor = 1.5;

// How cells without history are filled. A developer with no reports in topic
// t gets penalty_factor times the largest supported score in t; when nobody
// has worked on t, penalty_factor times the mean of that developer's own
// supported scores.
struct FallbackPolicy {
  double penalty_factor = kDefaultPenaltyFactor;
};

// Expected fixing hours per developer and topic.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::vector<std::string> developers, int num_topics, Grid<double> scores,
              Grid<int> support);

  const std::vector<std::string>& developers() const { return developers_; }
  int num_topics() const { return num_topics_; }
  const Grid<double>& scores() const { return scores_; }
  const Grid<int>& support() const { return support_; }

  // Row index of `developer`; throws kInvalidArgument if unknown.
  std::size_t DeveloperIndex(std::string_view developer) const;

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

 private:
  std::vector<std::string> developers_;
  int num_topics_ = 0;
  Grid<double> scores_;
  Grid<int> support_;
};

// Mean effective fixing hours per (assignee, topic) cell over the training
// reports, `labels[i]` being the topic of `reports[i]`. Rows follow
// `developers`; reports by developers outside that list are ignored. Means of
// zero are clamped to kMinScoreHours.
ScoreMatrix BuildScoreMatrix(std::span<const BugReport> reports,
                             std::span<const TopicLabel> labels,
                             std::span<const std::string> developers, int num_topics,
                             const FallbackPolicy& fallback = {});

// Throws kInvalidArgument for an unknown developer or topic outside [0, K).
double PredictedHours(const ScoreMatrix& matrix, std::string_view developer, int topic);
double PredictedHours(const ScoreMatrix& matrix, std::size_t developer_index, int topic);

// Audit exports: header "developer,topic_0,...,topic_{K-1}", one row per
// developer.
void WriteScoresCsv(const ScoreMatrix& matrix, std::ostream& out);
void WriteSupportCsv(const ScoreMatrix& matrix, std::ostream& out);

}  // namespace triage
