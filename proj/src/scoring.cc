#include "triage/scoring.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <unordered_map>

#include "triage/errors.h"

namespace triage {
namespace {

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string CsvQuote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

template <typename T>
void WriteGridCsv(const ScoreMatrix& matrix, const Grid<T>& grid, std::ostream& out) {
  out << "developer";
  for (int t = 0; t < matrix.num_topics(); ++t) out << ",topic_" << t;
  out << '\n';
  for (std::size_t d = 0; d < matrix.developers().size(); ++d) {
    out << CsvQuote(matrix.developers()[d]);
    for (int t = 0; t < matrix.num_topics(); ++t) {
      if constexpr (std::is_floating_point_v<T>) {
        out << ',' << FormatDouble(grid(d, t));
      } else {
        out << ',' << grid(d, t);
      }
    }
    out << '\n';
  }
}

}  // namespace

ScoreMatrix::ScoreMatrix(std::vector<std::string> developers, int num_topics,
                         Grid<double> scores, Grid<int> support)
    : developers_(std::move(developers)),
      num_topics_(num_topics),
      scores_(std::move(scores)),
      support_(std::move(support)) {
  if (num_topics_ < 1) {
    throw TriageError(ErrorKind::kInvalidArgument, "score matrix: K must be >= 1");
  }
  const auto K = static_cast<std::size_t>(num_topics_);
  if (scores_.rows() != developers_.size() || scores_.cols() != K ||
      support_.rows() != developers_.size() || support_.cols() != K) {
    throw TriageError(ErrorKind::kInvalidArgument, "score matrix: shape mismatch");
  }
  for (const double s : scores_.data()) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw TriageError(ErrorKind::kInvalidArgument,
                        "score matrix: scores must be positive and finite");
    }
  }
}

std::size_t ScoreMatrix::DeveloperIndex(std::string_view developer) const {
  const auto it = std::find(developers_.begin(), developers_.end(), developer);
  if (it == developers_.end()) {
    throw TriageError(ErrorKind::kInvalidArgument,
                      "unknown developer '" + std::string(developer) + "'");
  }
  return static_cast<std::size_t>(it - developers_.begin());
}

ScoreMatrix BuildScoreMatrix(std::span<const BugReport> reports,
                             std::span<const TopicLabel> labels,
                             std::span<const std::string> developers, int num_topics,
                             const FallbackPolicy& fallback) {
  if (reports.empty()) {
    throw TriageError(ErrorKind::kEmptyData, "scoring: empty training slice");
  }
  if (developers.empty()) {
    throw TriageError(ErrorKind::kEmptyData, "scoring: no developers");
  }
  if (labels.size() != reports.size()) {
    throw TriageError(ErrorKind::kInvalidArgument,
                      "scoring: one topic label per report required");
  }
  if (num_topics < 1) {
    throw TriageError(ErrorKind::kInvalidArgument, "scoring: K must be >= 1");
  }
  if (!(fallback.penalty_factor > 0.0) || !std::isfinite(fallback.penalty_factor)) {
    throw TriageError(ErrorKind::kInvalidArgument, "scoring: penalty_factor must be > 0");
  }

  const std::size_t D = developers.size();
  const auto K = static_cast<std::size_t>(num_topics);
  std::unordered_map<std::string_view, std::size_t> row_of;
  for (std::size_t d = 0; d < D; ++d) {
    if (!row_of.emplace(developers[d], d).second) {
      throw TriageError(ErrorKind::kInvalidArgument,
                        "scoring: duplicate developer '" + developers[d] + "'");
    }
  }

  Grid<double> sums(D, K, 0.0);
  Grid<int> support(D, K, 0);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto it = row_of.find(reports[i].assignee);
    if (it == row_of.end()) continue;
    const int t = labels[i].topic;
    if (t < 0 || static_cast<std::size_t>(t) >= K) {
      throw TriageError(ErrorKind::kInvalidArgument, "scoring: topic label out of range");
    }
    sums(it->second, t) += EffectiveFixingHours(reports[i]);
    ++support(it->second, t);
  }

  Grid<double> scores(D, K, 0.0);
  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t t = 0; t < K; ++t) {
      if (support(d, t) > 0) {
        scores(d, t) = std::max(sums(d, t) / support(d, t), kMinScoreHours);
      }
    }
  }

  std::vector<double> topic_max(K, 0.0);
  std::vector<bool> topic_seen(K, false);
  std::vector<double> dev_mean(D, 0.0);
  for (std::size_t d = 0; d < D; ++d) {
    int supported = 0;
    for (std::size_t t = 0; t < K; ++t) {
      if (support(d, t) == 0) continue;
      topic_max[t] = topic_seen[t] ? std::max(topic_max[t], scores(d, t)) : scores(d, t);
      topic_seen[t] = true;
      dev_mean[d] += scores(d, t);
      ++supported;
    }
    if (supported > 0) dev_mean[d] /= supported;
  }

  for (std::size_t d = 0; d < D; ++d) {
    for (std::size_t t = 0; t < K; ++t) {
      if (support(d, t) > 0) continue;
      double base = topic_seen[t] ? topic_max[t] : dev_mean[d];
      if (base == 0.0) {
        // Developer without any training history and a topic nobody has
        // worked on: fall back to the largest score in the matrix.
        for (std::size_t e = 0; e < D; ++e) base = std::max(base, dev_mean[e]);
      }
      scores(d, t) = std::max(fallback.penalty_factor * base, kMinScoreHours);
    }
  }

  return ScoreMatrix(std::vector<std::string>(developers.begin(), developers.end()),
                     num_topics, std::move(scores), std::move(support));
}

double PredictedHours(const ScoreMatrix& matrix, std::size_t developer_index, int topic) {
  if (developer_index >= matrix.developers().size()) {
    throw TriageError(ErrorKind::kInvalidArgument, "developer index out of range");
  }
  if (topic < 0 || topic >= matrix.num_topics()) {
    throw TriageError(ErrorKind::kInvalidArgument,
                      "topic " + std::to_string(topic) + " out of range [0, " +
                          std::to_string(matrix.num_topics()) + ")");
  }
  return matrix.scores()(developer_index, topic);
}

double PredictedHours(const ScoreMatrix& matrix, std::string_view developer, int topic) {
  return PredictedHours(matrix, matrix.DeveloperIndex(developer), topic);
}

void WriteScoresCsv(const ScoreMatrix& matrix, std::ostream& out) {
  WriteGridCsv(matrix, matrix.scores(), out);
}

void WriteSupportCsv(const ScoreMatrix& matrix, std::ostream& out) {
  WriteGridCsv(matrix, matrix.support(), out);
}

}  // namespace triage
