#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "triage/grid.h"
#include "triage/scoring.h"

namespace triage {

// Square matrix of nonnegative finite costs (hours). Rows are bugs, or
// zero-cost padding rows (row id nullopt); columns are developers.
class CostMatrix {
 public:
  // Throws kInvalidArgument unless `cost` is square, nonempty, nonnegative and
  // finite, the id vectors match its size and padding rows are all zero.
  explicit CostMatrix(Grid<double> cost,
                      std::vector<std::optional<std::string>> row_ids = {},
                      std::vector<std::string> col_ids = {});

  // Convenience for tests and small fixtures.
  static CostMatrix FromRows(const std::vector<std::vector<double>>& rows);

  std::size_t size() const { return cost_.rows(); }
  double operator()(std::size_t row, std::size_t col) const { return cost_(row, col); }
  const Grid<double>& cost() const { return cost_; }
  const std::vector<std::optional<std::string>>& row_ids() const { return row_ids_; }
  const std::vector<std::string>& col_ids() const { return col_ids_; }
  bool IsDummyRow(std::size_t row) const {
    return row < row_ids_.size() && !row_ids_[row].has_value();
  }
  double MaxEntry() const;

 private:
  Grid<double> cost_;
  std::vector<std::optional<std::string>> row_ids_;
  std::vector<std::string> col_ids_;
};

// Perfect matching with its dual certificate. Labels refer to the
// max-weight form w(x, y) = c_max - cost(x, y): row_labels[x] + col_labels[y]
// >= w(x, y) everywhere, with equality on matched pairs.
struct Matching {
  std::vector<int> row_to_col;
  double total_cost = 0.0;
  double c_max = 0.0;
  std::vector<double> row_labels;
  std::vector<double> col_labels;

  std::vector<std::pair<int, int>> Pairs() const;
};

// Relative tolerance (times c_max) for treating a slack as zero.
inline constexpr double kSlackTolerance = 1e-9;

// Kuhn-Munkres labeling algorithm on the complemented weights, O(n^3) through
// per-column slack tracking. Roots are grown in row order; among columns of
// equal slack the lowest index wins.
Matching KmMinCost(const CostMatrix& matrix);

struct LabeledBug {
  std::string bug_id;
  int topic = 0;
};

// Rows are `bugs` (cost = predicted hours of each developer for the bug's
// topic) followed by zero rows up to |developers|. Throws kInvalidArgument
// when bugs is empty or larger than the developer count.
CostMatrix BuildBatchMatrix(std::span<const LabeledBug> bugs,
                            std::span<const std::string> developers,
                            const ScoreMatrix& scores);

struct Assignment {
  std::string bug_id;
  std::string developer;
  int topic = 0;
  double predicted_hours = 0.0;
};

struct AssignmentPlan {
  std::vector<Assignment> assignments;
  // Every developer in the matrix, including those with zero load.
  std::map<std::string, int> load;
  int batches = 0;

  double PredictedTotalHours() const;
};

// Splits `bugs` in order into consecutive batches of |developers| (the last
// one possibly shorter), solves each padded batch with KmMinCost and collects
// the real-bug assignments.
AssignmentPlan IterativeAssign(std::span<const LabeledBug> bugs,
                               std::span<const std::string> developers,
                               const ScoreMatrix& scores);

}  // namespace triage
