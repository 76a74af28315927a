#include "triage/assignment.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "triage/errors.h"

namespace triage {
namespace {

std::vector<std::size_t> ResolveDevelopers(std::span<const std::string> developers,
                                           const ScoreMatrix& scores) {
  std::vector<std::size_t> index;
  index.reserve(developers.size());
  for (const auto& dev : developers) index.push_back(scores.DeveloperIndex(dev));
  return index;
}

CostMatrix BuildBatch(std::span<const LabeledBug> bugs,
                      std::span<const std::string> developers,
                      std::span<const std::size_t> score_rows, const ScoreMatrix& scores) {
  const std::size_t d = developers.size();
  if (bugs.empty()) {
    throw TriageError(ErrorKind::kInvalidArgument, "batch: no bugs");
  }
  if (bugs.size() > d) {
    throw TriageError(ErrorKind::kInvalidArgument,
                      "batch: " + std::to_string(bugs.size()) + " bugs exceed " +
                          std::to_string(d) + " developers");
  }
  Grid<double> cost(d, d, 0.0);
  std::vector<std::optional<std::string>> row_ids(d);
  for (std::size_t r = 0; r < bugs.size(); ++r) {
    row_ids[r] = bugs[r].bug_id;
    for (std::size_t c = 0; c < d; ++c) {
      cost(r, c) = PredictedHours(scores, score_rows[c], bugs[r].topic);
    }
  }
  return CostMatrix(std::move(cost), std::move(row_ids),
                    std::vector<std::string>(developers.begin(), developers.end()));
}

}  // namespace

CostMatrix::CostMatrix(Grid<double> cost, std::vector<std::optional<std::string>> row_ids,
                       std::vector<std::string> col_ids)
    : cost_(std::move(cost)), row_ids_(std::move(row_ids)), col_ids_(std::move(col_ids)) {
  const std::size_t n = cost_.rows();
  if (n == 0) throw TriageError(ErrorKind::kInvalidArgument, "cost matrix: empty");
  if (cost_.cols() != n) {
    throw TriageError(ErrorKind::kInvalidArgument,
                      "cost matrix: not square (" + std::to_string(n) + "x" +
                          std::to_string(cost_.cols()) + ")");
  }
  for (const double c : cost_.data()) {
    if (!std::isfinite(c)) {
      throw TriageError(ErrorKind::kInvalidArgument, "cost matrix: non-finite entry");
    }
    if (c < 0.0) {
      throw TriageError(ErrorKind::kInvalidArgument, "cost matrix: negative entry");
    }
  }
  if (!row_ids_.empty() && row_ids_.size() != n) {
    throw TriageError(ErrorKind::kInvalidArgument, "cost matrix: row id count mismatch");
  }
  if (!col_ids_.empty() && col_ids_.size() != n) {
    throw TriageError(ErrorKind::kInvalidArgument, "cost matrix: column id count mismatch");
  }
  for (std::size_t r = 0; r < row_ids_.size(); ++r) {
    if (row_ids_[r]) continue;
    const auto row = cost_.row(r);
    if (std::any_of(row.begin(), row.end(), [](double c) { return c != 0.0; })) {
      throw TriageError(ErrorKind::kInvalidArgument,
                        "cost matrix: padding row with nonzero cost");
    }
  }
}

CostMatrix CostMatrix::FromRows(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n == 0 ? 0 : rows.front().size();
  Grid<double> grid(n, m, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != m) {
      throw TriageError(ErrorKind::kInvalidArgument, "cost matrix: ragged rows");
    }
    std::copy(rows[r].begin(), rows[r].end(), grid.row(r).begin());
  }
  return CostMatrix(std::move(grid));
}

double CostMatrix::MaxEntry() const {
  return *std::max_element(cost_.data().begin(), cost_.data().end());
}

std::vector<std::pair<int, int>> Matching::Pairs() const {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(row_to_col.size());
  for (std::size_t r = 0; r < row_to_col.size(); ++r) {
    pairs.emplace_back(static_cast<int>(r), row_to_col[r]);
  }
  return pairs;
}

Matching KmMinCost(const CostMatrix& matrix) {
  const std::size_t n = matrix.size();
  const double c_max = matrix.MaxEntry();
  const double eps = kSlackTolerance * c_max;
  const auto weight = [&](std::size_t x, std::size_t y) { return c_max - matrix(x, y); };
  constexpr int kFree = -1;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Initial feasible labeling: l(x) = max_y w(x, y), l(y) = 0.
  std::vector<double> lx(n), ly(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    double best = weight(x, 0);
    for (std::size_t y = 1; y < n; ++y) best = std::max(best, weight(x, y));
    lx[x] = best;
  }

  // Initial matching: greedy over tight edges.
  std::vector<int> match_x(n, kFree), match_y(n, kFree);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (match_y[y] == kFree && lx[x] + ly[y] - weight(x, y) <= eps) {
        match_x[x] = static_cast<int>(y);
        match_y[y] = static_cast<int>(x);
        break;
      }
    }
  }

  std::vector<char> in_tree_y(n);
  std::vector<double> slack(n);
  std::vector<int> slack_x(n), parent(n);
  std::vector<int> tree_x;
  tree_x.reserve(n);

  for (std::size_t root = 0; root < n; ++root) {
    if (match_x[root] != kFree) continue;

    // S = {root}, T = {}.
    std::fill(in_tree_y.begin(), in_tree_y.end(), 0);
    tree_x.assign(1, static_cast<int>(root));
    for (std::size_t y = 0; y < n; ++y) {
      slack[y] = lx[root] + ly[y] - weight(root, y);
      slack_x[y] = static_cast<int>(root);
    }

    while (true) {
      // Lowest-index tight column outside T, else the minimum-slack one.
      int tight = kFree;
      int argmin = kFree;
      double min_slack = kInf;
      for (std::size_t y = 0; y < n; ++y) {
        if (in_tree_y[y]) continue;
        if (slack[y] <= eps) {
          tight = static_cast<int>(y);
          break;
        }
        if (slack[y] < min_slack) {
          min_slack = slack[y];
          argmin = static_cast<int>(y);
        }
      }

      if (tight == kFree) {
        // Neighborhood of S equals T: shift labels by the smallest slack.
        if (argmin == kFree) {
          throw TriageError(ErrorKind::kInvariant, "km: no column left outside the tree");
        }
        const double delta = min_slack;
        for (const int x : tree_x) lx[x] -= delta;
        for (std::size_t y = 0; y < n; ++y) {
          if (in_tree_y[y]) {
            ly[y] += delta;
          } else {
            slack[y] -= delta;
          }
        }
        continue;
      }

      const auto y = static_cast<std::size_t>(tight);
      parent[y] = slack_x[y];
      if (match_y[y] == kFree) {
        // Augment along the alternating path ending in y.
        int cur_y = tight;
        while (cur_y != kFree) {
          const int x = parent[cur_y];
          const int next_y = match_x[x];
          match_x[x] = cur_y;
          match_y[cur_y] = x;
          cur_y = next_y;
        }
        break;
      }

      // y is matched to z: extend the tree with y in T and z in S.
      in_tree_y[y] = 1;
      const int z = match_y[y];
      tree_x.push_back(z);
      for (std::size_t v = 0; v < n; ++v) {
        if (in_tree_y[v]) continue;
        const double s = lx[z] + ly[v] - weight(z, v);
        if (s < slack[v]) {
          slack[v] = s;
          slack_x[v] = z;
        }
      }
    }
  }

  Matching result;
  result.row_to_col = std::move(match_x);
  result.c_max = c_max;
  result.row_labels = std::move(lx);
  result.col_labels = std::move(ly);
  for (std::size_t x = 0; x < n; ++x) {
    result.total_cost += matrix(x, static_cast<std::size_t>(result.row_to_col[x]));
  }
  return result;
}

CostMatrix BuildBatchMatrix(std::span<const LabeledBug> bugs,
                            std::span<const std::string> developers,
                            const ScoreMatrix& scores) {
  const auto rows = ResolveDevelopers(developers, scores);
  return BuildBatch(bugs, developers, rows, scores);
}

double AssignmentPlan::PredictedTotalHours() const {
  double total = 0.0;
  for (const auto& a : assignments) total += a.predicted_hours;
  return total;
}

AssignmentPlan IterativeAssign(std::span<const LabeledBug> bugs,
                               std::span<const std::string> developers,
                               const ScoreMatrix& scores) {
  if (developers.empty()) {
    throw TriageError(ErrorKind::kInvalidArgument, "assign: no developers");
  }
  if (bugs.empty()) throw TriageError(ErrorKind::kEmptyData, "assign: no bugs");

  const auto score_rows = ResolveDevelopers(developers, scores);
  const std::size_t d = developers.size();

  AssignmentPlan plan;
  for (const auto& dev : developers) plan.load.emplace(dev, 0);
  if (plan.load.size() != d) {
    throw TriageError(ErrorKind::kInvalidArgument, "assign: duplicate developer ids");
  }
  plan.assignments.reserve(bugs.size());

  for (std::size_t start = 0; start < bugs.size(); start += d) {
    const auto batch = bugs.subspan(start, std::min(d, bugs.size() - start));
    const CostMatrix matrix = BuildBatch(batch, developers, score_rows, scores);
    const Matching matching = KmMinCost(matrix);
    ++plan.batches;
    for (std::size_t r = 0; r < batch.size(); ++r) {
      const auto c = static_cast<std::size_t>(matching.row_to_col[r]);
      plan.assignments.push_back(
          {batch[r].bug_id, developers[c], batch[r].topic, matrix(r, c)});
      ++plan.load[developers[c]];
    }
  }
  return plan;
}

}  // namespace triage
