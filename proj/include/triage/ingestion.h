#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace triage {

using Timestamp = std::chrono::sys_seconds;

// Parses an ISO-8601 timestamp ("2020-01-03T12:00:00Z", "2020-01-03T12:00Z",
// "2020-01-03T12:00:00.250+02:00", "2020-01-03") into UTC seconds.
// Fractional seconds are truncated. Returns nullopt on malformed input.
std::optional<Timestamp> ParseTimestamp(std::string_view text);

// Inverse of ParseTimestamp for whole seconds: "YYYY-MM-DDTHH:MM:SSZ".
std::string FormatTimestamp(Timestamp ts);

struct BugReport {
  std::string id;
  std::string description;
  std::string assignee;
  std::optional<double> time_spent_hours;
  Timestamp created_at{};
  std::optional<Timestamp> closed_at;
  // Tracker enum tokens, upper-cased on load (e.g. CLOSED, DONE, BUG).
  std::string status;
  std::string resolution;
  std::string issue_type;

  friend bool operator==(const BugReport&, const BugReport&) = default;
};

enum class InputFormat { kCsv, kJsonl };

std::optional<InputFormat> ParseInputFormat(std::string_view name);

// A record that failed validation. `row` is the 1-based data record number
// (the CSV header and blank JSONL lines are not counted).
struct RowError {
  std::size_t row = 0;
  std::string field;
  std::string message;
};

struct LoadResult {
  std::vector<BugReport> reports;
  std::vector<RowError> errors;
};

// Column set shared by both input formats.
inline constexpr std::string_view kReportFields[] = {
    "bug_id",   "created_at",       "closed_at",   "status",    "resolution",
    "assignee", "time_spent_hours", "description", "issue_type"};

// Decodes bug records. Header problems and invalid UTF-8 abort the whole load
// with a kSchema TriageError; per-record problems (bad timestamps, negative
// hours, closed before created, duplicate ids) are collected in `errors` and
// the offending record is left out of `reports`.
LoadResult LoadReports(std::istream& source, InputFormat format);
LoadResult LoadReports(std::string_view text, InputFormat format);

// Fixing time in hours: the recorded time spent when present, otherwise the
// created-to-closed interval. Throws kInvalidArgument when neither exists.
double EffectiveFixingHours(const BugReport& report);

bool HasFixingTime(const BugReport& report);

struct Dataset {
  // Ascending by (created_at, id).
  std::vector<BugReport> reports;
  // Sorted, unique; exactly the assignees present in `reports`.
  std::vector<std::string> developers;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct FilterStats {
  std::size_t input = 0;
  std::size_t empty_description = 0;
  std::size_t missing_fixing_time = 0;
  std::size_t below_min_fixes = 0;
  std::size_t retained = 0;
};

inline constexpr int kDefaultMinFixes = 10;

// Drops reports with blank descriptions or no fixing-time source, then
// repeatedly drops every report whose assignee has fewer than `min_fixes`
// surviving reports until nothing changes, and orders the survivors
// chronologically. Throws kEmptyData if nothing survives.
Dataset FilterAndOrder(std::span<const BugReport> reports, int min_fixes,
                       FilterStats* stats = nullptr);

// Chronological order used throughout: created_at, then id.
bool ChronologicalLess(const BugReport& a, const BugReport& b);

}  // namespace triage
