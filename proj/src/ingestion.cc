#include "triage/ingestion.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "triage/errors.h"

namespace triage {
namespace {

using json = nlohmann::json;

bool ReadInt(std::string_view text, std::size_t pos, std::size_t len, int* out) {
  if (pos + len > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  *out = value;
  return true;
}

std::string_view Trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string Upper(std::string_view s) {
  std::string out(Trim(s));
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

// Returns the byte offset of the first invalid sequence, or npos.
std::size_t FindInvalidUtf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return i;
    }
    if (i + extra >= s.size()) return i;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return i;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong encodings, surrogates and out-of-range code points.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return i;
    }
    i += extra + 1;
  }
  return std::string_view::npos;
}

// RFC 4180 reader. Quoted fields may hold separators, doubled quotes and
// newlines. Each record keeps the 1-based physical line it started on.
struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

std::vector<CsvRecord> SplitCsv(std::string_view text) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  const auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  const auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && current.fields[0].empty();
    if (!blank) records.push_back(std::move(current));
    current = CsvRecord{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started || field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
        break;
    }
  }
  if (in_quotes) {
    throw TriageError(ErrorKind::kSchema,
                      "csv: unterminated quoted field starting in record at line " +
                          std::to_string(current.line));
  }
  if (field_started || !field.empty() || !current.fields.empty()) end_record();
  return records;
}

using RawRecord = std::map<std::string, std::string, std::less<>>;

class RecordValidator {
 public:
  explicit RecordValidator(LoadResult* result) : result_(result) {}

  void Add(std::size_t row, const RawRecord& raw) {
    BugReport report;
    const auto field = [&](std::string_view name) -> const std::string& {
      return raw.find(name)->second;
    };
    const auto fail = [&](std::string_view name, std::string message) {
      result_->errors.push_back({row, std::string(name), std::move(message)});
    };

    report.id = std::string(Trim(field("bug_id")));
    if (report.id.empty()) return fail("bug_id", "empty bug id");

    const auto created = ParseTimestamp(field("created_at"));
    if (!created) {
      return fail("created_at", "cannot parse timestamp '" + field("created_at") + "'");
    }
    report.created_at = *created;

    const std::string_view closed_text = Trim(field("closed_at"));
    if (!closed_text.empty()) {
      const auto closed = ParseTimestamp(closed_text);
      if (!closed) {
        return fail("closed_at",
                    "cannot parse timestamp '" + std::string(closed_text) + "'");
      }
      if (*closed < *created) return fail("closed_at", "closed_at precedes created_at");
      report.closed_at = *closed;
    }

    const std::string_view hours_text = Trim(field("time_spent_hours"));
    if (!hours_text.empty()) {
      double hours = 0.0;
      const auto [ptr, ec] =
          std::from_chars(hours_text.data(), hours_text.data() + hours_text.size(), hours);
      if (ec != std::errc() || ptr != hours_text.data() + hours_text.size() ||
          !std::isfinite(hours)) {
        return fail("time_spent_hours",
                    "not a number: '" + std::string(hours_text) + "'");
      }
      if (hours < 0.0) return fail("time_spent_hours", "negative time spent");
      report.time_spent_hours = hours;
    }

    report.assignee = std::string(Trim(field("assignee")));
    if (report.assignee.empty()) return fail("assignee", "empty assignee");

    report.description = field("description");
    report.status = Upper(field("status"));
    report.resolution = Upper(field("resolution"));
    report.issue_type = Upper(field("issue_type"));

    if (!seen_ids_.insert(report.id).second) {
      return fail("bug_id", "duplicate bug id '" + report.id + "'");
    }
    result_->reports.push_back(std::move(report));
  }

 private:
  LoadResult* result_;
  std::unordered_set<std::string> seen_ids_;
};

void LoadCsv(std::string_view text, LoadResult* result) {
  const std::vector<CsvRecord> records = SplitCsv(text);
  if (records.empty()) {
    throw TriageError(ErrorKind::kSchema, "csv: missing header row");
  }

  const auto& header = records.front().fields;
  std::vector<std::string> names;
  for (const auto& h : header) names.emplace_back(Trim(h));
  std::set<std::string, std::less<>> seen;
  for (const auto& name : names) {
    if (std::find(std::begin(kReportFields), std::end(kReportFields), name) ==
        std::end(kReportFields)) {
      throw TriageError(ErrorKind::kSchema, "csv header: unknown column '" + name + "'");
    }
    if (!seen.insert(name).second) {
      throw TriageError(ErrorKind::kSchema, "csv header: duplicate column '" + name + "'");
    }
  }
  for (const auto name : kReportFields) {
    if (!seen.contains(name)) {
      throw TriageError(ErrorKind::kSchema,
                        "csv header: missing column '" + std::string(name) + "'");
    }
  }

  RecordValidator validator(result);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& fields = records[r].fields;
    if (fields.size() != names.size()) {
      result->errors.push_back(
          {r, "", "expected " + std::to_string(names.size()) + " fields, got " +
                      std::to_string(fields.size()) + " (line " +
                      std::to_string(records[r].line) + ")"});
      continue;
    }
    RawRecord raw;
    for (std::size_t i = 0; i < names.size(); ++i) raw[names[i]] = fields[i];
    validator.Add(r, raw);
  }
}

std::string JsonScalarToString(const json& value) {
  if (value.is_null()) return "";
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number()) {
    // Shortest round-trip form.
    char buf[64];
    const double d = value.get<double>();
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d);
    return std::string(buf, ptr);
  }
  return value.dump();
}

void LoadJsonl(std::string_view text, LoadResult* result) {
  RecordValidator validator(result);
  std::size_t row = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = Trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    ++row;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      result->errors.push_back({row, "", std::string("invalid json: ") + e.what()});
      continue;
    }
    if (!obj.is_object()) {
      result->errors.push_back({row, "", "record is not a json object"});
      continue;
    }
    RawRecord raw;
    bool ok = true;
    for (const auto& [key, value] : obj.items()) {
      if (std::find(std::begin(kReportFields), std::end(kReportFields), key) ==
          std::end(kReportFields)) {
        result->errors.push_back({row, key, "unknown key"});
        ok = false;
        break;
      }
      if (value.is_object() || value.is_array() || value.is_boolean()) {
        result->errors.push_back({row, key, "expected string, number or null"});
        ok = false;
        break;
      }
      raw[key] = JsonScalarToString(value);
    }
    if (!ok) continue;
    for (const auto name : kReportFields) {
      if (!raw.contains(name)) {
        result->errors.push_back({row, std::string(name), "missing key"});
        ok = false;
        break;
      }
    }
    if (ok) validator.Add(row, raw);
  }
}

}  // namespace

std::optional<Timestamp> ParseTimestamp(std::string_view text) {
  using namespace std::chrono;
  text = Trim(text);
  int y, mo, d;
  if (text.size() < 10 || text[4] != '-' || text[7] != '-' ||
      !ReadInt(text, 0, 4, &y) || !ReadInt(text, 5, 2, &mo) ||
      !ReadInt(text, 8, 2, &d)) {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  sys_seconds result = sys_days{ymd};
  if (text.size() == 10) return result;

  if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') return std::nullopt;
  std::size_t pos = 11;
  int hh, mm, ss = 0;
  if (!ReadInt(text, pos, 2, &hh) || pos + 2 >= text.size() || text[pos + 2] != ':' ||
      !ReadInt(text, pos + 3, 2, &mm)) {
    return std::nullopt;
  }
  pos += 5;
  if (pos < text.size() && text[pos] == ':') {
    if (!ReadInt(text, pos + 1, 2, &ss)) return std::nullopt;
    pos += 3;
    if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
      ++pos;
      const std::size_t digits = pos;
      while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
      if (pos == digits) return std::nullopt;
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  result += hours{hh} + minutes{mm} + seconds{ss};

  const std::string_view zone = text.substr(pos);
  if (zone.empty() || zone == "Z" || zone == "z") return result;
  if (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':') {
    int oh, om;
    if (!ReadInt(zone, 1, 2, &oh) || !ReadInt(zone, 4, 2, &om) || oh > 23 || om > 59) {
      return std::nullopt;
    }
    const seconds offset = hours{oh} + minutes{om};
    return zone[0] == '+' ? result - offset : result + offset;
  }
  return std::nullopt;
}

std::string FormatTimestamp(Timestamp ts) {
  using namespace std::chrono;
  const sys_days day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const hh_mm_ss<seconds> tod{ts - day_point};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

std::optional<InputFormat> ParseInputFormat(std::string_view name) {
  if (name == "csv") return InputFormat::kCsv;
  if (name == "jsonl") return InputFormat::kJsonl;
  return std::nullopt;
}

LoadResult LoadReports(std::string_view text, InputFormat format) {
  if (const std::size_t bad = FindInvalidUtf8(text); bad != std::string_view::npos) {
    throw TriageError(ErrorKind::kSchema,
                      "input is not valid UTF-8 (byte offset " + std::to_string(bad) + ")");
  }
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  LoadResult result;
  if (format == InputFormat::kCsv) {
    LoadCsv(text, &result);
  } else {
    LoadJsonl(text, &result);
  }
  return result;
}

LoadResult LoadReports(std::istream& source, InputFormat format) {
  std::string text((std::istreambuf_iterator<char>(source)),
                   std::istreambuf_iterator<char>());
  if (source.bad()) throw TriageError(ErrorKind::kIo, "error reading report stream");
  return LoadReports(std::string_view(text), format);
}

bool HasFixingTime(const BugReport& report) {
  return report.time_spent_hours.has_value() || report.closed_at.has_value();
}

double EffectiveFixingHours(const BugReport& report) {
  if (report.time_spent_hours) return *report.time_spent_hours;
  if (report.closed_at) {
    const auto secs = (*report.closed_at - report.created_at).count();
    return static_cast<double>(secs) / 3600.0;
  }
  throw TriageError(ErrorKind::kInvalidArgument,
                    "report '" + report.id + "' has neither time spent nor closed_at");
}

bool ChronologicalLess(const BugReport& a, const BugReport& b) {
  if (a.created_at != b.created_at) return a.created_at < b.created_at;
  return a.id < b.id;
}

Dataset FilterAndOrder(std::span<const BugReport> reports, int min_fixes,
                       FilterStats* stats) {
  if (min_fixes < 1) {
    throw TriageError(ErrorKind::kInvalidArgument, "min_fixes must be >= 1");
  }
  FilterStats local;
  local.input = reports.size();

  std::vector<BugReport> kept;
  kept.reserve(reports.size());
  for (const BugReport& r : reports) {
    if (Trim(r.description).empty()) {
      ++local.empty_description;
    } else if (!HasFixingTime(r)) {
      ++local.missing_fixing_time;
    } else {
      kept.push_back(r);
    }
  }

  for (bool changed = true; changed;) {
    std::unordered_map<std::string, int> counts;
    for (const BugReport& r : kept) ++counts[r.assignee];
    const std::size_t before = kept.size();
    std::erase_if(kept, [&](const BugReport& r) { return counts[r.assignee] < min_fixes; });
    local.below_min_fixes += before - kept.size();
    changed = kept.size() != before;
  }

  if (kept.empty()) {
    if (stats) *stats = local;
    throw TriageError(ErrorKind::kEmptyData, "empty dataset after filtering");
  }

  std::sort(kept.begin(), kept.end(), ChronologicalLess);
  Dataset dataset;
  for (const BugReport& r : kept) dataset.developers.push_back(r.assignee);
  std::sort(dataset.developers.begin(), dataset.developers.end());
  dataset.developers.erase(
      std::unique(dataset.developers.begin(), dataset.developers.end()),
      dataset.developers.end());
  dataset.reports = std::move(kept);
  local.retained = dataset.reports.size();
  if (stats) *stats = local;
  return dataset;
}

}  // namespace triage
