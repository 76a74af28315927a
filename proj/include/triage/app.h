#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "triage/evaluation.h"
#include "triage/ingestion.h"

namespace triage::app {

enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 2,
  kExitEmpty = 3,
  kExitInternal = 4,
};

int ExitCodeFor(ErrorKind kind);

// Keeps a report when each non-empty list contains its (upper-cased) token.
struct RecordFilter {
  std::vector<std::string> status;
  std::vector<std::string> resolution;
  std::vector<std::string> issue_type;

  bool Accepts(const BugReport& report) const;
};

// Parsed run configuration (see README for the file schema). Relative paths
// in the file resolve against the file's directory.
struct RunConfig {
  std::filesystem::path input_path;
  InputFormat input_format = InputFormat::kCsv;
  RecordFilter filter{{"CLOSED"}, {"DONE"}, {"BUG"}};
  bool skip_invalid_rows = false;
  std::optional<std::filesystem::path> stopwords_path;
  std::filesystem::path output_dir = "triage-out";
  PipelineConfig pipeline;
};

RunConfig ParseRunConfig(const std::string& json_text,
                         const std::filesystem::path& base_dir = {});
RunConfig LoadRunConfig(const std::filesystem::path& path);

// Artifact locations inside the output directory.
std::filesystem::path DatasetPath(const RunConfig& config);
std::filesystem::path ModelPath(const RunConfig& config);
std::filesystem::path ScoresPath(const RunConfig& config);
std::filesystem::path TopicsPath(const RunConfig& config);
std::filesystem::path PlanPath(const RunConfig& config);
std::filesystem::path EvaluationPath(const RunConfig& config);

// Each command writes its artifacts, prints a JSON summary to `out` and
// diagnostics to `err`, and returns a process exit code.
int CmdIngest(const RunConfig& config, std::ostream& out, std::ostream& err);
int CmdTopics(const RunConfig& config, std::ostream& out, std::ostream& err);
int CmdTrain(const RunConfig& config, std::ostream& out, std::ostream& err);
int CmdAssign(const RunConfig& config, const std::filesystem::path& bugs_path,
              InputFormat bugs_format, std::ostream& out, std::ostream& err);
int CmdEvaluate(const RunConfig& config, std::ostream& out, std::ostream& err);

// Full command line, argv[0] excluded.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace triage::app
