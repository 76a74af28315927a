#include "triage/app.h"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "triage/artifacts.h"
#include "triage/errors.h"

namespace triage::app {
namespace {

namespace fs = std::filesystem;
using artifacts::Json;

std::string Upper(std::string s) {
  for (char& c : s) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return s;
}

bool ListAccepts(const std::vector<std::string>& allowed, const std::string& token) {
  return allowed.empty() || std::find(allowed.begin(), allowed.end(), token) != allowed.end();
}

void RejectUnknownKeys(const Json& obj, std::initializer_list<std::string_view> known,
                       const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw TriageError(ErrorKind::kSchema, "config: unknown key '" + where + key + "'");
    }
  }
}

template <typename T>
void Read(const Json& obj, const char* key, T* out) {
  if (!obj.contains(key) || obj[key].is_null()) return;
  try {
    *out = obj[key].get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw TriageError(ErrorKind::kSchema, std::string("config: bad value for '") + key +
                                              "': " + e.what());
  }
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

InputFormat FormatOrThrow(const std::string& name) {
  const auto format = ParseInputFormat(name);
  if (!format) throw TriageError(ErrorKind::kSchema, "unknown input format '" + name + "'");
  return *format;
}

InputFormat GuessFormat(const fs::path& path) {
  return path.extension() == ".jsonl" ? InputFormat::kJsonl : InputFormat::kCsv;
}

LoadResult LoadFile(const fs::path& path, InputFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TriageError(ErrorKind::kIo, "cannot open input '" + path.string() + "'");
  return LoadReports(in, format);
}

void PrintRowErrors(const std::vector<RowError>& errors, std::ostream& err) {
  for (const auto& e : errors) {
    err << "row " << e.row;
    if (!e.field.empty()) err << " field " << e.field;
    err << ": " << e.message << '\n';
  }
}

Dataset ReadDataset(const RunConfig& config) {
  const fs::path path = DatasetPath(config);
  if (!fs::exists(path)) {
    throw TriageError(ErrorKind::kIo,
                      "missing dataset artifact '" + path.string() + "' (run ingest first)");
  }
  return artifacts::DatasetFromJson(artifacts::ReadJsonFile(path));
}

Json HoursSummary(const Dataset& dataset) {
  std::vector<double> hours;
  hours.reserve(dataset.reports.size());
  for (const auto& r : dataset.reports) hours.push_back(EffectiveFixingHours(r));
  std::sort(hours.begin(), hours.end());
  Json j = Json::object();
  double total = 0.0;
  for (const double h : hours) total += h;
  j["min"] = hours.front();
  j["max"] = hours.back();
  j["mean"] = total / hours.size();
  const std::size_t mid = hours.size() / 2;
  j["median"] = hours.size() % 2 ? hours[mid] : (hours[mid - 1] + hours[mid]) / 2.0;
  j["total"] = total;
  return j;
}

Json CoherenceCurve(const std::vector<TopicCountScore>& scores) {
  Json curve = Json::array();
  for (const auto& s : scores) {
    curve.push_back(Json{{"topics", s.num_topics}, {"coherence", s.coherence}});
  }
  return curve;
}

// Runs `body`, translating errors into exit codes.
template <typename Body>
int Guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const TriageError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
    case ErrorKind::kSchema:
    case ErrorKind::kInvalidArgument:
      return kExitIo;
    case ErrorKind::kEmptyData:
      return kExitEmpty;
    case ErrorKind::kInvariant:
      return kExitInternal;
  }
  return kExitInternal;
}

bool RecordFilter::Accepts(const BugReport& report) const {
  return ListAccepts(status, report.status) && ListAccepts(resolution, report.resolution) &&
         ListAccepts(issue_type, report.issue_type);
}

RunConfig ParseRunConfig(const std::string& json_text, const fs::path& base_dir) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw TriageError(ErrorKind::kSchema, std::string("config: invalid json: ") + e.what());
  }
  if (!root.is_object()) throw TriageError(ErrorKind::kSchema, "config: expected an object");
  RejectUnknownKeys(root,
                    {"input", "filter", "skip_invalid_rows", "min_fixes", "stopwords",
                     "min_df", "topics", "lda", "scoring", "output_dir", "threads"},
                    "");

  RunConfig config;
  PipelineConfig& p = config.pipeline;
  if (root.contains("input")) {
    const Json& input = root["input"];
    RejectUnknownKeys(input, {"path", "format"}, "input.");
    std::string path, format;
    Read(input, "path", &path);
    Read(input, "format", &format);
    if (!path.empty()) config.input_path = Resolve(base_dir, path);
    config.input_format =
        format.empty() ? GuessFormat(config.input_path) : FormatOrThrow(format);
  }
  if (root.contains("filter")) {
    const Json& filter = root["filter"];
    RejectUnknownKeys(filter, {"status", "resolution", "issue_type"}, "filter.");
    Read(filter, "status", &config.filter.status);
    Read(filter, "resolution", &config.filter.resolution);
    Read(filter, "issue_type", &config.filter.issue_type);
    for (auto* list : {&config.filter.status, &config.filter.resolution,
                       &config.filter.issue_type}) {
      for (auto& token : *list) token = Upper(token);
    }
  }
  Read(root, "skip_invalid_rows", &config.skip_invalid_rows);
  Read(root, "min_fixes", &p.min_fixes);
  if (root.contains("stopwords") && !root["stopwords"].is_null()) {
    std::string path;
    Read(root, "stopwords", &path);
    config.stopwords_path = Resolve(base_dir, path);
    p.stoplist = LoadStoplist(config.stopwords_path->string());
  }
  Read(root, "min_df", &p.min_df);
  if (root.contains("topics")) {
    const Json& topics = root["topics"];
    RejectUnknownKeys(topics, {"k_min", "k_max", "top_n"}, "topics.");
    Read(topics, "k_min", &p.k_min);
    Read(topics, "k_max", &p.k_max);
    Read(topics, "top_n", &p.coherence_top_n);
  }
  if (root.contains("lda")) {
    const Json& lda = root["lda"];
    RejectUnknownKeys(lda,
                      {"alpha", "beta", "iterations", "burn_in", "seed", "average_theta",
                       "fold_in_sweeps"},
                      "lda.");
    if (lda.contains("alpha") && !lda["alpha"].is_null()) {
      double alpha = 0.0;
      Read(lda, "alpha", &alpha);
      p.lda.alpha = alpha;
    }
    Read(lda, "beta", &p.lda.beta);
    Read(lda, "iterations", &p.lda.iterations);
    Read(lda, "burn_in", &p.lda.burn_in);
    Read(lda, "seed", &p.lda.seed);
    Read(lda, "average_theta", &p.lda.average_theta);
    Read(lda, "fold_in_sweeps", &p.fold_in_sweeps);
  }
  if (root.contains("scoring")) {
    const Json& scoring = root["scoring"];
    RejectUnknownKeys(scoring, {"penalty_factor"}, "scoring.");
    Read(scoring, "penalty_factor", &p.fallback.penalty_factor);
  }
  std::string output_dir;
  Read(root, "output_dir", &output_dir);
  if (!output_dir.empty()) config.output_dir = Resolve(base_dir, output_dir);
  Read(root, "threads", &p.threads);

  try {
    p.Validate();
  } catch (const TriageError& e) {
    throw TriageError(ErrorKind::kSchema, e.what());
  }
  return config;
}

RunConfig LoadRunConfig(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw TriageError(ErrorKind::kIo, "cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseRunConfig(buffer.str(), path.parent_path());
}

fs::path DatasetPath(const RunConfig& c) { return c.output_dir / "dataset.json"; }
fs::path ModelPath(const RunConfig& c) { return c.output_dir / "model.json"; }
fs::path ScoresPath(const RunConfig& c) { return c.output_dir / "scores.json"; }
fs::path TopicsPath(const RunConfig& c) { return c.output_dir / "topics.json"; }
fs::path PlanPath(const RunConfig& c) { return c.output_dir / "plan.json"; }
fs::path EvaluationPath(const RunConfig& c) { return c.output_dir / "evaluation.json"; }

int CmdIngest(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    if (config.input_path.empty()) {
      throw TriageError(ErrorKind::kIo, "no input path configured");
    }
    LoadResult loaded = LoadFile(config.input_path, config.input_format);
    if (!loaded.errors.empty()) {
      PrintRowErrors(loaded.errors, err);
      if (!config.skip_invalid_rows) {
        err << "error: " << loaded.errors.size() << " invalid row(s) in '"
            << config.input_path.string() << "'\n";
        return static_cast<int>(kExitIo);
      }
    }

    std::vector<BugReport> accepted;
    for (auto& r : loaded.reports) {
      if (config.filter.Accepts(r)) accepted.push_back(std::move(r));
    }
    const std::size_t rejected_by_predicate = loaded.reports.size() - accepted.size();

    FilterStats stats;
    Dataset dataset;
    try {
      dataset = FilterAndOrder(accepted, config.pipeline.min_fixes, &stats);
    } catch (const TriageError& e) {
      if (e.kind() != ErrorKind::kEmptyData) throw;
      err << "error: empty dataset after filtering\n";
      return static_cast<int>(kExitEmpty);
    }
    artifacts::WriteJsonFile(DatasetPath(config), artifacts::DatasetToJson(dataset));

    Json summary = Json::object();
    summary["input"] = config.input_path.string();
    summary["records_read"] = loaded.reports.size() + loaded.errors.size();
    summary["invalid_rows"] = loaded.errors.size();
    summary["dropped_by_status_filter"] = rejected_by_predicate;
    summary["dropped_empty_description"] = stats.empty_description;
    summary["dropped_missing_fixing_time"] = stats.missing_fixing_time;
    summary["dropped_below_min_fixes"] = stats.below_min_fixes;
    summary["retained"] = dataset.reports.size();
    summary["developers"] = dataset.developers.size();
    summary["fixing_hours"] = HoursSummary(dataset);
    summary["artifact"] = DatasetPath(config).string();
    out << summary.dump(2) << '\n';
    return static_cast<int>(kExitOk);
  });
}

int CmdTopics(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    const Dataset dataset = ReadDataset(config);
    const PipelineConfig& p = config.pipeline;
    const Corpus corpus = BuildCorpus(dataset, p.stoplist, p.min_df);
    std::vector<TokenizedDocument> docs;
    for (const auto& d : corpus.documents) {
      if (!d.tokens.empty()) docs.push_back(d);
    }
    const TopicSelection selection = SelectTopicCount(
        docs, corpus.vocabulary.size(), p.k_min, p.k_max, p.lda, p.coherence_top_n);

    Json doc = Json::object();
    doc["schema_version"] = artifacts::kSchemaVersion;
    doc["kind"] = "topics";
    doc["documents"] = corpus.documents.size();
    doc["empty_documents"] = corpus.documents.size() - docs.size();
    doc["vocabulary_size"] = corpus.vocabulary.size();
    doc["coherence"] = CoherenceCurve(selection.scores);
    doc["selected_topics"] = selection.best_num_topics;
    artifacts::WriteJsonFile(TopicsPath(config), doc);
    out << doc.dump(2) << '\n';
    return static_cast<int>(kExitOk);
  });
}

int CmdTrain(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    const Dataset dataset = ReadDataset(config);
    const TrainedPipeline trained = TrainPipeline(dataset.reports, config.pipeline);
    artifacts::WriteJsonFile(ModelPath(config), artifacts::ModelToJson(trained));
    artifacts::WriteJsonFile(ScoresPath(config), artifacts::ScoresToJson(trained.scores));
    {
      std::ostringstream csv;
      WriteScoresCsv(trained.scores, csv);
      artifacts::WriteTextFile(config.output_dir / "scores.csv", csv.str());
    }
    {
      std::ostringstream csv;
      WriteSupportCsv(trained.scores, csv);
      artifacts::WriteTextFile(config.output_dir / "support.csv", csv.str());
    }
    Json summary = Json::object();
    summary["train_reports"] = trained.train_reports;
    summary["developers"] = trained.developers.size();
    summary["vocabulary_size"] = trained.vocabulary.size();
    summary["selected_topics"] = trained.model.num_topics();
    summary["coherence"] = CoherenceCurve(trained.coherence);
    summary["model"] = ModelPath(config).string();
    summary["scores"] = ScoresPath(config).string();
    out << summary.dump(2) << '\n';
    return static_cast<int>(kExitOk);
  });
}

int CmdAssign(const RunConfig& config, const fs::path& bugs_path, InputFormat bugs_format,
              std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    for (const auto& path : {ModelPath(config), ScoresPath(config)}) {
      if (!fs::exists(path)) {
        throw TriageError(ErrorKind::kIo,
                          "missing artifact '" + path.string() + "' (run train first)");
      }
    }
    const TrainedPipeline trained =
        artifacts::TrainedFromJson(artifacts::ReadJsonFile(ModelPath(config)),
                                   artifacts::ReadJsonFile(ScoresPath(config)));

    LoadResult loaded = LoadFile(bugs_path, bugs_format);
    if (!loaded.errors.empty()) {
      PrintRowErrors(loaded.errors, err);
      if (!config.skip_invalid_rows) {
        err << "error: " << loaded.errors.size() << " invalid row(s) in '"
            << bugs_path.string() << "'\n";
        return static_cast<int>(kExitIo);
      }
    }
    if (loaded.reports.empty()) {
      err << "error: no bug reports to assign\n";
      return static_cast<int>(kExitEmpty);
    }
    std::sort(loaded.reports.begin(), loaded.reports.end(), ChronologicalLess);

    const auto bugs = LabelNewReports(trained, loaded.reports, config.pipeline);
    const AssignmentPlan plan = IterativeAssign(bugs, trained.developers, trained.scores);
    artifacts::WriteJsonFile(PlanPath(config), artifacts::PlanToJson(plan));

    const LoadStats load = SummarizeLoad(plan.load);
    std::set<std::string> assigned;
    for (const auto& a : plan.assignments) assigned.insert(a.bug_id);
    if (load.max - load.min > 1 || assigned.size() != loaded.reports.size()) {
      err << "error: assignment plan violates load normalization\n";
      return static_cast<int>(kExitInternal);
    }
    Json summary = Json::object();
    summary["bugs"] = plan.assignments.size();
    summary["developers"] = trained.developers.size();
    summary["batches"] = plan.batches;
    summary["predicted_total_hours"] = plan.PredictedTotalHours();
    summary["load"] = Json{{"min", load.min}, {"max", load.max}, {"mean", load.mean}};
    summary["plan"] = PlanPath(config).string();
    out << summary.dump(2) << '\n';
    return static_cast<int>(kExitOk);
  });
}

int CmdEvaluate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] {
    const Dataset dataset = ReadDataset(config);
    const EvaluationResult result = RunAll(dataset, config.pipeline);
    const Json report = artifacts::EvaluationToJson(result);
    artifacts::WriteJsonFile(EvaluationPath(config), report);
    artifacts::WriteTextFile(config.output_dir / "evaluation.csv",
                             artifacts::EvaluationToCsv(result));

    out << "fold  train  test  K  devs  real_h        predicted_h   reduction%  "
           "opt_load  real_load\n";
    for (const auto& f : result.folds) {
      char line[256];
      std::snprintf(line, sizeof(line),
                    "%-4d  %-5zu  %-4zu  %-2d %-5zu %-13.2f %-13.2f %-10.2f  %d-%d      %d-%d\n",
                    f.fold_index, f.train_size, f.test_size, f.selected_topics,
                    f.developer_count, f.real_total_hours, f.predicted_total_hours,
                    f.time_reduction_pct, f.optimized_load.min, f.optimized_load.max,
                    f.real_load.min, f.real_load.max);
      out << line;
    }
    out << report["summary"].dump(2) << '\n';
    for (const auto& f : result.failures) {
      err << "fold " << f.fold_index << " failed (" << ToString(f.kind) << "): " << f.message
          << '\n';
    }
    if (!result.failures.empty()) return ExitCodeFor(result.failures.front().kind);
    return static_cast<int>(kExitOk);
  });
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Load-balancing bug triage: topic labels, developer scores, Kuhn-Munkres "
               "batch assignment"};
  cli.name("triage");
  cli.require_subcommand(1);

  std::string config_path;
  std::string input_path;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::string bugs_path;
  std::string bugs_format;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "Run configuration (JSON)");
    sub->add_option("-o,--output-dir", output_dir, "Override the artifact directory");
    sub->add_option("--seed", seed, "Override the sampler seed");
  };
  CLI::App* ingest = cli.add_subcommand("ingest", "Validate, filter and order bug reports");
  add_common(ingest);
  ingest->add_option("-i,--input", input_path, "Override the input file");
  CLI::App* topics = cli.add_subcommand("topics", "Coherence curve over the topic range");
  add_common(topics);
  CLI::App* train = cli.add_subcommand("train", "Fit topics and developer scores");
  add_common(train);
  CLI::App* assign = cli.add_subcommand("assign", "Assign new bug reports to developers");
  add_common(assign);
  assign->add_option("-b,--bugs", bugs_path, "New bug reports (csv or jsonl)")->required();
  assign->add_option("--format", bugs_format, "csv or jsonl (default: from extension)");
  CLI::App* evaluate = cli.add_subcommand("evaluate", "Nine-fold rolling-origin evaluation");
  add_common(evaluate);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    cli.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e, out, err);
    return code == 0 ? static_cast<int>(kExitOk) : static_cast<int>(kExitIo);
  }

  RunConfig config;
  try {
    if (!config_path.empty()) config = LoadRunConfig(config_path);
    if (!input_path.empty()) {
      config.input_path = input_path;
      config.input_format = GuessFormat(config.input_path);
    }
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (seed) config.pipeline.lda.seed = *seed;
  } catch (const TriageError& e) {
    err << "error: " << e.what() << '\n';
    return ExitCodeFor(e.kind());
  }

  if (*ingest) return CmdIngest(config, out, err);
  if (*topics) return CmdTopics(config, out, err);
  if (*train) return CmdTrain(config, out, err);
  if (*assign) {
    InputFormat format = GuessFormat(bugs_path);
    if (!bugs_format.empty()) {
      const auto parsed = ParseInputFormat(bugs_format);
      if (!parsed) {
        err << "error: unknown format '" << bugs_format << "'\n";
        return kExitIo;
      }
      format = *parsed;
    }
    return CmdAssign(config, bugs_path, format, out, err);
  }
  return CmdEvaluate(config, out, err);
}

}  // namespace triage::app
