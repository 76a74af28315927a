#include "triage/artifacts.h"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "triage/errors.h"

namespace triage::artifacts {
namespace {

Json Header(std::string_view kind) {
  Json doc = Json::object();
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = kind;
  return doc;
}

template <typename T>
T Get(const Json& doc, const char* key) {
  if (!doc.contains(key)) {
    throw TriageError(ErrorKind::kSchema, std::string("artifact: missing field '") + key + "'");
  }
  try {
    return doc.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw TriageError(ErrorKind::kSchema,
                      std::string("artifact: bad field '") + key + "': " + e.what());
  }
}

Json LoadToJson(const LoadStats& load) {
  Json j = Json::object();
  j["min"] = load.min;
  j["max"] = load.max;
  j["mean"] = load.mean;
  return j;
}

template <typename T>
Json GridToJson(const Grid<T>& grid) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    const auto row = grid.row(r);
    rows.push_back(std::vector<T>(row.begin(), row.end()));
  }
  return rows;
}

template <typename T>
Grid<T> GridFromJson(const Json& rows, std::size_t expected_rows, std::size_t expected_cols,
                     const char* what) {
  if (!rows.is_array() || rows.size() != expected_rows) {
    throw TriageError(ErrorKind::kSchema, std::string("artifact: bad shape for ") + what);
  }
  Grid<T> grid(expected_rows, expected_cols);
  for (std::size_t r = 0; r < expected_rows; ++r) {
    const auto values = rows[r].get<std::vector<T>>();
    if (values.size() != expected_cols) {
      throw TriageError(ErrorKind::kSchema, std::string("artifact: bad shape for ") + what);
    }
    std::copy(values.begin(), values.end(), grid.row(r).begin());
  }
  return grid;
}

}  // namespace

std::string HexU64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, value);
  return buf;
}

void RequireArtifact(const Json& doc, std::string_view kind) {
  if (!doc.is_object()) throw TriageError(ErrorKind::kSchema, "artifact: not a json object");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer() ||
      doc["schema_version"].get<int>() != kSchemaVersion) {
    throw TriageError(ErrorKind::kSchema,
                      "artifact: incompatible schema version (expected " +
                          std::to_string(kSchemaVersion) + ")");
  }
  if (!doc.contains("kind") || !doc["kind"].is_string() ||
      doc["kind"].get<std::string>() != kind) {
    throw TriageError(ErrorKind::kSchema,
                      "artifact: expected kind '" + std::string(kind) + "'");
  }
}

Json DatasetToJson(const Dataset& dataset) {
  Json doc = Header("dataset");
  doc["developers"] = dataset.developers;
  Json reports = Json::array();
  for (const auto& r : dataset.reports) {
    Json j = Json::object();
    j["bug_id"] = r.id;
    j["created_at"] = FormatTimestamp(r.created_at);
    j["closed_at"] = r.closed_at ? Json(FormatTimestamp(*r.closed_at)) : Json(nullptr);
    j["status"] = r.status;
    j["resolution"] = r.resolution;
    j["assignee"] = r.assignee;
    j["time_spent_hours"] = r.time_spent_hours ? Json(*r.time_spent_hours) : Json(nullptr);
    j["description"] = r.description;
    j["issue_type"] = r.issue_type;
    reports.push_back(std::move(j));
  }
  doc["reports"] = std::move(reports);
  return doc;
}

Dataset DatasetFromJson(const Json& doc) {
  RequireArtifact(doc, "dataset");
  Dataset dataset;
  dataset.developers = Get<std::vector<std::string>>(doc, "developers");
  const Json& reports = doc.at("reports");
  for (const auto& j : reports) {
    BugReport r;
    r.id = Get<std::string>(j, "bug_id");
    const auto created = ParseTimestamp(Get<std::string>(j, "created_at"));
    if (!created) throw TriageError(ErrorKind::kSchema, "artifact: bad created_at");
    r.created_at = *created;
    if (!j.at("closed_at").is_null()) {
      const auto closed = ParseTimestamp(Get<std::string>(j, "closed_at"));
      if (!closed) throw TriageError(ErrorKind::kSchema, "artifact: bad closed_at");
      r.closed_at = *closed;
    }
    r.status = Get<std::string>(j, "status");
    r.resolution = Get<std::string>(j, "resolution");
    r.assignee = Get<std::string>(j, "assignee");
    if (!j.at("time_spent_hours").is_null()) {
      r.time_spent_hours = Get<double>(j, "time_spent_hours");
    }
    r.description = Get<std::string>(j, "description");
    r.issue_type = Get<std::string>(j, "issue_type");
    dataset.reports.push_back(std::move(r));
  }
  return dataset;
}

Json LdaConfigToJson(const LdaConfig& config) {
  Json j = Json::object();
  j["num_topics"] = config.num_topics;
  j["alpha"] = config.alpha ? Json(*config.alpha) : Json(nullptr);
  j["beta"] = config.beta;
  j["iterations"] = config.iterations;
  j["burn_in"] = config.burn_in;
  j["seed"] = config.seed;
  j["average_theta"] = config.average_theta;
  return j;
}

LdaConfig LdaConfigFromJson(const Json& j) {
  LdaConfig config;
  config.num_topics = Get<int>(j, "num_topics");
  if (!j.at("alpha").is_null()) config.alpha = Get<double>(j, "alpha");
  config.beta = Get<double>(j, "beta");
  config.iterations = Get<int>(j, "iterations");
  config.burn_in = Get<int>(j, "burn_in");
  config.seed = Get<std::uint64_t>(j, "seed");
  config.average_theta = Get<bool>(j, "average_theta");
  return config;
}

Json ModelToJson(const TrainedPipeline& trained, int top_words) {
  Json doc = Header("model");
  doc["lda"] = LdaConfigToJson(trained.model.config);
  doc["vocabulary_hash"] = HexU64(trained.vocabulary.Hash());
  doc["vocabulary"] = trained.vocabulary.tokens();
  doc["document_frequency"] = trained.vocabulary.document_frequency();
  doc["topic_word_counts"] = GridToJson(trained.model.topic_word_counts);
  doc["topic_totals"] = trained.model.topic_totals;
  Json summaries = Json::array();
  for (int k = 0; k < trained.model.num_topics(); ++k) {
    Json words = Json::array();
    for (const TokenId w : TopWords(trained.model, k, top_words)) {
      words.push_back(trained.vocabulary.Token(w));
    }
    summaries.push_back(std::move(words));
  }
  doc["top_words"] = std::move(summaries);
  Json curve = Json::array();
  for (const auto& c : trained.coherence) {
    curve.push_back(Json{{"topics", c.num_topics}, {"coherence", c.coherence}});
  }
  doc["coherence"] = std::move(curve);
  doc["developers"] = trained.developers;
  doc["train_reports"] = trained.train_reports;
  return doc;
}

Json ScoresToJson(const ScoreMatrix& scores) {
  Json doc = Header("scores");
  doc["developers"] = scores.developers();
  doc["topics"] = scores.num_topics();
  doc["scores"] = GridToJson(scores.scores());
  doc["support"] = GridToJson(scores.support());
  return doc;
}

ScoreMatrix ScoresFromJson(const Json& doc) {
  RequireArtifact(doc, "scores");
  auto developers = Get<std::vector<std::string>>(doc, "developers");
  const int topics = Get<int>(doc, "topics");
  if (topics < 1) throw TriageError(ErrorKind::kSchema, "artifact: topics must be >= 1");
  auto scores = GridFromJson<double>(doc.at("scores"), developers.size(), topics, "scores");
  auto support = GridFromJson<int>(doc.at("support"), developers.size(), topics, "support");
  try {
    return ScoreMatrix(std::move(developers), topics, std::move(scores), std::move(support));
  } catch (const TriageError& e) {
    throw TriageError(ErrorKind::kSchema, std::string("artifact: ") + e.what());
  }
}

TrainedPipeline TrainedFromJson(const Json& model_doc, const Json& scores_doc) {
  RequireArtifact(model_doc, "model");
  TrainedPipeline trained;
  trained.model.config = LdaConfigFromJson(model_doc.at("lda"));
  trained.vocabulary =
      Vocabulary::FromTokens(Get<std::vector<std::string>>(model_doc, "vocabulary"),
                             Get<std::vector<int>>(model_doc, "document_frequency"));
  if (HexU64(trained.vocabulary.Hash()) != Get<std::string>(model_doc, "vocabulary_hash")) {
    throw TriageError(ErrorKind::kSchema, "artifact: vocabulary hash mismatch");
  }
  const int K = trained.model.config.num_topics;
  trained.model.vocabulary_size = trained.vocabulary.size();
  trained.model.topic_word_counts = GridFromJson<int>(
      model_doc.at("topic_word_counts"), K, trained.vocabulary.size(), "topic_word_counts");
  trained.model.topic_totals = Get<std::vector<int>>(model_doc, "topic_totals");
  if (trained.model.topic_totals.size() != static_cast<std::size_t>(K)) {
    throw TriageError(ErrorKind::kSchema, "artifact: bad shape for topic_totals");
  }
  for (const auto& c : model_doc.at("coherence")) {
    trained.coherence.push_back({Get<int>(c, "topics"), Get<double>(c, "coherence")});
  }
  trained.developers = Get<std::vector<std::string>>(model_doc, "developers");
  trained.train_reports = Get<std::size_t>(model_doc, "train_reports");
  trained.scores = ScoresFromJson(scores_doc);
  if (trained.scores.num_topics() != K || trained.scores.developers() != trained.developers) {
    throw TriageError(ErrorKind::kSchema, "artifact: score matrix does not match the model");
  }
  return trained;
}

Json PlanToJson(const AssignmentPlan& plan) {
  Json doc = Header("assignment_plan");
  Json assignments = Json::array();
  for (const auto& a : plan.assignments) {
    Json j = Json::object();
    j["bug_id"] = a.bug_id;
    j["developer"] = a.developer;
    j["topic"] = a.topic;
    j["predicted_hours"] = a.predicted_hours;
    assignments.push_back(std::move(j));
  }
  doc["assignments"] = std::move(assignments);
  Json load = Json::object();
  for (const auto& [dev, count] : plan.load) load[dev] = count;
  doc["load"] = std::move(load);
  doc["batches"] = plan.batches;
  return doc;
}

AssignmentPlan PlanFromJson(const Json& doc) {
  RequireArtifact(doc, "assignment_plan");
  AssignmentPlan plan;
  for (const auto& j : doc.at("assignments")) {
    plan.assignments.push_back({Get<std::string>(j, "bug_id"), Get<std::string>(j, "developer"),
                                Get<int>(j, "topic"), Get<double>(j, "predicted_hours")});
  }
  for (const auto& [dev, count] : doc.at("load").items()) plan.load[dev] = count.get<int>();
  plan.batches = Get<int>(doc, "batches");
  return plan;
}

Json FoldReportToJson(const FoldReport& f) {
  Json j = Json::object();
  j["fold_index"] = f.fold_index;
  j["train_size"] = f.train_size;
  j["test_size"] = f.test_size;
  j["selected_topics"] = f.selected_topics;
  Json curve = Json::array();
  for (const auto& c : f.coherence) {
    curve.push_back(Json{{"topics", c.num_topics}, {"coherence", c.coherence}});
  }
  j["coherence"] = std::move(curve);
  j["developer_count"] = f.developer_count;
  j["batches"] = f.batches;
  j["real_total_hours"] = f.real_total_hours;
  j["predicted_total_hours"] = f.predicted_total_hours;
  j["time_reduction_pct"] = f.time_reduction_pct;
  j["optimized_load"] = LoadToJson(f.optimized_load);
  j["real_load"] = LoadToJson(f.real_load);
  j["model_fingerprint"] = HexU64(f.model_fingerprint);
  return j;
}

Json EvaluationToJson(const EvaluationResult& result) {
  Json doc = Header("evaluation");
  doc["note"] =
      "predicted_total_hours sums historical per-topic mean fixing times of the "
      "assigned developers; it is a model estimate, not an observed duration.";
  Json folds = Json::array();
  for (const auto& f : result.folds) folds.push_back(FoldReportToJson(f));
  doc["folds"] = std::move(folds);
  Json failures = Json::array();
  for (const auto& f : result.failures) {
    failures.push_back(
        Json{{"fold_index", f.fold_index}, {"kind", ToString(f.kind)}, {"message", f.message}});
  }
  doc["failures"] = std::move(failures);
  Json summary = Json::object();
  summary["completed_folds"] = result.summary.completed_folds;
  summary["failed_folds"] = result.summary.failed_folds;
  summary["mean_time_reduction_pct"] = result.summary.mean_time_reduction_pct;
  summary["worst_load_spread"] = result.summary.worst_load_spread;
  summary["worst_real_load_spread"] = result.summary.worst_real_load_spread;
  doc["summary"] = std::move(summary);
  return doc;
}

std::string EvaluationToCsv(const EvaluationResult& result) {
  std::ostringstream out;
  out << "fold_index,train_size,test_size,selected_topics,developer_count,batches,"
         "real_total_hours,predicted_total_hours,time_reduction_pct,"
         "optimized_load_min,optimized_load_max,optimized_load_mean,"
         "real_load_min,real_load_max,real_load_mean\n";
  for (const auto& f : result.folds) {
    out << f.fold_index << ',' << f.train_size << ',' << f.test_size << ','
        << f.selected_topics << ',' << f.developer_count << ',' << f.batches << ','
        << Json(f.real_total_hours).dump() << ',' << Json(f.predicted_total_hours).dump()
        << ',' << Json(f.time_reduction_pct).dump() << ',' << f.optimized_load.min << ','
        << f.optimized_load.max << ',' << Json(f.optimized_load.mean).dump() << ','
        << f.real_load.min << ',' << f.real_load.max << ','
        << Json(f.real_load.mean).dump() << '\n';
  }
  return out.str();
}

Json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TriageError(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw TriageError(ErrorKind::kSchema,
                      "'" + path.string() + "' is not valid json: " + e.what());
  }
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TriageError(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw TriageError(ErrorKind::kIo, "error writing '" + path.string() + "'");
}

void WriteJsonFile(const std::filesystem::path& path, const Json& doc) {
  WriteTextFile(path, doc.dump(2) + "\n");
}

}  // namespace triage::artifacts
