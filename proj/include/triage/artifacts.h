#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "triage/assignment.h"
#include "triage/evaluation.h"
#include "triage/ingestion.h"
#include "triage/scoring.h"

// JSON forms of everything the command-line tool reads or writes. Every
// artifact carries "schema_version" and "kind"; readers reject mismatches.
namespace triage::artifacts {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// Throws kSchema unless `doc` is an object of this kind and schema version.
void RequireArtifact(const Json& doc, std::string_view kind);

Json DatasetToJson(const Dataset& dataset);
Dataset DatasetFromJson(const Json& doc);

Json LdaConfigToJson(const LdaConfig& config);
LdaConfig LdaConfigFromJson(const Json& doc);

// Model artifact: LDA config, vocabulary (+ hash), topic-word counts, per-topic
// top words, the coherence curve and eligible developers. Enough to label new
// reports exactly as the training run would.
Json ModelToJson(const TrainedPipeline& trained, int top_words = kDefaultCoherenceTopN);

Json ScoresToJson(const ScoreMatrix& scores);
ScoreMatrix ScoresFromJson(const Json& doc);

// Inverse of ModelToJson + ScoresToJson. Document-level LDA state is not
// restored.
TrainedPipeline TrainedFromJson(const Json& model_doc, const Json& scores_doc);

// {"assignments": [{bug_id, developer, topic, predicted_hours}], "load": {...},
//  "batches": n} plus the artifact header.
Json PlanToJson(const AssignmentPlan& plan);
AssignmentPlan PlanFromJson(const Json& doc);

Json FoldReportToJson(const FoldReport& fold);
Json EvaluationToJson(const EvaluationResult& result);

// One line per completed fold.
std::string EvaluationToCsv(const EvaluationResult& result);

Json ReadJsonFile(const std::filesystem::path& path);
// Writes `doc` with two-space indentation and a trailing newline.
void WriteJsonFile(const std::filesystem::path& path, const Json& doc);
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

std::string HexU64(std::uint64_t value);

}  // namespace triage::artifacts
