#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "triage/grid.h"
#include "triage/text_pipeline.h"

namespace triage {

struct LdaConfig {
  int num_topics = 1;
  // Document-topic concentration; unset means 50 / num_topics.
  std::optional<double> alpha;
  // Topic-word concentration.
  double beta = 0.01;
  int iterations = 1000;
  int burn_in = 200;
  std::uint64_t seed = 42;
  // When set, theta is the mean of the per-sweep smoothed estimates over the
  // sweeps after burn_in instead of the final-sweep estimate.
  bool average_theta = false;

  double EffectiveAlpha() const { return alpha ? *alpha : 50.0 / num_topics; }

  // Throws kInvalidArgument on K < 1, non-positive alpha/beta, iterations < 1
  // or burn_in outside [0, iterations).
  void Validate() const;
};

// Fitted collapsed-Gibbs LDA state. Document-level fields (doc_ids,
// doc_topic_counts, theta, assignments) are empty for a model reloaded from
// an artifact; such a model still supports held-out inference.
struct TopicModel {
  LdaConfig config;
  std::size_t vocabulary_size = 0;
  std::vector<std::string> doc_ids;
  Grid<int> doc_topic_counts;    // M x K
  Grid<int> topic_word_counts;   // K x V
  std::vector<int> topic_totals;  // K
  Grid<double> theta;            // M x K
  std::vector<std::vector<int>> assignments;  // z, one topic per token

  int num_topics() const { return config.num_topics; }
};

// Throws kInvariant if any count identity or theta normalization fails:
// doc rows sum to document lengths, topic_totals are topic_word_counts row
// sums, z matches the counts, theta rows are positive and sum to 1 +- 1e-9.
void CheckModelInvariants(const TopicModel& model,
                          std::span<const TokenizedDocument> documents);

// Collapsed Gibbs sampling. Every document must be nonempty and every token
// id below `vocabulary_size`.
TopicModel FitLda(std::span<const TokenizedDocument> documents,
                  std::size_t vocabulary_size, const LdaConfig& config);

// Word ids of topic k ordered by descending topic count, ties by ascending id.
std::vector<TokenId> TopWords(const TopicModel& model, int topic, int top_n);

inline constexpr int kDefaultCoherenceTopN = 10;

// UMass coherence averaged over topics. For each topic the top_n words
// w_1..w_n (descending count) contribute sum_{i<j} log((D(w_i, w_j) + 1) / D(w_j))
// where D counts documents of `documents` containing the word(s). top_n is
// clipped to the vocabulary size; a single-word vocabulary scores 0.
double UMassCoherence(const TopicModel& model,
                      std::span<const TokenizedDocument> documents, int top_n);

struct TopicCountScore {
  int num_topics = 0;
  double coherence = 0.0;
};

struct TopicSelection {
  int best_num_topics = 0;
  std::vector<TopicCountScore> scores;
  TopicModel best_model;
};

inline constexpr int kDefaultMinTopics = 1;
inline constexpr int kDefaultMaxTopics = 15;

// Fits one model per K in [k_min, k_max] with the same seed and keeps the
// most coherent. Ties go to the smaller K.
TopicSelection SelectTopicCount(std::span<const TokenizedDocument> documents,
                                std::size_t vocabulary_size, int k_min, int k_max,
                                const LdaConfig& base_config,
                                int top_n = kDefaultCoherenceTopN);

struct TopicLabel {
  std::string bug_id;
  int topic = 0;
  double weight = 0.0;
};

// Argmax of a theta row; ties go to the smaller topic index.
TopicLabel LabelFromTheta(std::string bug_id, std::span<const double> theta_row);

inline constexpr int kDefaultFoldInSweeps = 50;

// Topic distribution for a document outside the training set. Runs Gibbs
// sweeps over this document only while topic-word counts stay fixed. The
// generator is seeded from (config.seed, bug_id). Out-of-vocabulary tokens are
// ignored; an empty document yields the uniform row.
std::vector<double> InferHeldoutTheta(const TopicModel& model,
                                      const TokenizedDocument& document,
                                      int sweeps = kDefaultFoldInSweeps);

// Labels documents: fitted documents (matched by bug id) use their theta row,
// empty documents get topic 0 with weight 1/K, anything else is folded in.
std::vector<TopicLabel> LabelDocuments(const TopicModel& model,
                                       std::span<const TokenizedDocument> documents,
                                       int fold_in_sweeps = kDefaultFoldInSweeps);

}  // namespace triage
