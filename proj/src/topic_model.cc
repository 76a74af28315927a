#include "triage/topic_model.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "triage/errors.h"
#include "triage/hash.h"

namespace triage {
namespace {

// mt19937_64 output is fixed by the standard; the distributions in <random>
// are not, so draws are derived by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  int Below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

 private:
  std::mt19937_64 engine_;
};

int SampleIndex(std::span<const double> cumulative, double u) {
  const double target = u * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  return static_cast<int>(
      std::min<std::ptrdiff_t>(it - cumulative.begin(), cumulative.size() - 1));
}

void SmoothedTheta(std::span<const int> counts, int length, double alpha,
                   std::span<double> out) {
  const double denom = length + static_cast<double>(counts.size()) * alpha;
  for (std::size_t k = 0; k < counts.size(); ++k) out[k] = (counts[k] + alpha) / denom;
}

void Invariant(bool ok, const std::string& what) {
  if (!ok) throw TriageError(ErrorKind::kInvariant, what);
}

}  // namespace

void LdaConfig::Validate() const {
  if (num_topics < 1) {
    throw TriageError(ErrorKind::kInvalidArgument, "lda: topic count must be >= 1");
  }
  if (!(EffectiveAlpha() > 0.0) || !std::isfinite(EffectiveAlpha())) {
    throw TriageError(ErrorKind::kInvalidArgument, "lda: alpha must be > 0");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw TriageError(ErrorKind::kInvalidArgument, "lda: beta must be > 0");
  }
  if (iterations < 1) {
    throw TriageError(ErrorKind::kInvalidArgument, "lda: iterations must be >= 1");
  }
  if (burn_in < 0 || burn_in >= iterations) {
    throw TriageError(ErrorKind::kInvalidArgument,
                      "lda: burn_in must be in [0, iterations)");
  }
}

void CheckModelInvariants(const TopicModel& model,
                          std::span<const TokenizedDocument> documents) {
  const auto K = static_cast<std::size_t>(model.num_topics());
  Invariant(model.topic_word_counts.rows() == K, "topic_word_counts has wrong row count");
  Invariant(model.topic_totals.size() == K, "topic_totals has wrong size");
  for (std::size_t k = 0; k < K; ++k) {
    const auto row = model.topic_word_counts.row(k);
    Invariant(std::all_of(row.begin(), row.end(), [](int c) { return c >= 0; }),
              "negative topic-word count");
    Invariant(std::accumulate(row.begin(), row.end(), 0) == model.topic_totals[k],
              "topic_totals[" + std::to_string(k) + "] != row sum");
  }
  Invariant(model.doc_topic_counts.rows() == documents.size() &&
                model.assignments.size() == documents.size() &&
                model.theta.rows() == documents.size(),
            "document-level state does not match the corpus");

  Grid<int> recount(K, model.vocabulary_size, 0);
  for (std::size_t m = 0; m < documents.size(); ++m) {
    const auto& tokens = documents[m].tokens;
    const auto& z = model.assignments[m];
    Invariant(z.size() == tokens.size(), "z length differs from document length");
    std::vector<int> per_topic(K, 0);
    for (std::size_t i = 0; i < z.size(); ++i) {
      Invariant(z[i] >= 0 && static_cast<std::size_t>(z[i]) < K, "z out of range");
      ++per_topic[z[i]];
      ++recount(z[i], tokens[i]);
    }
    const auto row = model.doc_topic_counts.row(m);
    Invariant(std::equal(row.begin(), row.end(), per_topic.begin()),
              "doc_topic_counts disagrees with z in document " + std::to_string(m));
    Invariant(std::accumulate(row.begin(), row.end(), 0) ==
                  static_cast<int>(tokens.size()),
              "doc_topic_counts row does not sum to document length");

    const auto theta = model.theta.row(m);
    double sum = 0.0;
    for (const double t : theta) {
      Invariant(t > 0.0, "theta entry not positive");
      sum += t;
    }
    Invariant(std::abs(sum - 1.0) <= 1e-9, "theta row does not sum to 1");
  }
  Invariant(recount == model.topic_word_counts, "topic_word_counts disagree with z");
}

TopicModel FitLda(std::span<const TokenizedDocument> documents,
                  std::size_t vocabulary_size, const LdaConfig& config) {
  config.Validate();
  if (documents.empty()) throw TriageError(ErrorKind::kEmptyData, "lda: empty corpus");
  for (const auto& doc : documents) {
    if (doc.tokens.empty()) {
      throw TriageError(ErrorKind::kInvalidArgument,
                        "lda: document '" + doc.bug_id + "' is empty");
    }
    for (const TokenId w : doc.tokens) {
      if (w >= vocabulary_size) {
        throw TriageError(ErrorKind::kInvalidArgument,
                          "lda: token id out of vocabulary range in '" + doc.bug_id + "'");
      }
    }
  }

  const int K = config.num_topics;
  const std::size_t M = documents.size();
  const std::size_t V = vocabulary_size;
  const double alpha = config.EffectiveAlpha();
  const double beta = config.beta;
  const double v_beta = static_cast<double>(V) * beta;

  TopicModel model;
  model.config = config;
  model.vocabulary_size = V;
  model.doc_topic_counts = Grid<int>(M, K, 0);
  model.topic_word_counts = Grid<int>(K, V, 0);
  model.topic_totals.assign(K, 0);
  model.theta = Grid<double>(M, K, 0.0);
  model.assignments.resize(M);
  model.doc_ids.reserve(M);

  Rng rng(config.seed);
  for (std::size_t m = 0; m < M; ++m) {
    model.doc_ids.push_back(documents[m].bug_id);
    auto& z = model.assignments[m];
    z.resize(documents[m].tokens.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const int k = rng.Below(K);
      z[i] = k;
      ++model.doc_topic_counts(m, k);
      ++model.topic_word_counts(k, documents[m].tokens[i]);
      ++model.topic_totals[k];
    }
  }

  Grid<double> theta_sum;
  int averaged_sweeps = 0;
  if (config.average_theta) theta_sum = Grid<double>(M, K, 0.0);
  std::vector<double> cumulative(K);
  std::vector<double> row(K);

  for (int sweep = 0; sweep < config.iterations; ++sweep) {
    for (std::size_t m = 0; m < M; ++m) {
      const auto& tokens = documents[m].tokens;
      auto& z = model.assignments[m];
      auto doc_counts = model.doc_topic_counts.row(m);
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const TokenId w = tokens[i];
        const int old_k = z[i];
        --doc_counts[old_k];
        --model.topic_word_counts(old_k, w);
        --model.topic_totals[old_k];

        double acc = 0.0;
        for (int k = 0; k < K; ++k) {
          acc += (doc_counts[k] + alpha) * (model.topic_word_counts(k, w) + beta) /
                 (model.topic_totals[k] + v_beta);
          cumulative[k] = acc;
        }
        const int new_k = SampleIndex(cumulative, rng.Uniform());

        z[i] = new_k;
        ++doc_counts[new_k];
        ++model.topic_word_counts(new_k, w);
        ++model.topic_totals[new_k];
      }
    }
#ifndef NDEBUG
    for (std::size_t m = 0; m < M; ++m) {
      const auto counts = model.doc_topic_counts.row(m);
      assert(std::accumulate(counts.begin(), counts.end(), std::size_t{0}) ==
             documents[m].tokens.size());
    }
#endif
    if (config.average_theta && sweep >= config.burn_in) {
      for (std::size_t m = 0; m < M; ++m) {
        SmoothedTheta(model.doc_topic_counts.row(m),
                      static_cast<int>(documents[m].tokens.size()), alpha, row);
        auto acc_row = theta_sum.row(m);
        for (int k = 0; k < K; ++k) acc_row[k] += row[k];
      }
      ++averaged_sweeps;
    }
  }

  for (std::size_t m = 0; m < M; ++m) {
    auto out = model.theta.row(m);
    if (config.average_theta && averaged_sweeps > 0) {
      const auto acc_row = theta_sum.row(m);
      double total = 0.0;
      for (int k = 0; k < K; ++k) total += acc_row[k];
      for (int k = 0; k < K; ++k) out[k] = acc_row[k] / total;
    } else {
      SmoothedTheta(model.doc_topic_counts.row(m),
                    static_cast<int>(documents[m].tokens.size()), alpha, out);
    }
  }
  return model;
}

std::vector<TokenId> TopWords(const TopicModel& model, int topic, int top_n) {
  const auto counts = model.topic_word_counts.row(topic);
  std::vector<TokenId> ids(counts.size());
  std::iota(ids.begin(), ids.end(), TokenId{0});
  const auto n = std::min<std::size_t>(std::max(top_n, 0), ids.size());
  std::partial_sort(ids.begin(), ids.begin() + n, ids.end(), [&](TokenId a, TokenId b) {
    return counts[a] != counts[b] ? counts[a] > counts[b] : a < b;
  });
  ids.resize(n);
  return ids;
}

double UMassCoherence(const TopicModel& model,
                      std::span<const TokenizedDocument> documents, int top_n) {
  const int n = std::min<int>(top_n, static_cast<int>(model.vocabulary_size));
  if (n < 2) return 0.0;

  // Inverted index: sorted document ids per word.
  std::vector<std::vector<std::uint32_t>> postings(model.vocabulary_size);
  for (std::uint32_t d = 0; d < documents.size(); ++d) {
    std::vector<TokenId> unique = documents[d].tokens;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (const TokenId w : unique) {
      if (w < postings.size()) postings[w].push_back(d);
    }
  }
  const auto co_count = [&](TokenId a, TokenId b) {
    const auto& pa = postings[a];
    const auto& pb = postings[b];
    std::size_t i = 0, j = 0, both = 0;
    while (i < pa.size() && j < pb.size()) {
      if (pa[i] < pb[j]) {
        ++i;
      } else if (pb[j] < pa[i]) {
        ++j;
      } else {
        ++both, ++i, ++j;
      }
    }
    return static_cast<double>(both);
  };

  double total = 0.0;
  for (int k = 0; k < model.num_topics(); ++k) {
    const std::vector<TokenId> top = TopWords(model, k, n);
    double score = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        // Guard against a zero denominator for words absent from `documents`.
        const double dj = std::max<double>(1.0, postings[top[j]].size());
        score += std::log((co_count(top[i], top[j]) + 1.0) / dj);
      }
    }
    total += score;
  }
  return total / model.num_topics();
}

TopicSelection SelectTopicCount(std::span<const TokenizedDocument> documents,
                                std::size_t vocabulary_size, int k_min, int k_max,
                                const LdaConfig& base_config, int top_n) {
  if (k_min < 1 || k_max < k_min) {
    throw TriageError(ErrorKind::kInvalidArgument,
                      "topic search: need 1 <= k_min <= k_max");
  }
  TopicSelection selection;
  for (int k = k_min; k <= k_max; ++k) {
    LdaConfig config = base_config;
    config.num_topics = k;
    TopicModel model = FitLda(documents, vocabulary_size, config);
    const double coherence = UMassCoherence(model, documents, top_n);
    selection.scores.push_back({k, coherence});
    if (selection.best_num_topics == 0 ||
        coherence > selection.scores[selection.best_num_topics - k_min].coherence) {
      selection.best_num_topics = k;
      selection.best_model = std::move(model);
    }
  }
  return selection;
}

TopicLabel LabelFromTheta(std::string bug_id, std::span<const double> theta_row) {
  TopicLabel label;
  label.bug_id = std::move(bug_id);
  label.topic = 0;
  label.weight = theta_row.empty() ? 0.0 : theta_row[0];
  for (std::size_t k = 1; k < theta_row.size(); ++k) {
    if (theta_row[k] > label.weight) {
      label.topic = static_cast<int>(k);
      label.weight = theta_row[k];
    }
  }
  return label;
}

std::vector<double> InferHeldoutTheta(const TopicModel& model,
                                      const TokenizedDocument& document, int sweeps) {
  const int K = model.num_topics();
  std::vector<TokenId> tokens;
  tokens.reserve(document.tokens.size());
  for (const TokenId w : document.tokens) {
    if (w < model.vocabulary_size) tokens.push_back(w);
  }
  if (tokens.empty()) return std::vector<double>(K, 1.0 / K);

  const double alpha = model.config.EffectiveAlpha();
  const double beta = model.config.beta;
  const double v_beta = static_cast<double>(model.vocabulary_size) * beta;
  Rng rng(Mix64(Fnv1a(document.bug_id, Mix64(model.config.seed))));

  std::vector<int> counts(K, 0);
  std::vector<int> z(tokens.size());
  for (auto& k : z) {
    k = rng.Below(K);
    ++counts[k];
  }
  std::vector<double> cumulative(K);
  for (int s = 0; s < std::max(sweeps, 1); ++s) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      --counts[z[i]];
      double acc = 0.0;
      for (int k = 0; k < K; ++k) {
        acc += (counts[k] + alpha) * (model.topic_word_counts(k, tokens[i]) + beta) /
               (model.topic_totals[k] + v_beta);
        cumulative[k] = acc;
      }
      z[i] = SampleIndex(cumulative, rng.Uniform());
      ++counts[z[i]];
    }
  }
  std::vector<double> theta(K);
  SmoothedTheta(counts, static_cast<int>(tokens.size()), alpha, theta);
  return theta;
}

std::vector<TopicLabel> LabelDocuments(const TopicModel& model,
                                       std::span<const TokenizedDocument> documents,
                                       int fold_in_sweeps) {
  std::unordered_map<std::string_view, std::size_t> fitted;
  for (std::size_t m = 0; m < model.doc_ids.size() && m < model.theta.rows(); ++m) {
    fitted.emplace(model.doc_ids[m], m);
  }
  const int K = model.num_topics();
  std::vector<TopicLabel> labels;
  labels.reserve(documents.size());
  for (const auto& doc : documents) {
    if (doc.tokens.empty()) {
      labels.push_back({doc.bug_id, 0, 1.0 / K});
    } else if (const auto it = fitted.find(doc.bug_id); it != fitted.end()) {
      labels.push_back(LabelFromTheta(doc.bug_id, model.theta.row(it->second)));
    } else {
      const auto theta = InferHeldoutTheta(model, doc, fold_in_sweeps);
      labels.push_back(LabelFromTheta(doc.bug_id, theta));
    }
  }
  return labels;
}

}  // namespace triage
