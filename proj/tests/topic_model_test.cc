#include "triage/topic_model.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "support/synthetic.h"
#include "triage/errors.h"

namespace triage {
namespace {

TokenizedDocument Doc(std::string id, std::vector<TokenId> tokens) {
  return {std::move(id), std::move(tokens), false};
}

LdaConfig Config(int k, double alpha = 0.1, int iterations = 300) {
  LdaConfig c;
  c.num_topics = k;
  c.alpha = alpha;
  c.iterations = iterations;
  c.burn_in = iterations / 5;
  c.seed = 42;
  return c;
}

// Single-topic model whose topic ranks words by the given counts.
TopicModel FixedTopic(std::vector<int> counts) {
  TopicModel m;
  m.config.num_topics = 1;
  m.vocabulary_size = counts.size();
  m.topic_word_counts = Grid<int>(1, counts.size());
  for (std::size_t w = 0; w < counts.size(); ++w) m.topic_word_counts(0, w) = counts[w];
  m.topic_totals = {std::accumulate(counts.begin(), counts.end(), 0)};
  return m;
}

std::vector<int> Labels(const TopicModel& model) {
  std::vector<int> out;
  for (std::size_t d = 0; d < model.theta.rows(); ++d) {
    out.push_back(LabelFromTheta(model.doc_ids[d], model.theta.row(d)).topic);
  }
  return out;
}

// Three planted topics, vocabulary built through the real text pipeline.
struct ThreeTopics {
  Corpus corpus;
  std::vector<int> planted;
};

ThreeTopics MakeThreeTopics() {
  testing::StreamSpec spec;
  spec.developers = 3;
  spec.topics = 3;
  spec.reports = 90;
  spec.seed = 5;
  spec.hours = Grid<double>(3, 3, 1.0);
  const auto reports = testing::GenerateStream(spec);
  return {BuildCorpus(reports, DefaultStoplist(), 2), testing::PlantedTopics(spec)};
}

TEST(LdaConfigTest, Validation) {
  EXPECT_NO_THROW(Config(3).Validate());
  LdaConfig c = Config(0);
  EXPECT_THROW(c.Validate(), TriageError);
  c = Config(2, -1.0);
  EXPECT_THROW(c.Validate(), TriageError);
  c = Config(2);
  c.beta = 0.0;
  EXPECT_THROW(c.Validate(), TriageError);
  c = Config(2);
  c.burn_in = c.iterations;
  EXPECT_THROW(c.Validate(), TriageError);
  LdaConfig defaults;
  defaults.num_topics = 10;
  EXPECT_DOUBLE_EQ(defaults.EffectiveAlpha(), 5.0);
}

TEST(FitLdaTest, SingleTopicIsDegenerate) {
  const std::vector<TokenizedDocument> docs = {Doc("a", {0, 1, 2}), Doc("b", {2, 2}),
                                               Doc("c", {1})};
  const TopicModel m = FitLda(docs, 3, Config(1, 0.5, 20));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    EXPECT_EQ(m.theta(d, 0), 1.0);
    for (const int z : m.assignments[d]) EXPECT_EQ(z, 0);
  }
  EXPECT_EQ(m.topic_word_counts(0, 2), 3);
}

TEST(FitLdaTest, RecoversTwoPlantedClusters) {
  const auto planted = testing::TwoClusterCorpus(50, 20, 30, 7);
  const TopicModel m = FitLda(planted.documents, planted.vocabulary_size, Config(2));
  EXPECT_GE(testing::ClusterPurity(planted.cluster, Labels(m)), 0.9);
}

TEST(FitLdaTest, CountInvariantsHold) {
  const auto planted = testing::TwoClusterCorpus(30, 15, 25, 3);
  for (int k = 1; k <= 5; ++k) {
    LdaConfig c = Config(k, 0.3, 60);
    c.average_theta = k % 2 == 0;
    const TopicModel m = FitLda(planted.documents, planted.vocabulary_size, c);
    EXPECT_NO_THROW(CheckModelInvariants(m, planted.documents));
    for (std::size_t d = 0; d < planted.documents.size(); ++d) {
      int row = 0;
      double theta = 0.0;
      for (int t = 0; t < k; ++t) {
        row += m.doc_topic_counts(d, t);
        theta += m.theta(d, t);
        EXPECT_GT(m.theta(d, t), 0.0);
      }
      EXPECT_EQ(row, static_cast<int>(planted.documents[d].tokens.size()));
      EXPECT_NEAR(theta, 1.0, 1e-9);
    }
    for (int t = 0; t < k; ++t) {
      const auto counts = m.topic_word_counts.row(t);
      EXPECT_EQ(std::accumulate(counts.begin(), counts.end(), 0), m.topic_totals[t]);
    }
  }
}

TEST(FitLdaTest, CorruptedModelFailsInvariantCheck) {
  const auto planted = testing::TwoClusterCorpus(5, 4, 6, 1);
  TopicModel m = FitLda(planted.documents, planted.vocabulary_size, Config(2, 0.5, 10));
  ++m.topic_totals[0];
  try {
    CheckModelInvariants(m, planted.documents);
    FAIL();
  } catch (const TriageError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvariant);
  }
}

TEST(FitLdaTest, Deterministic) {
  const auto planted = testing::TwoClusterCorpus(20, 10, 15, 9);
  const TopicModel a = FitLda(planted.documents, planted.vocabulary_size, Config(3));
  const TopicModel b = FitLda(planted.documents, planted.vocabulary_size, Config(3));
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.topic_word_counts, b.topic_word_counts);
  EXPECT_EQ(a.theta, b.theta);
}

TEST(FitLdaTest, RejectsBadInput) {
  const std::vector<TokenizedDocument> empty_doc = {Doc("a", {0}), Doc("b", {})};
  EXPECT_THROW(FitLda(empty_doc, 1, Config(2)), TriageError);
  const std::vector<TokenizedDocument> oov = {Doc("a", {5})};
  EXPECT_THROW(FitLda(oov, 2, Config(2)), TriageError);
  EXPECT_THROW(FitLda({}, 2, Config(2)), TriageError);
  EXPECT_THROW(FitLda(oov, 6, Config(0)), TriageError);
}

TEST(TopWordsTest, DescendingCountThenId) {
  const TopicModel m = FixedTopic({3, 7, 3, 0, 9});
  EXPECT_EQ(TopWords(m, 0, 4), (std::vector<TokenId>{4, 1, 0, 2}));
  EXPECT_EQ(TopWords(m, 0, 99).size(), 5u);
}

TEST(UMassCoherenceTest, FullCooccurrenceClosedForm) {
  // Both words in each of d = 4 documents.
  const TopicModel m = FixedTopic({5, 3});
  std::vector<TokenizedDocument> docs;
  for (int i = 0; i < 4; ++i) docs.push_back(Doc("d" + std::to_string(i), {0, 1}));
  EXPECT_NEAR(UMassCoherence(m, docs, 2), std::log(5.0 / 4.0), 1e-12);
}

TEST(UMassCoherenceTest, NeverCooccurringClosedForm) {
  const TopicModel m = FixedTopic({5, 3});
  std::vector<TokenizedDocument> docs;
  for (int i = 0; i < 10; ++i) docs.push_back(Doc("b" + std::to_string(i), {1}));
  docs.push_back(Doc("a", {0}));
  EXPECT_NEAR(UMassCoherence(m, docs, 2), std::log(1.0 / 10.0), 1e-12);
  EXPECT_NEAR(UMassCoherence(m, docs, 2), -2.302585, 1e-6);
}

TEST(UMassCoherenceTest, HandCountedToyCorpus) {
  // Order w0, w1, w2. D(w0)=2 D(w1)=2 D(w2)=1, D(w0,w1)=1 D(w0,w2)=1 D(w1,w2)=0.
  // log(2/2) + log(2/1) + log(1/1) = log 2.
  const TopicModel m = FixedTopic({5, 3, 1});
  const std::vector<TokenizedDocument> docs = {Doc("a", {0, 1, 1}), Doc("b", {2, 0}),
                                               Doc("c", {1})};
  EXPECT_NEAR(UMassCoherence(m, docs, 3), std::log(2.0), 1e-12);
  // top_n clipped to V.
  EXPECT_NEAR(UMassCoherence(m, docs, 10), std::log(2.0), 1e-12);
  EXPECT_EQ(UMassCoherence(FixedTopic({4}), docs, 10), 0.0);
}

TEST(SelectTopicCountTest, SingletonRange) {
  const auto planted = testing::TwoClusterCorpus(10, 8, 10, 2);
  const TopicSelection s =
      SelectTopicCount(planted.documents, planted.vocabulary_size, 5, 5, Config(1, 0.1, 30));
  EXPECT_EQ(s.best_num_topics, 5);
  ASSERT_EQ(s.scores.size(), 1u);
  EXPECT_EQ(s.scores[0].num_topics, 5);
  EXPECT_EQ(s.best_model.num_topics(), 5);
}

TEST(SelectTopicCountTest, PlantedCorpusSelectsTwo) {
  const auto planted = testing::TwoClusterCorpus(50, 20, 30, 7);
  const TopicSelection s =
      SelectTopicCount(planted.documents, planted.vocabulary_size, 1, 4, Config(1));
  EXPECT_EQ(s.best_num_topics, 2);
  ASSERT_EQ(s.scores.size(), 4u);
  // Independent re-scoring agrees with the reported curve.
  for (const auto& score : s.scores) {
    LdaConfig c = Config(score.num_topics);
    const TopicModel m = FitLda(planted.documents, planted.vocabulary_size, c);
    EXPECT_EQ(UMassCoherence(m, planted.documents, kDefaultCoherenceTopN), score.coherence);
    if (score.num_topics != s.best_num_topics) {
      EXPECT_LE(score.coherence, s.scores[s.best_num_topics - 1].coherence);
    }
  }
}

TEST(SelectTopicCountTest, RejectsBadRange) {
  const auto planted = testing::TwoClusterCorpus(3, 3, 3, 2);
  EXPECT_THROW(SelectTopicCount(planted.documents, planted.vocabulary_size, 0, 2, Config(1)),
               TriageError);
  EXPECT_THROW(SelectTopicCount(planted.documents, planted.vocabulary_size, 3, 2, Config(1)),
               TriageError);
}

TEST(LabelFromThetaTest, Examples) {
  const std::vector<double> a = {0.1, 0.7, 0.2};
  const TopicLabel la = LabelFromTheta("x", a);
  EXPECT_EQ(la.topic, 1);
  EXPECT_EQ(la.weight, 0.7);
  const std::vector<double> b = {0.5, 0.5};
  EXPECT_EQ(LabelFromTheta("y", b).topic, 0);
}

TEST(InferHeldoutThetaTest, RepeatedTopWordPicksItsTopic) {
  const ThreeTopics data = MakeThreeTopics();
  const auto& docs = data.corpus.documents;
  const TopicModel m = FitLda(docs, data.corpus.vocabulary.size(), Config(3));
  for (int k = 0; k < 3; ++k) {
    const TokenId top = TopWords(m, k, 1)[0];
    const TokenizedDocument doc = Doc("probe" + std::to_string(k), std::vector<TokenId>(20, top));
    const std::vector<double> theta = InferHeldoutTheta(m, doc);
    EXPECT_EQ(LabelFromTheta(doc.bug_id, theta).topic, k);
  }
}

TEST(InferHeldoutThetaTest, EmptyDocumentIsUniform) {
  const auto planted = testing::TwoClusterCorpus(10, 5, 10, 4);
  const TopicModel m = FitLda(planted.documents, planted.vocabulary_size, Config(5, 0.1, 20));
  const std::vector<double> theta = InferHeldoutTheta(m, Doc("e", {}));
  EXPECT_EQ(theta, std::vector<double>(5, 0.2));
  // Out-of-vocabulary ids are ignored.
  EXPECT_EQ(InferHeldoutTheta(m, Doc("o", {999, 1000})), std::vector<double>(5, 0.2));
}

TEST(InferHeldoutThetaTest, RowsNormalizedAndDeterministic) {
  const auto planted = testing::TwoClusterCorpus(20, 10, 15, 8);
  const TopicModel m = FitLda(planted.documents, planted.vocabulary_size, Config(4, 0.2, 50));
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<TokenId> word(0, 19);
  for (int i = 0; i < 50; ++i) {
    std::vector<TokenId> tokens(1 + i % 17);
    for (auto& t : tokens) t = word(rng);
    const TokenizedDocument doc = Doc("r" + std::to_string(i), tokens);
    const std::vector<double> theta = InferHeldoutTheta(m, doc);
    EXPECT_NEAR(std::accumulate(theta.begin(), theta.end(), 0.0), 1.0, 1e-9);
    EXPECT_EQ(theta, InferHeldoutTheta(m, doc));
  }
}

TEST(LabelDocumentsTest, FittedHeldoutAndEmpty) {
  const auto planted = testing::TwoClusterCorpus(20, 10, 20, 6);
  const TopicModel m = FitLda(planted.documents, planted.vocabulary_size, Config(4));
  std::vector<TokenizedDocument> docs = {planted.documents[3], Doc("new", {0, 1, 2, 3}),
                                         Doc("blank", {})};
  docs[2].empty_after_preprocessing = true;
  const std::vector<TopicLabel> labels = LabelDocuments(m, docs);
  ASSERT_EQ(labels.size(), 3u);
  EXPECT_EQ(labels[0].topic, LabelFromTheta("", m.theta.row(3)).topic);
  EXPECT_EQ(labels[0].weight, LabelFromTheta("", m.theta.row(3)).weight);
  EXPECT_EQ(labels[1].topic, LabelFromTheta("", InferHeldoutTheta(m, docs[1])).topic);
  EXPECT_EQ(labels[2].topic, 0);
  EXPECT_EQ(labels[2].weight, 0.25);
  EXPECT_EQ(labels[2].bug_id, "blank");
}

}  // namespace
}  // namespace triage
