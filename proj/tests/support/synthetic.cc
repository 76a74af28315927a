#include "support/synthetic.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace triage::testing {
namespace {

const std::vector<std::vector<std::string>>& AllTopicWords() {
  static const std::vector<std::vector<std::string>> words = {
      {"parser", "lexer", "grammar", "token", "syntax", "compiler", "ast", "node",
       "scanner", "bracket", "quote", "literal"},
      {"render", "sprite", "pixel", "shader", "window", "button", "layout", "font",
       "cursor", "widget", "theme", "icon"},
      {"socket", "packet", "timeout", "proxy", "router", "handshake", "header", "cookie",
       "server", "client", "latency", "port"},
      {"query", "index", "schema", "table", "column", "transaction", "commit", "rollback",
       "replica", "shard", "journal", "backup"},
      {"cipher", "certificate", "password", "login", "permission", "audit", "firewall",
       "key", "hash", "nonce", "signature", "vault"},
      {"linker", "makefile", "dependency", "artifact", "package", "version", "release",
       "pipeline", "docker", "gradle", "maven", "plugin"},
  };
  return words;
}

// Filler that the stop list removes.
const std::vector<std::string>& Filler() {
  static const std::vector<std::string> words = {"the", "when", "in", "is", "after", "a",
                                                 "with", "on", "it", "and"};
  return words;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::string FormatHours(double h) {
  std::ostringstream out;
  out << h;
  return out.str();
}

}  // namespace

const std::vector<std::string>& TopicWords(int topic) {
  return AllTopicWords().at(static_cast<std::size_t>(topic));
}

std::string DeveloperName(int index) {
  static const char* const kNames[] = {"alice", "bob",   "carol", "dave",
                                       "erin",  "frank", "grace", "heidi"};
  if (index < 8) return kNames[index];
  return "dev" + std::to_string(index);
}

namespace {

Grid<double> HoursGrid(std::initializer_list<std::initializer_list<double>> rows) {
  Grid<double> grid(rows.size(), rows.begin()->size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (const double h : row) grid(r, c++) = h;
    ++r;
  }
  return grid;
}

}  // namespace

StreamSpec SlowestStream(std::size_t reports, std::uint64_t seed) {
  StreamSpec spec;
  spec.developers = 4;
  spec.topics = 2;
  spec.reports = reports;
  spec.seed = seed;
  spec.hours = HoursGrid({{2, 9}, {8, 3}, {12, 5}, {4, 14}});
  spec.truth = GroundTruth::kSlowestWithHistory;
  return spec;
}

StreamSpec OptimalStream(std::size_t reports, std::uint64_t seed) {
  StreamSpec spec;
  spec.developers = 3;
  spec.topics = 3;
  spec.reports = reports;
  spec.seed = seed;
  spec.hours = HoursGrid({{2, 9, 7}, {8, 3, 11}, {10, 6, 4}});
  spec.truth = GroundTruth::kFastest;
  spec.topic_blocks = true;
  return spec;
}

StreamSpec SampleStream(std::size_t reports, std::uint64_t seed) {
  StreamSpec spec;
  spec.developers = 5;
  spec.topics = 3;
  spec.reports = reports;
  spec.seed = seed;
  // Each developer is quick on one topic and slow elsewhere.
  spec.hours = HoursGrid({{2, 9, 14}, {11, 3, 8}, {16, 12, 4}, {5, 6, 10}, {9, 15, 6}});
  spec.truth = GroundTruth::kSlowestWithHistory;
  return spec;
}

PipelineConfig QuickPipeline() {
  PipelineConfig config;
  config.min_fixes = 3;
  config.k_min = 1;
  config.k_max = 4;
  config.lda.alpha = 0.1;
  config.lda.iterations = 150;
  config.lda.burn_in = 50;
  config.fold_in_sweeps = 30;
  return config;
}

std::vector<int> PlantedTopics(const StreamSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::vector<int> topics(spec.reports);
  if (spec.topic_blocks) {
    if (spec.topics != spec.developers) {
      throw std::invalid_argument("topic_blocks needs topics == developers");
    }
    std::vector<int> block(spec.topics);
    for (std::size_t i = 0; i < spec.reports; ++i) {
      if (i % spec.topics == 0) {
        std::iota(block.begin(), block.end(), 0);
        std::shuffle(block.begin(), block.end(), rng);
      }
      topics[i] = block[i % spec.topics];
    }
  } else {
    std::uniform_int_distribution<int> pick(0, spec.topics - 1);
    for (auto& t : topics) t = pick(rng);
  }
  return topics;
}

std::vector<BugReport> GenerateStream(const StreamSpec& spec) {
  if (spec.hours.rows() != static_cast<std::size_t>(spec.developers) ||
      spec.hours.cols() != static_cast<std::size_t>(spec.topics)) {
    throw std::invalid_argument("hours grid must be developers x topics");
  }
  const std::vector<int> topics = PlantedTopics(spec);
  std::mt19937_64 rng(spec.seed ^ 0x5eedULL);
  std::uniform_int_distribution<int> word_pick(0, 11);
  std::uniform_int_distribution<int> filler_pick(0, static_cast<int>(Filler().size()) - 1);
  std::bernoulli_distribution add_filler(0.3);

  const auto fastest = [&](int t) {
    int best = 0;
    for (int d = 1; d < spec.developers; ++d) {
      if (spec.hours(d, t) < spec.hours(best, t)) best = d;
    }
    return best;
  };
  const auto slowest = [&](int t) {
    int worst = 0;
    for (int d = 1; d < spec.developers; ++d) {
      if (spec.hours(d, t) > spec.hours(worst, t)) worst = d;
    }
    return worst;
  };
  std::vector<int> rotation(spec.topics, 0);

  const Timestamp base = std::chrono::sys_days{std::chrono::year{2020} / 1 / 1};
  std::vector<BugReport> reports;
  reports.reserve(spec.reports);
  for (std::size_t i = 0; i < spec.reports; ++i) {
    const int t = topics[i];
    int dev = 0;
    switch (spec.truth) {
      case GroundTruth::kFastest:
        dev = fastest(t);
        break;
      case GroundTruth::kSlowest:
        dev = slowest(t);
        break;
      case GroundTruth::kSlowestWithHistory:
        dev = (i % 2 == 1) ? slowest(t) : rotation[t]++ % spec.developers;
        break;
    }
    std::string text;
    for (int w = 0; w < spec.words_per_report; ++w) {
      if (add_filler(rng)) text += Filler()[filler_pick(rng)] + " ";
      text += TopicWords(t)[word_pick(rng)];
      text += w + 1 < spec.words_per_report ? " " : "";
    }
    BugReport r;
    char id[32];
    std::snprintf(id, sizeof(id), "BUG-%05zu", i + 1);
    r.id = id;
    r.description = text;
    r.assignee = DeveloperName(dev);
    r.time_spent_hours = spec.hours(dev, t);
    r.created_at = base + std::chrono::hours(static_cast<long>(i));
    r.closed_at = r.created_at + std::chrono::seconds(
                                     static_cast<long>(spec.hours(dev, t) * 3600.0));
    r.status = "CLOSED";
    r.resolution = "DONE";
    r.issue_type = "BUG";
    reports.push_back(std::move(r));
  }
  return reports;
}

PlantedCorpus TwoClusterCorpus(int per_cluster, int vocab_per_cluster, int doc_length,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> word(0, vocab_per_cluster - 1);
  PlantedCorpus corpus;
  corpus.vocabulary_size = static_cast<std::size_t>(2 * vocab_per_cluster);
  for (int i = 0; i < 2 * per_cluster; ++i) {
    const int cluster = i % 2;
    TokenizedDocument doc;
    doc.bug_id = "D" + std::to_string(i);
    for (int n = 0; n < doc_length; ++n) {
      doc.tokens.push_back(static_cast<TokenId>(cluster * vocab_per_cluster + word(rng)));
    }
    corpus.documents.push_back(std::move(doc));
    corpus.cluster.push_back(cluster);
  }
  return corpus;
}

double ClusterPurity(std::span<const int> planted, std::span<const int> labels) {
  std::map<int, std::map<int, int>> by_label;
  for (std::size_t i = 0; i < planted.size(); ++i) ++by_label[labels[i]][planted[i]];
  int agree = 0;
  for (const auto& [label, counts] : by_label) {
    int best = 0;
    for (const auto& [cluster, n] : counts) best = std::max(best, n);
    agree += best;
  }
  return planted.empty() ? 0.0 : static_cast<double>(agree) / planted.size();
}

std::string ToCsv(std::span<const BugReport> reports) {
  std::string out =
      "bug_id,created_at,closed_at,status,resolution,assignee,time_spent_hours,"
      "description,issue_type\n";
  for (const auto& r : reports) {
    out += CsvField(r.id) + "," + FormatTimestamp(r.created_at) + "," +
           (r.closed_at ? FormatTimestamp(*r.closed_at) : "") + "," + r.status + "," +
           r.resolution + "," + CsvField(r.assignee) + "," +
           (r.time_spent_hours ? FormatHours(*r.time_spent_hours) : "") + "," +
           CsvField(r.description) + "," + r.issue_type + "\n";
  }
  return out;
}

}  // namespace triage::testing
