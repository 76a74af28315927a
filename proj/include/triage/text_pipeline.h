#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "triage/ingestion.h"

namespace triage {

using TokenId = std::uint32_t;
using Stoplist = std::unordered_set<std::string>;

// Lowercases, splits on every non-alphanumeric byte, drops tokens shorter
// than two characters and tokens made only of digits. Non-ASCII bytes count
// as separators.
std::vector<std::string> Tokenize(std::string_view text);

std::vector<std::string> RemoveStopwords(std::span<const std::string> tokens,
                                         const Stoplist& stoplist);

// Porter-style step 1 suffix stripping (plural -s/-es/-ies, -ed, -ing with
// the usual measure and consonant-vowel guards), applied until nothing
// changes so the result is a fixed point. Words that would shrink below two
// characters are returned unchanged.
std::string Normalize(std::string_view token);

// The bundled English stop-word list (also shipped as data/stopwords_en.txt).
const Stoplist& DefaultStoplist();

// One lowercase token per line; blank lines and '#' comments are skipped.
Stoplist ParseStoplist(std::istream& in);
Stoplist LoadStoplist(const std::string& path);

// Tokenize, drop stop words, normalize.
std::vector<std::string> Preprocess(std::string_view text, const Stoplist& stoplist);

class Vocabulary {
 public:
  // Returns the id for `token`, assigning the next dense id if unseen.
  TokenId Intern(const std::string& token);
  // Returns -1 when absent.
  std::int64_t Find(std::string_view token) const;

  const std::string& Token(TokenId id) const { return tokens_[id]; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Number of corpus documents containing each token, indexed by id.
  const std::vector<int>& document_frequency() const { return document_frequency_; }
  void set_document_frequency(std::vector<int> df);

  // Rebuilds a vocabulary from its ordered token list (ids are positions).
  static Vocabulary FromTokens(std::vector<std::string> tokens, std::vector<int> df);

  // FNV-1a over the ordered token list; identifies a vocabulary in artifacts.
  std::uint64_t Hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.document_frequency_ == b.document_frequency_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  std::vector<int> document_frequency_;
};

struct TokenizedDocument {
  std::string bug_id;
  std::vector<TokenId> tokens;
  // Set when preprocessing left nothing; such documents are not fitted and
  // receive a uniform topic distribution.
  bool empty_after_preprocessing = false;
};

struct Corpus {
  Vocabulary vocabulary;
  std::vector<TokenizedDocument> documents;
};

inline constexpr int kDefaultMinDf = 2;

// Runs Preprocess over every report description, keeps tokens whose
// document frequency is at least `min_df`, and assigns ids in first-occurrence
// order over the (already chronological) dataset. Throws kEmptyData when the
// dataset is empty or no token survives.
Corpus BuildCorpus(const Dataset& dataset, const Stoplist& stoplist, int min_df);
Corpus BuildCorpus(std::span<const BugReport> reports, const Stoplist& stoplist,
                   int min_df);

// Encodes text against a fixed vocabulary; out-of-vocabulary tokens are
// dropped.
TokenizedDocument EncodeDocument(const Vocabulary& vocabulary, std::string bug_id,
                                 std::string_view text, const Stoplist& stoplist);

std::vector<std::string> Decode(const Vocabulary& vocabulary,
                                std::span<const TokenId> tokens);

}  // namespace triage
