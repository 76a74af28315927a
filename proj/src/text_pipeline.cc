#include "triage/text_pipeline.h"

#include <algorithm>
#include <fstream>
#include <istream>

#include "triage/errors.h"
#include "triage/hash.h"

namespace triage {
namespace {

// Porter's consonant test: a, e, i, o, u are vowels; y is a vowel when it
// follows a consonant. Digits count as consonants.
bool IsConsonant(std::string_view w, std::size_t i) {
  switch (w[i]) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
      return false;
    case 'y':
      return i == 0 || !IsConsonant(w, i - 1);
    default:
      return true;
  }
}

// Number of VC sequences in [C](VC)^m[V].
int Measure(std::string_view stem) {
  int m = 0;
  std::size_t i = 0;
  const std::size_t n = stem.size();
  while (i < n && IsConsonant(stem, i)) ++i;
  while (i < n) {
    while (i < n && !IsConsonant(stem, i)) ++i;
    if (i >= n) break;
    while (i < n && IsConsonant(stem, i)) ++i;
    ++m;
  }
  return m;
}

bool ContainsVowel(std::string_view stem) {
  for (std::size_t i = 0; i < stem.size(); ++i) {
    if (!IsConsonant(stem, i)) return true;
  }
  return false;
}

bool EndsWithDoubleConsonant(std::string_view w) {
  const std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && IsConsonant(w, n - 1);
}

// consonant-vowel-consonant ending where the last consonant is not w, x, y.
bool EndsCvc(std::string_view w) {
  const std::size_t n = w.size();
  if (n < 3) return false;
  if (!IsConsonant(w, n - 1) || IsConsonant(w, n - 2) || !IsConsonant(w, n - 3)) {
    return false;
  }
  const char c = w[n - 1];
  return c != 'w' && c != 'x' && c != 'y';
}

std::string StripPlural(std::string w) {
  if (w.ends_with("sses")) {
    w.resize(w.size() - 2);
  } else if (w.ends_with("ies")) {
    w.resize(w.size() - 2);
  } else if (w.ends_with("ches") || w.ends_with("shes") || w.ends_with("xes")) {
    w.resize(w.size() - 2);
  } else if (w.ends_with("ss")) {
    // unchanged
  } else if (w.ends_with('s')) {
    w.pop_back();
  }
  return w;
}

std::string StripVerbal(std::string w) {
  if (w.ends_with("eed")) {
    if (Measure(std::string_view(w).substr(0, w.size() - 3)) > 0) w.pop_back();
    return w;
  }
  std::size_t cut = 0;
  if (w.ends_with("ed") && ContainsVowel(std::string_view(w).substr(0, w.size() - 2))) {
    cut = 2;
  } else if (w.ends_with("ing") &&
             ContainsVowel(std::string_view(w).substr(0, w.size() - 3))) {
    cut = 3;
  }
  if (cut == 0) return w;
  w.resize(w.size() - cut);
  if (w.ends_with("at") || w.ends_with("bl") || w.ends_with("iz")) {
    w.push_back('e');
  } else if (EndsWithDoubleConsonant(w) && !w.ends_with('l') && !w.ends_with('s') &&
             !w.ends_with('z')) {
    w.pop_back();
  } else if (Measure(w) == 1 && EndsCvc(w)) {
    w.push_back('e');
  }
  return w;
}

// Standard English stop words (the widely used NLTK English list).
constexpr std::string_view kEnglishStopwords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your",
    "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "her",
    "hers", "herself", "it", "its", "itself", "they", "them", "their", "theirs",
    "themselves", "what", "which", "who", "whom", "this", "that", "these", "those",
    "am", "is", "are", "was", "were", "be", "been", "being", "have", "has", "had",
    "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if",
    "or", "because", "as", "until", "while", "of", "at", "by", "for", "with",
    "about", "against", "between", "into", "through", "during", "before", "after",
    "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
    "under", "again", "further", "then", "once", "here", "there", "when", "where",
    "why", "how", "all", "any", "both", "each", "few", "more", "most", "other",
    "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than", "too",
    "very", "s", "t", "can", "will", "just", "don", "should", "now", "d", "ll", "m",
    "o", "re", "ve", "y", "ain", "aren", "couldn", "didn", "doesn", "hadn", "hasn",
    "haven", "isn", "ma", "mightn", "mustn", "needn", "shan", "shouldn", "wasn",
    "weren", "won", "wouldn"};

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  const auto flush = [&] {
    const bool numeric = std::all_of(current.begin(), current.end(),
                                     [](char c) { return c >= '0' && c <= '9'; });
    if (current.size() >= 2 && !numeric) tokens.push_back(current);
    current.clear();
  };
  for (const char raw : text) {
    char c = raw;
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> RemoveStopwords(std::span<const std::string> tokens,
                                         const Stoplist& stoplist) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (!stoplist.contains(t)) out.push_back(t);
  }
  return out;
}

std::string Normalize(std::string_view token) {
  std::string word(token);
  while (true) {
    std::string next = StripVerbal(StripPlural(word));
    if (next.size() < 2 || next == word) return word;
    word = std::move(next);
  }
}

const Stoplist& DefaultStoplist() {
  static const Stoplist list = [] {
    Stoplist words;
    for (const auto w : kEnglishStopwords) words.emplace(w);
    return words;
  }();
  return list;
}

Stoplist ParseStoplist(std::istream& in) {
  Stoplist list;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string word = line.substr(first, last - first + 1);
    std::transform(word.begin(), word.end(), word.begin(), [](char c) {
      return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    });
    list.insert(std::move(word));
  }
  return list;
}

Stoplist LoadStoplist(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TriageError(ErrorKind::kIo, "cannot open stop-word list '" + path + "'");
  return ParseStoplist(in);
}

std::vector<std::string> Preprocess(std::string_view text, const Stoplist& stoplist) {
  std::vector<std::string> tokens = RemoveStopwords(Tokenize(text), stoplist);
  for (auto& t : tokens) t = Normalize(t);
  return tokens;
}

TokenId Vocabulary::Intern(const std::string& token) {
  const auto [it, inserted] =
      index_.try_emplace(token, static_cast<TokenId>(tokens_.size()));
  if (inserted) {
    tokens_.push_back(token);
    document_frequency_.push_back(0);
  }
  return it->second;
}

std::int64_t Vocabulary::Find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

void Vocabulary::set_document_frequency(std::vector<int> df) {
  if (df.size() != tokens_.size()) {
    throw TriageError(ErrorKind::kInvalidArgument, "document frequency size mismatch");
  }
  document_frequency_ = std::move(df);
}

Vocabulary Vocabulary::FromTokens(std::vector<std::string> tokens, std::vector<int> df) {
  Vocabulary vocab;
  for (const auto& t : tokens) {
    if (vocab.Intern(t) + 1 != vocab.size()) {
      throw TriageError(ErrorKind::kSchema, "duplicate vocabulary token '" + t + "'");
    }
  }
  vocab.set_document_frequency(std::move(df));
  return vocab;
}

std::uint64_t Vocabulary::Hash() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& t : tokens_) {
    h = Fnv1a(t, h);
    h = Fnv1a(std::string_view("\0", 1), h);
  }
  return h;
}

Corpus BuildCorpus(const Dataset& dataset, const Stoplist& stoplist, int min_df) {
  return BuildCorpus(std::span<const BugReport>(dataset.reports), stoplist, min_df);
}

Corpus BuildCorpus(std::span<const BugReport> reports, const Stoplist& stoplist,
                   int min_df) {
  if (reports.empty()) throw TriageError(ErrorKind::kEmptyData, "empty dataset");
  if (min_df < 1) throw TriageError(ErrorKind::kInvalidArgument, "min_df must be >= 1");

  // Pass 1: preprocess and count document frequency over raw strings.
  std::vector<std::vector<std::string>> processed;
  processed.reserve(reports.size());
  std::unordered_map<std::string, int> df;
  for (const BugReport& r : reports) {
    processed.push_back(Preprocess(r.description, stoplist));
    std::vector<std::string> unique = processed.back();
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    for (const auto& t : unique) ++df[t];
  }

  // Pass 2: first-occurrence id assignment over surviving tokens.
  Corpus corpus;
  corpus.documents.reserve(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    TokenizedDocument doc;
    doc.bug_id = reports[i].id;
    for (const auto& t : processed[i]) {
      if (df[t] >= min_df) doc.tokens.push_back(corpus.vocabulary.Intern(t));
    }
    doc.empty_after_preprocessing = doc.tokens.empty();
    corpus.documents.push_back(std::move(doc));
  }
  if (corpus.vocabulary.size() == 0) {
    throw TriageError(ErrorKind::kEmptyData, "empty vocabulary after preprocessing");
  }
  std::vector<int> freq(corpus.vocabulary.size());
  for (TokenId id = 0; id < corpus.vocabulary.size(); ++id) {
    freq[id] = df[corpus.vocabulary.Token(id)];
  }
  corpus.vocabulary.set_document_frequency(std::move(freq));
  return corpus;
}

TokenizedDocument EncodeDocument(const Vocabulary& vocabulary, std::string bug_id,
                                 std::string_view text, const Stoplist& stoplist) {
  TokenizedDocument doc;
  doc.bug_id = std::move(bug_id);
  for (const auto& t : Preprocess(text, stoplist)) {
    if (const auto id = vocabulary.Find(t); id >= 0) {
      doc.tokens.push_back(static_cast<TokenId>(id));
    }
  }
  doc.empty_after_preprocessing = doc.tokens.empty();
  return doc;
}

std::vector<std::string> Decode(const Vocabulary& vocabulary,
                                std::span<const TokenId> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const TokenId id : tokens) out.push_back(vocabulary.Token(id));
  return out;
}

}  // namespace triage
