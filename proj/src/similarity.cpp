#include "discourse/similarity.hpp"

#include <charconv>

namespace discourse {
namespace {

void check_index(std::size_t i, std::size_t size) {
  if (i >= size) {
    throw ArgumentError("sentence index " + std::to_string(i) + " out of range (" +
                        std::to_string(size) + " sentences)");
  }
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < line.size()) {
    while (k < line.size() && line[k] == ' ') ++k;
    const std::size_t start = k;
    while (k < line.size() && line[k] != ' ') ++k;
    if (k > start) out.push_back(line.substr(start, k - start));
  }
  return out;
}

std::optional<Eigen::VectorXf> parse_values(std::span<const std::string_view> fields) {
  Eigen::VectorXf v(static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto* end = fields[i].data() + fields[i].size();
    const auto [ptr, ec] = std::from_chars(fields[i].data(), end, v[static_cast<Eigen::Index>(i)]);
    if (ec != std::errc() || ptr != end) return std::nullopt;
  }
  return v;
}

}  // namespace

DfTable document_frequencies(std::span<const ConceptSet> trees,
                             std::span<const std::vector<std::string>> token_lists) {
  if (trees.size() != token_lists.size()) {
    throw ArgumentError("concept trees and token lists differ in length");
  }
  if (trees.empty()) throw ArgumentError("document frequencies need at least one sentence");
  DfTable df;
  df.sentence_count = trees.size();
  for (const auto& tree : trees) {
    for (ConceptId c : tree) ++df.concept_df[c];
  }
  for (const auto& tokens : token_lists) {
    const std::set<std::string> present(tokens.begin(), tokens.end());
    for (const auto& t : present) ++df.word_df[t];
  }
  return df;
}

std::set<std::string> default_stopwords() {
  return {"a",     "about", "all",   "also",  "am",    "an",    "and",   "any",   "are",
          "as",    "at",    "be",    "been",  "but",   "by",    "can",   "could", "did",
          "do",    "does",  "for",   "from",  "had",   "has",   "have",  "he",    "her",
          "him",   "his",   "how",   "i",     "if",    "in",    "into",  "is",    "it",
          "its",   "just",  "me",    "more",  "my",    "no",    "not",   "of",    "on",
          "or",    "our",   "out",   "she",   "so",    "some",  "than",  "that",  "the",
          "their", "them",  "then",  "there", "these", "they",  "this",  "to",    "up",
          "us",    "was",   "we",    "were",  "what",  "when",  "which", "who",   "will",
          "with",  "would", "you",   "your"};
}

SentenceFeatures compute_features(const Transcript& transcript, std::span<const ConceptSet> trees,
                                  const FeatureOptions& options) {
  SentenceFeatures features;
  const std::size_t n = transcript.sentences.size();
  if (trees.size() != n) throw ArgumentError("one concept tree per sentence required");
  features.tokens.reserve(n);
  for (const auto& s : transcript.sentences) features.tokens.push_back(s.tokens);

  std::vector<std::vector<std::string>> counted = features.tokens;
  if (!options.stopwords.empty()) {
    for (auto& tokens : counted) {
      std::erase_if(tokens, [&](const std::string& t) { return options.stopwords.contains(t); });
    }
  }
  const DfTable df = document_frequencies(trees, counted);
  features.concepts.reserve(n);
  features.words.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    features.concepts.push_back(feature_vector(trees[i], df.concept_df, n));
    const std::set<std::string> present(counted[i].begin(), counted[i].end());
    features.words.push_back(feature_vector(present, df.word_df, n));
  }
  return features;
}

double sentence_similarity(std::size_t i, std::size_t j, std::span<const ConceptVector> concepts,
                           std::span<const WordVector> words) {
  if (concepts.size() != words.size()) throw ArgumentError("concept/word vectors misaligned");
  check_index(i, concepts.size());
  check_index(j, concepts.size());
  return cosine(concepts[i], concepts[j]) + cosine(words[i], words[j]);
}

double baseline_text_only(std::size_t i, std::size_t j, std::span<const WordVector> words) {
  check_index(i, words.size());
  check_index(j, words.size());
  return cosine(words[i], words[j]);
}

double baseline_word_overlap(std::span<const std::string> a, std::span<const std::string> b) {
  const std::set<std::string> x(a.begin(), a.end());
  const std::set<std::string> y(b.begin(), b.end());
  if (x.empty() && y.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& t : x) shared += y.contains(t) ? 1 : 0;
  return static_cast<double>(shared) / static_cast<double>(x.size() + y.size() - shared);
}

void EmbeddingTable::insert(const std::string& word, const Eigen::VectorXf& vector) {
  if (vector.size() != dimension_) throw ArgumentError("embedding dimension mismatch");
  rows_.insert_or_assign(word, vector);
}

const Eigen::VectorXf* EmbeddingTable::find(const std::string& word) const {
  const auto it = rows_.find(word);
  return it == rows_.end() ? nullptr : &it->second;
}

std::optional<Eigen::VectorXd> EmbeddingTable::mean(std::span<const std::string> tokens) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dimension_);
  std::size_t known = 0;
  for (const auto& t : tokens) {
    if (const auto* v = find(t)) {
      sum += v->cast<double>();
      ++known;
    }
  }
  if (known == 0) return std::nullopt;
  return sum / static_cast<double>(known);
}

EmbeddingTable load_embeddings(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  EmbeddingTable table;
  bool have_dimension = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_spaces(line);
    const auto values = fields.size() >= 2
                            ? parse_values(std::span(fields).subspan(1))
                            : std::optional<Eigen::VectorXf>{};
    if (!have_dimension) {
      if (!values) throw InputError("embedding file: unparseable first line");
      table.dimension_ = values->size();
      have_dimension = true;
    }
    if (!values || values->size() != table.dimension_) {
      ++table.skipped_;
      continue;
    }
    table.rows_.insert_or_assign(std::string(fields[0]), *values);
  }
  if (in.bad()) throw InputError("embedding file read failure at line " + std::to_string(number + 1));
  if (!have_dimension) throw InputError("embedding file is empty");
  return table;
}

double mean_cosine(const std::optional<Eigen::VectorXd>& a, const std::optional<Eigen::VectorXd>& b) {
  if (!a || !b) return 0.0;
  const double norms = a->norm() * b->norm();
  if (norms == 0.0) return 0.0;
  return std::clamp(a->dot(*b) / norms, -1.0, 1.0);
}

double baseline_avg_embedding(std::span<const std::string> a, std::span<const std::string> b,
                              const EmbeddingTable& table) {
  return mean_cosine(table.mean(a), table.mean(b));
}

std::string_view to_string(SimilarityMethod method) {
  switch (method) {
    case SimilarityMethod::kConceptJoint: return "concept_joint";
    case SimilarityMethod::kTextOnly: return "text_only";
    case SimilarityMethod::kWordOverlap: return "word_overlap";
    case SimilarityMethod::kAvgEmbedding: return "avg_embedding";
  }
  return "concept_joint";
}

std::optional<SimilarityMethod> parse_method(std::string_view text) {
  for (auto m : kAllMethods) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

SentenceScorer::SentenceScorer(const SentenceFeatures& features, const EmbeddingTable* embeddings)
    : features_(&features), embeddings_(embeddings) {
  if (features.concepts.size() != features.words.size() ||
      features.words.size() != features.tokens.size()) {
    throw ArgumentError("sentence features misaligned");
  }
  if (embeddings_ != nullptr) {
    means_.reserve(features.tokens.size());
    for (const auto& tokens : features.tokens) means_.push_back(embeddings_->mean(tokens));
  }
}

double SentenceScorer::score(SimilarityMethod method, std::size_t i, std::size_t j) const {
  check_index(i, size());
  check_index(j, size());
  const auto& f = *features_;
  switch (method) {
    case SimilarityMethod::kConceptJoint:
      return sentence_similarity(i, j, f.concepts, f.words);
    case SimilarityMethod::kTextOnly:
      return baseline_text_only(i, j, f.words);
    case SimilarityMethod::kWordOverlap:
      return baseline_word_overlap(f.tokens[i], f.tokens[j]);
    case SimilarityMethod::kAvgEmbedding:
      if (embeddings_ == nullptr) throw ArgumentError("avg_embedding needs an embedding table");
      return mean_cosine(means_[i], means_[j]);
  }
  throw ArgumentError("unknown similarity method");
}

}  // namespace discourse
