#ifndef DISCOURSE_SIMILARITY_HPP
#define DISCOURSE_SIMILARITY_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "discourse/error.hpp"
#include "discourse/extract.hpp"
#include "discourse/ontology.hpp"

namespace discourse {

// Sparse non-negative weights keyed by Key, stored sorted by key without
// explicit zeros.
template <typename Key>
class SparseVector {
 public:
  using Entry = std::pair<Key, double>;

  SparseVector() = default;

  // Entries need not be sorted; duplicate keys and zero weights are not
  // allowed.
  explicit SparseVector(std::vector<Entry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (!(entries_[i].second > 0.0)) throw ArgumentError("sparse weights must be positive");
      if (i > 0 && !(entries_[i - 1].first < entries_[i].first)) {
        throw ArgumentError("duplicate sparse key");
      }
    }
  }

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  double weight(const Key& key) const {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                                     [](const Entry& e, const Key& k) { return e.first < k; });
    return it != entries_.end() && !(key < it->first) ? it->second : 0.0;
  }

  double squared_norm() const {
    double sum = 0.0;
    for (const auto& [key, w] : entries_) sum += w * w;
    return sum;
  }

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<Entry> entries_;
};

using ConceptVector = SparseVector<ConceptId>;
using WordVector = SparseVector<std::string>;

template <typename Key>
double dot(const SparseVector<Key>& a, const SparseVector<Key>& b) {
  const auto& x = a.entries();
  const auto& y = b.entries();
  double sum = 0.0;
  for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
    if (x[i].first < y[j].first) {
      ++i;
    } else if (y[j].first < x[i].first) {
      ++j;
    } else {
      sum += x[i++].second * y[j++].second;
    }
  }
  return sum;
}

// Cosine of two non-negative sparse vectors; 0 when either is empty.
template <typename Key>
double cosine(const SparseVector<Key>& a, const SparseVector<Key>& b) {
  if (a.empty() || b.empty()) return 0.0;
  const double value = dot(a, b) / std::sqrt(a.squared_norm() * b.squared_norm());
  return std::clamp(value, 0.0, 1.0);
}

// Keys in both vectors with the product of their weights, highest product
// first (ties by key), at most top_k.
template <typename Key>
std::vector<std::pair<Key, double>> shared_keys(const SparseVector<Key>& a,
                                                const SparseVector<Key>& b, std::size_t top_k) {
  std::vector<std::pair<Key, double>> out;
  const auto& x = a.entries();
  const auto& y = b.entries();
  for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
    if (x[i].first < y[j].first) {
      ++i;
    } else if (y[j].first < x[i].first) {
      ++j;
    } else {
      out.emplace_back(x[i].first, x[i].second * y[j].second);
      ++i;
      ++j;
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& l, const auto& r) { return l.second > r.second; });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

// Sentence-level document frequencies for concepts and words.
struct DfTable {
  std::map<ConceptId, std::size_t> concept_df;
  std::unordered_map<std::string, std::size_t> word_df;
  std::size_t sentence_count = 0;
};

// Presence is binary per sentence. Throws ArgumentError when the two lists
// differ in length or are empty.
DfTable document_frequencies(std::span<const ConceptSet> trees,
                             std::span<const std::vector<std::string>> token_lists);

// weight(k) = 1 + ln(N / df(k)) for every present key. Throws
// ConsistencyError when a key has no frequency or one outside [1, N].
template <typename Key, typename DfMap>
SparseVector<Key> feature_vector(const std::set<Key>& present, const DfMap& df,
                                 std::size_t sentence_count) {
  if (sentence_count == 0) throw ConsistencyError("feature vector over zero sentences");
  std::vector<std::pair<Key, double>> entries;
  entries.reserve(present.size());
  const double n = static_cast<double>(sentence_count);
  for (const auto& key : present) {
    const auto it = df.find(key);
    if (it == df.end() || it->second == 0 || it->second > sentence_count) {
      throw ConsistencyError("missing or out-of-range document frequency");
    }
    entries.emplace_back(key, 1.0 + std::log(n / static_cast<double>(it->second)));
  }
  return SparseVector<Key>(std::move(entries));
}

// Concept and word vectors of every sentence in a transcript.
struct SentenceFeatures {
  std::vector<ConceptVector> concepts;
  std::vector<WordVector> words;
  std::vector<std::vector<std::string>> tokens;
};

struct FeatureOptions {
  std::set<std::string> stopwords;  // removed from word vectors when non-empty
};

std::set<std::string> default_stopwords();

SentenceFeatures compute_features(const Transcript& transcript, std::span<const ConceptSet> trees,
                                  const FeatureOptions& options = {});

// cosine(V_i, V_j) + cosine(U_i, U_j). Throws ArgumentError on a bad index.
double sentence_similarity(std::size_t i, std::size_t j, std::span<const ConceptVector> concepts,
                           std::span<const WordVector> words);

double baseline_text_only(std::size_t i, std::size_t j, std::span<const WordVector> words);

// Jaccard coefficient of the two token sets; 0 when both are empty.
double baseline_word_overlap(std::span<const std::string> a, std::span<const std::string> b);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(Eigen::Index dimension) : dimension_(dimension) {}

  Eigen::Index dimension() const { return dimension_; }
  std::size_t size() const { return rows_.size(); }
  std::size_t skipped() const { return skipped_; }

  // Later insertions for the same word replace earlier ones.
  void insert(const std::string& word, const Eigen::VectorXf& vector);
  const Eigen::VectorXf* find(const std::string& word) const;

  // Mean of the in-vocabulary token vectors, or nullopt when none are known.
  std::optional<Eigen::VectorXd> mean(std::span<const std::string> tokens) const;

  friend EmbeddingTable load_embeddings(std::istream& in);

 private:
  Eigen::Index dimension_ = 0;
  std::unordered_map<std::string, Eigen::VectorXf> rows_;
  std::size_t skipped_ = 0;
};

// Text vectors, one `word v1 ... vd` line each. The first line fixes d;
// lines of other dimension are skipped and counted. Throws InputError when
// the first line is missing or unparseable.
EmbeddingTable load_embeddings(std::istream& in);

// Cosine of two dense sentence means; 0 when either mean is missing or zero.
double mean_cosine(const std::optional<Eigen::VectorXd>& a, const std::optional<Eigen::VectorXd>& b);

double baseline_avg_embedding(std::span<const std::string> a, std::span<const std::string> b,
                              const EmbeddingTable& table);

enum class SimilarityMethod { kConceptJoint, kTextOnly, kWordOverlap, kAvgEmbedding };

inline constexpr SimilarityMethod kAllMethods[] = {
    SimilarityMethod::kConceptJoint, SimilarityMethod::kTextOnly, SimilarityMethod::kWordOverlap,
    SimilarityMethod::kAvgEmbedding};

std::string_view to_string(SimilarityMethod method);
std::optional<SimilarityMethod> parse_method(std::string_view text);

// Pairwise scorer over one transcript's features for any method. Sentence
// means for the embedding baseline are computed once up front.
class SentenceScorer {
 public:
  SentenceScorer(const SentenceFeatures& features, const EmbeddingTable* embeddings = nullptr);

  std::size_t size() const { return features_->concepts.size(); }
  const SentenceFeatures& features() const { return *features_; }

  // Throws ArgumentError on a bad index or when kAvgEmbedding is requested
  // without an embedding table.
  double score(SimilarityMethod method, std::size_t i, std::size_t j) const;

 private:
  const SentenceFeatures* features_;
  const EmbeddingTable* embeddings_;
  std::vector<std::optional<Eigen::VectorXd>> means_;
};

}  // namespace discourse

#endif  // DISCOURSE_SIMILARITY_HPP
