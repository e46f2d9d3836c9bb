#ifndef DISCOURSE_FLOW_HPP
#define DISCOURSE_FLOW_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "discourse/extract.hpp"
#include "discourse/similarity.hpp"

namespace discourse {

struct ConceptWeight {
  ConceptId id;
  std::string title;
  double weight = 0.0;

  bool operator==(const ConceptWeight&) const = default;
};

struct WordWeight {
  std::string token;
  double weight = 0.0;

  bool operator==(const WordWeight&) const = default;
};

struct FlowNode {
  std::size_t index = 0;
  std::string speaker;
  std::string text;
  std::vector<ConceptWeight> concepts;

  bool operator==(const FlowNode&) const = default;
};

// Link from a sentence to its best later sentence (to > from).
struct FlowEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  double score = 0.0;
  std::vector<ConceptWeight> shared_concepts;
  std::vector<WordWeight> shared_words;

  bool operator==(const FlowEdge&) const = default;
};

struct FlowGraph {
  std::string transcript_id;
  SimilarityMethod method = SimilarityMethod::kConceptJoint;
  double threshold = 0.0;
  std::vector<FlowNode> nodes;
  std::vector<FlowEdge> edges;

  bool operator==(const FlowGraph&) const = default;
};

struct FlowOptions {
  SimilarityMethod method = SimilarityMethod::kConceptJoint;
  double threshold = 0.0;
  std::size_t top_k = 5;  // shared keys per edge and concepts per node
};

using TitleLookup = std::function<std::string(ConceptId)>;

struct SentenceMatch {
  std::size_t to = 0;
  double score = 0.0;

  bool operator==(const SentenceMatch&) const = default;
};

using PairScore = std::function<double(std::size_t, std::size_t)>;

// For every i < n the argmax of score(i, j) over j > i, ties to the
// smallest j; nullopt when the best score is zero or below threshold.
std::vector<std::optional<SentenceMatch>> forward_argmax(std::size_t n, const PairScore& score,
                                                         double threshold);

// forward_argmax under a scorer's method. Only
// sentences sharing a key are scored for the sparse methods, since all
// others score exactly zero.
std::vector<std::optional<SentenceMatch>> best_forward_matches(const SentenceScorer& scorer,
                                                              SimilarityMethod method,
                                                              double threshold);

// Best match for `anchor` among all other sentences in either direction,
// ties to the smallest index; nullopt when nothing scores above zero.
std::optional<SentenceMatch> best_match(const SentenceScorer& scorer, SimilarityMethod method,
                                       std::size_t anchor);

struct EdgeAnnotation {
  std::vector<std::pair<ConceptId, double>> shared_concepts;
  std::vector<std::pair<std::string, double>> shared_words;
};

EdgeAnnotation annotate_edge(std::size_t i, std::size_t j, std::span<const ConceptVector> concepts,
                             std::span<const WordVector> words, std::size_t top_k);

struct ConceptImportance {
  ConceptId concept_id;
  double score = 0.0;

  bool operator==(const ConceptImportance&) const = default;
};

// Sum of each concept's weights over all sentences, descending, ties by id.
std::vector<ConceptImportance> rank_concepts(std::span<const ConceptVector> concepts,
                                             std::size_t top_k);

// Throws ArgumentError when the scorer is not aligned with the transcript.
FlowGraph build_flow(const Transcript& transcript, const SentenceScorer& scorer,
                     const FlowOptions& options, const TitleLookup& titles = {});

std::string export_dot(const FlowGraph& flow);

// Reals are rounded to 6 decimals; object keys are sorted.
std::string export_json(const FlowGraph& flow);

// Inverse of export_json. Throws InputError on schema violations.
FlowGraph parse_flow_json(const std::string& text);

}  // namespace discourse

#endif  // DISCOURSE_FLOW_HPP
