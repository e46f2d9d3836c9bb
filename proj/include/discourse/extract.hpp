#ifndef DISCOURSE_EXTRACT_HPP
#define DISCOURSE_EXTRACT_HPP

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "discourse/ontology.hpp"

namespace discourse {

struct Utterance {
  std::string speaker;
  std::string text;
};

struct ConceptMention {
  ConceptId leaf;
  std::string surface;  // span tokens joined by single spaces
  std::size_t begin = 0;
  std::size_t end = 0;  // half-open token span

  bool operator==(const ConceptMention&) const = default;
};

struct Sentence {
  std::size_t index = 0;
  std::string speaker;
  std::string text;
  std::vector<std::string> tokens;
  std::vector<ConceptMention> mentions;
};

struct Transcript {
  std::string id;
  std::vector<Sentence> sentences;
};

// Reads JSON Lines utterances ({"speaker": ..., "text": ...}). Throws
// InputError on unparseable lines.
std::vector<Utterance> read_utterances(std::istream& in);

// Splits utterances into sentences at . ? ! followed by whitespace and an
// uppercase letter, or by end of text. Known abbreviations (Mr., Dr., e.g.)
// and dotted initialisms (U.S.) never end a sentence. Tokens are filled in;
// mentions are left empty. Throws EmptyTranscriptError when nothing remains.
Transcript segment_transcript(std::span<const Utterance> utterances, std::string id);

struct SurfaceIndexOptions {
  std::size_t min_tokens = 1;
  std::set<std::string> stop_titles;  // compared against the tokenized key, space-joined
};

// Single common words that are also article titles.
std::set<std::string> default_stop_titles();

struct SurfaceIndexCounters {
  std::size_t indexed = 0;
  std::size_t collisions = 0;
  std::size_t skipped_short = 0;
  std::size_t skipped_stop = 0;
  std::size_t extra_indexed = 0;
  std::size_t extra_unknown_leaf = 0;
  std::size_t extra_malformed = 0;
};

// Token-sequence trie over leaf titles. Lookups walk one token per step, so
// a longest-match scan stops as soon as no title continues the prefix.
class SurfaceFormIndex {
 public:
  SurfaceFormIndex() = default;

  // Inserts key -> leaf unless key is already present; returns whether it
  // was inserted.
  bool insert(std::span<const std::string> key, ConceptId leaf);

  std::optional<ConceptId> lookup(std::span<const std::string> key) const;

  // Longest key that is a prefix of tokens[begin..]; returns (leaf, length).
  std::optional<std::pair<ConceptId, std::size_t>> longest_match(
      std::span<const std::string> tokens, std::size_t begin) const;

  std::size_t size() const { return entries_; }
  std::size_t max_pattern_tokens() const { return max_tokens_; }

  SurfaceIndexCounters counters;

 private:
  static constexpr std::uint32_t kNoConcept = UINT32_MAX;

  std::optional<std::uint32_t> token_id(const std::string& token) const;
  std::optional<std::uint32_t> step(std::uint32_t node, const std::string& token) const;

  std::unordered_map<std::string, std::uint32_t> vocabulary_;
  std::unordered_map<std::uint64_t, std::uint32_t> edges_;  // (node << 32 | token) -> child
  std::vector<std::uint32_t> terminal_{kNoConcept};          // node -> leaf id or kNoConcept
  std::size_t entries_ = 0;
  std::size_t max_tokens_ = 0;
};

// Drops one trailing parenthetical: "Mercury (element)" -> "Mercury".
std::string strip_disambiguator(const std::string& title);

// Indexes every leaf title; collisions keep the lexicographically smallest
// title.
SurfaceFormIndex build_surface_index(const ConceptOntology& ontology,
                                     const SurfaceIndexOptions& options = {});

// Merges extra `surface\tleaf_title` rows after the title entries. Existing
// keys are kept and counted as collisions.
void merge_surface_forms(SurfaceFormIndex& index, const ConceptOntology& ontology,
                         std::istream& in, const SurfaceIndexOptions& options = {});

// Left-to-right greedy longest match over token n-grams.
std::vector<ConceptMention> extract_concepts(std::span<const std::string> tokens,
                                             const SurfaceFormIndex& index);
std::vector<ConceptMention> extract_concepts(const Sentence& sentence,
                                             const SurfaceFormIndex& index);

ConceptSet concept_tree_for_sentence(std::span<const ConceptMention> mentions,
                                     const ConceptOntology& ontology,
                                     MaxDepth max_depth = kUnboundedDepth);

// Fills mentions for every sentence and returns the per-sentence concept
// trees, aligned with transcript.sentences.
std::vector<ConceptSet> annotate_transcript(Transcript& transcript, const SurfaceFormIndex& index,
                                            const ConceptOntology& ontology,
                                            MaxDepth max_depth = kUnboundedDepth);

}  // namespace discourse

#endif  // DISCOURSE_EXTRACT_HPP
