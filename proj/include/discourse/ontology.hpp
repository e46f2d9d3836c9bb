#ifndef DISCOURSE_ONTOLOGY_HPP
#define DISCOURSE_ONTOLOGY_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "discourse/ingest.hpp"

namespace discourse {

// Dense node handle inside one ontology; 0 is always the root.
struct ConceptId {
  std::uint32_t value = 0;

  auto operator<=>(const ConceptId&) const = default;
};

struct ConceptIdHash {
  std::size_t operator()(ConceptId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

using ConceptSet = std::set<ConceptId>;

// Hop limit for ancestor walks; nullopt means the full closure.
using MaxDepth = std::optional<std::size_t>;
inline constexpr MaxDepth kUnboundedDepth = std::nullopt;

enum class ConceptKind { kCategory, kLeaf };

std::string_view to_string(ConceptKind kind);

struct ConceptNode {
  ConceptId id;
  std::string title;
  ConceptKind kind = ConceptKind::kCategory;
  std::vector<ConceptId> parents;  // sorted, unique

  bool operator==(const ConceptNode&) const = default;
};

struct OntologyStats {
  std::size_t category_count = 0;
  std::size_t leaf_count = 0;
  std::size_t edge_count = 0;
  double mean_categories_per_leaf = 0.0;
};

// Immutable fine-to-coarse concept graph. The constructor validates the
// structural invariants: ids are 0..n-1 in order, node 0 is a parentless
// category, every parent is a category, leaves have at least one parent,
// titles are unique per kind and every node reaches the root.
class ConceptOntology {
 public:
  explicit ConceptOntology(std::vector<ConceptNode> nodes);

  ConceptId root() const { return ConceptId{0}; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  bool contains(ConceptId id) const { return id.value < nodes_.size(); }

  // Throws ArgumentError for an id outside the ontology.
  const ConceptNode& node(ConceptId id) const;
  const std::vector<ConceptNode>& nodes() const { return nodes_; }
  const std::vector<ConceptId>& children(ConceptId id) const;

  std::optional<ConceptId> find(ConceptKind kind, const std::string& title) const;

  bool operator==(const ConceptOntology& other) const { return nodes_ == other.nodes_; }

 private:
  struct KindTitleHash {
    std::size_t operator()(const std::pair<ConceptKind, std::string>& key) const noexcept;
  };

  std::vector<ConceptNode> nodes_;
  std::vector<std::vector<ConceptId>> children_;
  std::size_t edge_count_ = 0;
  std::unordered_map<std::pair<ConceptKind, std::string>, ConceptId, KindTitleHash> title_index_;
};

inline constexpr std::string_view kDefaultRootTitle = "Main topic classifications";

// Filters non-topical categories, prunes everything the root cannot reach
// through child edges, drops articles left without parents and assigns
// dense ids (root, then categories by title, then leaves by title).
// Throws RootNotFoundError when no category carries root_title.
ConceptOntology distill(const ingest::RawGraph& raw, const ingest::FilterRules& rules,
                        std::string_view root_title = kDefaultRootTitle);

// Nodes reachable through parent edges within max_depth hops, excluding id
// itself. Cycle-safe.
ConceptSet ancestors(const ConceptOntology& ontology, ConceptId id,
                     MaxDepth max_depth = kUnboundedDepth);

// leaves ∪ ancestors(leaf) for every leaf.
ConceptSet induced_concept_tree(const ConceptOntology& ontology, const ConceptSet& leaves,
                                MaxDepth max_depth = kUnboundedDepth);

OntologyStats stats(const ConceptOntology& ontology);

// Directory layout: meta.tsv, nodes.tsv, edges.tsv (see README).
void save_ontology(const ConceptOntology& ontology, const std::filesystem::path& dir);
ConceptOntology load_ontology(const std::filesystem::path& dir);

}  // namespace discourse

#endif  // DISCOURSE_ONTOLOGY_HPP
