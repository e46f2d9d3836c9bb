#include "discourse/ontology.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <numeric>

#include "discourse/error.hpp"
#include "discourse/text.hpp"

namespace discourse {
namespace {

constexpr std::string_view kFormatVersion = "1";

std::string id_string(ConceptId id) { return std::to_string(id.value); }

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t tab; (tab = line.find('\t', start)) != std::string_view::npos; start = tab + 1) {
    fields.push_back(line.substr(start, tab - start));
  }
  fields.push_back(line.substr(start));
  return fields;
}

std::optional<std::uint32_t> parse_u32(std::string_view text) {
  std::uint32_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

template <typename LineFn>
void for_each_line(const std::filesystem::path& path, LineFn fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto fields = split_tabs(line);
    if (!fn(fields)) {
      throw InputError("malformed " + path.filename().string() + " line " + std::to_string(number));
    }
  }
  if (in.bad()) throw InputError("read failure in " + path.string());
}

}  // namespace

std::string_view to_string(ConceptKind kind) {
  return kind == ConceptKind::kCategory ? "category" : "leaf";
}

std::size_t ConceptOntology::KindTitleHash::operator()(
    const std::pair<ConceptKind, std::string>& key) const noexcept {
  const std::size_t h = std::hash<std::string>{}(key.second);
  return key.first == ConceptKind::kCategory ? ~h : h;
}

ConceptOntology::ConceptOntology(std::vector<ConceptNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ArgumentError("ontology needs a root node");
  const auto& root = nodes_.front();
  if (root.kind != ConceptKind::kCategory || !root.parents.empty()) {
    throw ArgumentError("node 0 must be a parentless category");
  }
  children_.resize(nodes_.size());
  title_index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    if (n.id.value != i) throw ArgumentError("node ids must be dense and ordered");
    if (n.title.empty()) throw ArgumentError("node " + std::to_string(i) + " has an empty title");
    if (i > 0 && n.kind == ConceptKind::kLeaf && n.parents.empty()) {
      throw ArgumentError("leaf '" + n.title + "' has no parent");
    }
    std::sort(n.parents.begin(), n.parents.end());
    n.parents.erase(std::unique(n.parents.begin(), n.parents.end()), n.parents.end());
    for (ConceptId p : n.parents) {
      if (p.value >= nodes_.size() || p == n.id) {
        throw ArgumentError("node " + std::to_string(i) + " has an invalid parent");
      }
      if (nodes_[p.value].kind != ConceptKind::kCategory) {
        throw ArgumentError("parent of node " + std::to_string(i) + " is not a category");
      }
      children_[p.value].push_back(n.id);
    }
    edge_count_ += n.parents.size();
    if (!title_index_.emplace(std::make_pair(n.kind, n.title), n.id).second) {
      throw ArgumentError("duplicate " + std::string(to_string(n.kind)) + " title '" + n.title + "'");
    }
  }

  // Every node must be reachable downward from the root.
  std::vector<bool> seen(nodes_.size(), false);
  std::deque<ConceptId> queue{root.id};
  seen[0] = true;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const ConceptId at = queue.front();
    queue.pop_front();
    for (ConceptId c : children_[at.value]) {
      if (!seen[c.value]) {
        seen[c.value] = true;
        ++reached;
        queue.push_back(c);
      }
    }
  }
  if (reached != nodes_.size()) {
    const auto it = std::find(seen.begin(), seen.end(), false);
    throw ArgumentError("node '" + nodes_[static_cast<std::size_t>(it - seen.begin())].title +
                        "' cannot reach the root");
  }
}

const ConceptNode& ConceptOntology::node(ConceptId id) const {
  if (!contains(id)) throw ArgumentError("concept id " + id_string(id) + " out of range");
  return nodes_[id.value];
}

const std::vector<ConceptId>& ConceptOntology::children(ConceptId id) const {
  if (!contains(id)) throw ArgumentError("concept id " + id_string(id) + " out of range");
  return children_[id.value];
}

std::optional<ConceptId> ConceptOntology::find(ConceptKind kind, const std::string& title) const {
  const auto it = title_index_.find({kind, title});
  if (it == title_index_.end()) return std::nullopt;
  return it->second;
}

ConceptOntology distill(const ingest::RawGraph& raw, const ingest::FilterRules& rules,
                        std::string_view root_title) {
  using ingest::Namespace;
  const std::string root_key = normalize_title(root_title);
  const auto root_page = raw.find(Namespace::kCategory, root_key);
  if (!root_page) throw RootNotFoundError(root_key);
  if (rules.classify(root_key) != ingest::CategoryClass::kTopical) {
    throw InputError("root category '" + root_key + "' is removed by the filter rules");
  }

  // Local dense indices over the raw pages, in page-id order.
  std::vector<std::uint64_t> page_ids;
  page_ids.reserve(raw.pages.size());
  for (const auto& [id, page] : raw.pages) page_ids.push_back(id);
  std::sort(page_ids.begin(), page_ids.end());
  std::unordered_map<std::uint64_t, std::size_t> local;
  local.reserve(page_ids.size());
  for (std::size_t i = 0; i < page_ids.size(); ++i) local.emplace(page_ids[i], i);

  const auto& page_of = [&](std::size_t i) -> const ingest::PageRecord& {
    return raw.pages.at(page_ids[i]);
  };
  std::vector<bool> topical(page_ids.size(), false);
  for (std::size_t i = 0; i < page_ids.size(); ++i) {
    const auto& page = page_of(i);
    topical[i] = page.ns == Namespace::kArticle ||
                 rules.classify(page.title) == ingest::CategoryClass::kTopical;
  }

  std::vector<std::vector<std::size_t>> down(page_ids.size());
  for (const auto& [child_id, parent_id] : raw.edges) {
    const std::size_t child = local.at(child_id);
    const std::size_t parent = local.at(parent_id);
    if (topical[child] && topical[parent]) down[parent].push_back(child);
  }

  // Breadth-first from the root over surviving child edges. Articles are
  // marked but never expanded.
  const std::size_t root = local.at(*root_page);
  std::vector<bool> kept(page_ids.size(), false);
  std::deque<std::size_t> queue{root};
  kept[root] = true;
  while (!queue.empty()) {
    const std::size_t at = queue.front();
    queue.pop_front();
    for (std::size_t c : down[at]) {
      if (kept[c]) continue;
      kept[c] = true;
      if (page_of(c).ns == Namespace::kCategory) queue.push_back(c);
    }
  }

  std::vector<std::size_t> categories;
  std::vector<std::size_t> leaves;
  for (std::size_t i = 0; i < page_ids.size(); ++i) {
    if (!kept[i] || i == root) continue;
    (page_of(i).ns == Namespace::kCategory ? categories : leaves).push_back(i);
  }
  const auto by_title = [&](std::size_t a, std::size_t b) {
    return page_of(a).title < page_of(b).title;
  };
  std::sort(categories.begin(), categories.end(), by_title);
  std::sort(leaves.begin(), leaves.end(), by_title);

  constexpr std::uint32_t kDropped = UINT32_MAX;
  std::vector<std::uint32_t> dense(page_ids.size(), kDropped);
  std::vector<ConceptNode> nodes;
  nodes.reserve(1 + categories.size() + leaves.size());
  const auto add = [&](std::size_t i, ConceptKind kind) {
    const auto id = static_cast<std::uint32_t>(nodes.size());
    dense[i] = id;
    nodes.push_back(ConceptNode{ConceptId{id}, page_of(i).title, kind, {}});
  };
  add(root, ConceptKind::kCategory);
  for (std::size_t i : categories) add(i, ConceptKind::kCategory);
  for (std::size_t i : leaves) add(i, ConceptKind::kLeaf);

  for (std::size_t parent = 0; parent < page_ids.size(); ++parent) {
    if (dense[parent] == kDropped || page_of(parent).ns != Namespace::kCategory) continue;
    for (std::size_t child : down[parent]) {
      if (dense[child] == kDropped || child == root) continue;
      nodes[dense[child]].parents.push_back(ConceptId{dense[parent]});
    }
  }
  return ConceptOntology(std::move(nodes));
}

ConceptSet ancestors(const ConceptOntology& ontology, ConceptId id, MaxDepth max_depth) {
  if (!ontology.contains(id)) throw ArgumentError("concept id " + id_string(id) + " out of range");
  if (max_depth && *max_depth == 0) throw ArgumentError("max_depth must be positive");
  ConceptSet visited;
  std::vector<ConceptId> frontier{id};
  for (std::size_t depth = 0; !frontier.empty() && (!max_depth || depth < *max_depth); ++depth) {
    std::vector<ConceptId> next;
    for (ConceptId at : frontier) {
      for (ConceptId p : ontology.node(at).parents) {
        if (p != id && visited.insert(p).second) next.push_back(p);
      }
    }
    frontier = std::move(next);
  }
  return visited;
}

ConceptSet induced_concept_tree(const ConceptOntology& ontology, const ConceptSet& leaves,
                                MaxDepth max_depth) {
  ConceptSet tree;
  for (ConceptId leaf : leaves) {
    auto up = ancestors(ontology, leaf, max_depth);
    tree.insert(leaf);
    tree.merge(up);
  }
  return tree;
}

OntologyStats stats(const ConceptOntology& ontology) {
  OntologyStats s;
  std::size_t leaf_links = 0;
  for (const auto& n : ontology.nodes()) {
    if (n.kind == ConceptKind::kCategory) {
      ++s.category_count;
    } else {
      ++s.leaf_count;
      leaf_links += n.parents.size();
    }
  }
  s.edge_count = ontology.edge_count();
  s.mean_categories_per_leaf =
      s.leaf_count == 0 ? 0.0 : static_cast<double>(leaf_links) / static_cast<double>(s.leaf_count);
  return s;
}

void save_ontology(const ConceptOntology& ontology, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());

  const auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + (dir / name).string());
    return out;
  };
  const auto finish = [&](std::ofstream& out, const char* name) {
    out.flush();
    if (!out) throw InputError("write failure in " + (dir / name).string());
  };

  auto meta = open("meta.tsv");
  meta << "version\t" << kFormatVersion << "\troot_id\t" << ontology.root().value << '\n';
  finish(meta, "meta.tsv");

  auto nodes = open("nodes.tsv");
  for (const auto& n : ontology.nodes()) {
    nodes << n.id.value << '\t' << to_string(n.kind) << '\t' << n.title << '\n';
  }
  finish(nodes, "nodes.tsv");

  // Parents are stored sorted, so node order yields (child, parent) order.
  auto edges = open("edges.tsv");
  for (const auto& n : ontology.nodes()) {
    for (ConceptId p : n.parents) edges << n.id.value << '\t' << p.value << '\n';
  }
  finish(edges, "edges.tsv");
}

ConceptOntology load_ontology(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  for (const char* name : {"meta.tsv", "nodes.tsv", "edges.tsv"}) {
    if (!std::filesystem::exists(dir / name)) {
      throw InputError("missing " + std::string(name) + " in " + dir.string());
    }
  }

  bool have_meta = false;
  for_each_line(dir / "meta.tsv", [&](const std::vector<std::string_view>& f) {
    if (have_meta || f.size() != 4 || f[0] != "version" || f[2] != "root_id") return false;
    if (f[1] != kFormatVersion) throw IncompatibleFormatError("version " + std::string(f[1]));
    if (f[3] != "0") throw IncompatibleFormatError("root_id " + std::string(f[3]));
    have_meta = true;
    return true;
  });
  if (!have_meta) throw IncompatibleFormatError("empty meta.tsv");

  std::vector<ConceptNode> nodes;
  for_each_line(dir / "nodes.tsv", [&](const std::vector<std::string_view>& f) {
    if (f.size() != 3) return false;
    const auto id = parse_u32(f[0]);
    if (!id || *id != nodes.size()) return false;
    ConceptKind kind;
    if (f[1] == "category") {
      kind = ConceptKind::kCategory;
    } else if (f[1] == "leaf") {
      kind = ConceptKind::kLeaf;
    } else {
      return false;
    }
    nodes.push_back(ConceptNode{ConceptId{*id}, std::string(f[2]), kind, {}});
    return true;
  });

  std::pair<std::uint32_t, std::uint32_t> previous{0, 0};
  bool first = true;
  for_each_line(dir / "edges.tsv", [&](const std::vector<std::string_view>& f) {
    if (f.size() != 2) return false;
    const auto child = parse_u32(f[0]);
    const auto parent = parse_u32(f[1]);
    if (!child || !parent || *child >= nodes.size() || *parent >= nodes.size()) return false;
    const std::pair current{*child, *parent};
    if (!first && current <= previous) return false;
    first = false;
    previous = current;
    nodes[*child].parents.push_back(ConceptId{*parent});
    return true;
  });

  try {
    return ConceptOntology(std::move(nodes));
  } catch (const ArgumentError& e) {
    throw InputError("invalid ontology in " + dir.string() + ": " + e.what());
  }
}

}  // namespace discourse
