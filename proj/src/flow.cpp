#include "discourse/flow.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <unordered_map>

#include "discourse/text.hpp"
#include "json.hpp"

namespace discourse {
namespace {

using nlohmann::json;

constexpr std::size_t kDotTextLength = 48;

// ColorBrewer Set3, assigned to speakers by first appearance.
constexpr std::array<const char*, 12> kSpeakerPalette = {
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
    "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f"};

double round6(double x) { return std::round(x * 1e6) / 1e6; }

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string dot_quote(std::string_view text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

// Posting lists of sentence indices per key, ascending.
template <typename Key, typename Hash = std::hash<Key>>
class Postings {
 public:
  void add(const Key& key, std::size_t sentence) { lists_[key].push_back(sentence); }

  template <typename Fn>
  void for_each_after(const Key& key, std::size_t i, Fn fn) const {
    const auto it = lists_.find(key);
    if (it == lists_.end()) return;
    const auto& list = it->second;
    for (auto p = std::upper_bound(list.begin(), list.end(), i); p != list.end(); ++p) fn(*p);
  }

 private:
  std::unordered_map<Key, std::vector<std::size_t>, Hash> lists_;
};

// Later sentences sharing at least one key with sentence i under `method`;
// nullopt means every later sentence is a candidate.
class CandidateFinder {
 public:
  CandidateFinder(const SentenceFeatures& f, SimilarityMethod method)
      : features_(f), method_(method), stamp_(f.tokens.size(), SIZE_MAX) {
    for (std::size_t i = 0; i < f.tokens.size(); ++i) {
      switch (method) {
        case SimilarityMethod::kConceptJoint:
          for (const auto& [c, w] : f.concepts[i].entries()) concepts_.add(c, i);
          [[fallthrough]];
        case SimilarityMethod::kTextOnly:
          for (const auto& [t, w] : f.words[i].entries()) words_.add(t, i);
          break;
        case SimilarityMethod::kWordOverlap: {
          const std::set<std::string> present(f.tokens[i].begin(), f.tokens[i].end());
          for (const auto& t : present) words_.add(t, i);
          break;
        }
        case SimilarityMethod::kAvgEmbedding:
          break;
      }
    }
  }

  std::optional<std::vector<std::size_t>> candidates(std::size_t i) {
    if (method_ == SimilarityMethod::kAvgEmbedding) return std::nullopt;
    std::vector<std::size_t> out;
    const auto mark = [&](std::size_t j) {
      if (stamp_[j] != i) {
        stamp_[j] = i;
        out.push_back(j);
      }
    };
    if (method_ == SimilarityMethod::kConceptJoint) {
      for (const auto& [c, w] : features_.concepts[i].entries()) concepts_.for_each_after(c, i, mark);
    }
    if (method_ == SimilarityMethod::kWordOverlap) {
      for (const auto& t : features_.tokens[i]) words_.for_each_after(t, i, mark);
    } else {
      for (const auto& [t, w] : features_.words[i].entries()) words_.for_each_after(t, i, mark);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  const SentenceFeatures& features_;
  SimilarityMethod method_;
  Postings<ConceptId, ConceptIdHash> concepts_;
  Postings<std::string> words_;
  std::vector<std::size_t> stamp_;
};

json concept_list(const std::vector<ConceptWeight>& items) {
  json out = json::array();
  for (const auto& c : items) {
    out.push_back({{"id", c.id.value}, {"title", c.title}, {"weight", round6(c.weight)}});
  }
  return out;
}

json word_list(const std::vector<WordWeight>& items) {
  json out = json::array();
  for (const auto& w : items) out.push_back({{"token", w.token}, {"weight", round6(w.weight)}});
  return out;
}

const json& field(const json& object, const char* key) {
  if (!object.is_object() || !object.contains(key)) {
    throw InputError(std::string("flow JSON: missing field '") + key + "'");
  }
  return object.at(key);
}

template <typename T>
T get(const json& object, const char* key) {
  try {
    return field(object, key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("flow JSON: bad field '") + key + "': " + e.what());
  }
}

std::vector<ConceptWeight> parse_concepts(const json& list) {
  if (!list.is_array()) throw InputError("flow JSON: concept list is not an array");
  std::vector<ConceptWeight> out;
  for (const auto& c : list) {
    out.push_back({ConceptId{get<std::uint32_t>(c, "id")}, get<std::string>(c, "title"),
                   get<double>(c, "weight")});
  }
  return out;
}

std::vector<WordWeight> parse_words(const json& list) {
  if (!list.is_array()) throw InputError("flow JSON: word list is not an array");
  std::vector<WordWeight> out;
  for (const auto& w : list) out.push_back({get<std::string>(w, "token"), get<double>(w, "weight")});
  return out;
}

}  // namespace

std::vector<std::optional<SentenceMatch>> forward_argmax(std::size_t n, const PairScore& score,
                                                         double threshold) {
  std::vector<std::optional<SentenceMatch>> best(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::optional<SentenceMatch> top;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = score(i, j);
      if (!top || s > top->score) top = SentenceMatch{j, s};
    }
    if (top && top->score > 0.0 && top->score >= threshold) best[i] = top;
  }
  return best;
}

std::vector<std::optional<SentenceMatch>> best_forward_matches(const SentenceScorer& scorer,
                                                              SimilarityMethod method,
                                                              double threshold) {
  const std::size_t n = scorer.size();
  std::vector<std::optional<SentenceMatch>> best(n);
  CandidateFinder finder(scorer.features(), method);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::optional<SentenceMatch> top;
    const auto consider = [&](std::size_t j) {
      const double s = scorer.score(method, i, j);
      if (!top || s > top->score) top = SentenceMatch{j, s};
    };
    if (auto candidates = finder.candidates(i)) {
      for (std::size_t j : *candidates) consider(j);
    } else {
      for (std::size_t j = i + 1; j < n; ++j) consider(j);
    }
    if (top && top->score > 0.0 && top->score >= threshold) best[i] = top;
  }
  return best;
}

std::optional<SentenceMatch> best_match(const SentenceScorer& scorer, SimilarityMethod method,
                                       std::size_t anchor) {
  if (anchor >= scorer.size()) throw ArgumentError("anchor index out of range");
  std::optional<SentenceMatch> top;
  for (std::size_t j = 0; j < scorer.size(); ++j) {
    if (j == anchor) continue;
    const double s = scorer.score(method, anchor, j);
    if (s > 0.0 && (!top || s > top->score)) top = SentenceMatch{j, s};
  }
  return top;
}

EdgeAnnotation annotate_edge(std::size_t i, std::size_t j, std::span<const ConceptVector> concepts,
                             std::span<const WordVector> words, std::size_t top_k) {
  if (i >= concepts.size() || j >= concepts.size() || i >= words.size() || j >= words.size()) {
    throw ArgumentError("edge endpoint out of range");
  }
  return {shared_keys(concepts[i], concepts[j], top_k), shared_keys(words[i], words[j], top_k)};
}

std::vector<ConceptImportance> rank_concepts(std::span<const ConceptVector> concepts,
                                             std::size_t top_k) {
  std::map<ConceptId, double> totals;
  for (const auto& v : concepts) {
    for (const auto& [c, w] : v.entries()) totals[c] += w;
  }
  std::vector<ConceptImportance> ranked;
  ranked.reserve(totals.size());
  for (const auto& [c, s] : totals) ranked.push_back({c, s});
  // Stable over id-ordered input, so equal scores stay id-ascending.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  if (ranked.size() > top_k) ranked.resize(top_k);
  return ranked;
}

FlowGraph build_flow(const Transcript& transcript, const SentenceScorer& scorer,
                     const FlowOptions& options, const TitleLookup& titles) {
  const std::size_t n = transcript.sentences.size();
  if (scorer.size() != n) throw ArgumentError("feature vectors not aligned with transcript");
  if (options.threshold < 0.0) throw ArgumentError("threshold must be non-negative");
  const auto& f = scorer.features();
  const auto title_of = [&](ConceptId id) { return titles ? titles(id) : std::string(); };

  FlowGraph flow;
  flow.transcript_id = transcript.id;
  flow.method = options.method;
  flow.threshold = options.threshold;
  flow.nodes.reserve(n);
  for (const auto& s : transcript.sentences) {
    FlowNode node{s.index, s.speaker, s.text, {}};
    std::vector<std::pair<ConceptId, double>> ranked = f.concepts[s.index].entries();
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (ranked.size() > options.top_k) ranked.resize(options.top_k);
    for (const auto& [c, w] : ranked) node.concepts.push_back({c, title_of(c), w});
    flow.nodes.push_back(std::move(node));
  }

  const auto matches = best_forward_matches(scorer, options.method, options.threshold);
  for (std::size_t i = 0; i < n; ++i) {
    if (!matches[i]) continue;
    FlowEdge edge{i, matches[i]->to, matches[i]->score, {}, {}};
    const auto shared = annotate_edge(i, edge.to, f.concepts, f.words, options.top_k);
    for (const auto& [c, w] : shared.shared_concepts) edge.shared_concepts.push_back({c, title_of(c), w});
    for (const auto& [t, w] : shared.shared_words) edge.shared_words.push_back({t, w});
    flow.edges.push_back(std::move(edge));
  }
  return flow;
}

std::string export_dot(const FlowGraph& flow) {
  std::map<std::string, std::size_t> palette;
  for (const auto& node : flow.nodes) palette.try_emplace(node.speaker, palette.size());

  std::ostringstream out;
  out << "digraph flow {\n";
  out << "  label=" << dot_quote(flow.transcript_id + " (" + std::string(to_string(flow.method)) + ")")
      << ";\n";
  out << "  node [shape=box, style=\"rounded,filled\", fontname=\"Helvetica\"];\n";
  for (const auto& node : flow.nodes) {
    const char* color = kSpeakerPalette[palette.at(node.speaker) % kSpeakerPalette.size()];
    out << "  s" << node.index << " [label="
        << dot_quote(std::to_string(node.index) + ": " + truncate_text(node.text, kDotTextLength))
        << ", fillcolor=\"" << color << "\", tooltip=" << dot_quote(node.speaker) << "];\n";
  }
  for (const auto& edge : flow.edges) {
    std::string label;
    if (!edge.shared_concepts.empty()) {
      const auto& top = edge.shared_concepts.front();
      label = top.title.empty() ? "#" + std::to_string(top.id.value) : top.title;
    } else if (!edge.shared_words.empty()) {
      label = edge.shared_words.front().token;
    }
    out << "  s" << edge.from << " -> s" << edge.to << " [label=" << dot_quote(label)
        << ", tooltip=" << dot_quote("score " + fixed6(edge.score)) << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string export_json(const FlowGraph& flow) {
  json nodes = json::array();
  for (const auto& node : flow.nodes) {
    nodes.push_back({{"i", node.index},
                     {"speaker", node.speaker},
                     {"text", node.text},
                     {"concepts", concept_list(node.concepts)}});
  }
  json edges = json::array();
  for (const auto& edge : flow.edges) {
    edges.push_back({{"from", edge.from},
                     {"to", edge.to},
                     {"score", round6(edge.score)},
                     {"shared_concepts", concept_list(edge.shared_concepts)},
                     {"shared_words", word_list(edge.shared_words)}});
  }
  const json doc = {{"transcript_id", flow.transcript_id},
                    {"method", to_string(flow.method)},
                    {"threshold", round6(flow.threshold)},
                    {"nodes", std::move(nodes)},
                    {"edges", std::move(edges)}};
  return doc.dump(2) + "\n";
}

FlowGraph parse_flow_json(const std::string& text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw InputError("flow JSON: not an object");
  FlowGraph flow;
  flow.transcript_id = get<std::string>(doc, "transcript_id");
  const auto method = parse_method(get<std::string>(doc, "method"));
  if (!method) throw InputError("flow JSON: unknown method");
  flow.method = *method;
  flow.threshold = get<double>(doc, "threshold");
  const auto& nodes = field(doc, "nodes");
  const auto& edges = field(doc, "edges");
  if (!nodes.is_array() || !edges.is_array()) throw InputError("flow JSON: nodes/edges not arrays");
  for (const auto& n : nodes) {
    flow.nodes.push_back({get<std::size_t>(n, "i"), get<std::string>(n, "speaker"),
                          get<std::string>(n, "text"), parse_concepts(field(n, "concepts"))});
  }
  for (const auto& e : edges) {
    flow.edges.push_back({get<std::size_t>(e, "from"), get<std::size_t>(e, "to"),
                          get<double>(e, "score"), parse_concepts(field(e, "shared_concepts")),
                          parse_words(field(e, "shared_words"))});
  }
  return flow;
}

}  // namespace discourse
