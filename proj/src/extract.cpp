#include "discourse/extract.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include "json.hpp"

#include "discourse/error.hpp"
#include "discourse/text.hpp"

namespace discourse {
namespace {

const std::set<std::string, std::less<>>& abbreviations() {
  static const std::set<std::string, std::less<>> kAbbreviations = {
      "Mr.",  "Mrs.", "Ms.",   "Dr.",  "Prof.", "Sr.",  "Jr.",  "St.",   "Gen.",  "Gov.",
      "Sen.", "Rep.", "Rev.",  "Capt.", "Lt.",  "Col.", "Sgt.", "Mt.",   "vs.",   "etc.",
      "Inc.", "Ltd.", "Co.",   "Corp.", "No.",  "Fig.", "Vol.", "approx.", "Jan.", "Feb.",
      "Mar.", "Apr.", "Aug.",  "Sept.", "Sep.", "Oct.", "Nov.", "Dec.",  "cf.",   "al.",
  };
  return kAbbreviations;
}

bool is_ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

// True when the '.' at `dot` terminates an abbreviation or initialism.
bool ends_abbreviation(std::string_view text, std::size_t dot) {
  std::size_t start = dot;
  while (start > 0 && !is_ascii_space(text[start - 1]) && text[start - 1] != '(' &&
         text[start - 1] != '"') {
    --start;
  }
  const std::string_view word = text.substr(start, dot + 1 - start);
  if (abbreviations().contains(word)) return true;
  // Dotted initialisms (U.S., e.g.) and single capital initials (F.).
  if (word.size() >= 3 && word.substr(0, word.size() - 1).find('.') != std::string_view::npos) {
    return true;
  }
  return word.size() == 2 && word[0] >= 'A' && word[0] <= 'Z';
}

// Whether position `at` (just past the terminator run) starts a new
// sentence: whitespace, optional opening quotes, then an uppercase letter.
bool starts_new_sentence(std::string_view text, std::size_t at) {
  if (at < text.size() && !is_ascii_space(text[at])) return false;
  while (at < text.size() && is_ascii_space(text[at])) ++at;
  if (at == text.size()) return true;
  while (at < text.size() && (text[at] == '"' || text[at] == '\'' || text[at] == '(')) ++at;
  if (at == text.size()) return false;
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  auto i = static_cast<int32_t>(at);
  UChar32 c;
  U8_NEXT(s, i, static_cast<int32_t>(text.size()), c);
  return c >= 0 && (u_isupper(c) || u_istitle(c));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  std::size_t k = 0;
  const auto emit = [&](std::size_t end) {
    const auto piece = trim(text.substr(begin, end - begin));
    if (!piece.empty()) out.emplace_back(piece);
    begin = end;
  };
  while (k < text.size()) {
    const char c = text[k];
    if (c != '.' && c != '?' && c != '!') {
      ++k;
      continue;
    }
    const bool abbreviation = c == '.' && ends_abbreviation(text, k);
    std::size_t end = k + 1;
    while (end < text.size() &&
           (text[end] == '.' || text[end] == '?' || text[end] == '!' || is_closer(text[end]))) {
      ++end;
    }
    const bool at_end = trim(text.substr(end)).empty();
    if (at_end || (!abbreviation && starts_new_sentence(text, end))) emit(end);
    k = end;
  }
  emit(text.size());
  return out;
}

}  // namespace

std::vector<Utterance> read_utterances(std::istream& in) {
  std::vector<Utterance> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    const auto fail = [&](const std::string& why) {
      throw InputError("transcript line " + std::to_string(number) + ": " + why);
    };
    const auto value = nlohmann::json::parse(line, nullptr, false);
    if (value.is_discarded() || !value.is_object()) fail("not a JSON object");
    const auto speaker = value.find("speaker");
    const auto text = value.find("text");
    if (speaker == value.end() || !speaker->is_string()) fail("missing string field 'speaker'");
    if (text == value.end() || !text->is_string()) fail("missing string field 'text'");
    out.push_back({speaker->get<std::string>(), text->get<std::string>()});
  }
  if (in.bad()) throw InputError("transcript read failure at line " + std::to_string(number + 1));
  return out;
}

Transcript segment_transcript(std::span<const Utterance> utterances, std::string id) {
  Transcript transcript{std::move(id), {}};
  for (const auto& u : utterances) {
    for (auto& text : split_sentences(u.text)) {
      Sentence s;
      s.index = transcript.sentences.size();
      s.speaker = u.speaker;
      s.tokens = tokenize(text);
      s.text = std::move(text);
      transcript.sentences.push_back(std::move(s));
    }
  }
  if (transcript.sentences.empty()) throw EmptyTranscriptError(transcript.id);
  return transcript;
}

std::set<std::string> default_stop_titles() {
  return {"a",    "an",   "and",  "are",  "as",   "at",   "be",  "but",  "by",   "can",
          "do",   "for",  "he",   "her",  "his",  "i",    "if",  "in",   "is",   "it",
          "its",  "me",   "my",   "no",   "not",  "of",   "on",  "or",   "our",  "she",
          "so",   "that", "the",  "their", "them", "they", "this", "to",  "us",   "was",
          "we",   "what", "when", "who",  "why",  "will", "with", "yes", "you",  "your"};
}

std::optional<std::uint32_t> SurfaceFormIndex::token_id(const std::string& token) const {
  const auto it = vocabulary_.find(token);
  if (it == vocabulary_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> SurfaceFormIndex::step(std::uint32_t node,
                                                    const std::string& token) const {
  const auto tok = token_id(token);
  if (!tok) return std::nullopt;
  const auto it = edges_.find((std::uint64_t{node} << 32) | *tok);
  if (it == edges_.end()) return std::nullopt;
  return it->second;
}

bool SurfaceFormIndex::insert(std::span<const std::string> key, ConceptId leaf) {
  if (key.empty()) return false;
  std::uint32_t node = 0;
  for (const auto& token : key) {
    const auto tok =
        vocabulary_.try_emplace(token, static_cast<std::uint32_t>(vocabulary_.size())).first->second;
    const auto [it, added] = edges_.try_emplace((std::uint64_t{node} << 32) | tok,
                                                static_cast<std::uint32_t>(terminal_.size()));
    if (added) terminal_.push_back(kNoConcept);
    node = it->second;
  }
  if (terminal_[node] != kNoConcept) return false;
  terminal_[node] = leaf.value;
  ++entries_;
  max_tokens_ = std::max(max_tokens_, key.size());
  return true;
}

std::optional<ConceptId> SurfaceFormIndex::lookup(std::span<const std::string> key) const {
  if (key.empty()) return std::nullopt;
  std::uint32_t node = 0;
  for (const auto& token : key) {
    const auto next = step(node, token);
    if (!next) return std::nullopt;
    node = *next;
  }
  if (terminal_[node] == kNoConcept) return std::nullopt;
  return ConceptId{terminal_[node]};
}

std::optional<std::pair<ConceptId, std::size_t>> SurfaceFormIndex::longest_match(
    std::span<const std::string> tokens, std::size_t begin) const {
  std::optional<std::pair<ConceptId, std::size_t>> best;
  std::uint32_t node = 0;
  for (std::size_t t = begin; t < tokens.size(); ++t) {
    const auto next = step(node, tokens[t]);
    if (!next) break;
    node = *next;
    if (terminal_[node] != kNoConcept) best = std::make_pair(ConceptId{terminal_[node]}, t + 1 - begin);
  }
  return best;
}

std::string strip_disambiguator(const std::string& title) {
  if (title.size() < 3 || title.back() != ')') return title;
  const std::size_t open = title.rfind(" (");
  if (open == std::string::npos || open == 0) return title;
  return title.substr(0, open);
}

SurfaceFormIndex build_surface_index(const ConceptOntology& ontology,
                                     const SurfaceIndexOptions& options) {
  std::vector<const ConceptNode*> leaves;
  for (const auto& n : ontology.nodes()) {
    if (n.kind == ConceptKind::kLeaf) leaves.push_back(&n);
  }
  // Distilled ids are already title-ordered; sorting keeps hand-built
  // ontologies deterministic too.
  std::sort(leaves.begin(), leaves.end(),
            [](const ConceptNode* a, const ConceptNode* b) { return a->title < b->title; });

  SurfaceFormIndex index;
  auto& counters = index.counters;
  for (const ConceptNode* leaf : leaves) {
    const auto key = tokenize(strip_disambiguator(leaf->title));
    if (key.empty() || key.size() < options.min_tokens) {
      ++counters.skipped_short;
      continue;
    }
    if (options.stop_titles.contains(join(key, " "))) {
      ++counters.skipped_stop;
      continue;
    }
    if (index.insert(key, leaf->id)) {
      ++counters.indexed;
    } else {
      ++counters.collisions;
    }
  }
  return index;
}

void merge_surface_forms(SurfaceFormIndex& index, const ConceptOntology& ontology,
                         std::istream& in, const SurfaceIndexOptions& options) {
  auto& counters = index.counters;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos ||
        !is_valid_utf8(line)) {
      ++counters.extra_malformed;
      continue;
    }
    const auto key = tokenize(line.substr(0, tab));
    const auto leaf = ontology.find(ConceptKind::kLeaf, normalize_title(line.substr(tab + 1)));
    if (!leaf) {
      ++counters.extra_unknown_leaf;
      continue;
    }
    if (key.empty() || key.size() < options.min_tokens ||
        options.stop_titles.contains(join(key, " "))) {
      ++counters.skipped_short;
      continue;
    }
    if (index.insert(key, *leaf)) {
      ++counters.extra_indexed;
    } else {
      ++counters.collisions;
    }
  }
  if (in.bad()) throw InputError("surface-form file read failure");
}

std::vector<ConceptMention> extract_concepts(std::span<const std::string> tokens,
                                             const SurfaceFormIndex& index) {
  std::vector<ConceptMention> mentions;
  std::size_t t = 0;
  while (t < tokens.size()) {
    const auto match = index.longest_match(tokens, t);
    if (!match) {
      ++t;
      continue;
    }
    const auto [leaf, length] = *match;
    std::vector<std::string> span(tokens.begin() + static_cast<std::ptrdiff_t>(t),
                                  tokens.begin() + static_cast<std::ptrdiff_t>(t + length));
    mentions.push_back({leaf, join(span, " "), t, t + length});
    t += length;
  }
  return mentions;
}

std::vector<ConceptMention> extract_concepts(const Sentence& sentence,
                                             const SurfaceFormIndex& index) {
  return extract_concepts(sentence.tokens, index);
}

ConceptSet concept_tree_for_sentence(std::span<const ConceptMention> mentions,
                                     const ConceptOntology& ontology, MaxDepth max_depth) {
  ConceptSet leaves;
  for (const auto& m : mentions) leaves.insert(m.leaf);
  return induced_concept_tree(ontology, leaves, max_depth);
}

std::vector<ConceptSet> annotate_transcript(Transcript& transcript, const SurfaceFormIndex& index,
                                            const ConceptOntology& ontology, MaxDepth max_depth) {
  std::vector<ConceptSet> trees;
  trees.reserve(transcript.sentences.size());
  for (auto& s : transcript.sentences) {
    s.mentions = extract_concepts(s, index);
    trees.push_back(concept_tree_for_sentence(s.mentions, ontology, max_depth));
  }
  return trees;
}

}  // namespace discourse
