#include <random>
#include <sstream>

#include "discourse/error.hpp"
#include "discourse/extract.hpp"
#include "discourse/text.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace discourse;
using testutil::kCat;
using testutil::kLeaf;
using Tokens = std::vector<std::string>;

namespace {

ConceptOntology vocabulary_ontology() {
  return testutil::make_ontology({{"Root", kCat, {}},                      // 0
                                  {"Health", kCat, {0}},                   // 1
                                  {"Agencies", kCat, {0}},                 // 2
                                  {"FDA", kLeaf, {2}},                     // 3
                                  {"Food and Drug Administration", kLeaf, {2}},  // 4
                                  {"Health care", kLeaf, {1}},             // 5
                                  {"Health care costs", kLeaf, {1}},       // 6
                                  {"Mercury (element)", kLeaf, {0}},       // 7
                                  {"Mercury (planet)", kLeaf, {0}},        // 8
                                  {"The", kLeaf, {0}}});                   // 9
}

SurfaceIndexOptions default_options() {
  SurfaceIndexOptions options;
  options.stop_titles = default_stop_titles();
  return options;
}

}  // namespace

TEST_CASE("segment_transcript") {
  SUBCASE("two sentences in one utterance") {
    const std::vector<Utterance> u{{"Ana", "I agree. But costs rose."}};
    const auto t = segment_transcript(u, "d");
    REQUIRE(t.sentences.size() == 2);
    CHECK(t.sentences[0].text == "I agree.");
    CHECK(t.sentences[1].text == "But costs rose.");
    CHECK(t.sentences[1].speaker == "Ana");
  }
  SUBCASE("abbreviation guard") {
    const std::vector<Utterance> u{{"Ana", "The U.S. market is big."}};
    CHECK(segment_transcript(u, "d").sentences.size() == 1);
    const std::vector<Utterance> v{{"Ana", "Dr. Smith agrees with Mr. Jones. He said so!"}};
    const auto t = segment_transcript(v, "d");
    REQUIRE(t.sentences.size() == 2);
    CHECK(t.sentences[1].text == "He said so!");
  }
  SUBCASE("indices run across utterances") {
    const std::vector<Utterance> u{{"A", "One."}, {"B", "Two?"}, {"A", "Three!"}};
    const auto t = segment_transcript(u, "d");
    REQUIRE(t.sentences.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(t.sentences[i].index == i);
    CHECK(t.sentences[1].speaker == "B");
  }
  SUBCASE("no split before lowercase or inside numbers") {
    const std::vector<Utterance> u{{"A", "Costs rose 3.5 percent. then fell? Yes."}};
    const auto t = segment_transcript(u, "d");
    REQUIRE(t.sentences.size() == 2);
    CHECK(t.sentences[0].text == "Costs rose 3.5 percent. then fell?");
  }
  SUBCASE("closing quotes stay with the sentence") {
    const std::vector<Utterance> u{{"A", "He said \"no.\" Then left."}};
    const auto t = segment_transcript(u, "d");
    REQUIRE(t.sentences.size() == 2);
    CHECK(t.sentences[0].text == "He said \"no.\"");
  }
  SUBCASE("tokens are filled") {
    const std::vector<Utterance> u{{"A", "Blame Big Pharma!"}};
    CHECK(segment_transcript(u, "d").sentences[0].tokens == Tokens{"blame", "big", "pharma"});
  }
  SUBCASE("empty input") {
    const std::vector<Utterance> blank{{"A", "   "}, {"B", ""}};
    CHECK_THROWS_AS(segment_transcript(blank, "d"), EmptyTranscriptError);
    CHECK_THROWS_AS(segment_transcript({}, "d"), EmptyTranscriptError);
  }
}

TEST_CASE("read_utterances") {
  std::istringstream in("{\"speaker\": \"A\", \"text\": \"Hi.\"}\n\n{\"text\": \"Yo.\", \"speaker\": \"B\"}\n");
  const auto u = read_utterances(in);
  REQUIRE(u.size() == 2);
  CHECK(u[1].speaker == "B");
  std::istringstream bad("{\"speaker\": \"A\"}\n");
  CHECK_THROWS_AS(read_utterances(bad), InputError);
  std::istringstream not_json("speaker=A\n");
  CHECK_THROWS_AS(read_utterances(not_json), InputError);
}

TEST_CASE("build_surface_index") {
  const auto o = vocabulary_ontology();
  const auto index = build_surface_index(o, default_options());
  CHECK(index.lookup(Tokens{"food", "and", "drug", "administration"}) == ConceptId{4});
  CHECK(index.lookup(Tokens{"fda"}) == ConceptId{3});
  // Mercury (element) < Mercury (planet): the element wins the shared key.
  CHECK(index.lookup(Tokens{"mercury"}) == ConceptId{7});
  CHECK(index.counters.collisions == 1);
  CHECK_FALSE(index.lookup(Tokens{"the"}).has_value());
  CHECK(index.counters.skipped_stop == 1);
  CHECK_FALSE(index.lookup(Tokens{"health"}).has_value());
  CHECK(index.max_pattern_tokens() == 4);
  CHECK(index.size() == 5);

  SurfaceIndexOptions two;
  two.min_tokens = 2;
  const auto long_only = build_surface_index(o, two);
  CHECK_FALSE(long_only.lookup(Tokens{"fda"}).has_value());
  CHECK(long_only.lookup(Tokens{"health", "care"}) == ConceptId{5});
}

TEST_CASE("strip_disambiguator") {
  CHECK(strip_disambiguator("Mercury (element)") == "Mercury");
  CHECK(strip_disambiguator("Mercury") == "Mercury");
  CHECK(strip_disambiguator("(Untitled)") == "(Untitled)");
}

TEST_CASE("merge_surface_forms") {
  const auto o = vocabulary_ontology();
  auto index = build_surface_index(o, default_options());
  std::istringstream extra(
      "U.S. Food and Drug Administration\tFood and Drug Administration\n"
      "quicksilver\tMercury_(element)\n"
      "fda\tFood and Drug Administration\n"
      "ghost\tNo such leaf\n"
      "malformed line\n");
  merge_surface_forms(index, o, extra, default_options());
  CHECK(index.lookup(Tokens{"quicksilver"}) == ConceptId{7});
  CHECK(index.lookup(Tokens{"u", "s", "food", "and", "drug", "administration"}) == ConceptId{4});
  CHECK(index.lookup(Tokens{"fda"}) == ConceptId{3});  // title entry kept
  CHECK(index.counters.extra_indexed == 2);
  CHECK(index.counters.extra_unknown_leaf == 1);
  CHECK(index.counters.extra_malformed == 1);
  CHECK(index.counters.collisions == 2);
}

TEST_CASE("extract_concepts") {
  const auto o = vocabulary_ontology();
  const auto index = build_surface_index(o, default_options());
  SUBCASE("single-token concept") {
    const Tokens s{"the", "fda", "is", "the", "biggest", "barrier"};
    const auto m = extract_concepts(s, index);
    REQUIRE(m.size() == 1);
    CHECK(m[0] == ConceptMention{ConceptId{3}, "fda", 1, 2});
  }
  SUBCASE("longest match wins") {
    const Tokens s{"rising", "health", "care", "costs"};
    const auto m = extract_concepts(s, index);
    REQUIRE(m.size() == 1);
    CHECK(m[0] == ConceptMention{ConceptId{6}, "health care costs", 1, 4});
  }
  SUBCASE("shorter key when the longer does not continue") {
    const Tokens s{"health", "care", "reform", "health", "care"};
    const auto m = extract_concepts(s, index);
    REQUIRE(m.size() == 2);
    CHECK(m[0].leaf == ConceptId{5});
    CHECK(m[1].begin == 3);
  }
  SUBCASE("no match") { CHECK(extract_concepts(Tokens{"nothing", "here"}, index).empty()); }
}

TEST_CASE("concept_tree_for_sentence") {
  const auto o = testutil::make_ontology({{"Root", kCat, {}},
                                          {"A", kCat, {0}},
                                          {"B", kCat, {0}},
                                          {"L", kLeaf, {1}},
                                          {"M", kLeaf, {1, 2}}});
  const std::vector<ConceptMention> one{{ConceptId{3}, "l", 0, 1}};
  CHECK(concept_tree_for_sentence(one, o) == ConceptSet{ConceptId{0}, ConceptId{1}, ConceptId{3}});
  CHECK(concept_tree_for_sentence({}, o).empty());
  // L -> A -> root and M -> {A, B} -> root: union without duplicates.
  const std::vector<ConceptMention> two{{ConceptId{3}, "l", 0, 1}, {ConceptId{4}, "m", 2, 3},
                                        {ConceptId{3}, "l", 4, 5}};
  CHECK(concept_tree_for_sentence(two, o) ==
        ConceptSet{ConceptId{0}, ConceptId{1}, ConceptId{2}, ConceptId{3}, ConceptId{4}});
  CHECK(concept_tree_for_sentence(two, o, 1) ==
        ConceptSet{ConceptId{1}, ConceptId{2}, ConceptId{3}, ConceptId{4}});
}

TEST_CASE("mentions are ordered, disjoint and round-trip through the index") {
  // Small vocabulary with heavy prefix sharing.
  std::vector<testutil::NodeSpec> specs{{"Root", kCat, {}}};
  const char* titles[] = {"a b", "a b c", "a b c d", "b", "b c", "c d e", "d", "e a", "x y z"};
  for (const char* t : titles) specs.push_back({t, kLeaf, {0}});
  const auto o = testutil::make_ontology(specs);
  const auto index = build_surface_index(o, {});
  std::mt19937 rng(29);
  const char* alphabet[] = {"a", "b", "c", "d", "e", "x", "y", "z", "q"};
  for (int round = 0; round < 300; ++round) {
    Tokens s;
    const int n = static_cast<int>(rng() % 20);
    for (int k = 0; k < n; ++k) s.push_back(alphabet[rng() % 9]);
    const auto m = extract_concepts(s, index);
    for (std::size_t k = 0; k < m.size(); ++k) {
      CHECK(m[k].end > m[k].begin);
      if (k > 0) CHECK(m[k - 1].end <= m[k].begin);
      const std::span<const std::string> span(s.data() + m[k].begin, m[k].end - m[k].begin);
      CHECK(index.lookup(span) == m[k].leaf);
      CHECK(m[k].surface == join(Tokens(span.begin(), span.end()), " "));
    }
    CHECK(extract_concepts(s, index) == m);
  }
}
