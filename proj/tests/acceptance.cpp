// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Criterion 8 needs full-scale dump files and is skipped unless
// DISCOURSE_FULL_ONTOLOGY (a distilled directory) or DISCOURSE_FULL_PAGES
// and DISCOURSE_FULL_CATLINKS are set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "discourse/cli.hpp"
#include "discourse/error.hpp"
#include "discourse/extract.hpp"
#include "discourse/flow.hpp"
#include "discourse/ingest.hpp"
#include "discourse/ontology.hpp"
#include "discourse/similarity.hpp"
#include "discourse/text.hpp"
#include "json.hpp"
#include "random_fixtures.hpp"
#include "test_util.hpp"

using namespace discourse;
using testutil::fixture;
using testutil::read_file;

namespace {

enum class Outcome { kPass, kFail, kSkip };

struct Report {
  std::vector<std::string> failures;
  bool skipped = false;
  std::string note;

  void check(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++failed;
  }
  std::size_t failed = 0;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

ConceptOntology miniwiki_ontology() {
  std::ifstream pages(fixture("miniwiki/pages.tsv"));
  std::ifstream links(fixture("miniwiki/catlinks.tsv"));
  auto p = ingest::parse_page_records(pages);
  const auto l = ingest::parse_category_links(links);
  const auto raw = ingest::build_raw_graph(std::move(p.records), l.records);
  return distill(raw, ingest::FilterRules::defaults(), kDefaultRootTitle);
}

struct Pipeline {
  Transcript transcript;
  SentenceFeatures features;
};

Pipeline run_pipeline(const ConceptOntology& ontology, const std::string& transcript_file) {
  SurfaceIndexOptions options;
  options.stop_titles = default_stop_titles();
  auto index = build_surface_index(ontology, options);
  std::istringstream forms("fda\tFood and Drug Administration\n");
  merge_surface_forms(index, ontology, forms, options);
  std::ifstream in(fixture(transcript_file));
  const auto utterances = read_utterances(in);
  Pipeline p;
  p.transcript = segment_transcript(utterances, transcript_file);
  const auto trees = annotate_transcript(p.transcript, index, ontology);
  p.features = compute_features(p.transcript, trees);
  return p;
}

// Weights on a 4-sentence corpus against presence counts taken by hand.
void tfidf_weights(Report& r) {
  using Tokens = std::vector<std::string>;
  Transcript t{"four", {}};
  const std::vector<Tokens> tokens{{"the", "fda", "blocks", "drugs"},
                                   {"the", "drugs", "cost", "more"},
                                   {"the", "costs", "rise"},
                                   {"the", "fda", "fda", "acts"}};
  const std::vector<ConceptSet> trees{{ConceptId{0}, ConceptId{2}, ConceptId{5}},
                                      {ConceptId{0}, ConceptId{3}},
                                      {ConceptId{0}, ConceptId{3}, ConceptId{4}},
                                      {ConceptId{0}, ConceptId{2}}};
  for (std::size_t i = 0; i < 4; ++i) t.sentences.push_back({i, "A", "", tokens[i], {}});
  const auto f = compute_features(t, trees);
  const double n = 4.0;

  std::size_t checked = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (const auto& [c, w] : f.concepts[i].entries()) {
      int df = 0;
      for (const auto& tree : trees) df += tree.count(c) ? 1 : 0;
      r.check(std::abs(w - (1.0 + std::log(n / df))) <= 1e-9, "concept weight");
      ++checked;
    }
    for (const auto& [word, w] : f.words[i].entries()) {
      int df = 0;
      for (const auto& s : tokens) df += std::find(s.begin(), s.end(), word) != s.end() ? 1 : 0;
      r.check(std::abs(w - (1.0 + std::log(n / df))) <= 1e-9, "word weight " + word);
      ++checked;
    }
    const std::set<std::string> distinct(tokens[i].begin(), tokens[i].end());
    r.check(f.words[i].size() == distinct.size(), "one entry per distinct word");
    r.check(f.concepts[i].size() == trees[i].size(), "one entry per concept");
  }
  r.check(checked == 24, "weight count");
  for (std::size_t i = 0; i < 4; ++i) {
    r.check(f.words[i].weight("the") == 1.0, "df=N word weight is exactly 1");
    r.check(f.concepts[i].weight(ConceptId{0}) == 1.0, "df=N concept weight is exactly 1");
  }
  r.note = std::to_string(checked) + " weights";
}

void similarity_properties(Report& r) {
  std::mt19937_64 rng(2017);
  std::size_t pairs = 0;
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 1 + rng() % 50;
    const std::size_t concept_dims = 1 + rng() % 100;
    const std::size_t word_dims = 1 + rng() % 100;
    const auto c = testutil::random_corpus(rng, n, concept_dims, word_dims);
    const auto vocabulary = testutil::word_vocabulary(word_dims);
    const testutil::DenseOracle oracle(c.trees, c.features.tokens, concept_dims, vocabulary);
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& [id, w] : c.features.concepts[i].entries()) {
        r.check(std::abs(w - oracle.weight_concept(i, id.value)) <= 1e-9, "concept weight vs dense");
      }
      for (std::size_t j = 0; j < n; ++j) {
        const double s = sentence_similarity(i, j, c.features.concepts, c.features.words);
        const double back = sentence_similarity(j, i, c.features.concepts, c.features.words);
        r.check(std::abs(s - back) <= 1e-12, "symmetry");
        r.check(s >= 0.0 && s <= 2.0, "range [0, 2]");
        r.check(std::abs(s - oracle.joint(i, j)) <= 1e-9, "dense brute force");
        ++pairs;
      }
      if (!c.features.concepts[i].empty() && !c.features.words[i].empty()) {
        const double self = sentence_similarity(i, i, c.features.concepts, c.features.words);
        r.check(std::abs(self - 2.0) <= 1e-12, "self similarity 2");
      }
    }
  }
  r.note = std::to_string(pairs) + " pairs";
}

void flow_oracle(Report& r) {
  std::mt19937_64 rng(1880);
  std::size_t edges = 0;
  for (int round = 0; round < 50; ++round) {
    const std::size_t n = 1 + rng() % 200;
    const auto c = testutil::random_corpus(rng, n, 40, 60);
    const SentenceScorer scorer(c.features);
    std::vector<std::set<std::pair<std::size_t, std::size_t>>> nested;
    for (double threshold : {0.0, 0.5, 1.0, 1.5}) {
      FlowOptions options;
      options.threshold = threshold;
      const auto flow = build_flow(c.transcript, scorer, options);

      // O(n^2) reference: strict improvement keeps the smallest j on ties.
      std::vector<FlowEdge> expected;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t best_j = 0;
        double best = -1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
          const double s = sentence_similarity(i, j, c.features.concepts, c.features.words);
          if (s > best) {
            best = s;
            best_j = j;
          }
        }
        if (best > 0.0 && best >= threshold) expected.push_back({i, best_j, best, {}, {}});
      }
      r.check(flow.edges.size() == expected.size(), "edge count vs brute force");
      for (std::size_t k = 0; k < std::min(flow.edges.size(), expected.size()); ++k) {
        r.check(flow.edges[k].from == expected[k].from && flow.edges[k].to == expected[k].to &&
                    flow.edges[k].score == expected[k].score,
                "edge vs brute force");
      }
      std::vector<int> out_degree(n, 0);
      std::set<std::pair<std::size_t, std::size_t>> set;
      for (const auto& e : flow.edges) {
        r.check(e.to > e.from, "forward edge");
        ++out_degree[e.from];
        set.emplace(e.from, e.to);
      }
      for (int d : out_degree) r.check(d <= 1, "out-degree at most 1");
      if (!nested.empty()) {
        r.check(std::includes(nested.back().begin(), nested.back().end(), set.begin(), set.end()),
                "nested edge sets across thresholds");
      }
      nested.push_back(std::move(set));
      edges += flow.edges.size();
    }
  }
  r.note = std::to_string(edges) + " edges";
}

void distiller_fixture(Report& r) {
  testutil::TempDir dir;
  const std::vector<std::string> args{"distill",     "--pages",
                                      fixture("miniwiki/pages.tsv").string(), "--catlinks",
                                      fixture("miniwiki/catlinks.tsv").string(), "--out",
                                      (dir / "onto").string()};
  std::ostringstream out, err;
  r.check(cli::run(args, out, err) == 0, "distill exit status");
  std::map<std::string, std::string> first;
  for (const char* f : {"meta.tsv", "nodes.tsv", "edges.tsv"}) {
    first[f] = read_file(dir / ("onto/" + std::string(f)));
    r.check(first[f] == read_file(fixture("miniwiki_expected/" + std::string(f))),
            std::string(f) + " matches the expected set");
  }
  std::ostringstream out2, err2;
  r.check(cli::run(args, out2, err2) == 0, "rerun exit status");
  for (const auto& [f, bytes] : first) {
    r.check(read_file(dir / ("onto/" + f)) == bytes, f + " byte-identical on rerun");
  }

  // Every filter class and the unreachable case are present in the input.
  std::ifstream pages(fixture("miniwiki/pages.tsv"));
  const auto parsed = ingest::parse_page_records(pages);
  std::set<ingest::CategoryClass> classes;
  for (const auto& p : parsed.records) {
    if (p.ns == ingest::Namespace::kCategory) classes.insert(ingest::classify_category(p.title));
  }
  r.check(classes.size() == 5, "all filter classes exercised");
  const auto ontology = load_ontology(dir / "onto");
  r.check(!ontology.find(ConceptKind::kCategory, "Orphan topic").has_value(),
          "unreachable category dropped");
  r.check(!ontology.find(ConceptKind::kCategory, "1880 deaths").has_value(), "chronological dropped");
  r.note = std::to_string(ontology.size()) + " nodes";
}

void extraction(Report& r) {
  const auto o = testutil::make_ontology({{"Root", testutil::kCat, {}},
                                          {"Health", testutil::kCat, {0}},
                                          {"Health care", testutil::kLeaf, {1}},
                                          {"Health care costs", testutil::kLeaf, {1}},
                                          {"FDA", testutil::kLeaf, {0}}});
  const auto index = build_surface_index(o);
  const auto costs = extract_concepts(tokenize("Health care costs are out of control."), index);
  r.check(costs.size() == 1 && costs[0].leaf == ConceptId{3} && costs[0].end - costs[0].begin == 3,
          "longest match selects the 3-token concept");
  const auto fda = extract_concepts(tokenize("Look, the FDA is the biggest barrier here."), index);
  r.check(fda.size() == 1 && fda[0].leaf == ConceptId{4} && fda[0].surface == "fda",
          "FDA sentence yields one mention");

  // Prefix-heavy vocabulary against a brute-force greedy matcher.
  std::vector<testutil::NodeSpec> specs{{"root", testutil::kCat, {}}};
  const std::vector<std::string> titles{"a", "a b", "a b c", "a b c d e", "b c", "c", "c d", "d e f",
                                        "e", "f a", "b d b"};
  for (const auto& t : titles) specs.push_back({t, testutil::kLeaf, {0}});
  const auto vocab = testutil::make_ontology(specs);
  const auto vocab_index = build_surface_index(vocab);
  std::map<std::string, ConceptId> keys;
  std::size_t longest = 0;
  for (std::size_t k = 0; k < titles.size(); ++k) {
    keys[titles[k]] = ConceptId{static_cast<std::uint32_t>(k + 1)};
    longest = std::max<std::size_t>(longest, std::count(titles[k].begin(), titles[k].end(), ' ') + 1);
  }
  std::mt19937_64 rng(3);
  const char* alphabet[] = {"a", "b", "c", "d", "e", "f", "g"};
  std::size_t mentions = 0;
  for (int round = 0; round < 1000; ++round) {
    std::vector<std::string> s;
    const std::size_t n = rng() % 30;
    for (std::size_t k = 0; k < n; ++k) s.push_back(alphabet[rng() % 7]);
    std::vector<ConceptMention> expected;
    for (std::size_t p = 0; p < n;) {
      bool found = false;
      for (std::size_t len = std::min(longest, n - p); len >= 1 && !found; --len) {
        const std::string key = join(std::vector<std::string>(s.begin() + p, s.begin() + p + len), " ");
        const auto it = keys.find(key);
        if (it != keys.end()) {
          expected.push_back({it->second, key, p, p + len});
          p += len;
          found = true;
        }
      }
      if (!found) ++p;
    }
    const auto got = extract_concepts(s, vocab_index);
    r.check(got == expected, "greedy longest match vs brute force");
    for (std::size_t k = 1; k < got.size(); ++k) {
      r.check(got[k - 1].end <= got[k].begin, "mentions ordered and disjoint");
    }
    mentions += got.size();
  }
  r.note = std::to_string(mentions) + " mentions";
}

void baseline_consistency(Report& r) {
  const auto ontology = miniwiki_ontology();
  std::size_t pairs = 0;
  const auto check_pairs = [&](const SentenceFeatures& f) {
    const SentenceScorer scorer(f);
    for (std::size_t i = 0; i < scorer.size(); ++i) {
      for (std::size_t j = 0; j < scorer.size(); ++j) {
        const double text = scorer.score(SimilarityMethod::kTextOnly, i, j);
        r.check(text == cosine(f.words[i], f.words[j]), "text_only is the word cosine");
        r.check(scorer.score(SimilarityMethod::kConceptJoint, i, j) ==
                    cosine(f.concepts[i], f.concepts[j]) + text,
                "concept_joint = concept cosine + text_only");
        ++pairs;
      }
    }
  };
  for (const char* file : {"flow3.jsonl", "fda_debate.jsonl"}) {
    const auto p = run_pipeline(ontology, file);
    check_pairs(p.features);
  }
  std::mt19937_64 rng(4);
  for (int round = 0; round < 10; ++round) check_pairs(testutil::random_corpus(rng, 30, 20, 30).features);

  r.check(baseline_word_overlap(std::vector<std::string>{"a", "b", "c"},
                                std::vector<std::string>{"b", "c", "d"}) == 0.5,
          "word_overlap {a,b,c}/{b,c,d}");
  std::ifstream vec(fixture("tiny.vec"));
  const auto table = load_embeddings(vec);
  const std::vector<std::string> words{"fda", "drug", "costs"};
  r.check(std::abs(baseline_avg_embedding(words, words, table) - 1.0) <= 1e-9,
          "avg_embedding identity");
  r.note = std::to_string(pairs) + " pairs";
}

void determinism(Report& r) {
  testutil::TempDir dir;
  const auto onto = (dir / "onto").string();
  std::ostringstream sink;
  r.check(cli::run({"distill", "--pages", fixture("miniwiki/pages.tsv").string(), "--catlinks",
                    fixture("miniwiki/catlinks.tsv").string(), "--out", onto},
                   sink, sink) == 0,
          "distill");
  testutil::write_file(dir / "forms.tsv", "fda\tFood and Drug Administration\n");
  const std::string transcript = fixture("fda_debate.jsonl").string();
  const std::string vectors = fixture("tiny.vec").string();
  for (const char* run_id : {"a", "b"}) {
    r.check(cli::run({"flow", "--ontology", onto, "--surface-forms", (dir / "forms.tsv").string(),
                      "--transcript", transcript, "--out", (dir / ("flow_" + std::string(run_id))).string()},
                     sink, sink) == 0,
            "flow run");
    r.check(cli::run({"eval-pairs", "--ontology", onto, "--surface-forms", (dir / "forms.tsv").string(),
                      "--embeddings", vectors, "--transcript", transcript, "--transcript",
                      fixture("flow3.jsonl").string(), "--sample-size", "3", "--seed", "7", "--out",
                      (dir / ("sheet_" + std::string(run_id) + ".tsv")).string()},
                     sink, sink) == 0,
            "eval-pairs run");
  }
  for (const char* suffix : {".json", ".dot"}) {
    const auto a = read_file(dir / ("flow_a" + std::string(suffix)));
    r.check(!a.empty() && a == read_file(dir / ("flow_b" + std::string(suffix))),
            std::string("flow") + suffix + " byte-identical");
  }
  const auto sheet = read_file(dir / "sheet_a.tsv");
  r.check(!sheet.empty() && sheet == read_file(dir / "sheet_b.tsv"), "eval-pairs byte-identical");
}

void full_scale(Report& r) {
  const char* onto_env = std::getenv("DISCOURSE_FULL_ONTOLOGY");
  const char* pages_env = std::getenv("DISCOURSE_FULL_PAGES");
  const char* links_env = std::getenv("DISCOURSE_FULL_CATLINKS");
  std::optional<testutil::TempDir> scratch;
  std::string onto;
  if (onto_env && *onto_env) {
    onto = onto_env;
  } else if (pages_env && *pages_env && links_env && *links_env) {
    scratch.emplace();
    onto = (*scratch / "onto").string();
    std::ostringstream sink;
    r.check(cli::run({"distill", "--pages", pages_env, "--catlinks", links_env, "--out", onto},
                     sink, sink) == 0,
            "full-scale distill");
    if (r.failed) return;
  } else {
    r.skipped = true;
    r.note = "set DISCOURSE_FULL_ONTOLOGY or DISCOURSE_FULL_PAGES + DISCOURSE_FULL_CATLINKS";
    return;
  }
  std::ostringstream out, err;
  r.check(cli::run({"stats", "--ontology", onto}, out, err) == 0, "stats");
  if (r.failed) return;
  const auto s = nlohmann::json::parse(out.str());
  const auto within = [](double got, double want) { return std::abs(got - want) <= 0.05 * want; };
  const double categories = s.at("category_count").get<double>();
  const double edges = s.at("edge_count").get<double>();
  const double leaves = s.at("leaf_count").get<double>();
  const double mean = s.at("mean_categories_per_leaf").get<double>();
  r.check(within(categories, 976163), "category count within 5%");
  r.check(within(edges, 1901706), "edge count within 5%");
  r.check(within(leaves, 11967618), "leaf count within 5%");
  r.check(std::abs(mean - 4.75) <= 0.5, "mean categories per leaf within 4.75 +- 0.5");
  r.note = out.str().substr(0, out.str().size() - 1);
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;
  std::function<void(Report&)> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "tf-idf weights match the independent oracle", 1.0, tfidf_weights},
      {2, "joint similarity properties and dense brute force", 10.0, similarity_properties},
      {3, "flow graph equals brute-force forward argmax", 30.0, flow_oracle},
      {4, "mini-wiki distills to the expected ontology", 1.0, distiller_fixture},
      {5, "concept extraction longest match and invariants", 10.0, extraction},
      {6, "baseline consistency", 10.0, baseline_consistency},
      {7, "flow and eval-pairs are deterministic", 10.0, determinism},
      {8, "full-scale ontology statistics", 7200.0, full_scale},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Report report;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(report);
    } catch (const std::exception& e) {
      report.check(false, std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!report.skipped) {
      report.check(seconds < c.budget_seconds, "runtime over " + fmt(c.budget_seconds) + " s budget");
    }
    const Outcome outcome = report.skipped    ? Outcome::kSkip
                            : report.failed   ? Outcome::kFail
                                              : Outcome::kPass;
    const char* tag = outcome == Outcome::kPass ? "PASS" : outcome == Outcome::kFail ? "FAIL" : "SKIP";
    std::printf("%s  criterion %d: %s (%s s", tag, c.number, c.name, fmt(seconds).c_str());
    if (!report.note.empty()) std::printf("; %s", report.note.c_str());
    std::printf(")\n");
    if (outcome == Outcome::kFail) {
      ++failures;
      std::printf("      %zu failed checks, first: ", report.failed);
      for (std::size_t k = 0; k < report.failures.size(); ++k) {
        std::printf("%s%s", k ? "; " : "", report.failures[k].c_str());
      }
      std::printf("\n");
    }
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
