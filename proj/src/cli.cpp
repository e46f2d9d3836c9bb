#include "discourse/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "discourse/error.hpp"
#include "discourse/extract.hpp"
#include "discourse/flow.hpp"
#include "discourse/ingest.hpp"
#include "discourse/ontology.hpp"
#include "discourse/similarity.hpp"
#include "discourse/text.hpp"
#include "json.hpp"

namespace discourse::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  // distill
  std::string pages;
  std::string catlinks;
  std::string rules;
  std::string root{kDefaultRootTitle};

  // shared
  std::string ontology;
  std::vector<std::string> transcripts;
  std::vector<std::string> methods;
  double threshold = 0.0;
  std::string max_depth = "unbounded";
  std::string embeddings;
  std::uint64_t seed = 42;
  std::size_t sample_size = 20;
  std::string out;

  // extraction tuning
  std::string surface_forms;
  std::string stop_titles;
  std::size_t min_tokens = 1;
  bool remove_stopwords = false;
  std::size_t top_k = 5;

  // similar
  std::size_t index = 0;
};

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::ifstream open_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw InputError("write failure in " + path.string());
}

MaxDepth parse_depth(const std::string& text) {
  if (text == "unbounded") return kUnboundedDepth;
  std::size_t used = 0;
  unsigned long value = 0;
  try {
    value = std::stoul(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || value == 0 || text.front() == '-') {
    throw ArgumentError("--max-depth must be 'unbounded' or a positive integer");
  }
  return static_cast<std::size_t>(value);
}

nlohmann::json stats_json(const OntologyStats& s) {
  return {{"category_count", s.category_count},
          {"leaf_count", s.leaf_count},
          {"edge_count", s.edge_count},
          {"mean_categories_per_leaf", s.mean_categories_per_leaf}};
}

// Ontology plus surface index shared by the transcript commands.
struct ConceptResources {
  ConceptOntology ontology;
  SurfaceFormIndex index;
  std::unique_ptr<EmbeddingTable> embeddings;
};

ConceptResources load_resources(const Options& opt, std::ostream& err) {
  ConceptResources r{load_ontology(opt.ontology), {}, nullptr};
  SurfaceIndexOptions index_options;
  index_options.min_tokens = opt.min_tokens;
  if (opt.stop_titles.empty()) {
    index_options.stop_titles = default_stop_titles();
  } else {
    auto in = open_file(opt.stop_titles);
    for (std::string line; std::getline(in, line);) {
      const auto key = tokenize(line);
      if (!key.empty()) index_options.stop_titles.insert(join(key, " "));
    }
  }
  r.index = build_surface_index(r.ontology, index_options);
  if (!opt.surface_forms.empty()) {
    auto in = open_file(opt.surface_forms);
    merge_surface_forms(r.index, r.ontology, in, index_options);
  }
  const auto& c = r.index.counters;
  err << "surface index: " << c.indexed + c.extra_indexed << " keys, " << c.collisions
      << " collisions, " << c.skipped_stop << " stop titles skipped\n";
  if (!opt.embeddings.empty()) {
    auto in = open_file(opt.embeddings);
    r.embeddings = std::make_unique<EmbeddingTable>(load_embeddings(in));
    err << "embeddings: " << r.embeddings->size() << " words, dimension "
        << r.embeddings->dimension() << ", " << r.embeddings->skipped() << " lines skipped\n";
  }
  return r;
}

struct AnalyzedTranscript {
  Transcript transcript;
  std::vector<ConceptSet> trees;
  SentenceFeatures features;
};

AnalyzedTranscript analyze(const std::string& path, const ConceptResources& r, const Options& opt) {
  auto in = open_file(path);
  const auto utterances = read_utterances(in);
  AnalyzedTranscript a;
  a.transcript = segment_transcript(utterances, fs::path(path).stem().string());
  a.trees = annotate_transcript(a.transcript, r.index, r.ontology, parse_depth(opt.max_depth));
  FeatureOptions features;
  if (opt.remove_stopwords) features.stopwords = default_stopwords();
  a.features = compute_features(a.transcript, a.trees, features);
  return a;
}

std::vector<SimilarityMethod> resolve_methods(const Options& opt, bool has_embeddings,
                                              bool single) {
  std::vector<SimilarityMethod> methods;
  for (const auto& name : opt.methods) {
    const auto m = parse_method(name);
    if (!m) throw ArgumentError("unknown method '" + name + "'");
    if (std::find(methods.begin(), methods.end(), *m) == methods.end()) methods.push_back(*m);
  }
  if (methods.empty()) {
    if (single) {
      methods.push_back(SimilarityMethod::kConceptJoint);
    } else {
      for (auto m : kAllMethods) {
        if (m != SimilarityMethod::kAvgEmbedding || has_embeddings) methods.push_back(m);
      }
    }
  }
  for (auto m : methods) {
    if (m == SimilarityMethod::kAvgEmbedding && !has_embeddings) {
      throw ArgumentError("--method avg_embedding requires --embeddings");
    }
  }
  return methods;
}

TitleLookup titles_from(const ConceptOntology& ontology) {
  return [&ontology](ConceptId id) { return ontology.node(id).title; };
}

int cmd_distill(const Options& opt, std::ostream& out, std::ostream& err) {
  const std::string dir = opt.out.empty() ? opt.ontology : opt.out;
  if (dir.empty()) throw ArgumentError("distill needs --out DIR");
  auto pages_in = open_file(opt.pages);
  auto links_in = open_file(opt.catlinks);
  auto pages = ingest::parse_page_records(pages_in);
  const auto links = ingest::parse_category_links(links_in);
  ingest::FilterRules rules = ingest::FilterRules::defaults();
  if (!opt.rules.empty()) {
    auto rules_in = open_file(opt.rules);
    rules = ingest::FilterRules::parse(rules_in);
  }
  err << "pages: " << pages.counters.parsed << " parsed, " << pages.counters.malformed
      << " malformed, " << pages.counters.blank << " blank\n";
  err << "category links: " << links.counters.parsed << " parsed, " << links.counters.malformed
      << " malformed, " << links.counters.blank << " blank\n";
  const auto raw = ingest::build_raw_graph(std::move(pages.records), links.records);
  const auto& gc = raw.counters;
  err << "raw graph: " << raw.pages.size() << " pages, " << raw.edges.size() << " edges, "
      << gc.dangling_links << " dangling, " << gc.duplicate_edges << " duplicate edges, "
      << gc.duplicate_page_ids + gc.duplicate_titles << " duplicate pages\n";
  const auto ontology = distill(raw, rules, opt.root);
  save_ontology(ontology, dir);
  out << stats_json(stats(ontology)).dump() << '\n';
  return kSuccess;
}

int cmd_stats(const Options& opt, std::ostream& out, std::ostream& /*err*/) {
  out << stats_json(stats(load_ontology(opt.ontology))).dump() << '\n';
  return kSuccess;
}

int cmd_flow(const Options& opt, std::ostream& /*out*/, std::ostream& err) {
  if (opt.transcripts.size() != 1) throw ArgumentError("flow takes exactly one --transcript");
  if (opt.methods.size() > 1) throw ArgumentError("flow takes a single --method");
  const auto r = load_resources(opt, err);
  const auto method = resolve_methods(opt, r.embeddings != nullptr, true).front();
  const auto a = analyze(opt.transcripts.front(), r, opt);
  const SentenceScorer scorer(a.features, r.embeddings.get());
  FlowOptions flow_options{method, opt.threshold, opt.top_k};
  const auto flow = build_flow(a.transcript, scorer, flow_options, titles_from(r.ontology));

  write_file(opt.out + ".json", export_json(flow));
  write_file(opt.out + ".dot", export_dot(flow));
  err << a.transcript.id << ": " << a.transcript.sentences.size() << " sentences, "
      << flow.edges.size() << " edges\n";
  for (const auto& c : rank_concepts(a.features.concepts, opt.top_k)) {
    err << "  " << r.ontology.node(c.concept_id).title << '\t' << fixed6(c.score) << '\n';
  }
  return kSuccess;
}

int cmd_similar(const Options& opt, std::ostream& out, std::ostream& err) {
  if (opt.transcripts.size() != 1) throw ArgumentError("similar takes exactly one --transcript");
  const auto r = load_resources(opt, err);
  const auto methods = resolve_methods(opt, r.embeddings != nullptr, false);
  const auto a = analyze(opt.transcripts.front(), r, opt);
  if (opt.index >= a.transcript.sentences.size()) {
    throw ArgumentError("sentence index " + std::to_string(opt.index) + " out of range");
  }
  const SentenceScorer scorer(a.features, r.embeddings.get());
  out << "method\tanchor_index\tmatch_index\tscore\tmatch_text\n";
  for (auto m : methods) {
    const auto match = best_match(scorer, m, opt.index);
    out << to_string(m) << '\t' << opt.index << '\t';
    if (match) {
      out << match->to << '\t' << fixed6(match->score) << '\t'
          << tsv_cell(a.transcript.sentences[match->to].text) << '\n';
    } else {
      out << '\t' << fixed6(0.0) << "\t\n";
    }
  }
  return kSuccess;
}

int cmd_eval_pairs(const Options& opt, std::ostream& out, std::ostream& err) {
  if (opt.transcripts.empty()) throw ArgumentError("eval-pairs needs at least one --transcript");
  if (opt.sample_size == 0) throw ArgumentError("--sample-size must be positive");
  const auto r = load_resources(opt, err);
  const auto methods = resolve_methods(opt, r.embeddings != nullptr, false);

  std::ostringstream sheet;
  sheet << "debate_id\tmethod\tanchor_index\tanchor_text\tmatch_index\tmatch_text\trating\n";
  std::size_t rows = 0;
  for (std::size_t k = 0; k < opt.transcripts.size(); ++k) {
    const auto a = analyze(opt.transcripts[k], r, opt);
    const auto& sentences = a.transcript.sentences;
    if (opt.sample_size > sentences.size()) {
      throw ArgumentError(a.transcript.id + ": --sample-size " + std::to_string(opt.sample_size) +
                          " exceeds " + std::to_string(sentences.size()) + " sentences");
    }
    const SentenceScorer scorer(a.features, r.embeddings.get());
    for (std::size_t anchor : sample_indices(sentences.size(), opt.sample_size, opt.seed, k)) {
      for (auto m : methods) {
        const auto match = best_match(scorer, m, anchor);
        sheet << tsv_cell(a.transcript.id) << '\t' << to_string(m) << '\t' << anchor << '\t'
              << tsv_cell(sentences[anchor].text) << '\t';
        if (match) sheet << match->to << '\t' << tsv_cell(sentences[match->to].text);
        else sheet << '\t';
        sheet << "\t\n";
        ++rows;
      }
    }
  }
  if (opt.out.empty()) {
    out << sheet.str();
  } else {
    write_file(opt.out, sheet.str());
  }
  err << "annotation sheet: " << rows << " rows\n";
  return kSuccess;
}

void add_transcript_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--ontology", opt.ontology, "Distilled ontology directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmd->add_option("--threshold", opt.threshold, "Minimum similarity for a flow edge")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-depth", opt.max_depth, "Ancestor hops per mention: unbounded or N");
  cmd->add_option("--embeddings", opt.embeddings, "Word vector text file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--surface-forms", opt.surface_forms, "Extra surface<TAB>leaf_title file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--stop-titles", opt.stop_titles, "Titles never matched, one per line")
      ->check(CLI::ExistingFile);
  cmd->add_option("--min-tokens", opt.min_tokens, "Shortest indexed title, in tokens")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--remove-stopwords", opt.remove_stopwords, "Drop English stopwords from word vectors");
  cmd->add_option("--top-k", opt.top_k, "Shared keys per edge and concepts per node")
      ->check(CLI::PositiveNumber);
}

}  // namespace

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t k, std::uint64_t seed,
                                        std::uint64_t stream) {
  if (k == 0) throw ArgumentError("sample size must be positive");
  if (k > population) throw ArgumentError("sample size exceeds population");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::mt19937_64 engine(seq);
  // Unbiased draw from [0, bound) by rejection.
  const auto bounded = [&](std::uint64_t bound) {
    const std::uint64_t limit = (0 - bound) % bound;
    while (true) {
      const std::uint64_t r = engine();
      if (r >= limit) return r % bound;
    }
  };
  std::vector<std::size_t> pool(population);
  for (std::size_t i = 0; i < population; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(bounded(population - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Concept-flow pipeline over a distilled Wikipedia category ontology", "discourse"};
  app.require_subcommand(1);

  auto* distill_cmd = app.add_subcommand("distill", "Distill page/category TSVs into an ontology");
  distill_cmd->add_option("--pages", opt.pages, "pages.tsv")->required()->check(CLI::ExistingFile);
  distill_cmd->add_option("--catlinks", opt.catlinks, "catlinks.tsv")
      ->required()
      ->check(CLI::ExistingFile);
  distill_cmd->add_option("--rules", opt.rules, "Filter-rule config")->check(CLI::ExistingFile);
  distill_cmd->add_option("--root", opt.root, "Root category title");
  distill_cmd->add_option("--out,--ontology", opt.out, "Output ontology directory")->required();

  auto* stats_cmd = app.add_subcommand("stats", "Print ontology statistics as JSON");
  stats_cmd->add_option("--ontology", opt.ontology, "Ontology directory")->required();

  auto* flow_cmd = app.add_subcommand("flow", "Build the concept-flow graph of a transcript");
  add_transcript_options(flow_cmd, opt);
  flow_cmd->add_option("--transcript", opt.transcripts, "Transcript JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  flow_cmd->add_option("--method", opt.methods, "Similarity method");
  flow_cmd->add_option("--out", opt.out, "Output prefix for .json and .dot")->required();

  auto* similar_cmd = app.add_subcommand("similar", "Most similar sentence for one anchor");
  add_transcript_options(similar_cmd, opt);
  similar_cmd->add_option("--transcript", opt.transcripts, "Transcript JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  similar_cmd->add_option("--method", opt.methods, "Similarity method (repeatable)");
  similar_cmd->add_option("--index", opt.index, "Anchor sentence index")->required();

  auto* eval_cmd = app.add_subcommand("eval-pairs", "Emit a seeded annotation sheet");
  add_transcript_options(eval_cmd, opt);
  eval_cmd->add_option("--transcript", opt.transcripts, "Transcript JSONL (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--method", opt.methods, "Similarity method (repeatable)");
  eval_cmd->add_option("--seed", opt.seed, "Sampling seed");
  eval_cmd->add_option("--sample-size", opt.sample_size, "Sentences sampled per transcript");
  eval_cmd->add_option("--out", opt.out, "Output TSV (default: stdout)");

  std::vector<const char*> argv{"discourse"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (distill_cmd->parsed()) return cmd_distill(opt, out, err);
    if (stats_cmd->parsed()) return cmd_stats(opt, out, err);
    if (flow_cmd->parsed()) return cmd_flow(opt, out, err);
    if (similar_cmd->parsed()) return cmd_similar(opt, out, err);
    if (eval_cmd->parsed()) return cmd_eval_pairs(opt, out, err);
  } catch (const EmptyTranscriptError& e) {
    err << "error: " << e.what() << '\n';
    return kEmptyResult;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}

}  // namespace discourse::cli
