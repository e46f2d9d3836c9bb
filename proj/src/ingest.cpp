#include "discourse/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <sstream>

#include "discourse/error.hpp"
#include "discourse/text.hpp"

namespace discourse::ingest {
namespace {

constexpr std::size_t kMaxReportedLines = 16;

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::optional<std::uint64_t> parse_page_id(std::string_view text) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || value == 0) return std::nullopt;
  return value;
}

std::optional<std::string> parse_title(std::string_view text) {
  if (!is_valid_utf8(text)) return std::nullopt;
  std::string title = normalize_title(text);
  if (title.empty()) return std::nullopt;
  return title;
}

// Drives the shared line loop; `parse_line` returns false for a malformed
// line.
template <typename Record, typename LineParser>
ParseResult<Record> parse_lines(std::istream& in, LineParser parse_line) {
  ParseResult<Record> result;
  auto& counters = result.counters;
  std::string line;
  while (std::getline(in, line)) {
    ++counters.lines;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      ++counters.blank;
      continue;
    }
    if (parse_line(split_tabs(line), result.records)) {
      ++counters.parsed;
    } else {
      ++counters.malformed;
      if (counters.malformed_lines.size() < kMaxReportedLines) {
        counters.malformed_lines.push_back(counters.lines);
      }
    }
  }
  if (in.bad()) throw IngestionError("stream read failure", counters.lines + 1);
  return result;
}

bool ascii_alnum(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char flip_case(char c) {
  if (c >= 'a' && c <= 'z') return static_cast<char>(c - 'a' + 'A');
  if (c >= 'A' && c <= 'Z') return static_cast<char>(c - 'A' + 'a');
  return c;
}

bool contains_at_word_start(std::string_view title, std::string_view pattern) {
  if (pattern.empty()) return false;
  const std::string rest(pattern.substr(1));
  for (std::size_t pos = 0; pos + pattern.size() <= title.size(); ++pos) {
    if (pos > 0) {
      const auto prev = static_cast<unsigned char>(title[pos - 1]);
      if (ascii_alnum(prev) || prev >= 0x80) continue;
    }
    const char first = title[pos];
    if (first != pattern[0] && first != flip_case(pattern[0])) continue;
    if (title.compare(pos + 1, rest.size(), rest) == 0) return true;
  }
  return false;
}

std::string escape_regex(std::string_view literal) {
  static constexpr std::string_view kSpecial = R"(\^$.|?*+()[]{})";
  std::string out;
  for (char c : literal) {
    if (kSpecial.find(c) != std::string_view::npos) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::regex compile_year_pattern(std::string_view pattern) {
  static constexpr std::string_view kYear = "<year>";
  static constexpr std::string_view kMonth = "<month>";
  std::string expr;
  if (!pattern.empty() && pattern.front() == '^') {
    expr.push_back('^');
    pattern.remove_prefix(1);
  }
  while (!pattern.empty()) {
    const std::size_t year = pattern.find(kYear);
    const std::size_t month = pattern.find(kMonth);
    const std::size_t next = std::min(year, month);
    expr += escape_regex(pattern.substr(0, next));
    if (next == std::string_view::npos) break;
    if (next == year) {
      expr += R"(\b[0-9]{3,4}s?\b)";
      pattern.remove_prefix(next + kYear.size());
    } else {
      expr +=
          R"(\b(?:January|February|March|April|May|June|July|August|September|October|November|December)\b)";
      pattern.remove_prefix(next + kMonth.size());
    }
  }
  return std::regex(expr, std::regex::ECMAScript | std::regex::optimize);
}

}  // namespace

std::string_view to_string(Namespace ns) {
  return ns == Namespace::kArticle ? "article" : "category";
}

std::optional<Namespace> parse_namespace(std::string_view text) {
  if (text == "article") return Namespace::kArticle;
  if (text == "category") return Namespace::kCategory;
  return std::nullopt;
}

ParseResult<PageRecord> parse_page_records(std::istream& in, RecordFormat /*format*/) {
  return parse_lines<PageRecord>(
      in, [](const std::vector<std::string_view>& fields, std::vector<PageRecord>& out) {
        if (fields.size() != 3) return false;
        const auto id = parse_page_id(fields[0]);
        const auto ns = parse_namespace(fields[1]);
        auto title = parse_title(fields[2]);
        if (!id || !ns || !title) return false;
        out.push_back({*id, *ns, std::move(*title)});
        return true;
      });
}

ParseResult<CategoryLinkRecord> parse_category_links(std::istream& in, RecordFormat /*format*/) {
  return parse_lines<CategoryLinkRecord>(
      in, [](const std::vector<std::string_view>& fields, std::vector<CategoryLinkRecord>& out) {
        if (fields.size() != 3) return false;
        auto child = parse_title(fields[0]);
        const auto kind = parse_namespace(fields[1]);
        auto parent = parse_title(fields[2]);
        if (!child || !kind || !parent) return false;
        out.push_back({std::move(*child), *kind, std::move(*parent)});
        return true;
      });
}

std::string_view to_string(CategoryClass cls) {
  switch (cls) {
    case CategoryClass::kTopical: return "topical";
    case CategoryClass::kMaintenance: return "maintenance";
    case CategoryClass::kTracking: return "tracking";
    case CategoryClass::kChronological: return "chronological";
    case CategoryClass::kListLike: return "list_like";
  }
  return "topical";
}

std::optional<CategoryClass> parse_category_class(std::string_view text) {
  for (auto cls : {CategoryClass::kTopical, CategoryClass::kMaintenance, CategoryClass::kTracking,
                   CategoryClass::kChronological, CategoryClass::kListLike}) {
    if (to_string(cls) == text) return cls;
  }
  return std::nullopt;
}

std::string_view to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::kPrefix: return "prefix";
    case RuleKind::kContains: return "contains";
    case RuleKind::kYearPattern: return "year-pattern";
  }
  return "prefix";
}

FilterRules::FilterRules(std::vector<FilterRule> rules) : rules_(std::move(rules)) {
  compiled_.reserve(rules_.size());
  for (const auto& rule : rules_) {
    Compiled c{rule, std::nullopt};
    if (rule.kind == RuleKind::kYearPattern) c.regex = compile_year_pattern(rule.pattern);
    compiled_.push_back(std::move(c));
  }
}

FilterRules FilterRules::defaults() {
  using enum CategoryClass;
  using enum RuleKind;
  std::vector<FilterRule> rules = {
      {kMaintenance, kPrefix, "Articles "},
      {kMaintenance, kPrefix, "Pages "},
      {kMaintenance, kPrefix, "All articles"},
      {kMaintenance, kContains, "Wikipedia"},
      {kMaintenance, kContains, "stub"},
      {kMaintenance, kContains, "cleanup"},
      {kMaintenance, kContains, "maintenance"},
      {kMaintenance, kContains, "disambiguation"},
      {kTracking, kContains, "tracking categor"},
      {kTracking, kContains, "CS1"},
      {kTracking, kContains, "template"},
      {kTracking, kContains, "redirect"},
      {kChronological, kYearPattern, "^<year>"},
      {kChronological, kYearPattern, "<month> <year>"},
      {kChronological, kYearPattern, "<year> births"},
      {kChronological, kYearPattern, "<year> deaths"},
      {kChronological, kYearPattern, "<year> establishments"},
      {kChronological, kYearPattern, "<year> disestablishments"},
      {kListLike, kPrefix, "Lists of"},
      {kListLike, kPrefix, "List of"},
  };
  return FilterRules(std::move(rules));
}

FilterRules FilterRules::parse(std::istream& in) {
  std::vector<FilterRule> rules;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_tabs(line);
    const auto fail = [&](const std::string& why) {
      throw InputError("filter rules line " + std::to_string(number) + ": " + why);
    };
    if (fields.size() != 3) fail("expected 3 tab-separated fields");
    const auto cls = parse_category_class(fields[0]);
    if (!cls) fail("unknown class '" + std::string(fields[0]) + "'");
    std::optional<RuleKind> kind;
    for (auto k : {RuleKind::kPrefix, RuleKind::kContains, RuleKind::kYearPattern}) {
      if (to_string(k) == fields[1]) kind = k;
    }
    if (!kind) fail("unknown rule kind '" + std::string(fields[1]) + "'");
    if (fields[2].empty()) fail("empty pattern");
    rules.push_back({*cls, *kind, std::string(fields[2])});
  }
  if (in.bad()) throw IngestionError("filter rules read failure", number + 1);
  return FilterRules(std::move(rules));
}

CategoryClass FilterRules::classify(std::string_view title) const {
  for (const auto& c : compiled_) {
    const auto& rule = c.rule;
    bool hit = false;
    switch (rule.kind) {
      case RuleKind::kPrefix:
        hit = title.starts_with(rule.pattern);
        break;
      case RuleKind::kContains:
        hit = contains_at_word_start(title, rule.pattern);
        break;
      case RuleKind::kYearPattern:
        hit = std::regex_search(title.begin(), title.end(), *c.regex);
        break;
    }
    if (hit) return rule.cls;
  }
  return CategoryClass::kTopical;
}

CategoryClass classify_category(std::string_view title) {
  static const FilterRules rules = FilterRules::defaults();
  return rules.classify(title);
}

std::size_t TitleKeyHash::operator()(const TitleKey& key) const noexcept {
  const std::size_t h = std::hash<std::string>{}(key.title);
  return key.ns == Namespace::kCategory ? ~h : h;
}

std::optional<std::uint64_t> RawGraph::find(Namespace ns, const std::string& title) const {
  const auto it = title_index.find(TitleKey{ns, title});
  if (it == title_index.end()) return std::nullopt;
  return it->second;
}

RawGraph build_raw_graph(std::vector<PageRecord> pages,
                         const std::vector<CategoryLinkRecord>& links) {
  RawGraph graph;
  auto& counters = graph.counters;
  graph.pages.reserve(pages.size());
  graph.title_index.reserve(pages.size());
  for (auto& page : pages) {
    if (graph.pages.contains(page.page_id)) {
      ++counters.duplicate_page_ids;
      continue;
    }
    TitleKey key{page.ns, page.title};
    if (graph.title_index.contains(key)) {
      ++counters.duplicate_titles;
      continue;
    }
    graph.title_index.emplace(std::move(key), page.page_id);
    const auto id = page.page_id;
    graph.pages.emplace(id, std::move(page));
  }

  graph.edges.reserve(links.size());
  for (const auto& link : links) {
    const auto child = graph.find(link.child_kind, link.child_title);
    const auto parent = graph.find(Namespace::kCategory, link.parent_title);
    if (!child || !parent) {
      ++counters.dangling_links;
      continue;
    }
    if (*child == *parent) {
      ++counters.self_loops;
      continue;
    }
    graph.edges.emplace_back(*child, *parent);
  }
  std::sort(graph.edges.begin(), graph.edges.end());
  const auto unique_end = std::unique(graph.edges.begin(), graph.edges.end());
  counters.duplicate_edges = static_cast<std::size_t>(graph.edges.end() - unique_end);
  graph.edges.erase(unique_end, graph.edges.end());
  return graph;
}

}  // namespace discourse::ingest
