#ifndef DISCOURSE_INGEST_HPP
#define DISCOURSE_INGEST_HPP

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace discourse::ingest {

enum class Namespace { kArticle, kCategory };

std::string_view to_string(Namespace ns);
std::optional<Namespace> parse_namespace(std::string_view text);

enum class RecordFormat { kTsv };

struct PageRecord {
  std::uint64_t page_id = 0;
  Namespace ns = Namespace::kArticle;
  std::string title;

  bool operator==(const PageRecord&) const = default;
};

struct CategoryLinkRecord {
  std::string child_title;
  Namespace child_kind = Namespace::kArticle;
  std::string parent_title;

  bool operator==(const CategoryLinkRecord&) const = default;
};

// Line accounting for one parsed file. parsed + malformed + blank == lines.
struct ParseCounters {
  std::size_t lines = 0;
  std::size_t parsed = 0;
  std::size_t malformed = 0;
  std::size_t blank = 0;
  // 1-based line numbers of the first few malformed lines, for diagnostics.
  std::vector<std::size_t> malformed_lines;
};

template <typename Record>
struct ParseResult {
  std::vector<Record> records;
  ParseCounters counters;
};

ParseResult<PageRecord> parse_page_records(std::istream& in,
                                           RecordFormat format = RecordFormat::kTsv);
ParseResult<CategoryLinkRecord> parse_category_links(std::istream& in,
                                                     RecordFormat format = RecordFormat::kTsv);

enum class CategoryClass { kTopical, kMaintenance, kTracking, kChronological, kListLike };

std::string_view to_string(CategoryClass cls);
std::optional<CategoryClass> parse_category_class(std::string_view text);

enum class RuleKind { kPrefix, kContains, kYearPattern };

std::string_view to_string(RuleKind kind);

struct FilterRule {
  CategoryClass cls = CategoryClass::kTopical;
  RuleKind kind = RuleKind::kPrefix;
  std::string pattern;

  bool operator==(const FilterRule& other) const {
    return cls == other.cls && kind == other.kind && pattern == other.pattern;
  }
};

// Ordered rule table; the first rule that matches a title decides its class.
//
//   prefix        title starts with the pattern (case-sensitive)
//   contains      pattern occurs starting at a word boundary; the first
//                 letter matches either case, the rest is case-sensitive
//   year-pattern  pattern with <year> (3-4 digits, optional decade "s")
//                 and <month> placeholders; a leading ^ anchors at the start
//
// Config text: one `<class>\t<kind>\t<pattern>` rule per line; blank lines
// and lines starting with '#' are ignored.
class FilterRules {
 public:
  FilterRules() = default;
  explicit FilterRules(std::vector<FilterRule> rules);

  static FilterRules defaults();
  // Throws InputError on a malformed rule line.
  static FilterRules parse(std::istream& in);

  CategoryClass classify(std::string_view title) const;

  const std::vector<FilterRule>& rules() const { return rules_; }

 private:
  struct Compiled {
    FilterRule rule;
    std::optional<std::regex> regex;
  };

  std::vector<FilterRule> rules_;
  std::vector<Compiled> compiled_;
};

// Classification under the default rule table.
CategoryClass classify_category(std::string_view title);

struct TitleKey {
  Namespace ns = Namespace::kArticle;
  std::string title;

  bool operator==(const TitleKey&) const = default;
};

struct TitleKeyHash {
  std::size_t operator()(const TitleKey& key) const noexcept;
};

struct GraphCounters {
  std::size_t duplicate_page_ids = 0;
  std::size_t duplicate_titles = 0;
  std::size_t dangling_links = 0;
  std::size_t duplicate_edges = 0;
  std::size_t self_loops = 0;
};

// Pre-distillation graph. Edges run fine-to-coarse (child id, parent id),
// sorted and unique; every endpoint is in `pages` and every parent is a
// category.
struct RawGraph {
  std::unordered_map<std::uint64_t, PageRecord> pages;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  std::unordered_map<TitleKey, std::uint64_t, TitleKeyHash> title_index;
  GraphCounters counters;

  std::optional<std::uint64_t> find(Namespace ns, const std::string& title) const;
};

RawGraph build_raw_graph(std::vector<PageRecord> pages,
                         const std::vector<CategoryLinkRecord>& links);

}  // namespace discourse::ingest

#endif  // DISCOURSE_INGEST_HPP
