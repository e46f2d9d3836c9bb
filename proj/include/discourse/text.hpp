#ifndef DISCOURSE_TEXT_HPP
#define DISCOURSE_TEXT_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace discourse {

bool is_valid_utf8(std::string_view text);

// NFC normalization. Input must be valid UTF-8.
std::string to_nfc(std::string_view text);

// Canonical title form: underscores become spaces, whitespace runs collapse
// to one space, leading/trailing whitespace is trimmed, result is NFC.
std::string normalize_title(std::string_view title);

// Lowercased word tokens. Splits on every non-alphanumeric code point except
// apostrophes and hyphens that sit between two alphanumerics.
std::vector<std::string> tokenize(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Prefix of at most max_codepoints code points; "..." appended when cut.
std::string truncate_text(std::string_view text, std::size_t max_codepoints);

// Replaces tabs, CR and LF with spaces so the value fits in one TSV cell.
std::string tsv_cell(std::string_view text);

}  // namespace discourse

#endif  // DISCOURSE_TEXT_HPP
