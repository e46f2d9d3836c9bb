#include "discourse/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>

#include "discourse/error.hpp"

namespace discourse {
namespace {

struct CodePoint {
  UChar32 value;
  std::size_t begin;
  std::size_t end;
};

std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t begin = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);
    out.push_back({c, static_cast<std::size_t>(begin), static_cast<std::size_t>(i)});
  }
  return out;
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), n, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(n));
}

bool is_word_char(UChar32 c) {
  if (u_isalnum(c)) return true;
  const int8_t type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK;
}

bool is_joiner(UChar32 c) {
  return c == '\'' || c == 0x2019 || c == '-' || c == 0x2010 || c == 0x2011;
}

bool is_space(UChar32 c) { return c == '_' ? false : u_isUWhiteSpace(c); }

}  // namespace

bool is_valid_utf8(std::string_view text) {
  for (const auto& cp : decode(text)) {
    if (cp.value < 0) return false;
  }
  return true;
}

std::string to_nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  const auto source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  if (nfc->isNormalized(source, status) && U_SUCCESS(status)) return std::string(text);
  status = U_ZERO_ERROR;
  icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

std::string normalize_title(std::string_view title) {
  std::string collapsed;
  collapsed.reserve(title.size());
  bool pending_space = false;
  for (const auto& cp : decode(title)) {
    const UChar32 c = cp.value == '_' ? UChar32{' '} : cp.value;
    if (c >= 0 && is_space(c)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) collapsed.push_back(' ');
    pending_space = false;
    if (c < 0) {
      collapsed.append(title.substr(cp.begin, cp.end - cp.begin));
    } else {
      append_utf8(collapsed, c);
    }
  }
  return to_nfc(collapsed);
}

std::vector<std::string> tokenize(std::string_view text) {
  const std::string normalized = to_nfc(text);
  const auto cps = decode(normalized);
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t k = 0; k < cps.size(); ++k) {
    const UChar32 c = cps[k].value;
    if (c >= 0 && is_word_char(c)) {
      append_utf8(current, u_tolower(c));
      continue;
    }
    const bool internal = c >= 0 && is_joiner(c) && !current.empty() && k + 1 < cps.size() &&
                          cps[k + 1].value >= 0 && u_isalnum(cps[k + 1].value);
    if (internal) {
      current.push_back(c == '\'' || c == 0x2019 ? '\'' : '-');
      continue;
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::string truncate_text(std::string_view text, std::size_t max_codepoints) {
  const auto cps = decode(text);
  if (cps.size() <= max_codepoints) return std::string(text);
  std::string out(text.substr(0, max_codepoints == 0 ? 0 : cps[max_codepoints - 1].end));
  out.append("...");
  return out;
}

std::string tsv_cell(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

}  // namespace discourse
