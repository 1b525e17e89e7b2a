#include <cctype>

#include "cmv/corpus.hpp"
#include "cmv/error.hpp"
#include "cmv/util.hpp"

namespace cmv::corpus {

namespace {

bool starts_with_ci(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) != prefix[i]) return false;
  }
  return true;
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool is_blank(std::string_view line) { return trim(line).empty(); }

// Leading whitespace and emphasis/heading markers ahead of an "EDIT:" label.
std::string_view strip_edit_lead(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '*' ||
                             line[i] == '_' || line[i] == '#')) {
    ++i;
  }
  return line.substr(i);
}

}  // namespace

bool is_blockquote_line(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  if (i < line.size() && line[i] == '>') return true;
  return line.substr(i).starts_with("&gt;");
}

std::vector<UrlSpan> find_urls(std::string_view text) {
  std::vector<UrlSpan> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t prefix = 0;
    if (starts_with_ci(text, i, "https://")) {
      prefix = 8;
    } else if (starts_with_ci(text, i, "http://")) {
      prefix = 7;
    } else if (starts_with_ci(text, i, "www.")) {
      prefix = 4;
    }
    if (prefix == 0 || (i > 0 && is_alnum(text[i - 1]))) {
      ++i;
      continue;
    }
    std::size_t j = i + prefix;
    int depth = 0;
    while (j < text.size()) {
      const char c = text[j];
      if (std::isspace(static_cast<unsigned char>(c)) || c == '<' || c == '>' || c == '"' ||
          c == ']' || c == '\'') {
        break;
      }
      if (c == '(') {
        ++depth;
      } else if (c == ')') {
        if (depth == 0) break;
        --depth;
      }
      ++j;
    }
    while (j > i + prefix) {
      const char c = text[j - 1];
      if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == '*' ||
          c == '_') {
        --j;
      } else {
        break;
      }
    }
    if (j > i + prefix) {
      spans.push_back({i, j});
      i = j;
    } else {
      i += prefix;
    }
  }
  return spans;
}

TextNormalizer::TextNormalizer(std::string edit_pattern) : pattern_(std::move(edit_pattern)) {
  try {
    edit_re_ = std::regex(pattern_, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw Error(Errc::InvalidConfig, "edit pattern '" + pattern_ + "': " + e.what());
  }
}

NormalizedText TextNormalizer::normalize_detailed(std::string_view raw) const {
  NormalizedText result;
  const auto lines = split_lines(raw);
  std::string out;
  bool in_edit = false;
  bool first = true;
  for (const auto line : lines) {
    if (in_edit) {
      if (!is_blank(line)) continue;
      in_edit = false;
    } else {
      const auto lead = strip_edit_lead(line);
      if (std::regex_search(lead.begin(), lead.end(), edit_re_,
                            std::regex_constants::match_continuous)) {
        in_edit = true;
        continue;
      }
    }
    if (!first) out += '\n';
    first = false;
    if (is_blockquote_line(line)) {
      out += kQuoteToken;
      continue;
    }
    std::size_t pos = 0;
    for (const auto& span : find_urls(line)) {
      out.append(line.substr(pos, span.begin - pos));
      out += kUrlToken;
      result.urls.emplace_back(line.substr(span.begin, span.end - span.begin));
      pos = span.end;
    }
    out.append(line.substr(pos));
  }
  const auto end = out.find_last_not_of(" \t\r\n");
  out.resize(end == std::string::npos ? 0 : end + 1);
  result.text = std::move(out);
  return result;
}

std::string normalize_text(std::string_view body_raw) {
  static const TextNormalizer normalizer;
  return normalizer.normalize(body_raw);
}

}  // namespace cmv::corpus
