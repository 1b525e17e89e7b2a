#include <cctype>

#include "cmv/corpus.hpp"
#include "cmv/features.hpp"
#include "cmv/util.hpp"

namespace cmv::features {

namespace {

constexpr char kErased = '\x01';

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Leading list marker: returns the offset just past it, or npos.
std::size_t bullet_marker(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && is_space(line[i])) ++i;
  if (i + 1 < line.size() && (line[i] == '-' || line[i] == '*' || line[i] == '+') && is_space(line[i + 1])) {
    std::size_t j = i + 1;
    while (j < line.size() && is_space(line[j])) ++j;
    if (j < line.size()) return i + 1;
  }
  return std::string_view::npos;
}

bool numbered_marker(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && is_space(line[i])) ++i;
  const auto digits = i;
  while (i < line.size() && line[i] >= '0' && line[i] <= '9') ++i;
  if (i == digits || i >= line.size() || (line[i] != '.' && line[i] != ')')) return false;
  ++i;
  if (i >= line.size() || !is_space(line[i])) return false;
  while (i < line.size() && is_space(line[i])) ++i;
  return i < line.size();
}

bool left_boundary(const std::string& s, std::size_t i, char mark) {
  return mark == '*' || i == 0 || !is_alnum(s[i - 1]);
}

bool right_boundary(const std::string& s, std::size_t end, char mark) {
  return mark == '*' || end >= s.size() || !is_alnum(s[end]);
}

// Counts and erases delimited spans of `width` repeated `mark` characters.
std::size_t take_spans(std::string& s, char mark, std::size_t width) {
  std::size_t count = 0;
  const std::string delim(width, mark);
  std::size_t i = 0;
  while (i + width < s.size()) {
    if (s.compare(i, width, delim) != 0 || is_space(s[i + width]) || s[i + width] == mark ||
        (i > 0 && s[i - 1] == mark) || !left_boundary(s, i, mark)) {
      ++i;
      continue;
    }
    std::size_t j = i + width + 1;
    bool found = false;
    while (j + width <= s.size()) {
      if (s.compare(j, width, delim) == 0 && !is_space(s[j - 1]) &&
          (j + width >= s.size() || s[j + width] != mark) && right_boundary(s, j + width, mark)) {
        found = true;
        break;
      }
      ++j;
    }
    if (!found) {
      ++i;
      continue;
    }
    for (std::size_t k = 0; k < width; ++k) {
      s[i + k] = kErased;
      s[j + k] = kErased;
    }
    ++count;
    i = j + width;
  }
  return count;
}

}  // namespace

MarkdownCounts markdown_counts(std::string_view raw) {
  MarkdownCounts out;
  for (const auto line_view : split_lines(raw)) {
    if (corpus::is_blockquote_line(line_view)) continue;
    std::string line(line_view);
    for (const auto& span : corpus::find_urls(line)) {
      for (auto k = span.begin; k < span.end; ++k) line[k] = 'x';
    }
    if (const auto m = bullet_marker(line); m != std::string::npos) {
      out.bullet_list = true;
      line[m - 1] = kErased;
    }
    if (numbered_marker(line)) out.numbered_list = true;
    out.bolds += take_spans(line, '*', 2) + take_spans(line, '_', 2);
    out.italics += take_spans(line, '*', 1) + take_spans(line, '_', 1);
  }
  return out;
}

}  // namespace cmv::features
