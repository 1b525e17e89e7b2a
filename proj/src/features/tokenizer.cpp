#include "cmv/corpus.hpp"
#include "cmv/features.hpp"
#include "cmv/util.hpp"

namespace cmv::features {

namespace {

bool is_word_cp(char32_t c) {
  if (c < 0x80) return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
  if (c < 0xC0) return false;
  if (c < 0x100) return c != 0xD7 && c != 0xF7;
  if (c >= 0x2000 && c <= 0x2BFF) return false;
  if (c >= 0x2E00 && c <= 0x2E7F) return false;
  if (c >= 0x3000 && c <= 0x303F) return false;
  if (c >= 0xFE00 && c <= 0xFE4F) return false;
  if ((c >= 0xFF00 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
      (c >= 0xFF5B && c <= 0xFF65)) {
    return false;
  }
  if (c >= 0x1F000 && c <= 0x1FAFF) return false;
  if (c == 0xFEFF || c == 0x200B) return false;
  return true;
}

bool is_digit_cp(char32_t c) { return c >= '0' && c <= '9'; }

char32_t lower_cp(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  return c;
}

char32_t peek(std::string_view s, std::size_t pos) {
  if (pos >= s.size()) return 0;
  return next_code_point(s, pos);
}

std::size_t count_paragraphs(std::string_view text) {
  std::size_t blocks = 0;
  bool in_block = false;
  for (const auto line : split_lines(text)) {
    if (trim(line).empty()) {
      in_block = false;
    } else if (!in_block) {
      in_block = true;
      ++blocks;
    }
  }
  return blocks;
}

}  // namespace

bool is_sentinel(std::string_view token) {
  return token == corpus::kQuoteToken || token == corpus::kUrlToken;
}

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  std::size_t cur_begin = 0;
  std::size_t seg_len = 0;  // code points since token start or the last joined period
  bool seg_digits = true;
  bool sentence_has_word = false;

  auto flush = [&](std::size_t end) {
    if (cur.empty()) return;
    out.tokens.push_back(std::move(cur));
    out.spans.push_back({cur_begin, end, false});
    cur.clear();
    sentence_has_word = true;
  };
  auto close_sentence = [&] {
    if (sentence_has_word) ++out.sentences;
    sentence_has_word = false;
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] == '\xE2') {
      for (const auto sentinel : {corpus::kQuoteToken, corpus::kUrlToken}) {
        if (text.substr(pos).starts_with(sentinel)) {
          flush(pos);
          out.tokens.emplace_back(sentinel);
          out.spans.push_back({pos, pos + sentinel.size(), true});
          pos += sentinel.size();
          goto next;
        }
      }
    }
    {
      const std::size_t start = pos;
      const char32_t c = next_code_point(text, pos);
      if (is_word_cp(c)) {
        if (cur.empty()) {
          cur_begin = start;
          seg_len = 0;
          seg_digits = true;
        }
        append_utf8(cur, lower_cp(c));
        ++seg_len;
        seg_digits = seg_digits && is_digit_cp(c);
        continue;
      }
      const char32_t nx = peek(text, pos);
      if ((c == '\'' || c == 0x2019) && !cur.empty() && is_word_cp(nx)) {
        cur += '\'';
        seg_len = 0;
        seg_digits = false;
        continue;
      }
      if (c == '.' && !cur.empty() && is_word_cp(nx) && (seg_len == 1 || seg_digits)) {
        cur += '.';
        seg_len = 0;
        continue;
      }
      flush(start);
      if (c == '.' || c == '?' || c == '!' || c == '\n') close_sentence();
    }
  next:;
  }
  flush(text.size());
  close_sentence();
  out.paragraphs = count_paragraphs(text);
  return out;
}

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  for (const auto& s : tokenize(text).spans) n += s.sentinel ? 0 : 1;
  return n;
}

Truncation truncate_words(std::string_view text, std::size_t n) {
  const auto toks = tokenize(text);
  Truncation t;
  std::size_t cut = text.size();
  std::size_t words = 0;
  for (const auto& s : toks.spans) {
    if (s.sentinel) continue;
    if (words == n) {
      t.truncated = true;
      break;
    }
    ++words;
    if (words == n) cut = s.end;
  }
  if (!t.truncated) cut = text.size();
  if (n == 0) cut = 0;
  t.text = std::string(text.substr(0, cut));
  t.words = words;
  for (const auto& s : toks.spans) {
    if (s.sentinel && s.end <= cut && text.substr(s.begin, s.end - s.begin) == corpus::kUrlToken) ++t.urls;
  }
  return t;
}

Document make_document(std::string_view raw) {
  static const corpus::TextNormalizer normalizer;
  auto norm = normalizer.normalize_detailed(raw);
  Document d;
  d.clean = std::move(norm.text);
  d.raw = std::string(raw);
  d.links = std::move(norm.urls);
  return d;
}

Analyzed analyze(const Document& doc, const lexicon::Lexicon& stopwords) {
  Analyzed a;
  a.doc = &doc;
  auto toks = tokenize(doc.clean);
  a.tokens = std::move(toks.tokens);
  for (const auto& t : a.tokens) {
    if (t == corpus::kQuoteToken) ++a.quotes;
    if (is_sentinel(t)) continue;
    a.words.push_back(t);
    a.stop.push_back(stopwords.contains(t));
  }
  if (!doc.truncated) {
    a.sentences = toks.sentences;
    a.paragraphs = toks.paragraphs;
    for (const char c : doc.clean) a.question_marks += c == '?' ? 1 : 0;
  }
  return a;
}

}  // namespace cmv::features
