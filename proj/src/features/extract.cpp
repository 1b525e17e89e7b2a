#include <algorithm>
#include <map>

#include "cmv/error.hpp"
#include "cmv/features.hpp"
#include "cmv/util.hpp"

namespace cmv::features {

namespace {

using WordVec = std::vector<std::string>;

WordVec unique_sorted(WordVec v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::size_t intersection_size(const WordVec& a, const WordVec& b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? kMissing : static_cast<double>(num) / static_cast<double>(den);
}

std::array<WordVec, 3> word_sets(const Analyzed& a, std::size_t begin, std::size_t end) {
  std::array<WordVec, 3> sets;
  for (std::size_t i = begin; i < end; ++i) {
    sets[0].push_back(a.words[i]);
    sets[a.stop[i] ? 2 : 1].push_back(a.words[i]);
  }
  for (auto& s : sets) s = unique_sorted(std::move(s));
  return sets;
}

std::size_t count_in(std::span<const std::string> words, std::initializer_list<std::string_view> set) {
  std::size_t n = 0;
  for (const auto& w : words) {
    for (const auto s : set) {
      if (w == s) {
        ++n;
        break;
      }
    }
  }
  return n;
}

std::size_t count_examples(std::span<const std::string> words) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] == "e.g") ++n;
    if (words[i] == "for" && i + 1 < words.size() && (words[i + 1] == "example" || words[i + 1] == "instance")) {
      ++n;
    }
  }
  return n;
}

double mean_score(const Analyzed& a, std::size_t begin, std::size_t end, const lexicon::NormTable* table) {
  if (!table) return kMissing;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = begin; i < end; ++i) {
    if (a.stop[i]) continue;
    if (const auto s = table->score(a.words[i])) {
      sum += *s;
      ++n;
    }
  }
  return n == 0 ? kMissing : sum / static_cast<double>(n);
}

constexpr std::array<std::string_view, 15> kCategories{
    "definite_articles", "indefinite_articles", "positive_words", "negative_words", "first_person",
    "first_person_plural", "second_person", "links", "com_links", "edu_links",
    "pdf_links", "hedges", "examples", "question_marks", "quotations"};

std::string cell_name(std::size_t i) { return i == 4 ? "full" : std::to_string(i + 1); }

}  // namespace

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto sa = unique_sorted(a);
  const auto sb = unique_sorted(b);
  const auto inter = intersection_size(sa, sb);
  const auto uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::string_view word_set_name(WordSet s) {
  switch (s) {
    case WordSet::All: return "all";
    case WordSet::Content: return "content";
    case WordSet::Stop: return "stop";
  }
  return "?";
}

InterplayValues interplay(const Analyzed& arg, std::size_t arg_begin, std::size_t arg_end,
                          const Analyzed& op, std::size_t op_begin, std::size_t op_end) {
  const auto a = word_sets(arg, arg_begin, arg_end);
  const auto o = word_sets(op, op_begin, op_end);
  InterplayValues v{};
  for (std::size_t f = 0; f < 3; ++f) {
    const auto common = intersection_size(a[f], o[f]);
    const auto uni = a[f].size() + o[f].size() - common;
    v[f * 4 + 0] = static_cast<double>(common);
    v[f * 4 + 1] = ratio(common, a[f].size());
    v[f * 4 + 2] = ratio(common, o[f].size());
    v[f * 4 + 3] = ratio(common, uni);
  }
  return v;
}

InterplayValues interplay(const Analyzed& arg, const Analyzed& op) {
  return interplay(arg, 0, arg.words.size(), op, 0, op.words.size());
}

std::array<std::pair<std::size_t, std::size_t>, 4> split_quarters(std::size_t n) {
  std::array<std::pair<std::size_t, std::size_t>, 4> q{};
  std::size_t start = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    const std::size_t len = n / 4 + (k < n % 4 ? 1 : 0);
    q[k] = {start, start + len};
    start += len;
  }
  return q;
}

std::size_t count_syllables(std::string_view word) {
  auto vowel = [](char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
  };
  std::size_t groups = 0;
  bool prev = false;
  for (const char c : word) {
    const bool v = vowel(c);
    if (v && !prev) ++groups;
    prev = v;
  }
  // Silent final "e" ("make"), but not "-le" after a consonant ("table").
  const auto n = word.size();
  if (groups > 1 && n >= 2 && word[n - 1] == 'e' && !vowel(word[n - 2])) {
    const bool consonant_le = n >= 3 && word[n - 2] == 'l' && !vowel(word[n - 3]);
    if (!consonant_le) --groups;
  }
  return std::max<std::size_t>(groups, 1);
}

double word_entropy(std::span<const std::string> words) {
  if (words.empty()) return kMissing;
  std::map<std::string_view, std::size_t> counts;
  for (const auto& w : words) ++counts[w];
  const double n = static_cast<double>(words.size());
  double h = 0.0;
  for (const auto& [w, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h <= 0.0 ? 0.0 : h;
}

double flesch_kincaid(std::size_t words, std::size_t sentences, std::size_t syllables) {
  if (words == 0 || sentences == 0) return kMissing;
  const double w = static_cast<double>(words);
  return 0.39 * (w / static_cast<double>(sentences)) + 11.8 * (static_cast<double>(syllables) / w) - 15.59;
}

Family parse_family(std::string_view name) {
  if (name == "interplay") return Family::Interplay;
  if (name == "style") return Family::Style;
  if (name == "quarters") return Family::Quarters;
  if (name == "bow") return Family::Bow;
  if (name == "pos") return Family::Pos;
  throw Error(Errc::UnknownFamily, "unknown feature family '" + std::string(name) + "'");
}

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Interplay: return "interplay";
    case Family::Style: return "style";
    case Family::Quarters: return "quarters";
    case Family::Bow: return "bow";
    case Family::Pos: return "pos";
  }
  return "?";
}

std::vector<std::string> interplay_columns() {
  std::vector<std::string> base;
  for (const auto s : kWordSets) {
    for (const auto m : kInterplayMetrics) base.push_back(std::string(m) + "_" + std::string(word_set_name(s)));
  }
  std::vector<std::string> cols;
  for (const auto& b : base) cols.push_back("interplay." + b);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (i == 4 && j == 4) continue;
      for (const auto& b : base) cols.push_back("interplay." + b + ".a" + cell_name(i) + "_o" + cell_name(j));
    }
  }
  for (const auto& b : base) {
    cols.push_back("interplay." + b + ".max");
    cols.push_back("interplay." + b + ".min");
  }
  return cols;
}

QuarterMatrix quarter_interplay(const Analyzed& arg, const Analyzed& op) {
  auto qa = split_quarters(arg.words.size());
  auto qo = split_quarters(op.words.size());
  std::array<std::pair<std::size_t, std::size_t>, 5> ra{qa[0], qa[1], qa[2], qa[3], {0, arg.words.size()}};
  std::array<std::pair<std::size_t, std::size_t>, 5> ro{qo[0], qo[1], qo[2], qo[3], {0, op.words.size()}};
  QuarterMatrix m{};
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const bool empty = (i < 4 && ra[i].first == ra[i].second) || (j < 4 && ro[j].first == ro[j].second);
      if (empty) {
        m[i][j].fill(kMissing);
      } else {
        m[i][j] = interplay(arg, ra[i].first, ra[i].second, op, ro[j].first, ro[j].second);
      }
    }
  }
  return m;
}

std::vector<double> interplay_features(const Analyzed& arg, const Analyzed& op) {
  const auto m = quarter_interplay(arg, op);
  std::vector<double> out(m[4][4].begin(), m[4][4].end());
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      if (i == 4 && j == 4) continue;
      out.insert(out.end(), m[i][j].begin(), m[i][j].end());
    }
  }
  for (std::size_t k = 0; k < 12; ++k) {
    double hi = kMissing, lo = kMissing;
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        if (i == 4 && j == 4) continue;
        const double v = m[i][j][k];
        if (is_missing(v)) continue;
        if (is_missing(hi) || v > hi) hi = v;
        if (is_missing(lo) || v < lo) lo = v;
      }
    }
    out.push_back(hi);
    out.push_back(lo);
  }
  return out;
}

std::vector<std::string> style_columns(bool truncated) {
  std::vector<std::string> cols{"style.n_words"};
  for (const auto c : kCategories) {
    if (truncated && c == "question_marks") continue;
    cols.push_back("style.n_" + std::string(c));
    cols.push_back("style.frac_" + std::string(c));
  }
  for (const auto d : lexicon::kDimensions) cols.push_back("style." + std::string(lexicon::dimension_name(d)));
  cols.push_back("style.word_entropy");
  cols.push_back("style.type_token_ratio");
  if (!truncated) {
    for (const char* c : {"n_sentences", "n_paragraphs", "flesch_kincaid", "n_italics", "n_bolds",
                          "bullet_list", "numbered_list", "frac_italics"}) {
      cols.push_back(std::string("style.") + c);
    }
  }
  cols.push_back("style.n_numbered_words");
  return cols;
}

std::vector<double> style_features(const Analyzed& arg, const lexicon::ResourceSet& res) {
  const bool truncated = arg.doc && arg.doc->truncated;
  const std::span<const std::string> words = arg.words;
  const auto n = words.size();
  std::array<std::size_t, kCategories.size()> counts{};
  counts[0] = count_in(words, {"the"});
  counts[1] = count_in(words, {"a", "an"});
  counts[2] = res.positive.count_matches(words);
  counts[3] = res.negative.count_matches(words);
  counts[4] = count_in(words, {"i", "me", "my", "mine", "myself", "i'm", "i've", "i'd", "i'll"});
  counts[5] = count_in(words, {"we", "us", "our", "ours", "ourselves", "we're", "we've", "we'd", "we'll"});
  counts[6] = count_in(words, {"you", "your", "yours", "yourself", "yourselves", "you're", "you've", "you'd",
                               "you'll"});
  if (arg.doc) {
    counts[7] = arg.doc->links.size();
    for (const auto& l : arg.doc->links) {
      const auto k = classify_link(l);
      counts[8] += k.com;
      counts[9] += k.edu;
      counts[10] += k.pdf;
    }
  }
  counts[11] = res.hedges.count_matches(words);
  counts[12] = count_examples(words);
  counts[13] = arg.question_marks;
  counts[14] = arg.quotes;

  std::vector<double> out{static_cast<double>(n)};
  for (std::size_t c = 0; c < kCategories.size(); ++c) {
    if (truncated && kCategories[c] == "question_marks") continue;
    out.push_back(static_cast<double>(counts[c]));
    out.push_back(ratio(counts[c], n));
  }
  for (const auto d : lexicon::kDimensions) out.push_back(mean_score(arg, 0, n, res.norm(d)));
  out.push_back(word_entropy(words));
  std::vector<std::string> types(words.begin(), words.end());
  types = unique_sorted(std::move(types));
  out.push_back(ratio(types.size(), n));
  if (!truncated) {
    std::size_t syllables = 0;
    for (const auto& w : words) syllables += count_syllables(w);
    out.push_back(static_cast<double>(arg.sentences));
    out.push_back(static_cast<double>(arg.paragraphs));
    out.push_back(flesch_kincaid(n, arg.sentences, syllables));
    const auto md = arg.doc ? markdown_counts(arg.doc->raw) : MarkdownCounts{};
    out.push_back(static_cast<double>(md.italics));
    out.push_back(static_cast<double>(md.bolds));
    out.push_back(md.bullet_list ? 1.0 : 0.0);
    out.push_back(md.numbered_list ? 1.0 : 0.0);
    out.push_back(ratio(md.italics, n));
  }
  out.push_back(static_cast<double>(count_in(
      words, {"first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth"})));
  return out;
}

std::vector<std::string> quarter_columns() {
  std::vector<std::string> cols;
  for (const auto d : lexicon::kDimensions) {
    for (int q = 1; q <= 4; ++q) {
      cols.push_back("quarters." + std::string(lexicon::dimension_name(d)) + "_q" + std::to_string(q));
    }
  }
  return cols;
}

std::array<std::array<double, 4>, 4> quarter_scores(const Analyzed& arg, const lexicon::ResourceSet& res) {
  const auto q = split_quarters(arg.words.size());
  std::array<std::array<double, 4>, 4> out{};
  for (std::size_t d = 0; d < 4; ++d) {
    for (std::size_t k = 0; k < 4; ++k) {
      out[d][k] = mean_score(arg, q[k].first, q[k].second, res.norm(lexicon::kDimensions[d]));
    }
  }
  return out;
}

std::vector<double> quarter_features(const Analyzed& arg, const lexicon::ResourceSet& res) {
  const auto s = quarter_scores(arg, res);
  std::vector<double> out;
  for (const auto& row : s) out.insert(out.end(), row.begin(), row.end());
  return out;
}

}  // namespace cmv::features
