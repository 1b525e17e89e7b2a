#include <fstream>
#include <sstream>

#include "cmv/error.hpp"
#include "cmv/lexicon.hpp"
#include "cmv/util.hpp"

namespace cmv::lexicon {

namespace {

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Lexicon::Lexicon(std::string name, std::span<const std::string> entries) : name_(std::move(name)) {
  for (const auto& e : entries) {
    auto toks = split_ws(to_lower_ascii(e));
    if (toks.empty()) continue;
    if (toks.size() == 1) {
      words_.insert(std::move(toks[0]));
    } else {
      max_phrase_ = std::max(max_phrase_, toks.size());
      phrases_.insert(std::move(toks));
    }
  }
}

std::size_t Lexicon::count_matches(std::span<const std::string> tokens) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (words_.count(tokens[i])) ++n;
    if (phrases_.empty()) continue;
    for (const auto& p : phrases_) {
      if (i + p.size() > tokens.size()) continue;
      if (std::equal(p.begin(), p.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) ++n;
    }
  }
  return n;
}

Lexicon parse_lexicon(std::string_view text, std::string name) {
  std::vector<std::string> entries;
  for (const auto line : split_lines(text)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    entries.emplace_back(t);
  }
  Lexicon lex(name, entries);
  if (lex.empty()) throw Error(Errc::EmptyLexicon, "lexicon '" + name + "' has no entries");
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path, std::string name) {
  return parse_lexicon(read_file(path), std::move(name));
}

std::uint64_t ResourceSet::fingerprint() const {
  std::uint64_t h = fnv1a64("resources");
  auto mix = [&h](std::string_view s) {
    h = fnv1a64(s, h);
    h = fnv1a64("\x1f", h);
  };
  for (const Lexicon* lex : {&stopwords, &positive, &negative, &hedges}) {
    mix(lex->name());
    for (const auto& w : lex->words()) mix(w);
    for (const auto& p : lex->phrases()) {
      for (const auto& w : p) mix(w);
      mix("\x1e");
    }
  }
  for (const auto& table : norms) {
    if (!table) {
      mix("-");
      continue;
    }
    mix(dimension_name(table->dimension()));
    for (const auto& w : table->words()) {
      mix(w);
      mix(format_double(*table->score(w)));
    }
  }
  return h;
}

ResourceSet load_resources(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(Errc::UnreadableFile, "resource directory " + dir.string() + " not found");
  }
  ResourceSet res;
  const auto lex = dir / "lexicons";
  res.stopwords = load_lexicon(lex / "stopwords.txt", "stopwords");
  res.positive = load_lexicon(lex / "positive.txt", "positive");
  res.negative = load_lexicon(lex / "negative.txt", "negative");
  res.hedges = load_lexicon(lex / "hedges.txt", "hedges");
  for (const auto d : kDimensions) {
    const auto path = dir / "norms" / (std::string(dimension_name(d)) + ".csv");
    if (std::filesystem::exists(path)) {
      res.norms[static_cast<std::size_t>(d)] = load_norms(path, d);
    } else {
      res.diagnostics.push_back("no " + std::string(dimension_name(d)) +
                                " norms; the feature will be missing");
    }
  }
  const auto emb = dir / "embeddings.txt";
  if (std::filesystem::exists(emb)) res.embeddings = load_embeddings(emb);
  return res;
}

void extrapolate_resources(ResourceSet& res, std::span<const std::string> vocab,
                           const ExtrapolationOptions& options) {
  if (!res.embeddings) return;
  for (auto& table : res.norms) {
    if (!table) continue;
    auto result = extrapolate_norms(*table, *res.embeddings, vocab, options);
    if (!result.diagnostic.empty()) res.diagnostics.push_back(result.diagnostic);
    table = std::move(result.table);
  }
}

}  // namespace cmv::lexicon
