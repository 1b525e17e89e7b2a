#include <fstream>
#include <sstream>

#include "cmv/error.hpp"
#include "cmv/features.hpp"
#include "cmv/util.hpp"

namespace cmv::features {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

bool all_digits(std::string_view w) {
  bool any = false;
  for (const char c : w) {
    if (c >= '0' && c <= '9') {
      any = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return any;
}

}  // namespace

LexicalTagger::LexicalTagger(std::unordered_map<std::string, std::string> lexicon)
    : lexicon_(std::move(lexicon)) {}

LexicalTagger LexicalTagger::load(const std::string& path) {
  std::unordered_map<std::string, std::string> lex;
  for (const auto& line : read_lines(path)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = t.find('\t');
    if (tab == std::string_view::npos) throw Error(Errc::MalformedRecord, "POS lexicon line without tab: " + std::string(t));
    lex.emplace(to_lower_ascii(trim(t.substr(0, tab))), std::string(trim(t.substr(tab + 1))));
  }
  return LexicalTagger(std::move(lex));
}

std::string LexicalTagger::tag_word(std::string_view word) const {
  if (const auto it = lexicon_.find(std::string(word)); it != lexicon_.end()) return it->second;
  if (all_digits(word)) return "CD";
  if (word.find('\'') != std::string_view::npos) {
    if (word.ends_with("n't")) return "RB";
    if (word.ends_with("'s")) return "POS";
    return "PRP";
  }
  if (word.size() > 4 && word.ends_with("ly")) return "RB";
  if (word.size() > 4 && word.ends_with("ing")) return "VBG";
  if (word.size() > 3 && word.ends_with("ed")) return "VBD";
  for (const std::string_view suffix : {"able", "ible", "ful", "ous", "ive", "less", "ical", "ish", "ary"}) {
    if (word.size() > suffix.size() + 2 && word.ends_with(suffix)) return "JJ";
  }
  for (const std::string_view suffix : {"tion", "sion", "ment", "ness", "ity", "ism", "ance", "ence", "ship"}) {
    if (word.size() > suffix.size() + 2 && word.ends_with(suffix)) return "NN";
  }
  if (word.size() > 3 && word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us")) return "NNS";
  return "NN";
}

std::vector<std::string> LexicalTagger::tag(std::span<const std::string> words,
                                            std::span<const std::string>) const {
  std::vector<std::string> tags;
  tags.reserve(words.size());
  for (const auto& w : words) tags.push_back(tag_word(w));
  return tags;
}

SidecarTagger::SidecarTagger(std::unordered_map<std::string, std::vector<std::string>> tags)
    : tags_(std::move(tags)) {}

SidecarTagger SidecarTagger::load(const std::string& path) {
  std::unordered_map<std::string, std::vector<std::string>> tags;
  for (const auto& line : read_lines(path)) {
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(Errc::MalformedRecord, "POS sidecar line without tab");
    std::istringstream in(line.substr(tab + 1));
    std::vector<std::string> t;
    std::string tag;
    while (in >> tag) t.push_back(tag);
    tags[line.substr(0, tab)] = std::move(t);
  }
  return SidecarTagger(std::move(tags));
}

std::vector<std::string> SidecarTagger::tag(std::span<const std::string> words,
                                            std::span<const std::string> node_ids) const {
  std::vector<std::string> out;
  for (const auto& id : node_ids) {
    if (const auto it = tags_.find(id); it != tags_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
  }
  if (out.size() > words.size()) out.resize(words.size());
  return out;
}

}  // namespace cmv::features
