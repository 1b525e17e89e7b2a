#include <algorithm>
#include <map>

#include <json.hpp>

#include "cmv/error.hpp"
#include "cmv/pairing.hpp"
#include "cmv/util.hpp"

namespace cmv::pairing {

using corpus::DiscussionTree;
using nlohmann::json;

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::RootReply: return "root_reply";
    case Variant::FullPath: return "full_path";
    case Variant::RootTruncated: return "root_truncated";
  }
  return "?";
}

Variant parse_variant(std::string_view name) {
  std::string n(name);
  std::replace(n.begin(), n.end(), '-', '_');
  for (const auto v : kVariants) {
    if (variant_name(v) == n) return v;
  }
  throw Error(Errc::InvalidConfig, "unknown variant '" + std::string(name) + "'");
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Heldout: return "heldout";
    case Split::Outside: return "none";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "heldout") return Split::Heldout;
  if (name == "none") return Split::Outside;
  throw Error(Errc::MalformedRecord, "unknown split '" + std::string(name) + "'");
}

Split split_of(std::int64_t created_utc, const SplitConfig& cfg) {
  if (created_utc >= cfg.train_begin && created_utc < cfg.boundary) return Split::Train;
  if (created_utc >= cfg.boundary && created_utc < cfg.heldout_end) return Split::Heldout;
  return Split::Outside;
}

std::vector<std::string> matching_words(std::string_view clean_text, const lexicon::Lexicon& stopwords) {
  std::vector<std::string> out;
  for (auto& t : features::tokenize(clean_text).tokens) {
    if (features::is_sentinel(t) || stopwords.contains(t)) continue;
    out.push_back(std::move(t));
  }
  return out;
}

features::Document op_document(const DiscussionTree& tree, const corpus::TextNormalizer& normalizer) {
  const std::string raw = tree.title() + "\n\n" + tree.root().body_raw;
  auto norm = normalizer.normalize_detailed(raw);
  features::Document d;
  d.clean = std::move(norm.text);
  d.raw = raw;
  d.links = std::move(norm.urls);
  return d;
}

namespace {

struct Candidate {
  const corpus::RootedPathUnit* unit;
  std::vector<std::string> words;
  std::size_t word_count;
  std::int64_t utc;
  std::string root_id;
};

ArgumentText unit_text(const DiscussionTree& tree, std::span<const std::size_t> nodes,
                       const corpus::TextNormalizer& normalizer) {
  ArgumentText t;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& n = tree.node(nodes[k]);
    auto norm = normalizer.normalize_detailed(n.body_raw);
    if (k > 0) {
      t.doc.clean += "\n\n";
      t.doc.raw += "\n\n";
    }
    t.doc.clean += norm.text;
    t.doc.raw += n.body_raw;
    t.doc.links.insert(t.doc.links.end(), norm.urls.begin(), norm.urls.end());
    t.node_ids.push_back(n.id);
  }
  return t;
}

UnitRef unit_ref(const DiscussionTree& tree, const corpus::RootedPathUnit& u,
                 const std::vector<std::string>& entry) {
  UnitRef r;
  r.author = u.author;
  r.root_reply_id = tree.node(u.root_reply).id;
  r.root_reply_utc = tree.node(u.root_reply).created_utc;
  r.node_ids = corpus::node_ids(tree, u.nodes);
  const auto it = std::find(entry.begin(), entry.end(), u.author);
  r.entry_rank = it == entry.end() ? 0 : static_cast<std::size_t>(it - entry.begin()) + 1;
  return r;
}

// Earlier root reply first, then id, then node list, so selection is total.
bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.utc != b.utc) return a.utc < b.utc;
  if (a.root_id != b.root_id) return a.root_id < b.root_id;
  return a.unit->nodes < b.unit->nodes;
}

}  // namespace

std::vector<ArgumentPair> build_tree_pairs(const DiscussionTree& tree, const lexicon::Lexicon& stopwords,
                                           const PairConfig& cfg, PairDiagnostics* diag) {
  PairDiagnostics local;
  auto& d = diag ? *diag : local;
  ++d.trees_considered;
  const auto entry = tree.challengers_by_entry();
  if (entry.size() < cfg.min_unique_challengers) {
    ++d.trees_few_challengers;
    return {};
  }
  const auto last_op = tree.last_op_comment_utc();
  const corpus::TextNormalizer normalizer(cfg.edit_pattern);
  const auto units = corpus::rooted_path_units(tree);

  auto make_candidate = [&](const corpus::RootedPathUnit& u) {
    const auto& root = tree.node(u.root_reply);
    Candidate c{&u, matching_words(root.body_clean, stopwords), features::count_words(root.body_clean),
                root.created_utc, root.id};
    return c;
  };

  std::vector<Candidate> negatives;
  std::vector<Candidate> positives;
  for (const auto& u : units) {
    if (!tree.is_challenger(u.author)) continue;
    if (u.delta_winning) {
      positives.push_back(make_candidate(u));
      continue;
    }
    if (!last_op) continue;
    auto c = make_candidate(u);
    if (c.word_count >= cfg.min_words && c.utc < *last_op) negatives.push_back(std::move(c));
  }
  if (positives.empty()) return {};
  if (negatives.size() < cfg.min_negatives) {
    ++d.trees_few_negatives;
    return {};
  }
  std::sort(positives.begin(), positives.end(), candidate_before);
  std::sort(negatives.begin(), negatives.end(), candidate_before);

  const auto op = op_document(tree, normalizer);
  std::vector<ArgumentPair> out;
  for (const auto& pos : positives) {
    if (pos.word_count < cfg.min_words) {
      ++d.winners_short;
      continue;
    }
    const Candidate* best = nullptr;
    double best_score = -1.0;
    for (const auto& neg : negatives) {
      const double s = features::jaccard(pos.words, neg.words);
      // Negatives are in tie-break order, so only a strict improvement wins.
      if (s > best_score) {
        best_score = s;
        best = &neg;
      }
    }
    if (!best) {
      ++d.winners_no_candidate;
      d.messages.push_back("no candidate for winning unit at " + pos.root_id + " in " + tree.id());
      continue;
    }
    ArgumentPair p;
    p.tree_id = tree.id();
    p.op_author = tree.op_author();
    p.created_utc = tree.created_utc();
    p.positive = unit_ref(tree, *pos.unit, entry);
    p.negative = unit_ref(tree, *best->unit, entry);
    p.jaccard_score = best_score;
    p.op = op;
    const std::array<std::size_t, 1> pos_root{pos.unit->root_reply};
    const std::array<std::size_t, 1> neg_root{best->unit->root_reply};
    p.texts[0] = {unit_text(tree, pos_root, normalizer), unit_text(tree, neg_root, normalizer)};
    p.texts[1] = {unit_text(tree, pos.unit->nodes, normalizer), unit_text(tree, best->unit->nodes, normalizer)};
    truncate_pair(p);
    out.push_back(std::move(p));
  }
  return out;
}

void truncate_pair(ArgumentPair& pair) {
  const auto& [pos, neg] = pair.texts[static_cast<std::size_t>(Variant::RootReply)];
  const auto n = std::min(features::count_words(pos.doc.clean), features::count_words(neg.doc.clean));
  auto cut = [n](const ArgumentText& src) {
    ArgumentText t;
    const auto tr = features::truncate_words(src.doc.clean, n);
    t.doc.clean = tr.text;
    t.doc.links.assign(src.doc.links.begin(),
                       src.doc.links.begin() + static_cast<std::ptrdiff_t>(std::min(tr.urls, src.doc.links.size())));
    t.doc.truncated = true;
    t.node_ids = src.node_ids;
    return t;
  };
  pair.texts[static_cast<std::size_t>(Variant::RootTruncated)] = {cut(pos), cut(neg)};
}

std::vector<ArgumentPair> build_pairs(std::span<const DiscussionTree> trees, const lexicon::Lexicon& stopwords,
                                      const PairConfig& cfg, const SplitConfig& split, PairDiagnostics* diag) {
  PairDiagnostics local;
  auto& d = diag ? *diag : local;
  std::vector<const DiscussionTree*> order;
  for (const auto& t : trees) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id() < b->id(); });
  std::vector<ArgumentPair> out;
  for (const auto* t : order) {
    const auto s = split_of(t->created_utc(), split);
    if (s == Split::Outside) {
      ++d.trees_outside_split;
      continue;
    }
    auto pairs = build_tree_pairs(*t, stopwords, cfg, &d);
    for (auto& p : pairs) {
      p.split = s;
      out.push_back(std::move(p));
    }
  }
  return out;
}

corpus::CorpusFilter malleability_filter() {
  corpus::CorpusFilter f;
  f.min_challenger_replies = 0;
  f.min_unique_challengers = 10;
  f.min_op_replies = 1;
  f.exclude_body_words = {"changed"};
  return f;
}

std::vector<MalleabilityInstance> build_malleability(std::span<const DiscussionTree> trees,
                                                     const SplitConfig& split, const corpus::CorpusFilter& filter) {
  const corpus::TextNormalizer normalizer;
  std::vector<const DiscussionTree*> order;
  for (const auto& t : trees) order.push_back(&t);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id() < b->id(); });
  std::vector<MalleabilityInstance> out;
  for (const auto* t : order) {
    const auto s = split_of(t->created_utc(), split);
    if (s == Split::Outside || !corpus::passes_filter(*t, filter)) continue;
    MalleabilityInstance m;
    m.tree_id = t->id();
    m.op_author = t->op_author();
    m.created_utc = t->created_utc();
    m.split = s;
    m.label = t->has_delta();
    m.op = op_document(*t, normalizer);
    out.push_back(std::move(m));
  }
  return out;
}

namespace {

json doc_json(const features::Document& d) {
  return json{{"clean", d.clean}, {"raw", d.raw}, {"links", d.links}, {"truncated", d.truncated}};
}

features::Document doc_from(const json& j) {
  features::Document d;
  d.clean = j.at("clean").get<std::string>();
  d.raw = j.at("raw").get<std::string>();
  d.links = j.at("links").get<std::vector<std::string>>();
  d.truncated = j.at("truncated").get<bool>();
  return d;
}

json unit_json(const UnitRef& u) {
  return json{{"author", u.author},
              {"root_reply_id", u.root_reply_id},
              {"root_reply_utc", u.root_reply_utc},
              {"node_ids", u.node_ids},
              {"entry_rank", u.entry_rank}};
}

UnitRef unit_from(const json& j) {
  UnitRef u;
  u.author = j.at("author").get<std::string>();
  u.root_reply_id = j.at("root_reply_id").get<std::string>();
  u.root_reply_utc = j.at("root_reply_utc").get<std::int64_t>();
  u.node_ids = j.at("node_ids").get<std::vector<std::string>>();
  u.entry_rank = j.at("entry_rank").get<std::size_t>();
  return u;
}

}  // namespace

std::string pair_to_json(const ArgumentPair& p) {
  json texts = json::object();
  for (const auto v : kVariants) {
    const auto& [a, b] = p.variant(v);
    texts[std::string(variant_name(v))] = json{{"positive", doc_json(a.doc)}, {"negative", doc_json(b.doc)}};
  }
  json j{{"tree_id", p.tree_id},
         {"op_author", p.op_author},
         {"created_utc", p.created_utc},
         {"split", std::string(split_name(p.split))},
         {"positive", unit_json(p.positive)},
         {"negative", unit_json(p.negative)},
         {"jaccard_score", p.jaccard_score},
         {"op", doc_json(p.op)},
         {"texts", std::move(texts)}};
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

ArgumentPair pair_from_json(std::string_view line) {
  try {
    const auto j = json::parse(line);
    ArgumentPair p;
    p.tree_id = j.at("tree_id").get<std::string>();
    p.op_author = j.at("op_author").get<std::string>();
    p.created_utc = j.at("created_utc").get<std::int64_t>();
    p.split = parse_split(j.at("split").get<std::string>());
    p.positive = unit_from(j.at("positive"));
    p.negative = unit_from(j.at("negative"));
    p.jaccard_score = j.at("jaccard_score").get<double>();
    p.op = doc_from(j.at("op"));
    for (const auto v : kVariants) {
      const auto& t = j.at("texts").at(std::string(variant_name(v)));
      auto& slot = p.texts[static_cast<std::size_t>(v)];
      slot.first.doc = doc_from(t.at("positive"));
      slot.second.doc = doc_from(t.at("negative"));
      const bool root_only = v != Variant::FullPath;
      slot.first.node_ids = root_only ? std::vector<std::string>{p.positive.root_reply_id} : p.positive.node_ids;
      slot.second.node_ids = root_only ? std::vector<std::string>{p.negative.root_reply_id} : p.negative.node_ids;
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(Errc::MalformedRecord, std::string("pair record: ") + e.what());
  }
}

}  // namespace cmv::pairing
