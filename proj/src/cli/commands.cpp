#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "cmv/cli.hpp"
#include "cmv/corpus.hpp"
#include "cmv/dynamics.hpp"
#include "cmv/error.hpp"
#include "cmv/features.hpp"
#include "cmv/lexicon.hpp"
#include "cmv/models.hpp"
#include "cmv/pairing.hpp"
#include "cmv/util.hpp"

namespace cmv::cli {

using nlohmann::json;
using nlohmann::ordered_json;
using corpus::DiscussionTree;
using features::FeatureMatrix;
using pairing::Split;
using pairing::Variant;

namespace {

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

pairing::SplitConfig split_config(const RunConfig& cfg) {
  return {parse_date_utc(cfg.train_begin), parse_date_utc(cfg.boundary), parse_date_utc(cfg.heldout_end)};
}

corpus::ParseOptions parse_options(const RunConfig& cfg) {
  corpus::ParseOptions o;
  if (!cfg.edit_pattern.empty()) o.edit_pattern = cfg.edit_pattern;
  return o;
}

std::string edit_pattern(const RunConfig& cfg) {
  return cfg.edit_pattern.empty() ? std::string(corpus::TextNormalizer::kDefaultEditPattern) : cfg.edit_pattern;
}

std::string with_hash(std::string_view json_line, const std::string& hash) {
  return "{\"config_hash\":\"" + hash + "\"," + std::string(json_line.substr(1));
}

std::string upstream_stage(std::string_view stage) {
  if (stage == "dynamics" || stage == "pairs") return "ingest";
  if (stage == "features") return "pairs";
  if (stage == "train" || stage == "significance") return "features";
  if (stage == "eval") return "train";
  return "";
}

json settings_for(std::string_view stage, const RunConfig& cfg) {
  if (stage == "ingest") return ingest_settings(cfg);
  if (stage == "dynamics") return dynamics_settings(cfg);
  if (stage == "pairs") return pairs_settings(cfg);
  if (stage == "features") return features_settings(cfg);
  if (stage == "train") return train_settings(cfg);
  if (stage == "eval") return eval_settings(cfg);
  return json::object();
}

/// Recorded hash of `stage` after checking that it was computed from the
/// current upstream artifacts under the current configuration.
std::string verified(const Workspace& ws, const RunConfig& cfg, std::string_view stage) {
  const auto recorded = ws.stage_hash(stage);
  const auto up = upstream_stage(stage);
  const std::string up_hash = up.empty() ? std::string() : verified(ws, cfg, up);
  if (ws.stage_upstream(stage) != up_hash) {
    throw Error(Errc::StaleArtifact, "'" + std::string(stage) + "' artifacts predate the current '" + up +
                                         "' artifacts; rerun " + std::string(stage));
  }
  // Ingest can only be rechecked when the inputs are at hand.
  if (stage == "ingest" && cfg.inputs.empty()) return recorded;
  if (cmv::cli::stage_hash(stage, settings_for(stage, cfg), up_hash) != recorded) {
    throw Error(Errc::StaleArtifact, "'" + std::string(stage) + "' artifacts were produced with a different "
                                         "configuration; rerun " + std::string(stage));
  }
  return recorded;
}

std::vector<std::string> lines_of(const std::string& body) {
  std::vector<std::string> out;
  for (const auto l : split_lines(body)) {
    if (!trim(l).empty()) out.emplace_back(l);
  }
  return out;
}

std::vector<DiscussionTree> load_corpus(const Workspace& ws, const RunConfig& cfg, const std::string& hash) {
  const auto lines = lines_of(ws.read_checked("corpus.jsonl", hash));
  auto result = corpus::parse_corpus_lines(lines, corpus::InputFormat::Normalized, parse_options(cfg));
  if (result.malformed > 0 || result.deleted_author > 0) {
    throw Error(Errc::MalformedRecord, "workspace corpus.jsonl has invalid records; rerun ingest");
  }
  return std::move(result.trees);
}

std::vector<pairing::ArgumentPair> load_pairs(const Workspace& ws, const std::string& hash) {
  std::vector<pairing::ArgumentPair> out;
  for (const auto& l : lines_of(ws.read_checked("pairs.jsonl", hash))) out.push_back(pairing::pair_from_json(l));
  return out;
}

struct MalleabilityRow {
  std::string tree_id;
  std::string op_author;
  int label = 0;
  Split split = Split::Outside;
};

std::vector<MalleabilityRow> load_malleability(const Workspace& ws, const std::string& hash) {
  std::vector<MalleabilityRow> out;
  const auto lines = lines_of(ws.read_checked("malleability.csv", hash));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = parse_csv_line(lines[i]);
    if (f.size() != 4) throw Error(Errc::MalformedRecord, "malleability.csv line " + std::to_string(i + 2));
    out.push_back({f[0], f[1], f[2] == "1" ? 1 : 0, pairing::parse_split(f[3])});
  }
  return out;
}

FeatureMatrix load_matrix(const Workspace& ws, const std::string& rel, const std::string& hash) {
  return features::matrix_from_csv(ws.read_checked(rel, hash));
}

std::vector<Variant> selected_variants(const RunConfig& cfg) {
  if (cfg.variant.empty()) return {pairing::kVariants.begin(), pairing::kVariants.end()};
  return {pairing::parse_variant(cfg.variant)};
}

bool task_selected(const RunConfig& cfg, std::string_view task) { return cfg.task.empty() || cfg.task == task; }

std::string pair_features_file(Variant v) { return "features/pair_" + std::string(pairing::variant_name(v)) + ".csv"; }

std::string pair_model_file(Variant v, std::string_view set) {
  return "models/pair_" + std::string(pairing::variant_name(v)) + "_" + std::string(set) + ".json";
}

std::string malleability_model_file(std::string_view set) {
  return "models/malleability_" + std::string(set) + ".json";
}

std::string dump(const ordered_json& j) { return j.dump(1) + "\n"; }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

/// Columns of `m` named in `names`, in that order.
models::SparseRows select_named(const FeatureMatrix& m, std::span<const std::string> names) {
  std::map<std::string, std::size_t> want;
  for (std::size_t k = 0; k < names.size(); ++k) want[names[k]] = k;
  std::vector<long> remap(m.names.size(), -1);
  std::size_t found = 0;
  for (std::size_t j = 0; j < m.names.size(); ++j) {
    const auto it = want.find(m.names[j]);
    if (it != want.end()) {
      remap[j] = static_cast<long>(it->second);
      ++found;
    }
  }
  if (found != names.size()) {
    throw Error(Errc::StaleArtifact, "feature matrix lacks columns the model was trained on; retrain");
  }
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index r = 0; r < m.values.outerSize(); ++r) {
    for (features::SparseRows::InnerIterator it(m.values, r); it; ++it) {
      const auto c = remap[static_cast<std::size_t>(it.col())];
      if (c >= 0) t.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
    }
  }
  models::SparseRows out(m.values.rows(), static_cast<Eigen::Index>(names.size()));
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

struct PairMatrices {
  FeatureMatrix positive;
  FeatureMatrix negative;
  FeatureMatrix diff;
};

PairMatrices split_pair_rows(const FeatureMatrix& m, std::size_t n_pairs) {
  if (m.rows() != 2 * n_pairs) {
    throw Error(Errc::StaleArtifact, "pair feature matrix has " + std::to_string(m.rows()) + " rows for " +
                                         std::to_string(n_pairs) + " pairs; rerun features");
  }
  std::vector<std::size_t> even, odd;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    even.push_back(2 * i);
    odd.push_back(2 * i + 1);
  }
  PairMatrices p{m.select_rows(even), m.select_rows(odd), {}};
  p.diff.names = m.names;
  for (std::size_t i = 0; i < n_pairs; ++i) p.diff.row_ids.push_back(std::to_string(i));
  p.diff.values = p.positive.values - p.negative.values;
  return p;
}

std::vector<std::size_t> rows_in_split(std::span<const Split> splits, Split s) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (splits[i] == s) out.push_back(i);
  }
  return out;
}

Eigen::MatrixXd dense_of(const FeatureMatrix& m) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (Eigen::Index r = 0; r < m.values.outerSize(); ++r) {
    for (features::SparseRows::InnerIterator it(m.values, r); it; ++it) d(r, it.col()) = it.value();
  }
  return d;
}

std::unique_ptr<features::PosTagger> make_tagger(const RunConfig& cfg, std::vector<std::string>& notes) {
  if (!cfg.pos_sidecar.empty()) {
    return std::make_unique<features::SidecarTagger>(features::SidecarTagger::load(cfg.pos_sidecar));
  }
  const auto lex = std::filesystem::path(cfg.lexicons) / "pos" / "lexicon.tsv";
  if (std::filesystem::exists(lex)) {
    return std::make_unique<features::LexicalTagger>(features::LexicalTagger::load(lex.string()));
  }
  notes.push_back("no POS tagger available; pos.* features disabled");
  return nullptr;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

ordered_json corpus_stats(std::span<const DiscussionTree* const> trees) {
  std::set<std::string> ops, participants;
  std::size_t nodes = 0;
  for (const auto* t : trees) {
    ops.insert(t->op_author());
    participants.insert(t->op_author());
    nodes += t->nodes().size();
    for (const auto& n : t->nodes()) {
      if (n.author != corpus::kDeletedAuthor && !n.is_deltabot) participants.insert(n.author);
    }
  }
  ordered_json j;
  j["trees"] = trees.size();
  j["nodes"] = nodes;
  j["ops"] = ops.size();
  j["participants"] = participants.size();
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

void cmd_ingest(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.inputs.empty()) throw Error(Errc::InvalidConfig, "ingest needs at least one --input file");
  Workspace ws(cfg.out);
  const auto format = cfg.input_format == "cmv_dump" ? corpus::InputFormat::CmvDump : corpus::InputFormat::Normalized;
  const auto hash = cmv::cli::stage_hash("ingest", ingest_settings(cfg), "");

  std::vector<DiscussionTree> trees;
  std::set<std::string> seen;
  ordered_json diags = ordered_json::array();
  std::size_t lines = 0, deleted = 0, malformed = 0, orphans = 0, duplicates = 0;
  for (const auto& path : cfg.inputs) {
    auto r = corpus::read_corpus(path, format, parse_options(cfg));
    lines += r.lines;
    deleted += r.deleted_author;
    malformed += r.malformed;
    orphans += r.orphans;
    for (const auto& d : r.diagnostics) {
      diags.push_back(ordered_json{{"file", path}, {"line", d.line}, {"kind", d.kind}, {"message", d.message}});
    }
    for (auto& t : r.trees) {
      if (!seen.insert(t.id()).second) {
        ++duplicates;
        diags.push_back(ordered_json{{"file", path}, {"line", 0}, {"kind", "MalformedRecord"},
                                     {"message", "duplicate tree id " + t.id() + " across inputs"}});
        continue;
      }
      trees.push_back(std::move(t));
    }
  }
  std::sort(trees.begin(), trees.end(), [](const auto& a, const auto& b) { return a.id() < b.id(); });

  std::string body;
  for (const auto& t : trees) body += with_hash(corpus::record_to_json(corpus::to_record(t)), hash) + "\n";
  ws.write("corpus.jsonl", body, hash);
  ws.write("awards.csv", corpus::awards_csv(trees), hash);

  const auto split = split_config(cfg);
  std::map<std::string, std::vector<const DiscussionTree*>> by_split;
  std::vector<const DiscussionTree*> all;
  std::map<std::string, std::pair<std::size_t, std::size_t>> monthly;
  for (const auto& t : trees) {
    all.push_back(&t);
    by_split[std::string(pairing::split_name(pairing::split_of(t.created_utc(), split)))].push_back(&t);
    ++monthly[year_month(t.created_utc())].first;
    for (const auto& n : t.nodes()) ++monthly[year_month(n.created_utc)].second;
  }
  ordered_json report;
  report["config_hash"] = hash;
  report["input_lines"] = lines;
  ordered_json excluded;
  excluded["deleted_author"] = deleted;
  excluded["malformed"] = malformed;
  excluded["duplicate"] = duplicates;
  report["excluded"] = excluded;
  report["orphans_dropped"] = orphans;
  report["total"] = corpus_stats(all);
  ordered_json splits;
  for (const char* s : {"train", "heldout", "none"}) splits[s] = corpus_stats(by_split[s]);
  report["splits"] = splits;
  ordered_json months = ordered_json::array();
  for (const auto& [m, c] : monthly) months.push_back(ordered_json{{"month", m}, {"trees", c.first}, {"comments", c.second}});
  report["monthly"] = months;
  report["diagnostics"] = diags;
  ws.write("ingest_report.json", dump(report), hash);
  ws.record("ingest", hash, "", {"corpus.jsonl", "awards.csv", "ingest_report.json"});
  std::cout << "ingest: " << trees.size() << " trees (" << deleted << " deleted-OP, " << malformed
            << " malformed, " << duplicates << " duplicate records skipped)\n";
}

// ---------------------------------------------------------------------------
// dynamics
// ---------------------------------------------------------------------------

void cmd_dynamics(const RunConfig& cfg) {
  cfg.validate();
  Workspace ws(cfg.out);
  const auto up = verified(ws, cfg, "ingest");
  const auto hash = cmv::cli::stage_hash("dynamics", dynamics_settings(cfg), up);
  const auto trees = load_corpus(ws, cfg, up);
  const auto split = split_config(cfg);
  std::vector<const DiscussionTree*> all, period, filtered;
  const corpus::CorpusFilter filter;
  for (const auto& t : trees) {
    all.push_back(&t);
    if (pairing::split_of(t.created_utc(), split) != Split::Train) continue;
    period.push_back(&t);
    if (corpus::passes_filter(t, filter)) filtered.push_back(&t);
  }
  using namespace dynamics;
  ws.write("fig4a.csv", rates_csv(entry_order_table(filtered)), hash);
  ws.write("fig4a_first_time.csv", rates_csv(entry_order_table(filtered, {10, 0, true}, all)), hash);
  ws.write("fig4b.csv", rates_csv(back_and_forth_table(filtered)), hash);
  ws.write("fig5a.csv", rates_csv(conversion_by_challengers(filtered)), hash);
  ws.write("fig5b.csv", subtree_csv(subtree_comparison(filtered)), hash);
  const auto exp = experience_tables(period);
  ws.write("fig10a.csv", rates_csv(exp.by_attempts), hash);
  ws.write("fig10b.csv", rates_csv(exp.by_quarter), hash);
  ws.record("dynamics", hash, up,
            {"fig4a.csv", "fig4a_first_time.csv", "fig4b.csv", "fig5a.csv", "fig5b.csv", "fig10a.csv", "fig10b.csv"});
  std::cout << "dynamics: " << filtered.size() << " filtered training-period trees, " << period.size()
            << " in the training period\n";
}

// ---------------------------------------------------------------------------
// pairs
// ---------------------------------------------------------------------------

void cmd_pairs(const RunConfig& cfg) {
  cfg.validate();
  Workspace ws(cfg.out);
  const auto up = verified(ws, cfg, "ingest");
  const auto hash = cmv::cli::stage_hash("pairs", pairs_settings(cfg), up);
  const auto trees = load_corpus(ws, cfg, up);
  const auto stop = lexicon::load_lexicon(std::filesystem::path(cfg.lexicons) / "lexicons" / "stopwords.txt",
                                          "stopwords");
  pairing::PairConfig pc;
  pc.min_unique_challengers = cfg.min_unique_challengers;
  pc.min_words = cfg.min_words;
  pc.min_negatives = cfg.min_negatives;
  pc.edit_pattern = edit_pattern(cfg);
  const auto split = split_config(cfg);
  pairing::PairDiagnostics diag;
  const auto pairs = pairing::build_pairs(trees, stop, pc, split, &diag);

  std::string body;
  std::map<std::string, std::size_t> pair_counts;
  for (const auto& p : pairs) {
    body += with_hash(pairing::pair_to_json(p), hash) + "\n";
    ++pair_counts[std::string(pairing::split_name(p.split))];
  }
  ws.write("pairs.jsonl", body, hash);

  const auto mall = pairing::build_malleability(trees, split);
  std::ostringstream csv;
  csv << "tree_id,op_author,label,split\n";
  std::map<std::string, std::pair<std::size_t, std::size_t>> mall_counts;
  for (const auto& m : mall) {
    csv << csv_escape(m.tree_id) << ',' << csv_escape(m.op_author) << ',' << (m.label ? 1 : 0) << ','
        << pairing::split_name(m.split) << '\n';
    auto& c = mall_counts[std::string(pairing::split_name(m.split))];
    ++c.first;
    c.second += m.label ? 1 : 0;
  }
  ws.write("malleability.csv", csv.str(), hash);

  ordered_json report;
  report["config_hash"] = hash;
  ordered_json pj;
  for (const char* s : {"train", "heldout"}) pj[s] = pair_counts[s];
  report["pairs"] = pj;
  ordered_json d;
  d["trees_considered"] = diag.trees_considered;
  d["trees_outside_split"] = diag.trees_outside_split;
  d["trees_few_challengers"] = diag.trees_few_challengers;
  d["trees_few_negatives"] = diag.trees_few_negatives;
  d["winners_short"] = diag.winners_short;
  d["winners_no_candidate"] = diag.winners_no_candidate;
  d["messages"] = diag.messages;
  report["pair_diagnostics"] = d;
  ordered_json mj;
  for (const char* s : {"train", "heldout"}) {
    const auto [n, pos] = mall_counts[s];
    mj[s] = ordered_json{{"instances", n},
                         {"malleable", pos},
                         {"delta_rate", n ? json(static_cast<double>(pos) / static_cast<double>(n)) : json()}};
  }
  report["malleability"] = mj;
  ws.write("pairs_report.json", dump(report), hash);
  ws.record("pairs", hash, up, {"pairs.jsonl", "malleability.csv", "pairs_report.json"});
  std::cout << "pairs: " << pair_counts["train"] << " train / " << pair_counts["heldout"] << " heldout pairs; "
            << mall_counts["train"].first << " train / " << mall_counts["heldout"].first
            << " heldout malleability instances\n";
}

// ---------------------------------------------------------------------------
// features
// ---------------------------------------------------------------------------

void cmd_features(const RunConfig& cfg) {
  cfg.validate();
  Workspace ws(cfg.out);
  const auto up = verified(ws, cfg, "pairs");
  const auto hash = cmv::cli::stage_hash("features", features_settings(cfg), up);
  const auto corpus_hash = ws.stage_hash("ingest");
  const auto pairs = load_pairs(ws, up);
  const auto mall = load_malleability(ws, up);
  const auto trees = load_corpus(ws, cfg, corpus_hash);

  auto res = lexicon::load_resources(cfg.lexicons);
  std::vector<std::string> notes = res.diagnostics;
  const auto tagger = make_tagger(cfg, notes);

  std::map<std::string, const DiscussionTree*> tree_by_id;
  for (const auto& t : trees) tree_by_id[t.id()] = &t;
  const corpus::TextNormalizer normalizer;
  std::vector<features::Document> op_docs;
  op_docs.reserve(mall.size());
  for (const auto& m : mall) {
    const auto it = tree_by_id.find(m.tree_id);
    if (it == tree_by_id.end()) throw Error(Errc::StaleArtifact, "malleability tree " + m.tree_id + " not in corpus");
    op_docs.push_back(pairing::op_document(*it->second, normalizer));
  }

  if (res.embeddings) {
    std::set<std::string> vocab;
    auto add = [&](const features::Document& d) {
      for (const auto& w : features::analyze(d, res.stopwords).words) vocab.insert(w);
    };
    for (const auto& p : pairs) {
      add(p.op);
      for (const auto v : pairing::kVariants) {
        add(p.variant(v).first.doc);
        add(p.variant(v).second.doc);
      }
    }
    for (const auto& d : op_docs) add(d);
    const std::vector<std::string> words(vocab.begin(), vocab.end());
    lexicon::extrapolate_resources(res, words);
  }

  features::ExtractionConfig ec;
  ec.min_term_count = cfg.min_term_count;
  std::vector<std::string> artifacts;
  ordered_json report;
  report["config_hash"] = hash;

  ordered_json pair_info;
  for (const auto v : pairing::kVariants) {
    const bool truncated = v == Variant::RootTruncated;
    std::vector<features::Analyzed> pos, neg, ops;
    pos.reserve(pairs.size());
    neg.reserve(pairs.size());
    ops.reserve(pairs.size());
    std::vector<std::vector<std::string>> bow_docs, pos_docs;
    for (const auto& p : pairs) {
      pos.push_back(features::analyze(p.variant(v).first.doc, res.stopwords));
      neg.push_back(features::analyze(p.variant(v).second.doc, res.stopwords));
      ops.push_back(features::analyze(p.op, res.stopwords));
      if (p.split != Split::Train) continue;
      bow_docs.push_back(pos.back().words);
      bow_docs.push_back(neg.back().words);
      if (tagger) {
        pos_docs.push_back(tagger->tag(pos.back().words, p.variant(v).first.node_ids));
        pos_docs.push_back(tagger->tag(neg.back().words, p.variant(v).second.node_ids));
      }
    }
    features::Extractor ex(res, ec, truncated, true, features::Vocabulary::build(bow_docs, cfg.min_term_count),
                           features::Vocabulary::build(pos_docs, cfg.min_term_count), tagger.get());
    auto names = ex.columns();
    const auto order_col = names.size();
    names.push_back("order.entry_rank");
    features::MatrixBuilder b(names);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& p = pairs[i];
      const auto base = p.tree_id + ":" + p.positive.root_reply_id + ":" + p.negative.root_reply_id;
      ex.extract(b, 2 * i, pos[i], &ops[i], p.variant(v).first.node_ids);
      ex.extract(b, 2 * i + 1, neg[i], &ops[i], p.variant(v).second.node_ids);
      const double rp = static_cast<double>(p.positive.entry_rank), rn = static_cast<double>(p.negative.entry_rank);
      b.add_dense(2 * i, order_col, std::span<const double>(&rp, 1));
      b.add_dense(2 * i + 1, order_col, std::span<const double>(&rn, 1));
      ids.push_back(base + ":pos");
      ids.push_back(base + ":neg");
    }
    const auto m = b.finish(ids);
    const auto rel = pair_features_file(v);
    ws.write(rel, features::matrix_to_csv(m, "id"), hash);
    artifacts.push_back(rel);
    pair_info[std::string(pairing::variant_name(v))] =
        ordered_json{{"rows", m.rows()}, {"columns", m.cols()}, {"bow_terms", ex.bow_vocab().size()},
                     {"pos_tags", ex.pos_vocab().size()}};
  }
  report["pairs"] = pair_info;

  {
    std::vector<features::Analyzed> docs;
    docs.reserve(op_docs.size());
    std::vector<std::vector<std::string>> bow_docs, pos_docs;
    for (std::size_t i = 0; i < op_docs.size(); ++i) {
      docs.push_back(features::analyze(op_docs[i], res.stopwords));
      if (mall[i].split != Split::Train) continue;
      bow_docs.push_back(docs.back().words);
      if (tagger) pos_docs.push_back(tagger->tag(docs.back().words, std::vector<std::string>{mall[i].tree_id}));
    }
    features::ExtractionConfig mc = ec;
    mc.families = {features::Family::Style, features::Family::Quarters, features::Family::Bow, features::Family::Pos};
    features::Extractor ex(res, mc, false, false, features::Vocabulary::build(bow_docs, cfg.min_term_count),
                           features::Vocabulary::build(pos_docs, cfg.min_term_count), tagger.get());
    features::MatrixBuilder b(ex.columns());
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      ex.extract(b, i, docs[i], nullptr, std::vector<std::string>{mall[i].tree_id});
      ids.push_back(mall[i].tree_id);
    }
    const auto m = b.finish(ids);
    ws.write("features/malleability.csv", features::matrix_to_csv(m, "tree_id"), hash);
    artifacts.push_back("features/malleability.csv");
    report["malleability"] = ordered_json{{"rows", m.rows()}, {"columns", m.cols()},
                                          {"bow_terms", ex.bow_vocab().size()}, {"pos_tags", ex.pos_vocab().size()}};
  }

  ordered_json norms;
  for (const auto d : lexicon::kDimensions) {
    const auto* t = res.norm(d);
    norms[std::string(lexicon::dimension_name(d))] =
        t ? ordered_json{{"words", t->size()}, {"native", t->native_count()}, {"clamped", t->clamped()}}
          : ordered_json();
  }
  report["norms"] = norms;
  report["tagger"] = tagger ? tagger->name() : "none";
  std::vector<std::string> all_notes = res.diagnostics;
  for (const auto& n : notes) {
    if (std::find(all_notes.begin(), all_notes.end(), n) == all_notes.end()) all_notes.push_back(n);
  }
  report["notes"] = all_notes;
  ws.write("features/report.json", dump(report), hash);
  artifacts.push_back("features/report.json");
  ws.record("features", hash, up, artifacts);
  std::cout << "features: " << pairs.size() << " pairs x 3 variants, " << mall.size() << " original posts\n";
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

namespace {

ordered_json cv_json(std::span<const models::CvPoint> cv) {
  ordered_json a = ordered_json::array();
  for (const auto& p : cv) {
    a.push_back(ordered_json{{"penalty", std::string(models::penalty_name(p.penalty))},
                             {"lambda", p.lambda},
                             {"score", number_or_null(p.score)}});
  }
  return a;
}

double best_cv(std::span<const models::CvPoint> cv, const models::LogRegModel& m) {
  for (const auto& p : cv) {
    if (p.penalty == m.penalty && p.lambda == m.lambda) return p.score;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void cmd_train(const RunConfig& cfg) {
  cfg.validate();
  const auto seed = cfg.require_seed();
  Workspace ws(cfg.out);
  const auto up = verified(ws, cfg, "features");
  const auto pairs_hash = ws.stage_hash("pairs");
  const auto hash = cmv::cli::stage_hash("train", train_settings(cfg), up);
  std::vector<std::string> artifacts;
  ordered_json index = ordered_json::array();

  if (task_selected(cfg, "pair")) {
    const auto pairs = load_pairs(ws, pairs_hash);
    std::vector<Split> splits;
    for (const auto& p : pairs) splits.push_back(p.split);
    const auto train_rows = rows_in_split(splits, Split::Train);
    std::vector<std::string> groups;
    for (auto i : train_rows) groups.push_back(pairs[i].op_author);
    models::PairTrainConfig pc;
    pc.lambdas = cfg.lambdas;
    pc.folds = cfg.folds;
    pc.seed = seed;
    for (const auto v : selected_variants(cfg)) {
      const auto m = load_matrix(ws, pair_features_file(v), up);
      const auto pm = split_pair_rows(m, pairs.size());
      const auto train = pm.diff.select_rows(train_rows);
      for (const auto& set : cfg.pair_feature_sets) {
        const auto sel = train.select_prefixes(feature_set_prefixes(set, true));
        const auto rel = pair_model_file(v, set);
        if (sel.cols() == 0) {
          index.push_back(ordered_json{{"file", rel}, {"skipped", "no columns in feature set"}});
          continue;
        }
        const auto trained = models::train_pair_model(sel.values, groups, sel.names, pc);
        ordered_json extra;
        extra["task"] = "pair";
        extra["variant"] = std::string(pairing::variant_name(v));
        extra["feature_set"] = set;
        extra["train_pairs"] = train_rows.size();
        extra["cv_metric"] = "symmetric_pairwise_accuracy";
        extra["cv_score"] = number_or_null(best_cv(trained.cv, trained.model));
        extra["cv"] = cv_json(trained.cv);
        ws.write(rel, models::model_to_json(trained.model, hash, extra.dump()), hash);
        artifacts.push_back(rel);
        index.push_back(ordered_json{{"file", rel}, {"lambda", trained.model.lambda},
                                     {"nonzero", trained.model.nonzero()}});
        std::cout << "train: " << rel << " lambda=" << format_double(trained.model.lambda)
                  << " cv=" << format_double(best_cv(trained.cv, trained.model)) << "\n";
      }
    }
  }

  if (task_selected(cfg, "malleability")) {
    const auto mall = load_malleability(ws, pairs_hash);
    std::vector<Split> splits;
    for (const auto& r : mall) splits.push_back(r.split);
    const auto train_rows = rows_in_split(splits, Split::Train);
    std::vector<std::string> groups;
    std::vector<int> labels;
    for (auto i : train_rows) {
      groups.push_back(mall[i].op_author);
      labels.push_back(mall[i].label);
    }
    models::WeightedTrainConfig wc;
    wc.lambdas = cfg.lambdas;
    wc.penalties.clear();
    for (const auto& p : cfg.penalties) wc.penalties.push_back(models::parse_penalty(p));
    wc.folds = cfg.folds;
    wc.seed = seed;
    const auto m = load_matrix(ws, "features/malleability.csv", up);
    if (m.rows() != mall.size()) throw Error(Errc::StaleArtifact, "malleability features do not match instances");
    const auto train = m.select_rows(train_rows);
    for (const auto& set : cfg.malleability_feature_sets) {
      const auto sel = train.select_prefixes(feature_set_prefixes(set, false));
      const auto rel = malleability_model_file(set);
      if (sel.cols() == 0) {
        index.push_back(ordered_json{{"file", rel}, {"skipped", "no columns in feature set"}});
        continue;
      }
      const auto trained = models::train_weighted_model(sel.values, labels, groups, sel.names, wc);
      ordered_json extra;
      extra["task"] = "malleability";
      extra["feature_set"] = set;
      extra["train_instances"] = train_rows.size();
      extra["cv_metric"] = "auc";
      extra["cv_score"] = number_or_null(best_cv(trained.cv, trained.model));
      extra["cv"] = cv_json(trained.cv);
      ws.write(rel, models::model_to_json(trained.model, hash, extra.dump()), hash);
      artifacts.push_back(rel);
      index.push_back(ordered_json{{"file", rel}, {"penalty", std::string(models::penalty_name(trained.model.penalty))},
                                   {"lambda", trained.model.lambda}, {"nonzero", trained.model.nonzero()}});
      std::cout << "train: " << rel << " " << models::penalty_name(trained.model.penalty)
                << " lambda=" << format_double(trained.model.lambda)
                << " cv_auc=" << format_double(best_cv(trained.cv, trained.model)) << "\n";
    }
  }
  ordered_json idx;
  idx["config_hash"] = hash;
  idx["models"] = index;
  ws.write("models/index.json", dump(idx), hash);
  artifacts.push_back("models/index.json");
  ws.record("train", hash, up, artifacts);
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

namespace {

models::LogRegModel read_model(const Workspace& ws, const std::string& rel, const std::string& hash,
                               ordered_json* training = nullptr) {
  const auto text = ws.read_checked(rel, hash);
  if (training) *training = ordered_json::parse(text).at("training");
  return models::model_from_json(text);
}

bool model_exists(const Workspace& ws, const std::string& rel) { return std::filesystem::exists(ws.path(rel)); }

}  // namespace

void cmd_eval(const RunConfig& cfg) {
  cfg.validate();
  const auto seed = cfg.require_seed();
  Workspace ws(cfg.out);
  const auto up = verified(ws, cfg, "train");
  const auto features_hash = ws.stage_hash("features");
  const auto pairs_hash = ws.stage_hash("pairs");
  const auto hash = cmv::cli::stage_hash("eval", eval_settings(cfg), up);
  std::vector<std::string> artifacts;

  if (task_selected(cfg, "pair")) {
    const auto pairs = load_pairs(ws, pairs_hash);
    std::vector<Split> splits;
    for (const auto& p : pairs) splits.push_back(p.split);
    const auto rows = rows_in_split(splits, Split::Heldout);
    ordered_json fig;
    fig["config_hash"] = hash;
    fig["baseline"] = "n_words";
    fig["test"] = "mcnemar";
    fig["heldout_pairs"] = rows.size();
    ordered_json variants;
    for (const auto v : selected_variants(cfg)) {
      const auto m = load_matrix(ws, pair_features_file(v), features_hash);
      const auto heldout = split_pair_rows(m, pairs.size()).diff.select_rows(rows);
      auto correct_of = [&](const models::LogRegModel& model, Eigen::VectorXd& scores) {
        scores = model.decision(select_named(heldout, model.names));
        std::vector<bool> c;
        for (Eigen::Index i = 0; i < scores.size(); ++i) {
          c.push_back(models::pair_predict(scores(i)) == models::PairOutcome::PositiveWins);
        }
        return c;
      };
      std::optional<std::vector<bool>> baseline;
      if (model_exists(ws, pair_model_file(v, "n_words")) && !rows.empty()) {
        Eigen::VectorXd s;
        baseline = correct_of(read_model(ws, pair_model_file(v, "n_words"), up), s);
      }
      ordered_json sets;
      for (const auto& set : cfg.pair_feature_sets) {
        const auto rel = pair_model_file(v, set);
        if (!model_exists(ws, rel)) continue;
        ordered_json training;
        const auto model = read_model(ws, rel, up, &training);
        ordered_json e;
        e["lambda"] = model.lambda;
        e["nonzero"] = model.nonzero();
        e["cv_accuracy"] = training.at("cv_score");
        if (rows.empty()) {
          e["heldout_accuracy"] = nullptr;
          sets[set] = e;
          continue;
        }
        Eigen::VectorXd scores;
        const auto correct = correct_of(model, scores);
        e["heldout_accuracy"] =
            models::symmetric_accuracy(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())));
        if (baseline) {
          std::size_t b = 0, c = 0;
          for (std::size_t i = 0; i < correct.size(); ++i) {
            b += correct[i] && !(*baseline)[i];
            c += !correct[i] && (*baseline)[i];
          }
          e["mcnemar_b"] = b;
          e["mcnemar_c"] = c;
          e["mcnemar_p"] = models::mcnemar(correct, *baseline);
        }
        sets[set] = e;
      }
      variants[std::string(pairing::variant_name(v))] = sets;
    }
    fig["variants"] = variants;
    ws.write("fig8.json", dump(fig), hash);
    artifacts.push_back("fig8.json");
  }

  if (task_selected(cfg, "malleability")) {
    const auto mall = load_malleability(ws, pairs_hash);
    std::vector<Split> splits;
    for (const auto& r : mall) splits.push_back(r.split);
    const auto rows = rows_in_split(splits, Split::Heldout);
    std::vector<int> labels;
    for (auto i : rows) labels.push_back(mall[i].label);
    const bool both = std::count(labels.begin(), labels.end(), 1) > 0 && std::count(labels.begin(), labels.end(), 0) > 0;
    const auto m = load_matrix(ws, "features/malleability.csv", features_hash).select_rows(rows);
    ordered_json fig;
    fig["config_hash"] = hash;
    fig["baseline"] = "n_words";
    fig["tests"] = ordered_json{{"vs_chance", "bootstrap"}, {"vs_baseline", "permutation"}};
    fig["heldout_instances"] = rows.size();
    std::optional<std::vector<double>> baseline;
    auto scores_of = [&](const models::LogRegModel& model) {
      const auto s = model.decision(select_named(m, model.names));
      return std::vector<double>(s.data(), s.data() + s.size());
    };
    if (both && model_exists(ws, malleability_model_file("n_words"))) {
      baseline = scores_of(read_model(ws, malleability_model_file("n_words"), up));
    }
    const models::Metric auc_metric = [](std::span<const double> s, std::span<const int> l) {
      return models::auc(s, l);
    };
    ordered_json sets;
    for (const auto& set : cfg.malleability_feature_sets) {
      const auto rel = malleability_model_file(set);
      if (!model_exists(ws, rel)) continue;
      ordered_json training;
      const auto model = read_model(ws, rel, up, &training);
      ordered_json e;
      e["penalty"] = std::string(models::penalty_name(model.penalty));
      e["lambda"] = model.lambda;
      e["nonzero"] = model.nonzero();
      e["cv_auc"] = training.at("cv_score");
      if (!both) {
        e["heldout_auc"] = nullptr;
        e["note"] = "heldout split lacks one of the classes";
        sets[set] = e;
        continue;
      }
      const auto s = scores_of(model);
      const auto boot = models::bootstrap_auc_test(s, labels, cfg.bootstraps, seed);
      e["heldout_auc"] = boot.observed;
      e["bootstrap_p"] = boot.p;
      e["bootstrap_valid"] = boot.valid;
      if (baseline) {
        const auto perm = models::permutation_test(s, *baseline, labels, auc_metric, cfg.permutations, seed);
        e["auc_gain_vs_baseline"] = perm.observed;
        e["permutation_p"] = perm.p;
      }
      sets[set] = e;
    }
    fig["feature_sets"] = sets;
    ws.write("fig9.json", dump(fig), hash);
    artifacts.push_back("fig9.json");
  }
  ws.record("eval", hash, up, artifacts);
  std::cout << "eval: wrote";
  for (const auto& a : artifacts) std::cout << ' ' << a;
  std::cout << "\n";
}

// ---------------------------------------------------------------------------
// significance
// ---------------------------------------------------------------------------

void cmd_significance(const RunConfig& cfg) {
  cfg.validate();
  Workspace ws(cfg.out);
  const auto up = verified(ws, cfg, "features");
  const auto pairs_hash = ws.stage_hash("pairs");
  const auto hash = cmv::cli::stage_hash("significance", json::object(), up);
  const auto pairs = load_pairs(ws, pairs_hash);
  std::vector<Split> splits;
  for (const auto& p : pairs) splits.push_back(p.split);
  const auto train_rows = rows_in_split(splits, Split::Train);

  auto paired = [&](Variant v, const std::vector<std::string>& prefixes) {
    const auto m = load_matrix(ws, pair_features_file(v), up);
    const auto pm = split_pair_rows(m, pairs.size());
    const auto p = pm.positive.select_rows(train_rows).select_prefixes(prefixes);
    const auto n = pm.negative.select_rows(train_rows).select_prefixes(prefixes);
    return models::paired_significance(p.names, dense_of(p), dense_of(n));
  };
  const std::vector<std::string> interplay{"interplay."};
  const std::vector<std::string> style{"style.", "quarters."};
  auto t2 = paired(Variant::RootReply, interplay);
  models::annotate_truncated(t2, paired(Variant::RootTruncated, interplay));
  ws.write("table2.csv", models::significance_csv(t2, true), hash);
  auto t3 = paired(Variant::RootReply, style);
  models::annotate_truncated(t3, paired(Variant::RootTruncated, style));
  ws.write("table3.csv", models::significance_csv(t3, true), hash);

  const auto mall = load_malleability(ws, pairs_hash);
  std::vector<Split> msplits;
  for (const auto& r : mall) msplits.push_back(r.split);
  const auto mrows = rows_in_split(msplits, Split::Train);
  std::vector<int> labels;
  for (auto i : mrows) labels.push_back(mall[i].label);
  const auto mm = load_matrix(ws, "features/malleability.csv", up).select_rows(mrows).select_prefixes(style);
  const auto t4 = models::unpaired_significance(mm.names, dense_of(mm), labels);
  ws.write("table4.csv", models::significance_csv(t4, false), hash);
  ws.record("significance", hash, up, {"table2.csv", "table3.csv", "table4.csv"});
  auto count = [](const std::vector<models::SignificanceRow>& rows) {
    return std::count_if(rows.begin(), rows.end(), [](const auto& r) { return r.level > 0; });
  };
  std::cout << "significance: " << count(t2) << " / " << count(t3) << " / " << count(t4)
            << " significant features in tables 2 / 3 / 4\n";
}

void cmd_run(const RunConfig& cfg) {
  cfg.validate();
  cfg.require_seed();
  cmd_ingest(cfg);
  cmd_dynamics(cfg);
  cmd_pairs(cfg);
  cmd_features(cfg);
  cmd_train(cfg);
  cmd_eval(cfg);
  cmd_significance(cfg);
}

int guarded(const std::string& name, void (*cmd)(const RunConfig&), const RunConfig& cfg) {
  try {
    cmd(cfg);
    return kOk;
  } catch (const Error& e) {
    std::cerr << "cmv " << name << ": " << e.what() << "\n";
    return e.code() == Errc::StaleArtifact ? kStale : kValidation;
  } catch (const std::exception& e) {
    std::cerr << "cmv " << name << ": internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace cmv::cli
