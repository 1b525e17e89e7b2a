#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "checks.hpp"
#include "cmv/corpus.hpp"
#include "cmv/features.hpp"
#include "cmv/pairing.hpp"
#include "cmv/util.hpp"

using namespace cmv::pairing;
using cmv::corpus::CommentRecord;
using cmv::corpus::TreeRecord;

namespace {

const cmv::lexicon::Lexicon& stop() {
  static const auto l = cmv::lexicon::parse_lexicon("the\na\nof\n", "stopwords");
  return l;
}

/// `n` words cycling through `vocab`.
std::string text(const std::vector<std::string>& vocab, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + vocab[i % vocab.size()];
  return s;
}

std::vector<std::string> tokens(const std::string& prefix, int from, int to) {
  std::vector<std::string> v;
  for (int k = from; k < to; ++k) v.push_back(prefix + std::string(1, static_cast<char>('a' + k)));
  return v;
}

/// One winning root reply, the given negatives and short filler replies up to
/// ten challengers, followed by a late OP comment.
TreeRecord tree_with(const std::string& winner_text, const std::vector<std::string>& negatives,
                     std::string id = "t1", std::int64_t created = 1400000000) {
  TreeRecord r;
  r.id = id;
  r.author = "op";
  r.title = "CMV: topic";
  r.body = "my view";
  r.created_utc = created;
  std::int64_t t = created;
  auto add = [&](std::string cid, std::string author, std::string body, std::optional<std::string> parent) {
    r.comments.push_back({cid, std::move(author), ++t, std::move(body), std::move(parent)});
  };
  add(id + "w", "winner", winner_text, std::nullopt);
  add(id + "award", "op", "∆ convinced", id + "w");
  for (std::size_t k = 0; k < negatives.size(); ++k) add(id + "n" + std::to_string(k), "neg" + std::to_string(k), negatives[k], std::nullopt);
  for (std::size_t k = negatives.size() + 1; k < 10; ++k) add(id + "f" + std::to_string(k), "fill" + std::to_string(k), "short", std::nullopt);
  add(id + "late", "op", "thanks", id + "n0");
  return r;
}

}  // namespace

TEST_SUITE("pairing") {
  TEST_CASE("the most similar negative is chosen") {
    const auto p = tokens("p", 0, 10);
    const std::vector<std::string> negs{text(tokens("p", 0, 2), 60), text(tokens("p", 0, 5), 60),
                                        text(tokens("p", 0, 4), 60)};
    const auto tree = cmv::corpus::parse_tree(tree_with(text(p, 60), negs));
    const auto pairs = build_tree_pairs(tree, stop());
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].negative.root_reply_id == "t1n1");
    CHECK(pairs[0].jaccard_score == 0.5);
    CHECK(pairs[0].positive.author == "winner");
  }

  TEST_CASE("ties go to the earliest negative") {
    const auto p = tokens("p", 0, 10);
    const std::vector<std::string> negs{text(tokens("p", 0, 1), 60), text(tokens("p", 0, 5), 60),
                                        text(tokens("p", 5, 10), 60)};
    const auto pairs = build_tree_pairs(cmv::corpus::parse_tree(tree_with(text(p, 60), negs)), stop());
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].negative.root_reply_id == "t1n1");
  }

  TEST_CASE("too few negatives or a short winner give no pair") {
    const auto p = tokens("p", 0, 10);
    const std::vector<std::string> two{text(p, 60), text(p, 60)};
    CHECK(build_tree_pairs(cmv::corpus::parse_tree(tree_with(text(p, 60), two)), stop()).empty());
    const std::vector<std::string> three{text(p, 60), text(p, 60), text(p, 60)};
    PairDiagnostics d;
    CHECK(build_tree_pairs(cmv::corpus::parse_tree(tree_with(text(p, 49), three)), stop(), {}, &d).empty());
    CHECK(d.winners_short == 1);
    CHECK(build_tree_pairs(cmv::corpus::parse_tree(tree_with(text(p, 50), three)), stop()).size() == 1);
  }

  TEST_CASE("negatives need at least fifty words") {
    const auto p = tokens("p", 0, 10);
    const std::vector<std::string> negs{text(p, 60), text(p, 60), text(p, 49)};
    CHECK(build_tree_pairs(cmv::corpus::parse_tree(tree_with(text(p, 60), negs)), stop()).empty());
  }

  TEST_CASE("root truncation") {
    ArgumentPair pair;
    pair.texts[0].first.doc = cmv::features::make_document(text({"alpha", "beta"}, 120));
    pair.texts[0].second.doc = cmv::features::make_document(text({"gamma"}, 80));
    truncate_pair(pair);
    const auto& [a, b] = pair.variant(Variant::RootTruncated);
    CHECK(cmv::features::count_words(a.doc.clean) == 80);
    CHECK(cmv::features::count_words(b.doc.clean) == 80);
    CHECK(b.doc.clean == pair.texts[0].second.doc.clean);
    CHECK(a.doc.truncated);
    CHECK(pair.texts[0].first.doc.clean.starts_with(a.doc.clean));

    ArgumentPair same;
    same.texts[0].first.doc = cmv::features::make_document(text({"x"}, 60));
    same.texts[0].second.doc = cmv::features::make_document(text({"y"}, 60));
    truncate_pair(same);
    CHECK(same.variant(Variant::RootTruncated).first.doc.clean == same.texts[0].first.doc.clean);
  }

  TEST_CASE("split boundaries") {
    CHECK(split_of(cmv::parse_date_utc("2015-05-07") + 86399) == Split::Train);
    CHECK(split_of(cmv::parse_date_utc("2015-05-08")) == Split::Heldout);
    CHECK(split_of(cmv::parse_date_utc("2012-12-31")) == Split::Outside);
    CHECK(split_of(cmv::parse_date_utc("2015-09-02")) == Split::Outside);
    CHECK(parse_variant("root-truncated") == Variant::RootTruncated);
  }

  TEST_CASE("malleability labels and filter") {
    const auto p = tokens("p", 0, 10);
    const std::vector<std::string> negs{text(p, 60), text(p, 60), text(p, 60)};
    auto with_delta = tree_with(text(p, 60), negs, "t1");
    auto changed = tree_with(text(p, 60), negs, "t2");
    changed.body = "I have changed before";
    auto no_delta = tree_with(text(p, 60), negs, "t3");
    no_delta.comments[1].body = "no marker";
    std::vector<cmv::corpus::DiscussionTree> trees;
    for (const auto& r : {with_delta, changed, no_delta}) trees.push_back(cmv::corpus::parse_tree(r));
    const auto inst = build_malleability(trees);
    REQUIRE(inst.size() == 2);
    CHECK(inst[0].tree_id == "t1");
    CHECK(inst[0].label);
    CHECK(inst[1].tree_id == "t3");
    CHECK_FALSE(inst[1].label);
  }

  TEST_CASE("fixture pairs: determinism and invariants") {
    auto trees = cmv::corpus::read_corpus(checks::fixture_path(), cmv::corpus::InputFormat::Normalized).trees;
    const auto stopwords =
        cmv::lexicon::load_lexicon(checks::resources_path() + "/lexicons/stopwords.txt", "stopwords");
    const auto pairs = build_pairs(trees, stopwords);
    REQUIRE_FALSE(pairs.empty());
    std::mt19937_64 rng(5);
    std::shuffle(trees.begin(), trees.end(), rng);
    const auto again = build_pairs(trees, stopwords);
    REQUIRE(again.size() == pairs.size());
    std::set<std::vector<std::string>> positives;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      CHECK(pair_to_json(pairs[i]) == pair_to_json(again[i]));
      CHECK(positives.insert(pairs[i].positive.node_ids).second);
      const auto& rr = pairs[i].variant(Variant::RootReply);
      const double j = cmv::features::jaccard(matching_words(rr.first.doc.clean, stopwords),
                                              matching_words(rr.second.doc.clean, stopwords));
      CHECK(j == pairs[i].jaccard_score);
      const auto& tr = pairs[i].variant(Variant::RootTruncated);
      CHECK(cmv::features::count_words(tr.first.doc.clean) == cmv::features::count_words(tr.second.doc.clean));
    }
    const auto back = pair_from_json(pair_to_json(pairs[0]));
    CHECK(pair_to_json(back) == pair_to_json(pairs[0]));
  }

  TEST_CASE("pair selection matches the oracle") {
    const auto c = checks::pairs_oracle();
    INFO(c.detail);
    CHECK(c.ok);
  }
}
