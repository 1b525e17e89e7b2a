#include <doctest.h>

#include <algorithm>
#include <set>

#include "cmv/corpus.hpp"
#include "cmv/error.hpp"
#include "cmv/pairing.hpp"

using namespace cmv::corpus;

namespace {

CommentRecord comment(std::string id, std::string author, std::int64_t t, std::optional<std::string> parent,
                      std::string body = "text") {
  return {std::move(id), std::move(author), t, std::move(body), std::move(parent)};
}

TreeRecord record(std::vector<CommentRecord> comments, std::string op = "op", std::string body = "view") {
  TreeRecord r;
  r.id = "t1";
  r.title = "CMV: title";
  r.author = std::move(op);
  r.body = std::move(body);
  r.created_utc = 1400000000;
  r.comments = std::move(comments);
  return r;
}

/// The discussion in the introductory figure: A.1 wins a delta at A.2 (confirmed
/// by A.3) and the thread continues below; B.1 starts a long exchange with
/// the OP and receives one reply from a third user.
TreeRecord figure_one() {
  std::vector<CommentRecord> c;
  c.push_back(comment("B1", "orange", 10, std::nullopt));
  c.push_back(comment("A1", "green", 20, std::nullopt));
  std::string parent = "B1";
  for (int k = 2; k <= 11; ++k) {
    const std::string id = "B" + std::to_string(k);
    c.push_back(comment(id, k % 2 == 0 ? "op" : "orange", 20 + k, parent));
    parent = id;
  }
  c.push_back(comment("B12", "purple", 40, "B1"));
  c.push_back(comment("A2", "op", 50, "A1", "∆ you changed my view"));
  c.push_back(comment("A3", "DeltaBot", 51, "A2", "Confirmed: 1 delta awarded to /u/green"));
  c.push_back(comment("A4", "green", 60, "A2"));
  c.push_back(comment("A5", "op", 70, "A4"));
  return record(c);
}

std::vector<std::string> ids(const DiscussionTree& t, const Path& p) { return node_ids(t, p); }

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("record with a root and two children") {
    const auto t = parse_tree(record({comment("c1", "u1", 1, std::nullopt), comment("c2", "u2", 2, std::nullopt)}));
    CHECK(t.nodes().size() == 2);
    CHECK(t.root_replies().size() == 2);
    CHECK_FALSE(t.parent(0).has_value());
    CHECK_FALSE(t.parent(1).has_value());
  }

  TEST_CASE("deleted original poster is rejected") {
    try {
      parse_tree(record({}, "[deleted]"));
      FAIL("expected DeletedAuthor");
    } catch (const cmv::Error& e) {
      CHECK(e.code() == cmv::Errc::DeletedAuthor);
    }
  }

  TEST_CASE("unknown parent makes an orphan") {
    const auto t = parse_tree(record({comment("c1", "u1", 1, std::nullopt), comment("c2", "u2", 2, "nowhere")}));
    CHECK(t.orphan_count() == 1);
    CHECK(t.nodes().size() == 1);
    CHECK_FALSE(t.index_of("c2").has_value());
  }

  TEST_CASE("normalization rules") {
    CHECK(normalize_text("I agree.\nEDIT: typo fix") == "I agree.");
    CHECK(normalize_text("> you said X\nNo.") == "⟦QUOTE⟧\nNo.");
    CHECK(normalize_text("see http://a.com/b") == "see ⟦URL⟧");
    const auto d = TextNormalizer().normalize_detailed("a www.x.org/p and https://y.edu/q.pdf");
    REQUIRE(d.urls.size() == 2);
    CHECK(d.urls[1] == "https://y.edu/q.pdf");
  }

  TEST_CASE("delta attribution") {
    SUBCASE("OP reply with a marker awards the parent's author") {
      const auto t = parse_tree(record({comment("c", "alice", 1, std::nullopt), comment("d", "op", 2, "c", "∆ good point")}));
      REQUIRE(t.delta_awards().size() == 1);
      CHECK(t.delta_awards()[0].awarded_to_author == "alice");
      CHECK(t.author_won_delta("alice"));
    }
    SUBCASE("non-OP marker is ignored") {
      const auto t = parse_tree(record({comment("c", "alice", 1, std::nullopt), comment("d", "bob", 2, "c", "∆ agreed")}));
      CHECK(t.delta_awards().empty());
    }
    SUBCASE("marker in the original post is ignored") {
      const auto t = parse_tree(record({comment("c", "alice", 1, std::nullopt)}, "op", "∆ in my post"));
      CHECK(t.delta_awards().empty());
    }
    SUBCASE("quoted marker is ignored and markers are case-insensitive") {
      const auto quoted = parse_tree(record({comment("c", "alice", 1, std::nullopt), comment("d", "op", 2, "c", "> ∆\nno")}));
      CHECK(quoted.delta_awards().empty());
      const auto bang = parse_tree(record({comment("c", "alice", 1, std::nullopt), comment("d", "op", 2, "c", "!Delta")}));
      CHECK(bang.delta_awards().size() == 1);
    }
    SUBCASE("marker directly under the post is dangling") {
      const auto t = parse_tree(record({comment("c", "op", 1, std::nullopt, "∆ everyone")}));
      CHECK(t.delta_awards().empty());
      CHECK(t.dangling_delta_count() == 1);
    }
    SUBCASE("DeltaBot reply confirms") {
      const auto t = parse_tree(figure_one());
      REQUIRE(t.delta_awards().size() == 1);
      CHECK(t.delta_awards()[0].confirmed);
      CHECK(t.delta_awards()[0].awarded_to_node == "A1");
    }
  }

  TEST_CASE("figure one has four paths") {
    const auto t = parse_tree(figure_one());
    const auto paths = enumerate_paths(t);
    REQUIRE(paths.size() == 4);
    std::set<std::vector<std::string>> got;
    for (const auto& p : paths) got.insert(ids(t, p));
    std::vector<std::string> p3{"B1"};
    for (int k = 2; k <= 11; ++k) p3.push_back("B" + std::to_string(k));
    CHECK(got.count({"A1"}) == 1);
    CHECK(got.count({"A1", "A4", "A5"}) == 1);
    CHECK(got.count(p3) == 1);
    CHECK(got.count({"B1", "B12"}) == 1);
    for (const auto& p : paths) {
      for (auto n : p) CHECK(t.node(n).id != "A2");
    }
  }

  TEST_CASE("simple path shapes") {
    const auto single = parse_tree(record({comment("r", "u", 1, std::nullopt)}));
    REQUIRE(enumerate_paths(single).size() == 1);
    CHECK(enumerate_paths(single)[0].size() == 1);
    const auto chain = parse_tree(record({comment("r", "u", 1, std::nullopt), comment("x", "op", 2, "r"),
                                          comment("y", "u", 3, "x")}));
    REQUIRE(enumerate_paths(chain).size() == 1);
    CHECK(enumerate_paths(chain)[0].size() == 3);
  }

  TEST_CASE("rooted path units of figure one") {
    const auto t = parse_tree(figure_one());
    const auto units = rooted_path_units(t);
    std::set<std::vector<std::string>> got;
    for (const auto& u : units) got.insert(node_ids(t, u.nodes));
    CHECK(got.count({"A1"}) == 1);
    CHECK(got.count({"B1", "B3", "B5", "B7", "B9", "B11"}) == 1);
    CHECK(got.count({"B1"}) == 1);
    for (const auto& u : units) CHECK(u.delta_winning == (u.author == "green"));
  }

  TEST_CASE("identical unit comment sets are deduplicated") {
    // Two leaves under an OP reply: both paths keep only r for the root challenger.
    const auto t = parse_tree(record({comment("r", "u", 1, std::nullopt), comment("o", "op", 2, "r"),
                                      comment("x", "v", 3, "o"), comment("y", "w", 4, "o")}));
    CHECK(enumerate_paths(t).size() == 2);
    CHECK(rooted_path_units(t).size() == 1);
  }

  TEST_CASE("corpus filters") {
    std::vector<CommentRecord> nine;
    for (int k = 0; k < 9; ++k) nine.push_back(comment("c" + std::to_string(k), "u" + std::to_string(k), k, std::nullopt));
    auto ten = nine;
    ten.push_back(comment("c9", "u9", 9, std::nullopt));
    auto ten_op = ten;
    ten_op.push_back(comment("o", "op", 20, "c0"));
    const CorpusFilter f;
    CHECK_FALSE(passes_filter(parse_tree(record(nine)), f));
    CHECK_FALSE(passes_filter(parse_tree(record(ten)), f));
    CHECK(passes_filter(parse_tree(record(ten_op)), f));
    const auto mf = cmv::pairing::malleability_filter();
    CHECK(passes_filter(parse_tree(record(ten_op)), mf));
    CHECK_FALSE(passes_filter(parse_tree(record(ten_op, "op", "I changed a lot")), mf));
  }

  TEST_CASE("reading a dump reports deleted originals") {
    std::vector<std::string> lines;
    for (int k = 0; k < 5; ++k) {
      auto r = record({comment("c", "u", 1, std::nullopt)}, k == 2 ? "[deleted]" : "op");
      r.id = "t" + std::to_string(k);
      r.comments[0].id = r.id + "c";
      lines.push_back(record_to_json(r));
    }
    const auto res = parse_corpus_lines(lines, InputFormat::Normalized);
    CHECK(res.trees.size() == 4);
    CHECK(res.deleted_author == 1);
  }

  TEST_CASE("malformed lines carry line numbers") {
    const std::vector<std::string> lines{"{not json", record_to_json(record({}))};
    const auto res = parse_corpus_lines(lines, InputFormat::Normalized);
    CHECK(res.trees.size() == 1);
    CHECK(res.malformed == 1);
    REQUIRE_FALSE(res.diagnostics.empty());
    CHECK(res.diagnostics[0].line == 1);
  }

  TEST_CASE("record round trip") {
    const auto t = parse_tree(figure_one());
    const auto again = parse_tree(record_from_json(record_to_json(to_record(t))));
    CHECK(again.nodes().size() == t.nodes().size());
    CHECK(again.delta_awards() == t.delta_awards());
  }

  TEST_CASE("reddit dump adapter") {
    const std::string line =
        R"({"id":"abc","title":"CMV: x","author":"op","selftext":"body","created_utc":1400000000,)"
        R"("comments":[{"id":"c1","author":"u","body":"hi","created_utc":1400000100,"parent_id":"t3_abc",)"
        R"("replies":[{"id":"c2","author":"op","body":"∆","created_utc":1400000200,"parent_id":"t1_c1"}]}]})";
    const auto t = parse_tree(record_from_cmv_dump(line));
    CHECK(t.nodes().size() == 2);
    CHECK(t.delta_awards().size() == 1);
  }
}
