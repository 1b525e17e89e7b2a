#include <doctest.h>

#include <functional>
#include <random>

#include "checks.hpp"
#include "cmv/error.hpp"
#include "cmv/lexicon.hpp"

using namespace cmv::lexicon;

namespace {

cmv::Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const cmv::Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return cmv::Errc::InvalidConfig;
}

/// Embeddings on a line: score = 0.5 + 0.1 * x, so ridge recovers it closely.
EmbeddingTable line_embeddings(std::size_t n, NormTable& norms, std::size_t native) {
  EmbeddingTable emb;
  emb.dim = 2;
  std::mt19937_64 rng(3);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(rng() % 1000) / 250.0 - 2.0;
    const std::string w = "w" + std::to_string(i);
    emb.vectors[w] = {x, 1.0};
    if (i < native) norms.set_native(w, 0.5 + 0.1 * x);
  }
  return emb;
}

}  // namespace

TEST_SUITE("lexicon") {
  TEST_CASE("word lists") {
    const auto l = parse_lexicon("could be\nmight\n", "hedges");
    CHECK(l.size() == 2);
    CHECK(l.phrases().size() == 1);
    CHECK(l.contains("might"));
    CHECK(parse_lexicon("a\na\n# note\n", "x").size() == 1);
    const auto stop = parse_lexicon("the\na\nof\n", "stop");
    const std::vector<std::string> toks{"the", "the", "a"};
    CHECK(stop.count_matches(toks) == 3);
    const std::vector<std::string> text{"it", "could", "be", "the", "case"};
    CHECK(l.count_matches(text) == 1);
  }

  TEST_CASE("lexicon errors") {
    CHECK(code_of([] { parse_lexicon("# only a comment\n", "x"); }) == cmv::Errc::EmptyLexicon);
    CHECK(code_of([] { load_lexicon("/nonexistent/file.txt", "x"); }) == cmv::Errc::UnreadableFile);
  }

  TEST_CASE("norm scaling") {
    const auto t = parse_norms("word,score\nlow,1\nhigh,9\nmid,5\n", Dimension::Valence);
    CHECK(*t.score("low") == 0.0);
    CHECK(*t.score("high") == 1.0);
    CHECK(*t.score("mid") == doctest::Approx(0.5));
    const auto c = parse_norms("# scale 1 5\nbrick,5\n", Dimension::Concreteness);
    CHECK(*c.score("brick") == 1.0);
    const auto dup = parse_norms("a,3\na,5\n", Dimension::Arousal);
    CHECK(*dup.score("a") == doctest::Approx(0.375));
    CHECK(code_of([] { parse_norms("w,10\n", Dimension::Valence); }) == cmv::Errc::ScoreOutOfDeclaredRange);
  }

  TEST_CASE("norm loading ignores line order") {
    const auto a = parse_norms("x,2\ny,3\nz,4\n", Dimension::Dominance);
    const auto b = parse_norms("z,4\nx,2\ny,3\n", Dimension::Dominance);
    CHECK(a.words() == b.words());
    for (const auto& w : a.words()) CHECK(*a.score(w) == *b.score(w));
  }

  TEST_CASE("extrapolation keeps native scores and skips words without vectors") {
    NormTable norms(Dimension::Valence);
    const auto emb = line_embeddings(1500, norms, 1200);
    norms.set_native("odd", 0.99);
    const std::vector<std::string> vocab{"w0", "w1300", "odd", "novector"};
    ExtrapolationOptions opt;
    const auto res = extrapolate_norms(norms, emb, vocab, opt);
    REQUIRE(res.enabled);
    CHECK(*res.table.score("w0") == *norms.score("w0"));
    CHECK(*res.table.score("odd") == 0.99);
    CHECK(res.table.provenance("odd") == Provenance::Native);
    CHECK_FALSE(res.table.score("novector").has_value());
    REQUIRE(res.table.score("w1300").has_value());
    CHECK(res.table.provenance("w1300") == Provenance::Extrapolated);
    for (const auto& w : res.table.words()) {
      CHECK(*res.table.score(w) >= 0.0);
      CHECK(*res.table.score(w) <= 1.0);
    }
  }

  TEST_CASE("extrapolated predictions are clamped and counted") {
    NormTable t(Dimension::Arousal);
    t.set_extrapolated("hot", 1.7);
    t.set_extrapolated("cold", -0.2);
    CHECK(*t.score("hot") == 1.0);
    CHECK(*t.score("cold") == 0.0);
    CHECK(t.clamped() == 2);
  }

  TEST_CASE("insufficient overlap disables extrapolation") {
    NormTable norms(Dimension::Valence);
    const auto emb = line_embeddings(50, norms, 40);
    const std::vector<std::string> vocab{"w45"};
    const auto res = extrapolate_norms(norms, emb, vocab);
    CHECK_FALSE(res.enabled);
    CHECK_FALSE(res.table.score("w45").has_value());
    CHECK(code_of([&] { fit_norm_regressor(norms, emb); }) == cmv::Errc::InsufficientOverlap);
  }

  TEST_CASE("held-out native norms are recovered") {
    const auto c = checks::norm_extrapolation();
    INFO(c.detail);
    CHECK(c.ok);
  }

  TEST_CASE("bundled resources load") {
    const auto res = load_resources(checks::resources_path());
    CHECK(res.stopwords.contains("the"));
    CHECK_FALSE(res.positive.empty());
    CHECK_FALSE(res.negative.empty());
    CHECK(res.hedges.contains("might"));
  }
}
