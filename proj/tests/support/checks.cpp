#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "../oracles/oracle.hpp"
#include "cmv/corpus.hpp"
#include "cmv/dynamics.hpp"
#include "cmv/features.hpp"
#include "cmv/lexicon.hpp"
#include "cmv/models.hpp"
#include "cmv/pairing.hpp"
#include "cmv/util.hpp"

namespace checks {

std::string fixture_path() { return CMV_TEST_FIXTURE; }
std::string resources_path() { return CMV_TEST_RESOURCES; }
std::string cli_path() { return CMV_TEST_CLI; }
std::string golden_dir() { return CMV_TEST_GOLDEN; }

namespace {

using cmv::corpus::DiscussionTree;

struct Fixture {
  std::vector<DiscussionTree> trees;
  std::vector<oracle::Tree> otrees;
  std::vector<const DiscussionTree*> all, period, filtered;
  std::vector<const oracle::Tree*> oall, operiod, ofiltered;
};

const Fixture& fixture() {
  static const Fixture fx = [] {
    Fixture f;
    f.trees = cmv::corpus::read_corpus(fixture_path(), cmv::corpus::InputFormat::Normalized).trees;
    f.otrees = oracle::load_trees(fixture_path());
    const cmv::corpus::CorpusFilter filter;
    for (const auto& t : f.trees) {
      f.all.push_back(&t);
      if (cmv::pairing::split_of(t.created_utc()) != cmv::pairing::Split::Train) continue;
      f.period.push_back(&t);
      if (cmv::corpus::passes_filter(t, filter)) f.filtered.push_back(&t);
    }
    for (const auto& t : f.otrees) {
      f.oall.push_back(&t);
      if (!oracle::in_train(t)) continue;
      f.operiod.push_back(&t);
      if (oracle::passes_default(t)) f.ofiltered.push_back(&t);
    }
    return f;
  }();
  return fx;
}

std::string compare(const std::string& name, const std::vector<cmv::dynamics::BinnedRate>& lib,
                    const oracle::Table& ref) {
  if (lib.size() != ref.size()) {
    return name + ": " + std::to_string(lib.size()) + " bins vs oracle " + std::to_string(ref.size());
  }
  std::size_t i = 0;
  for (const auto& [bin, c] : ref) {
    const auto& r = lib[i++];
    if (r.bin != bin || r.trials != c.first || r.successes != c.second) {
      return name + ": bin " + std::to_string(bin) + " differs (" + std::to_string(r.trials) + "/" +
             std::to_string(r.successes) + " vs " + std::to_string(c.first) + "/" + std::to_string(c.second) + ")";
    }
    const double rate = static_cast<double>(c.second) / static_cast<double>(c.first);
    if (std::abs(r.rate - rate) > 1e-9) return name + ": rate differs at bin " + std::to_string(bin);
    if (std::abs(r.std_error - std::sqrt(rate * (1 - rate) / static_cast<double>(c.first))) > 1e-9) {
      return name + ": standard error differs at bin " + std::to_string(bin);
    }
  }
  return "";
}

Check from(const std::string& name, const std::string& failure, const std::string& ok_detail) {
  return {name, failure.empty(), failure.empty() ? ok_detail : failure};
}

bool same_real(double a, double b, double tol) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::abs(a - b) <= tol;
}

const cmv::lexicon::Lexicon& stopwords() {
  static const auto lex = cmv::lexicon::load_lexicon(resources_path() + "/lexicons/stopwords.txt", "stopwords");
  return lex;
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double gauss(std::mt19937_64& rng) {
  const double u1 = std::max(unit(rng), 1e-300), u2 = unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

cmv::models::SparseRows to_sparse(const Eigen::MatrixXd& m) { return m.sparseView(0.0, 0.0).eval(); }

std::vector<std::string> names(std::size_t p) {
  std::vector<std::string> n;
  for (std::size_t j = 0; j < p; ++j) n.push_back("f" + std::to_string(j));
  return n;
}

}  // namespace

Check dynamics_oracle() {
  using namespace cmv::dynamics;
  const auto& f = fixture();
  std::string fail;
  std::size_t checked = 0;
  auto step = [&](const std::string& name, const std::vector<BinnedRate>& lib, const oracle::Table& ref) {
    if (!fail.empty()) return;
    if (lib.empty()) fail = name + ": table is empty on the fixture";
    if (fail.empty()) fail = compare(name, lib, ref);
    ++checked;
  };
  step("entry order", entry_order_table(f.filtered), oracle::entry_order(f.ofiltered, false, {}));
  step("entry order first-time", entry_order_table(f.filtered, {10, 0, true}, f.all),
       oracle::entry_order(f.ofiltered, true, f.oall));
  step("back and forth", back_and_forth_table(f.filtered), oracle::back_and_forth(f.ofiltered));
  step("conversion", conversion_by_challengers(f.filtered), oracle::conversion(f.ofiltered));
  const auto sub = subtree_comparison(f.filtered);
  const auto osub = oracle::subtree(f.ofiltered);
  step("subtree single", sub.single, osub.first);
  step("subtree multiple", sub.multiple, osub.second);
  const auto exp = experience_tables(f.period);
  const auto oexp = oracle::experience(f.operiod);
  step("experience by attempts", exp.by_attempts, oexp.first);
  step("experience by quarter", exp.by_quarter, oexp.second);
  return from("dynamics tables match oracle", fail,
              std::to_string(checked) + " tables over " + std::to_string(f.filtered.size()) + " filtered trees");
}

Check pairs_oracle() {
  const auto& f = fixture();
  const auto& stop = stopwords();
  const auto lib = cmv::pairing::build_pairs(f.trees, stop);
  const auto ref = oracle::pairs(
      f.oall, [&](const std::string& body) { return cmv::pairing::matching_words(cmv::corpus::normalize_text(body), stop); },
      [](const std::string& body) { return cmv::features::count_words(cmv::corpus::normalize_text(body)); });
  std::string fail;
  if (lib.empty()) fail = "no pairs on the fixture";
  if (fail.empty() && lib.size() != ref.size()) {
    fail = std::to_string(lib.size()) + " pairs vs oracle " + std::to_string(ref.size());
  }
  for (std::size_t i = 0; fail.empty() && i < lib.size(); ++i) {
    const auto& a = lib[i];
    const auto& b = ref[i];
    if (a.tree_id != b.tree || a.positive.node_ids != b.positive || a.negative.node_ids != b.negative) {
      fail = "pair " + std::to_string(i) + " in " + b.tree + " differs (negative " + a.negative.root_reply_id +
             " vs " + (b.negative.empty() ? "" : b.negative.front()) + ")";
    } else if (std::abs(a.jaccard_score - b.jaccard) > 1e-9) {
      fail = "pair " + std::to_string(i) + " jaccard differs";
    }
  }
  return from("pair selection argmax matches oracle", fail, std::to_string(lib.size()) + " pairs");
}

Check quarter_matrix_oracle() {
  const auto& f = fixture();
  const auto& stop = stopwords();
  const auto pairs = cmv::pairing::build_pairs(f.trees, stop);
  std::string fail;
  std::size_t cells = 0;
  for (const auto& p : pairs) {
    const auto op = cmv::features::analyze(p.op, stop);
    for (const auto v : {cmv::pairing::Variant::RootReply, cmv::pairing::Variant::FullPath,
                         cmv::pairing::Variant::RootTruncated}) {
      for (const auto* text : {&p.variant(v).first, &p.variant(v).second}) {
        const auto arg = cmv::features::analyze(text->doc, stop);
        const auto lib = cmv::features::quarter_interplay(arg, op);
        const auto ref = oracle::quarter_matrix(arg.words, arg.stop, op.words, op.stop);
        for (std::size_t i = 0; i < 5; ++i) {
          for (std::size_t j = 0; j < 5; ++j) {
            for (std::size_t k = 0; k < 12; ++k) {
              ++cells;
              if (fail.empty() && !same_real(lib[i][j][k], ref[i][j][k], 1e-9)) {
                fail = p.tree_id + " cell (" + std::to_string(i) + "," + std::to_string(j) + ") metric " +
                       std::to_string(k) + " differs";
              }
            }
          }
        }
        // Max / min summaries over the 24 cells other than (full, full).
        const auto feats = cmv::features::interplay_features(arg, op);
        const std::size_t base = 12 * 25;
        for (std::size_t k = 0; k < 12 && fail.empty(); ++k) {
          double hi = std::nan(""), lo = std::nan("");
          for (std::size_t i = 0; i < 5; ++i) {
            for (std::size_t j = 0; j < 5; ++j) {
              if ((i == 4 && j == 4) || std::isnan(ref[i][j][k])) continue;
              hi = std::isnan(hi) ? ref[i][j][k] : std::max(hi, ref[i][j][k]);
              lo = std::isnan(lo) ? ref[i][j][k] : std::min(lo, ref[i][j][k]);
            }
          }
          if (!same_real(feats[base + 2 * k], hi, 1e-9) || !same_real(feats[base + 2 * k + 1], lo, 1e-9)) {
            fail = p.tree_id + " max/min summary differs for metric " + std::to_string(k);
          }
        }
      }
    }
  }
  if (pairs.empty()) fail = "no pairs on the fixture";
  return from("quarter interplay matrix matches oracle", fail, std::to_string(cells) + " cells");
}

Check mcnemar_oracle() {
  std::string fail;
  std::size_t n = 0;
  for (std::size_t b = 0; b <= 60 && fail.empty(); ++b) {
    for (std::size_t c = 0; c <= 60; ++c) {
      ++n;
      const double lib = cmv::models::mcnemar(b, c), ref = oracle::mcnemar(b, c);
      if (std::abs(lib - ref) > 1e-9) {
        fail = "b=" + std::to_string(b) + " c=" + std::to_string(c) + ": " + std::to_string(lib) + " vs " +
               std::to_string(ref);
        break;
      }
    }
  }
  return from("McNemar p matches oracle", fail, std::to_string(n) + " (b, c) cells");
}

Check permutation_oracle() {
  std::mt19937_64 rng(4242);
  std::string fail;
  double worst = 0.0;
  const auto metric_vec = [](const std::vector<double>& s, const std::vector<int>& l) { return oracle::auc(s, l); };
  const cmv::models::Metric metric = [](std::span<const double> s, std::span<const int> l) {
    return cmv::models::auc(s, l);
  };
  for (int instance = 0; instance < 8 && fail.empty(); ++instance) {
    const std::size_t n = 8 + static_cast<std::size_t>(instance % 3) * 2;
    std::vector<double> a(n), b(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i % 2 == 0 ? 1 : 0;
      b[i] = unit(rng);
      a[i] = b[i] + (y[i] ? 0.3 : -0.3) * unit(rng) * (instance % 4) + 0.2 * (unit(rng) - 0.5);
    }
    const double exact = oracle::exhaustive_permutation_p(a, b, y, metric_vec);
    const double sampled = cmv::models::permutation_test(a, b, y, metric, 10000, 99 + instance).p;
    worst = std::max(worst, std::abs(exact - sampled));
    if (std::abs(exact - sampled) > 0.01) {
      fail = "instance " + std::to_string(instance) + ": sampled " + std::to_string(sampled) + " vs exact " +
             std::to_string(exact);
    }
  }
  std::ostringstream d;
  d << "8 instances, max |sampled - exact| = " << worst;
  return from("permutation p matches exhaustive sign-flip", fail, d.str());
}

Check t_distribution_oracle() {
  std::string fail;
  double worst = 0.0;
  for (double df : {1.0, 2.5, 5.0, 19.0, 120.0}) {
    for (double t : {0.0, 0.3, 1.0, 2.1, 3.7, 6.0}) {
      const double lib = cmv::models::student_t_two_sided(t, df), ref = oracle::t_two_sided(t, df);
      worst = std::max(worst, std::abs(lib - ref));
      if (std::abs(lib - ref) > 1e-9 && fail.empty()) {
        fail = "t=" + std::to_string(t) + " df=" + std::to_string(df);
      }
    }
  }
  std::ostringstream d;
  d << "30 (t, df) points, max error " << worst;
  return from("Student-t tail matches quadrature", fail, d.str());
}

Check gradient_check() {
  namespace m = cmv::models;
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 30, p = 6;
    Eigen::MatrixXd x(n, p);
    std::vector<int> y(n);
    std::vector<double> sw(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) x(i, j) = (j == 3 && i % 3) ? 0.0 : gauss(rng) * (1 + j);
      y[i] = unit(rng) < 0.4 ? 1 : 0;
      sw[i] = 0.5 + unit(rng);
    }
    const auto sx = to_sparse(x);
    const auto s = m::Standardizer::fit(sx, trial % 2 == 0);
    const auto imputed = s.impute(sx);
    const m::Design design(imputed, s);
    const m::LogisticObjective obj(design, y, sw);
    Eigen::VectorXd w(p);
    for (int j = 0; j < p; ++j) w(j) = gauss(rng);
    const double b = gauss(rng);
    Eigen::VectorXd gw;
    double gb = 0;
    obj.gradient(w, b, gw, gb);
    const double h = 1e-6;
    auto rel = [](double g, double fd) { return std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-6}); };
    for (int j = 0; j < p; ++j) {
      Eigen::VectorXd wp = w, wm = w;
      wp(j) += h;
      wm(j) -= h;
      worst = std::max(worst, rel(gw(j), (obj.loss(wp, b) - obj.loss(wm, b)) / (2 * h)));
    }
    worst = std::max(worst, rel(gb, (obj.loss(w, b + h) - obj.loss(w, b - h)) / (2 * h)));
  }
  std::ostringstream d;
  d << "max relative error " << worst;
  return {"logistic gradient matches finite differences", worst <= 1e-4, d.str()};
}

Check separable_fixture() {
  namespace m = cmv::models;
  std::mt19937_64 rng(11);
  const int n = 200, p = 5;
  const std::vector<double> truth{1.5, -2.0, 0.0, 0.7, 1.0};
  Eigen::MatrixXd d(n, p);
  for (int i = 0; i < n;) {
    double score = 0;
    for (int j = 0; j < p; ++j) {
      d(i, j) = gauss(rng);
      score += truth[j] * d(i, j);
    }
    if (std::abs(score) < 0.2) continue;
    if (score < 0) d.row(i) *= -1.0;  // positive member always has the larger score
    ++i;
  }
  const auto sd = to_sparse(d);
  m::PairTrainConfig cfg;
  const auto model = m::fit_pair_logreg(sd, names(p), 1e-4, cfg);
  const Eigen::VectorXd s = model.decision(sd);
  const std::vector<double> scores(s.data(), s.data() + s.size());
  const double acc = m::symmetric_accuracy(scores);
  std::ostringstream det;
  det << "training pairwise accuracy " << acc;
  return {"separable fixture reaches 95% accuracy", acc >= 0.95, det.str()};
}

Check infinite_lambda() {
  namespace m = cmv::models;
  std::mt19937_64 rng(13);
  const int n = 80, p = 4;
  Eigen::MatrixXd d(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) d(i, j) = gauss(rng) + (j == 0 ? 1.0 : 0.0);
  }
  const auto sd = to_sparse(d);
  const auto model = m::fit_pair_logreg(sd, names(p), 1e9, {});
  const Eigen::VectorXd s = model.decision(sd);
  const std::vector<double> scores(s.data(), s.data() + s.size());
  const double acc = m::symmetric_accuracy(scores);
  std::ostringstream det;
  det << "nonzero weights " << model.nonzero() << ", pairwise accuracy " << acc;
  return {"huge lambda gives 50% pairwise accuracy", acc == 0.5 && model.nonzero() == 0, det.str()};
}

Check l1_path_monotone() {
  namespace m = cmv::models;
  std::string fail;
  std::size_t fits = 0;
  for (std::uint64_t seed = 1; seed <= 10 && fail.empty(); ++seed) {
    std::mt19937_64 rng(seed);
    const int n = 120, p = 12;
    Eigen::MatrixXd x(n, p);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      double z = 0;
      for (int j = 0; j < p; ++j) {
        x(i, j) = gauss(rng);
        z += (j < 4 ? 1.0 / (j + 1) : 0.0) * x(i, j);
      }
      y[i] = z + 0.8 * gauss(rng) > 0 ? 1 : 0;
    }
    const auto sx = to_sparse(x);
    std::size_t last = static_cast<std::size_t>(p) + 1;
    for (double lambda : m::kDefaultLambdas) {
      m::TrainOptions o;
      o.penalty = m::Penalty::L1;
      o.lambda = lambda;
      o.balanced = true;
      const auto model = m::fit_logreg(sx, y, names(p), o);
      ++fits;
      if (model.nonzero() > last) {
        fail = "fixture " + std::to_string(seed) + ": nonzero count rose at lambda " + std::to_string(lambda);
        break;
      }
      last = model.nonzero();
    }
  }
  return from("L1 nonzero count nonincreasing in lambda", fail, std::to_string(fits) + " fits on 10 fixtures");
}

Check norm_extrapolation() {
  namespace lx = cmv::lexicon;
  std::mt19937_64 rng(21);
  const std::size_t words = 3000, dim = 25;
  std::vector<double> beta(dim);
  for (auto& b : beta) b = gauss(rng) * 0.08;
  lx::EmbeddingTable emb;
  emb.dim = dim;
  std::vector<std::pair<std::string, double>> truth;
  for (std::size_t i = 0; i < words; ++i) {
    std::vector<double> v(dim);
    double s = 0.5;
    for (std::size_t k = 0; k < dim; ++k) {
      v[k] = gauss(rng);
      s += beta[k] * v[k];
    }
    s = std::clamp(s + 0.04 * gauss(rng), 0.0, 1.0);
    const std::string w = "w" + std::to_string(i);
    emb.vectors[w] = v;
    truth.emplace_back(w, s);
  }
  std::shuffle(truth.begin(), truth.end(), rng);
  const std::size_t held = words / 10;
  lx::NormTable native(lx::Dimension::Valence);
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < words; ++i) {
    if (i < held) {
      vocab.push_back(truth[i].first);
    } else {
      native.set_native(truth[i].first, truth[i].second);
    }
  }
  const auto res = lx::extrapolate_norms(native, emb, vocab);
  std::vector<double> err;
  for (std::size_t i = 0; i < held; ++i) {
    const auto s = res.table.score(truth[i].first);
    if (!s) return {"held-out norms recovered", false, "missing prediction for " + truth[i].first};
    err.push_back(std::abs(*s - truth[i].second));
  }
  std::nth_element(err.begin(), err.begin() + static_cast<std::ptrdiff_t>(err.size() / 2), err.end());
  const double median = err[err.size() / 2];
  std::ostringstream d;
  d << "median absolute error " << median << " over " << held << " held-out words";
  return {"held-out norms recovered", res.enabled && median <= 0.15, d.str()};
}

}  // namespace checks
