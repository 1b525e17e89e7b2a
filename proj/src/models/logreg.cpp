#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "cmv/error.hpp"
#include "cmv/models.hpp"
#include "cmv/util.hpp"

namespace cmv::models {

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

std::string_view penalty_name(Penalty p) { return p == Penalty::L1 ? "l1" : "l2"; }

Penalty parse_penalty(std::string_view name) {
  if (name == "l1" || name == "L1") return Penalty::L1;
  if (name == "l2" || name == "L2") return Penalty::L2;
  throw Error(Errc::InvalidConfig, "unknown penalty '" + std::string(name) + "'");
}

LogisticObjective::LogisticObjective(const Design& x, std::span<const int> y, std::span<const double> sample_weight)
    : x_(x), y_(static_cast<Eigen::Index>(y.size())), c_(static_cast<Eigen::Index>(y.size())) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    y_(static_cast<Eigen::Index>(i)) = y[i] ? 1.0 : 0.0;
    c_(static_cast<Eigen::Index>(i)) = sample_weight.empty() ? 1.0 : sample_weight[i];
  }
  total_ = c_.sum();
  if (!(total_ > 0.0)) throw Error(Errc::DegenerateLabels, "no training rows");
}

double LogisticObjective::loss(const Eigen::VectorXd& w, double b) const {
  const Eigen::VectorXd z = x_.times(w).array() + b;
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += c_(i) * (softplus(z(i)) - y_(i) * z(i));
  return s / total_;
}

void LogisticObjective::gradient(const Eigen::VectorXd& w, double b, Eigen::VectorXd& gw, double& gb) const {
  const Eigen::VectorXd z = x_.times(w).array() + b;
  Eigen::VectorXd r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) r(i) = c_(i) * (sigmoid(z(i)) - y_(i)) / total_;
  gw = x_.transpose_times(r);
  gb = r.sum();
}

std::array<double, 2> balanced_class_weights(std::span<const int> y) {
  std::array<double, 2> counts{0.0, 0.0};
  for (const int v : y) counts[v ? 1 : 0] += 1.0;
  const double n = counts[0] + counts[1];
  std::array<double, 2> w{1.0, 1.0};
  for (int c = 0; c < 2; ++c) w[c] = counts[c] > 0 ? n / (2.0 * counts[c]) : 0.0;
  return w;
}

Eigen::VectorXd LogRegModel::decision(const SparseRows& x) const {
  if (static_cast<std::size_t>(x.cols()) != names.size()) {
    throw Error(Errc::InvalidConfig, "model expects " + std::to_string(names.size()) + " columns, got " +
                                         std::to_string(x.cols()));
  }
  const SparseRows xi = standardizer.impute(x);
  const Design d(xi, standardizer);
  Eigen::VectorXd z = d.times(weights);
  z.array() += intercept;
  return z;
}

std::size_t LogRegModel::nonzero() const {
  std::size_t n = 0;
  for (Eigen::Index j = 0; j < weights.size(); ++j) n += weights(j) != 0.0 ? 1 : 0;
  return n;
}

namespace {

struct Problem {
  const LogisticObjective& obj;
  Penalty penalty;
  double lambda;
  bool intercept;

  double smooth(const Eigen::VectorXd& w, double b) const {
    double f = obj.loss(w, b);
    if (penalty == Penalty::L2) f += 0.5 * lambda * w.squaredNorm();
    return f;
  }
  double nonsmooth(const Eigen::VectorXd& w) const {
    return penalty == Penalty::L1 ? lambda * w.lpNorm<1>() : 0.0;
  }
  void grad(const Eigen::VectorXd& w, double b, Eigen::VectorXd& gw, double& gb) const {
    obj.gradient(w, b, gw, gb);
    if (penalty == Penalty::L2) gw += lambda * w;
    if (!intercept) gb = 0.0;
  }
  void prox(Eigen::VectorXd& w, double step) const {
    if (penalty != Penalty::L1) return;
    for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = soft_threshold(w(j), lambda * step);
  }
};

}  // namespace

LogRegModel fit_logreg(const SparseRows& x, std::span<const int> y, std::vector<std::string> names,
                       const TrainOptions& options) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(Errc::InvalidConfig, "row/label count mismatch");
  if (names.size() != static_cast<std::size_t>(x.cols())) throw Error(Errc::InvalidConfig, "name/column count mismatch");
  LogRegModel m;
  m.names = std::move(names);
  m.penalty = options.penalty;
  m.lambda = options.lambda;
  m.fit_intercept = options.fit_intercept;
  m.standardizer = Standardizer::fit(x, options.center);
  if (options.balanced) m.class_weights = balanced_class_weights(y);
  std::vector<double> sw(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) sw[i] = m.class_weights[y[i] ? 1 : 0];

  const SparseRows xi = m.standardizer.impute(x);
  const Design design(xi, m.standardizer);
  const LogisticObjective obj(design, y, sw);
  const Problem prob{obj, options.penalty, options.lambda, options.fit_intercept};

  const auto p = x.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p), w_prev = w, yw = w, gw;
  double b = 0.0, b_prev = 0.0, yb = 0.0, gb = 0.0;
  double t = 1.0;
  double lip = 1.0;
  double f_prev = prob.smooth(w, b) + prob.nonsmooth(w);
  std::size_t it = 0;
  for (; it < options.max_iter; ++it) {
    const double fy = prob.smooth(yw, yb);
    prob.grad(yw, yb, gw, gb);
    Eigen::VectorXd pw;
    double pb = 0.0;
    double fp = 0.0;
    while (true) {
      pw = yw - gw / lip;
      prob.prox(pw, 1.0 / lip);
      pb = options.fit_intercept ? yb - gb / lip : 0.0;
      fp = prob.smooth(pw, pb);
      const Eigen::VectorXd dw = pw - yw;
      const double db = pb - yb;
      const double quad = fy + gw.dot(dw) + gb * db + 0.5 * lip * (dw.squaredNorm() + db * db);
      if (fp <= quad + 1e-12 * std::abs(fy) || lip > 1e15) break;
      lip *= 2.0;
    }
    const double f_new = fp + prob.nonsmooth(pw);
    if (f_new > f_prev && t > 1.0) {
      // Momentum overshot: restart from the last accepted iterate.
      t = 1.0;
      yw = w_prev;
      yb = b_prev;
      continue;
    }
    const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    yw = pw + ((t - 1.0) / t_new) * (pw - w_prev);
    yb = pb + ((t - 1.0) / t_new) * (pb - b_prev);
    w_prev = pw;
    b_prev = pb;
    t = t_new;
    const bool done = std::abs(f_prev - f_new) <= options.tol * std::max(1.0, std::abs(f_prev));
    f_prev = std::min(f_prev, f_new);
    if (done) {
      m.converged = true;
      ++it;
      break;
    }
  }
  m.iterations = it;
  m.weights = w_prev;
  m.intercept = b_prev;
  return m;
}

double objective(const LogRegModel& m, const SparseRows& x, std::span<const int> y) {
  std::vector<double> sw(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) sw[i] = m.class_weights[y[i] ? 1 : 0];
  const SparseRows xi = m.standardizer.impute(x);
  const Design d(xi, m.standardizer);
  const LogisticObjective obj(d, y, sw);
  double f = obj.loss(m.weights, m.intercept);
  f += m.penalty == Penalty::L1 ? m.lambda * m.weights.lpNorm<1>() : 0.5 * m.lambda * m.weights.squaredNorm();
  return f;
}

std::vector<std::size_t> group_folds(std::span<const std::string> groups, std::size_t k, std::uint64_t seed) {
  std::map<std::string, std::size_t> sizes;
  for (const auto& g : groups) ++sizes[g];
  std::vector<std::string> order;
  for (const auto& [g, n] : sizes) order.push_back(g);
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
  std::vector<std::size_t> load(k, 0);
  std::map<std::string, std::size_t> fold_of;
  for (const auto& g : order) {
    const auto f = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    fold_of[g] = f;
    load[f] += sizes[g];
  }
  std::vector<std::size_t> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(fold_of[g]);
  return out;
}

namespace {

SparseRows take_rows(const SparseRows& x, std::span<const std::size_t> rows, bool with_negation) {
  std::vector<Eigen::Triplet<double>> t;
  const std::size_t stride = with_negation ? 2 : 1;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (SparseRows::InnerIterator it(x, static_cast<Eigen::Index>(rows[k])); it; ++it) {
      t.emplace_back(static_cast<int>(k * stride), static_cast<int>(it.col()), it.value());
      if (with_negation) t.emplace_back(static_cast<int>(k * stride + 1), static_cast<int>(it.col()), -it.value());
    }
  }
  SparseRows out(static_cast<Eigen::Index>(rows.size() * stride), x.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

std::size_t effective_folds(std::span<const std::string> groups, std::size_t k) {
  const std::set<std::string> unique(groups.begin(), groups.end());
  const auto f = std::min(k, unique.size());
  if (f < 2) throw Error(Errc::InvalidConfig, "cross-validation needs at least two distinct OP groups");
  return f;
}

bool better(double score, double lambda, double best_score, double best_lambda) {
  if (std::isnan(score)) return false;
  if (std::isnan(best_score)) return true;
  if (score > best_score + 1e-12) return true;
  return std::abs(score - best_score) <= 1e-12 && lambda > best_lambda;
}

}  // namespace

LogRegModel fit_pair_logreg(const SparseRows& diffs, std::vector<std::string> names, double lambda,
                            const PairTrainConfig& cfg) {
  std::vector<std::size_t> all(static_cast<std::size_t>(diffs.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const SparseRows x = take_rows(diffs, all, true);
  std::vector<int> y(x.rows());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 2 == 0 ? 1 : 0;
  TrainOptions o;
  o.penalty = Penalty::L1;
  o.lambda = lambda;
  o.fit_intercept = false;
  o.center = false;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  return fit_logreg(x, y, std::move(names), o);
}

PairOutcome pair_predict(double score) {
  return score > 0.0 ? PairOutcome::PositiveWins : PairOutcome::NegativeWins;
}

double symmetric_accuracy(std::span<const double> scores) {
  if (scores.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (const double v : scores) s += v > 0.0 ? 1.0 : (v == 0.0 ? 0.5 : 0.0);
  return s / static_cast<double>(scores.size());
}

PairModel train_pair_model(const SparseRows& diffs, std::span<const std::string> groups,
                           std::vector<std::string> names, const PairTrainConfig& cfg) {
  if (groups.size() != static_cast<std::size_t>(diffs.rows())) throw Error(Errc::InvalidConfig, "group count mismatch");
  if (cfg.lambdas.empty()) throw Error(Errc::InvalidConfig, "empty lambda grid");
  const auto k = effective_folds(groups, cfg.folds);
  const auto fold = group_folds(groups, k, cfg.seed);
  PairModel out;
  double best_score = std::numeric_limits<double>::quiet_NaN();
  double best_lambda = cfg.lambdas.front();
  for (const double lambda : cfg.lambdas) {
    double total = 0.0;
    std::size_t used = 0;
    for (std::size_t f = 0; f < k; ++f) {
      std::vector<std::size_t> train, val;
      for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? val : train).push_back(i);
      if (train.empty() || val.empty()) continue;
      const auto m = fit_pair_logreg(take_rows(diffs, train, false), names, lambda, cfg);
      const auto scores = m.decision(take_rows(diffs, val, false));
      total += symmetric_accuracy(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())));
      ++used;
    }
    const double score = used ? total / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
    out.cv.push_back({Penalty::L1, lambda, score});
    if (better(score, lambda, best_score, best_lambda)) {
      best_score = score;
      best_lambda = lambda;
    }
  }
  out.model = fit_pair_logreg(diffs, std::move(names), best_lambda, cfg);
  return out;
}

WeightedModel train_weighted_model(const SparseRows& x, std::span<const int> y,
                                   std::span<const std::string> groups, std::vector<std::string> names,
                                   const WeightedTrainConfig& cfg) {
  if (groups.size() != y.size() || y.size() != static_cast<std::size_t>(x.rows())) {
    throw Error(Errc::InvalidConfig, "row/label/group count mismatch");
  }
  balanced_class_weights(y);
  if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); })) {
    throw Error(Errc::DegenerateLabels, "training labels are all equal");
  }
  const auto k = effective_folds(groups, cfg.folds);
  const auto fold = group_folds(groups, k, cfg.seed);
  auto options = [&](Penalty p, double lambda) {
    TrainOptions o;
    o.penalty = p;
    o.lambda = lambda;
    o.fit_intercept = true;
    o.balanced = true;
    o.center = true;
    o.tol = cfg.tol;
    o.max_iter = cfg.max_iter;
    return o;
  };
  WeightedModel out;
  double best_score = std::numeric_limits<double>::quiet_NaN();
  double best_lambda = cfg.lambdas.front();
  Penalty best_penalty = cfg.penalties.front();
  for (const auto pen : cfg.penalties) {
    for (const double lambda : cfg.lambdas) {
      double total = 0.0;
      std::size_t used = 0;
      for (std::size_t f = 0; f < k; ++f) {
        std::vector<std::size_t> train, val;
        for (std::size_t i = 0; i < fold.size(); ++i) (fold[i] == f ? val : train).push_back(i);
        std::vector<int> ytr, yval;
        for (auto i : train) ytr.push_back(y[i]);
        for (auto i : val) yval.push_back(y[i]);
        const auto has_both = [](const std::vector<int>& v) {
          return std::find(v.begin(), v.end(), 0) != v.end() && std::find(v.begin(), v.end(), 1) != v.end();
        };
        if (!has_both(ytr) || !has_both(yval)) continue;
        const auto m = fit_logreg(take_rows(x, train, false), ytr, names, options(pen, lambda));
        const auto s = m.decision(take_rows(x, val, false));
        total += auc(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), yval);
        ++used;
      }
      const double score = used ? total / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
      out.cv.push_back({pen, lambda, score});
      if (better(score, lambda, best_score, best_lambda)) {
        best_score = score;
        best_lambda = lambda;
        best_penalty = pen;
      }
    }
  }
  out.model = fit_logreg(x, y, std::move(names), options(best_penalty, best_lambda));
  return out;
}

}  // namespace cmv::models
