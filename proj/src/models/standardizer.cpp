#include <cmath>

#include "cmv/models.hpp"

namespace cmv::models {

Standardizer Standardizer::fit(const SparseRows& x, bool center) {
  const auto p = static_cast<std::size_t>(x.cols());
  const auto n = static_cast<double>(x.rows());
  Standardizer s;
  s.center = center;
  s.mean.assign(p, 0.0);
  s.sd.assign(p, 0.0);
  s.dropped.assign(p, false);
  std::vector<double> missing(p, 0.0), stored(p, 0.0), sum(p, 0.0);
  for (Eigen::Index r = 0; r < x.outerSize(); ++r) {
    for (SparseRows::InnerIterator it(x, r); it; ++it) {
      const auto j = static_cast<std::size_t>(it.col());
      if (std::isnan(it.value())) {
        missing[j] += 1.0;
      } else {
        stored[j] += 1.0;
        sum[j] += it.value();
      }
    }
  }
  std::vector<double> count(p);
  for (std::size_t j = 0; j < p; ++j) {
    count[j] = n - missing[j];
    if (count[j] <= 0.0) {
      s.dropped[j] = true;
      continue;
    }
    if (center) s.mean[j] = sum[j] / count[j];
  }
  // Second pass around the mean; implicit zeros contribute mean^2 each.
  std::vector<double> ss(p, 0.0);
  for (Eigen::Index r = 0; r < x.outerSize(); ++r) {
    for (SparseRows::InnerIterator it(x, r); it; ++it) {
      const auto j = static_cast<std::size_t>(it.col());
      if (std::isnan(it.value())) continue;
      const double d = it.value() - s.mean[j];
      ss[j] += d * d;
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    if (s.dropped[j]) continue;
    const double zeros = count[j] - stored[j];
    ss[j] += zeros * s.mean[j] * s.mean[j];
    s.sd[j] = std::sqrt(ss[j] / count[j]);
  }
  return s;
}

double Standardizer::inv_scale(std::size_t j) const {
  if (dropped[j] || !(sd[j] > 0.0)) return 0.0;
  return 1.0 / sd[j];
}

SparseRows Standardizer::impute(const SparseRows& x) const {
  SparseRows out = x;
  for (Eigen::Index r = 0; r < out.outerSize(); ++r) {
    for (SparseRows::InnerIterator it(out, r); it; ++it) {
      if (std::isnan(it.value())) it.valueRef() = center ? mean[static_cast<std::size_t>(it.col())] : 0.0;
    }
  }
  return out;
}

Eigen::MatrixXd Standardizer::transform_dense(const SparseRows& x) const {
  const Eigen::MatrixXd d = Eigen::MatrixXd(impute(x));
  Eigen::MatrixXd out(d.rows(), d.cols());
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    out.col(j) = (d.col(j).array() - mean[jj]) * inv_scale(jj);
  }
  return out;
}

std::vector<std::size_t> Standardizer::dropped_columns() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < dropped.size(); ++j) {
    if (dropped[j]) out.push_back(j);
  }
  return out;
}

Design::Design(const SparseRows& imputed, const Standardizer& s)
    : x_(imputed), mean_(imputed.cols()), inv_(imputed.cols()) {
  for (Eigen::Index j = 0; j < imputed.cols(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    mean_(j) = s.mean[jj];
    inv_(j) = s.inv_scale(jj);
  }
}

Eigen::VectorXd Design::times(const Eigen::VectorXd& w) const {
  const Eigen::VectorXd v = w.cwiseProduct(inv_);
  Eigen::VectorXd z = x_ * v;
  z.array() -= mean_.dot(v);
  return z;
}

Eigen::VectorXd Design::transpose_times(const Eigen::VectorXd& r) const {
  Eigen::VectorXd g = x_.transpose() * r;
  g -= mean_ * r.sum();
  return g.cwiseProduct(inv_);
}

}  // namespace cmv::models
