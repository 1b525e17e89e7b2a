#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

#include "cmv/error.hpp"
#include "cmv/models.hpp"
#include "cmv/util.hpp"

namespace cmv::models {

int arrow_level(double p) {
  if (p < 1e-4) return 4;
  if (p < 1e-3) return 3;
  if (p < 1e-2) return 2;
  if (p < 0.05) return 1;
  return 0;
}

namespace {

void bonferroni(std::vector<SignificanceRow>& rows) {
  const auto m = static_cast<double>(std::count_if(rows.begin(), rows.end(), [](auto& r) { return r.tested; }));
  for (auto& r : rows) {
    if (!r.tested) continue;
    r.p = r.test.p;
    r.p_corrected = std::min(1.0, r.p * m);
    r.level = arrow_level(r.p_corrected);
    r.direction = r.test.mean_diff > 0 ? 1 : (r.test.mean_diff < 0 ? -1 : 0);
  }
}

}  // namespace

std::vector<SignificanceRow> paired_significance(std::span<const std::string> names,
                                                 const Eigen::MatrixXd& positive, const Eigen::MatrixXd& negative) {
  if (positive.rows() != negative.rows() || positive.cols() != negative.cols() ||
      static_cast<std::size_t>(positive.cols()) != names.size()) {
    throw Error(Errc::InvalidConfig, "paired matrices do not align");
  }
  std::vector<SignificanceRow> rows(names.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto& r = rows[j];
    r.feature = names[j];
    std::vector<double> d;
    for (Eigen::Index i = 0; i < positive.rows(); ++i) {
      const double a = positive(i, static_cast<Eigen::Index>(j));
      const double b = negative(i, static_cast<Eigen::Index>(j));
      if (!std::isnan(a) && !std::isnan(b)) d.push_back(a - b);
    }
    r.test = paired_t_test(d);
    r.tested = d.size() >= 2 && std::any_of(d.begin(), d.end(), [](double v) { return v != 0.0; });
  }
  bonferroni(rows);
  return rows;
}

std::vector<SignificanceRow> unpaired_significance(std::span<const std::string> names, const Eigen::MatrixXd& x,
                                                   std::span<const int> labels) {
  if (static_cast<std::size_t>(x.rows()) != labels.size() || static_cast<std::size_t>(x.cols()) != names.size()) {
    throw Error(Errc::InvalidConfig, "matrix does not align with labels or names");
  }
  std::vector<SignificanceRow> rows(names.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto& r = rows[j];
    r.feature = names[j];
    std::vector<double> a, b;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double v = x(i, static_cast<Eigen::Index>(j));
      if (std::isnan(v)) continue;
      (labels[static_cast<std::size_t>(i)] ? a : b).push_back(v);
    }
    r.test = welch_t_test(a, b);
    bool constant = true;
    const double first = !a.empty() ? a.front() : (!b.empty() ? b.front() : 0.0);
    for (const double v : a) constant = constant && v == first;
    for (const double v : b) constant = constant && v == first;
    r.tested = a.size() >= 2 && b.size() >= 2 && !constant;
  }
  bonferroni(rows);
  return rows;
}

void annotate_truncated(std::vector<SignificanceRow>& main, const std::vector<SignificanceRow>& truncated) {
  std::map<std::string, const SignificanceRow*> by_name;
  for (const auto& r : truncated) by_name[r.feature] = &r;
  for (auto& r : main) {
    r.truncated = "none";
    if (r.level == 0) continue;
    const auto it = by_name.find(r.feature);
    if (it == by_name.end() || !it->second->tested) {
      r.truncated = "unavailable";
    } else if (it->second->level > 0) {
      r.truncated = it->second->direction == r.direction ? "T" : "T_reversed";
    }
  }
}

std::string significance_csv(std::span<const SignificanceRow> rows, bool with_truncated) {
  std::ostringstream out;
  out << "feature,direction,level,tested,p,p_bonferroni,t,df,n,mean_diff";
  if (with_truncated) out << ",truncated";
  out << '\n';
  for (const auto& r : rows) {
    const char* dir = r.direction > 0 ? "up" : (r.direction < 0 ? "down" : "none");
    out << csv_escape(r.feature) << ',' << dir << ',' << r.level << ',' << (r.tested ? 1 : 0) << ','
        << format_double(r.p) << ',' << format_double(r.p_corrected) << ',' << format_double(r.test.t) << ','
        << format_double(r.test.df) << ',' << r.test.n << ',' << format_double(r.test.mean_diff);
    if (with_truncated) out << ',' << r.truncated;
    out << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

double number_or_nan(const nlohmann::json& j) {
  return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string model_to_json(const LogRegModel& m, std::string_view config_hash, std::string_view extra_json) {
  nlohmann::ordered_json j;
  j["config_hash"] = std::string(config_hash);
  j["penalty"] = std::string(penalty_name(m.penalty));
  j["lambda"] = m.lambda;
  j["fit_intercept"] = m.fit_intercept;
  j["intercept"] = m.intercept;
  j["class_weights"] = {m.class_weights[0], m.class_weights[1]};
  j["converged"] = m.converged;
  j["iterations"] = m.iterations;
  j["nonzero"] = m.nonzero();
  j["center"] = m.standardizer.center;
  auto cols = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    nlohmann::ordered_json c;
    c["name"] = m.names[i];
    c["weight"] = m.weights(static_cast<Eigen::Index>(i));
    c["mean"] = finite_or_null(m.standardizer.mean[i]);
    c["sd"] = finite_or_null(m.standardizer.sd[i]);
    c["dropped"] = static_cast<bool>(m.standardizer.dropped[i]);
    cols.push_back(std::move(c));
  }
  j["training"] = nlohmann::ordered_json::parse(extra_json);
  j["columns"] = std::move(cols);
  return j.dump(1) + "\n";
}

LogRegModel model_from_json(std::string_view text) {
  LogRegModel m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.penalty = parse_penalty(j.at("penalty").get<std::string>());
    m.lambda = j.at("lambda").get<double>();
    m.fit_intercept = j.at("fit_intercept").get<bool>();
    m.intercept = j.at("intercept").get<double>();
    m.class_weights = {j.at("class_weights").at(0).get<double>(), j.at("class_weights").at(1).get<double>()};
    m.converged = j.at("converged").get<bool>();
    m.iterations = j.at("iterations").get<std::size_t>();
    m.standardizer.center = j.at("center").get<bool>();
    const auto& cols = j.at("columns");
    m.weights.resize(static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const auto& c = cols[i];
      m.names.push_back(c.at("name").get<std::string>());
      m.weights(static_cast<Eigen::Index>(i)) = c.at("weight").get<double>();
      m.standardizer.mean.push_back(number_or_nan(c.at("mean")));
      m.standardizer.sd.push_back(number_or_nan(c.at("sd")));
      m.standardizer.dropped.push_back(c.at("dropped").get<bool>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedRecord, std::string("model file: ") + e.what());
  }
  return m;
}

}  // namespace cmv::models
