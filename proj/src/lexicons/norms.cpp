#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "cmv/error.hpp"
#include "cmv/lexicon.hpp"
#include "cmv/util.hpp"

namespace cmv::lexicon {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<double> parse_number(std::string_view s) {
  const auto t = std::string(trim(s));
  if (t.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Arousal: return "arousal";
    case Dimension::Concreteness: return "concreteness";
    case Dimension::Dominance: return "dominance";
    case Dimension::Valence: return "valence";
  }
  return "unknown";
}

ScaleBounds default_bounds(Dimension d) {
  if (d == Dimension::Concreteness) return {1.0, 5.0};
  return {1.0, 9.0};
}

std::optional<double> NormTable::score(std::string_view word) const {
  const auto it = scores_.find(std::string(word));
  if (it == scores_.end()) return std::nullopt;
  return it->second;
}

std::optional<Provenance> NormTable::provenance(std::string_view word) const {
  const auto it = prov_.find(std::string(word));
  if (it == prov_.end()) return std::nullopt;
  return it->second;
}

std::size_t NormTable::native_count() const {
  return static_cast<std::size_t>(std::count_if(prov_.begin(), prov_.end(), [](const auto& kv) {
    return kv.second == Provenance::Native;
  }));
}

void NormTable::set_native(const std::string& word, double score) {
  scores_[word] = score;
  prov_[word] = Provenance::Native;
}

void NormTable::set_extrapolated(const std::string& word, double score) {
  if (scores_.count(word)) return;
  if (score < 0.0 || score > 1.0) {
    ++clamped_;
    score = std::clamp(score, 0.0, 1.0);
  }
  scores_[word] = score;
  prov_[word] = Provenance::Extrapolated;
}

std::vector<std::string> NormTable::words() const {
  std::vector<std::string> out;
  out.reserve(scores_.size());
  for (const auto& kv : scores_) out.push_back(kv.first);
  std::sort(out.begin(), out.end());
  return out;
}

NormTable parse_norms(std::string_view text, Dimension d, std::optional<ScaleBounds> bounds) {
  ScaleBounds b = bounds.value_or(default_bounds(d));
  std::map<std::string, std::pair<double, int>> acc;
  bool first_content = true;
  std::size_t line_no = 0;
  for (const auto raw : split_lines(text)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::istringstream in{std::string(line.substr(1))};
      std::string kw;
      double lo = 0, hi = 0;
      if (in >> kw >> lo >> hi && kw == "scale") {
        if (!(hi > lo)) throw Error(Errc::InvalidConfig, "scale line with max <= min");
        b = {lo, hi};
      }
      continue;
    }
    const auto fields = parse_csv_line(line);
    const auto score = fields.size() >= 2 ? parse_number(fields[1]) : std::nullopt;
    if (!score) {
      if (first_content) {
        first_content = false;
        continue;
      }
      throw Error(Errc::MalformedRecord, "norm line " + std::to_string(line_no) + " is not 'word,score'");
    }
    first_content = false;
    if (*score < b.min || *score > b.max) {
      throw Error(Errc::ScoreOutOfDeclaredRange,
                  std::string(dimension_name(d)) + " score " + format_double(*score) + " on line " +
                      std::to_string(line_no) + " outside [" + format_double(b.min) + ", " +
                      format_double(b.max) + "]");
    }
    const auto word = to_lower_ascii(trim(fields[0]));
    if (word.empty()) continue;
    auto& slot = acc[word];
    slot.first += (*score - b.min) / (b.max - b.min);
    slot.second += 1;
  }
  NormTable table(d);
  for (const auto& [w, s] : acc) table.set_native(w, std::clamp(s.first / s.second, 0.0, 1.0));
  return table;
}

NormTable load_norms(const std::filesystem::path& path, Dimension d, std::optional<ScaleBounds> bounds) {
  return parse_norms(read_file(path), d, bounds);
}

const std::vector<double>* EmbeddingTable::find(std::string_view word) const {
  const auto it = vectors.find(std::string(word));
  return it == vectors.end() ? nullptr : &it->second;
}

EmbeddingTable parse_embeddings(std::string_view text) {
  EmbeddingTable emb;
  bool first = true;
  std::size_t line_no = 0;
  for (const auto raw : split_lines(text)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    std::istringstream in{std::string(line)};
    std::string word;
    in >> word;
    std::vector<double> v;
    std::string tok;
    while (in >> tok) {
      const auto x = parse_number(tok);
      if (!x) throw Error(Errc::MalformedRecord, "embedding line " + std::to_string(line_no) + " has a non-numeric value");
      v.push_back(*x);
    }
    if (first) {
      first = false;
      // word2vec text header: "<count> <dim>".
      if (v.size() == 1 && parse_number(word)) continue;
    }
    if (v.empty()) throw Error(Errc::MalformedRecord, "embedding line " + std::to_string(line_no) + " has no values");
    if (emb.dim == 0) emb.dim = v.size();
    if (v.size() != emb.dim) {
      throw Error(Errc::MalformedRecord, "embedding line " + std::to_string(line_no) + " has length " +
                                             std::to_string(v.size()) + ", expected " + std::to_string(emb.dim));
    }
    emb.vectors.emplace(to_lower_ascii(word), std::move(v));
  }
  return emb;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) { return parse_embeddings(read_file(path)); }

double RidgeModel::predict(std::span<const double> x) const {
  double s = intercept;
  for (std::size_t j = 0; j < weights.size() && j < x.size(); ++j) s += weights[j] * x[j];
  return s;
}

RidgeModel fit_ridge(const std::vector<std::vector<double>>& x, std::span<const double> y, double lambda) {
  const auto n = static_cast<Eigen::Index>(x.size());
  if (n == 0) throw Error(Errc::InvalidConfig, "ridge fit on zero rows");
  const auto d = static_cast<Eigen::Index>(x.front().size());
  Eigen::MatrixXd m(n, d);
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = x[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    t(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::RowVectorXd mean = m.colwise().mean();
  const double ty = t.mean();
  m.rowwise() -= mean;
  t.array() -= ty;
  Eigen::MatrixXd a = m.transpose() * m;
  a.diagonal().array() += lambda;
  const Eigen::VectorXd w = a.ldlt().solve(m.transpose() * t);
  RidgeModel model;
  model.lambda = lambda;
  model.weights.assign(w.data(), w.data() + w.size());
  model.intercept = ty - mean.dot(w);
  return model;
}

RidgeModel fit_norm_regressor(const NormTable& norms, const EmbeddingTable& emb,
                              const ExtrapolationOptions& options) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (const auto& w : norms.words()) {
    if (norms.provenance(w) != Provenance::Native) continue;
    if (const auto* v = emb.find(w)) {
      x.push_back(*v);
      y.push_back(*norms.score(w));
    }
  }
  if (x.size() < options.min_overlap || x.empty()) {
    throw Error(Errc::InsufficientOverlap, std::string(dimension_name(norms.dimension())) + ": " +
                                               std::to_string(x.size()) + " native words with embeddings, need " +
                                               std::to_string(options.min_overlap));
  }
  if (options.lambda_grid.empty() || options.folds < 2) {
    throw Error(Errc::InvalidConfig, "extrapolation needs a lambda grid and at least 2 folds");
  }
  std::vector<std::size_t> order(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(options.seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
  std::vector<std::size_t> fold(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) fold[order[i]] = i % options.folds;

  double best_lambda = options.lambda_grid.front();
  double best_mse = std::numeric_limits<double>::infinity();
  for (const double lambda : options.lambda_grid) {
    double sq = 0.0;
    for (std::size_t k = 0; k < options.folds; ++k) {
      std::vector<std::vector<double>> tx;
      std::vector<double> ty;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (fold[i] != k) {
          tx.push_back(x[i]);
          ty.push_back(y[i]);
        }
      }
      if (tx.empty()) continue;
      const auto m = fit_ridge(tx, ty, lambda);
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (fold[i] == k) {
          const double e = m.predict(x[i]) - y[i];
          sq += e * e;
        }
      }
    }
    const double mse = sq / static_cast<double>(x.size());
    if (mse < best_mse || (mse == best_mse && lambda > best_lambda)) {
      best_mse = mse;
      best_lambda = lambda;
    }
  }
  return fit_ridge(x, y, best_lambda);
}

ExtrapolationResult extrapolate_norms(const NormTable& norms, const EmbeddingTable& emb,
                                      std::span<const std::string> vocab,
                                      const ExtrapolationOptions& options) {
  ExtrapolationResult result{norms, false, 0, 0.0, {}};
  RidgeModel model;
  try {
    model = fit_norm_regressor(norms, emb, options);
  } catch (const Error& e) {
    if (e.code() != Errc::InsufficientOverlap) throw;
    result.diagnostic = std::string(e.what()) + "; extrapolation disabled";
    return result;
  }
  result.enabled = true;
  result.lambda = model.lambda;
  std::vector<std::string> words(vocab.begin(), vocab.end());
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  for (const auto& w : words) {
    if (result.table.score(w)) continue;
    const auto* v = emb.find(w);
    if (!v) continue;
    result.table.set_extrapolated(w, model.predict(*v));
    ++result.added;
  }
  if (result.table.clamped() > 0) {
    result.diagnostic = std::string(dimension_name(norms.dimension())) + ": clamped " +
                        std::to_string(result.table.clamped()) + " extrapolated score(s) into [0, 1]";
  }
  return result;
}

}  // namespace cmv::lexicon
