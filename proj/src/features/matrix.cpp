#include <algorithm>
#include <sstream>

#include "cmv/error.hpp"
#include "cmv/features.hpp"
#include "cmv/util.hpp"

namespace cmv::features {

std::optional<std::size_t> FeatureMatrix::column(std::string_view name) const {
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] == name) return j;
  }
  return std::nullopt;
}

std::vector<double> FeatureMatrix::column_values(std::size_t j) const {
  std::vector<double> out(rows(), 0.0);
  for (Eigen::Index r = 0; r < values.outerSize(); ++r) {
    for (SparseRows::InnerIterator it(values, r); it; ++it) {
      if (static_cast<std::size_t>(it.col()) == j) out[static_cast<std::size_t>(r)] = it.value();
    }
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_prefixes(std::span<const std::string> prefixes) const {
  std::vector<long> remap(names.size(), -1);
  FeatureMatrix out;
  out.row_ids = row_ids;
  for (std::size_t j = 0; j < names.size(); ++j) {
    for (const auto& p : prefixes) {
      if (names[j].starts_with(p)) {
        remap[j] = static_cast<long>(out.names.size());
        out.names.push_back(names[j]);
        break;
      }
    }
  }
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index r = 0; r < values.outerSize(); ++r) {
    for (SparseRows::InnerIterator it(values, r); it; ++it) {
      const auto c = remap[static_cast<std::size_t>(it.col())];
      if (c >= 0) t.emplace_back(static_cast<int>(r), static_cast<int>(c), it.value());
    }
  }
  out.values.resize(values.rows(), static_cast<Eigen::Index>(out.names.size()));
  out.values.setFromTriplets(t.begin(), t.end());
  return out;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows_wanted) const {
  FeatureMatrix out;
  out.names = names;
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t k = 0; k < rows_wanted.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(rows_wanted[k]);
    if (r < static_cast<Eigen::Index>(row_ids.size())) out.row_ids.push_back(row_ids[rows_wanted[k]]);
    for (SparseRows::InnerIterator it(values, r); it; ++it) {
      t.emplace_back(static_cast<int>(k), static_cast<int>(it.col()), it.value());
    }
  }
  out.values.resize(static_cast<Eigen::Index>(rows_wanted.size()), values.cols());
  out.values.setFromTriplets(t.begin(), t.end());
  return out;
}

MatrixBuilder::MatrixBuilder(std::vector<std::string> names) : names_(std::move(names)) {}

void MatrixBuilder::add_dense(std::size_t row, std::size_t offset, std::span<const double> values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] == 0.0) continue;
    triplets_.emplace_back(static_cast<int>(row), static_cast<int>(offset + k), values[k]);
  }
  max_row_ = std::max(max_row_, row);
  any_ = true;
}

void MatrixBuilder::add_sparse(std::size_t row, std::size_t offset, const SparseVector& v, double scale) {
  for (const auto& [i, w] : v.entries) {
    if (w == 0.0) continue;
    triplets_.emplace_back(static_cast<int>(row), static_cast<int>(offset + i), w * scale);
  }
  max_row_ = std::max(max_row_, row);
  any_ = true;
}

FeatureMatrix MatrixBuilder::finish(std::vector<std::string> row_ids) {
  FeatureMatrix m;
  m.names = std::move(names_);
  const auto rows = std::max(row_ids.size(), any_ ? max_row_ + 1 : 0);
  m.row_ids = std::move(row_ids);
  m.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(m.names.size()));
  // Duplicates are summed, so NaN from either side of a difference propagates.
  m.values.setFromTriplets(triplets_.begin(), triplets_.end());
  triplets_.clear();
  return m;
}

std::string matrix_to_csv(const FeatureMatrix& m, std::string_view id_column) {
  std::ostringstream out;
  out << csv_escape(id_column);
  for (const auto& n : m.names) out << ',' << csv_escape(n);
  out << '\n';
  std::vector<double> row(m.cols());
  for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
    std::fill(row.begin(), row.end(), 0.0);
    for (SparseRows::InnerIterator it(m.values, r); it; ++it) row[static_cast<std::size_t>(it.col())] = it.value();
    out << csv_escape(static_cast<std::size_t>(r) < m.row_ids.size() ? m.row_ids[static_cast<std::size_t>(r)] : "");
    for (const double v : row) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

FeatureMatrix matrix_from_csv(std::string_view csv) {
  FeatureMatrix m;
  std::vector<Eigen::Triplet<double>> t;
  bool header = true;
  std::size_t r = 0;
  for (const auto line : split_lines(csv)) {
    if (line.empty() || line.front() == '#') continue;
    auto fields = parse_csv_line(line);
    if (header) {
      m.names.assign(fields.begin() + 1, fields.end());
      header = false;
      continue;
    }
    if (fields.size() != m.names.size() + 1) {
      throw Error(Errc::MalformedRecord, "feature row " + std::to_string(r + 1) + " has " +
                                             std::to_string(fields.size()) + " fields, expected " +
                                             std::to_string(m.names.size() + 1));
    }
    m.row_ids.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      double v = kMissing;
      if (!fields[j].empty()) {
        try {
          v = std::stod(fields[j]);
        } catch (const std::exception&) {
          throw Error(Errc::MalformedRecord, "non-numeric feature value '" + fields[j] + "'");
        }
      }
      if (v != 0.0) t.emplace_back(static_cast<int>(r), static_cast<int>(j - 1), v);
    }
    ++r;
  }
  m.values.resize(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m.names.size()));
  m.values.setFromTriplets(t.begin(), t.end());
  return m;
}

Extractor::Extractor(const lexicon::ResourceSet& res, const ExtractionConfig& config, bool truncated,
                     bool with_interplay, Vocabulary bow_vocab, Vocabulary pos_vocab, const PosTagger* tagger)
    : res_(res),
      config_(config),
      truncated_(truncated),
      with_interplay_(with_interplay),
      bow_(std::move(bow_vocab)),
      pos_(std::move(pos_vocab)),
      tagger_(tagger) {
  auto has = [&](Family f) {
    return std::find(config_.families.begin(), config_.families.end(), f) != config_.families.end();
  };
  if (has(Family::Interplay) && with_interplay_) {
    const auto c = interplay_columns();
    columns_.insert(columns_.end(), c.begin(), c.end());
  }
  if (has(Family::Style)) {
    const auto c = style_columns(truncated_);
    columns_.insert(columns_.end(), c.begin(), c.end());
  }
  if (has(Family::Quarters)) {
    const auto c = quarter_columns();
    columns_.insert(columns_.end(), c.begin(), c.end());
  }
  dense_count_ = columns_.size();
  if (!has(Family::Bow)) bow_ = Vocabulary();
  if (!has(Family::Pos) || !tagger_) pos_ = Vocabulary();
  for (const auto& t : bow_.terms()) columns_.push_back("bow." + t);
  for (const auto& t : pos_.terms()) columns_.push_back("pos." + t);
}

std::vector<double> Extractor::dense_values(const Analyzed& doc, const Analyzed* op) const {
  auto has = [&](Family f) {
    return std::find(config_.families.begin(), config_.families.end(), f) != config_.families.end();
  };
  std::vector<double> out;
  out.reserve(dense_count_);
  if (has(Family::Interplay) && with_interplay_) {
    if (!op) throw Error(Errc::InvalidConfig, "interplay features need an original post");
    const auto v = interplay_features(doc, *op);
    out.insert(out.end(), v.begin(), v.end());
  }
  if (has(Family::Style)) {
    const auto v = style_features(doc, res_);
    out.insert(out.end(), v.begin(), v.end());
  }
  if (has(Family::Quarters)) {
    const auto v = quarter_features(doc, res_);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

void Extractor::extract(MatrixBuilder& builder, std::size_t row, const Analyzed& doc, const Analyzed* op,
                        std::span<const std::string> node_ids, double sign) const {
  auto dense = dense_values(doc, op);
  for (auto& v : dense) v *= sign;
  builder.add_dense(row, 0, dense);
  if (bow_.size() > 0) builder.add_sparse(row, dense_count_, tf_vector(doc.words, bow_), sign);
  if (pos_.size() > 0) {
    const auto tags = tagger_->tag(doc.words, node_ids);
    builder.add_sparse(row, dense_count_ + bow_.size(), tf_vector(tags, pos_), sign);
  }
}

}  // namespace cmv::features
