#include <algorithm>
#include <cmath>
#include <map>

#include "cmv/features.hpp"

namespace cmv::features {

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& [i, v] : entries) s += v * v;
  return std::sqrt(s);
}

Vocabulary::Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
  std::sort(terms_.begin(), terms_.end());
  terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
  for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& docs, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : docs) {
    for (const auto& t : d) ++counts[t];
  }
  std::vector<std::string> terms;
  for (const auto& [t, c] : counts) {
    if (c > min_count) terms.push_back(t);
  }
  return Vocabulary(std::move(terms));
}

std::optional<std::uint32_t> Vocabulary::index(std::string_view term) const {
  const auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SparseVector tf_vector(std::span<const std::string> terms, const Vocabulary& vocab) {
  std::map<std::uint32_t, double> counts;
  for (const auto& t : terms) {
    if (const auto i = vocab.index(t)) counts[*i] += 1.0;
  }
  SparseVector v;
  v.entries.assign(counts.begin(), counts.end());
  const double n = v.norm();
  if (n > 0.0) {
    for (auto& e : v.entries) e.second /= n;
  }
  return v;
}

}  // namespace cmv::features
