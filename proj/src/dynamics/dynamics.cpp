#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "cmv/dynamics.hpp"
#include "cmv/util.hpp"

namespace cmv::dynamics {

using corpus::DiscussionTree;

void RateCounter::add(std::int64_t bin, bool success) {
  auto it = std::lower_bound(bins_.begin(), bins_.end(), bin,
                             [](const auto& e, std::int64_t b) { return e.first < b; });
  if (it == bins_.end() || it->first != bin) it = bins_.insert(it, {bin, {0, 0}});
  ++it->second.first;
  if (success) ++it->second.second;
}

std::vector<BinnedRate> RateCounter::table() const {
  std::vector<BinnedRate> out;
  for (const auto& [bin, c] : bins_) {
    BinnedRate r;
    r.bin = bin;
    r.trials = c.first;
    r.successes = c.second;
    r.rate = static_cast<double>(r.successes) / static_cast<double>(r.trials);
    r.std_error = std::sqrt(r.rate * (1.0 - r.rate) / static_cast<double>(r.trials));
    out.push_back(r);
  }
  return out;
}

std::int64_t floor_log2(std::size_t n) {
  std::int64_t k = -1;
  while (n > 0) {
    n >>= 1;
    ++k;
  }
  return k;
}

std::vector<BinnedRate> entry_order_table(TreeList trees, const EntryOrderConfig& cfg, TreeList history) {
  std::unordered_map<std::string, std::int64_t> first_seen;
  if (cfg.first_time_only) {
    auto note = [&](const std::string& author, std::int64_t t) {
      auto [it, inserted] = first_seen.emplace(author, t);
      if (!inserted && t < it->second) it->second = t;
    };
    for (const auto* t : history) {
      note(t->op_author(), t->created_utc());
      for (const auto& n : t->nodes()) note(n.author, n.created_utc);
    }
  }
  RateCounter counter;
  for (const auto* t : trees) {
    const auto entrants = t->challengers_by_entry();
    if (entrants.size() < cfg.min_challengers) continue;
    std::unordered_map<std::string, std::int64_t> entry_time;
    for (const auto& n : t->nodes()) entry_time.emplace(n.author, n.created_utc);
    for (std::size_t k = 0; k < entrants.size(); ++k) {
      if (cfg.max_rank > 0 && k + 1 > cfg.max_rank) break;
      const auto& a = entrants[k];
      if (cfg.first_time_only) {
        const auto it = first_seen.find(a);
        if (it != first_seen.end() && it->second < entry_time.at(a)) continue;
      }
      counter.add(static_cast<std::int64_t>(k + 1), t->author_won_delta(a));
    }
  }
  return counter.table();
}

std::vector<BinnedRate> back_and_forth_table(TreeList trees) {
  RateCounter counter;
  for (const auto* t : trees) {
    for (const auto& p : corpus::analysis_paths(*t)) {
      const auto& challenger = t->node(p.nodes.front()).author;
      if (!t->is_challenger(challenger)) continue;
      std::size_t k = 0;
      bool only_two = true;
      for (const auto n : p.nodes) {
        const auto& node = t->node(n);
        if (node.author == challenger) {
          ++k;
        } else if (!node.is_op) {
          only_two = false;
          break;
        }
      }
      if (only_two) counter.add(static_cast<std::int64_t>(k), p.winning);
    }
  }
  return counter.table();
}

std::vector<BinnedRate> conversion_by_challengers(TreeList trees) {
  RateCounter counter;
  for (const auto* t : trees) {
    const auto n = t->challengers_by_entry().size();
    if (n == 0) continue;
    counter.add(floor_log2(n), t->has_delta());
  }
  return counter.table();
}

SubtreeComparison subtree_comparison(TreeList trees, std::size_t min_size, std::size_t max_size) {
  RateCounter single, multiple;
  for (const auto* t : trees) {
    const auto roots = t->root_replies();
    std::map<std::size_t, std::size_t> size;
    std::map<std::size_t, std::set<std::string>> authors;
    std::map<std::size_t, bool> won;
    for (const auto r : roots) {
      size[r] = 0;
      won[r] = false;
    }
    for (std::size_t i = 0; i < t->nodes().size(); ++i) {
      const auto r = t->subtree_of(i);
      if (t->is_awarded(i)) won[r] = true;
      if (t->excluded_from_paths(i)) continue;
      ++size[r];
      if (!t->node(i).is_op) authors[r].insert(t->node(i).author);
    }
    for (const auto r : roots) {
      if (t->node(r).is_op || t->node(r).is_deltabot) continue;
      const auto s = size[r];
      if (s < min_size || s > max_size) continue;
      auto& target = authors[r].size() == 1 ? single : multiple;
      target.add(static_cast<std::int64_t>(s), won[r]);
    }
  }
  return {single.table(), multiple.table()};
}

std::vector<Attempt> challenger_attempts(TreeList trees) {
  std::vector<Attempt> out;
  for (const auto* t : trees) {
    std::map<std::string, std::int64_t> first_root;
    for (const auto r : t->root_replies()) {
      const auto& n = t->node(r);
      if (!t->is_challenger(n.author)) continue;
      first_root.emplace(n.author, n.created_utc);
    }
    for (const auto& [author, time] : first_root) {
      out.push_back({author, t->id(), time, t->author_won_delta(author)});
    }
  }
  std::sort(out.begin(), out.end(), [](const Attempt& a, const Attempt& b) {
    if (a.author != b.author) return a.author < b.author;
    if (a.time != b.time) return a.time < b.time;
    return a.tree_id < b.tree_id;
  });
  return out;
}

std::array<std::size_t, 4> chunk_sizes(std::size_t n) {
  std::array<std::size_t, 4> c{};
  for (std::size_t k = 0; k < 4; ++k) c[k] = n / 4 + (k < n % 4 ? 1 : 0);
  return c;
}

ExperienceTables experience_tables(TreeList trees, std::size_t min_attempts) {
  const auto attempts = challenger_attempts(trees);
  RateCounter by_attempts, by_quarter;
  std::size_t i = 0;
  while (i < attempts.size()) {
    std::size_t j = i;
    while (j < attempts.size() && attempts[j].author == attempts[i].author) ++j;
    const auto n = j - i;
    const auto bin = floor_log2(n);
    for (std::size_t k = i; k < j; ++k) by_attempts.add(bin, attempts[k].success);
    if (n >= min_attempts) {
      const auto sizes = chunk_sizes(n);
      std::size_t k = i;
      for (std::size_t q = 0; q < 4; ++q) {
        for (std::size_t m = 0; m < sizes[q]; ++m, ++k) {
          by_quarter.add(static_cast<std::int64_t>(q + 1), attempts[k].success);
        }
      }
    }
    i = j;
  }
  return {by_attempts.table(), by_quarter.table()};
}

namespace {

void write_row(std::ostringstream& out, const BinnedRate& r) {
  out << r.bin << ',' << r.trials << ',' << r.successes << ',' << format_double(r.rate) << ','
      << format_double(r.std_error) << '\n';
}

}  // namespace

std::string rates_csv(std::span<const BinnedRate> rows) {
  std::ostringstream out;
  out << "bin,trials,successes,rate,stderr\n";
  for (const auto& r : rows) write_row(out, r);
  return out.str();
}

std::string subtree_csv(const SubtreeComparison& cmp) {
  std::ostringstream out;
  out << "series,bin,trials,successes,rate,stderr\n";
  for (const auto& r : cmp.single) {
    out << "single,";
    write_row(out, r);
  }
  for (const auto& r : cmp.multiple) {
    out << "multiple,";
    write_row(out, r);
  }
  return out.str();
}

}  // namespace cmv::dynamics
