#pragma once

// Interaction-dynamics tables: entry order, back-and-forth depth, number of
// challengers, subtree composition and challenger experience.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmv/corpus.hpp"

namespace cmv::dynamics {

struct BinnedRate {
  std::int64_t bin = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double rate = 0.0;
  /// sqrt(rate * (1 - rate) / trials).
  double std_error = 0.0;

  friend bool operator==(const BinnedRate&, const BinnedRate&) = default;
};

/// Rates from per-bin counters; bins are emitted in ascending order and only
/// when they have at least one trial.
class RateCounter {
 public:
  void add(std::int64_t bin, bool success);
  std::vector<BinnedRate> table() const;

 private:
  std::vector<std::pair<std::int64_t, std::pair<std::size_t, std::size_t>>> bins_;
};

using TreeList = std::span<const corpus::DiscussionTree* const>;

struct EntryOrderConfig {
  std::size_t min_challengers = 10;
  /// 0 keeps every rank.
  std::size_t max_rank = 0;
  bool first_time_only = false;
};

/// Bin k: the k-th entering challenger won a delta in that tree. With
/// first_time_only, `history` supplies every tree used to decide whether a
/// challenger appeared (commented or posted) anywhere earlier.
std::vector<BinnedRate> entry_order_table(TreeList trees, const EntryOrderConfig& cfg = {},
                                          TreeList history = {});

/// Bin k: paths involving only the root challenger and the OP on which the
/// root challenger wrote k comments; success = the path is a winning path.
std::vector<BinnedRate> back_and_forth_table(TreeList trees);

/// Bin floor(log2(unique challengers)); success = the OP awarded a delta.
std::vector<BinnedRate> conversion_by_challengers(TreeList trees);

struct SubtreeComparison {
  std::vector<BinnedRate> single;
  std::vector<BinnedRate> multiple;
};

/// Subtrees (root reply plus descendants, DeltaBot and award comments
/// excluded) with min_size..max_size comments, split by whether the non-OP
/// comments come from one author. Success = an award inside the subtree.
SubtreeComparison subtree_comparison(TreeList trees, std::size_t min_size = 2, std::size_t max_size = 4);

struct Attempt {
  std::string author;
  std::string tree_id;
  std::int64_t time = 0;
  bool success = false;
};

/// One attempt per (challenger, tree) with at least one root reply, timed by
/// the first root reply; sorted by (author, time, tree id).
std::vector<Attempt> challenger_attempts(TreeList trees);

/// Sizes of `n` items split into 4 time-ordered chunks, remainder to the earliest.
std::array<std::size_t, 4> chunk_sizes(std::size_t n);

struct ExperienceTables {
  /// Bin floor(log2(attempt count of the author)).
  std::vector<BinnedRate> by_attempts;
  /// Bin 1..4: lifetime quarter, authors with at least `min_attempts`.
  std::vector<BinnedRate> by_quarter;
};

ExperienceTables experience_tables(TreeList trees, std::size_t min_attempts = 16);

std::int64_t floor_log2(std::size_t n);

std::string rates_csv(std::span<const BinnedRate> rows);
std::string subtree_csv(const SubtreeComparison& cmp);

}  // namespace cmv::dynamics
