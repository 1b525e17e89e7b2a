#pragma once

// Paired argument tasks (Jaccard-matched winning vs. non-winning units) and
// the opinion-malleability dataset.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmv/corpus.hpp"
#include "cmv/features.hpp"
#include "cmv/lexicon.hpp"

namespace cmv::pairing {

enum class Variant { RootReply, FullPath, RootTruncated };
inline constexpr std::array<Variant, 3> kVariants{Variant::RootReply, Variant::FullPath, Variant::RootTruncated};
/// "root_reply", "full_path", "root_truncated".
std::string_view variant_name(Variant v);
/// Accepts underscores or hyphens.
Variant parse_variant(std::string_view name);

enum class Split { Train, Heldout, Outside };
std::string_view split_name(Split s);
Split parse_split(std::string_view name);

struct SplitConfig {
  std::int64_t train_begin = 1356998400;  // 2013-01-01
  std::int64_t boundary = 1431043200;     // 2015-05-08
  std::int64_t heldout_end = 1441152000;  // 2015-09-02, exclusive
};
/// Classified by the original post's timestamp.
Split split_of(std::int64_t created_utc, const SplitConfig& cfg = {});

struct ArgumentText {
  features::Document doc;
  std::vector<std::string> node_ids;
};

struct UnitRef {
  std::string author;
  std::string root_reply_id;
  std::int64_t root_reply_utc = 0;
  std::vector<std::string> node_ids;
  /// 1-based position of the author among the tree's challengers by entry.
  std::size_t entry_rank = 0;
};

struct ArgumentPair {
  std::string tree_id;
  std::string op_author;
  std::int64_t created_utc = 0;
  Split split = Split::Outside;
  UnitRef positive;
  UnitRef negative;
  double jaccard_score = 0.0;
  features::Document op;
  /// Indexed by Variant; `first` is the positive member.
  std::array<std::pair<ArgumentText, ArgumentText>, 3> texts;

  const std::pair<ArgumentText, ArgumentText>& variant(Variant v) const {
    return texts[static_cast<std::size_t>(v)];
  }
};

struct PairConfig {
  std::size_t min_unique_challengers = 10;
  std::size_t min_words = 50;
  std::size_t min_negatives = 3;
  std::string edit_pattern = std::string(corpus::TextNormalizer::kDefaultEditPattern);
};

struct PairDiagnostics {
  std::size_t trees_considered = 0;
  std::size_t trees_few_challengers = 0;
  std::size_t trees_few_negatives = 0;
  std::size_t winners_short = 0;
  std::size_t winners_no_candidate = 0;
  std::size_t trees_outside_split = 0;
  std::vector<std::string> messages;
};

/// Word set used for matching: root-reply words minus stopwords.
std::vector<std::string> matching_words(std::string_view clean_text, const lexicon::Lexicon& stopwords);

/// Pairs for one tree, ordered by positive root-reply time.
std::vector<ArgumentPair> build_tree_pairs(const corpus::DiscussionTree& tree, const lexicon::Lexicon& stopwords,
                                           const PairConfig& cfg = {}, PairDiagnostics* diag = nullptr);

/// Pairs over a corpus, restricted to trees inside the train or heldout
/// period, sorted by (tree id, positive root-reply time).
std::vector<ArgumentPair> build_pairs(std::span<const corpus::DiscussionTree> trees,
                                      const lexicon::Lexicon& stopwords, const PairConfig& cfg = {},
                                      const SplitConfig& split = {}, PairDiagnostics* diag = nullptr);

/// Fills the root_truncated texts from the root_reply texts: the longer
/// reply is cut to the shorter one's word count.
void truncate_pair(ArgumentPair& pair);

struct MalleabilityInstance {
  std::string tree_id;
  std::string op_author;
  std::int64_t created_utc = 0;
  Split split = Split::Outside;
  bool label = false;
  /// Title and body.
  features::Document op;
};

corpus::CorpusFilter malleability_filter();

std::vector<MalleabilityInstance> build_malleability(std::span<const corpus::DiscussionTree> trees,
                                                     const SplitConfig& split = {},
                                                     const corpus::CorpusFilter& filter = malleability_filter());

/// Original post as one document: title, a blank line, then the body.
features::Document op_document(const corpus::DiscussionTree& tree, const corpus::TextNormalizer& normalizer);

std::string pair_to_json(const ArgumentPair& pair);
ArgumentPair pair_from_json(std::string_view line);

}  // namespace cmv::pairing
