#pragma once

// Discussion-tree ingestion: record parsing, text normalization, delta
// attribution, path enumeration and corpus-level filters.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cmv::corpus {

inline constexpr std::string_view kQuoteToken = "⟦QUOTE⟧";
inline constexpr std::string_view kUrlToken = "⟦URL⟧";
inline constexpr std::string_view kDeletedAuthor = "[deleted]";

// ---------------------------------------------------------------------------
// Text normalization
// ---------------------------------------------------------------------------

struct NormalizedText {
  std::string text;
  /// URLs in the order their sentinels appear in `text`.
  std::vector<std::string> urls;
};

/// Removes edit blocks, replaces blockquote lines and URLs by sentinel tokens.
class TextNormalizer {
 public:
  static constexpr std::string_view kDefaultEditPattern = R"(^(EDIT|Edit|edit)[\s*_]*[:\d])";

  explicit TextNormalizer(std::string edit_pattern = std::string(kDefaultEditPattern));

  NormalizedText normalize_detailed(std::string_view raw) const;
  std::string normalize(std::string_view raw) const { return normalize_detailed(raw).text; }

  const std::string& edit_pattern() const { return pattern_; }

 private:
  std::string pattern_;
  std::regex edit_re_;
};

std::string normalize_text(std::string_view body_raw);

/// Finds http(s):// and www. URLs; `begin`/`end` are byte offsets.
struct UrlSpan {
  std::size_t begin;
  std::size_t end;
};
std::vector<UrlSpan> find_urls(std::string_view text);

bool is_blockquote_line(std::string_view line);

// ---------------------------------------------------------------------------
// Records (normalized line-delimited JSON schema)
// ---------------------------------------------------------------------------

struct CommentRecord {
  std::string id;
  std::string author;
  std::int64_t created_utc = 0;
  std::string body;
  std::optional<std::string> parent_id;
};

struct TreeRecord {
  std::string id;
  std::string title;
  std::string author;
  std::string body;
  std::int64_t created_utc = 0;
  std::vector<CommentRecord> comments;
};

// ---------------------------------------------------------------------------
// Trees
// ---------------------------------------------------------------------------

struct CommentNode {
  std::string id;
  std::string author;
  std::int64_t created_utc = 0;
  std::optional<std::string> parent_id;
  std::string body_raw;
  std::string body_clean;
  bool is_op = false;
  bool is_deltabot = false;
};

struct DeltaAward {
  std::string awarded_to_node;
  std::string awarded_to_author;
  std::string awarding_node;
  /// A DeltaBot reply exists under the awarding comment.
  bool confirmed = false;

  friend bool operator==(const DeltaAward&, const DeltaAward&) = default;
};

struct ParseOptions {
  std::vector<std::string> delta_markers{"∆", "Δ", "&#8710;", "!delta"};
  std::string deltabot_name = "DeltaBot";
  std::string edit_pattern = std::string(TextNormalizer::kDefaultEditPattern);
};

class DiscussionTree;

/// Awards for OP replies containing a delta marker; see detect_delta_awards.
struct DeltaDetection {
  std::vector<DeltaAward> awards;
  /// Ids of OP replies carrying a marker directly under the original post.
  std::vector<std::string> dangling;
};

/// Immutable discussion tree. Comment indices refer to positions in
/// `nodes()`, which is sorted by (created_utc, id). The original post is held
/// separately in `root()`.
class DiscussionTree {
 public:
  const std::string& id() const { return root_.id; }
  const CommentNode& root() const { return root_; }
  const std::string& title() const { return title_; }
  const std::string& op_author() const { return root_.author; }
  std::int64_t created_utc() const { return root_.created_utc; }

  std::span<const CommentNode> nodes() const { return nodes_; }
  const CommentNode& node(std::size_t i) const { return nodes_[i]; }
  std::optional<std::size_t> index_of(std::string_view id) const;

  /// nullopt for root replies.
  std::optional<std::size_t> parent(std::size_t i) const { return parent_[i]; }
  std::span<const std::size_t> children(std::size_t i) const { return children_[i]; }
  std::span<const std::size_t> root_replies() const { return root_replies_; }
  /// Index of the root reply whose subtree contains node i.
  std::size_t subtree_of(std::size_t i) const { return subtree_[i]; }

  const std::vector<DeltaAward>& delta_awards() const { return awards_; }
  std::size_t orphan_count() const { return orphans_; }
  std::size_t dangling_delta_count() const { return dangling_; }

  /// Node received a delta award.
  bool is_awarded(std::size_t i) const { return awarded_[i]; }
  /// Node is an OP comment that granted an award.
  bool is_award_comment(std::size_t i) const { return award_comment_[i]; }
  /// DeltaBot replies and award comments are not part of any path.
  bool excluded_from_paths(std::size_t i) const {
    return nodes_[i].is_deltabot || award_comment_[i];
  }

  /// Not the OP, not DeltaBot and not "[deleted]".
  bool is_challenger(std::string_view author) const;
  /// Unique challengers ordered by their first comment (ties by comment id).
  std::vector<std::string> challengers_by_entry() const;
  std::size_t challenger_reply_count() const;
  std::size_t op_reply_count() const;
  /// Latest OP comment timestamp, excluding the original post.
  std::optional<std::int64_t> last_op_comment_utc() const;
  bool author_won_delta(std::string_view author) const;
  bool has_delta() const { return !awards_.empty(); }

  const std::string& deltabot_name() const { return deltabot_; }

 private:
  friend DiscussionTree parse_tree(const TreeRecord&, const ParseOptions&);

  std::string title_;
  CommentNode root_;
  std::vector<CommentNode> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::optional<std::size_t>> parent_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> root_replies_;
  std::vector<std::size_t> subtree_;
  std::vector<DeltaAward> awards_;
  std::vector<bool> awarded_;
  std::vector<bool> award_comment_;
  std::string deltabot_;
  std::size_t orphans_ = 0;
  std::size_t dangling_ = 0;
};

/// Throws Error(DeletedAuthor) when the OP is "[deleted]" and
/// Error(MalformedRecord) on structural problems (missing ids, duplicates).
DiscussionTree parse_tree(const TreeRecord& record, const ParseOptions& options = {});

/// Pure function of the tree structure; ignores any awards already attached.
/// The result is sorted by (awarding comment time, id), so it does not depend
/// on node input order.
DeltaDetection detect_delta_awards(const DiscussionTree& tree,
                                   std::span<const std::string> markers);

bool contains_delta_marker(std::string_view body_raw, std::span<const std::string> markers);

// ---------------------------------------------------------------------------
// Paths and rooted path-units
// ---------------------------------------------------------------------------

using Path = std::vector<std::size_t>;

/// One path per leaf, from the root reply down, with DeltaBot replies and
/// award comments removed. Empty and duplicate sequences are dropped.
std::vector<Path> enumerate_paths(const DiscussionTree& tree);

struct AnalysisPath {
  Path nodes;
  bool winning = false;
};

/// Paths used for outcome statistics. A subtree holding an award contributes
/// only its winning paths, i.e. root reply to awarded node; other subtrees
/// contribute all enumerate_paths entries.
std::vector<AnalysisPath> analysis_paths(const DiscussionTree& tree);

struct RootedPathUnit {
  std::size_t root_reply = 0;
  std::string author;
  /// Comments by the root challenger along the path, in path order.
  std::vector<std::size_t> nodes;
  bool delta_winning = false;
};

std::vector<RootedPathUnit> rooted_path_units(const DiscussionTree& tree);

std::vector<std::string> node_ids(const DiscussionTree& tree, std::span<const std::size_t> nodes);

// ---------------------------------------------------------------------------
// Filters
// ---------------------------------------------------------------------------

struct CorpusFilter {
  std::size_t min_challenger_replies = 10;
  std::size_t min_op_replies = 1;
  std::size_t min_unique_challengers = 0;
  std::vector<std::string> exclude_body_words;
};

bool passes_filter(const DiscussionTree& tree, const CorpusFilter& filter);
std::vector<const DiscussionTree*> filter_trees(std::span<const DiscussionTree> trees,
                                                const CorpusFilter& filter);

// ---------------------------------------------------------------------------
// I/O
// ---------------------------------------------------------------------------

struct Diagnostic {
  std::size_t line = 0;
  std::string kind;
  std::string message;
};

struct ReadResult {
  std::vector<DiscussionTree> trees;
  std::vector<Diagnostic> diagnostics;
  std::size_t lines = 0;
  std::size_t deleted_author = 0;
  std::size_t malformed = 0;
  std::size_t orphans = 0;
};

enum class InputFormat { Normalized, CmvDump };

TreeRecord record_from_json(std::string_view json_line);
/// Converts a Reddit submission object (nested or flat comments) into the
/// normalized schema.
TreeRecord record_from_cmv_dump(std::string_view json_line);

std::string record_to_json(const TreeRecord& record);
TreeRecord to_record(const DiscussionTree& tree);

/// Reads a line-delimited file. Malformed and deleted-OP records are skipped
/// and reported; the input file being unreadable throws.
ReadResult read_corpus(const std::string& path, InputFormat format, const ParseOptions& options = {});
ReadResult parse_corpus_lines(std::span<const std::string> lines, InputFormat format,
                              const ParseOptions& options = {});

std::string awards_csv(std::span<const DiscussionTree> trees);

}  // namespace cmv::corpus
