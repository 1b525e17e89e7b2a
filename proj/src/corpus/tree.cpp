#include <algorithm>
#include <unordered_set>

#include "cmv/corpus.hpp"
#include "cmv/error.hpp"
#include "cmv/util.hpp"

namespace cmv::corpus {

namespace {

bool node_before(const CommentNode& a, const CommentNode& b) {
  if (a.created_utc != b.created_utc) return a.created_utc < b.created_utc;
  return a.id < b.id;
}

}  // namespace

bool contains_delta_marker(std::string_view body_raw, std::span<const std::string> markers) {
  for (const auto line : split_lines(body_raw)) {
    if (is_blockquote_line(line)) continue;
    const auto lower = to_lower_ascii(line);
    for (const auto& m : markers) {
      if (m.empty()) continue;
      if (lower.find(to_lower_ascii(m)) != std::string::npos) return true;
    }
  }
  return false;
}

DiscussionTree parse_tree(const TreeRecord& record, const ParseOptions& options) {
  if (record.id.empty()) throw Error(Errc::MalformedRecord, "tree without id");
  if (record.author == kDeletedAuthor) {
    throw Error(Errc::DeletedAuthor, "original post " + record.id + " has author [deleted]");
  }
  if (record.author.empty()) {
    throw Error(Errc::MalformedRecord, "original post " + record.id + " has no author");
  }

  const TextNormalizer normalizer(options.edit_pattern);
  DiscussionTree tree;
  tree.title_ = record.title;
  tree.deltabot_ = options.deltabot_name;
  tree.root_.id = record.id;
  tree.root_.author = record.author;
  tree.root_.created_utc = record.created_utc;
  tree.root_.body_raw = record.body;
  tree.root_.body_clean = normalizer.normalize(record.body);
  tree.root_.is_op = true;

  // Resolve parent links; anything not reachable from the root is an orphan.
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < record.comments.size(); ++i) {
    const auto& c = record.comments[i];
    if (c.id.empty()) throw Error(Errc::MalformedRecord, "comment without id in tree " + record.id);
    if (c.id == record.id || !by_id.emplace(c.id, i).second) {
      throw Error(Errc::MalformedRecord, "duplicate node id " + c.id + " in tree " + record.id);
    }
  }
  std::vector<std::vector<std::size_t>> kids(record.comments.size());
  std::vector<std::size_t> top;
  for (std::size_t i = 0; i < record.comments.size(); ++i) {
    const auto& pid = record.comments[i].parent_id;
    if (!pid || pid->empty() || *pid == record.id) {
      top.push_back(i);
    } else if (auto it = by_id.find(*pid); it != by_id.end()) {
      kids[it->second].push_back(i);
    }
  }
  std::vector<bool> reachable(record.comments.size(), false);
  std::vector<std::size_t> stack(top.begin(), top.end());
  while (!stack.empty()) {
    const auto i = stack.back();
    stack.pop_back();
    if (reachable[i]) continue;
    reachable[i] = true;
    for (auto k : kids[i]) stack.push_back(k);
  }

  for (std::size_t i = 0; i < record.comments.size(); ++i) {
    if (!reachable[i]) {
      ++tree.orphans_;
      continue;
    }
    const auto& c = record.comments[i];
    CommentNode n;
    n.id = c.id;
    n.author = c.author.empty() ? std::string(kDeletedAuthor) : c.author;
    n.created_utc = c.created_utc;
    if (c.parent_id && !c.parent_id->empty() && *c.parent_id != record.id) n.parent_id = c.parent_id;
    n.body_raw = c.body;
    n.body_clean = normalizer.normalize(c.body);
    n.is_op = n.author == record.author;
    n.is_deltabot = n.author == options.deltabot_name;
    tree.nodes_.push_back(std::move(n));
  }
  std::sort(tree.nodes_.begin(), tree.nodes_.end(), node_before);

  const auto n = tree.nodes_.size();
  for (std::size_t i = 0; i < n; ++i) tree.index_.emplace(tree.nodes_[i].id, i);
  tree.parent_.assign(n, std::nullopt);
  tree.children_.assign(n, {});
  tree.subtree_.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pid = tree.nodes_[i].parent_id;
    if (!pid) {
      tree.root_replies_.push_back(i);
    } else {
      const auto p = tree.index_.at(*pid);
      tree.parent_[i] = p;
      tree.children_[p].push_back(i);
    }
  }
  // Nodes are time-sorted, but a child may carry an earlier timestamp than
  // its parent in scraped data, so subtree membership walks the parent chain.
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t cur = i;
    while (tree.parent_[cur]) cur = *tree.parent_[cur];
    tree.subtree_[i] = cur;
  }

  const auto detection = detect_delta_awards(tree, options.delta_markers);
  tree.awards_ = detection.awards;
  tree.dangling_ = detection.dangling.size();
  tree.awarded_.assign(n, false);
  tree.award_comment_.assign(n, false);
  for (const auto& a : tree.awards_) {
    tree.awarded_[tree.index_.at(a.awarded_to_node)] = true;
    tree.award_comment_[tree.index_.at(a.awarding_node)] = true;
  }
  return tree;
}

DeltaDetection detect_delta_awards(const DiscussionTree& tree, std::span<const std::string> markers) {
  DeltaDetection out;
  const auto nodes = tree.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& c = nodes[i];
    if (c.author != tree.op_author()) continue;
    if (!contains_delta_marker(c.body_raw, markers)) continue;
    const auto p = tree.parent(i);
    if (!p) {
      out.dangling.push_back(c.id);
      continue;
    }
    const auto& target = nodes[*p];
    if (target.author == tree.op_author() || target.is_deltabot) continue;
    DeltaAward award;
    award.awarded_to_node = target.id;
    award.awarded_to_author = target.author;
    award.awarding_node = c.id;
    for (auto k : tree.children(i)) {
      if (nodes[k].is_deltabot) award.confirmed = true;
    }
    out.awards.push_back(std::move(award));
  }
  // nodes() is already sorted by (time, id); keep that order explicit.
  std::sort(out.awards.begin(), out.awards.end(), [&](const DeltaAward& a, const DeltaAward& b) {
    const auto& na = nodes[*tree.index_of(a.awarding_node)];
    const auto& nb = nodes[*tree.index_of(b.awarding_node)];
    return node_before(na, nb);
  });
  return out;
}

std::optional<std::size_t> DiscussionTree::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool DiscussionTree::is_challenger(std::string_view author) const {
  return author != op_author() && author != deltabot_ && author != kDeletedAuthor && !author.empty();
}

std::vector<std::string> DiscussionTree::challengers_by_entry() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& n : nodes_) {
    if (is_challenger(n.author) && seen.insert(n.author).second) out.push_back(n.author);
  }
  return out;
}

std::size_t DiscussionTree::challenger_reply_count() const {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [&](const CommentNode& n) { return is_challenger(n.author); }));
}

std::size_t DiscussionTree::op_reply_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const CommentNode& n) { return n.is_op; }));
}

std::optional<std::int64_t> DiscussionTree::last_op_comment_utc() const {
  std::optional<std::int64_t> last;
  for (const auto& n : nodes_) {
    if (n.is_op && (!last || n.created_utc > *last)) last = n.created_utc;
  }
  return last;
}

bool DiscussionTree::author_won_delta(std::string_view author) const {
  return std::any_of(awards_.begin(), awards_.end(),
                     [&](const DeltaAward& a) { return a.awarded_to_author == author; });
}

bool passes_filter(const DiscussionTree& tree, const CorpusFilter& filter) {
  if (tree.challenger_reply_count() < filter.min_challenger_replies) return false;
  if (tree.op_reply_count() < filter.min_op_replies) return false;
  if (filter.min_unique_challengers > 0 &&
      tree.challengers_by_entry().size() < filter.min_unique_challengers) {
    return false;
  }
  for (const auto& w : filter.exclude_body_words) {
    if (contains_word_ci(tree.title(), w) || contains_word_ci(tree.root().body_clean, w)) {
      return false;
    }
  }
  return true;
}

std::vector<const DiscussionTree*> filter_trees(std::span<const DiscussionTree> trees,
                                                const CorpusFilter& filter) {
  std::vector<const DiscussionTree*> out;
  for (const auto& t : trees) {
    if (passes_filter(t, filter)) out.push_back(&t);
  }
  return out;
}

}  // namespace cmv::corpus
