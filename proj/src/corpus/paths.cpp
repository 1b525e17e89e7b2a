#include <algorithm>
#include <set>

#include "cmv/corpus.hpp"

namespace cmv::corpus {

namespace {

void collect_leaf_paths(const DiscussionTree& tree, std::size_t start, std::vector<Path>& out,
                        std::set<Path>& seen) {
  // Iterative DFS keeping the current chain; children are visited in time order.
  struct Frame {
    std::size_t node;
    std::size_t next_child;
  };
  std::vector<Frame> stack{{start, 0}};
  std::vector<std::size_t> chain{start};
  while (!stack.empty()) {
    auto& top = stack.back();
    const auto kids = tree.children(top.node);
    if (kids.empty() && top.next_child == 0) {
      Path p;
      for (auto n : chain) {
        if (!tree.excluded_from_paths(n)) p.push_back(n);
      }
      if (!p.empty() && seen.insert(p).second) out.push_back(std::move(p));
    }
    if (top.next_child < kids.size()) {
      const auto child = kids[top.next_child++];
      stack.push_back({child, 0});
      chain.push_back(child);
    } else {
      stack.pop_back();
      chain.pop_back();
    }
  }
}

Path chain_to(const DiscussionTree& tree, std::size_t node) {
  Path p;
  std::optional<std::size_t> cur = node;
  while (cur) {
    if (!tree.excluded_from_paths(*cur)) p.push_back(*cur);
    cur = tree.parent(*cur);
  }
  std::reverse(p.begin(), p.end());
  return p;
}

}  // namespace

std::vector<Path> enumerate_paths(const DiscussionTree& tree) {
  std::vector<Path> out;
  std::set<Path> seen;
  for (auto r : tree.root_replies()) collect_leaf_paths(tree, r, out, seen);
  return out;
}

std::vector<AnalysisPath> analysis_paths(const DiscussionTree& tree) {
  std::vector<AnalysisPath> out;
  std::set<Path> seen;
  for (auto r : tree.root_replies()) {
    std::vector<std::size_t> awarded;
    for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
      if (tree.subtree_of(i) == r && tree.is_awarded(i)) awarded.push_back(i);
    }
    if (awarded.empty()) {
      std::vector<Path> leaf_paths;
      collect_leaf_paths(tree, r, leaf_paths, seen);
      for (auto& p : leaf_paths) out.push_back({std::move(p), false});
      continue;
    }
    for (auto a : awarded) {
      auto p = chain_to(tree, a);
      if (!p.empty() && seen.insert(p).second) out.push_back({std::move(p), true});
    }
  }
  return out;
}

std::vector<RootedPathUnit> rooted_path_units(const DiscussionTree& tree) {
  std::vector<RootedPathUnit> units;
  std::set<std::vector<std::size_t>> seen;
  for (const auto& ap : analysis_paths(tree)) {
    const auto head = ap.nodes.front();
    const auto& author = tree.node(head).author;
    if (tree.node(head).is_op || tree.node(head).is_deltabot) continue;
    RootedPathUnit u;
    u.root_reply = head;
    u.author = author;
    if (author == kDeletedAuthor) {
      // Distinct deleted accounts share one name; only the root reply is attributable.
      u.nodes = {head};
    } else {
      for (auto n : ap.nodes) {
        if (tree.node(n).author == author) u.nodes.push_back(n);
      }
    }
    u.delta_winning = std::any_of(u.nodes.begin(), u.nodes.end(),
                                  [&](std::size_t n) { return tree.is_awarded(n); });
    // A winning path whose award went to another participant says nothing
    // about the root challenger.
    if (ap.winning && !u.delta_winning) continue;
    auto key = u.nodes;
    std::sort(key.begin(), key.end());
    if (!seen.insert(std::move(key)).second) continue;
    units.push_back(std::move(u));
  }
  std::stable_sort(units.begin(), units.end(), [](const RootedPathUnit& a, const RootedPathUnit& b) {
    if (a.root_reply != b.root_reply) return a.root_reply < b.root_reply;
    return a.nodes < b.nodes;
  });
  return units;
}

std::vector<std::string> node_ids(const DiscussionTree& tree, std::span<const std::size_t> nodes) {
  std::vector<std::string> ids;
  ids.reserve(nodes.size());
  for (auto n : nodes) ids.push_back(tree.node(n).id);
  return ids;
}

}  // namespace cmv::corpus
