#include "treespace/tree.hpp"

#include <algorithm>
#include <bit>
#include <string>

namespace treespace {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::RootHasNoParent: return "RootHasNoParent";
    case ErrorCode::MissingRoot: return "MissingRoot";
    case ErrorCode::OrphanNode: return "OrphanNode";
    case ErrorCode::LevelCapExceeded: return "LevelCapExceeded";
    case ErrorCode::NonFiniteAttribute: return "NonFiniteAttribute";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::NotInSupport: return "NotInSupport";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::NotSubtree: return "NotSubtree";
    case ErrorCode::ZeroDirection: return "ZeroDirection";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "Error";
}

NodeIndex parent_index(NodeIndex k) {
  if (k <= 1) {
    throw Error(ErrorCode::RootHasNoParent, "node 1 is the root");
  }
  return k / 2;
}

int node_level(NodeIndex k) {
  return std::bit_width(k) - 1;
}

NodeIndex sibling_index(NodeIndex k) {
  if (k <= 1) {
    throw Error(ErrorCode::RootHasNoParent, "node 1 has no sibling");
  }
  return k ^ 1u;
}

TreeTopology TreeTopology::validate(std::vector<NodeIndex> indices,
                                    int level_cap) {
  if (level_cap < 0 || level_cap > kMaxLevelCap) {
    throw Error(ErrorCode::InvalidSpec,
                "level cap must be in [0, " + std::to_string(kMaxLevelCap) + "]");
  }
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  if (indices.empty() || indices.front() != 1) {
    throw Error(ErrorCode::MissingRoot, "index 1 must be present");
  }
  if (node_level(indices.back()) > level_cap) {
    throw Error(ErrorCode::LevelCapExceeded,
                "index " + std::to_string(indices.back()) + " is at level " +
                    std::to_string(node_level(indices.back())) +
                    " > cap " + std::to_string(level_cap));
  }
  TreeTopology t{std::move(indices)};
  for (NodeIndex k : t.indices_) {
    if (k > 1 && !t.contains(k / 2)) {
      throw Error(ErrorCode::OrphanNode,
                  "node " + std::to_string(k) + " lacks parent " +
                      std::to_string(k / 2));
    }
  }
  return t;
}

TreeTopology TreeTopology::from_sorted_unchecked(std::vector<NodeIndex> indices) {
  return TreeTopology{std::move(indices)};
}

bool TreeTopology::contains(NodeIndex k) const {
  return std::binary_search(indices_.begin(), indices_.end(), k);
}

std::size_t TreeTopology::position_of(NodeIndex k) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), k);
  if (it == indices_.end() || *it != k) return npos;
  return static_cast<std::size_t>(it - indices_.begin());
}

bool TreeTopology::is_leaf(NodeIndex k) const {
  return !contains(2 * k) && !contains(2 * k + 1);
}

TreeTopology validate_topology(std::vector<NodeIndex> indices, int level_cap) {
  return TreeTopology::validate(std::move(indices), level_cap);
}

TreeTopology union_tree(const TreeTopology& s, const TreeTopology& t) {
  std::vector<NodeIndex> out;
  out.reserve(s.node_count() + t.node_count());
  std::set_union(s.indices().begin(), s.indices().end(), t.indices().begin(),
                 t.indices().end(), std::back_inserter(out));
  return TreeTopology::from_sorted_unchecked(std::move(out));
}

TreeTopology intersection_tree(const TreeTopology& s, const TreeTopology& t) {
  std::vector<NodeIndex> out;
  std::set_intersection(s.indices().begin(), s.indices().end(),
                        t.indices().begin(), t.indices().end(),
                        std::back_inserter(out));
  return TreeTopology::from_sorted_unchecked(std::move(out));
}

bool is_topological_subtree(const TreeTopology& s, const TreeTopology& t) {
  return std::includes(t.indices().begin(), t.indices().end(),
                       s.indices().begin(), s.indices().end());
}

AttributedTree::AttributedTree(TreeTopology topology, Eigen::MatrixXd attrs)
    : topology_(std::move(topology)), attrs_(std::move(attrs)) {
  if (attrs_.rows() < 1) {
    throw Error(ErrorCode::ArityMismatch, "arity must be positive");
  }
  if (static_cast<std::size_t>(attrs_.cols()) != topology_.node_count()) {
    throw Error(ErrorCode::ArityMismatch,
                "attribute matrix has " + std::to_string(attrs_.cols()) +
                    " columns for " + std::to_string(topology_.node_count()) +
                    " nodes");
  }
  if (!attrs_.allFinite()) {
    throw Error(ErrorCode::NonFiniteAttribute,
                "attributes must be finite reals");
  }
}

Eigen::MatrixXd::ConstColXpr AttributedTree::attr(NodeIndex k) const {
  std::size_t pos = topology_.position_of(k);
  if (pos == TreeTopology::npos) {
    throw Error(ErrorCode::UnknownNode,
                "node " + std::to_string(k) + " is not in the tree");
  }
  return attrs_.col(static_cast<Eigen::Index>(pos));
}

bool is_attribute_subtree(const AttributedTree& s, const AttributedTree& t,
                          double tol) {
  if (s.arity() != t.arity()) {
    throw Error(ErrorCode::ArityMismatch, "trees must share arity");
  }
  if (!is_topological_subtree(s.topology(), t.topology())) return false;
  for (NodeIndex k : s.topology().indices()) {
    if (((s.attr(k) - t.attr(k)).array().abs() > tol).any()) return false;
  }
  return true;
}

AttributedTree restrict_attributes(const AttributedTree& source,
                                   const TreeTopology& topology) {
  Eigen::MatrixXd attrs(source.arity(),
                        static_cast<Eigen::Index>(topology.node_count()));
  Eigen::Index dst = 0;
  for (NodeIndex k : topology.indices()) {
    attrs.col(dst++) = source.attr(k);
  }
  return AttributedTree(topology, std::move(attrs));
}

TreeSample::TreeSample(std::vector<AttributedTree> trees)
    : trees_(std::move(trees)) {
  if (trees_.empty()) {
    throw Error(ErrorCode::InvalidSpec, "sample must be nonempty");
  }
  arity_ = trees_.front().arity();
  for (const auto& t : trees_) {
    if (t.arity() != arity_) {
      throw Error(ErrorCode::ArityMismatch, "all trees must share one arity");
    }
  }
}

TreeTopology support_tree(const TreeSample& sample) {
  TreeTopology acc = sample[0].topology();
  for (std::size_t i = 1; i < sample.size(); ++i) {
    acc = union_tree(acc, sample[i].topology());
  }
  return acc;
}

}  // namespace treespace
