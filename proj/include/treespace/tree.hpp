#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "treespace/error.hpp"

namespace treespace {

/// Level-order index of a binary-tree node: root = 1, left child = 2k,
/// right child = 2k + 1. The index set of a tree fully determines its
/// topology.
using NodeIndex = std::uint32_t;

/// Default bound on node levels (root is level 0).
inline constexpr int kDefaultLevelCap = 16;
/// Hard bound so indices fit a 32-bit NodeIndex.
inline constexpr int kMaxLevelCap = 30;

/// floor(k / 2). Throws RootHasNoParent for k = 1.
NodeIndex parent_index(NodeIndex k);

/// Level of index k, i.e. floor(log2 k). The root is level 0.
int node_level(NodeIndex k);

/// The other child of k's parent (2k <-> 2k+1). Throws for the root.
NodeIndex sibling_index(NodeIndex k);

/// A binary-tree topology as a set of level-order indices closed under the
/// parent map. Always contains the root; iteration is in ascending index
/// order. Instances are immutable.
class TreeTopology {
 public:
  /// Validates an arbitrary index set. Throws MissingRoot, OrphanNode or
  /// LevelCapExceeded when the set is not the index set of a binary tree
  /// within the level cap.
  static TreeTopology validate(std::vector<NodeIndex> indices,
                               int level_cap = kDefaultLevelCap);

  /// Trusted constructor for sets already known to be parent-closed
  /// (results of union/intersection). `indices` must be sorted and unique.
  static TreeTopology from_sorted_unchecked(std::vector<NodeIndex> indices);

  std::span<const NodeIndex> indices() const { return indices_; }
  std::size_t node_count() const { return indices_.size(); }
  bool contains(NodeIndex k) const;

  /// Position of k in ascending order, or npos when absent.
  std::size_t position_of(NodeIndex k) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  NodeIndex max_index() const { return indices_.back(); }
  int max_level() const { return node_level(indices_.back()); }

  /// True iff k has no children in this topology.
  bool is_leaf(NodeIndex k) const;

  bool operator==(const TreeTopology&) const = default;

 private:
  explicit TreeTopology(std::vector<NodeIndex> indices)
      : indices_(std::move(indices)) {}

  std::vector<NodeIndex> indices_;
};

/// See TreeTopology::validate.
TreeTopology validate_topology(std::vector<NodeIndex> indices,
                               int level_cap = kDefaultLevelCap);

TreeTopology union_tree(const TreeTopology& s, const TreeTopology& t);
TreeTopology intersection_tree(const TreeTopology& s, const TreeTopology& t);

/// True iff s's index set is a subset of t's.
bool is_topological_subtree(const TreeTopology& s, const TreeTopology& t);

/// A topology with a fixed-arity attribute vector at every node. Attributes
/// are stored as a (arity x node_count) matrix whose column order matches
/// the ascending index order of the topology.
class AttributedTree {
 public:
  AttributedTree(TreeTopology topology, Eigen::MatrixXd attrs);

  const TreeTopology& topology() const { return topology_; }
  int arity() const { return static_cast<int>(attrs_.rows()); }
  const Eigen::MatrixXd& attrs() const { return attrs_; }

  /// Attribute vector of node k. Throws UnknownNode when k is absent.
  Eigen::MatrixXd::ConstColXpr attr(NodeIndex k) const;

  bool operator==(const AttributedTree& other) const {
    return topology_ == other.topology_ && attrs_ == other.attrs_;
  }

 private:
  TreeTopology topology_;
  Eigen::MatrixXd attrs_;
};

/// True iff s is a topological subtree of t and their attributes agree
/// within `tol` (absolute, per coordinate) on every node of s.
bool is_attribute_subtree(const AttributedTree& s, const AttributedTree& t,
                          double tol = 0.0);

/// The attribute subtree of `source` over `topology`. Throws UnknownNode
/// when `topology` has a node absent from `source`.
AttributedTree restrict_attributes(const AttributedTree& source,
                                   const TreeTopology& topology);

/// An ordered sample of attributed trees sharing one arity.
class TreeSample {
 public:
  explicit TreeSample(std::vector<AttributedTree> trees);

  const std::vector<AttributedTree>& trees() const { return trees_; }
  std::size_t size() const { return trees_.size(); }
  int arity() const { return arity_; }
  const AttributedTree& operator[](std::size_t i) const { return trees_[i]; }

 private:
  std::vector<AttributedTree> trees_;
  int arity_;
};

/// Union of all topologies in the sample; the horizon of every analysis.
TreeTopology support_tree(const TreeSample& sample);

}  // namespace treespace
