#pragma once

#include <Eigen/Dense>

#include <vector>

#include "treespace/metric.hpp"
#include "treespace/tree.hpp"

namespace treespace {

/// Per-node occurrence counts over the support of a sample.
struct NodeCountTable {
  TreeTopology support;
  std::vector<int> counts;  // ascending support order
  int sample_size = 0;

  /// Number of sample trees containing k; 0 when k is outside the support.
  int count_of(NodeIndex k) const;
};

NodeCountTable node_counts(const TreeSample& sample);

/// The set of minimizers of sum_i d_I(., t_i), characterized by the
/// majority rule: a topology is a median iff it consists of `required`
/// (nodes in more than half the sample) plus any parent-closed subset of
/// `optional` (nodes in exactly half the sample).
struct MedianFamily {
  TreeTopology required;
  std::vector<NodeIndex> optional;  // ascending; empty for odd sample sizes

  /// Number of median topologies; saturates at SIZE_MAX on overflow.
  std::size_t member_count() const;
};

MedianFamily median_family(const TreeSample& sample);

/// All median topologies in lexicographic order of their index sequences.
/// Throws InvalidSpec when the optional set is too large to enumerate
/// (more than 20 nodes).
std::vector<TreeTopology> enumerate_medians(const MedianFamily& family);

/// The unique fewest-node median: the required nodes only.
TreeTopology minimal_median_tree(const TreeSample& sample);

/// Per-node sample means over the trees containing each node, for every
/// node of `topology`. Column order matches the topology. Throws
/// NotInSupport when a node of `topology` appears in no sample tree.
Eigen::MatrixXd mean_attributes(const TreeSample& sample,
                                const TreeTopology& topology);

/// Minimal median topology with per-node mean attributes; the recommended
/// deterministic centerpoint.
AttributedTree median_mean_tree(const TreeSample& sample);

/// Support topology with per-node mean attributes. The median-mean tree is
/// always an attribute subtree of this tree.
AttributedTree average_support_tree(const TreeSample& sample);

/// Total variation of a sample about a center, split into its topology
/// part (sum of integer distances) and attribute part (sum of squared
/// fractional distances).
struct TotalVariation {
  double total = 0.0;
  double structure = 0.0;
  double attribute = 0.0;
};

TotalVariation total_variation(const TreeSample& sample,
                               const AttributedTree& center,
                               const WeightScheme& w);

}  // namespace treespace
