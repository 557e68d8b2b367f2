#pragma once

#include <Eigen/Dense>

#include <map>

#include "treespace/tree.hpp"

namespace treespace {

enum class WeightKind {
  /// alpha_k = 2^-(2i+1) where i is the level of k. Level sums halve with
  /// depth, so the total over any support stays below 1.
  Exponential,
  /// alpha_k = 1 / |support|, uniform over the support tree.
  Equal,
  /// Caller-supplied positive weights with total at most 1.
  Explicit,
};

const char* weight_kind_name(WeightKind kind);

/// Positive per-node weights materialized over a fixed support topology.
/// The total never exceeds 1, which caps the attribute part of the metric
/// at 1 for attribute values bounded by 1/(2 sqrt(arity)).
class WeightScheme {
 public:
  static WeightScheme exponential(const TreeTopology& support);
  static WeightScheme equal(const TreeTopology& support);
  /// Throws InvalidWeights unless `weights` is positive and finite on
  /// exactly the support indices and sums to at most 1 (1e-12 slack).
  static WeightScheme explicit_weights(
      const TreeTopology& support, const std::map<NodeIndex, double>& weights);

  WeightKind kind() const { return kind_; }
  const TreeTopology& support() const { return support_; }

  /// Weight of node k. Throws NotInSupport when k is outside the support.
  double at(NodeIndex k) const;

  /// Weights in ascending support order.
  const Eigen::VectorXd& values() const { return values_; }
  double total() const { return values_.sum(); }

  /// sqrt of the per-slot weights, expanded to one entry per (node, slot)
  /// pair in ascending (node, slot) order; length = support size * arity.
  Eigen::VectorXd slot_scale(int arity) const;

 private:
  WeightScheme(WeightKind kind, TreeTopology support, Eigen::VectorXd values);

  WeightKind kind_;
  TreeTopology support_;
  Eigen::VectorXd values_;
};

/// Attributes of t written over the support as an (arity x support size)
/// matrix with zero columns at support nodes absent from t. Throws
/// NotInSupport when t has nodes outside the support.
Eigen::MatrixXd pad_attributes(const AttributedTree& t,
                               const TreeTopology& support);

/// Zero-padded attribute vector of t over the weight support, with every
/// entry scaled by the square root of its node weight. Layout is ascending
/// (node, slot), so Euclidean norms of differences of these vectors are
/// exactly the attribute part of the metric.
Eigen::VectorXd pad_embed(const AttributedTree& t, const WeightScheme& w);

/// Number of nodes present in exactly one of the two trees: the Hamming
/// distance between existence strings, and the minimum number of
/// single-node insertions/removals transforming one topology into the
/// other.
int integer_distance(const TreeTopology& s, const TreeTopology& t);

/// Attribute part of the metric: the weighted Euclidean distance between
/// zero-padded attribute vectors, sqrt(sum_k alpha_k |a_s(k) - a_t(k)|^2).
double fractional_distance(const AttributedTree& s, const AttributedTree& t,
                           const WeightScheme& w);

/// The tree metric: integer_distance + fractional_distance.
double delta(const AttributedTree& s, const AttributedTree& t,
             const WeightScheme& w);

/// Variation between two trees: integer_distance + fractional_distance^2.
/// Additive over nodes, which is what makes variation decompositions work.
double variation(const AttributedTree& s, const AttributedTree& t,
                 const WeightScheme& w);

}  // namespace treespace
