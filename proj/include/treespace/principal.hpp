#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "treespace/center.hpp"
#include "treespace/treeline.hpp"

namespace treespace {

/// The best structure treeline for a sample: the maximal treeline through
/// the median-mean tree (within the average support tree) minimizing the
/// summed variation between each tree and its projection.
struct PrincipalStructureResult {
  StructureTreeline treeline;
  /// Per-tree index of the projection element, in sample order.
  std::vector<std::size_t> element_indices;
  /// Sum over the sample of V(t, P(t)).
  double residual = 0.0;
  /// Sum over the sample of V(center, P(t)); residual + explained equals
  /// the total variation about the center.
  double explained = 0.0;
};

PrincipalStructureResult principal_structure_treeline(const TreeSample& sample,
                                                      const WeightScheme& w);

/// Overload reusing a precomputed median-mean tree and average support
/// tree (`center` must be an attribute subtree of `host`).
PrincipalStructureResult principal_structure_treeline(
    const TreeSample& sample, const AttributedTree& center,
    const AttributedTree& host, const WeightScheme& w);

struct AlsOptions {
  int max_iter = 500;
  double tol = 1e-9;
};

/// The best direction vector for the family of attribute treelines induced
/// by a structure treeline, found by alternating least squares on the
/// masked rank-one model: tree t, projected onto element u_i, contributes
/// ||x_t - u_i - lambda_t * (c restricted to u_i)||^2 in the weighted
/// padded norm.
struct PrincipalAttributeResult {
  /// Unit weighted-norm direction over the largest element's nodes, sign
  /// fixed so the largest-magnitude slot is positive.
  Eigen::MatrixXd direction;
  /// Per-tree line coefficients, in sample order.
  Eigen::VectorXd lambdas;
  /// Per-tree structure-projection element index (the fixed masks).
  std::vector<std::size_t> element_indices;
  /// Sum over the sample of V(t, family projection of t).
  double residual = 0.0;
  /// Least-squares objective (the attribute part of the residual) after
  /// each coefficient update; never increasing.
  std::vector<double> objective_trace;
  bool converged = false;
  /// (node, slot) pairs of the direction that no tree with a nonzero
  /// coefficient covers; they keep their initialization values.
  std::vector<std::pair<NodeIndex, int>> stale_slots;
};

/// Throws DegenerateSample when every tree equals its structure
/// projection, leaving no attribute variation to direct.
PrincipalAttributeResult principal_attribute_direction(
    const TreeSample& sample, const StructureTreeline& l,
    const WeightScheme& w, const AlsOptions& opts = {});

/// Per-tree projection element indices, in sample order.
std::vector<std::size_t> projection_coefficients(const TreeSample& sample,
                                                 const StructureTreeline& l,
                                                 const WeightScheme& w);

struct FamilyCoefficient {
  std::size_t element_index = 0;
  double lambda = 0.0;
};

/// Per-tree (element, lambda) pairs under the two-stage family projection,
/// in sample order.
std::vector<FamilyCoefficient> projection_coefficients(
    const TreeSample& sample, const TreelineFamily& fam,
    const WeightScheme& w);

/// Variation decomposition of a sample about its median-mean tree: what
/// the principal structure treeline explains, what the principal attribute
/// direction adds, and what remains.
struct VariationReport {
  AttributedTree centerpoint;
  TotalVariation total;
  PrincipalStructureResult structure;
  /// Absent when the sample sits exactly on the structure treeline.
  std::optional<PrincipalAttributeResult> attribute;
  double structure_explained = 0.0;
  double attribute_explained = 0.0;
  double residual = 0.0;
};

VariationReport variation_report(const TreeSample& sample,
                                 const WeightScheme& w,
                                 const AlsOptions& opts = {});

}  // namespace treespace
