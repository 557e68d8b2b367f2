#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "treespace/metric.hpp"
#include "treespace/tree.hpp"

namespace treespace {

/// A nested sequence of trees u_0 .. u_m where u_{i+1} adds one node nu_i
/// along a descending chain (each chain node is a child of the previous
/// one) and every element carries the attributes of a common source tree.
/// Validity requires the smallest element to be minimal: the parent of the
/// first chain node is the root, or keeps another child in u_0. A treeline
/// with an empty chain is a single tree.
class StructureTreeline {
 public:
  /// Builds the treeline whose smallest element has topology `base` and
  /// whose elements' attributes are drawn from `source`. Throws NotSubtree
  /// when base or chain leave `source`, InvalidSpec when the chain or the
  /// minimality clause is violated.
  StructureTreeline(const AttributedTree& source, TreeTopology base,
                    std::vector<NodeIndex> chain);

  /// Chain length m; the treeline has m + 1 elements.
  std::size_t length() const { return chain_.size(); }
  std::size_t element_count() const { return elements_.size(); }
  const AttributedTree& element(std::size_t i) const { return elements_[i]; }
  const std::vector<AttributedTree>& elements() const { return elements_; }
  const std::vector<NodeIndex>& chain() const { return chain_; }
  const AttributedTree& largest() const { return elements_.back(); }

 private:
  std::vector<NodeIndex> chain_;
  std::vector<AttributedTree> elements_;
};

/// All maximal structure treelines containing `through` whose elements are
/// attribute subtrees of `within` (attributes must match exactly), in
/// lexicographic order of their chains. When `through` admits no chain at
/// all, the single degenerate treeline {through} is returned. Throws
/// NotSubtree when `through` is not an attribute subtree of `within`.
std::vector<StructureTreeline> enumerate_structure_treelines(
    const AttributedTree& through, const AttributedTree& within);

/// A one-parameter family of trees sharing one topology: the member at
/// lambda carries attributes base + lambda * direction.
class AttributeTreeline {
 public:
  /// `direction` must match the base attribute matrix in shape and must
  /// not be identically zero (ZeroDirection otherwise).
  AttributeTreeline(AttributedTree base, Eigen::MatrixXd direction);

  const AttributedTree& base() const { return base_; }
  const Eigen::MatrixXd& direction() const { return direction_; }

  /// The member at parameter lambda.
  AttributedTree at(double lambda) const;

 private:
  AttributedTree base_;
  Eigen::MatrixXd direction_;
};

/// A structure treeline together with a direction vector over its largest
/// element, inducing one attribute treeline per element: element i pairs
/// with the direction columns at its own nodes.
class TreelineFamily {
 public:
  /// `direction` is an (arity x node count) matrix over the largest
  /// element of `structure`.
  TreelineFamily(StructureTreeline structure, Eigen::MatrixXd direction);

  const StructureTreeline& structure() const { return structure_; }
  const Eigen::MatrixXd& direction() const { return direction_; }

  /// Direction columns restricted to element i's nodes.
  Eigen::MatrixXd element_direction(std::size_t i) const;

  /// The attribute treeline through element i. Throws ZeroDirection when
  /// the element's direction subvector is identically zero.
  AttributeTreeline line(std::size_t i) const;

 private:
  StructureTreeline structure_;
  Eigen::MatrixXd direction_;
};

struct StructureProjection {
  std::size_t element_index = 0;
  double distance = 0.0;
};

/// The treeline element closest to t in the tree metric; ties go to the
/// smallest element index.
StructureProjection project_onto_structure_treeline(const AttributedTree& t,
                                                    const StructureTreeline& l,
                                                    const WeightScheme& w);

struct AttributeProjection {
  double lambda = 0.0;
  AttributedTree member;
};

/// The member of e closest to t: the one-dimensional least-squares
/// solution lambda* = <x - base, v>_w / <v, v>_w on zero-padded attribute
/// vectors. The topology part of the metric is constant along the line and
/// does not move the minimizer.
AttributeProjection project_onto_attribute_treeline(const AttributedTree& t,
                                                    const AttributeTreeline& e,
                                                    const WeightScheme& w);

struct FamilyProjection {
  std::size_t element_index = 0;
  double lambda = 0.0;
  AttributedTree member;
};

/// Two-stage projection: first onto the structure treeline, then onto the
/// attribute treeline through the selected element.
FamilyProjection project_onto_family(const AttributedTree& t,
                                     const TreelineFamily& fam,
                                     const WeightScheme& w);

}  // namespace treespace
