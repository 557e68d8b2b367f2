#include "treespace/treeline.hpp"

#include <algorithm>
#include <functional>
#include <string>

namespace treespace {

StructureTreeline::StructureTreeline(const AttributedTree& source,
                                     TreeTopology base,
                                     std::vector<NodeIndex> chain)
    : chain_(std::move(chain)) {
  if (!is_topological_subtree(base, source.topology())) {
    throw Error(ErrorCode::NotSubtree,
                "treeline base leaves the source tree");
  }
  std::vector<NodeIndex> indices(base.indices().begin(),
                                 base.indices().end());
  elements_.reserve(chain_.size() + 1);
  elements_.push_back(restrict_attributes(source, std::move(base)));
  const TreeTopology& base_topology = elements_.front().topology();
  for (std::size_t i = 0; i < chain_.size(); ++i) {
    NodeIndex nu = chain_[i];
    if (!source.topology().contains(nu)) {
      throw Error(ErrorCode::NotSubtree,
                  "chain node " + std::to_string(nu) +
                      " leaves the source tree");
    }
    if (nu <= 1) {
      throw Error(ErrorCode::InvalidSpec, "the root cannot be a chain node");
    }
    if (i == 0) {
      NodeIndex parent = nu / 2;
      if (!base_topology.contains(parent)) {
        throw Error(ErrorCode::InvalidSpec,
                    "chain node " + std::to_string(nu) +
                        " is not attachable to the base");
      }
      if (base_topology.contains(nu)) {
        throw Error(ErrorCode::InvalidSpec,
                    "chain node " + std::to_string(nu) +
                        " is already in the base");
      }
      if (parent != 1 && !base_topology.contains(sibling_index(nu))) {
        throw Error(ErrorCode::InvalidSpec,
                    "base is not minimal below chain node " +
                        std::to_string(nu));
      }
    } else if (nu / 2 != chain_[i - 1]) {
      throw Error(ErrorCode::InvalidSpec,
                  "chain node " + std::to_string(nu) +
                      " is not a child of its predecessor");
    }
    indices.insert(std::lower_bound(indices.begin(), indices.end(), nu), nu);
    elements_.push_back(restrict_attributes(
        source, TreeTopology::from_sorted_unchecked(indices)));
  }
}

std::vector<StructureTreeline> enumerate_structure_treelines(
    const AttributedTree& through, const AttributedTree& within) {
  if (!is_attribute_subtree(through, within)) {
    throw Error(ErrorCode::NotSubtree,
                "the anchor tree is not an attribute subtree of the host");
  }
  const TreeTopology& t = through.topology();
  const TreeTopology& w = within.topology();

  std::vector<std::vector<NodeIndex>> chains;

  // Depth-first emission of every maximal descending extension of `prefix`
  // below its last node; emits `prefix` itself when nothing extends it.
  std::function<void(std::vector<NodeIndex>&)> extend =
      [&](std::vector<NodeIndex>& prefix) {
        NodeIndex v = prefix.back();
        bool terminal = true;
        for (NodeIndex c : {2 * v, 2 * v + 1}) {
          if (!w.contains(c)) continue;
          terminal = false;
          prefix.push_back(c);
          extend(prefix);
          prefix.pop_back();
        }
        if (terminal) chains.push_back(prefix);
      };

  // Lines on which `through` is an interior or final element: each leaf of
  // t other than the root seeds exactly one descending chain inside t,
  // forced by the minimality clause (climb while the parent is a non-root
  // single-child node), then extends below the leaf.
  for (NodeIndex f : t.indices()) {
    if (f == 1 || !t.is_leaf(f)) continue;
    std::vector<NodeIndex> up;
    NodeIndex v = f;
    while (true) {
      up.push_back(v);
      if (v / 2 == 1 || t.contains(sibling_index(v))) break;
      v = v / 2;
    }
    std::reverse(up.begin(), up.end());
    extend(up);
  }

  // Lines whose smallest element is `through`: the first chain node is
  // outside t, hangs off t, and satisfies the minimality clause.
  for (NodeIndex v : w.indices()) {
    if (t.contains(v)) continue;
    NodeIndex parent = v / 2;
    if (!t.contains(parent)) continue;
    if (parent != 1 && !t.contains(sibling_index(v))) continue;
    std::vector<NodeIndex> prefix{v};
    extend(prefix);
  }

  std::sort(chains.begin(), chains.end());

  std::vector<StructureTreeline> lines;
  if (chains.empty()) {
    lines.emplace_back(within, t, std::vector<NodeIndex>{});
    return lines;
  }
  lines.reserve(chains.size());
  for (auto& chain : chains) {
    std::vector<NodeIndex> sorted_chain = chain;
    std::sort(sorted_chain.begin(), sorted_chain.end());
    std::vector<NodeIndex> base;
    base.reserve(t.node_count());
    std::set_difference(t.indices().begin(), t.indices().end(),
                        sorted_chain.begin(), sorted_chain.end(),
                        std::back_inserter(base));
    lines.emplace_back(within, TreeTopology::from_sorted_unchecked(base),
                       std::move(chain));
  }
  return lines;
}

AttributeTreeline::AttributeTreeline(AttributedTree base,
                                     Eigen::MatrixXd direction)
    : base_(std::move(base)), direction_(std::move(direction)) {
  if (direction_.rows() != base_.attrs().rows() ||
      direction_.cols() != base_.attrs().cols()) {
    throw Error(ErrorCode::ArityMismatch,
                "direction shape must match the base attribute matrix");
  }
  if (!direction_.allFinite()) {
    throw Error(ErrorCode::NonFiniteAttribute, "direction must be finite");
  }
  if (direction_.isZero(0.0)) {
    throw Error(ErrorCode::ZeroDirection,
                "attribute treeline needs a nonzero direction");
  }
}

AttributedTree AttributeTreeline::at(double lambda) const {
  return AttributedTree(base_.topology(),
                        base_.attrs() + lambda * direction_);
}

TreelineFamily::TreelineFamily(StructureTreeline structure,
                               Eigen::MatrixXd direction)
    : structure_(std::move(structure)), direction_(std::move(direction)) {
  const AttributedTree& largest = structure_.largest();
  if (direction_.rows() != largest.attrs().rows() ||
      direction_.cols() != largest.attrs().cols()) {
    throw Error(ErrorCode::ArityMismatch,
                "direction shape must match the largest element");
  }
  if (!direction_.allFinite()) {
    throw Error(ErrorCode::NonFiniteAttribute, "direction must be finite");
  }
}

Eigen::MatrixXd TreelineFamily::element_direction(std::size_t i) const {
  const TreeTopology& topology = structure_.element(i).topology();
  const TreeTopology& largest = structure_.largest().topology();
  Eigen::MatrixXd out(direction_.rows(),
                      static_cast<Eigen::Index>(topology.node_count()));
  Eigen::Index dst = 0;
  for (NodeIndex k : topology.indices()) {
    out.col(dst++) =
        direction_.col(static_cast<Eigen::Index>(largest.position_of(k)));
  }
  return out;
}

AttributeTreeline TreelineFamily::line(std::size_t i) const {
  return AttributeTreeline(structure_.element(i), element_direction(i));
}

StructureProjection project_onto_structure_treeline(const AttributedTree& t,
                                                    const StructureTreeline& l,
                                                    const WeightScheme& w) {
  StructureProjection best{0, delta(t, l.element(0), w)};
  for (std::size_t i = 1; i < l.element_count(); ++i) {
    double d = delta(t, l.element(i), w);
    if (d < best.distance) {
      best = {i, d};
    }
  }
  return best;
}

AttributeProjection project_onto_attribute_treeline(const AttributedTree& t,
                                                    const AttributeTreeline& e,
                                                    const WeightScheme& w) {
  if (t.arity() != e.base().arity()) {
    throw Error(ErrorCode::ArityMismatch, "trees must share arity");
  }
  Eigen::VectorXd x = pad_embed(t, w);
  Eigen::VectorXd base = pad_embed(e.base(), w);
  Eigen::VectorXd v =
      pad_embed(AttributedTree(e.base().topology(), e.direction()), w);
  double denom = v.squaredNorm();
  if (denom == 0.0) {
    throw Error(ErrorCode::ZeroDirection,
                "direction has zero weighted norm");
  }
  double lambda = (x - base).dot(v) / denom;
  return {lambda, e.at(lambda)};
}

FamilyProjection project_onto_family(const AttributedTree& t,
                                     const TreelineFamily& fam,
                                     const WeightScheme& w) {
  StructureProjection s =
      project_onto_structure_treeline(t, fam.structure(), w);
  AttributeProjection a =
      project_onto_attribute_treeline(t, fam.line(s.element_index), w);
  return {s.element_index, a.lambda, std::move(a.member)};
}

}  // namespace treespace
