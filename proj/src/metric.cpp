#include "treespace/metric.hpp"

#include <cmath>
#include <string>

namespace treespace {

const char* weight_kind_name(WeightKind kind) {
  switch (kind) {
    case WeightKind::Exponential: return "exponential";
    case WeightKind::Equal: return "equal";
    case WeightKind::Explicit: return "explicit";
  }
  return "weights";
}

WeightScheme::WeightScheme(WeightKind kind, TreeTopology support,
                           Eigen::VectorXd values)
    : kind_(kind), support_(std::move(support)), values_(std::move(values)) {}

WeightScheme WeightScheme::exponential(const TreeTopology& support) {
  Eigen::VectorXd values(static_cast<Eigen::Index>(support.node_count()));
  Eigen::Index j = 0;
  for (NodeIndex k : support.indices()) {
    values[j++] = std::ldexp(1.0, -(2 * node_level(k) + 1));
  }
  return WeightScheme(WeightKind::Exponential, support, std::move(values));
}

WeightScheme WeightScheme::equal(const TreeTopology& support) {
  auto n = static_cast<Eigen::Index>(support.node_count());
  Eigen::VectorXd values =
      Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  return WeightScheme(WeightKind::Equal, support, std::move(values));
}

WeightScheme WeightScheme::explicit_weights(
    const TreeTopology& support, const std::map<NodeIndex, double>& weights) {
  if (weights.size() != support.node_count()) {
    throw Error(ErrorCode::InvalidWeights,
                "expected one weight per support node, got " +
                    std::to_string(weights.size()) + " for " +
                    std::to_string(support.node_count()) + " nodes");
  }
  Eigen::VectorXd values(static_cast<Eigen::Index>(support.node_count()));
  Eigen::Index j = 0;
  for (NodeIndex k : support.indices()) {
    auto it = weights.find(k);
    if (it == weights.end()) {
      throw Error(ErrorCode::InvalidWeights,
                  "no weight for support node " + std::to_string(k));
    }
    if (!(it->second > 0.0) || !std::isfinite(it->second)) {
      throw Error(ErrorCode::InvalidWeights,
                  "weight at node " + std::to_string(k) +
                      " must be positive and finite");
    }
    values[j++] = it->second;
  }
  if (values.sum() > 1.0 + 1e-12) {
    throw Error(ErrorCode::InvalidWeights,
                "weights sum to " + std::to_string(values.sum()) +
                    ", which exceeds 1");
  }
  return WeightScheme(WeightKind::Explicit, support, std::move(values));
}

double WeightScheme::at(NodeIndex k) const {
  std::size_t pos = support_.position_of(k);
  if (pos == TreeTopology::npos) {
    throw Error(ErrorCode::NotInSupport,
                "node " + std::to_string(k) + " is outside the support");
  }
  return values_[static_cast<Eigen::Index>(pos)];
}

Eigen::VectorXd WeightScheme::slot_scale(int arity) const {
  Eigen::VectorXd out(values_.size() * arity);
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    out.segment(i * arity, arity).setConstant(std::sqrt(values_[i]));
  }
  return out;
}

Eigen::MatrixXd pad_attributes(const AttributedTree& t,
                               const TreeTopology& support) {
  if (!is_topological_subtree(t.topology(), support)) {
    throw Error(ErrorCode::NotInSupport,
                "tree has nodes outside the requested support");
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(
      t.arity(), static_cast<Eigen::Index>(support.node_count()));
  Eigen::Index src = 0;
  for (NodeIndex k : t.topology().indices()) {
    out.col(static_cast<Eigen::Index>(support.position_of(k))) =
        t.attrs().col(src++);
  }
  return out;
}

Eigen::VectorXd pad_embed(const AttributedTree& t, const WeightScheme& w) {
  Eigen::MatrixXd padded = pad_attributes(t, w.support());
  padded *= w.values().cwiseSqrt().asDiagonal();
  return Eigen::VectorXd{padded.reshaped()};
}

int integer_distance(const TreeTopology& s, const TreeTopology& t) {
  int common = static_cast<int>(intersection_tree(s, t).node_count());
  return static_cast<int>(s.node_count()) + static_cast<int>(t.node_count()) -
         2 * common;
}

namespace {

double fractional_squared(const AttributedTree& s, const AttributedTree& t,
                          const WeightScheme& w) {
  if (s.arity() != t.arity()) {
    throw Error(ErrorCode::ArityMismatch, "trees must share arity");
  }
  Eigen::MatrixXd diff =
      pad_attributes(s, w.support()) - pad_attributes(t, w.support());
  double sq = 0.0;
  for (Eigen::Index i = 0; i < diff.cols(); ++i) {
    sq += w.values()[i] * diff.col(i).squaredNorm();
  }
  return sq;
}

}  // namespace

double fractional_distance(const AttributedTree& s, const AttributedTree& t,
                           const WeightScheme& w) {
  return std::sqrt(fractional_squared(s, t, w));
}

double delta(const AttributedTree& s, const AttributedTree& t,
             const WeightScheme& w) {
  return integer_distance(s.topology(), t.topology()) +
         fractional_distance(s, t, w);
}

double variation(const AttributedTree& s, const AttributedTree& t,
                 const WeightScheme& w) {
  return integer_distance(s.topology(), t.topology()) +
         fractional_squared(s, t, w);
}

}  // namespace treespace
