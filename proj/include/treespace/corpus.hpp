#pragma once

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "treespace/metric.hpp"
#include "treespace/tree.hpp"

namespace treespace {

/// Weight selection as written in a corpus file; turned into a usable
/// scheme over a concrete support with materialize().
struct WeightsBlock {
  WeightKind kind = WeightKind::Exponential;
  std::map<NodeIndex, double> values;  // explicit kind only
};

WeightScheme materialize(const WeightsBlock& block,
                         const TreeTopology& support);

/// A parsed tree corpus: the sample plus its file-level metadata.
struct Corpus {
  TreeSample sample;
  std::vector<std::string> ids;    // one per tree, unique
  std::vector<std::string> slots;  // attribute slot names, one per slot
  std::optional<WeightsBlock> weights;

  /// Position of the tree with this id. Throws UnknownId.
  std::size_t index_of(const std::string& id) const;
};

struct ParseOptions {
  /// Relabel every single child (and its subtree) as a left child.
  bool canonicalize_single_children = false;
  int level_cap = kDefaultLevelCap;
};

/// Parses a corpus document: a JSON object with fields `arity` (positive
/// integer), `slots` (array of `arity` strings), `trees` (array of
/// {id, nodes: [{k, a}]}) and optionally `weights`. Errors carry the tree
/// id and node index where they occurred.
Corpus parse_corpus(const std::string& text, const ParseOptions& opts = {});

/// Canonical serialization: nodes in ascending index order, trees in input
/// order, reals at full round-trip precision. parse(serialize(c)) gives
/// back c exactly.
std::string serialize_corpus(const Corpus& corpus);

/// The affine per-(node, slot) transform bringing a sample into the
/// attribute bound: subtract the mean over containing trees, then scale so
/// magnitudes stay within bound = 1/(2 sqrt(arity)).
struct NormalizationRecord {
  TreeTopology support;
  Eigen::MatrixXd center;  // arity x support size, per-node means
  Eigen::MatrixXd scale;   // arity x support size, strictly positive
  double bound = 0.0;
};

/// Centers and scales every attribute slot; constant slots keep scale 1.
/// The result satisfies |value| <= record.bound everywhere, which caps the
/// attribute part of the metric at 1.
std::pair<TreeSample, NormalizationRecord> normalize(const TreeSample& sample);

/// Inverse of normalize for a single tree. Throws UnknownNode when the
/// tree has a node outside the record's support.
AttributedTree denormalize(const AttributedTree& tree,
                           const NormalizationRecord& record);

/// Inverse scaling without the centering shift, mapping direction vectors
/// back to the original attribute scale. Columns follow `topology`.
Eigen::MatrixXd denormalize_direction(const Eigen::MatrixXd& direction,
                                      const TreeTopology& topology,
                                      const NormalizationRecord& record);

}  // namespace treespace
