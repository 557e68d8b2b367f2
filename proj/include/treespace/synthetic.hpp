#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "treespace/corpus.hpp"
#include "treespace/tree.hpp"

namespace treespace {

enum class TopologyPlan {
  /// Chains of left children with depths cycling 1..depth: a planted
  /// structure gradient along left-child insertions.
  LeftChain,
  /// Every tree is the three-node fork {1, 2, 3}; all variation lives in
  /// the attributes.
  Fork,
};

struct SyntheticSpec {
  int n = 12;
  TopologyPlan plan = TopologyPlan::LeftChain;
  /// Deepest level for LeftChain trees; ignored by Fork.
  int depth = 3;
  int arity = 2;
  /// Standard deviation of the per-slot attribute noise.
  double noise = 0.01;
  /// Fraction of trees whose planted coefficient is negated, producing two
  /// coefficient clusters with a gap.
  double flip_fraction = 0.0;
  std::uint64_t seed = 1;
};

/// Ground truth recorded alongside a generated corpus.
struct PlantedMetadata {
  /// +1 or -1 per tree: the sign of its planted coefficient.
  std::vector<int> groups;
  /// Planted coefficient per tree; magnitudes lie in [1, 1.1], so the two
  /// sign groups are separated by a gap of at least 2 against an
  /// intra-group spread of at most 0.1.
  std::vector<double> lambdas;
  /// Chain of the planted structure gradient (empty for Fork).
  std::vector<NodeIndex> chain;
  TreeTopology support;
  /// Planted direction over the support (arity x support size).
  Eigen::MatrixXd direction;
};

struct SyntheticResult {
  Corpus corpus;
  PlantedMetadata metadata;
};

/// Deterministic function of the spec: same spec, same corpus bytes.
/// Throws InvalidSpec on out-of-range parameters.
SyntheticResult generate_synthetic(const SyntheticSpec& spec);

std::string serialize_metadata(const PlantedMetadata& metadata);

}  // namespace treespace
