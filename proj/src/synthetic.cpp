#include "treespace/synthetic.hpp"

#include <json.hpp>

#include <cmath>
#include <string>

#include "treespace/rng.hpp"

namespace treespace {

using nlohmann::json;

namespace {

TreeTopology plan_support(const SyntheticSpec& spec) {
  std::vector<NodeIndex> indices;
  if (spec.plan == TopologyPlan::LeftChain) {
    for (int level = 0; level <= spec.depth; ++level) {
      indices.push_back(NodeIndex{1} << level);
    }
  } else {
    indices = {1, 2, 3};
  }
  return TreeTopology::from_sorted_unchecked(std::move(indices));
}

TreeTopology plan_topology(const SyntheticSpec& spec, int i) {
  if (spec.plan == TopologyPlan::Fork) {
    return TreeTopology::from_sorted_unchecked({1, 2, 3});
  }
  int levels = 1 + i % spec.depth;  // deepest level of tree i, cycling
  std::vector<NodeIndex> indices;
  for (int level = 0; level <= levels; ++level) {
    indices.push_back(NodeIndex{1} << level);
  }
  return TreeTopology::from_sorted_unchecked(std::move(indices));
}

}  // namespace

SyntheticResult generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.n > 9999) {
    throw Error(ErrorCode::InvalidSpec, "n must be in [1, 9999]");
  }
  if (spec.depth < 1 || spec.depth > 12) {
    throw Error(ErrorCode::InvalidSpec, "depth must be in [1, 12]");
  }
  if (spec.arity < 1 || spec.arity > 64) {
    throw Error(ErrorCode::InvalidSpec, "arity must be in [1, 64]");
  }
  if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) {
    throw Error(ErrorCode::InvalidSpec, "noise must be finite and nonnegative");
  }
  if (!(spec.flip_fraction >= 0.0) || !(spec.flip_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidSpec, "flip fraction must be in [0, 1]");
  }

  PlantedMetadata meta{{}, {}, {}, plan_support(spec), {}};
  const auto support_size =
      static_cast<Eigen::Index>(meta.support.node_count());

  if (spec.plan == TopologyPlan::LeftChain) {
    for (int level = 1; level <= spec.depth; ++level) {
      meta.chain.push_back(NodeIndex{1} << level);
    }
  }

  // Fixed base point and direction; the analysis pipeline normalizes per
  // slot, so only the rank-one shape and the coefficient layout matter.
  Eigen::MatrixXd base(spec.arity, support_size);
  meta.direction.resize(spec.arity, support_size);
  for (Eigen::Index col = 0; col < support_size; ++col) {
    NodeIndex k = meta.support.indices()[static_cast<std::size_t>(col)];
    for (int j = 0; j < spec.arity; ++j) {
      base(j, col) = 0.1 * (j + 1) + 0.01 * static_cast<double>(k);
      meta.direction(j, col) = ((k + static_cast<NodeIndex>(j)) % 2 == 0)
                                   ? 1.0
                                   : -1.0;
    }
  }

  DeterministicRng rng(spec.seed);
  const int flipped = static_cast<int>(std::llround(spec.flip_fraction * spec.n));
  meta.groups.reserve(spec.n);
  meta.lambdas.reserve(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    int sign = i < spec.n - flipped ? 1 : -1;
    meta.groups.push_back(sign);
    meta.lambdas.push_back(sign * (1.0 + 0.1 * rng.uniform()));
  }

  std::vector<AttributedTree> trees;
  std::vector<std::string> ids;
  trees.reserve(spec.n);
  for (int i = 0; i < spec.n; ++i) {
    TreeTopology topology = plan_topology(spec, i);
    Eigen::MatrixXd attrs(spec.arity,
                          static_cast<Eigen::Index>(topology.node_count()));
    Eigen::Index col = 0;
    for (NodeIndex k : topology.indices()) {
      auto pos = static_cast<Eigen::Index>(meta.support.position_of(k));
      for (int j = 0; j < spec.arity; ++j) {
        attrs(j, col) = base(j, pos) + meta.lambdas[i] * meta.direction(j, pos) +
                        spec.noise * rng.normal();
      }
      ++col;
    }
    trees.emplace_back(std::move(topology), std::move(attrs));
    std::string id = std::to_string(i);
    ids.push_back("t" + std::string(4 - id.size(), '0') + id);
  }

  std::vector<std::string> slots;
  for (int j = 0; j < spec.arity; ++j) {
    slots.push_back("a" + std::to_string(j));
  }
  return SyntheticResult{
      Corpus{TreeSample(std::move(trees)), std::move(ids), std::move(slots),
             std::nullopt},
      std::move(meta)};
}

std::string serialize_metadata(const PlantedMetadata& metadata) {
  json doc;
  doc["groups"] = metadata.groups;
  doc["lambdas"] = metadata.lambdas;
  doc["chain"] = metadata.chain;
  json support = json::array();
  for (NodeIndex k : metadata.support.indices()) support.push_back(k);
  doc["support"] = std::move(support);
  json direction = json::object();
  Eigen::Index col = 0;
  for (NodeIndex k : metadata.support.indices()) {
    json values = json::array();
    for (Eigen::Index j = 0; j < metadata.direction.rows(); ++j) {
      values.push_back(metadata.direction(j, col));
    }
    direction[std::to_string(k)] = std::move(values);
    ++col;
  }
  doc["direction"] = std::move(direction);
  return doc.dump(2) + "\n";
}

}  // namespace treespace
