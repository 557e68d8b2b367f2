#include "treespace/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <string>

#include "treespace/center.hpp"

namespace treespace {

using nlohmann::json;

WeightScheme materialize(const WeightsBlock& block,
                         const TreeTopology& support) {
  switch (block.kind) {
    case WeightKind::Exponential: return WeightScheme::exponential(support);
    case WeightKind::Equal: return WeightScheme::equal(support);
    case WeightKind::Explicit:
      return WeightScheme::explicit_weights(support, block.values);
  }
  throw Error(ErrorCode::InvalidWeights, "unknown weight kind");
}

std::size_t Corpus::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return i;
  }
  throw Error(ErrorCode::UnknownId, "no tree with id '" + id + "'");
}

namespace {

void reject_unknown_fields(const json& object, const std::string& where,
                           std::initializer_list<const char*> known) {
  for (const auto& [key, value] : object.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return key == k;
        }) == known.end()) {
      throw Error(ErrorCode::SyntaxError,
                  std::string("unknown field '") + key + "' in " + where);
    }
  }
}

const json& require_field(const json& object, const char* name,
                          const std::string& where) {
  auto it = object.find(name);
  if (it == object.end()) {
    throw Error(ErrorCode::SyntaxError,
                std::string("missing field '") + name + "' in " + where);
  }
  return *it;
}

// Relabels every single child (and its whole subtree) as a left child,
// preserving two-children nodes as they are.
std::pair<std::vector<NodeIndex>, std::vector<NodeIndex>> canonical_relabel(
    const TreeTopology& topology) {
  std::vector<NodeIndex> old_order(topology.indices().begin(),
                                   topology.indices().end());
  std::vector<NodeIndex> new_of(old_order.size());
  std::function<void(NodeIndex, NodeIndex)> walk = [&](NodeIndex old_k,
                                                       NodeIndex new_k) {
    new_of[topology.position_of(old_k)] = new_k;
    bool has_left = topology.contains(2 * old_k);
    bool has_right = topology.contains(2 * old_k + 1);
    if (has_left) walk(2 * old_k, 2 * new_k);
    if (has_right) walk(2 * old_k + 1, has_left ? 2 * new_k + 1 : 2 * new_k);
  };
  walk(1, 1);
  return {std::move(old_order), std::move(new_of)};
}

AttributedTree build_tree(const std::string& id, std::vector<NodeIndex> indices,
                          std::vector<Eigen::VectorXd> attrs,
                          const ParseOptions& opts) {
  TreeTopology topology = [&] {
    try {
      return TreeTopology::validate(indices, opts.level_cap);
    } catch (const Error& e) {
      throw Error(e.code(), "tree '" + id + "': " + e.detail());
    }
  }();
  if (opts.canonicalize_single_children) {
    auto [old_order, new_of] = canonical_relabel(topology);
    std::vector<std::size_t> order(old_order.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return new_of[a] < new_of[b]; });
    std::vector<NodeIndex> relabeled;
    relabeled.reserve(order.size());
    Eigen::MatrixXd matrix(attrs.front().size(),
                           static_cast<Eigen::Index>(order.size()));
    Eigen::Index col = 0;
    for (std::size_t pos : order) {
      relabeled.push_back(new_of[pos]);
      matrix.col(col++) = attrs[pos];
    }
    return AttributedTree(TreeTopology::from_sorted_unchecked(relabeled),
                          std::move(matrix));
  }
  Eigen::MatrixXd matrix(attrs.front().size(),
                         static_cast<Eigen::Index>(attrs.size()));
  for (Eigen::Index i = 0; i < matrix.cols(); ++i) {
    matrix.col(i) = attrs[static_cast<std::size_t>(i)];
  }
  return AttributedTree(std::move(topology), std::move(matrix));
}

WeightsBlock parse_weights(const json& node) {
  if (!node.is_object()) {
    throw Error(ErrorCode::SyntaxError, "'weights' must be an object");
  }
  reject_unknown_fields(node, "'weights'", {"scheme", "values"});
  const json& scheme = require_field(node, "scheme", "'weights'");
  if (!scheme.is_string()) {
    throw Error(ErrorCode::SyntaxError, "'weights.scheme' must be a string");
  }
  WeightsBlock block;
  std::string name = scheme.get<std::string>();
  if (name == "exponential") {
    block.kind = WeightKind::Exponential;
  } else if (name == "equal") {
    block.kind = WeightKind::Equal;
  } else if (name == "explicit") {
    block.kind = WeightKind::Explicit;
  } else {
    throw Error(ErrorCode::InvalidWeights,
                "unknown weight scheme '" + name + "'");
  }
  if (block.kind != WeightKind::Explicit) {
    if (node.contains("values")) {
      throw Error(ErrorCode::SyntaxError,
                  "'weights.values' is only valid for the explicit scheme");
    }
    return block;
  }
  const json& values = require_field(node, "values", "'weights'");
  if (!values.is_object()) {
    throw Error(ErrorCode::SyntaxError, "'weights.values' must be an object");
  }
  for (const auto& [key, value] : values.items()) {
    NodeIndex k = 0;
    try {
      std::size_t used = 0;
      unsigned long parsed = std::stoul(key, &used);
      if (used != key.size() || parsed == 0 ||
          parsed > std::numeric_limits<NodeIndex>::max()) {
        throw std::invalid_argument(key);
      }
      k = static_cast<NodeIndex>(parsed);
    } catch (const std::exception&) {
      throw Error(ErrorCode::SyntaxError,
                  "weight key '" + key + "' is not a node index");
    }
    if (!value.is_number()) {
      throw Error(ErrorCode::SyntaxError,
                  "weight at node " + key + " must be a number");
    }
    block.values[k] = value.get<double>();
  }
  return block;
}

}  // namespace

Corpus parse_corpus(const std::string& text, const ParseOptions& opts) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::SyntaxError, "corpus must be a JSON object");
  }
  reject_unknown_fields(doc, "the corpus", {"arity", "slots", "trees", "weights"});

  const json& arity_node = require_field(doc, "arity", "the corpus");
  if (!arity_node.is_number_integer() || arity_node.get<int>() < 1) {
    throw Error(ErrorCode::SyntaxError, "'arity' must be a positive integer");
  }
  const int arity = arity_node.get<int>();

  const json& slots_node = require_field(doc, "slots", "the corpus");
  if (!slots_node.is_array()) {
    throw Error(ErrorCode::SyntaxError, "'slots' must be an array of strings");
  }
  std::vector<std::string> slots;
  for (const json& s : slots_node) {
    if (!s.is_string()) {
      throw Error(ErrorCode::SyntaxError, "'slots' must be an array of strings");
    }
    slots.push_back(s.get<std::string>());
  }
  if (static_cast<int>(slots.size()) != arity) {
    throw Error(ErrorCode::ArityMismatch,
                "'slots' names " + std::to_string(slots.size()) +
                    " slots for arity " + std::to_string(arity));
  }

  const json& trees_node = require_field(doc, "trees", "the corpus");
  if (!trees_node.is_array() || trees_node.empty()) {
    throw Error(ErrorCode::SyntaxError, "'trees' must be a nonempty array");
  }

  std::vector<AttributedTree> trees;
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const json& entry : trees_node) {
    if (!entry.is_object()) {
      throw Error(ErrorCode::SyntaxError, "each tree must be an object");
    }
    reject_unknown_fields(entry, "a tree", {"id", "nodes"});
    const json& id_node = require_field(entry, "id", "a tree");
    if (!id_node.is_string()) {
      throw Error(ErrorCode::SyntaxError, "tree 'id' must be a string");
    }
    std::string id = id_node.get<std::string>();
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::DuplicateId, "tree id '" + id + "' repeats");
    }
    const json& nodes = require_field(entry, "nodes", "tree '" + id + "'");
    if (!nodes.is_array() || nodes.empty()) {
      throw Error(ErrorCode::SyntaxError,
                  "tree '" + id + "': 'nodes' must be a nonempty array");
    }
    std::vector<NodeIndex> indices;
    std::vector<Eigen::VectorXd> attrs_by_index;
    std::vector<std::pair<NodeIndex, Eigen::VectorXd>> records;
    std::set<NodeIndex> seen_nodes;
    for (const json& node : nodes) {
      if (!node.is_object()) {
        throw Error(ErrorCode::SyntaxError,
                    "tree '" + id + "': each node must be an object");
      }
      reject_unknown_fields(node, "a node of tree '" + id + "'", {"k", "a"});
      const json& k_node = require_field(node, "k", "a node of tree '" + id + "'");
      if (!k_node.is_number_integer() || k_node.get<long long>() < 1 ||
          k_node.get<long long>() > std::numeric_limits<NodeIndex>::max()) {
        throw Error(ErrorCode::SyntaxError,
                    "tree '" + id + "': node index must be a positive integer");
      }
      NodeIndex k = k_node.get<NodeIndex>();
      if (!seen_nodes.insert(k).second) {
        throw Error(ErrorCode::SyntaxError,
                    "tree '" + id + "': node " + std::to_string(k) + " repeats");
      }
      const json& a = require_field(node, "a",
                                    ("node " + std::to_string(k) + " of tree '" +
                                     id + "'").c_str());
      if (!a.is_array() || static_cast<int>(a.size()) != arity) {
        throw Error(ErrorCode::ArityMismatch,
                    "tree '" + id + "' node " + std::to_string(k) + ": 'a' needs " +
                        std::to_string(arity) + " values");
      }
      Eigen::VectorXd vec(arity);
      for (int j = 0; j < arity; ++j) {
        const json& value = a[static_cast<std::size_t>(j)];
        if (!value.is_number()) {
          throw Error(ErrorCode::SyntaxError,
                      "tree '" + id + "' node " + std::to_string(k) +
                          ": attributes must be numbers");
        }
        vec[j] = value.get<double>();
        if (!std::isfinite(vec[j])) {
          throw Error(ErrorCode::NonFiniteAttribute,
                      "tree '" + id + "' node " + std::to_string(k) +
                          " slot " + std::to_string(j));
        }
      }
      records.emplace_back(k, std::move(vec));
    }
    std::sort(records.begin(), records.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (auto& [k, vec] : records) {
      indices.push_back(k);
      attrs_by_index.push_back(std::move(vec));
    }
    trees.push_back(build_tree(id, std::move(indices),
                               std::move(attrs_by_index), opts));
    ids.push_back(std::move(id));
  }

  std::optional<WeightsBlock> weights;
  if (doc.contains("weights")) {
    weights = parse_weights(doc["weights"]);
  }
  return Corpus{TreeSample(std::move(trees)), std::move(ids), std::move(slots),
                std::move(weights)};
}

std::string serialize_corpus(const Corpus& corpus) {
  json doc;
  doc["arity"] = corpus.sample.arity();
  doc["slots"] = corpus.slots;
  json trees = json::array();
  for (std::size_t i = 0; i < corpus.sample.size(); ++i) {
    const AttributedTree& t = corpus.sample[i];
    json nodes = json::array();
    Eigen::Index col = 0;
    for (NodeIndex k : t.topology().indices()) {
      json a = json::array();
      for (int j = 0; j < t.arity(); ++j) {
        a.push_back(t.attrs()(j, col));
      }
      nodes.push_back(json{{"k", k}, {"a", std::move(a)}});
      ++col;
    }
    trees.push_back(json{{"id", corpus.ids[i]}, {"nodes", std::move(nodes)}});
  }
  doc["trees"] = std::move(trees);
  if (corpus.weights) {
    json w;
    w["scheme"] = weight_kind_name(corpus.weights->kind);
    if (corpus.weights->kind == WeightKind::Explicit) {
      json values = json::object();
      for (const auto& [k, v] : corpus.weights->values) {
        values[std::to_string(k)] = v;
      }
      w["values"] = std::move(values);
    }
    doc["weights"] = std::move(w);
  }
  return doc.dump(2) + "\n";
}

std::pair<TreeSample, NormalizationRecord> normalize(const TreeSample& sample) {
  NormalizationRecord record{support_tree(sample), {}, {},
                             1.0 / (2.0 * std::sqrt(sample.arity()))};
  record.center = mean_attributes(sample, record.support);
  Eigen::MatrixXd max_abs = Eigen::MatrixXd::Zero(
      sample.arity(), static_cast<Eigen::Index>(record.support.node_count()));
  for (const auto& t : sample.trees()) {
    Eigen::Index src = 0;
    for (NodeIndex k : t.topology().indices()) {
      auto pos = static_cast<Eigen::Index>(record.support.position_of(k));
      max_abs.col(pos) = max_abs.col(pos).cwiseMax(
          (t.attrs().col(src) - record.center.col(pos)).cwiseAbs());
      ++src;
    }
  }
  record.scale = (max_abs.array() > 0.0)
                     .select(record.bound / max_abs.array(), 1.0)
                     .matrix();

  std::vector<AttributedTree> out;
  out.reserve(sample.size());
  for (const auto& t : sample.trees()) {
    Eigen::MatrixXd attrs(t.arity(),
                          static_cast<Eigen::Index>(t.topology().node_count()));
    Eigen::Index src = 0;
    for (NodeIndex k : t.topology().indices()) {
      auto pos = static_cast<Eigen::Index>(record.support.position_of(k));
      attrs.col(src) = ((t.attrs().col(src) - record.center.col(pos)).array() *
                        record.scale.col(pos).array())
                           .cwiseMin(record.bound)
                           .cwiseMax(-record.bound)
                           .matrix();
      ++src;
    }
    out.emplace_back(t.topology(), std::move(attrs));
  }
  return {TreeSample(std::move(out)), std::move(record)};
}

AttributedTree denormalize(const AttributedTree& tree,
                           const NormalizationRecord& record) {
  Eigen::MatrixXd attrs(tree.arity(),
                        static_cast<Eigen::Index>(tree.topology().node_count()));
  Eigen::Index src = 0;
  for (NodeIndex k : tree.topology().indices()) {
    std::size_t pos = record.support.position_of(k);
    if (pos == TreeTopology::npos) {
      throw Error(ErrorCode::UnknownNode,
                  "node " + std::to_string(k) + " has no normalization record");
    }
    auto col = static_cast<Eigen::Index>(pos);
    attrs.col(src) = (tree.attrs().col(src).array() /
                          record.scale.col(col).array() +
                      record.center.col(col).array())
                         .matrix();
    ++src;
  }
  return AttributedTree(tree.topology(), std::move(attrs));
}

Eigen::MatrixXd denormalize_direction(const Eigen::MatrixXd& direction,
                                      const TreeTopology& topology,
                                      const NormalizationRecord& record) {
  if (direction.cols() != static_cast<Eigen::Index>(topology.node_count())) {
    throw Error(ErrorCode::InvalidSpec,
                "direction columns must match the topology");
  }
  Eigen::MatrixXd out(direction.rows(), direction.cols());
  Eigen::Index src = 0;
  for (NodeIndex k : topology.indices()) {
    std::size_t pos = record.support.position_of(k);
    if (pos == TreeTopology::npos) {
      throw Error(ErrorCode::UnknownNode,
                  "node " + std::to_string(k) + " has no normalization record");
    }
    out.col(src) = (direction.col(src).array() /
                    record.scale.col(static_cast<Eigen::Index>(pos)).array())
                       .matrix();
    ++src;
  }
  return out;
}

}  // namespace treespace
