#include "treespace/center.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

namespace treespace {

int NodeCountTable::count_of(NodeIndex k) const {
  std::size_t pos = support.position_of(k);
  if (pos == TreeTopology::npos) return 0;
  return counts[pos];
}

NodeCountTable node_counts(const TreeSample& sample) {
  NodeCountTable table{support_tree(sample), {}, static_cast<int>(sample.size())};
  table.counts.assign(table.support.node_count(), 0);
  for (const auto& t : sample.trees()) {
    for (NodeIndex k : t.topology().indices()) {
      ++table.counts[table.support.position_of(k)];
    }
  }
  return table;
}

namespace {

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    return std::numeric_limits<std::size_t>::max();
  }
  return a * b;
}

std::size_t saturating_add(std::size_t a, std::size_t b) {
  if (b > std::numeric_limits<std::size_t>::max() - a) {
    return std::numeric_limits<std::size_t>::max();
  }
  return a + b;
}

bool in_sorted(const std::vector<NodeIndex>& v, NodeIndex k) {
  return std::binary_search(v.begin(), v.end(), k);
}

// Ways to pick a parent-closed subset of optional nodes within the subtree
// rooted at optional node k (k itself may be included or not).
std::size_t closed_subset_count(NodeIndex k,
                                const std::vector<NodeIndex>& optional) {
  std::size_t with_k = 1;
  for (NodeIndex child : {2 * k, 2 * k + 1}) {
    if (in_sorted(optional, child)) {
      with_k = saturating_mul(with_k, closed_subset_count(child, optional));
    }
  }
  return saturating_add(1, with_k);
}

}  // namespace

std::size_t MedianFamily::member_count() const {
  std::size_t count = 1;
  for (NodeIndex k : optional) {
    if (k > 1 && in_sorted(optional, k / 2)) continue;  // not a forest root
    count = saturating_mul(count, closed_subset_count(k, optional));
  }
  return count;
}

MedianFamily median_family(const TreeSample& sample) {
  NodeCountTable table = node_counts(sample);
  int n = table.sample_size;
  std::vector<NodeIndex> required;
  std::vector<NodeIndex> optional;
  std::size_t pos = 0;
  for (NodeIndex k : table.support.indices()) {
    int c = table.counts[pos++];
    if (2 * c > n) {
      required.push_back(k);
    } else if (2 * c == n) {
      optional.push_back(k);
    }
  }
  // Every tree contains the root, so n_1 = n > n/2 and the required set is
  // parent-closed: a node's parent appears in at least as many trees.
  return MedianFamily{TreeTopology::from_sorted_unchecked(std::move(required)),
                      std::move(optional)};
}

std::vector<TreeTopology> enumerate_medians(const MedianFamily& family) {
  const auto& opt = family.optional;
  if (opt.size() > 20) {
    throw Error(ErrorCode::InvalidSpec,
                std::to_string(opt.size()) +
                    " optional nodes is too many to enumerate");
  }
  std::vector<std::vector<NodeIndex>> members;
  for (std::uint32_t mask = 0; mask < (1u << opt.size()); ++mask) {
    bool closed = true;
    for (std::size_t i = 0; i < opt.size() && closed; ++i) {
      if (!(mask & (1u << i))) continue;
      NodeIndex parent = opt[i] / 2;
      if (family.required.contains(parent)) continue;
      auto it = std::lower_bound(opt.begin(), opt.end(), parent);
      std::size_t pi = static_cast<std::size_t>(it - opt.begin());
      if (it == opt.end() || *it != parent || !(mask & (1u << pi))) {
        closed = false;
      }
    }
    if (!closed) continue;
    std::vector<NodeIndex> indices(family.required.indices().begin(),
                                   family.required.indices().end());
    for (std::size_t i = 0; i < opt.size(); ++i) {
      if (mask & (1u << i)) indices.push_back(opt[i]);
    }
    std::sort(indices.begin(), indices.end());
    members.push_back(std::move(indices));
  }
  std::sort(members.begin(), members.end());
  std::vector<TreeTopology> out;
  out.reserve(members.size());
  for (auto& m : members) {
    out.push_back(TreeTopology::from_sorted_unchecked(std::move(m)));
  }
  return out;
}

TreeTopology minimal_median_tree(const TreeSample& sample) {
  return median_family(sample).required;
}

Eigen::MatrixXd mean_attributes(const TreeSample& sample,
                                const TreeTopology& topology) {
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(
      sample.arity(), static_cast<Eigen::Index>(topology.node_count()));
  Eigen::VectorXd counts =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(topology.node_count()));
  for (const auto& t : sample.trees()) {
    Eigen::Index src = 0;
    for (NodeIndex k : t.topology().indices()) {
      std::size_t pos = topology.position_of(k);
      if (pos != TreeTopology::npos) {
        sums.col(static_cast<Eigen::Index>(pos)) += t.attrs().col(src);
        counts[static_cast<Eigen::Index>(pos)] += 1.0;
      }
      ++src;
    }
  }
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0.0) {
      throw Error(ErrorCode::NotInSupport,
                  "node " +
                      std::to_string(topology.indices()[
                          static_cast<std::size_t>(i)]) +
                      " appears in no sample tree");
    }
    sums.col(i) /= counts[i];
  }
  return sums;
}

AttributedTree median_mean_tree(const TreeSample& sample) {
  TreeTopology topology = minimal_median_tree(sample);
  Eigen::MatrixXd attrs = mean_attributes(sample, topology);
  return AttributedTree(std::move(topology), std::move(attrs));
}

AttributedTree average_support_tree(const TreeSample& sample) {
  TreeTopology topology = support_tree(sample);
  Eigen::MatrixXd attrs = mean_attributes(sample, topology);
  return AttributedTree(std::move(topology), std::move(attrs));
}

TotalVariation total_variation(const TreeSample& sample,
                               const AttributedTree& center,
                               const WeightScheme& w) {
  TotalVariation out;
  for (const auto& t : sample.trees()) {
    out.structure += integer_distance(t.topology(), center.topology());
    double f = fractional_distance(t, center, w);
    out.attribute += f * f;
  }
  out.total = out.structure + out.attribute;
  return out;
}

}  // namespace treespace
