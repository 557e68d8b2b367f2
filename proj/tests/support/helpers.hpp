#pragma once
// Generators and brute-force oracles shared by the test binaries.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "treespace/center.hpp"
#include "treespace/metric.hpp"
#include "treespace/rng.hpp"
#include "treespace/tree.hpp"
#include "treespace/treeline.hpp"

namespace testsupport {

using namespace treespace;

// Random parent-closed index set grown top-down, at most max_nodes nodes.
inline TreeTopology random_topology(DeterministicRng& rng,
                                    std::size_t max_nodes,
                                    double p_child = 0.55,
                                    int level_cap = 6) {
  std::vector<NodeIndex> nodes{1};
  std::vector<NodeIndex> frontier{1};
  while (!frontier.empty() && nodes.size() < max_nodes) {
    std::vector<NodeIndex> next;
    for (NodeIndex k : frontier) {
      if (node_level(k) + 1 > level_cap) continue;
      for (NodeIndex child : {2 * k, 2 * k + 1}) {
        if (nodes.size() >= max_nodes) break;
        if (rng.uniform() < p_child) {
          nodes.push_back(child);
          next.push_back(child);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(nodes.begin(), nodes.end());
  return TreeTopology::validate(nodes, kMaxLevelCap);
}

// Random parent-closed subset of `support` containing the root.
inline TreeTopology random_subtree(DeterministicRng& rng,
                                   const TreeTopology& support,
                                   double p_child = 0.6) {
  std::vector<NodeIndex> nodes{1};
  std::vector<NodeIndex> frontier{1};
  while (!frontier.empty()) {
    std::vector<NodeIndex> next;
    for (NodeIndex k : frontier) {
      for (NodeIndex child : {2 * k, 2 * k + 1}) {
        if (support.contains(child) && rng.uniform() < p_child) {
          nodes.push_back(child);
          next.push_back(child);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(nodes.begin(), nodes.end());
  return TreeTopology::validate(nodes, kMaxLevelCap);
}

inline Eigen::MatrixXd random_attributes(DeterministicRng& rng, int arity,
                                         std::size_t count, double bound) {
  Eigen::MatrixXd attrs(arity, static_cast<Eigen::Index>(count));
  for (Eigen::Index c = 0; c < attrs.cols(); ++c) {
    for (Eigen::Index r = 0; r < attrs.rows(); ++r) {
      attrs(r, c) = bound * (2.0 * rng.uniform() - 1.0);
    }
  }
  return attrs;
}

inline AttributedTree random_tree(DeterministicRng& rng, int arity,
                                  std::size_t max_nodes, double bound) {
  TreeTopology topology = random_topology(rng, max_nodes);
  return AttributedTree(
      topology, random_attributes(rng, arity, topology.node_count(), bound));
}

inline TreeSample random_sample(DeterministicRng& rng, std::size_t n, int arity,
                                std::size_t max_nodes, double bound) {
  std::vector<AttributedTree> trees;
  trees.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    trees.push_back(random_tree(rng, arity, max_nodes, bound));
  }
  return TreeSample(std::move(trees));
}

// All parent-closed subsets of `support` containing the root, sorted
// lexicographically by index list.
inline std::vector<TreeTopology> enumerate_subtrees(
    const TreeTopology& support) {
  const auto nodes = support.indices();
  const std::size_t m = nodes.size();
  std::vector<std::vector<NodeIndex>> found;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); mask += 2) {
    bool closed = true;
    for (std::size_t i = 1; i < m && closed; ++i) {
      if (!(mask >> i & 1)) continue;
      std::size_t parent_pos = support.position_of(parent_index(nodes[i]));
      closed = (mask >> parent_pos & 1) != 0;
    }
    if (!closed) continue;
    std::vector<NodeIndex> member;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask >> i & 1) member.push_back(nodes[i]);
    }
    found.push_back(std::move(member));
  }
  std::sort(found.begin(), found.end());
  std::vector<TreeTopology> out;
  out.reserve(found.size());
  for (auto& member : found) {
    out.push_back(TreeTopology::from_sorted_unchecked(std::move(member)));
  }
  return out;
}

inline int oracle_integer(const TreeTopology& s, const TreeTopology& t) {
  TreeTopology u = union_tree(s, t);
  int d = 0;
  for (NodeIndex k : u.indices()) {
    if (s.contains(k) != t.contains(k)) ++d;
  }
  return d;
}

// Eq-by-eq evaluation of the three-sum form of the fractional metric.
inline double oracle_fractional(const AttributedTree& s,
                                const AttributedTree& t,
                                const WeightScheme& w) {
  TreeTopology u = union_tree(s.topology(), t.topology());
  double sq = 0.0;
  for (NodeIndex k : u.indices()) {
    bool in_s = s.topology().contains(k);
    bool in_t = t.topology().contains(k);
    if (in_s && in_t) {
      sq += w.at(k) * (s.attr(k) - t.attr(k)).squaredNorm();
    } else if (in_s) {
      sq += w.at(k) * s.attr(k).squaredNorm();
    } else {
      sq += w.at(k) * t.attr(k).squaredNorm();
    }
  }
  return std::sqrt(sq);
}

// Argmin set of the summed integer distance over all support subtrees,
// sorted lexicographically.
inline std::vector<TreeTopology> brute_medians(const TreeSample& sample) {
  TreeTopology support = support_tree(sample);
  std::vector<TreeTopology> candidates = enumerate_subtrees(support);
  long best = -1;
  std::vector<TreeTopology> minimizers;
  for (TreeTopology& candidate : candidates) {
    long total = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      total += integer_distance(candidate, sample[i].topology());
    }
    if (best < 0 || total < best) {
      best = total;
      minimizers.clear();
    }
    if (total == best) minimizers.push_back(std::move(candidate));
  }
  return minimizers;
}

// Every descending path within `w`, each node a child of its predecessor.
inline std::vector<std::vector<NodeIndex>> descending_paths(
    const TreeTopology& w) {
  std::vector<std::vector<NodeIndex>> paths;
  std::vector<NodeIndex> current;
  auto extend = [&](auto&& self, NodeIndex v) -> void {
    current.push_back(v);
    paths.push_back(current);
    for (NodeIndex child : {2 * v, 2 * v + 1}) {
      if (w.contains(child)) self(self, child);
    }
    current.pop_back();
  };
  for (NodeIndex v : w.indices()) {
    if (v != 1) extend(extend, v);
  }
  return paths;
}

// Every valid structure treeline through `through` inside `source`'s
// topology, maximal or not, built straight from the definition clauses.
inline std::vector<StructureTreeline> all_treelines_through(
    const AttributedTree& source, const TreeTopology& through) {
  std::vector<StructureTreeline> lines;
  lines.emplace_back(source, through, std::vector<NodeIndex>{});
  for (const auto& path : descending_paths(source.topology())) {
    std::size_t inside = 0;
    while (inside < path.size() && through.contains(path[inside])) ++inside;
    bool prefix_ok = true;
    for (std::size_t i = inside; i < path.size(); ++i) {
      if (through.contains(path[i])) prefix_ok = false;
    }
    if (!prefix_ok) continue;

    std::vector<NodeIndex> base_nodes;
    for (NodeIndex k : through.indices()) {
      if (std::find(path.begin(), path.begin() + inside, k) ==
          path.begin() + inside) {
        base_nodes.push_back(k);
      }
    }
    NodeIndex head = path.front();
    if (head == 1) continue;
    if (std::find(base_nodes.begin(), base_nodes.end(), parent_index(head)) ==
        base_nodes.end()) {
      continue;
    }
    if (parent_index(head) != 1 &&
        std::find(base_nodes.begin(), base_nodes.end(), sibling_index(head)) ==
            base_nodes.end()) {
      continue;
    }
    bool closed = true;
    for (std::size_t i = 1; i < base_nodes.size(); ++i) {
      if (std::find(base_nodes.begin(), base_nodes.end(),
                    parent_index(base_nodes[i])) == base_nodes.end()) {
        closed = false;
      }
    }
    if (!closed || base_nodes.empty() || base_nodes.front() != 1) continue;
    lines.emplace_back(source, TreeTopology::validate(base_nodes, kMaxLevelCap),
                       path);
  }
  return lines;
}

inline double line_residual(const StructureTreeline& line,
                            const TreeSample& sample, const WeightScheme& w) {
  double residual = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    StructureProjection p = project_onto_structure_treeline(sample[i], line, w);
    residual += variation(sample[i], line.element(p.element_index), w);
  }
  return residual;
}

}  // namespace testsupport
