// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the exit status is nonzero when any criterion fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "support/helpers.hpp"
#include "treespace/center.hpp"
#include "treespace/corpus.hpp"
#include "treespace/metric.hpp"
#include "treespace/principal.hpp"
#include "treespace/synthetic.hpp"
#include "treespace/tree.hpp"
#include "treespace/treeline.hpp"

namespace {

using namespace treespace;
using testsupport::all_treelines_through;
using testsupport::brute_medians;
using testsupport::enumerate_subtrees;
using testsupport::line_residual;
using testsupport::random_attributes;
using testsupport::random_sample;
using testsupport::random_subtree;
using testsupport::random_topology;
using testsupport::random_tree;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string topology_string(const TreeTopology& topology) {
  std::ostringstream out;
  out << "{";
  bool first = true;
  for (NodeIndex k : topology.indices()) {
    if (!first) out << ",";
    out << k;
    first = false;
  }
  out << "}";
  return out.str();
}

// nullopt on success, otherwise a short failure note.
using Verdict = std::optional<std::string>;

Verdict metric_axioms() {
  auto start = Clock::now();
  DeterministicRng rng(101);
  for (int it = 0; it < 10000; ++it) {
    const int arity = 1 + it % 3;
    const double bound = 0.5 / std::sqrt(static_cast<double>(arity));
    AttributedTree s = random_tree(rng, arity, 15, bound);
    AttributedTree t = random_tree(rng, arity, 15, bound);
    AttributedTree u = random_tree(rng, arity, 15, bound);
    TreeTopology support =
        union_tree(union_tree(s.topology(), t.topology()), u.topology());
    for (const WeightScheme& w :
         {WeightScheme::exponential(support), WeightScheme::equal(support)}) {
      const double d_st = delta(s, t, w);
      const double d_tu = delta(t, u, w);
      const double d_su = delta(s, u, w);
      if (d_st != delta(t, s, w) || d_tu != delta(u, t, w) ||
          d_su != delta(u, s, w)) {
        return "symmetry violated at instance " + std::to_string(it);
      }
      if (d_su > d_st + d_tu + 1e-12 || d_st > d_su + d_tu + 1e-12 ||
          d_tu > d_st + d_su + 1e-12) {
        return "triangle inequality violated at instance " +
               std::to_string(it);
      }
      if ((d_st == 0.0) != (s == t)) {
        return "identity of indiscernibles violated at instance " +
               std::to_string(it);
      }
      AttributedTree copy = s;
      if (delta(s, copy, w) != 0.0) {
        return "self distance nonzero at instance " + std::to_string(it);
      }
    }
  }
  double elapsed = seconds_since(start);
  if (elapsed >= 5.0) {
    return "exceeded the 5 s budget (" + std::to_string(elapsed) + " s)";
  }
  return std::nullopt;
}

Verdict majority_rule() {
  auto start = Clock::now();
  DeterministicRng rng(202);
  for (int it = 0; it < 200; ++it) {
    TreeTopology host = random_topology(rng, 15);
    std::vector<TreeTopology> pool = enumerate_subtrees(host);
    const std::size_t n = 1 + rng.below(8);
    std::vector<AttributedTree> trees;
    trees.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const TreeTopology& topology = pool[rng.below(pool.size())];
      trees.emplace_back(
          topology,
          Eigen::MatrixXd::Zero(
              1, static_cast<Eigen::Index>(topology.node_count())));
    }
    TreeSample sample(std::move(trees));
    std::vector<TreeTopology> mine = enumerate_medians(median_family(sample));
    std::vector<TreeTopology> brute = brute_medians(sample);
    if (mine.size() != brute.size() ||
        !std::equal(mine.begin(), mine.end(), brute.begin())) {
      return "median set differs from brute force at instance " +
             std::to_string(it);
    }
  }
  double elapsed = seconds_since(start);
  if (elapsed >= 30.0) {
    return "exceeded the 30 s budget (" + std::to_string(elapsed) + " s)";
  }
  return std::nullopt;
}

Verdict leaf_identities() {
  DeterministicRng rng(303);
  int removals = 0;
  int additions = 0;
  for (int guard = 0; guard < 100000 && (removals < 1000 || additions < 1000);
       ++guard) {
    const std::size_t n = 1 + rng.below(6);
    std::vector<TreeTopology> topologies;
    topologies.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      topologies.push_back(random_topology(rng, 10));
    }
    TreeTopology s = random_topology(rng, 12);

    auto distance_sum = [&](const TreeTopology& candidate) {
      long total = 0;
      for (const TreeTopology& topology : topologies) {
        total += integer_distance(candidate, topology);
      }
      return total;
    };
    auto containing = [&](NodeIndex k) {
      long count = 0;
      for (const TreeTopology& topology : topologies) {
        count += topology.contains(k) ? 1 : 0;
      }
      return count;
    };

    if (removals < 1000) {
      std::vector<NodeIndex> leaves;
      for (NodeIndex k : s.indices()) {
        if (k != 1 && s.is_leaf(k)) leaves.push_back(k);
      }
      if (!leaves.empty()) {
        NodeIndex nu = leaves[rng.below(leaves.size())];
        std::vector<NodeIndex> pruned;
        for (NodeIndex k : s.indices()) {
          if (k != nu) pruned.push_back(k);
        }
        TreeTopology shrunk = TreeTopology::validate(pruned, kMaxLevelCap);
        long n_nu = containing(nu);
        long expected = distance_sum(s) + n_nu -
                        (static_cast<long>(n) - n_nu);
        if (distance_sum(shrunk) != expected) {
          return "leaf removal identity failed for node " +
                 std::to_string(nu) + " of " + topology_string(s);
        }
        ++removals;
      }
    }

    if (additions < 1000) {
      std::vector<NodeIndex> attachable;
      for (NodeIndex k : s.indices()) {
        for (NodeIndex child : {2 * k, 2 * k + 1}) {
          if (!s.contains(child)) attachable.push_back(child);
        }
      }
      NodeIndex omega = attachable[rng.below(attachable.size())];
      std::vector<NodeIndex> grown(s.indices().begin(), s.indices().end());
      grown.insert(std::lower_bound(grown.begin(), grown.end(), omega), omega);
      TreeTopology extended = TreeTopology::validate(grown, kMaxLevelCap);
      long n_omega = containing(omega);
      long expected = distance_sum(extended) + n_omega -
                      (static_cast<long>(n) - n_omega);
      if (distance_sum(s) != expected) {
        return "node addition identity failed for node " +
               std::to_string(omega) + " of " + topology_string(s);
      }
      ++additions;
    }
  }
  if (removals < 1000 || additions < 1000) {
    return "generator starved before reaching 1000 instances";
  }
  return std::nullopt;
}

Verdict pythagorean_term_by_term() {
  DeterministicRng rng(404);
  for (int it = 0; it < 1000; ++it) {
    const int arity = 1 + it % 2;
    const double bound = 0.5 / std::sqrt(static_cast<double>(arity));
    AttributedTree base = random_tree(rng, arity, 10, bound);
    AttributeTreeline line(
        base, random_attributes(rng, arity, base.topology().node_count(), 1.0));
    AttributedTree t = random_tree(rng, arity, 10, bound);
    TreeTopology support = union_tree(base.topology(), t.topology());
    WeightScheme w = it % 2 ? WeightScheme::equal(support)
                            : WeightScheme::exponential(support);
    AttributedTree u = line.at(rng.uniform(-2.0, 2.0));
    AttributeProjection p = project_onto_attribute_treeline(t, line, w);
    double lhs = variation(t, u, w);
    double rhs = variation(t, p.member, w) + variation(p.member, u, w);
    if (std::abs(lhs - rhs) > 1e-10) {
      return "identity off by " + std::to_string(std::abs(lhs - rhs)) +
             " at instance " + std::to_string(it);
    }
  }
  return std::nullopt;
}

Verdict pythagorean_summed() {
  DeterministicRng rng(505);
  for (int it = 0; it < 200; ++it) {
    const int arity = 1 + it % 2;
    const double bound = 0.5 / std::sqrt(static_cast<double>(arity));
    TreeSample sample = random_sample(rng, 2 + rng.below(5), arity, 8, bound);
    AttributedTree host = average_support_tree(sample);
    WeightScheme w = it % 2
                         ? WeightScheme::equal(support_tree(sample))
                         : WeightScheme::exponential(support_tree(sample));
    AttributedTree through =
        restrict_attributes(host, random_subtree(rng, host.topology()));
    std::vector<StructureTreeline> lines =
        enumerate_structure_treelines(through, host);
    const StructureTreeline& line = lines[rng.below(lines.size())];
    const AttributedTree& u = line.element(rng.below(line.element_count()));

    double lhs = 0.0;
    double residual = 0.0;
    double explained = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      StructureProjection p = project_onto_structure_treeline(sample[i], line, w);
      const AttributedTree& member = line.element(p.element_index);
      lhs += variation(sample[i], u, w);
      residual += variation(sample[i], member, w);
      explained += variation(member, u, w);
    }
    double err = std::abs(lhs - (residual + explained));
    if (err > 1e-10 * std::max(1.0, std::abs(lhs))) {
      return "summed identity off by " + std::to_string(err) +
             " at instance " + std::to_string(it);
    }
  }

  // The identity needs the sample sum: a single constructed term breaks it.
  auto tree1 = [](std::vector<NodeIndex> nodes, std::vector<double> values) {
    Eigen::MatrixXd attrs(1, static_cast<Eigen::Index>(values.size()));
    for (Eigen::Index i = 0; i < attrs.cols(); ++i) attrs(0, i) = values[i];
    return AttributedTree(TreeTopology::validate(nodes, kMaxLevelCap), attrs);
  };
  std::vector<AttributedTree> trees;
  trees.push_back(tree1({1, 2}, {0.0, 0.3}));
  trees.push_back(tree1({1, 2}, {0.0, -0.1}));
  trees.push_back(tree1({1}, {0.0}));
  TreeSample sample(std::move(trees));
  AttributedTree host = average_support_tree(sample);
  WeightScheme w = WeightScheme::exponential(support_tree(sample));
  StructureTreeline line(host, TreeTopology::validate({1}, kMaxLevelCap), {2});
  const AttributedTree& u = line.element(0);

  StructureProjection p0 = project_onto_structure_treeline(sample[0], line, w);
  const AttributedTree& member0 = line.element(p0.element_index);
  double term_gap = std::abs(variation(sample[0], u, w) -
                             (variation(sample[0], member0, w) +
                              variation(member0, u, w)));
  if (term_gap < 1e-3) {
    return "constructed term-by-term counterexample unexpectedly holds";
  }
  double lhs = 0.0;
  double rhs = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    StructureProjection p = project_onto_structure_treeline(sample[i], line, w);
    const AttributedTree& member = line.element(p.element_index);
    lhs += variation(sample[i], u, w);
    rhs += variation(sample[i], member, w) + variation(member, u, w);
  }
  if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(lhs))) {
    return "summed identity fails on the constructed sample";
  }
  return std::nullopt;
}

Verdict structure_optimality() {
  DeterministicRng rng(606);
  for (int it = 0; it < 50; ++it) {
    TreeTopology host_topology = random_topology(rng, 20, 0.6, 8);
    const std::size_t n = 2 + rng.below(5);
    std::vector<AttributedTree> trees;
    trees.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      TreeTopology topology = random_subtree(rng, host_topology);
      Eigen::MatrixXd attrs =
          random_attributes(rng, 1, topology.node_count(), 0.5);
      trees.emplace_back(std::move(topology), std::move(attrs));
    }
    TreeSample sample(std::move(trees));
    WeightScheme w = it % 2
                         ? WeightScheme::equal(support_tree(sample))
                         : WeightScheme::exponential(support_tree(sample));
    PrincipalStructureResult r = principal_structure_treeline(sample, w);

    AttributedTree host = average_support_tree(sample);
    TreeTopology center = minimal_median_tree(sample);
    double best = -1.0;
    for (const StructureTreeline& line : all_treelines_through(host, center)) {
      double residual = line_residual(line, sample, w);
      if (best < 0.0 || residual < best) best = residual;
    }
    if (r.residual != best) {
      return "residual " + std::to_string(r.residual) +
             " differs from the exhaustive minimum " + std::to_string(best) +
             " at instance " + std::to_string(it);
    }
  }
  return std::nullopt;
}

Verdict als_matches_pca() {
  DeterministicRng rng(707);
  for (int it = 0; it < 25; ++it) {
    const int arity = 1 + it % 2;
    const std::size_t n = 4 + rng.below(7);
    TreeTopology topology = random_topology(rng, 8);
    std::vector<AttributedTree> trees;
    trees.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      trees.emplace_back(
          topology, random_attributes(rng, arity, topology.node_count(), 0.25));
    }
    TreeSample sample(std::move(trees));
    WeightScheme w = WeightScheme::exponential(topology);
    PrincipalStructureResult structure = principal_structure_treeline(sample, w);
    PrincipalAttributeResult r = principal_attribute_direction(
        sample, structure.treeline, w, AlsOptions{5000, 1e-13});
    if (!r.converged) {
      return "solver failed to converge at instance " + std::to_string(it);
    }
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i) {
      if (r.objective_trace[i] > r.objective_trace[i - 1]) {
        return "objective increased at instance " + std::to_string(it);
      }
    }

    // With attributes this tight every tree projects onto the full
    // topology, so the masked problem is classical weighted PCA.
    const std::size_t largest = structure.treeline.element_count() - 1;
    for (std::size_t idx : r.element_indices) {
      if (idx != largest) {
        return "projection left the classical regime at instance " +
               std::to_string(it);
      }
    }

    const AttributedTree& element = structure.treeline.largest();
    const auto rows = static_cast<Eigen::Index>(n);
    const Eigen::Index dim = pad_embed(element, w).size();
    Eigen::MatrixXd residuals(rows, dim);
    for (Eigen::Index i = 0; i < rows; ++i) {
      residuals.row(i) =
          pad_embed(sample[static_cast<std::size_t>(i)], w) -
          pad_embed(element, w);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        residuals.transpose() * residuals);
    Eigen::VectorXd leading = eig.eigenvectors().col(dim - 1);

    Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
    Eigen::Index col = 0;
    for (NodeIndex k : element.topology().indices()) {
      const auto pos = static_cast<Eigen::Index>(
          w.support().position_of(k));
      for (int j = 0; j < arity; ++j) {
        c[pos * arity + j] = r.direction(j, col) * std::sqrt(w.at(k));
      }
      ++col;
    }
    if (leading.dot(c) < 0.0) leading = -leading;
    if ((c - leading).lpNorm<Eigen::Infinity>() > 1e-6) {
      return "direction differs from the dense solver at instance " +
             std::to_string(it);
    }
    Eigen::VectorXd scores = residuals * leading;
    if ((r.lambdas - scores).lpNorm<Eigen::Infinity>() > 1e-6) {
      return "coefficients differ from the dense scores at instance " +
             std::to_string(it);
    }
  }
  return std::nullopt;
}

Verdict planted_recovery() {
  auto start = Clock::now();

  SyntheticSpec flip_spec;
  flip_spec.plan = TopologyPlan::Fork;
  flip_spec.n = 12;
  flip_spec.flip_fraction = 0.5;
  flip_spec.seed = 11;
  SyntheticResult flip = generate_synthetic(flip_spec);
  auto [sample, record] = normalize(flip.corpus.sample);
  WeightScheme w = WeightScheme::exponential(support_tree(sample));
  PrincipalStructureResult structure = principal_structure_treeline(sample, w);
  PrincipalAttributeResult attribute =
      principal_attribute_direction(sample, structure.treeline, w);
  TreelineFamily family(structure.treeline, attribute.direction);
  std::vector<FamilyCoefficient> coefficients =
      projection_coefficients(sample, family, w);

  double pos_min = 0.0, pos_max = 0.0, neg_min = 0.0, neg_max = 0.0;
  bool pos_seen = false, neg_seen = false;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    double lambda = coefficients[i].lambda;
    if (flip.metadata.groups[i] > 0) {
      pos_min = pos_seen ? std::min(pos_min, lambda) : lambda;
      pos_max = pos_seen ? std::max(pos_max, lambda) : lambda;
      pos_seen = true;
    } else {
      neg_min = neg_seen ? std::min(neg_min, lambda) : lambda;
      neg_max = neg_seen ? std::max(neg_max, lambda) : lambda;
      neg_seen = true;
    }
  }
  if (!pos_seen || !neg_seen) return "flip corpus lost a group";
  double spread = std::max(pos_max - pos_min, neg_max - neg_min);
  double gap = std::min(std::abs(pos_min - neg_max),
                        std::abs(neg_min - pos_max));
  if (!(gap > 3.0 * spread)) {
    return "coefficient gap " + std::to_string(gap) +
           " not above 3x spread " + std::to_string(spread);
  }

  SyntheticSpec chain_spec;
  chain_spec.plan = TopologyPlan::LeftChain;
  chain_spec.n = 12;
  chain_spec.depth = 3;
  chain_spec.seed = 11;
  SyntheticResult planted = generate_synthetic(chain_spec);
  auto [chain_sample, chain_record] = normalize(planted.corpus.sample);
  WeightScheme chain_w = WeightScheme::exponential(support_tree(chain_sample));
  PrincipalStructureResult recovered =
      principal_structure_treeline(chain_sample, chain_w);
  const std::vector<NodeIndex>& chain = recovered.treeline.chain();
  if (chain.empty()) return "left-chain corpus produced an empty chain";
  for (NodeIndex k : chain) {
    if (k % 2 != 0) {
      return "chain node " + std::to_string(k) + " is not a left child";
    }
  }
  if (chain != planted.metadata.chain) {
    return "recovered chain differs from the planted one";
  }

  double elapsed = seconds_since(start);
  if (elapsed >= 10.0) {
    return "exceeded the 10 s budget (" + std::to_string(elapsed) + " s)";
  }
  return std::nullopt;
}

Verdict round_trips() {
  std::vector<std::string> documents;
  documents.push_back(R"({
    "arity": 2,
    "slots": ["u", "v"],
    "trees": [
      {"id": "s",
       "nodes": [{"k": 1, "a": [0.25, 0.5]}, {"k": 2, "a": [0.1, 0.2]}]},
      {"id": "t", "nodes": [{"k": 1, "a": [0.25, 0.5]}]}
    ]
  })");
  documents.push_back(R"({
    "arity": 1,
    "slots": ["w"],
    "weights": {"scheme": "explicit", "values": {"1": 0.5, "2": 0.25}},
    "trees": [
      {"id": "a", "nodes": [{"k": 1, "a": [0.0]}, {"k": 2, "a": [1.0]}]},
      {"id": "b", "nodes": [{"k": 1, "a": [-1.0]}]}
    ]
  })");

  std::vector<SyntheticSpec> specs(3);
  specs[0].plan = TopologyPlan::LeftChain;
  specs[0].n = 10;
  specs[0].depth = 4;
  specs[0].arity = 2;
  specs[0].noise = 0.2;
  specs[0].seed = 5;
  specs[1].plan = TopologyPlan::Fork;
  specs[1].n = 12;
  specs[1].arity = 3;
  specs[1].flip_fraction = 0.5;
  specs[1].seed = 9;
  specs[2].plan = TopologyPlan::Fork;
  specs[2].n = 1;
  specs[2].arity = 1;
  specs[2].noise = 0.0;
  specs[2].seed = 3;
  for (const SyntheticSpec& spec : specs) {
    documents.push_back(serialize_corpus(generate_synthetic(spec).corpus));
  }

  for (std::size_t i = 0; i < documents.size(); ++i) {
    Corpus corpus = parse_corpus(documents[i]);
    std::string once = serialize_corpus(corpus);
    std::string twice = serialize_corpus(parse_corpus(once));
    if (once != twice) {
      return "serialization round-trip not bit-exact on corpus " +
             std::to_string(i);
    }

    auto [normalized, record] = normalize(corpus.sample);
    for (std::size_t j = 0; j < normalized.size(); ++j) {
      AttributedTree back = denormalize(normalized[j], record);
      const Eigen::MatrixXd& original = corpus.sample[j].attrs();
      for (Eigen::Index col = 0; col < original.cols(); ++col) {
        for (Eigen::Index row = 0; row < original.rows(); ++row) {
          double err = std::abs(back.attrs()(row, col) - original(row, col));
          if (err > 1e-12 * std::max(1.0, std::abs(original(row, col)))) {
            return "normalization round-trip off by " + std::to_string(err) +
                   " on corpus " + std::to_string(i);
          }
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

int main() {
  struct Criterion {
    const char* label;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {"metric axioms on 10000 fuzzed triples under both weight schemes",
       metric_axioms},
      {"median family equals brute-force minimizers on 200 samples",
       majority_rule},
      {"leaf removal and node addition distance-sum identities are exact",
       leaf_identities},
      {"attribute treeline pythagorean identity holds term by term",
       pythagorean_term_by_term},
      {"structure treeline pythagorean identity holds summed, and only summed",
       pythagorean_summed},
      {"principal structure treeline attains the exhaustive minimum exactly",
       structure_optimality},
      {"masked rank-one solver matches dense weighted pca",
       als_matches_pca},
      {"planted flip gap and left-chain recovery on synthetic corpora",
       planted_recovery},
      {"corpus serialization and normalization round-trips",
       round_trips},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict verdict;
    try {
      verdict = criteria[i].run();
    } catch (const std::exception& e) {
      verdict = std::string("exception: ") + e.what();
    }
    std::printf("%s  %zu. %s\n", verdict ? "FAIL" : "PASS", i + 1,
                criteria[i].label);
    if (verdict) {
      std::printf("      %s\n", verdict->c_str());
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}
