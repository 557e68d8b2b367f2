#include "treespace/principal.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace treespace {

namespace {

struct LineScore {
  std::vector<std::size_t> element_indices;
  double residual = 0.0;
  double explained = 0.0;
};

LineScore score_line(const TreeSample& sample, const AttributedTree& center,
                     const StructureTreeline& l, const WeightScheme& w) {
  LineScore score;
  score.element_indices.reserve(sample.size());
  for (const auto& t : sample.trees()) {
    StructureProjection p = project_onto_structure_treeline(t, l, w);
    const AttributedTree& element = l.element(p.element_index);
    score.element_indices.push_back(p.element_index);
    score.residual += variation(t, element, w);
    score.explained += variation(center, element, w);
  }
  return score;
}

}  // namespace

PrincipalStructureResult principal_structure_treeline(
    const TreeSample& sample, const AttributedTree& center,
    const AttributedTree& host, const WeightScheme& w) {
  std::vector<StructureTreeline> lines =
      enumerate_structure_treelines(center, host);
  std::size_t best = 0;
  LineScore best_score = score_line(sample, center, lines[0], w);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    LineScore score = score_line(sample, center, lines[i], w);
    if (score.residual < best_score.residual) {
      best = i;
      best_score = std::move(score);
    }
  }
  return PrincipalStructureResult{std::move(lines[best]),
                                  std::move(best_score.element_indices),
                                  best_score.residual, best_score.explained};
}

PrincipalStructureResult principal_structure_treeline(const TreeSample& sample,
                                                      const WeightScheme& w) {
  return principal_structure_treeline(sample, median_mean_tree(sample),
                                      average_support_tree(sample), w);
}

namespace {

// 0/1 mask over (node, slot) support layout for the nodes of `topology`.
Eigen::VectorXd slot_mask(const TreeTopology& topology,
                          const TreeTopology& support, int arity) {
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(support.node_count()) * arity);
  for (NodeIndex k : topology.indices()) {
    mask.segment(static_cast<Eigen::Index>(support.position_of(k)) * arity,
                 arity)
        .setOnes();
  }
  return mask;
}

}  // namespace

PrincipalAttributeResult principal_attribute_direction(
    const TreeSample& sample, const StructureTreeline& l,
    const WeightScheme& w, const AlsOptions& opts) {
  if (opts.max_iter < 1 || !(opts.tol >= 0.0)) {
    throw Error(ErrorCode::InvalidSpec,
                "max_iter must be at least 1 and tol nonnegative");
  }
  const TreeTopology& support = w.support();
  const int arity = sample.arity();
  const auto n = static_cast<Eigen::Index>(sample.size());
  const Eigen::Index dim =
      static_cast<Eigen::Index>(support.node_count()) * arity;

  // Everything below works in the sqrt-weight-scaled space, where the
  // weighted inner product is the plain dot product.
  std::vector<Eigen::VectorXd> residuals(sample.size());
  std::vector<Eigen::VectorXd> masks(sample.size());
  std::vector<std::size_t> element_indices(sample.size());
  double structure_part = 0.0;
  bool any_residual = false;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const AttributedTree& t = sample[i];
    StructureProjection p = project_onto_structure_treeline(t, l, w);
    const AttributedTree& element = l.element(p.element_index);
    element_indices[i] = p.element_index;
    residuals[i] = pad_embed(t, w) - pad_embed(element, w);
    masks[i] = slot_mask(element.topology(), support, arity);
    structure_part += integer_distance(t.topology(), element.topology());
    any_residual = any_residual || !residuals[i].isZero(0.0);
  }
  if (!any_residual) {
    throw Error(ErrorCode::DegenerateSample,
                "every tree equals its structure projection");
  }

  const Eigen::VectorXd largest_mask =
      slot_mask(l.largest().topology(), support, arity);

  // Initialization: leading principal component of the zero-padded,
  // column-centered, weight-scaled sample matrix, restricted to the
  // largest element's slots.
  Eigen::MatrixXd data(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.row(i) = pad_embed(sample[static_cast<std::size_t>(i)], w);
  }
  const Eigen::RowVectorXd column_means = data.colwise().mean();
  data.rowwise() -= column_means;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(data.transpose() * data);
  Eigen::VectorXd c = eig.eigenvectors().col(dim - 1);
  c = c.cwiseProduct(largest_mask);
  double norm = c.norm();
  if (norm == 0.0) {
    c = largest_mask / largest_mask.norm();
  } else {
    c /= norm;
  }

  Eigen::VectorXd lambdas = Eigen::VectorXd::Zero(n);
  std::vector<double> trace;
  bool converged = false;

  auto update_lambdas = [&]() {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      Eigen::VectorXd masked = c.cwiseProduct(masks[ui]);
      double denom = masked.squaredNorm();
      lambdas[i] = denom > 0.0 ? residuals[ui].dot(masked) / denom : 0.0;
    }
  };
  auto objective = [&]() {
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      obj += (residuals[ui] - lambdas[i] * c.cwiseProduct(masks[ui]))
                 .squaredNorm();
    }
    return obj;
  };

  for (int it = 0; it < opts.max_iter && !converged; ++it) {
    update_lambdas();
    double obj = objective();
    if (!trace.empty()) {
      double prev = trace.back();
      if (obj > prev) {
        // The exact coordinate updates cannot increase the objective;
        // any rise is floating-point noise at convergence.
        converged = true;
        break;
      }
      if (prev - obj <= opts.tol * prev) {
        trace.push_back(obj);
        converged = true;
        break;
      }
    }
    trace.push_back(obj);

    Eigen::VectorXd numer = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd denom = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      numer += lambdas[i] * residuals[ui].cwiseProduct(masks[ui]);
      denom += lambdas[i] * lambdas[i] * masks[ui];
    }
    Eigen::VectorXd next = c;
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (denom[j] > 0.0) next[j] = numer[j] / denom[j];
    }
    double next_norm = next.norm();
    if (next_norm == 0.0) {
      // All coefficients vanished; the objective is flat from here.
      converged = true;
      break;
    }
    c = next / next_norm;
  }
  if (!converged) {
    // max_iter exhausted right after a direction update; refresh the
    // coefficients so the reported state is self-consistent.
    update_lambdas();
    double obj = objective();
    if (trace.empty() || obj <= trace.back()) trace.push_back(obj);
  }

  PrincipalAttributeResult result;
  result.lambdas = std::move(lambdas);
  result.element_indices = std::move(element_indices);
  result.objective_trace = std::move(trace);
  result.converged = converged;
  result.residual = structure_part + result.objective_trace.back();

  // Flag slots of the largest element that no nonzero-coefficient tree
  // covers; the data never constrains them.
  Eigen::VectorXd coverage = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    coverage += result.lambdas[i] * result.lambdas[i] *
                masks[static_cast<std::size_t>(i)];
  }
  const TreeTopology& largest = l.largest().topology();
  result.direction = Eigen::MatrixXd::Zero(
      arity, static_cast<Eigen::Index>(largest.node_count()));
  Eigen::Index col = 0;
  for (NodeIndex k : largest.indices()) {
    const Eigen::Index base =
        static_cast<Eigen::Index>(support.position_of(k)) * arity;
    const double scale = std::sqrt(w.at(k));
    for (int j = 0; j < arity; ++j) {
      result.direction(j, col) = c[base + j] / scale;
      if (coverage[base + j] == 0.0) {
        result.stale_slots.emplace_back(k, j);
      }
    }
    ++col;
  }

  // Sign convention: the largest-magnitude slot of the direction positive.
  Eigen::Index peak_row = 0;
  Eigen::Index peak_col = 0;
  result.direction.cwiseAbs().maxCoeff(&peak_row, &peak_col);
  if (result.direction(peak_row, peak_col) < 0.0) {
    result.direction = -result.direction;
    result.lambdas = -result.lambdas;
  }
  return result;
}

std::vector<std::size_t> projection_coefficients(const TreeSample& sample,
                                                 const StructureTreeline& l,
                                                 const WeightScheme& w) {
  std::vector<std::size_t> out;
  out.reserve(sample.size());
  for (const auto& t : sample.trees()) {
    out.push_back(project_onto_structure_treeline(t, l, w).element_index);
  }
  return out;
}

std::vector<FamilyCoefficient> projection_coefficients(
    const TreeSample& sample, const TreelineFamily& fam,
    const WeightScheme& w) {
  std::vector<FamilyCoefficient> out;
  out.reserve(sample.size());
  for (const auto& t : sample.trees()) {
    FamilyProjection p = project_onto_family(t, fam, w);
    out.push_back({p.element_index, p.lambda});
  }
  return out;
}

VariationReport variation_report(const TreeSample& sample,
                                 const WeightScheme& w,
                                 const AlsOptions& opts) {
  AttributedTree center = median_mean_tree(sample);
  AttributedTree host = average_support_tree(sample);
  TotalVariation total = total_variation(sample, center, w);
  PrincipalStructureResult structure =
      principal_structure_treeline(sample, center, host, w);

  VariationReport report{std::move(center), total,     std::move(structure),
                         std::nullopt,      0.0,        0.0,
                         0.0};
  report.structure_explained = report.structure.explained;
  try {
    PrincipalAttributeResult attribute = principal_attribute_direction(
        sample, report.structure.treeline, w, opts);
    report.attribute_explained = report.structure.residual - attribute.residual;
    report.residual = attribute.residual;
    report.attribute = std::move(attribute);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSample) throw;
    report.attribute_explained = 0.0;
    report.residual = report.structure.residual;
  }
  return report;
}

}  // namespace treespace
