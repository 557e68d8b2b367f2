#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "treespace/center.hpp"
#include "treespace/corpus.hpp"
#include "treespace/principal.hpp"
#include "treespace/synthetic.hpp"

namespace {

using nlohmann::json;
using namespace treespace;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::SyntaxError, "cannot read '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    throw Error(ErrorCode::SyntaxError, "cannot write '" + path + "'");
  }
}

std::string csv_escape(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

void flatten(const json& node, const std::string& path, std::string& out) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) {
      flatten(value, path.empty() ? key : path + "." + key, out);
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      flatten(node[i], path + "." + std::to_string(i), out);
    }
  } else if (node.is_null()) {
    out += csv_escape(path) + ",\n";
  } else if (node.is_string()) {
    out += csv_escape(path) + "," + csv_escape(node.get<std::string>()) + "\n";
  } else {
    out += csv_escape(path) + "," + node.dump() + "\n";
  }
}

std::string render(const json& doc, const std::string& format) {
  if (format == "csv") {
    std::string out = "path,value\n";
    flatten(doc, "", out);
    return out;
  }
  return doc.dump(2) + "\n";
}

json topology_json(const TreeTopology& topology) {
  json out = json::array();
  for (NodeIndex k : topology.indices()) out.push_back(k);
  return out;
}

json tree_json(const AttributedTree& tree) {
  json nodes = json::array();
  Eigen::Index col = 0;
  for (NodeIndex k : tree.topology().indices()) {
    json a = json::array();
    for (int j = 0; j < tree.arity(); ++j) a.push_back(tree.attrs()(j, col));
    nodes.push_back(json{{"k", k}, {"a", std::move(a)}});
    ++col;
  }
  return json{{"nodes", std::move(nodes)}};
}

json direction_json(const Eigen::MatrixXd& direction,
                    const TreeTopology& topology) {
  json nodes = json::array();
  Eigen::Index col = 0;
  for (NodeIndex k : topology.indices()) {
    json c = json::array();
    for (Eigen::Index j = 0; j < direction.rows(); ++j) {
      c.push_back(direction(j, col));
    }
    nodes.push_back(json{{"k", k}, {"c", std::move(c)}});
    ++col;
  }
  return nodes;
}

struct SharedConfig {
  std::string input;
  std::string weights = "exponential";
  std::string format = "json";
  std::string out;
  bool normalize = false;
  bool canonicalize = false;
};

void add_shared_options(CLI::App* cmd, SharedConfig& cfg, bool with_input = true) {
  if (with_input) {
    cmd->add_option("input", cfg.input, "corpus file")->required();
  }
  cmd->add_option("--weights", cfg.weights,
                  "weight scheme: exponential, equal, or the corpus file's")
      ->check(CLI::IsMember({"exponential", "equal", "file"}));
  cmd->add_option("--format", cfg.format, "output encoding")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--out", cfg.out, "output path (stdout when omitted)");
  cmd->add_flag("--normalize,!--no-normalize", cfg.normalize,
                "center and scale attributes before computing");
  cmd->add_flag("--canonicalize", cfg.canonicalize,
                "relabel single children as left children on ingestion");
}

WeightScheme select_weights(const SharedConfig& cfg, const Corpus& corpus,
                            const TreeTopology& support) {
  if (cfg.weights == "equal") return WeightScheme::equal(support);
  if (cfg.weights == "file") {
    if (!corpus.weights) {
      throw Error(ErrorCode::InvalidWeights,
                  "--weights file needs a weights block in the corpus");
    }
    return materialize(*corpus.weights, support);
  }
  return WeightScheme::exponential(support);
}

struct LoadedSample {
  Corpus corpus;
  TreeSample sample;                         // possibly normalized
  std::optional<NormalizationRecord> record; // set when normalized
};

LoadedSample load_sample(const SharedConfig& cfg) {
  ParseOptions opts;
  opts.canonicalize_single_children = cfg.canonicalize;
  Corpus corpus = parse_corpus(read_file(cfg.input), opts);
  if (!cfg.normalize) {
    TreeSample sample = corpus.sample;
    return {std::move(corpus), std::move(sample), std::nullopt};
  }
  auto [sample, record] = normalize(corpus.sample);
  return {std::move(corpus), std::move(sample), std::move(record)};
}

int cmd_validate(const SharedConfig& cfg) {
  ParseOptions opts;
  opts.canonicalize_single_children = cfg.canonicalize;
  Corpus corpus = parse_corpus(read_file(cfg.input), opts);
  json doc;
  doc["arity"] = corpus.sample.arity();
  doc["slots"] = corpus.slots;
  json trees = json::array();
  for (std::size_t i = 0; i < corpus.sample.size(); ++i) {
    const AttributedTree& t = corpus.sample[i];
    trees.push_back(json{{"id", corpus.ids[i]},
                         {"nodes", t.topology().node_count()},
                         {"max_level", t.topology().max_level()}});
  }
  doc["trees"] = std::move(trees);
  write_output(cfg.out, render(doc, cfg.format));
  return 0;
}

int cmd_center(const SharedConfig& cfg) {
  LoadedSample loaded = load_sample(cfg);
  const TreeSample& sample = loaded.sample;

  MedianFamily family = median_family(sample);
  AttributedTree median_mean = median_mean_tree(sample);
  AttributedTree average_support = average_support_tree(sample);

  json doc;
  doc["normalized"] = loaded.record.has_value();
  json family_json;
  family_json["required"] = topology_json(family.required);
  json optional_nodes = json::array();
  for (NodeIndex k : family.optional) optional_nodes.push_back(k);
  family_json["optional"] = std::move(optional_nodes);
  family_json["count"] = family.member_count();
  if (family.optional.size() <= 20 && family.member_count() <= 4096) {
    json medians = json::array();
    for (const TreeTopology& m : enumerate_medians(family)) {
      medians.push_back(topology_json(m));
    }
    family_json["medians"] = std::move(medians);
  }
  doc["median_family"] = std::move(family_json);
  doc["minimal_median"] = topology_json(family.required);
  doc["median_mean"] = tree_json(median_mean);
  doc["average_support"] = tree_json(average_support);
  if (loaded.record) {
    doc["median_mean_original"] =
        tree_json(denormalize(median_mean, *loaded.record));
    doc["average_support_original"] =
        tree_json(denormalize(average_support, *loaded.record));
  }
  write_output(cfg.out, render(doc, cfg.format));
  return 0;
}

int cmd_distance(const SharedConfig& cfg, const std::string& id1,
                 const std::string& id2) {
  LoadedSample loaded = load_sample(cfg);
  const TreeSample& sample = loaded.sample;
  const AttributedTree& s = sample[loaded.corpus.index_of(id1)];
  const AttributedTree& t = sample[loaded.corpus.index_of(id2)];
  WeightScheme w = select_weights(cfg, loaded.corpus, support_tree(sample));

  double f = fractional_distance(s, t, w);
  int d = integer_distance(s.topology(), t.topology());
  json doc;
  doc["id1"] = id1;
  doc["id2"] = id2;
  doc["weights"] = cfg.weights == "file"
                       ? weight_kind_name(loaded.corpus.weights->kind)
                       : cfg.weights;
  doc["normalized"] = loaded.record.has_value();
  doc["integer_distance"] = d;
  doc["fractional_distance"] = f;
  doc["delta"] = d + f;
  doc["variation"] = d + f * f;
  write_output(cfg.out, render(doc, cfg.format));
  return 0;
}

int cmd_analyze(const SharedConfig& cfg, const AlsOptions& opts) {
  LoadedSample loaded = load_sample(cfg);
  const TreeSample& sample = loaded.sample;
  WeightScheme w = select_weights(cfg, loaded.corpus, support_tree(sample));

  VariationReport report = variation_report(sample, w, opts);
  const StructureTreeline& line = report.structure.treeline;
  bool converged = !report.attribute || report.attribute->converged;

  json doc;
  doc["normalized"] = loaded.record.has_value();
  doc["weights"] = cfg.weights == "file"
                       ? weight_kind_name(loaded.corpus.weights->kind)
                       : cfg.weights;
  doc["report"] = json{{"total", report.total.total},
                       {"total_structure", report.total.structure},
                       {"total_attribute", report.total.attribute},
                       {"structure_explained", report.structure_explained},
                       {"attribute_explained", report.attribute_explained},
                       {"residual", report.residual},
                       {"converged", converged}};
  doc["centerpoint"] = tree_json(report.centerpoint);
  json chain = json::array();
  for (NodeIndex k : line.chain()) chain.push_back(k);
  doc["structure_treeline"] =
      json{{"base", topology_json(line.element(0).topology())},
           {"chain", std::move(chain)}};

  // Weighted norms of the original-scale per-element direction subvectors,
  // turning normalized-scale coefficients into original-scale ones.
  std::vector<double> original_norms;
  if (report.attribute) {
    const PrincipalAttributeResult& attribute = *report.attribute;
    const TreeTopology& largest = line.largest().topology();
    json stale = json::array();
    for (const auto& [k, slot] : attribute.stale_slots) {
      stale.push_back(json{{"k", k}, {"slot", slot}});
    }
    doc["attribute_direction"] =
        json{{"nodes", direction_json(attribute.direction, largest)},
             {"stale", std::move(stale)}};
    doc["objective_trace"] = attribute.objective_trace;
    if (loaded.record) {
      Eigen::MatrixXd original = denormalize_direction(
          attribute.direction, largest, *loaded.record);
      doc["attribute_direction_original"] =
          json{{"nodes", direction_json(original, largest)}};
      original_norms.resize(line.element_count());
      for (std::size_t i = 0; i < line.element_count(); ++i) {
        double sq = 0.0;
        const TreeTopology& topology = line.element(i).topology();
        for (NodeIndex k : topology.indices()) {
          auto col = static_cast<Eigen::Index>(largest.position_of(k));
          sq += w.at(k) * original.col(col).squaredNorm();
        }
        original_norms[i] = std::sqrt(sq);
      }
    }
  } else {
    doc["attribute_direction"] = nullptr;
  }

  json coefficients = json::array();
  for (std::size_t i = 0; i < sample.size(); ++i) {
    json row;
    row["id"] = loaded.corpus.ids[i];
    row["element"] = report.structure.element_indices[i];
    double lambda =
        report.attribute ? report.attribute->lambdas[static_cast<Eigen::Index>(i)]
                         : 0.0;
    row["lambda"] = lambda;
    if (!original_norms.empty()) {
      row["lambda_original"] =
          lambda * original_norms[report.structure.element_indices[i]];
    }
    coefficients.push_back(std::move(row));
  }
  doc["coefficients"] = std::move(coefficients);

  write_output(cfg.out, render(doc, cfg.format));
  return converged ? 0 : 3;
}

int cmd_synth(const SyntheticSpec& spec, const std::string& plan,
              const std::string& out, const std::string& meta) {
  SyntheticSpec resolved = spec;
  resolved.plan =
      plan == "fork" ? TopologyPlan::Fork : TopologyPlan::LeftChain;
  SyntheticResult result = generate_synthetic(resolved);
  write_output(out, serialize_corpus(result.corpus));
  std::string meta_path = meta;
  if (meta_path.empty() && !out.empty()) meta_path = out + ".meta.json";
  if (!meta_path.empty()) {
    write_output(meta_path, serialize_metadata(result.metadata));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"analysis of populations of attributed binary trees"};
  app.require_subcommand(1);
  std::function<int()> action;

  SharedConfig validate_cfg;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "parse a corpus and report per-tree shape");
  add_shared_options(validate_cmd, validate_cfg);
  validate_cmd->callback([&] { action = [&] { return cmd_validate(validate_cfg); }; });

  SharedConfig center_cfg;
  CLI::App* center_cmd = app.add_subcommand(
      "center", "median family, median-mean and average support trees");
  add_shared_options(center_cmd, center_cfg);
  center_cmd->callback([&] { action = [&] { return cmd_center(center_cfg); }; });

  SharedConfig distance_cfg;
  std::string id1, id2;
  CLI::App* distance_cmd =
      app.add_subcommand("distance", "metric components for a pair of trees");
  add_shared_options(distance_cmd, distance_cfg);
  distance_cmd->add_option("id1", id1, "first tree id")->required();
  distance_cmd->add_option("id2", id2, "second tree id")->required();
  distance_cmd->callback(
      [&] { action = [&] { return cmd_distance(distance_cfg, id1, id2); }; });

  SharedConfig analyze_cfg;
  analyze_cfg.normalize = true;
  AlsOptions als;
  CLI::App* analyze_cmd = app.add_subcommand(
      "analyze", "variation decomposition and principal treelines");
  add_shared_options(analyze_cmd, analyze_cfg);
  analyze_cmd->add_option("--max-iter", als.max_iter, "iteration cap")
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--tol", als.tol, "relative convergence tolerance")
      ->check(CLI::NonNegativeNumber);
  analyze_cmd->callback(
      [&] { action = [&] { return cmd_analyze(analyze_cfg, als); }; });

  SyntheticSpec spec;
  std::string plan = "left_chain";
  std::string synth_out, synth_meta;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a corpus with planted structure");
  synth_cmd->add_option("--n", spec.n, "number of trees");
  synth_cmd->add_option("--plan", plan, "topology plan")
      ->check(CLI::IsMember({"left_chain", "fork"}));
  synth_cmd->add_option("--depth", spec.depth, "deepest level (left_chain)");
  synth_cmd->add_option("--arity", spec.arity, "attribute slots per node");
  synth_cmd->add_option("--noise", spec.noise, "attribute noise level");
  synth_cmd->add_option("--flip", spec.flip_fraction,
                        "fraction of trees with reversed direction");
  synth_cmd->add_option("--seed", spec.seed, "random seed");
  synth_cmd->add_option("--out", synth_out, "corpus path (stdout when omitted)");
  synth_cmd->add_option("--meta", synth_meta, "metadata path");
  synth_cmd->callback([&] {
    action = [&] { return cmd_synth(spec, plan, synth_out, synth_meta); };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    return action();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
