#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypfill/calculus.hpp"
#include "hypfill/functions.hpp"
#include "hypfill/interp.hpp"
#include "hypfill/io.hpp"
#include "hypfill/norms.hpp"
#include "hypfill/verify.hpp"

namespace {

using namespace hypfill;

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

std::string output_dir() {
  if (const char* env = std::getenv("HYPFILL_OUT")) {
    if (*env) return env;
  }
  return ".";
}

std::string in_out_dir(const std::string& name) {
  return (std::filesystem::path(output_dir()) / name).string();
}

std::pair<int, int> parse_levels(const std::string& arg) {
  const auto colon = arg.find(':');
  if (colon == std::string::npos)
    throw ParseError("levels must be given as n_min:n_max, got '" + arg + "'");
  try {
    const int a = std::stoi(arg.substr(0, colon));
    const int b = std::stoi(arg.substr(colon + 1));
    return {a, b};
  } catch (const std::exception&) {
    throw ParseError("levels must be integers n_min:n_max, got '" + arg + "'");
  }
}

void print_warnings(const HyperbolicFilling<double>& filling) {
  for (const auto& w : filling.warnings()) std::cerr << "warning: " << w << "\n";
}

/// Shared space+filling options: the filling comes from an exported JSON
/// file, or is rebuilt from a level range.
struct GraphArgs {
  std::string space_arg;
  std::string filling_path;
  std::string levels = "0:9";

  void attach(CLI::App* cmd) {
    cmd->add_option("--space", space_arg, "space generator spec (grid1d:N, gridd:N,D, circle:N, cantor:D) or CSV/JSON file")
        ->required();
    cmd->add_option("--filling", filling_path, "filling JSON exported by `build`");
    cmd->add_option("--levels", levels, "level range n_min:n_max (default 0:9)");
  }

  std::pair<PointCloudSpace<double>, HyperbolicFilling<double>> load() const {
    PointCloudSpace<double> space = resolve_space_arg(space_arg);
    if (!filling_path.empty()) {
      auto filling = filling_from_json(load_json(filling_path), space);
      return {std::move(space), std::move(filling)};
    }
    auto [a, b] = parse_levels(levels);
    auto filling = build_filling(space, a, b);
    print_warnings(filling);
    return {std::move(space), std::move(filling)};
  }
};

VecX<double> sample_function_arg(const PointCloudSpace<double>& space, const std::string& arg) {
  if (std::filesystem::exists(arg)) return load_sequence(arg, "sample", space.size());
  return builtin_sample_function(space, arg);
}

int cmd_build(const GraphArgs& graph, const std::string& out_prefix) {
  auto [space, filling] = graph.load();
  const auto report = check_filling(filling, space);

  const std::string space_path = in_out_dir(out_prefix + "space.json");
  const std::string filling_path = in_out_dir(out_prefix + "filling.json");
  const std::string structure_path = in_out_dir(out_prefix + "structure.json");
  save_json(space_path, space_to_json(space));
  save_json(filling_path, filling_to_json(filling));
  save_json(structure_path, structure_report_to_json(report));

  std::cout << "space:     " << space_path << "  (" << space.size() << " points)\n"
            << "filling:   " << filling_path << "  (" << filling.vertex_count() << " vertices, "
            << filling.edge_count() << " edges, levels " << filling.level_min() << ".."
            << filling.level_max() << ")\n"
            << "structure: " << structure_path << "  (" << (report.ok() ? "ok" : "VIOLATED")
            << ")\n";
  return report.ok() ? kExitPass : kExitCheckFailure;
}

int cmd_extend(const GraphArgs& graph, const std::string& function_arg,
               const std::string& out_file) {
  auto [space, filling] = graph.load();
  const VecX<double> f = sample_function_arg(space, function_arg);
  const VecX<double> u = poisson_extend(space, filling, f);
  const std::string path = out_file.empty() ? in_out_dir("extend.json") : out_file;
  save_json(path, sequence_to_json(u, "vertex"));
  std::cout << "vertex sequence written to " << path << "\n";
  return kExitPass;
}

int cmd_derive(const GraphArgs& graph, const std::string& input, const std::string& mode,
               const std::string& out_file) {
  auto [space, filling] = graph.load();
  const VecX<double> u = load_sequence(input, "vertex", filling.vertex_count());
  const std::string path = out_file.empty() ? in_out_dir("derive.json") : out_file;
  if (mode == "vertex") {
    save_json(path, sequence_to_json(vertex_derivative(filling, u), "vertex"));
  } else if (mode == "edge") {
    save_json(path, sequence_to_json(edge_derivative(filling, u), "edge"));
  } else {
    throw ParseError("--mode must be vertex or edge, got '" + mode + "'");
  }
  std::cout << mode << " derivative written to " << path << "\n";
  return kExitPass;
}

int cmd_trace(const GraphArgs& graph, const std::string& input, const std::string& compare,
              const std::string& out_file) {
  auto [space, filling] = graph.load();
  const VecX<double> u = load_sequence(input, "vertex", filling.vertex_count());
  const auto tr = trace(filling, space, u);
  const std::string path = out_file.empty() ? in_out_dir("trace.json") : out_file;
  save_json(path, sequence_to_json(tr.values, "sample"));
  std::cout << "trace written to " << path << "\nL1 increments:";
  for (double inc : tr.l1_increments) std::cout << " " << inc;
  std::cout << "\n";
  if (!compare.empty()) {
    const VecX<double> f = sample_function_arg(space, compare);
    std::cout << "max deviation from " << compare << ": "
              << (tr.values - f).cwiseAbs().maxCoeff() << "\n";
  }
  return kExitPass;
}

int cmd_integrate(const GraphArgs& graph, const std::string& input, Index basepoint,
                  const std::string& out_file) {
  auto [space, filling] = graph.load();
  const VecX<double> w = load_sequence(input, "edge", filling.edge_count());
  const VecX<double> g = integrate_edges(filling, space, w, basepoint);
  const std::string path = out_file.empty() ? in_out_dir("integrate.json") : out_file;
  save_json(path, sequence_to_json(g, "sample"));
  std::cout << "sample function written to " << path << "\n";
  return kExitPass;
}

int cmd_norm(const GraphArgs& graph, const std::string& function_arg, const std::string& s_arg,
             const std::string& p_arg, const std::string& q_arg, const std::string& form_arg,
             const std::string& report_path) {
  auto [space, filling] = graph.load();
  const VecX<double> f = sample_function_arg(space, function_arg);
  const auto prm = NormParams<double>::make(parse_extended_real(s_arg),
                                            parse_extended_real(p_arg),
                                            parse_extended_real(q_arg));
  NormForm form;
  if (form_arg == "weighted")
    form = NormForm::weighted;
  else if (form_arg == "overlap")
    form = NormForm::overlap;
  else
    throw ParseError("--form must be weighted or overlap, got '" + form_arg + "'");

  const VecX<double> du = vertex_derivative(filling, poisson_extend(space, filling, f));
  const double norm = seq_norm_x(filling, space, du, prm, form);
  const auto levels = seq_norm_x_levels(filling, space, du, prm, form);

  json j;
  j["norm"] = norm;
  j["form"] = form_arg;
  j["params"] = norm_params_to_json(prm);
  j["admissible"] = prm.admissible(estimate_doubling(space, 512).Q);
  json per_level = json::array();
  for (std::size_t k = 0; k < levels.size(); ++k)
    per_level.push_back(json{{"level", filling.level_min() + static_cast<int>(k)},
                             {"value", levels[k]}});
  j["levels"] = per_level;
  const std::string path = report_path.empty() ? in_out_dir("norm.json") : report_path;
  save_json(path, j);
  std::cout << "norm = " << norm << "  (report " << path << ")\n";
  return kExitPass;
}

int cmd_interp(const GraphArgs& graph, const std::string& params0, const std::string& params1,
               double theta, const std::string& input, const std::string& report_path) {
  auto parse_params = [](const std::string& arg) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : arg) {
      if (ch == ',') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
    if (parts.size() != 3) throw ParseError("params must be s,p,q, got '" + arg + "'");
    return NormParams<double>::make(parse_extended_real(parts[0]), parse_extended_real(parts[1]),
                                    parse_extended_real(parts[2]));
  };
  const auto P0 = parse_params(params0);
  const auto P1 = parse_params(params1);

  auto [space, filling] = graph.load();
  auto [u, kind] = sequence_from_json(load_json(input));
  LeveledItems<double> items;
  if (kind == "vertex")
    items = vertex_items(filling);
  else if (kind == "edge")
    items = edge_items(filling);
  else
    throw ParseError(input + ": interp needs a vertex or edge sequence, got '" + kind + "'");
  if (u.size() != items.size())
    throw ParseError(input + ": sequence length does not match the filling");

  const auto cert = calderon_factorize(items, u, P0, P1, theta);
  const bool ok = validate_certificate(cert, u);
  const std::string path = report_path.empty() ? in_out_dir("interp-cert.json") : report_path;
  save_json(path, certificate_to_json(cert));
  std::cout << "certificate written to " << path << "\n"
            << "max pointwise error " << cert.max_pointwise_error << ", bound ratio "
            << cert.bound_ratio << ", identity " << (ok ? "verified" : "VIOLATED") << "\n";
  return ok ? kExitPass : kExitCheckFailure;
}

int cmd_verify(const std::vector<std::string>& spaces, const std::string& levels,
               std::uint64_t seed, const std::string& suite, const std::string& report_path) {
  verify::VerifyConfig config;
  if (!spaces.empty()) config.spaces = spaces;
  auto [a, b] = parse_levels(levels);
  config.level_min = a;
  config.level_max = b;
  config.seed = seed;

  if (suite != "all" && !verify::is_suite_name(suite))
    throw ParseError("--suite must be one of structure, calculus, norms, hajlasz, interp, all");

  const auto report = verify::run_verification(config, {suite});

  int failed = 0, total = 0;
  for (const auto& s : report.suites) {
    std::cout << "suite " << s.suite << "\n";
    for (const auto& ch : s.checks) {
      ++total;
      if (!ch.pass) ++failed;
      std::cout << "  [" << (ch.pass ? "PASS" : "FAIL") << "] " << ch.name
                << "  measured=" << ch.measured << " threshold=" << ch.threshold << "  ("
                << ch.runtime_ms << " ms)\n";
      if (!ch.pass)
        std::cout << "         anchor " << ch.anchor << ": " << ch.detail << "\n";
    }
  }
  const std::string path =
      report_path.empty() ? in_out_dir("verify-" + suite + ".json") : report_path;
  detail::write_file(path, verify::canonical_dump(report));
  std::cout << "report " << path << " (config " << verify::config_fingerprint(config) << ")\n"
            << (failed == 0 ? "all checks passed" : std::to_string(failed) + " of " +
                                                        std::to_string(total) +
                                                        " checks FAILED")
            << "\n";
  return failed == 0 ? kExitPass : kExitCheckFailure;
}

int cmd_report(const std::string& input, const std::string& csv_path) {
  const json j = load_json(input);
  int failed = 0, total = 0;
  std::string csv = "suite,check,anchor,pass,measured,threshold\n";
  for (const auto& s : j.at("suites")) {
    const std::string suite = s.at("suite").get<std::string>();
    for (const auto& ch : s.at("checks")) {
      ++total;
      const bool pass = ch.at("pass").get<bool>();
      if (!pass) ++failed;
      std::cout << "[" << (pass ? "PASS" : "FAIL") << "] " << suite << " / "
                << ch.at("name").get<std::string>() << "  measured="
                << ch.at("measured").get<double>() << " threshold="
                << ch.at("threshold").get<double>() << "\n";
      csv += suite + "," + ch.at("name").get<std::string>() + "," +
             ch.at("anchor").get<std::string>() + "," + (pass ? "1" : "0") + "," +
             std::to_string(ch.at("measured").get<double>()) + "," +
             std::to_string(ch.at("threshold").get<double>()) + "\n";
    }
  }
  std::cout << total - failed << "/" << total << " checks passed (config "
            << j.value("config_hash", std::string("?")) << ")\n";
  if (!csv_path.empty()) {
    detail::write_file(csv_path, csv);
    std::cout << "csv " << csv_path << "\n";
  }
  return failed == 0 ? kExitPass : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiscale hierarchies, discrete calculus and sequence-space interpolation "
               "over finite metric measure spaces"};
  app.require_subcommand(1);

  // build
  GraphArgs build_graph;
  std::string build_prefix;
  auto* build = app.add_subcommand("build", "build a filling and write space/filling/structure JSON");
  build_graph.attach(build);
  build->add_option("--prefix", build_prefix, "output filename prefix");

  // extend
  GraphArgs extend_graph;
  std::string extend_function, extend_out;
  auto* extend = app.add_subcommand("extend", "average a sample function onto filling vertices");
  extend_graph.attach(extend);
  extend->add_option("--function", extend_function, "builtin name or sample sequence JSON")
      ->required();
  extend->add_option("--out-file", extend_out, "output vertex sequence path");

  // derive
  GraphArgs derive_graph;
  std::string derive_input, derive_mode = "vertex", derive_out;
  auto* derive = app.add_subcommand("derive", "discrete derivative of a vertex sequence");
  derive_graph.attach(derive);
  derive->add_option("--input", derive_input, "vertex sequence JSON")->required();
  derive->add_option("--mode", derive_mode, "vertex (magnitude) or edge (signed)");
  derive->add_option("--out-file", derive_out, "output sequence path");

  // trace
  GraphArgs trace_graph;
  std::string trace_input, trace_compare, trace_out;
  auto* tracec = app.add_subcommand("trace", "boundary trace of a vertex sequence");
  trace_graph.attach(tracec);
  tracec->add_option("--input", trace_input, "vertex sequence JSON")->required();
  tracec->add_option("--function", trace_compare, "optional builtin/sample to compare against");
  tracec->add_option("--out-file", trace_out, "output sample sequence path");

  // integrate
  GraphArgs integrate_graph;
  std::string integrate_input, integrate_out;
  Index integrate_basepoint = 0;
  auto* integrate = app.add_subcommand("integrate", "integrate an edge sequence to a sample function");
  integrate_graph.attach(integrate);
  integrate->add_option("--input", integrate_input, "edge sequence JSON")->required();
  integrate->add_option("--basepoint", integrate_basepoint, "point id pinning the constant");
  integrate->add_option("--out-file", integrate_out, "output sample sequence path");

  // norm
  GraphArgs norm_graph;
  std::string norm_function, norm_s = "0.5", norm_p = "2", norm_q = "2";
  std::string norm_form = "weighted", norm_report;
  auto* norm = app.add_subcommand("norm", "smoothness norm of a sample function");
  norm_graph.attach(norm);
  norm->add_option("--function", norm_function, "builtin name or sample sequence JSON")
      ->required();
  norm->add_option("--s", norm_s, "smoothness exponent");
  norm->add_option("--p", norm_p, "integrability exponent (accepts inf)");
  norm->add_option("--q", norm_q, "summability exponent (accepts inf)");
  norm->add_option("--form", norm_form, "weighted or overlap");
  norm->add_option("--report", norm_report, "report JSON path");

  // interp
  GraphArgs interp_graph;
  std::string interp_params0, interp_params1, interp_input, interp_report;
  double interp_theta = 0.5;
  auto* interp = app.add_subcommand("interp", "factorize a sequence between two parameter triples");
  interp_graph.attach(interp);
  interp->add_option("--params0", interp_params0, "endpoint parameters s,p,q")->required();
  interp->add_option("--params1", interp_params1, "endpoint parameters s,p,q")->required();
  interp->add_option("--theta", interp_theta, "interpolation parameter in (0,1)")->required();
  interp->add_option("--input", interp_input, "vertex or edge sequence JSON")->required();
  interp->add_option("--report", interp_report, "certificate JSON path");

  // verify
  std::vector<std::string> verify_spaces;
  std::string verify_levels = "0:9", verify_suite = "all", verify_report;
  std::uint64_t verify_seed = verify::VerifyConfig{}.seed;
  auto* verifyc = app.add_subcommand("verify", "run property suites and write a report");
  verifyc->add_option("--space", verify_spaces,
                      "space specs (repeatable; default grid1d:512 circle:512 cantor:6)");
  verifyc->add_option("--levels", verify_levels, "level range n_min:n_max");
  verifyc->add_option("--seed", verify_seed, "random seed for the sampled checks");
  verifyc->add_option("--suite", verify_suite, "structure, calculus, norms, hajlasz, interp or all");
  verifyc->add_option("--report", verify_report, "report JSON path");

  // report
  std::string report_input, report_csv;
  auto* reportc = app.add_subcommand("report", "summarize a verification report");
  reportc->add_option("--input", report_input, "report JSON from `verify`")->required();
  reportc->add_option("--csv", report_csv, "write a plot-ready CSV of the checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (build->parsed()) return cmd_build(build_graph, build_prefix);
    if (extend->parsed()) return cmd_extend(extend_graph, extend_function, extend_out);
    if (derive->parsed()) return cmd_derive(derive_graph, derive_input, derive_mode, derive_out);
    if (tracec->parsed()) return cmd_trace(trace_graph, trace_input, trace_compare, trace_out);
    if (integrate->parsed())
      return cmd_integrate(integrate_graph, integrate_input, integrate_basepoint, integrate_out);
    if (norm->parsed())
      return cmd_norm(norm_graph, norm_function, norm_s, norm_p, norm_q, norm_form, norm_report);
    if (interp->parsed())
      return cmd_interp(interp_graph, interp_params0, interp_params1, interp_theta, interp_input,
                        interp_report);
    if (verifyc->parsed())
      return cmd_verify(verify_spaces, verify_levels, verify_seed, verify_suite, verify_report);
    if (reportc->parsed()) return cmd_report(report_input, report_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
