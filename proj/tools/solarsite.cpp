// solarsite: command-line front end for the site-suitability pipeline.
//
// Exit codes: 0 success, 2 validation failure, 1 runtime error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "solarsite/pipeline.hpp"
#include "solarsite/service.hpp"
#include "solarsite/synth.hpp"

namespace fs = std::filesystem;
using namespace solarsite;

namespace {

void print_summary(const SuitabilityResult& r) {
  std::printf("%-6s %14s %14s %9s %9s %14s %14s\n", "class", "full_km2", "exploit_km2", "full_%", "expl_%",
              "gp_full_TWh", "gp_expl_TWh");
  for (std::size_t k = 0; k < r.areas.rows.size(); ++k) {
    const auto& a = r.areas.rows[k];
    const auto& e = r.energy[k];
    std::printf("%-6d %14.2f %14.2f %9.2f %9.2f %14.4f %14.4f\n", a.cls, a.full_km2, a.exploit_km2, a.full_pct,
                a.exploit_pct, e.gp_full_twh, e.gp_exploit_twh);
  }
  std::printf("scored %.2f km2, exploitable %.2f km2\n", r.areas.scored_km2(), r.areas.exploitable_km2());
  if (r.capacity_mw_per_km2) std::printf("capacity density (best class, exploitable): %.2f MW/km2\n", *r.capacity_mw_per_km2);
}

int cmd_synth(const SynthSpec& spec, const fs::path& out) {
  const auto ds = synth_dataset(spec, out);
  std::printf("wrote synthetic dataset %zux%zu (cellsize %g m) to %s\n", spec.rows, spec.cols, spec.cellsize,
              out.string().c_str());
  std::printf("constrained fraction %.4f (target %.4f)\n", ds.constraint_fraction, spec.constraint_fraction);
  return 0;
}

int cmd_run(const fs::path& config, const fs::path& out, bool override_cr) {
  const Scenario sc = load_scenario_file(config, override_cr);
  const RunResult rr = run(sc, out);
  for (const auto& w : rr.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  print_summary(rr.result);
  std::printf("outputs written to %s\n", out.string().c_str());
  return 0;
}

int cmd_ahp(const fs::path& matrix_file) {
  std::ifstream in(matrix_file);
  if (!in) throw ValidationError("cannot open matrix file " + matrix_file.string());
  const auto m = ahp::validate_matrix(ahp::read_matrix(in));
  const auto ev = ahp::evaluate(m);
  for (std::size_t i = 0; i < ev.weights.size(); ++i) std::printf("w[%zu] = %.12f\n", i, ev.weights[i]);
  std::printf("lambda_max = %.12f\nCI = %.12f\nRI = %.2f\nCR = %.12f\nconsistent = %s\n", ev.report.lambda_max,
              ev.report.ci, ev.report.ri, ev.report.cr, ev.report.consistent ? "yes" : "no");
  return 0;
}

int cmd_sensitivity(const fs::path& config, const std::string& exclude, const fs::path& out, bool override_cr) {
  const Scenario sc = load_scenario_file(config, override_cr);
  RunResult rr = evaluate_scenario(sc, exclude.empty());
  if (!exclude.empty()) rr.sensitivity = {sensitivity(rr.inputs, rr.result, criterion_from_string(exclude))};
  const std::string table = sensitivity_csv(rr.sensitivity, rr.result.areas.rows.size());
  if (out.empty()) {
    std::cout << table;
  } else {
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    std::ofstream f(out, std::ios::binary);
    f << table;
    std::printf("sensitivity table written to %s\n", out.string().c_str());
  }
  return 0;
}

int cmd_render(const fs::path& classes, const fs::path& out) {
  const Grid g = read_grid_file(classes);
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error("cannot write " + out.string());
  f << render_class_map(g);
  std::printf("class map written to %s\n", out.string().c_str());
  return 0;
}

int cmd_serve(const std::string& bind, const fs::path& data_root, const fs::path& work_dir, std::size_t workers) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw ValidationError("--bind expects host:port");
  const std::string host = bind.substr(0, colon);
  const int port = std::stoi(bind.substr(colon + 1));
  ScenarioService svc({data_root, work_dir, workers});
  httplib::Server srv;
  svc.register_routes(srv);
  std::printf("serving on %s (data root %s)\n", bind.c_str(), data_root.string().c_str());
  std::fflush(stdout);
  if (!srv.listen(host, port)) throw Error("cannot listen on " + bind);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Raster multi-criteria site suitability for solar farms"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out;
  std::uint64_t seed = 42;
  bool override_cr = false;
  app.add_option("--out", out, "Output file or directory");
  app.add_option("--seed", seed, "Random seed for synthetic data");
  app.add_flag("--override-cr", override_cr, "Accept pairwise matrices with CR above 0.05");

  SynthSpec spec;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic province dataset");
  synth->add_option("--rows", spec.rows, "Grid rows");
  synth->add_option("--cols", spec.cols, "Grid columns");
  synth->add_option("--cellsize", spec.cellsize, "Cell size in metres");
  synth->add_option("--constraint-fraction", spec.constraint_fraction, "Target constrained land fraction");
  synth->add_option("--settlements", spec.settlements, "Number of settlements");
  synth->add_option("--roads", spec.roads, "Number of road polylines");
  synth->add_option("--grid-lines", spec.grid_lines, "Number of power lines");

  std::string config;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write all artifacts");
  run_cmd->add_option("config", config, "Scenario config (JSON)")->required();

  std::string matrix;
  auto* ahp_cmd = app.add_subcommand("ahp", "Evaluate a pairwise comparison matrix");
  ahp_cmd->add_option("matrix", matrix, "Matrix file")->required();

  std::string exclude;
  auto* sens_cmd = app.add_subcommand("sensitivity", "Leave-one-criterion-out sensitivity table");
  sens_cmd->add_option("config", config, "Scenario config (JSON)")->required();
  sens_cmd->add_option("--exclude", exclude, "Single criterion to exclude (default: all but GHI)");

  std::string classes;
  auto* render_cmd = app.add_subcommand("render", "Render a class grid to PNG");
  render_cmd->add_option("classes", classes, "Class grid file")->required();

  std::string bind = "127.0.0.1:8080", data_root = ".", work_dir = "solarsite-runs";
  std::size_t workers = 1;
  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP service");
  serve_cmd->add_option("--bind", bind, "host:port");
  serve_cmd->add_option("--data-root", data_root, "Directory scenario paths are resolved against");
  serve_cmd->add_option("--work-dir", work_dir, "Directory for run outputs");
  serve_cmd->add_option("--workers", workers, "Concurrent pipeline runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      spec.seed = seed;
      return cmd_synth(spec, out.empty() ? fs::path("synth") : fs::path(out));
    }
    if (*run_cmd) return cmd_run(config, out.empty() ? fs::path("out") : fs::path(out), override_cr);
    if (*ahp_cmd) return cmd_ahp(matrix);
    if (*sens_cmd) return cmd_sensitivity(config, exclude, out, override_cr);
    if (*render_cmd) {
      if (out.empty()) throw ValidationError("render needs --out");
      return cmd_render(classes, out);
    }
    if (*serve_cmd) return cmd_serve(bind, data_root, work_dir, workers);
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
