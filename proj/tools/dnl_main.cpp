// Command-line driver for the network loading engine: batch simulation,
// theorem checks and the oracle comparison, all file-in/file-out.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dnl/analysis.hpp"
#include "dnl/io.hpp"
#include "dnl/network.hpp"
#include "dnl/simulator.hpp"
#include "dnl/wavefront.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string network_path;
  std::string demand_path;
  std::string out_dir;
  double dt = 0.0;
  double horizon = 0.0;
  int cells_per_link = 20;
  double cfl = 1.0;
  bool record_densities = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_demand) {
  cmd->add_option("--network", args.network_path, "network JSON file")->required();
  if (with_demand)
    cmd->add_option("--demand", args.demand_path, "demand JSON file")->required();
  cmd->add_option("--dt", args.dt, "time step")->required();
  cmd->add_option("--horizon", args.horizon, "simulation horizon")->required();
  cmd->add_option("--out-dir", args.out_dir, "output directory")->required();
  cmd->add_option("--cells-per-link", args.cells_per_link, "default cells per link");
  cmd->add_option("--cfl", args.cfl, "CFL safety factor in (0,1]");
  cmd->add_flag("--record-densities", args.record_densities, "emit the density trace CSV");
}

dnl::SimulationConfig make_config(const CommonArgs& args) {
  dnl::SimulationConfig config;
  config.dt = args.dt;
  config.horizon = args.horizon;
  config.cfl_theta = args.cfl;
  config.default_cells_per_link = args.cells_per_link;
  config.record_densities = args.record_densities;
  return config;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "'");
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

int cmd_run(const CommonArgs& args) {
  ensure_out_dir(args.out_dir);
  dnl::Network net = dnl::io::load_network(args.network_path);
  auto demand = dnl::io::load_demand(args.demand_path, net);
  dnl::RunOutput run = dnl::run_simulation(net, demand, make_config(args));
  dnl::io::write_delay_csv(run.delay_table(), join(args.out_dir, "delays.csv"));
  dnl::io::write_queue_csv(run, join(args.out_dir, "queues.csv"));
  if (args.record_densities)
    dnl::io::write_density_csv(run, join(args.out_dir, "densities.csv"));
  std::cout << "run complete: " << run.steps << " steps, outputs in " << args.out_dir << "\n";
  return 0;
}

int cmd_verify_bounds(const CommonArgs& args) {
  ensure_out_dir(args.out_dir);
  dnl::Network net = dnl::io::load_network(args.network_path);
  auto demand = dnl::io::load_demand(args.demand_path, net);
  dnl::RunOutput run = dnl::run_simulation(net, demand, make_config(args));
  dnl::NetworkConstants constants = dnl::network_constants(net);
  dnl::SupplyBoundReport rep = dnl::verify_supply_bound(run, constants);
  dnl::GridlockReport grid = dnl::gridlock_monitor(run);
  dnl::io::write_supply_report_csv(rep, join(args.out_dir, "supply_report.csv"));
  std::cout << dnl::io::render_supply_report(rep);
  std::cout << "minimum observed supply " << dnl::io::format_double(grid.min_supply)
            << " at t=" << dnl::io::format_double(grid.time) << " on link '" << grid.link
            << "' cell " << grid.cell << "\n";
  return rep.all_pass ? 0 : 3;
}

int cmd_probe(const CommonArgs& args, const std::string& probe_path,
              const std::vector<double>& sizes, double t_begin, double t_end) {
  ensure_out_dir(args.out_dir);
  dnl::Network net = dnl::io::load_network(args.network_path);
  auto demand = dnl::io::load_demand(args.demand_path, net);
  dnl::PerturbationSpec spec;
  spec.path = probe_path.empty() ? net.paths.front().id : probe_path;
  spec.t_begin = t_begin;
  spec.t_end = t_end > t_begin ? t_end : args.horizon / 4.0;
  dnl::ContinuityProbeReport rep =
      dnl::probe_continuity(net, demand, spec, sizes, make_config(args));
  dnl::io::write_probe_report_csv(rep, join(args.out_dir, "probe_report.csv"));
  std::cout << dnl::io::render_probe_report(rep);
  return 0;
}

int cmd_counterexample(const CommonArgs& args, const std::vector<double>& eps_list,
                       double rho_up) {
  ensure_out_dir(args.out_dir);
  dnl::Network net = dnl::io::load_network(args.network_path);
  const dnl::FundamentalDiagram& fd = net.links.front().fd;
  if (rho_up <= 0.0) rho_up = fd.inverse_congested(0.8 * fd.capacity());
  dnl::IllPosednessReport rep = dnl::replicate_illposedness(fd, rho_up, eps_list);
  dnl::io::write_illposedness_csv(rep, join(args.out_dir, "counterexample.csv"));
  std::cout << dnl::io::render_illposedness(rep);
  return 0;
}

int cmd_oracle_compare(const CommonArgs& args, double rho_left, double rho_right, int levels,
                       int cells0) {
  ensure_out_dir(args.out_dir);
  dnl::Network net = dnl::io::load_network(args.network_path);
  const dnl::Link& link = net.links.front();
  const dnl::FundamentalDiagram& fd = link.fd;
  const double length = link.length;
  const double jump = length / std::sqrt(7.0);  // keep the jump off the cell grid
  const double t_end = 0.5 * length / fd.free_flow_speed();

  dnl::wft::Scenario scenario;
  scenario.kind = dnl::wft::Scenario::Kind::SingleLink;
  scenario.links.push_back({fd, {{jump}, {rho_left, rho_right}}});
  scenario.horizon = t_end;
  dnl::wft::Solution exact = dnl::wft::run(scenario);

  std::ostringstream csv;
  csv << dnl::io::kVersionHeader << "\ncells,dx,l1_error\n";
  std::vector<double> errors, widths;
  for (int level = 0; level < levels; ++level) {
    int cells = cells0 << level;
    auto sim = dnl::godunov_evolve_pwc(fd, length, cells, {jump}, {rho_left, rho_right}, t_end,
                                       args.cfl);
    auto ref = exact.cell_averages(0, t_end, 0.0, length, cells);
    double dx = length / cells, err = 0.0;
    for (int c = 0; c < cells; ++c) err += std::fabs(sim[c] - ref[c]) * dx;
    errors.push_back(err);
    widths.push_back(dx);
    csv << cells << ',' << dnl::io::format_double(dx) << ',' << dnl::io::format_double(err)
        << '\n';
  }
  // Least-squares slope of log(error) against log(dx).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = levels;
  for (int k = 0; k < n; ++k) {
    double x = std::log(widths[k]), y = std::log(std::max(errors[k], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  csv << "# order," << dnl::io::format_double(order) << '\n';
  std::ofstream out(join(args.out_dir, "oracle_compare.csv"));
  out << csv.str();
  std::cout << "convergence order " << dnl::io::format_double(order) << " over " << levels
            << " levels\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LWR network loading simulator with spillback"};
  app.require_subcommand(1);

  CommonArgs run_args, vb_args, probe_args, ce_args, oc_args;

  CLI::App* run_cmd = app.add_subcommand("run", "simulate and emit delay/queue tables");
  add_common(run_cmd, run_args, true);

  CLI::App* vb_cmd =
      app.add_subcommand("verify-bounds", "simulate and check the minimum-supply bound");
  add_common(vb_cmd, vb_args, true);

  CLI::App* probe_cmd =
      app.add_subcommand("probe-continuity", "delay response to shrinking demand bumps");
  add_common(probe_cmd, probe_args, true);
  std::vector<double> sizes{1e-1, 1e-2, 1e-3, 1e-4};
  std::string probe_path;
  double probe_t0 = 0.0, probe_t1 = 0.0;
  probe_cmd->add_option("--sizes", sizes, "perturbation sizes, strictly decreasing");
  probe_cmd->add_option("--path", probe_path, "path to perturb (default: first)");
  probe_cmd->add_option("--bump-begin", probe_t0, "bump start time");
  probe_cmd->add_option("--bump-end", probe_t1, "bump end time");

  CLI::App* ce_cmd = app.add_subcommand("replicate-counterexample",
                                        "diverge flux table over composition shares");
  ce_cmd->add_option("--network", ce_args.network_path, "network JSON file (first link's fd)")
      ->required();
  ce_cmd->add_option("--out-dir", ce_args.out_dir, "output directory")->required();
  std::vector<double> eps_list{0.25, 0.1, 0.01, 0.0};
  double rho_up = 0.0;
  ce_cmd->add_option("--epsilon-list", eps_list, "shares to scan (0 allowed)");
  ce_cmd->add_option("--rho1", rho_up, "upstream density (default: congested at 0.8*capacity)");

  CLI::App* oc_cmd = app.add_subcommand("oracle-compare",
                                        "Godunov-vs-exact convergence on a Riemann problem");
  oc_cmd->add_option("--network", oc_args.network_path, "network JSON file (first link)")
      ->required();
  oc_cmd->add_option("--out-dir", oc_args.out_dir, "output directory")->required();
  oc_cmd->add_option("--cfl", oc_args.cfl, "CFL number");
  double rho_left = 0.5, rho_right = 2.0;
  int levels = 4, cells0 = 50;
  oc_cmd->add_option("--rho-left", rho_left, "state left of the jump");
  oc_cmd->add_option("--rho-right", rho_right, "state right of the jump");
  oc_cmd->add_option("--levels", levels, "refinement levels");
  oc_cmd->add_option("--cells0", cells0, "cells at the coarsest level");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(run_args);
    if (vb_cmd->parsed()) return cmd_verify_bounds(vb_args);
    if (probe_cmd->parsed())
      return cmd_probe(probe_args, probe_path, sizes, probe_t0, probe_t1);
    if (ce_cmd->parsed()) return cmd_counterexample(ce_args, eps_list, rho_up);
    if (oc_cmd->parsed())
      return cmd_oracle_compare(oc_args, rho_left, rho_right, levels, cells0);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
