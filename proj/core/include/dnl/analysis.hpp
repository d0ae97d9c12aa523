#ifndef DNL_ANALYSIS_HPP
#define DNL_ANALYSIS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dnl/network.hpp"
#include "dnl/simulator.hpp"

namespace dnl {

/// Per-window comparison of the observed minimum supply against the
/// theoretical lower bound. Windows have length L/lambda (minimum link
/// length over maximum backward wave speed).
struct SupplyBoundReport {
  struct Row {
    int k = 0;
    double t_begin = 0.0, t_end = 0.0;
    double observed = 0.0;
    double bound = 0.0;
    bool pass = false;
  };
  std::vector<Row> rows;
  double window_length = 0.0;
  double tolerance = 0.0;  // one cell-flux quantum: C_min * dt / dx_min
  bool all_pass = true;
};

SupplyBoundReport verify_supply_bound(const RunOutput& run, const NetworkConstants& constants);

struct GridlockReport {
  double min_supply = 0.0;
  double time = 0.0;
  std::string link;
  int cell = -1;
};

GridlockReport gridlock_monitor(const RunOutput& run);

/// A departure-rate bump of a given size on one path over [t_begin, t_end].
struct PerturbationSpec {
  std::string path;
  double t_begin = 0.0;
  double t_end = 0.0;
};

struct ContinuityProbeReport {
  struct Row {
    double size = 0.0;
    double deviation = 0.0;  // sup over paths and departure times of |travel change|
  };
  std::vector<Row> rows;
  bool monotone = false;  // deviations nonincreasing within the noise tolerance
  double final_deviation = 0.0;
  double noise_tolerance = 0.0;
};

/// Runs the simulator on h and on h + bump for each size (strictly
/// decreasing sizes required) and records the sup-norm delay deviation.
ContinuityProbeReport probe_continuity(const Network& net,
                                       const std::vector<DemandProfile>& base,
                                       const PerturbationSpec& spec,
                                       const std::vector<double>& sizes,
                                       const SimulationConfig& config,
                                       double noise_tolerance = 1e-12);

/// Flux outcomes of the diverge with the jam-approaching data family: the
/// branch-2 state carries a vanishing share eps of the upstream flow. The
/// exit flow jumps from f(rho_up) (any eps > 0) to the capacity (eps = 0);
/// the gap is capacity - f(rho_up) no matter how small eps gets.
struct IllPosednessReport {
  struct Row {
    double eps = 0.0;
    double out_flux = 0.0;
    double in_flux1 = 0.0;  // branch with share eps
    double in_flux2 = 0.0;
    double rho_out1 = 0.0;  // constructed initial densities
    double rho_out2 = 0.0;
  };
  std::vector<Row> rows;
  double rho_up = 0.0;
  double empirical_gap = 0.0;    // out_flux(0) - out_flux(smallest eps > 0)
  double closed_form_gap = 0.0;  // capacity - f(rho_up)
};

/// Requires rho_up strictly inside the congested branch (throws
/// std::domain_error otherwise) and a list of shares in [0, 1).
IllPosednessReport replicate_illposedness(const FundamentalDiagram& fd, double rho_up,
                                          const std::vector<double>& eps_list);

/// Total variation in time of the per-path flow composition at each link
/// exit, and the smallest nonzero composition value seen anywhere. Requires
/// a run recorded with record_exit_shares.
struct PdvReport {
  struct Row {
    std::string link;
    std::string path;
    double tv = 0.0;
    double min_nonzero = 0.0;  // inf if the share is never positive
  };
  std::vector<Row> rows;
  double min_nonzero_share = 0.0;
  double eps_prime = 0.0;
  bool flagged = false;  // min nonzero share fell below eps_prime
};

PdvReport pdv_tv_monitor(const RunOutput& run, double eps_prime);

/// Random merge/diverge network with demands, for property suites: a DAG
/// grown from 1-2 origins by splitting and pairing open branches, closed off
/// by destinations with finite or infinite supply.
struct RandomScenarioParams {
  int max_junctions = 10;
  int max_total_cells = 1000;
  double horizon_windows = 12.0;  // horizon as a multiple of L/lambda
  double cfl = 0.5;
};

struct RandomScenario {
  Network network;
  std::vector<DemandProfile> demand;
  SimulationConfig config;
};

RandomScenario make_random_scenario(std::uint64_t seed, const RandomScenarioParams& params = {});

/// Runs fn(i) for i in [0, n) on a small thread pool; results are collected
/// by index. Used to fan out independent simulator runs.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace dnl

#endif  // DNL_ANALYSIS_HPP
