#ifndef DNL_SIMULATOR_HPP
#define DNL_SIMULATOR_HPP

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dnl/junction.hpp"
#include "dnl/network.hpp"

namespace dnl {

/// Piecewise-constant departure rate of one path: (start time, rate) pieces,
/// sorted by start time; the last rate persists to the horizon.
struct DemandProfile {
  std::string path;
  std::vector<std::pair<double, double>> pieces;

  double rate_at(double t) const;
};

/// Optional non-empty start (used by the counterexample replication runs):
/// a uniform density on one link together with the per-path composition.
struct InitialLinkState {
  std::string link;
  double density = 0.0;
  std::map<std::string, double> path_shares;  // by path id, must sum to 1
};

struct SimulationConfig {
  double dt = 0.0;
  double horizon = 0.0;
  double cfl_theta = 1.0;  // dt * max wave speed <= theta * min cell width
  int default_cells_per_link = 20;
  std::map<std::string, int> cells_override;  // by link id
  bool record_densities = false;
  bool record_exit_shares = false;  // per-path flow composition at link exits
  std::vector<InitialLinkState> initial_states;
  bool check_invariants = true;
};

/// First-in-first-out point queue at an origin. Departures are pushed as
/// parcels carrying their per-path composition; discharge pops vehicles from
/// the front so the composition of the outflow is the composition that
/// entered the queue (FIFO).
class PointQueue {
 public:
  explicit PointQueue(std::size_t path_count) : path_count_(path_count) {}

  /// One step: push rates*dt vehicles, discharge min(supply*dt, everything
  /// queued). Returns per-path discharged vehicles.
  std::vector<double> update(const std::vector<double>& rates, double supply, double dt);

  double vehicles() const { return queued_; }

 private:
  struct Parcel {
    double vehicles;
    std::vector<double> shares;
  };
  std::size_t path_count_;
  std::deque<Parcel> parcels_;
  double queued_ = 0.0;
};

struct DelayTable {
  std::vector<std::string> paths;
  std::vector<double> departure_times;
  // arrival[p][k], travel[p][k]; NaN marks departures whose arrival falls
  // beyond the simulated horizon.
  std::vector<std::vector<double>> arrival;
  std::vector<std::vector<double>> travel;
};

struct MassLedger {
  double departed = 0.0;  // cumulative vehicles pushed into origin queues
  double queued = 0.0;    // currently waiting at origins
  double on_links = 0.0;  // currently traveling
  double absorbed = 0.0;  // cumulative vehicles discharged at destinations
};

/// Everything a finished run exposes: cumulative curves, traces, and the
/// exit-time / path-delay evaluations built on them.
class RunOutput {
 public:
  struct LinkInfo {
    std::string id;
    double length = 0.0;
    double free_flow_speed = 0.0;
    int cells = 0;
    double cell_width = 0.0;
    double initial_vehicles = 0.0;
  };

  double dt = 0.0;
  double horizon = 0.0;
  std::size_t steps = 0;

  std::vector<LinkInfo> links;
  std::vector<std::string> origin_ids;
  std::vector<std::string> path_ids;
  std::vector<std::vector<std::string>> path_links;  // link ids per path
  std::vector<int> path_origin;                      // origin index per path

  // Sampled at step boundaries (size steps+1).
  std::vector<std::vector<double>> link_cum_in;    // [link][k]
  std::vector<std::vector<double>> link_cum_out;   // [link][k]
  std::vector<std::vector<double>> origin_cum_in;  // [origin][k]
  std::vector<std::vector<double>> origin_cum_out;
  std::vector<std::vector<double>> queue_trace;  // [origin][k]

  // Minimum supply over all cells, per step boundary, with its location.
  std::vector<double> min_supply;
  std::vector<int> min_supply_link;
  std::vector<int> min_supply_cell;

  // Optional traces.
  std::vector<std::vector<std::vector<double>>> densities;  // [link][k][cell]
  // Flow composition at the downstream end of each link: [link][path-slot][k]
  // (path slots follow paths_on_link). Zero when the exit cell is empty.
  std::vector<std::vector<std::vector<double>>> exit_shares;
  std::vector<std::vector<int>> paths_on_link;  // global path index per slot

  std::vector<MassLedger> ledger;  // per step boundary

  /// Time at which a departure joining the origin queue at t leaves it.
  std::optional<double> queue_exit_time(int origin, double t) const;
  /// Time at which a vehicle entering the link at t exits it.
  std::optional<double> link_exit_time(int link, double t) const;
  /// Arrival time of a departure at t on the path (queue first, then links).
  std::optional<double> path_arrival(int path, double t) const;

  DelayTable delay_table(int stride = 1) const;

  int link_index(const std::string& id) const;
  int path_index(const std::string& id) const;
  int origin_index(const std::string& id) const;
};

/// Explicit integrator for the network loading system: Godunov density
/// updates with demand/supply interface fluxes, conservative per-path
/// commodity transport, point queues at origins, capacity-limited discharge
/// at destinations, and cumulative-curve bookkeeping.
class Simulator {
 public:
  Simulator(const Network& net, const std::vector<DemandProfile>& demand,
            SimulationConfig config);

  /// Advance one time step. Throws std::runtime_error on a numerical fault
  /// (NaN or out-of-range density) with step/link/cell diagnostics.
  void step();

  RunOutput run();

  double time() const { return static_cast<double>(step_count_) * config_.dt; }
  /// Current turning ratios of a diverge junction (retained value when the
  /// upstream exit cell is empty).
  std::array<double, 2> turning_ratios(const std::string& junction_id) const;
  /// Current total density profile of a link.
  std::vector<double> link_densities(const std::string& link_id) const;

 private:
  struct CLink {
    std::string id;
    const Link* src = nullptr;
    FundamentalDiagram fd = FundamentalDiagram::triangular(1.0, 3.0, 0.5);
    double length = 0.0, dx = 0.0;
    int cells = 0;
    std::vector<int> paths;            // global path indices with a slot here
    std::vector<double> commodity;     // [cell * npaths + slot], densities
    std::vector<double> totals;        // per cell
    std::vector<double> iface_total;   // cells+1 scratch
    std::vector<double> iface_comm;    // (cells+1) * npaths scratch
    double cum_in = 0.0, cum_out = 0.0;
    double initial_vehicles = 0.0;
    int slot_of_path(int path) const;
  };
  struct CDiverge {
    int junction = -1;
    int up = -1, out1 = -1, out2 = -1;
    std::vector<int> branch_of_slot;  // per upstream path slot: 0 or 1
    std::array<double, 2> retained_ratios{0.5, 0.5};
  };
  struct CMerge {
    int junction = -1;
    int in1 = -1, in2 = -1, out = -1;
    double priority = 0.5;
  };
  struct COrigin {
    std::string id;
    int vlink = -1;
    std::vector<int> paths;  // global path indices departing here
    PointQueue queue{0};
    double cum_in = 0.0, cum_out = 0.0;
  };
  struct CDestination {
    int vlink = -1;
    double supply = 0.0;
  };

  void compile(const Network& net);
  void apply_initial_states(const Network& net);
  void refresh_totals(CLink& link);
  void record_sample();
  void check_state() const;

  SimulationConfig config_;
  std::vector<CLink> links_;
  std::vector<CDiverge> diverges_;
  std::vector<CMerge> merges_;
  std::vector<COrigin> origins_;
  std::vector<CDestination> destinations_;
  std::vector<std::vector<int>> path_link_seq_;  // per path: link indices
  std::vector<std::string> path_ids_;
  std::vector<std::vector<double>> demand_rates_;  // [path][step], resampled
  std::vector<std::string> junction_ids_;

  std::size_t step_count_ = 0;
  std::size_t total_steps_ = 0;
  double departed_ = 0.0;
  double absorbed_ = 0.0;

  RunOutput out_;
};

RunOutput run_simulation(const Network& net, const std::vector<DemandProfile>& demand,
                         const SimulationConfig& config);

/// Cell averages of a piecewise-constant initial profile on [0, length]
/// evolved by the same Godunov kernel the network simulator uses, with the
/// far-field states held fixed at both ends. Initial cells are exact
/// averages of the given profile.
std::vector<double> godunov_evolve_pwc(const FundamentalDiagram& fd, double length, int cells,
                                       const std::vector<double>& jump_positions,
                                       const std::vector<double>& states, double t_end,
                                       double cfl);

}  // namespace dnl

#endif  // DNL_SIMULATOR_HPP
