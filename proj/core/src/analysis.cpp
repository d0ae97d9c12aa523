#include "dnl/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include "dnl/junction.hpp"

namespace dnl {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SupplyBoundReport verify_supply_bound(const RunOutput& run, const NetworkConstants& c) {
  SupplyBoundReport rep;
  rep.window_length = c.min_link_length / c.max_backward_wave_speed;
  double dx_min = kInf;
  for (const auto& l : run.links) dx_min = std::min(dx_min, l.cell_width);
  rep.tolerance = c.min_capacity * run.dt / dx_min;

  // Group step samples into backward-wave windows and compare each window's
  // minimum against the decay bound.
  std::vector<double> window_min;
  for (std::size_t i = 0; i < run.min_supply.size(); ++i) {
    double t = static_cast<double>(i) * run.dt;
    auto k = static_cast<std::size_t>(t / rep.window_length);
    if (window_min.size() <= k) window_min.resize(k + 1, kInf);
    window_min[k] = std::min(window_min[k], run.min_supply[i]);
  }
  for (std::size_t k = 0; k < window_min.size(); ++k) {
    SupplyBoundReport::Row row;
    row.k = static_cast<int>(k);
    row.t_begin = static_cast<double>(k) * rep.window_length;
    row.t_end = static_cast<double>(k + 1) * rep.window_length;
    row.observed = window_min[k];
    row.bound = supply_lower_bound(c, static_cast<int>(k));
    row.pass = row.observed >= row.bound - rep.tolerance;
    rep.all_pass = rep.all_pass && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

GridlockReport gridlock_monitor(const RunOutput& run) {
  GridlockReport rep;
  rep.min_supply = kInf;
  for (std::size_t i = 0; i < run.min_supply.size(); ++i) {
    if (run.min_supply[i] < rep.min_supply) {
      rep.min_supply = run.min_supply[i];
      rep.time = static_cast<double>(i) * run.dt;
      rep.link = run.min_supply_link[i] >= 0 ? run.links[run.min_supply_link[i]].id : "";
      rep.cell = run.min_supply_cell[i];
    }
  }
  return rep;
}

namespace {

// The base profile with a rate bump of `size` added on [t0, t1).
std::vector<DemandProfile> perturb_demand(const std::vector<DemandProfile>& base,
                                          const PerturbationSpec& spec, double size) {
  std::vector<DemandProfile> out = base;
  DemandProfile* target = nullptr;
  for (auto& p : out)
    if (p.path == spec.path) target = &p;
  if (!target) {
    out.push_back(DemandProfile{spec.path, {{0.0, 0.0}}});
    target = &out.back();
  }
  std::set<double> starts{0.0, spec.t_begin, spec.t_end};
  for (const auto& [t, r] : target->pieces) starts.insert(t);
  DemandProfile bumped;
  bumped.path = spec.path;
  for (double t : starts) {
    double r = target->rate_at(t);
    if (t >= spec.t_begin && t < spec.t_end) r += size;
    bumped.pieces.emplace_back(t, r);
  }
  *target = std::move(bumped);
  return out;
}

double sup_travel_deviation(const DelayTable& a, const DelayTable& b) {
  double dev = 0.0;
  for (std::size_t p = 0; p < a.travel.size(); ++p) {
    for (std::size_t k = 0; k < a.travel[p].size(); ++k) {
      double ta = a.travel[p][k], tb = b.travel[p][k];
      bool fa = std::isfinite(ta), fb = std::isfinite(tb);
      if (fa != fb) return kInf;  // a departure crossed the horizon boundary
      if (fa && fb) dev = std::max(dev, std::fabs(ta - tb));
    }
  }
  return dev;
}

}  // namespace

ContinuityProbeReport probe_continuity(const Network& net,
                                       const std::vector<DemandProfile>& base,
                                       const PerturbationSpec& spec,
                                       const std::vector<double>& sizes,
                                       const SimulationConfig& config,
                                       double noise_tolerance) {
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i)
    if (!(sizes[i] > sizes[i + 1]))
      throw std::invalid_argument("probe_continuity: sizes must be strictly decreasing");

  DelayTable base_table = run_simulation(net, base, config).delay_table();

  ContinuityProbeReport rep;
  rep.noise_tolerance = noise_tolerance;
  rep.rows.resize(sizes.size());
  parallel_for(static_cast<int>(sizes.size()), [&](int i) {
    auto demand = perturb_demand(base, spec, sizes[i]);
    DelayTable table = run_simulation(net, demand, config).delay_table();
    rep.rows[i] = {sizes[i], sup_travel_deviation(base_table, table)};
  });

  rep.monotone = true;
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
    if (rep.rows[i + 1].deviation > rep.rows[i].deviation + noise_tolerance)
      rep.monotone = false;
  rep.final_deviation = rep.rows.empty() ? 0.0 : rep.rows.back().deviation;
  return rep;
}

IllPosednessReport replicate_illposedness(const FundamentalDiagram& fd, double rho_up,
                                          const std::vector<double>& eps_list) {
  if (!(rho_up > fd.critical_density() && rho_up < fd.jam_density()))
    throw std::domain_error(
        "replicate_illposedness: upstream density must lie strictly inside the congested "
        "branch");
  IllPosednessReport rep;
  rep.rho_up = rho_up;
  double flow_up = fd.flow(rho_up);
  rep.closed_form_gap = fd.capacity() - flow_up;

  for (double eps : eps_list) {
    if (!(eps >= 0.0 && eps < 1.0))
      throw std::domain_error("replicate_illposedness: shares must lie in [0, 1)");
    IllPosednessReport::Row row;
    row.eps = eps;
    // Branch 1 congested with flow eps*f(rho_up); branch 2 free-flowing with
    // the complement. At eps = 0 branch 1 sits at jam density. The branch-1
    // supply is the defining flow itself (the congested state carries it by
    // construction), so the scan does not re-derive it through the density.
    row.rho_out1 = fd.inverse_congested(eps * flow_up);
    row.rho_out2 = fd.inverse_free_flow((1.0 - eps) * flow_up);
    DivergeInput in;
    in.demand_in = fd.demand(rho_up);
    in.supply_out1 = eps * flow_up;
    in.supply_out2 = fd.supply(row.rho_out2);
    in.ratio_out1 = eps;
    in.ratio_out2 = 1.0 - eps;
    DivergeFluxes fx = solve_diverge(in);
    row.out_flux = fx.out_flux;
    row.in_flux1 = fx.in_flux1;
    row.in_flux2 = fx.in_flux2;
    rep.rows.push_back(row);
  }

  double smallest_pos = kInf, flux_at_smallest = 0.0, flux_at_zero = 0.0;
  bool has_zero = false;
  for (const auto& row : rep.rows) {
    if (row.eps == 0.0) {
      has_zero = true;
      flux_at_zero = row.out_flux;
    } else if (row.eps < smallest_pos) {
      smallest_pos = row.eps;
      flux_at_smallest = row.out_flux;
    }
  }
  rep.empirical_gap = (has_zero && smallest_pos < kInf)
                          ? flux_at_zero - flux_at_smallest
                          : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

PdvReport pdv_tv_monitor(const RunOutput& run, double eps_prime) {
  if (run.exit_shares.empty())
    throw std::invalid_argument("pdv_tv_monitor: run was not recorded with exit shares");
  PdvReport rep;
  rep.eps_prime = eps_prime;
  rep.min_nonzero_share = kInf;
  for (std::size_t l = 0; l < run.exit_shares.size(); ++l) {
    for (std::size_t s = 0; s < run.exit_shares[l].size(); ++s) {
      const auto& trace = run.exit_shares[l][s];
      PdvReport::Row row;
      row.link = run.links[l].id;
      row.path = run.path_ids[run.paths_on_link[l][s]];
      row.min_nonzero = kInf;
      for (std::size_t k = 0; k < trace.size(); ++k) {
        if (k + 1 < trace.size()) row.tv += std::fabs(trace[k + 1] - trace[k]);
        if (trace[k] > 1e-15) row.min_nonzero = std::min(row.min_nonzero, trace[k]);
      }
      rep.min_nonzero_share = std::min(rep.min_nonzero_share, row.min_nonzero);
      rep.rows.push_back(row);
    }
  }
  rep.flagged = rep.min_nonzero_share < eps_prime;
  return rep;
}

namespace {

struct Builder {
  std::mt19937_64 rng;
  Network net;
  int link_counter = 0;
  int junction_counter = 0;

  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  }
  int uniform_int(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

  std::string new_link(bool is_virtual) {
    Link l;
    l.id = "l" + std::to_string(link_counter++);
    l.length = uniform(0.5, 1.5);
    double vf = uniform(0.8, 1.2);
    double w = uniform(0.3, 0.8);
    double cap = uniform(0.7, 1.2);
    double jam = cap / vf + cap / w;
    l.fd = FundamentalDiagram::triangular(vf, jam, w);
    l.is_virtual = is_virtual;
    net.links.push_back(l);
    return l.id;
  }
};

}  // namespace

RandomScenario make_random_scenario(std::uint64_t seed, const RandomScenarioParams& params) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Builder b;
    b.rng.seed(seed + attempt * 0x9e3779b97f4a7c15ULL);

    int origin_count = b.uniform_int(1, 2);
    std::vector<std::string> open;
    for (int o = 0; o < origin_count; ++o) {
      std::string vl = b.new_link(true);
      b.net.origins.push_back({"s" + std::to_string(o), vl});
      open.push_back(vl);
    }
    int target = b.uniform_int(2, params.max_junctions);
    for (int j = 0; j < target; ++j) {
      bool can_merge = open.size() >= 2;
      bool do_merge = can_merge && b.uniform(0.0, 1.0) < 0.45;
      Junction junc;
      junc.id = "j" + std::to_string(b.junction_counter++);
      if (do_merge) {
        int a = b.uniform_int(0, static_cast<int>(open.size()) - 1);
        std::string in1 = open[a];
        open.erase(open.begin() + a);
        int c = b.uniform_int(0, static_cast<int>(open.size()) - 1);
        std::string in2 = open[c];
        open.erase(open.begin() + c);
        std::string out = b.new_link(false);
        junc.in = {in1, in2};
        junc.out = {out};
        junc.priority = b.uniform(0.15, 0.85);
        open.push_back(out);
      } else {
        int a = b.uniform_int(0, static_cast<int>(open.size()) - 1);
        std::string in = open[a];
        open.erase(open.begin() + a);
        std::string o1 = b.new_link(false);
        std::string o2 = b.new_link(false);
        junc.in = {in};
        junc.out = {o1, o2};
        open.push_back(o1);
        open.push_back(o2);
      }
      b.net.junctions.push_back(junc);
    }
    // Close every open branch with a destination; the dangling link becomes
    // that destination's virtual link.
    for (std::size_t d = 0; d < open.size(); ++d) {
      Destination dst;
      dst.id = "t" + std::to_string(d);
      dst.virtual_link = open[d];
      for (auto& l : b.net.links)
        if (l.id == open[d]) l.is_virtual = true;
      double cap = b.net.find_link(open[d])->fd.capacity();
      dst.supply = b.uniform(0.0, 1.0) < 0.5 ? kInf : b.uniform(0.3, 1.0) * cap;
      b.net.destinations.push_back(dst);
    }

    // Enumerate origin-to-destination routes through the DAG.
    std::vector<Path> paths;
    bool too_many = false;
    for (const auto& origin : b.net.origins) {
      std::vector<std::vector<std::string>> stack{{origin.virtual_link}};
      while (!stack.empty()) {
        auto route = stack.back();
        stack.pop_back();
        const std::string& tail = route.back();
        const Junction* next = nullptr;
        for (const auto& j : b.net.junctions)
          if (std::find(j.in.begin(), j.in.end(), tail) != j.in.end()) next = &j;
        if (!next) {
          Path p;
          p.id = "p" + std::to_string(paths.size());
          p.origin = origin.id;
          p.links = route;
          paths.push_back(p);
          if (paths.size() > 48) too_many = true;
        } else {
          for (const auto& out : next->out) {
            auto extended = route;
            extended.push_back(out);
            stack.push_back(extended);
          }
        }
        if (too_many) break;
      }
      if (too_many) break;
    }
    if (too_many) continue;  // re-roll a smaller topology
    b.net.paths = paths;

    // Cells: near-uniform cell width, capped total.
    double min_len = kInf, vmax = 0.0, wmax = 0.0;
    for (const auto& l : b.net.links) {
      min_len = std::min(min_len, l.length);
      vmax = std::max(vmax, std::max(l.fd.free_flow_speed(), l.fd.backward_wave_speed()));
      wmax = std::max(wmax, l.fd.backward_wave_speed());
    }
    double dx_target = min_len / 5.0;
    SimulationConfig config;
    for (int guard = 0; guard < 16; ++guard) {
      config.cells_override.clear();
      int total = 0;
      for (const auto& l : b.net.links) {
        int cells = std::max(2, static_cast<int>(std::lround(l.length / dx_target)));
        config.cells_override[l.id] = cells;
        total += cells;
      }
      if (total <= params.max_total_cells) break;
      dx_target *= 1.5;
    }
    double dx_min = kInf;
    for (const auto& l : b.net.links)
      dx_min = std::min(dx_min, l.length / config.cells_override[l.id]);
    config.cfl_theta = 1.0;
    config.dt = params.cfl * dx_min / vmax;
    config.horizon = params.horizon_windows * (min_len / wmax);

    // Piecewise-constant demands; some paths idle, some pushy.
    RandomScenario scenario;
    scenario.demand.reserve(paths.size());
    bool any_demand = false;
    for (const auto& p : paths) {
      DemandProfile profile;
      profile.path = p.id;
      double cap = b.net.find_link(p.links.front())->fd.capacity();
      int pieces = b.uniform_int(1, 3);
      double t = 0.0;
      for (int k = 0; k < pieces; ++k) {
        double rate = b.uniform(0.0, 1.0) < 0.3 ? 0.0 : b.uniform(0.1, 1.4) * cap;
        profile.pieces.emplace_back(t, rate);
        if (rate > 0.0) any_demand = true;
        t += b.uniform(0.1, 0.4) * config.horizon;
      }
      profile.pieces.emplace_back(std::min(t, 0.8 * config.horizon), 0.0);
      scenario.demand.push_back(profile);
    }
    if (!any_demand) continue;

    if (!validate(b.net).empty()) continue;  // should not happen; re-roll if it does
    scenario.network = std::move(b.net);
    scenario.config = config;
    return scenario;
  }
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace dnl
