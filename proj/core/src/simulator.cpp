#include "dnl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dnl {

namespace {

constexpr double kTinyVehicles = 1e-12;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Linear interpolation of a step-boundary-sampled curve at time t.
double interp_curve(const std::vector<double>& c, double dt, double t) {
  if (c.empty()) return 0.0;
  if (t <= 0.0) return c.front();
  double pos = t / dt;
  auto k = static_cast<std::size_t>(pos);
  if (k + 1 >= c.size()) return c.back();
  double frac = pos - static_cast<double>(k);
  return c[k] + frac * (c[k + 1] - c[k]);
}

// Earliest time at which the curve reaches `target` (> curve start), exact
// on the piecewise-linear interpolant. Empty optional: not reached by the
// end of the horizon.
std::optional<double> invert_curve(const std::vector<double>& c, double dt, double target) {
  auto it = std::lower_bound(c.begin(), c.end(), target);
  if (it == c.end()) return std::nullopt;
  auto k = static_cast<std::size_t>(it - c.begin());
  if (k == 0) return 0.0;
  double c0 = c[k - 1];
  double c1 = c[k];
  double frac = (target - c0) / (c1 - c0);
  return dt * (static_cast<double>(k - 1) + frac);
}

}  // namespace

double DemandProfile::rate_at(double t) const {
  double r = 0.0;
  for (const auto& [start, rate] : pieces) {
    if (t >= start) r = rate;
    else break;
  }
  return r;
}

std::vector<double> PointQueue::update(const std::vector<double>& rates, double supply,
                                       double dt) {
  if (rates.size() != path_count_)
    throw std::invalid_argument("point queue: rate vector size mismatch");
  double inflow = 0.0;
  for (double r : rates) {
    if (r < 0.0) throw std::domain_error("point queue: negative departure rate");
    inflow += r;
  }
  if (inflow > 0.0) {
    Parcel p;
    p.vehicles = inflow * dt;
    p.shares.resize(path_count_);
    for (std::size_t s = 0; s < path_count_; ++s) p.shares[s] = rates[s] / inflow;
    queued_ += p.vehicles;
    parcels_.push_back(std::move(p));
  }
  // Discharge is supply-limited and cannot exceed what is actually queued.
  double discharge = std::min(supply * dt, queued_);
  std::vector<double> out(path_count_, 0.0);
  double remaining = discharge;
  while (remaining > kTinyVehicles && !parcels_.empty()) {
    Parcel& front = parcels_.front();
    double take = std::min(front.vehicles, remaining);
    for (std::size_t s = 0; s < path_count_; ++s) out[s] += take * front.shares[s];
    front.vehicles -= take;
    remaining -= take;
    queued_ -= take;
    if (front.vehicles <= kTinyVehicles) {
      queued_ -= front.vehicles;  // absorb the crumb so the ledger stays clean
      parcels_.pop_front();
    }
  }
  if (queued_ < 0.0) queued_ = 0.0;
  return out;
}

int Simulator::CLink::slot_of_path(int path) const {
  for (std::size_t s = 0; s < paths.size(); ++s)
    if (paths[s] == path) return static_cast<int>(s);
  return -1;
}

Simulator::Simulator(const Network& net, const std::vector<DemandProfile>& demand,
                     SimulationConfig config)
    : config_(std::move(config)) {
  if (!(config_.dt > 0.0)) throw std::invalid_argument("simulator: dt must be positive");
  if (!(config_.horizon > 0.0)) throw std::invalid_argument("simulator: horizon must be positive");
  if (!(config_.cfl_theta > 0.0 && config_.cfl_theta <= 1.0))
    throw std::invalid_argument("simulator: CFL safety factor must be in (0, 1]");
  auto violations = validate(net);
  if (!violations.empty())
    throw std::invalid_argument("simulator: invalid network: " + violations.front());

  compile(net);

  // CFL: dt * fastest wave <= theta * smallest cell.
  double max_speed = 0.0, min_dx = std::numeric_limits<double>::infinity();
  for (const auto& l : links_) {
    max_speed = std::max(max_speed, std::max(l.fd.free_flow_speed(), l.fd.backward_wave_speed()));
    min_dx = std::min(min_dx, l.dx);
  }
  if (config_.dt * max_speed > config_.cfl_theta * min_dx * (1.0 + 1e-12))
    throw std::invalid_argument(
        "simulator: CFL violation: dt * max wave speed exceeds theta * min cell width");

  total_steps_ = static_cast<std::size_t>(std::ceil(config_.horizon / config_.dt - 1e-9));

  // Resample departure rates onto the step grid, left-constant.
  demand_rates_.assign(path_ids_.size(), std::vector<double>(total_steps_, 0.0));
  for (const auto& profile : demand) {
    auto it = std::find(path_ids_.begin(), path_ids_.end(), profile.path);
    if (it == path_ids_.end())
      throw std::invalid_argument("simulator: demand references unknown path '" + profile.path +
                                  "'");
    int p = static_cast<int>(it - path_ids_.begin());
    for (std::size_t n = 0; n < total_steps_; ++n) {
      double r = profile.rate_at(static_cast<double>(n) * config_.dt);
      if (r < 0.0) throw std::invalid_argument("simulator: negative departure rate");
      demand_rates_[p][n] = r;
    }
  }

  apply_initial_states(net);
  for (auto& l : links_) refresh_totals(l);

  // Output skeleton.
  out_.dt = config_.dt;
  out_.horizon = config_.horizon;
  out_.steps = total_steps_;
  for (const auto& l : links_) {
    RunOutput::LinkInfo info;
    info.id = l.id;
    info.length = l.length;
    info.free_flow_speed = l.fd.free_flow_speed();
    info.cells = l.cells;
    info.cell_width = l.dx;
    info.initial_vehicles = l.initial_vehicles;
    out_.links.push_back(info);
  }
  for (const auto& o : origins_) out_.origin_ids.push_back(o.id);
  out_.path_ids = path_ids_;
  out_.path_links.resize(path_ids_.size());
  out_.path_origin.assign(path_ids_.size(), -1);
  for (std::size_t p = 0; p < path_ids_.size(); ++p) {
    for (int li : path_link_seq_[p]) out_.path_links[p].push_back(links_[li].id);
    for (std::size_t o = 0; o < origins_.size(); ++o) {
      const auto& op = origins_[o].paths;
      if (std::find(op.begin(), op.end(), static_cast<int>(p)) != op.end())
        out_.path_origin[p] = static_cast<int>(o);
    }
  }
  out_.link_cum_in.assign(links_.size(), {});
  out_.link_cum_out.assign(links_.size(), {});
  out_.origin_cum_in.assign(origins_.size(), {});
  out_.origin_cum_out.assign(origins_.size(), {});
  out_.queue_trace.assign(origins_.size(), {});
  if (config_.record_densities) out_.densities.assign(links_.size(), {});
  out_.paths_on_link.resize(links_.size());
  for (std::size_t l = 0; l < links_.size(); ++l) out_.paths_on_link[l] = links_[l].paths;
  if (config_.record_exit_shares) {
    out_.exit_shares.resize(links_.size());
    for (std::size_t l = 0; l < links_.size(); ++l)
      out_.exit_shares[l].assign(links_[l].paths.size(), {});
  }

  record_sample();
}

void Simulator::compile(const Network& net) {
  auto link_index = [&](const std::string& id) {
    for (std::size_t k = 0; k < net.links.size(); ++k)
      if (net.links[k].id == id) return static_cast<int>(k);
    throw std::invalid_argument("simulator: unknown link '" + id + "'");
  };

  links_.resize(net.links.size());
  for (std::size_t k = 0; k < net.links.size(); ++k) {
    CLink& l = links_[k];
    l.id = net.links[k].id;
    l.src = &net.links[k];
    l.fd = net.links[k].fd;
    l.length = net.links[k].length;
    int cells = net.links[k].cell_count;
    auto it = config_.cells_override.find(l.id);
    if (it != config_.cells_override.end()) cells = it->second;
    if (cells <= 0) cells = config_.default_cells_per_link;
    l.cells = cells;
    l.dx = l.length / static_cast<double>(cells);
  }

  for (std::size_t p = 0; p < net.paths.size(); ++p) {
    path_ids_.push_back(net.paths[p].id);
    std::vector<int> seq;
    for (const auto& id : net.paths[p].links) {
      int li = link_index(id);
      seq.push_back(li);
      links_[li].paths.push_back(static_cast<int>(p));
    }
    path_link_seq_.push_back(std::move(seq));
  }
  for (auto& l : links_) {
    l.commodity.assign(static_cast<std::size_t>(l.cells) * l.paths.size(), 0.0);
    l.totals.assign(l.cells, 0.0);
    l.iface_total.assign(l.cells + 1, 0.0);
    l.iface_comm.assign(static_cast<std::size_t>(l.cells + 1) * l.paths.size(), 0.0);
  }

  for (const auto& j : net.junctions) {
    junction_ids_.push_back(j.id);
    if (j.is_diverge()) {
      CDiverge d;
      d.junction = static_cast<int>(junction_ids_.size()) - 1;
      d.up = link_index(j.in[0]);
      d.out1 = link_index(j.out[0]);
      d.out2 = link_index(j.out[1]);
      const CLink& up = links_[d.up];
      d.branch_of_slot.assign(up.paths.size(), -1);
      for (std::size_t s = 0; s < up.paths.size(); ++s) {
        int p = up.paths[s];
        const auto& seq = path_link_seq_[p];
        for (std::size_t k = 0; k + 1 < seq.size(); ++k) {
          if (seq[k] == d.up) {
            if (seq[k + 1] == d.out1) d.branch_of_slot[s] = 0;
            if (seq[k + 1] == d.out2) d.branch_of_slot[s] = 1;
          }
        }
        if (d.branch_of_slot[s] < 0)
          throw std::invalid_argument("simulator: path '" + path_ids_[p] +
                                      "' does not continue through junction '" + j.id + "'");
      }
      diverges_.push_back(std::move(d));
    } else if (j.is_merge()) {
      CMerge m;
      m.junction = static_cast<int>(junction_ids_.size()) - 1;
      m.in1 = link_index(j.in[0]);
      m.in2 = link_index(j.in[1]);
      m.out = link_index(j.out[0]);
      m.priority = j.priority.value();
      merges_.push_back(m);
    }
  }

  for (const auto& o : net.origins) {
    COrigin co;
    co.id = o.id;
    co.vlink = link_index(o.virtual_link);
    for (std::size_t p = 0; p < net.paths.size(); ++p)
      if (net.paths[p].origin == o.id) co.paths.push_back(static_cast<int>(p));
    co.queue = PointQueue(co.paths.size());
    origins_.push_back(std::move(co));
  }
  for (const auto& d : net.destinations) {
    CDestination cd;
    cd.vlink = link_index(d.virtual_link);
    cd.supply = d.supply;
    destinations_.push_back(cd);
  }
}

void Simulator::apply_initial_states(const Network& net) {
  for (const auto& init : config_.initial_states) {
    int li = -1;
    for (std::size_t k = 0; k < links_.size(); ++k)
      if (links_[k].id == init.link) li = static_cast<int>(k);
    if (li < 0) throw std::invalid_argument("simulator: initial state on unknown link");
    CLink& l = links_[li];
    if (!(init.density >= 0.0 && init.density <= l.fd.jam_density()))
      throw std::invalid_argument("simulator: initial density outside [0, jam]");
    double share_sum = 0.0;
    for (const auto& [pid, share] : init.path_shares) share_sum += share;
    if (init.density > 0.0 && std::fabs(share_sum - 1.0) > 1e-9)
      throw std::invalid_argument("simulator: initial path shares must sum to 1");
    for (const auto& [pid, share] : init.path_shares) {
      auto it = std::find(path_ids_.begin(), path_ids_.end(), pid);
      if (it == path_ids_.end())
        throw std::invalid_argument("simulator: initial share on unknown path '" + pid + "'");
      int slot = l.slot_of_path(static_cast<int>(it - path_ids_.begin()));
      if (slot < 0)
        throw std::invalid_argument("simulator: path '" + pid + "' does not traverse link '" +
                                    init.link + "'");
      for (int c = 0; c < l.cells; ++c)
        l.commodity[static_cast<std::size_t>(c) * l.paths.size() + slot] = init.density * share;
    }
    l.initial_vehicles = init.density * l.length;
  }
  (void)net;
}

void Simulator::refresh_totals(CLink& l) {
  const std::size_t np = l.paths.size();
  for (int c = 0; c < l.cells; ++c) {
    double sum = 0.0;
    for (std::size_t s = 0; s < np; ++s) sum += l.commodity[c * np + s];
    if (std::isnan(sum))
      throw std::runtime_error("simulator: numerical fault (NaN density) at step " +
                               std::to_string(step_count_) + ", link '" + l.id + "', cell " +
                               std::to_string(c));
    double jam = l.fd.jam_density();
    if (sum > jam) {
      if (sum - jam > 1e-9 * jam)
        throw std::runtime_error("simulator: numerical fault (density above jam) at step " +
                                 std::to_string(step_count_) + ", link '" + l.id + "', cell " +
                                 std::to_string(c));
      double scale = jam / sum;
      for (std::size_t s = 0; s < np; ++s) l.commodity[c * np + s] *= scale;
      sum = jam;
    }
    l.totals[c] = sum;
  }
}

void Simulator::step() {
  const double dt = config_.dt;
  const std::size_t n = step_count_;
  if (n >= total_steps_) throw std::runtime_error("simulator: stepping past the horizon");

  // Interior interfaces. Fluxes are accumulated in vehicles-per-step so the
  // cell update is a single division by the cell width.
  for (auto& l : links_) {
    const std::size_t np = l.paths.size();
    for (int k = 1; k < l.cells; ++k) {
      double left = l.totals[k - 1];
      double f = interface_flux(l.fd, left, l.totals[k]) * dt;
      l.iface_total[k] = f;
      if (left > 0.0 && f > 0.0) {
        for (std::size_t s = 0; s < np; ++s)
          l.iface_comm[k * np + s] = f * (l.commodity[(k - 1) * np + s] / left);
      } else {
        for (std::size_t s = 0; s < np; ++s) l.iface_comm[k * np + s] = 0.0;
      }
    }
  }

  // Diverge junctions: ratios from the exit-cell composition, retained while
  // the exit cell is empty.
  for (auto& d : diverges_) {
    CLink& up = links_[d.up];
    CLink& o1 = links_[d.out1];
    CLink& o2 = links_[d.out2];
    const std::size_t np = up.paths.size();
    const int last = up.cells - 1;
    double total = up.totals[last];
    double branch0 = 0.0, branch1 = 0.0;
    if (total > 0.0) {
      for (std::size_t s = 0; s < np; ++s) {
        double v = up.commodity[last * np + s];
        if (d.branch_of_slot[s] == 0) branch0 += v;
        else branch1 += v;
      }
      double both = branch0 + branch1;
      d.retained_ratios = {branch0 / both, branch1 / both};
    }
    DivergeInput in;
    in.demand_in = up.fd.demand(total);
    in.supply_out1 = o1.fd.supply(o1.totals[0]);
    in.supply_out2 = o2.fd.supply(o2.totals[0]);
    in.ratio_out1 = d.retained_ratios[0];
    in.ratio_out2 = d.retained_ratios[1];
    DivergeFluxes fx = solve_diverge(in);

    up.iface_total[up.cells] = fx.out_flux * dt;
    const std::size_t np1 = o1.paths.size(), np2 = o2.paths.size();
    for (std::size_t s = 0; s < np1; ++s) o1.iface_comm[s] = 0.0;
    for (std::size_t s = 0; s < np2; ++s) o2.iface_comm[s] = 0.0;
    double sum1 = 0.0, sum2 = 0.0;
    for (std::size_t s = 0; s < np; ++s) {
      double phi = 0.0;
      if (total > 0.0 && fx.out_flux > 0.0)
        phi = fx.out_flux * dt * (up.commodity[last * np + s] / total);
      up.iface_comm[up.cells * np + s] = phi;
      int p = up.paths[s];
      if (d.branch_of_slot[s] == 0) {
        o1.iface_comm[o1.slot_of_path(p)] += phi;
        sum1 += phi;
      } else {
        o2.iface_comm[o2.slot_of_path(p)] += phi;
        sum2 += phi;
      }
    }
    o1.iface_total[0] = sum1;
    o2.iface_total[0] = sum2;
  }

  // Merge junctions.
  for (auto& m : merges_) {
    CLink& i1 = links_[m.in1];
    CLink& i2 = links_[m.in2];
    CLink& out = links_[m.out];
    MergeInput in;
    in.demand_in1 = i1.fd.demand(i1.totals[i1.cells - 1]);
    in.demand_in2 = i2.fd.demand(i2.totals[i2.cells - 1]);
    in.supply_out = out.fd.supply(out.totals[0]);
    in.priority = m.priority;
    MergeFluxes fx = solve_merge(in);

    const std::size_t npo = out.paths.size();
    for (std::size_t s = 0; s < npo; ++s) out.iface_comm[s] = 0.0;
    double sum_in = 0.0;
    auto discharge_into_out = [&](CLink& src, double flux) {
      const std::size_t np = src.paths.size();
      const int last = src.cells - 1;
      double total = src.totals[last];
      src.iface_total[src.cells] = flux * dt;
      for (std::size_t s = 0; s < np; ++s) {
        double phi = 0.0;
        if (total > 0.0 && flux > 0.0)
          phi = flux * dt * (src.commodity[last * np + s] / total);
        src.iface_comm[src.cells * np + s] = phi;
        out.iface_comm[out.slot_of_path(src.paths[s])] += phi;
        sum_in += phi;
      }
    };
    discharge_into_out(i1, fx.out_flux1);
    discharge_into_out(i2, fx.out_flux2);
    out.iface_total[0] = sum_in;
  }

  // Origins: point-queue discharge into the first cell of the virtual link.
  for (auto& o : origins_) {
    CLink& vl = links_[o.vlink];
    std::vector<double> rates(o.paths.size(), 0.0);
    double pushed = 0.0;
    for (std::size_t s = 0; s < o.paths.size(); ++s) {
      rates[s] = demand_rates_[o.paths[s]][n];
      pushed += rates[s] * dt;
    }
    double supply = vl.fd.supply(vl.totals[0]);
    std::vector<double> discharged = o.queue.update(rates, supply, dt);
    double sum = 0.0;
    for (std::size_t s = 0; s < o.paths.size(); ++s) {
      vl.iface_comm[vl.slot_of_path(o.paths[s])] = discharged[s];
      sum += discharged[s];
    }
    vl.iface_total[0] = sum;
    o.cum_in += pushed;
    o.cum_out += sum;
    departed_ += pushed;
  }

  // Destinations: capacity-limited discharge out of the last cell.
  for (auto& dst : destinations_) {
    CLink& vl = links_[dst.vlink];
    const std::size_t np = vl.paths.size();
    const int last = vl.cells - 1;
    double total = vl.totals[last];
    double flux = std::min(vl.fd.demand(total), dst.supply);
    vl.iface_total[vl.cells] = flux * dt;
    double sum = 0.0;
    for (std::size_t s = 0; s < np; ++s) {
      double phi = 0.0;
      if (total > 0.0 && flux > 0.0) phi = flux * dt * (vl.commodity[last * np + s] / total);
      vl.iface_comm[vl.cells * np + s] = phi;
      sum += phi;
    }
    absorbed_ += sum;
  }

  // Conservative update of the commodity densities.
  for (auto& l : links_) {
    const std::size_t np = l.paths.size();
    for (int c = 0; c < l.cells; ++c) {
      for (std::size_t s = 0; s < np; ++s) {
        double& rho = l.commodity[c * np + s];
        rho += (l.iface_comm[c * np + s] - l.iface_comm[(c + 1) * np + s]) / l.dx;
        if (rho < 0.0) {
          if (rho < -1e-9 * l.fd.jam_density())
            throw std::runtime_error(
                "simulator: numerical fault (negative density) at step " +
                std::to_string(step_count_) + ", link '" + l.id + "', cell " + std::to_string(c));
          rho = 0.0;
        }
      }
    }
    l.cum_in += l.iface_total[0];
    l.cum_out += l.iface_total[l.cells];
  }
  for (auto& l : links_) refresh_totals(l);

  ++step_count_;
  record_sample();
  if (config_.check_invariants) check_state();
}

void Simulator::record_sample() {
  for (std::size_t k = 0; k < links_.size(); ++k) {
    out_.link_cum_in[k].push_back(links_[k].cum_in);
    out_.link_cum_out[k].push_back(links_[k].cum_out);
  }
  for (std::size_t k = 0; k < origins_.size(); ++k) {
    out_.origin_cum_in[k].push_back(origins_[k].cum_in);
    out_.origin_cum_out[k].push_back(origins_[k].cum_out);
    out_.queue_trace[k].push_back(origins_[k].queue.vehicles());
  }

  double min_supply = std::numeric_limits<double>::infinity();
  int at_link = -1, at_cell = -1;
  MassLedger ledger;
  ledger.departed = departed_;
  ledger.absorbed = absorbed_;
  for (std::size_t k = 0; k < links_.size(); ++k) {
    const CLink& l = links_[k];
    double veh = 0.0;
    for (int c = 0; c < l.cells; ++c) {
      veh += l.totals[c] * l.dx;
      double s = l.fd.supply(l.totals[c]);
      if (s < min_supply) {
        min_supply = s;
        at_link = static_cast<int>(k);
        at_cell = c;
      }
    }
    ledger.on_links += veh;
  }
  for (const auto& o : origins_) ledger.queued += o.queue.vehicles();
  out_.min_supply.push_back(min_supply);
  out_.min_supply_link.push_back(at_link);
  out_.min_supply_cell.push_back(at_cell);
  out_.ledger.push_back(ledger);

  if (config_.record_densities)
    for (std::size_t k = 0; k < links_.size(); ++k) out_.densities[k].push_back(links_[k].totals);
  if (config_.record_exit_shares) {
    for (std::size_t k = 0; k < links_.size(); ++k) {
      const CLink& l = links_[k];
      const std::size_t np = l.paths.size();
      const int last = l.cells - 1;
      double total = l.totals[last];
      for (std::size_t s = 0; s < np; ++s) {
        double mu = total > 0.0 ? l.commodity[last * np + s] / total : 0.0;
        out_.exit_shares[k][s].push_back(mu);
      }
    }
  }
}

void Simulator::check_state() const {
  const MassLedger& m = out_.ledger.back();
  double initial = 0.0;
  for (const auto& l : links_) initial += l.initial_vehicles;
  double lhs = m.departed + initial;
  double rhs = m.queued + m.on_links + m.absorbed;
  double scale = std::max(1.0, std::max(lhs, rhs));
  if (std::fabs(lhs - rhs) > 1e-9 * scale)
    throw std::runtime_error("simulator: mass balance violated at step " +
                             std::to_string(step_count_) + " (departed+initial " +
                             std::to_string(lhs) + " vs accounted " + std::to_string(rhs) + ")");
}

RunOutput Simulator::run() {
  while (step_count_ < total_steps_) step();
  return out_;
}

std::array<double, 2> Simulator::turning_ratios(const std::string& junction_id) const {
  for (std::size_t k = 0; k < diverges_.size(); ++k) {
    if (junction_ids_[diverges_[k].junction] == junction_id) {
      const CDiverge& d = diverges_[k];
      const CLink& up = links_[d.up];
      const std::size_t np = up.paths.size();
      const int last = up.cells - 1;
      double total = up.totals[last];
      if (total <= 0.0) return d.retained_ratios;
      double b0 = 0.0, b1 = 0.0;
      for (std::size_t s = 0; s < np; ++s) {
        double v = up.commodity[last * np + s];
        if (d.branch_of_slot[s] == 0) b0 += v;
        else b1 += v;
      }
      return {b0 / (b0 + b1), b1 / (b0 + b1)};
    }
  }
  throw std::invalid_argument("simulator: no diverge junction '" + junction_id + "'");
}

std::vector<double> Simulator::link_densities(const std::string& link_id) const {
  for (const auto& l : links_)
    if (l.id == link_id) return l.totals;
  throw std::invalid_argument("simulator: unknown link '" + link_id + "'");
}

std::optional<double> RunOutput::queue_exit_time(int origin, double t) const {
  const auto& in = origin_cum_in[origin];
  const auto& out = origin_cum_out[origin];
  double target = interp_curve(in, dt, t);
  if (target <= kTinyVehicles) return t;  // nothing queued before this departure
  auto tau = invert_curve(out, dt, target);
  if (tau.has_value()) return std::max(t, *tau);
  double q = interp_curve(queue_trace[origin], dt, t);
  if (q <= kTinyVehicles) return t;
  return std::nullopt;  // still queued at the end of the horizon
}

std::optional<double> RunOutput::link_exit_time(int link, double t) const {
  const LinkInfo& info = links[link];
  double free_flow = info.length / info.free_flow_speed;
  double target = interp_curve(link_cum_in[link], dt, t) + info.initial_vehicles;
  // A vehicle entering a (near-)empty link traverses it at free-flow speed.
  // The threshold absorbs the numerical drain tail: after the physical load
  // clears, upwind diffusion leaves a sub-1e-6-vehicle trickle whose count
  // inversion would report meaningless trickle-clearing times.
  double mass_ahead = target - interp_curve(link_cum_out[link], dt, t);
  if (mass_ahead <= 1e-6) return t + free_flow;
  auto tau = invert_curve(link_cum_out[link], dt, target);
  if (!tau.has_value()) return std::nullopt;  // still on the link at the horizon
  // Exits can never beat free flow; the inverted curve can undershoot by a
  // fraction of a cell due to numerical smearing.
  return std::max(*tau, t + free_flow);
}

std::optional<double> RunOutput::path_arrival(int path, double t) const {
  auto tau = queue_exit_time(path_origin[path], t);
  if (!tau.has_value()) return std::nullopt;
  for (const auto& id : path_links[path]) {
    tau = link_exit_time(link_index(id), *tau);
    if (!tau.has_value()) return std::nullopt;
  }
  return tau;
}

DelayTable RunOutput::delay_table(int stride) const {
  DelayTable table;
  table.paths = path_ids;
  for (std::size_t k = 0; k <= steps; k += static_cast<std::size_t>(stride))
    table.departure_times.push_back(static_cast<double>(k) * dt);
  table.arrival.assign(path_ids.size(), {});
  table.travel.assign(path_ids.size(), {});
  for (std::size_t p = 0; p < path_ids.size(); ++p) {
    for (double t : table.departure_times) {
      auto a = path_arrival(static_cast<int>(p), t);
      table.arrival[p].push_back(a.value_or(kNan));
      table.travel[p].push_back(a.has_value() ? *a - t : kNan);
    }
  }
  return table;
}

int RunOutput::link_index(const std::string& id) const {
  for (std::size_t k = 0; k < links.size(); ++k)
    if (links[k].id == id) return static_cast<int>(k);
  throw std::invalid_argument("run output: unknown link '" + id + "'");
}

int RunOutput::path_index(const std::string& id) const {
  for (std::size_t k = 0; k < path_ids.size(); ++k)
    if (path_ids[k] == id) return static_cast<int>(k);
  throw std::invalid_argument("run output: unknown path '" + id + "'");
}

int RunOutput::origin_index(const std::string& id) const {
  for (std::size_t k = 0; k < origin_ids.size(); ++k)
    if (origin_ids[k] == id) return static_cast<int>(k);
  throw std::invalid_argument("run output: unknown origin '" + id + "'");
}

RunOutput run_simulation(const Network& net, const std::vector<DemandProfile>& demand,
                         const SimulationConfig& config) {
  Simulator sim(net, demand, config);
  return sim.run();
}

std::vector<double> godunov_evolve_pwc(const FundamentalDiagram& fd, double length, int cells,
                                       const std::vector<double>& jump_positions,
                                       const std::vector<double>& states, double t_end,
                                       double cfl) {
  if (states.size() != jump_positions.size() + 1)
    throw std::invalid_argument("godunov_evolve_pwc: need one more state than jumps");
  if (cells <= 0) throw std::invalid_argument("godunov_evolve_pwc: cells must be positive");
  const double dx = length / cells;

  // Exact cell averages of the piecewise-constant initial profile.
  std::vector<double> rho(cells, 0.0);
  for (int c = 0; c < cells; ++c) {
    double a = c * dx, b = (c + 1) * dx;
    double acc = 0.0, lo = a;
    for (std::size_t j = 0; j <= jump_positions.size(); ++j) {
      double hi = j < jump_positions.size() ? std::min(jump_positions[j], b) : b;
      if (hi > lo) acc += (hi - lo) * states[j];
      lo = std::max(lo, hi);
      if (lo >= b) break;
    }
    rho[c] = acc / dx;
  }

  double vmax = std::max(fd.free_flow_speed(), fd.backward_wave_speed());
  double dt = cfl * dx / vmax;
  double t = 0.0;
  std::vector<double> next(cells, 0.0);
  std::vector<double> flux(cells + 1, 0.0);
  while (t < t_end - 1e-12) {
    double h = std::min(dt, t_end - t);
    flux[0] = interface_flux(fd, states.front(), rho[0]);
    for (int c = 1; c < cells; ++c) flux[c] = interface_flux(fd, rho[c - 1], rho[c]);
    flux[cells] = interface_flux(fd, rho[cells - 1], states.back());
    for (int c = 0; c < cells; ++c) next[c] = rho[c] + (h / dx) * (flux[c] - flux[c + 1]);
    rho.swap(next);
    t += h;
  }
  return rho;
}

}  // namespace dnl
