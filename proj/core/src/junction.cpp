#include "dnl/junction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dnl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Branch decisions in the boundary-density construction compare computed
// fluxes against demands/supplies. The compared values differ by at most a
// few ulp when they agree mathematically, so a loose relative gate keeps the
// construction idempotent without misclassifying genuinely distinct fluxes.
bool flux_equal(double a, double b, double scale) {
  return std::fabs(a - b) <= 1e-9 * scale;
}

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

}  // namespace

DivergeFluxes solve_diverge(const DivergeInput& in) {
  if (in.demand_in < 0.0 || in.supply_out1 < 0.0 || in.supply_out2 < 0.0 ||
      in.ratio_out1 < 0.0 || in.ratio_out2 < 0.0)
    throw std::domain_error("solve_diverge: negative input");
  if (in.demand_in > 0.0) {
    double s = in.ratio_out1 + in.ratio_out2;
    if (std::fabs(s - 1.0) > 1e-9)
      throw std::domain_error("solve_diverge: turning ratios must sum to 1");
  }
  // A zero ratio removes the branch from the minimum entirely (also when its
  // supply is zero, where IEEE division would produce a NaN).
  double q1 = in.ratio_out1 > 0.0 ? in.supply_out1 / in.ratio_out1 : kInf;
  double q2 = in.ratio_out2 > 0.0 ? in.supply_out2 / in.ratio_out2 : kInf;
  DivergeFluxes f;
  f.out_flux = std::min({in.demand_in, q1, q2});
  f.in_flux1 = in.ratio_out1 * f.out_flux;
  // The complement keeps out = in1 + in2 exact to the last bit.
  f.in_flux2 = f.out_flux - f.in_flux1;
  return f;
}

MergeFluxes solve_merge(const MergeInput& in) {
  if (in.demand_in1 < 0.0 || in.demand_in2 < 0.0 || in.supply_out < 0.0)
    throw std::domain_error("solve_merge: negative input");
  if (!(in.priority > 0.0 && in.priority < 1.0))
    throw std::domain_error("solve_merge: priority out of (0,1)");
  MergeFluxes f;
  if (in.demand_in1 + in.demand_in2 <= in.supply_out) {
    f.out_flux1 = in.demand_in1;
    f.out_flux2 = in.demand_in2;
    return f;
  }
  // Both demands cannot pass: split the supply at the right-of-way ray,
  // clamped to the maximizer segment. Evaluating each coordinate by its own
  // median keeps it an exact operand (a demand) whenever that constraint
  // binds; the two expressions agree in exact arithmetic.
  f.out_flux1 = median3(in.supply_out - in.demand_in2, in.priority * in.supply_out,
                        in.demand_in1);
  f.out_flux2 = median3(in.supply_out - in.demand_in1,
                        (1.0 - in.priority) * in.supply_out, in.demand_in2);
  return f;
}

namespace {

// Upstream trace: the link keeps its state only when it is in free flow with
// its whole demand discharged; otherwise the junction imposes the congested
// state carrying the exit flow.
double upstream_trace(const FundamentalDiagram& fd, double rho, double demand,
                      double out_flux) {
  if (rho <= fd.critical_density() && flux_equal(out_flux, demand, fd.capacity()))
    return rho;
  return fd.inverse_congested(std::min(out_flux, fd.capacity()));
}

// Downstream trace: the link keeps its state only when it stays congested
// with the entering flow filling its supply; otherwise the junction imposes
// the free-flow state carrying the entering flow.
double downstream_trace(const FundamentalDiagram& fd, double rho, double supply,
                        double in_flux) {
  if (rho >= fd.critical_density() && flux_equal(in_flux, supply, fd.capacity()))
    return rho;
  return fd.inverse_free_flow(std::min(in_flux, fd.capacity()));
}

}  // namespace

DivergeBoundary diverge_boundary_densities(const FundamentalDiagram& fd_up, double rho_up,
                                           const FundamentalDiagram& fd1, double rho_out1,
                                           const FundamentalDiagram& fd2, double rho_out2,
                                           double ratio_out1, double ratio_out2) {
  DivergeInput in;
  in.demand_in = fd_up.demand(rho_up);
  in.supply_out1 = fd1.supply(rho_out1);
  in.supply_out2 = fd2.supply(rho_out2);
  in.ratio_out1 = ratio_out1;
  in.ratio_out2 = ratio_out2;
  DivergeBoundary b;
  b.fluxes = solve_diverge(in);
  b.rho_up = upstream_trace(fd_up, rho_up, in.demand_in, b.fluxes.out_flux);
  b.rho_out1 = downstream_trace(fd1, rho_out1, in.supply_out1, b.fluxes.in_flux1);
  b.rho_out2 = downstream_trace(fd2, rho_out2, in.supply_out2, b.fluxes.in_flux2);
  return b;
}

MergeBoundary merge_boundary_densities(const FundamentalDiagram& fd1, double rho_in1,
                                       const FundamentalDiagram& fd2, double rho_in2,
                                       const FundamentalDiagram& fd_down, double rho_down,
                                       double priority) {
  MergeInput in;
  in.demand_in1 = fd1.demand(rho_in1);
  in.demand_in2 = fd2.demand(rho_in2);
  in.supply_out = fd_down.supply(rho_down);
  in.priority = priority;
  MergeBoundary b;
  b.fluxes = solve_merge(in);
  double in_flux = b.fluxes.out_flux1 + b.fluxes.out_flux2;
  b.rho_in1 = upstream_trace(fd1, rho_in1, in.demand_in1, b.fluxes.out_flux1);
  b.rho_in2 = upstream_trace(fd2, rho_in2, in.demand_in2, b.fluxes.out_flux2);
  b.rho_down = downstream_trace(fd_down, rho_down, in.supply_out, in_flux);
  return b;
}

}  // namespace dnl
