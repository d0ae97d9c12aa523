#ifndef DNL_JUNCTION_HPP
#define DNL_JUNCTION_HPP

#include "dnl/fundamental_diagram.hpp"

namespace dnl {

/// Inputs to the 1-in/2-out diverge flux solver. Turning ratios must be
/// nonnegative and sum to one whenever the upstream demand is positive.
struct DivergeInput {
  double demand_in = 0.0;    // sending capacity of the incoming link
  double supply_out1 = 0.0;  // receiving capacity of the first outgoing link
  double supply_out2 = 0.0;
  double ratio_out1 = 0.0;   // share of discharged flow bound for link 1
  double ratio_out2 = 0.0;
};

struct DivergeFluxes {
  double out_flux = 0.0;  // exit flow of the incoming link
  double in_flux1 = 0.0;  // entering flows of the outgoing links
  double in_flux2 = 0.0;
};

/// Inputs to the 2-in/1-out merge flux solver.
struct MergeInput {
  double demand_in1 = 0.0;
  double demand_in2 = 0.0;
  double supply_out = 0.0;
  double priority = 0.5;  // right-of-way share of incoming link 1, in (0,1)
};

struct MergeFluxes {
  double out_flux1 = 0.0;  // exit flows of the two incoming links
  double out_flux2 = 0.0;
};

/// Flow-maximizing diverge: the exit flow is the least of the demand and the
/// ratio-scaled supplies; vehicles already committed to a full branch block
/// the rest. A zero turning ratio means the branch imposes no constraint
/// (its supply-over-ratio quotient is taken as +infinity).
/// Throws std::domain_error on negative inputs.
DivergeFluxes solve_diverge(const DivergeInput& in);

/// Flow-maximizing merge with right-of-way: when demands fit the supply they
/// pass; otherwise the supply is split at the priority ray, clamped to the
/// feasible flow rectangle (median of supply-minus-other-demand, priority
/// share, own demand in each coordinate).
/// Throws std::domain_error on negative inputs.
MergeFluxes solve_merge(const MergeInput& in);

/// Boundary traces of the diverge Riemann solver: the density each incident
/// link carries at the junction after the interaction. Upstream keeps its
/// state when its demand is fully served in free flow and otherwise moves to
/// the congested branch at the exit flow; each downstream link keeps its
/// state when it stays supply-binding in congestion and otherwise moves to
/// the free-flow branch at its entering flow. Re-applying the solver to its
/// own output reproduces it.
struct DivergeBoundary {
  double rho_up = 0.0;
  double rho_out1 = 0.0;
  double rho_out2 = 0.0;
  DivergeFluxes fluxes;
};

DivergeBoundary diverge_boundary_densities(const FundamentalDiagram& fd_up, double rho_up,
                                           const FundamentalDiagram& fd1, double rho_out1,
                                           const FundamentalDiagram& fd2, double rho_out2,
                                           double ratio_out1, double ratio_out2);

struct MergeBoundary {
  double rho_in1 = 0.0;
  double rho_in2 = 0.0;
  double rho_down = 0.0;
  MergeFluxes fluxes;
};

MergeBoundary merge_boundary_densities(const FundamentalDiagram& fd1, double rho_in1,
                                       const FundamentalDiagram& fd2, double rho_in2,
                                       const FundamentalDiagram& fd_down, double rho_down,
                                       double priority);

}  // namespace dnl

#endif  // DNL_JUNCTION_HPP
