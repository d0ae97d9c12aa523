#ifndef DNL_TESTS_FIXTURES_HPP
#define DNL_TESTS_FIXTURES_HPP

#include <limits>
#include <string>

#include "dnl/network.hpp"
#include "dnl/simulator.hpp"

namespace fixtures {

// Triangular diagram used throughout: capacity 1 at critical density 1,
// jam density 3, free-flow speed 1, backward wave speed 1/2.
inline dnl::FundamentalDiagram canonical_fd() {
  return dnl::FundamentalDiagram::triangular(1.0, 3.0, 0.5);
}

// Symmetric triangular diagram (equal forward/backward speeds), which the
// convergence ladders run at unit CFL.
inline dnl::FundamentalDiagram symmetric_fd() {
  return dnl::FundamentalDiagram::triangular(1.0, 2.0, 1.0);
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Origin -> virtual link -> destination. The smallest valid network.
inline dnl::Network single_link_network(double length = 1.0, double supply = kInf,
                                        const dnl::FundamentalDiagram& fd = canonical_fd()) {
  dnl::Network net;
  net.links.push_back({"vs", length, fd, true, 0});
  net.origins.push_back({"s", "vs"});
  net.destinations.push_back({"t", "vs", supply});
  net.paths.push_back({"p0", "s", {"vs"}});
  return net;
}

// One origin feeding a diverge whose branches end at two destinations.
// Lengths: upstream len_up, branches len_a / len_b. Two paths pa, pb.
inline dnl::Network diverge_network(double len_up = 1.0, double len_a = 1.0, double len_b = 1.0,
                                    double supply_a = kInf, double supply_b = kInf,
                                    const dnl::FundamentalDiagram& fd = canonical_fd()) {
  dnl::Network net;
  net.links.push_back({"vs", len_up, fd, true, 0});
  net.links.push_back({"a", len_a, fd, true, 0});
  net.links.push_back({"b", len_b, fd, true, 0});
  net.junctions.push_back({"J", {"vs"}, {"a", "b"}, std::nullopt});
  net.origins.push_back({"s", "vs"});
  net.destinations.push_back({"ta", "a", supply_a});
  net.destinations.push_back({"tb", "b", supply_b});
  net.paths.push_back({"pa", "s", {"vs", "a"}});
  net.paths.push_back({"pb", "s", {"vs", "b"}});
  return net;
}

// Two origins feeding a merge; the outgoing link ends at one destination.
inline dnl::Network merge_network(double priority = 0.5, double supply = kInf,
                                  double len = 1.0,
                                  const dnl::FundamentalDiagram& fd = canonical_fd()) {
  dnl::Network net;
  net.links.push_back({"v4", len, fd, true, 0});
  net.links.push_back({"v5", len, fd, true, 0});
  net.links.push_back({"v6", len, fd, true, 0});
  net.junctions.push_back({"J", {"v4", "v5"}, {"v6"}, priority});
  net.origins.push_back({"s4", "v4"});
  net.origins.push_back({"s5", "v5"});
  net.destinations.push_back({"t", "v6", supply});
  net.paths.push_back({"p4", "s4", {"v4", "v6"}});
  net.paths.push_back({"p5", "s5", {"v5", "v6"}});
  return net;
}

// Origin -> diverge -> two real branches -> merge -> destination.
inline dnl::Network diverge_merge_network(double priority = 0.5, double supply = kInf,
                                          const dnl::FundamentalDiagram& fd = canonical_fd()) {
  dnl::Network net;
  net.links.push_back({"vs", 1.0, fd, true, 0});
  net.links.push_back({"a", 1.0, fd, false, 0});
  net.links.push_back({"b", 1.0, fd, false, 0});
  net.links.push_back({"vd", 1.0, fd, true, 0});
  net.junctions.push_back({"JD", {"vs"}, {"a", "b"}, std::nullopt});
  net.junctions.push_back({"JM", {"a", "b"}, {"vd"}, priority});
  net.origins.push_back({"s", "vs"});
  net.destinations.push_back({"t", "vd", supply});
  net.paths.push_back({"pa", "s", {"vs", "a", "vd"}});
  net.paths.push_back({"pb", "s", {"vs", "b", "vd"}});
  return net;
}

inline dnl::DemandProfile constant_demand(const std::string& path, double rate,
                                          double until = kInf) {
  dnl::DemandProfile p;
  p.path = path;
  p.pieces.emplace_back(0.0, rate);
  if (until < kInf) p.pieces.emplace_back(until, 0.0);
  return p;
}

}  // namespace fixtures

#endif
