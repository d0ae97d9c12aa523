#ifndef DNL_NETWORK_HPP
#define DNL_NETWORK_HPP

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dnl/fundamental_diagram.hpp"

namespace dnl {

struct Link {
  std::string id;
  double length = 0.0;
  FundamentalDiagram fd = FundamentalDiagram::triangular(1.0, 3.0, 0.5);
  bool is_virtual = false;
  int cell_count = 0;  // 0 = choose at simulation configuration
};

/// A junction is a 2-in/1-out merge (with a right-of-way priority) or a
/// 1-in/2-out diverge. Other arities are representable so that validation
/// can reject them with a diagnostic rather than failing to parse.
struct Junction {
  std::string id;
  std::vector<std::string> in;
  std::vector<std::string> out;
  std::optional<double> priority;  // merges only, in (0,1)

  bool is_merge() const { return in.size() == 2 && out.size() == 1; }
  bool is_diverge() const { return in.size() == 1 && out.size() == 2; }
};

struct Origin {
  std::string id;
  std::string virtual_link;
};

struct Destination {
  std::string id;
  std::string virtual_link;
  double supply = std::numeric_limits<double>::infinity();  // > 0, may be inf
};

struct Path {
  std::string id;
  std::string origin;
  std::vector<std::string> links;  // first = origin's virtual link, last = destination's
};

struct Network {
  std::vector<Link> links;
  std::vector<Junction> junctions;
  std::vector<Origin> origins;
  std::vector<Destination> destinations;
  std::vector<Path> paths;

  const Link* find_link(const std::string& id) const;
  const Junction* find_junction(const std::string& id) const;
  const Path* find_path(const std::string& id) const;
  const Origin* find_origin(const std::string& id) const;
};

/// Structural checks: positive lengths, supported junction arities,
/// priorities in (0,1), consistent link-end incidence, and connected paths
/// that run from an origin's virtual link to a destination's virtual link.
/// Returns human-readable violations; empty means the network is valid.
std::vector<std::string> validate(const Network& net);

/// The scalar constants controlling the network supply bound.
struct NetworkConstants {
  double min_link_length = 0.0;           // over all links, including virtual
  double min_capacity = 0.0;              // over all links
  double max_backward_wave_speed = 0.0;   // max |f'(jam-)|
  double min_merge_priority = 1.0;        // min over merges of min(p, 1-p); 1 if no merges
  double min_destination_supply = std::numeric_limits<double>::infinity();
  bool has_merge = false;                 // min_merge_priority is vacuous when false
};

/// Throws std::invalid_argument on an empty network.
NetworkConstants network_constants(const Network& net);

/// Lower bound on the minimum network supply during the k-th backward-wave
/// window: priority^k * min(destination supply, priority * min capacity).
double supply_lower_bound(const NetworkConstants& c, int k);

}  // namespace dnl

#endif  // DNL_NETWORK_HPP
