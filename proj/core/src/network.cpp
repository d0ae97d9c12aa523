#include "dnl/network.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace dnl {

namespace {

template <typename T>
const T* find_by_id(const std::vector<T>& v, const std::string& id) {
  for (const auto& x : v)
    if (x.id == id) return &x;
  return nullptr;
}

}  // namespace

const Link* Network::find_link(const std::string& id) const { return find_by_id(links, id); }
const Junction* Network::find_junction(const std::string& id) const {
  return find_by_id(junctions, id);
}
const Path* Network::find_path(const std::string& id) const { return find_by_id(paths, id); }
const Origin* Network::find_origin(const std::string& id) const {
  return find_by_id(origins, id);
}

std::vector<std::string> validate(const Network& net) {
  std::vector<std::string> v;
  if (net.links.empty()) v.push_back("network has no links");
  std::set<std::string> link_ids;
  for (const auto& l : net.links) {
    if (!link_ids.insert(l.id).second) v.push_back("duplicate link id '" + l.id + "'");
    if (!(l.length > 0.0)) v.push_back("link '" + l.id + "' has nonpositive length");
    if (l.cell_count < 0) v.push_back("link '" + l.id + "' has negative cell count");
  }

  // Each link end may be claimed by at most one junction/origin/destination.
  std::map<std::string, int> upstream_claims, downstream_claims;
  auto claim_up = [&](const std::string& id) { upstream_claims[id]++; };
  auto claim_down = [&](const std::string& id) { downstream_claims[id]++; };

  for (const auto& j : net.junctions) {
    if (!j.is_merge() && !j.is_diverge()) {
      v.push_back("junction '" + j.id + "': unsupported junction arity " +
                  std::to_string(j.in.size()) + "-in/" + std::to_string(j.out.size()) +
                  "-out (only 2-in/1-out merges and 1-in/2-out diverges)");
    }
    if (j.is_merge()) {
      if (!j.priority.has_value()) {
        v.push_back("merge junction '" + j.id + "' is missing a priority");
      } else if (!(*j.priority > 0.0 && *j.priority < 1.0)) {
        v.push_back("merge junction '" + j.id + "': priority out of (0,1)");
      }
    }
    for (const auto& id : j.in) {
      if (!net.find_link(id))
        v.push_back("junction '" + j.id + "' references missing link '" + id + "'");
      else
        claim_down(id);
    }
    for (const auto& id : j.out) {
      if (!net.find_link(id))
        v.push_back("junction '" + j.id + "' references missing link '" + id + "'");
      else
        claim_up(id);
    }
  }
  for (const auto& o : net.origins) {
    const Link* l = net.find_link(o.virtual_link);
    if (!l) {
      v.push_back("origin '" + o.id + "' references missing link '" + o.virtual_link + "'");
    } else {
      if (!l->is_virtual)
        v.push_back("origin '" + o.id + "': link '" + l->id + "' is not virtual");
      claim_up(l->id);
    }
  }
  for (const auto& d : net.destinations) {
    const Link* l = net.find_link(d.virtual_link);
    if (!l) {
      v.push_back("destination '" + d.id + "' references missing link '" + d.virtual_link + "'");
    } else {
      if (!l->is_virtual)
        v.push_back("destination '" + d.id + "': link '" + l->id + "' is not virtual");
      claim_down(l->id);
    }
    if (!(d.supply > 0.0)) v.push_back("destination '" + d.id + "': supply must be positive");
  }
  for (const auto& l : net.links) {
    if (upstream_claims[l.id] > 1)
      v.push_back("link '" + l.id + "': upstream end attached more than once");
    if (downstream_claims[l.id] > 1)
      v.push_back("link '" + l.id + "': downstream end attached more than once");
    if (upstream_claims[l.id] == 0)
      v.push_back("link '" + l.id + "': upstream end is unattached");
    if (downstream_claims[l.id] == 0)
      v.push_back("link '" + l.id + "': downstream end is unattached");
  }

  // Paths: connected through junctions, origin vlink first, destination vlink last.
  std::set<std::string> path_ids;
  for (const auto& p : net.paths) {
    if (!path_ids.insert(p.id).second) v.push_back("duplicate path id '" + p.id + "'");
    if (p.links.empty()) {
      v.push_back("path '" + p.id + "' is empty");
      continue;
    }
    bool refs_ok = true;
    for (const auto& id : p.links) {
      if (!net.find_link(id)) {
        v.push_back("path '" + p.id + "' references missing link '" + id + "'");
        refs_ok = false;
      }
    }
    if (!refs_ok) continue;
    const Origin* o = net.find_origin(p.origin);
    if (!o) {
      v.push_back("path '" + p.id + "' references missing origin '" + p.origin + "'");
    } else if (o->virtual_link != p.links.front()) {
      v.push_back("path '" + p.id + "' does not start at its origin's virtual link");
    }
    bool ends_at_destination = false;
    for (const auto& d : net.destinations)
      if (d.virtual_link == p.links.back()) ends_at_destination = true;
    if (!ends_at_destination)
      v.push_back("path '" + p.id + "' does not end at a destination's virtual link");
    for (std::size_t k = 0; k + 1 < p.links.size(); ++k) {
      bool connected = false;
      for (const auto& j : net.junctions) {
        bool from = std::find(j.in.begin(), j.in.end(), p.links[k]) != j.in.end();
        bool to = std::find(j.out.begin(), j.out.end(), p.links[k + 1]) != j.out.end();
        if (from && to) connected = true;
      }
      if (!connected)
        v.push_back("disconnected path '" + p.id + "': links '" + p.links[k] + "' and '" +
                    p.links[k + 1] + "' do not meet at a junction");
    }
  }
  return v;
}

NetworkConstants network_constants(const Network& net) {
  if (net.links.empty()) throw std::invalid_argument("network_constants: empty network");
  NetworkConstants c;
  c.min_link_length = std::numeric_limits<double>::infinity();
  c.min_capacity = std::numeric_limits<double>::infinity();
  c.max_backward_wave_speed = 0.0;
  for (const auto& l : net.links) {
    c.min_link_length = std::min(c.min_link_length, l.length);
    c.min_capacity = std::min(c.min_capacity, l.fd.capacity());
    c.max_backward_wave_speed = std::max(c.max_backward_wave_speed, l.fd.backward_wave_speed());
  }
  c.min_merge_priority = 1.0;
  for (const auto& j : net.junctions) {
    if (j.is_merge() && j.priority.has_value()) {
      c.has_merge = true;
      c.min_merge_priority =
          std::min(c.min_merge_priority, std::min(*j.priority, 1.0 - *j.priority));
    }
  }
  c.min_destination_supply = std::numeric_limits<double>::infinity();
  for (const auto& d : net.destinations)
    c.min_destination_supply = std::min(c.min_destination_supply, d.supply);
  return c;
}

double supply_lower_bound(const NetworkConstants& c, int k) {
  if (k < 0) throw std::invalid_argument("supply_lower_bound: k must be nonnegative");
  double base = std::min(c.min_destination_supply, c.min_merge_priority * c.min_capacity);
  return std::pow(c.min_merge_priority, k) * base;
}

}  // namespace dnl
