#include "dnl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dnl::io {

namespace {

using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

double parse_supply(const ordered_json& j) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("destination supply must be a number or \"inf\"");
  }
  return j.get<double>();
}

FundamentalDiagram parse_fd(const ordered_json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "triangular") {
    return FundamentalDiagram::triangular(j.at("free_flow_speed").get<double>(),
                                          j.at("jam_density").get<double>(),
                                          j.at("backward_wave_speed").get<double>());
  }
  if (kind == "piecewise_linear") {
    std::vector<FundamentalDiagram::Breakpoint> pts;
    for (const auto& bp : j.at("breakpoints"))
      pts.push_back({bp.at(0).get<double>(), bp.at(1).get<double>()});
    return FundamentalDiagram::piecewise_linear(std::move(pts));
  }
  throw std::invalid_argument("unknown fundamental diagram kind '" + kind + "'");
}

ordered_json fd_to_json(const FundamentalDiagram& fd) {
  ordered_json j;
  if (fd.kind() == FundamentalDiagram::Kind::Triangular) {
    j["kind"] = "triangular";
    j["free_flow_speed"] = fd.free_flow_speed();
    j["jam_density"] = fd.jam_density();
    j["backward_wave_speed"] = fd.backward_wave_speed();
  } else {
    j["kind"] = "piecewise_linear";
    ordered_json pts = ordered_json::array();
    for (const auto& bp : fd.breakpoints()) pts.push_back({bp.density, bp.flow});
    j["breakpoints"] = pts;
  }
  return j;
}

}  // namespace

Network parse_network(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("network file: parse error: ") + e.what());
  }
  Network net;
  struct PendingVirtual {
    std::size_t index;
    bool needs_length;
    bool needs_fd;
  };
  std::vector<PendingVirtual> pending;
  try {
    for (const auto& lj : j.at("links")) {
      Link l;
      l.id = lj.at("id").get<std::string>();
      l.is_virtual = lj.value("virtual", false);
      l.cell_count = lj.value("cells", 0);
      bool has_length = lj.contains("length");
      bool has_fd = lj.contains("fd");
      if (has_length) l.length = lj.at("length").get<double>();
      if (has_fd) l.fd = parse_fd(lj.at("fd"));
      if ((!has_length || !has_fd) && !l.is_virtual)
        throw std::invalid_argument("link '" + l.id + "': length and fd are required");
      if (!has_length || !has_fd)
        pending.push_back({net.links.size(), !has_length, !has_fd});
      net.links.push_back(std::move(l));
    }
    for (const auto& jj : j.value("junctions", ordered_json::array())) {
      Junction junc;
      junc.id = jj.at("id").get<std::string>();
      for (const auto& id : jj.at("in")) junc.in.push_back(id.get<std::string>());
      for (const auto& id : jj.at("out")) junc.out.push_back(id.get<std::string>());
      if (jj.contains("priority")) junc.priority = jj.at("priority").get<double>();
      net.junctions.push_back(std::move(junc));
    }
    for (const auto& oj : j.at("origins")) {
      net.origins.push_back(
          {oj.at("id").get<std::string>(), oj.at("virtual_link").get<std::string>()});
    }
    for (const auto& dj : j.at("destinations")) {
      Destination d;
      d.id = dj.at("id").get<std::string>();
      d.virtual_link = dj.at("virtual_link").get<std::string>();
      d.supply = dj.contains("supply") ? parse_supply(dj.at("supply"))
                                       : std::numeric_limits<double>::infinity();
      net.destinations.push_back(std::move(d));
    }
    for (const auto& pj : j.at("paths")) {
      Path p;
      p.id = pj.at("id").get<std::string>();
      p.origin = pj.at("origin").get<std::string>();
      for (const auto& id : pj.at("links")) p.links.push_back(id.get<std::string>());
      net.paths.push_back(std::move(p));
    }
  } catch (const ordered_json::exception& e) {
    throw std::invalid_argument(std::string("network file: ") + e.what());
  }

  // Defaults for underspecified virtual links: length of the shortest real
  // link and the diagram of a real link at the same junction.
  if (!pending.empty()) {
    double min_real_length = std::numeric_limits<double>::infinity();
    for (const auto& l : net.links)
      if (!l.is_virtual && l.length > 0.0) min_real_length = std::min(min_real_length, l.length);
    for (const auto& pv : pending) {
      Link& vl = net.links[pv.index];
      if (pv.needs_length) {
        if (!std::isfinite(min_real_length))
          throw std::invalid_argument("virtual link '" + vl.id +
                                      "': no real link to default the length from");
        vl.length = min_real_length;
      }
      if (pv.needs_fd) {
        const Link* neighbor = nullptr;
        for (const auto& junc : net.junctions) {
          bool touches = false;
          for (const auto& id : junc.in) touches = touches || id == vl.id;
          for (const auto& id : junc.out) touches = touches || id == vl.id;
          if (!touches) continue;
          for (const auto& id : junc.in) {
            const Link* cand = net.find_link(id);
            if (cand && !cand->is_virtual) neighbor = cand;
          }
          for (const auto& id : junc.out) {
            const Link* cand = net.find_link(id);
            if (cand && !cand->is_virtual) neighbor = cand;
          }
        }
        if (!neighbor)
          throw std::invalid_argument("virtual link '" + vl.id +
                                      "': no adjacent real link to default the diagram from");
        vl.fd = neighbor->fd;
      }
    }
  }

  auto violations = validate(net);
  if (!violations.empty()) {
    std::string msg = "network file: validation failed:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw std::invalid_argument(msg);
  }
  return net;
}

Network load_network(const std::string& path) { return parse_network(read_file(path)); }

std::string network_to_json(const Network& net) {
  ordered_json j;
  j["links"] = ordered_json::array();
  for (const auto& l : net.links) {
    ordered_json lj;
    lj["id"] = l.id;
    lj["length"] = l.length;
    lj["fd"] = fd_to_json(l.fd);
    if (l.is_virtual) lj["virtual"] = true;
    if (l.cell_count > 0) lj["cells"] = l.cell_count;
    j["links"].push_back(lj);
  }
  j["junctions"] = ordered_json::array();
  for (const auto& junc : net.junctions) {
    ordered_json jj;
    jj["id"] = junc.id;
    jj["in"] = junc.in;
    jj["out"] = junc.out;
    if (junc.priority) jj["priority"] = *junc.priority;
    j["junctions"].push_back(jj);
  }
  j["origins"] = ordered_json::array();
  for (const auto& o : net.origins)
    j["origins"].push_back({{"id", o.id}, {"virtual_link", o.virtual_link}});
  j["destinations"] = ordered_json::array();
  for (const auto& d : net.destinations) {
    ordered_json dj;
    dj["id"] = d.id;
    dj["virtual_link"] = d.virtual_link;
    if (std::isinf(d.supply)) dj["supply"] = "inf";
    else dj["supply"] = d.supply;
    j["destinations"].push_back(dj);
  }
  j["paths"] = ordered_json::array();
  for (const auto& p : net.paths)
    j["paths"].push_back({{"id", p.id}, {"origin", p.origin}, {"links", p.links}});
  return j.dump(2) + "\n";
}

void save_network(const Network& net, const std::string& path) {
  write_file(path, network_to_json(net));
}

std::vector<DemandProfile> parse_demand(const std::string& text, const Network& net) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("demand file: parse error: ") + e.what());
  }
  std::vector<DemandProfile> out;
  try {
    for (const auto& dj : j.value("demands", ordered_json::array())) {
      DemandProfile p;
      p.path = dj.at("path").get<std::string>();
      if (!net.find_path(p.path))
        throw std::invalid_argument("demand file: unknown path '" + p.path + "'");
      double last_t = -std::numeric_limits<double>::infinity();
      for (const auto& piece : dj.at("profile")) {
        double t = piece.at(0).get<double>();
        double rate = piece.at(1).get<double>();
        if (rate < 0.0)
          throw std::invalid_argument("demand file: negative rate on path '" + p.path + "'");
        if (t < last_t)
          throw std::invalid_argument("demand file: breakpoints out of order on path '" +
                                      p.path + "'");
        last_t = t;
        p.pieces.emplace_back(t, rate);
      }
      out.push_back(std::move(p));
    }
  } catch (const ordered_json::exception& e) {
    throw std::invalid_argument(std::string("demand file: ") + e.what());
  }
  return out;
}

std::vector<DemandProfile> load_demand(const std::string& path, const Network& net) {
  return parse_demand(read_file(path), net);
}

std::string demand_to_json(const std::vector<DemandProfile>& demand) {
  ordered_json j;
  j["demands"] = ordered_json::array();
  for (const auto& p : demand) {
    ordered_json dj;
    dj["path"] = p.path;
    ordered_json pieces = ordered_json::array();
    for (const auto& [t, r] : p.pieces) pieces.push_back({t, r});
    dj["profile"] = pieces;
    j["demands"].push_back(dj);
  }
  return j.dump(2) + "\n";
}

void save_demand(const std::vector<DemandProfile>& demand, const std::string& path) {
  write_file(path, demand_to_json(demand));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_delay_csv(const DelayTable& table, const std::string& path) {
  std::ostringstream ss;
  ss << kVersionHeader << "\npath,departure_time,arrival_time,travel_time\n";
  for (std::size_t p = 0; p < table.paths.size(); ++p) {
    for (std::size_t k = 0; k < table.departure_times.size(); ++k) {
      ss << table.paths[p] << ',' << format_double(table.departure_times[k]) << ','
         << format_double(table.arrival[p][k]) << ',' << format_double(table.travel[p][k])
         << '\n';
    }
  }
  write_file(path, ss.str());
}

void write_queue_csv(const RunOutput& run, const std::string& path) {
  std::ostringstream ss;
  ss << kVersionHeader << "\ntime,origin,queue_vehicles\n";
  std::size_t samples = run.queue_trace.empty() ? 0 : run.queue_trace[0].size();
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t o = 0; o < run.origin_ids.size(); ++o) {
      ss << format_double(static_cast<double>(k) * run.dt) << ',' << run.origin_ids[o] << ','
         << format_double(run.queue_trace[o][k]) << '\n';
    }
  }
  write_file(path, ss.str());
}

void write_density_csv(const RunOutput& run, const std::string& path) {
  if (run.densities.empty())
    throw std::invalid_argument("density trace was not recorded (enable record_densities)");
  std::ostringstream ss;
  ss << kVersionHeader << "\ntime,link,cell,x,density\n";
  for (std::size_t l = 0; l < run.links.size(); ++l) {
    for (std::size_t k = 0; k < run.densities[l].size(); ++k) {
      for (std::size_t c = 0; c < run.densities[l][k].size(); ++c) {
        double x = (static_cast<double>(c) + 0.5) * run.links[l].cell_width;
        ss << format_double(static_cast<double>(k) * run.dt) << ',' << run.links[l].id << ','
           << c << ',' << format_double(x) << ',' << format_double(run.densities[l][k][c])
           << '\n';
      }
    }
  }
  write_file(path, ss.str());
}

void write_supply_report_csv(const SupplyBoundReport& rep, const std::string& path) {
  std::ostringstream ss;
  ss << kVersionHeader << "\nwindow,t_begin,t_end,observed_min_supply,bound,tolerance,pass\n";
  for (const auto& r : rep.rows) {
    ss << r.k << ',' << format_double(r.t_begin) << ',' << format_double(r.t_end) << ','
       << format_double(r.observed) << ',' << format_double(r.bound) << ','
       << format_double(rep.tolerance) << ',' << (r.pass ? "1" : "0") << '\n';
  }
  write_file(path, ss.str());
}

void write_probe_report_csv(const ContinuityProbeReport& rep, const std::string& path) {
  std::ostringstream ss;
  ss << kVersionHeader << "\nperturbation_size,delay_deviation\n";
  for (const auto& r : rep.rows)
    ss << format_double(r.size) << ',' << format_double(r.deviation) << '\n';
  write_file(path, ss.str());
}

void write_illposedness_csv(const IllPosednessReport& rep, const std::string& path) {
  std::ostringstream ss;
  ss << kVersionHeader
     << "\neps,out_flux,in_flux_congested_branch,in_flux_free_branch,rho_congested_branch,rho_"
        "free_branch\n";
  for (const auto& r : rep.rows) {
    ss << format_double(r.eps) << ',' << format_double(r.out_flux) << ','
       << format_double(r.in_flux1) << ',' << format_double(r.in_flux2) << ','
       << format_double(r.rho_out1) << ',' << format_double(r.rho_out2) << '\n';
  }
  ss << "# empirical_gap," << format_double(rep.empirical_gap) << '\n';
  ss << "# closed_form_gap," << format_double(rep.closed_form_gap) << '\n';
  write_file(path, ss.str());
}

std::string render_supply_report(const SupplyBoundReport& rep) {
  std::ostringstream ss;
  ss << "supply bound check (window length " << format_double(rep.window_length)
     << ", tolerance " << format_double(rep.tolerance) << ")\n";
  ss << "  k    [t_begin, t_end)        observed       bound          pass\n";
  for (const auto& r : rep.rows) {
    ss << "  " << r.k << "    [" << format_double(r.t_begin) << ", " << format_double(r.t_end)
       << ")    " << format_double(r.observed) << "    " << format_double(r.bound) << "    "
       << (r.pass ? "yes" : "NO") << '\n';
  }
  ss << (rep.all_pass ? "all windows pass\n" : "BOUND VIOLATED\n");
  return ss.str();
}

std::string render_probe_report(const ContinuityProbeReport& rep) {
  std::ostringstream ss;
  ss << "continuity probe\n  size           deviation\n";
  for (const auto& r : rep.rows)
    ss << "  " << format_double(r.size) << "    " << format_double(r.deviation) << '\n';
  ss << "trend: " << (rep.monotone ? "consistent with continuity" : "NOT monotone") << '\n';
  return ss.str();
}

std::string render_illposedness(const IllPosednessReport& rep) {
  std::ostringstream ss;
  ss << "diverge flux outcomes by composition share\n  eps        out_flux   in_1       in_2\n";
  for (const auto& r : rep.rows) {
    ss << "  " << format_double(r.eps) << "    " << format_double(r.out_flux) << "    "
       << format_double(r.in_flux1) << "    " << format_double(r.in_flux2) << '\n';
  }
  ss << "empirical gap: " << format_double(rep.empirical_gap)
     << "  (closed form: " << format_double(rep.closed_form_gap) << ")\n";
  return ss.str();
}

}  // namespace dnl::io
