#ifndef DNL_IO_HPP
#define DNL_IO_HPP

#include <string>
#include <vector>

#include "dnl/analysis.hpp"
#include "dnl/network.hpp"
#include "dnl/simulator.hpp"

namespace dnl::io {

inline constexpr const char* kVersionHeader = "# dnl 0.1.0";

/// Network file: JSON with links (id, length, fd, virtual flag, optional
/// cells), junctions (in/out lists, priority for merges), origins,
/// destinations (supply, "inf" allowed) and paths. Virtual links may omit
/// length/fd; they default to the shortest real link's length and the
/// adjacent real link's diagram. The loaded network is validated; violations
/// raise std::invalid_argument listing them.
Network parse_network(const std::string& json_text);
Network load_network(const std::string& path);
std::string network_to_json(const Network& net);
void save_network(const Network& net, const std::string& path);

/// Demand file: JSON mapping paths to piecewise-constant rate profiles given
/// as (start time, rate) breakpoints.
std::vector<DemandProfile> parse_demand(const std::string& json_text, const Network& net);
std::vector<DemandProfile> load_demand(const std::string& path, const Network& net);
std::string demand_to_json(const std::vector<DemandProfile>& demand);
void save_demand(const std::vector<DemandProfile>& demand, const std::string& path);

// CSV emission. Every file starts with the version header line; all numbers
// are printed with a fixed format so identical runs produce identical bytes.
void write_delay_csv(const DelayTable& table, const std::string& path);
void write_queue_csv(const RunOutput& run, const std::string& path);
void write_density_csv(const RunOutput& run, const std::string& path);
void write_supply_report_csv(const SupplyBoundReport& rep, const std::string& path);
void write_probe_report_csv(const ContinuityProbeReport& rep, const std::string& path);
void write_illposedness_csv(const IllPosednessReport& rep, const std::string& path);

// Plain-text tables for terminal output.
std::string render_supply_report(const SupplyBoundReport& rep);
std::string render_probe_report(const ContinuityProbeReport& rep);
std::string render_illposedness(const IllPosednessReport& rep);

std::string format_double(double v);

}  // namespace dnl::io

#endif  // DNL_IO_HPP
