#include "dnl/fundamental_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dnl {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument("fundamental diagram: " + msg);
}

}  // namespace

FundamentalDiagram FundamentalDiagram::triangular(double free_flow_speed,
                                                  double jam_density,
                                                  double backward_wave_speed) {
  require(free_flow_speed > 0.0, "free-flow speed must be positive");
  require(jam_density > 0.0, "jam density must be positive");
  require(backward_wave_speed > 0.0, "backward wave speed must be positive");
  FundamentalDiagram fd;
  fd.kind_ = Kind::Triangular;
  fd.jam_ = jam_density;
  fd.free_flow_speed_ = free_flow_speed;
  fd.backward_speed_ = backward_wave_speed;
  fd.critical_ = backward_wave_speed * jam_density / (free_flow_speed + backward_wave_speed);
  fd.capacity_ = free_flow_speed * fd.critical_;
  fd.points_ = {{0.0, 0.0}, {fd.critical_, fd.capacity_}, {fd.jam_, 0.0}};
  return fd;
}

FundamentalDiagram FundamentalDiagram::piecewise_linear(std::vector<Breakpoint> pts) {
  require(pts.size() >= 3, "need at least three breakpoints");
  require(pts.front().density == 0.0 && pts.front().flow == 0.0,
          "first breakpoint must be (0, 0)");
  require(pts.back().flow == 0.0, "flow must vanish at jam density");
  require(pts.back().density > 0.0, "jam density must be positive");
  double prev_slope = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < pts.size(); ++k) {
    require(pts[k].density > pts[k - 1].density, "breakpoint densities must strictly increase");
    require(pts[k].flow >= 0.0, "flows must be nonnegative");
    double slope = (pts[k].flow - pts[k - 1].flow) / (pts[k].density - pts[k - 1].density);
    require(slope < prev_slope, "segment slopes must strictly decrease (concavity)");
    prev_slope = slope;
  }
  FundamentalDiagram fd;
  fd.kind_ = Kind::PiecewiseLinear;
  fd.points_ = std::move(pts);
  fd.jam_ = fd.points_.back().density;
  // Critical density: first breakpoint attaining the maximum flow.
  fd.capacity_ = 0.0;
  for (const auto& p : fd.points_) fd.capacity_ = std::max(fd.capacity_, p.flow);
  for (const auto& p : fd.points_) {
    if (p.flow == fd.capacity_) {
      fd.critical_ = p.density;
      break;
    }
  }
  require(fd.capacity_ > 0.0, "capacity must be positive");
  const auto& a = fd.points_[0];
  const auto& b = fd.points_[1];
  fd.free_flow_speed_ = (b.flow - a.flow) / (b.density - a.density);
  const auto& y = fd.points_[fd.points_.size() - 2];
  const auto& z = fd.points_.back();
  fd.backward_speed_ = std::fabs((z.flow - y.flow) / (z.density - y.density));
  require(fd.free_flow_speed_ > 0.0, "first segment slope must be positive");
  return fd;
}

double FundamentalDiagram::flow(double rho) const {
  if (!(rho >= 0.0 && rho <= jam_))
    throw std::domain_error("fundamental diagram: density outside [0, jam]");
  if (kind_ == Kind::Triangular) {
    return rho <= critical_ ? free_flow_speed_ * rho : backward_speed_ * (jam_ - rho);
  }
  // Binary search for the segment containing rho.
  auto it = std::upper_bound(points_.begin(), points_.end(), rho,
                             [](double v, const Breakpoint& p) { return v < p.density; });
  if (it == points_.begin()) return 0.0;
  if (it == points_.end()) return points_.back().flow;
  const Breakpoint& hi = *it;
  const Breakpoint& lo = *(it - 1);
  double slope = (hi.flow - lo.flow) / (hi.density - lo.density);
  return lo.flow + slope * (rho - lo.density);
}

double FundamentalDiagram::demand(double rho) const {
  if (!(rho >= 0.0 && rho <= jam_))
    throw std::domain_error("fundamental diagram: density outside [0, jam]");
  return rho >= critical_ ? capacity_ : flow(rho);
}

double FundamentalDiagram::supply(double rho) const {
  if (!(rho >= 0.0 && rho <= jam_))
    throw std::domain_error("fundamental diagram: density outside [0, jam]");
  return rho <= critical_ ? capacity_ : flow(rho);
}

double FundamentalDiagram::velocity(double rho) const {
  if (!(rho >= 0.0 && rho <= jam_))
    throw std::domain_error("fundamental diagram: density outside [0, jam]");
  if (rho == 0.0) return free_flow_speed_;
  return flow(rho) / rho;
}

double FundamentalDiagram::inverse_congested(double q) const {
  if (!(q >= 0.0 && q <= capacity_))
    throw std::domain_error("fundamental diagram: flow outside [0, capacity]");
  if (kind_ == Kind::Triangular) {
    return jam_ - q / backward_speed_;
  }
  if (q == capacity_) return critical_;
  // Walk the congested branch from the critical density down to jam.
  for (std::size_t k = 0; k + 1 < points_.size(); ++k) {
    const Breakpoint& lo = points_[k];
    const Breakpoint& hi = points_[k + 1];
    if (hi.density <= critical_) continue;
    double f_lo = lo.density < critical_ ? capacity_ : lo.flow;
    if (q <= f_lo && q >= hi.flow) {
      double d_lo = std::max(lo.density, critical_);
      double slope = (hi.flow - f_lo) / (hi.density - d_lo);
      if (slope == 0.0) return d_lo;
      return d_lo + (q - f_lo) / slope;
    }
  }
  return jam_;
}

double FundamentalDiagram::inverse_free_flow(double q) const {
  if (!(q >= 0.0 && q <= capacity_))
    throw std::domain_error("fundamental diagram: flow outside [0, capacity]");
  if (kind_ == Kind::Triangular) {
    return q / free_flow_speed_;
  }
  if (q == capacity_) return critical_;
  for (std::size_t k = 0; k + 1 < points_.size(); ++k) {
    const Breakpoint& lo = points_[k];
    const Breakpoint& hi = points_[k + 1];
    if (lo.density >= critical_) break;
    double d_hi = std::min(hi.density, critical_);
    double f_hi = hi.density > critical_ ? capacity_ : hi.flow;
    if (q >= lo.flow && q <= f_hi) {
      double slope = (f_hi - lo.flow) / (d_hi - lo.density);
      return lo.density + (q - lo.flow) / slope;
    }
  }
  return critical_;
}

FundamentalDiagram::SlopeConditions FundamentalDiagram::check_slope_conditions(double eps) const {
  SlopeConditions rep;
  rep.linear_prefix_extent = points_[1].density;
  rep.linear_near_zero = rep.linear_prefix_extent >= eps;
  rep.min_abs_slope = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < points_.size(); ++k) {
    double slope = (points_[k + 1].flow - points_[k].flow) /
                   (points_[k + 1].density - points_[k].density);
    rep.min_abs_slope = std::min(rep.min_abs_slope, std::fabs(slope));
  }
  rep.slopes_bounded = rep.min_abs_slope >= eps;
  return rep;
}

bool FundamentalDiagram::operator==(const FundamentalDiagram& other) const {
  if (kind_ != other.kind_ || points_.size() != other.points_.size()) return false;
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (points_[k].density != other.points_[k].density) return false;
    if (points_[k].flow != other.points_[k].flow) return false;
  }
  if (kind_ == Kind::Triangular) {
    return free_flow_speed_ == other.free_flow_speed_ &&
           backward_speed_ == other.backward_speed_ && jam_ == other.jam_;
  }
  return true;
}

double interface_flux(const FundamentalDiagram& fd, double rho_left, double rho_right) {
  return std::min(fd.demand(rho_left), fd.supply(rho_right));
}

}  // namespace dnl
