#ifndef DNL_FUNDAMENTAL_DIAGRAM_HPP
#define DNL_FUNDAMENTAL_DIAGRAM_HPP

#include <string>
#include <vector>

namespace dnl {

/// Concave flow-density relation with its demand/supply decomposition.
///
/// Two kinds are supported: the triangular (Newell-Daganzo) diagram, and a
/// general concave piecewise-linear diagram given by breakpoints. Flow
/// vanishes at zero and at jam density; the maximum C is attained at the
/// critical density. Demand (max sending flow) saturates at C above the
/// critical density, supply (max receiving flow) saturates at C below it.
class FundamentalDiagram {
 public:
  enum class Kind { Triangular, PiecewiseLinear };

  struct Breakpoint {
    double density;
    double flow;
  };

  /// Report on the slope conditions required for delay-operator continuity:
  /// the diagram must be linear near zero density and all slopes must be
  /// bounded away from zero in magnitude.
  struct SlopeConditions {
    bool linear_near_zero = false;  // f' constant on [0, eps]
    bool slopes_bounded = false;    // |slope| >= eps on every segment
    double min_abs_slope = 0.0;
    double linear_prefix_extent = 0.0;  // density up to which f is linear
    bool pass() const { return linear_near_zero && slopes_bounded; }
  };

  /// Triangular diagram from free-flow speed, jam density and the magnitude
  /// of the backward (congested-branch) wave speed.
  static FundamentalDiagram triangular(double free_flow_speed, double jam_density,
                                       double backward_wave_speed);

  /// Concave piecewise-linear diagram. Breakpoints must start at (0,0), end
  /// at (jam,0), have strictly increasing densities and strictly decreasing
  /// segment slopes.
  static FundamentalDiagram piecewise_linear(std::vector<Breakpoint> breakpoints);

  Kind kind() const { return kind_; }
  double jam_density() const { return jam_; }
  double critical_density() const { return critical_; }
  double capacity() const { return capacity_; }
  double free_flow_speed() const { return free_flow_speed_; }
  /// |f'(jam-)|, the fastest congested-branch wave on this link.
  double backward_wave_speed() const { return backward_speed_; }
  const std::vector<Breakpoint>& breakpoints() const { return points_; }

  /// f(rho). Throws std::domain_error outside [0, jam].
  double flow(double rho) const;
  /// Max sending flow of an upstream state: C above critical, f below.
  double demand(double rho) const;
  /// Max receiving flow of a downstream state: C below critical, f above.
  double supply(double rho) const;
  /// f(rho)/rho, continuously extended by the free-flow speed at rho = 0.
  double velocity(double rho) const;
  /// Unique congested-branch density with f(rho) = q (smallest such density
  /// if the congested branch has a flat top). q = 0 maps to jam density.
  double inverse_congested(double q) const;
  /// Free-flow-branch counterpart: density in [0, critical] with f(rho) = q.
  double inverse_free_flow(double q) const;

  SlopeConditions check_slope_conditions(double eps) const;

  bool operator==(const FundamentalDiagram& other) const;

 private:
  FundamentalDiagram() = default;

  Kind kind_ = Kind::Triangular;
  double jam_ = 0.0;
  double critical_ = 0.0;
  double capacity_ = 0.0;
  double free_flow_speed_ = 0.0;
  double backward_speed_ = 0.0;
  // Breakpoints are kept for both kinds; for Triangular they are the three
  // canonical points (0,0), (critical,C), (jam,0).
  std::vector<Breakpoint> points_;
};

/// Godunov interface flux between a sending cell (left) and a receiving
/// cell (right) that share the same fundamental diagram.
double interface_flux(const FundamentalDiagram& fd, double rho_left, double rho_right);

}  // namespace dnl

#endif  // DNL_FUNDAMENTAL_DIAGRAM_HPP
