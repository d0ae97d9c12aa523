#ifndef DNL_WAVEFRONT_HPP
#define DNL_WAVEFRONT_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dnl/fundamental_diagram.hpp"

namespace dnl::wft {

/// A traveling discontinuity: left/right states and the shock or contact
/// speed given by the flux chord. `shift` carries the first-order
/// perturbation bookkeeping used by the tangent-vector analysis.
struct Front {
  double position = 0.0;
  double speed = 0.0;
  double left = 0.0;
  double right = 0.0;
  int id = -1;
  double shift = 0.0;
};

/// Solve a Riemann problem for a piecewise-linear concave flux. An upward
/// jump is a single shock at the Rankine-Hugoniot speed; a downward jump
/// opens into one contact per flux breakpoint strictly between the states.
/// Fronts are returned left-to-right (increasing speed) at position 0.
std::vector<Front> solve_riemann_pwa(const FundamentalDiagram& fd, double rho_left,
                                     double rho_right);

/// Piecewise-constant profile: values[k] holds on (positions[k-1], positions[k]).
struct PiecewiseProfile {
  std::vector<double> positions;
  std::vector<double> values;  // size = positions.size() + 1

  double at(double x) const;
};

struct LinkScenario {
  FundamentalDiagram fd = FundamentalDiagram::triangular(1.0, 3.0, 0.5);
  PiecewiseProfile initial;
};

/// A shift attached to one initial jump (link index, jump index, magnitude);
/// the solver propagates it through collisions and junction interactions.
struct TrackedShift {
  int link = 0;
  int jump = 0;
  double shift = 0.0;
};

/// Scope: a single link on the whole line, or one diverge/merge junction at
/// x = 0 with constant turning ratios / priority. Incoming links occupy
/// x <= 0, outgoing links x >= 0.
struct Scenario {
  enum class Kind { SingleLink, Diverge, Merge };
  Kind kind = Kind::SingleLink;
  std::vector<LinkScenario> links;  // Diverge: up, out1, out2; Merge: in1, in2, down
  double ratio_out1 = 0.0, ratio_out2 = 0.0;
  double priority = 0.5;
  double horizon = 1.0;
  std::optional<TrackedShift> tracked;
  int max_events = 100000;
};

struct Event {
  enum class Kind { InitialResolve, Collision, JunctionInteraction, SimultaneousWarning };
  Kind kind;
  double time = 0.0;
  int link = -1;
  double position = 0.0;
};

class Solution {
 public:
  /// Full front configuration at one event time; the solution between
  /// consecutive checkpoints is linear advection of these fronts.
  struct Checkpoint {
    double time;
    std::vector<std::vector<Front>> fronts;  // per link
    std::vector<double> leftmost;            // per link: value left of all fronts
  };

  const std::vector<Event>& events() const { return events_; }
  double horizon() const { return horizon_; }
  int link_count() const { return static_cast<int>(checkpoints_.front().fronts.size()); }

  /// Exact density at (t, x) on a link (junction-side limits resolve to the
  /// interior value).
  double sample(int link, double t, double x) const;
  PiecewiseProfile profile(int link, double t) const;
  std::vector<Front> fronts(int link, double t) const;
  /// Exact integral of the profile over [x_lo, x_hi].
  double mass(int link, double t, double x_lo, double x_hi) const;
  /// Exact cell averages over n equal cells spanning [x_lo, x_hi].
  std::vector<double> cell_averages(int link, double t, double x_lo, double x_hi, int n) const;

 private:
  friend Solution run(const Scenario&);
  std::vector<Checkpoint> checkpoints_;
  std::vector<Event> events_;
  double horizon_ = 0.0;
};

/// Event-driven exact solution up to the horizon. Throws std::runtime_error
/// if the event-count cap is exceeded.
Solution run(const Scenario& scenario);

/// Exact L1 distance between two solutions on a link at time t over a window.
double l1_distance(const Solution& a, const Solution& b, int link, double t, double x_lo,
                   double x_hi);

/// Norm of a tangent vector: sum of |shift| * |jump| over the fronts.
double tangent_norm(const std::vector<Front>& fronts);

/// First-order shift produced on a recipient wave by a wave interacting with
/// a junction: shift_out * jump_out = (dq_out / dq_in) * shift_in * jump_in.
/// Empty when the interaction carries no flow change or makes no recipient.
std::optional<double> tangent_shift_across_junction(double dq_in, double shift_in,
                                                    double jump_in, double dq_out,
                                                    double jump_out);

/// Exact rational scalar for the multiplication-factor algebra.
struct Rational {
  long long num = 0;
  long long den = 1;

  static Rational of(long long n, long long d);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  bool operator==(const Rational&) const = default;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Matrix of tangent-norm multiplication factors for a diverge with constant
/// ratios: entry [i][j] scales a norm carried from incident link i to link j
/// (0 = upstream, 1/2 = the outgoing branches). Requires positive ratios.
std::array<std::array<double, 3>, 3> diverge_multiplication_matrix(double ratio_out1,
                                                                   double ratio_out2);
std::array<std::array<Rational, 3>, 3> diverge_multiplication_matrix(const Rational& ratio_out1,
                                                                     const Rational& ratio_out2);

}  // namespace dnl::wft

#endif  // DNL_WAVEFRONT_HPP
