#include "dnl/wavefront.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dnl/junction.hpp"

namespace dnl::wft {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStateTol = 1e-12;    // densities closer than this are one state
constexpr double kTimeTol = 1e-12;     // events closer than this are simultaneous
constexpr double kSpeedFloor = 1e-14;  // |speed| below this counts as stationary

double chord_speed(const FundamentalDiagram& fd, double a, double b) {
  return (fd.flow(b) - fd.flow(a)) / (b - a);
}

}  // namespace

std::vector<Front> solve_riemann_pwa(const FundamentalDiagram& fd, double rho_left,
                                     double rho_right) {
  std::vector<Front> out;
  if (std::fabs(rho_left - rho_right) <= kStateTol) return out;
  if (rho_left < rho_right) {
    Front f;
    f.left = rho_left;
    f.right = rho_right;
    f.speed = chord_speed(fd, rho_left, rho_right);
    out.push_back(f);
    return out;
  }
  // Downward jump: a fan of contacts, one per breakpoint strictly between.
  // Walking densities downward gives ascending speeds for a concave flux,
  // which is the left-to-right spatial order of the fan.
  std::vector<double> states;
  states.push_back(rho_left);
  for (auto it = fd.breakpoints().rbegin(); it != fd.breakpoints().rend(); ++it) {
    if (it->density < rho_left - kStateTol && it->density > rho_right + kStateTol)
      states.push_back(it->density);
  }
  states.push_back(rho_right);
  for (std::size_t k = 0; k + 1 < states.size(); ++k) {
    Front f;
    f.left = states[k];
    f.right = states[k + 1];
    f.speed = chord_speed(fd, states[k], states[k + 1]);
    out.push_back(f);
  }
  return out;
}

double PiecewiseProfile::at(double x) const {
  std::size_t k = 0;
  while (k < positions.size() && x >= positions[k]) ++k;
  return values[k];
}

namespace {

struct LinkState {
  const FundamentalDiagram* fd = nullptr;
  std::vector<Front> fronts;  // sorted left-to-right
  double leftmost = 0.0;      // value left of every front; fixed far field
  double rightmost = 0.0;
  bool incoming = false;  // junction at the right end (x = 0)
  bool outgoing = false;  // junction at the left end (x = 0)
};

struct Candidate {
  double time = kInf;
  bool junction = false;
  int link = -1;
  int index = -1;
};

struct Engine {
  const Scenario* sc = nullptr;
  std::vector<LinkState> links;
  double now = 0.0;
  int next_id = 0;
  int events_processed = 0;
  std::vector<Solution::Checkpoint> checkpoints;
  std::vector<Event> events;

  double junction_value(const LinkState& l) const {
    if (l.incoming) return l.fronts.empty() ? l.leftmost : l.fronts.back().right;
    return l.fronts.empty() ? l.rightmost : l.fronts.front().left;
  }

  void advance_to(double t) {
    for (auto& l : links)
      for (auto& f : l.fronts) f.position += f.speed * (t - now);
    now = t;
  }

  void insert_fronts(LinkState& l, std::vector<Front> batch, double position, double shift_dx,
                     double shift_dt) {
    for (auto& f : batch) {
      f.position = position;
      f.id = next_id++;
      f.shift = shift_dx - f.speed * shift_dt;
    }
    auto pos_less = [](const Front& a, const Front& b) {
      if (a.position != b.position) return a.position < b.position;
      return a.speed < b.speed;
    };
    for (auto& f : batch) {
      auto it = std::upper_bound(l.fronts.begin(), l.fronts.end(), f, pos_less);
      l.fronts.insert(it, f);
    }
  }

  void check_chain(const LinkState& l) const {
    double value = l.leftmost;
    for (const auto& f : l.fronts) {
      if (std::fabs(f.left - value) > 1e-9)
        throw std::runtime_error("wavefront: inconsistent state chain");
      value = f.right;
    }
    if (std::fabs(value - l.rightmost) > 1e-9)
      throw std::runtime_error("wavefront: inconsistent far state");
  }

  void emit(LinkState& l, double adjacent, double trace, double shift_dt) {
    if (std::fabs(trace - adjacent) <= kStateTol) return;
    std::vector<Front> batch;
    if (l.incoming) {
      batch = solve_riemann_pwa(*l.fd, adjacent, trace);
      for (const auto& f : batch)
        if (f.speed > 1e-9)
          throw std::runtime_error("wavefront: inadmissible wave entering an incoming link");
      l.rightmost = trace;
    } else {
      batch = solve_riemann_pwa(*l.fd, trace, adjacent);
      for (const auto& f : batch)
        if (f.speed < -1e-9)
          throw std::runtime_error("wavefront: inadmissible wave entering an outgoing link");
      l.leftmost = trace;
    }
    insert_fronts(l, std::move(batch), 0.0, 0.0, shift_dt);
  }

  // Re-solve the junction with the current adjacent states and emit the
  // waves realizing the new boundary traces.
  void resolve_junction(double shift_dt) {
    if (sc->kind == Scenario::Kind::Diverge) {
      double up = junction_value(links[0]);
      double o1 = junction_value(links[1]);
      double o2 = junction_value(links[2]);
      DivergeBoundary b =
          diverge_boundary_densities(*links[0].fd, up, *links[1].fd, o1, *links[2].fd, o2,
                                     sc->ratio_out1, sc->ratio_out2);
      emit(links[0], up, b.rho_up, shift_dt);
      emit(links[1], o1, b.rho_out1, shift_dt);
      emit(links[2], o2, b.rho_out2, shift_dt);
    } else if (sc->kind == Scenario::Kind::Merge) {
      double i1 = junction_value(links[0]);
      double i2 = junction_value(links[1]);
      double down = junction_value(links[2]);
      MergeBoundary b = merge_boundary_densities(*links[0].fd, i1, *links[1].fd, i2,
                                                 *links[2].fd, down, sc->priority);
      emit(links[0], i1, b.rho_in1, shift_dt);
      emit(links[1], i2, b.rho_in2, shift_dt);
      emit(links[2], down, b.rho_down, shift_dt);
    }
  }

  void checkpoint() {
    Solution::Checkpoint cp;
    cp.time = now;
    for (const auto& l : links) {
      cp.fronts.push_back(l.fronts);
      cp.leftmost.push_back(l.leftmost);
    }
    checkpoints.push_back(std::move(cp));
  }
};

}  // namespace

Solution run(const Scenario& sc) {
  int expected_links = sc.kind == Scenario::Kind::SingleLink ? 1 : 3;
  if (static_cast<int>(sc.links.size()) != expected_links)
    throw std::invalid_argument("wavefront: wrong number of links for the scenario kind");
  if (sc.kind == Scenario::Kind::Diverge &&
      std::fabs(sc.ratio_out1 + sc.ratio_out2 - 1.0) > 1e-9)
    throw std::invalid_argument("wavefront: turning ratios must sum to 1");

  Engine eng;
  eng.sc = &sc;
  eng.links.resize(sc.links.size());
  for (std::size_t k = 0; k < sc.links.size(); ++k) {
    LinkState& l = eng.links[k];
    l.fd = &sc.links[k].fd;
    if (sc.links[k].initial.values.size() != sc.links[k].initial.positions.size() + 1)
      throw std::invalid_argument("wavefront: malformed initial profile");
    l.leftmost = sc.links[k].initial.values.front();
    l.rightmost = sc.links[k].initial.values.back();
    if (sc.kind != Scenario::Kind::SingleLink) {
      bool incoming = (sc.kind == Scenario::Kind::Diverge) ? k == 0 : k <= 1;
      l.incoming = incoming;
      l.outgoing = !incoming;
    }
  }

  // Resolve the initial jumps into admissible waves, then the junction.
  for (std::size_t k = 0; k < sc.links.size(); ++k) {
    const PiecewiseProfile& init = sc.links[k].initial;
    for (std::size_t j = 0; j < init.positions.size(); ++j) {
      auto batch = solve_riemann_pwa(sc.links[k].fd, init.values[j], init.values[j + 1]);
      double shift = 0.0;
      if (sc.tracked && sc.tracked->link == static_cast<int>(k) &&
          sc.tracked->jump == static_cast<int>(j))
        shift = sc.tracked->shift;
      eng.insert_fronts(eng.links[k], std::move(batch), init.positions[j], shift, 0.0);
      eng.events.push_back(
          {Event::Kind::InitialResolve, 0.0, static_cast<int>(k), init.positions[j]});
    }
  }
  if (sc.kind != Scenario::Kind::SingleLink) {
    eng.resolve_junction(0.0);
    eng.events.push_back({Event::Kind::InitialResolve, 0.0, -1, 0.0});
  }
  for (const auto& l : eng.links) eng.check_chain(l);
  eng.checkpoint();

  while (true) {
    // Gather the next collision and junction-arrival candidates.
    std::vector<Candidate> cands;
    for (std::size_t k = 0; k < eng.links.size(); ++k) {
      const LinkState& l = eng.links[k];
      for (std::size_t i = 0; i + 1 < l.fronts.size(); ++i) {
        const Front& a = l.fronts[i];
        const Front& b = l.fronts[i + 1];
        if (a.speed <= b.speed) continue;
        Candidate c;
        c.time = eng.now + (b.position - a.position) / (a.speed - b.speed);
        c.junction = false;
        c.link = static_cast<int>(k);
        c.index = static_cast<int>(i);
        cands.push_back(c);
      }
      if (!l.incoming && !l.outgoing) continue;
      for (std::size_t i = 0; i < l.fronts.size(); ++i) {
        const Front& f = l.fronts[i];
        bool toward = l.incoming ? f.speed > kSpeedFloor : f.speed < -kSpeedFloor;
        if (!toward) continue;
        Candidate c;
        c.time = eng.now + (0.0 - f.position) / f.speed;
        if (c.time < eng.now) c.time = eng.now;
        c.junction = true;
        c.link = static_cast<int>(k);
        c.index = static_cast<int>(i);
        cands.push_back(c);
      }
    }
    if (cands.empty()) break;
    // Deterministic order: time, then collisions before junction arrivals,
    // then link index (serializing simultaneous junction hits by link).
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (std::fabs(a.time - b.time) > kTimeTol) return a.time < b.time;
      if (a.junction != b.junction) return !a.junction;
      if (a.link != b.link) return a.link < b.link;
      return a.index < b.index;
    });
    const Candidate best = cands.front();
    if (best.time > sc.horizon) break;
    if (++eng.events_processed > sc.max_events)
      throw std::runtime_error("wavefront: event cap exceeded (suspected non-termination)");

    int simultaneous_junction_hits = 0;
    for (const auto& c : cands)
      if (c.junction && std::fabs(c.time - best.time) <= kTimeTol) ++simultaneous_junction_hits;

    eng.advance_to(std::max(best.time, eng.now));
    LinkState& l = eng.links[best.link];

    if (!best.junction) {
      Front a = l.fronts[best.index];
      Front b = l.fronts[best.index + 1];
      l.fronts.erase(l.fronts.begin() + best.index, l.fronts.begin() + best.index + 2);
      double x_star = 0.5 * (a.position + b.position);  // equal up to roundoff
      // First-order shift of the collision point induced by the fronts' shifts.
      double dt_shift = (b.shift - a.shift) / (a.speed - b.speed);
      double dx_shift = a.shift + a.speed * dt_shift;
      auto batch = solve_riemann_pwa(*l.fd, a.left, b.right);
      eng.insert_fronts(l, std::move(batch), x_star, dx_shift, dt_shift);
      eng.events.push_back({Event::Kind::Collision, eng.now, best.link, x_star});
    } else {
      if (simultaneous_junction_hits > 1)
        eng.events.push_back({Event::Kind::SimultaneousWarning, eng.now, best.link, 0.0});
      Front f = l.fronts[best.index];
      l.fronts.erase(l.fronts.begin() + best.index);
      if (l.incoming) l.rightmost = f.left;
      else l.leftmost = f.right;
      double dt_shift = f.speed != 0.0 ? -f.shift / f.speed : 0.0;
      eng.resolve_junction(dt_shift);
      eng.events.push_back(
          {Event::Kind::JunctionInteraction, eng.now, best.link, f.position});
    }
    for (const auto& lk : eng.links) eng.check_chain(lk);
    eng.checkpoint();
  }

  Solution sol;
  sol.checkpoints_ = std::move(eng.checkpoints);
  sol.events_ = std::move(eng.events);
  sol.horizon_ = sc.horizon;
  return sol;
}

std::vector<Front> Solution::fronts(int link, double t) const {
  const Checkpoint* cp = &checkpoints_.front();
  for (const auto& c : checkpoints_)
    if (c.time <= t + kTimeTol) cp = &c;
  std::vector<Front> out = cp->fronts[link];
  for (auto& f : out) f.position += f.speed * (t - cp->time);
  return out;
}

PiecewiseProfile Solution::profile(int link, double t) const {
  const Checkpoint* cp = &checkpoints_.front();
  for (const auto& c : checkpoints_)
    if (c.time <= t + kTimeTol) cp = &c;
  PiecewiseProfile p;
  p.values.push_back(cp->leftmost[link]);
  for (const auto& f : cp->fronts[link]) {
    p.positions.push_back(f.position + f.speed * (t - cp->time));
    p.values.push_back(f.right);
  }
  return p;
}

double Solution::sample(int link, double t, double x) const { return profile(link, t).at(x); }

double Solution::mass(int link, double t, double x_lo, double x_hi) const {
  PiecewiseProfile p = profile(link, t);
  double acc = 0.0, lo = x_lo;
  std::size_t j = 0;
  while (j < p.positions.size() && p.positions[j] <= lo) ++j;
  for (; j < p.positions.size() && p.positions[j] < x_hi; ++j) {
    acc += (p.positions[j] - lo) * p.values[j];
    lo = p.positions[j];
  }
  acc += (x_hi - lo) * p.values[j];
  return acc;
}

std::vector<double> Solution::cell_averages(int link, double t, double x_lo, double x_hi,
                                            int n) const {
  std::vector<double> out(n, 0.0);
  double dx = (x_hi - x_lo) / n;
  for (int c = 0; c < n; ++c)
    out[c] = mass(link, t, x_lo + c * dx, x_lo + (c + 1) * dx) / dx;
  return out;
}

double l1_distance(const Solution& a, const Solution& b, int link, double t, double x_lo,
                   double x_hi) {
  PiecewiseProfile pa = a.profile(link, t);
  PiecewiseProfile pb = b.profile(link, t);
  std::vector<double> cuts{x_lo, x_hi};
  for (double x : pa.positions)
    if (x > x_lo && x < x_hi) cuts.push_back(x);
  for (double x : pb.positions)
    if (x > x_lo && x < x_hi) cuts.push_back(x);
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    acc += (cuts[k + 1] - cuts[k]) * std::fabs(pa.at(mid) - pb.at(mid));
  }
  return acc;
}

double tangent_norm(const std::vector<Front>& fronts) {
  double acc = 0.0;
  for (const auto& f : fronts) acc += std::fabs(f.shift) * std::fabs(f.right - f.left);
  return acc;
}

std::optional<double> tangent_shift_across_junction(double dq_in, double shift_in,
                                                    double jump_in, double dq_out,
                                                    double jump_out) {
  if (dq_in == 0.0 || jump_out == 0.0) return std::nullopt;
  return (dq_out / dq_in) * shift_in * jump_in / jump_out;
}

Rational Rational::of(long long n, long long d) {
  if (d == 0) throw std::domain_error("rational: zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  long long g = std::gcd(n < 0 ? -n : n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  return Rational{n, d};
}

Rational operator*(const Rational& a, const Rational& b) {
  return Rational::of(a.num * b.num, a.den * b.den);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num == 0) throw std::domain_error("rational: division by zero");
  return Rational::of(a.num * b.den, a.den * b.num);
}

std::array<std::array<double, 3>, 3> diverge_multiplication_matrix(double r1, double r2) {
  if (!(r1 > 0.0 && r2 > 0.0))
    throw std::domain_error("multiplication matrix: ratios must be positive");
  return {{{1.0, r1, r2}, {1.0 / r1, 1.0, r2 / r1}, {1.0 / r2, r1 / r2, 1.0}}};
}

std::array<std::array<Rational, 3>, 3> diverge_multiplication_matrix(const Rational& r1,
                                                                     const Rational& r2) {
  if (!(r1.num > 0 && r2.num > 0))
    throw std::domain_error("multiplication matrix: ratios must be positive");
  Rational one{1, 1};
  return {{{one, r1, r2}, {one / r1, one, r2 / r1}, {one / r2, r1 / r2, one}}};
}

}  // namespace dnl::wft
