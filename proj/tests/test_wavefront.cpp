#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "dnl/wavefront.hpp"
#include "support/fixtures.hpp"

using namespace dnl;
using namespace dnl::wft;

TEST_SUITE_BEGIN("wavefront");

TEST_CASE("riemann: upward jump is a single shock at the chord speed") {
  auto fd = fixtures::canonical_fd();
  auto fronts = solve_riemann_pwa(fd, 0.5, 2.0);
  REQUIRE(fronts.size() == 1);
  CHECK(fronts[0].speed == doctest::Approx(0.0).epsilon(1e-15));  // (0.5-0.5)/(2-0.5)
  CHECK(fronts[0].left == 0.5);
  CHECK(fronts[0].right == 2.0);
}

TEST_CASE("riemann: downward jump fans across the kink") {
  auto fd = fixtures::canonical_fd();
  auto fronts = solve_riemann_pwa(fd, 2.0, 0.5);
  REQUIRE(fronts.size() == 2);
  CHECK(fronts[0].left == 2.0);
  CHECK(fronts[0].right == 1.0);
  CHECK(fronts[0].speed == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(fronts[1].left == 1.0);
  CHECK(fronts[1].right == 0.5);
  CHECK(fronts[1].speed == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("riemann: equal states produce no fronts") {
  auto fd = fixtures::canonical_fd();
  CHECK(solve_riemann_pwa(fd, 1.7, 1.7).empty());
}

TEST_CASE("uniform initial state stays event-free") {
  Scenario sc;
  sc.kind = Scenario::Kind::SingleLink;
  sc.links.push_back({fixtures::canonical_fd(), {{}, {0.7}}});
  sc.horizon = 5.0;
  auto sol = run(sc);
  CHECK(sol.events().empty());
  CHECK(sol.sample(0, 4.0, -3.0) == 0.7);
  CHECK(sol.sample(0, 4.0, 3.0) == 0.7);
}

TEST_CASE("single-link mass is conserved exactly across interactions") {
  auto fd = fixtures::canonical_fd();
  Scenario sc;
  sc.kind = Scenario::Kind::SingleLink;
  sc.links.push_back({fd, {{-0.4, 0.3}, {0.4, 2.6, 0.9}}});
  sc.horizon = 2.0;  // the fan's slow edge catches the shock around t = 1.7
  auto sol = run(sc);
  CHECK(sol.events().size() >= 3);  // two initial resolutions plus a collision
  // Fronts stay inside (-4, 4) over the horizon; with constant far fields
  // the window mass changes only by the boundary fluxes.
  double m0 = sol.mass(0, 0.0, -4.0, 4.0);
  double m1 = sol.mass(0, 2.0, -4.0, 4.0);
  double boundary = (fd.flow(0.4) - fd.flow(0.9)) * 2.0;
  CHECK(m1 - m0 == doctest::Approx(boundary).epsilon(1e-10));
}

TEST_CASE("starved-branch diverge: zero share opens a fan pattern") {
  auto fd = fixtures::canonical_fd();
  double rho_up = fd.inverse_congested(0.8);
  Scenario sc;
  sc.kind = Scenario::Kind::Diverge;
  sc.links.push_back({fd, {{}, {rho_up}}});
  sc.links.push_back({fd, {{}, {fd.jam_density()}}});
  sc.links.push_back({fd, {{}, {fd.inverse_free_flow(0.8)}}});
  sc.ratio_out1 = 0.0;
  sc.ratio_out2 = 1.0;
  sc.horizon = 1.0;
  auto sol = run(sc);

  // Upstream: backward wave from the congested state down to critical.
  CHECK(sol.sample(0, 0.9, -0.1) == doctest::Approx(fd.critical_density()).epsilon(1e-12));
  CHECK(sol.sample(0, 0.9, -0.8) == doctest::Approx(rho_up).epsilon(1e-12));
  // Branch 1 stays jammed; branch 2 rises to capacity behind a forward wave.
  CHECK(sol.sample(1, 0.9, 0.2) == doctest::Approx(fd.jam_density()).epsilon(1e-12));
  CHECK(sol.sample(2, 0.9, 0.1) == doctest::Approx(fd.critical_density()).epsilon(1e-12));
  CHECK(sol.sample(2, 0.9, 0.95) ==
        doctest::Approx(fd.inverse_free_flow(0.8)).epsilon(1e-12));
}

TEST_CASE("overloaded merge: priority split with backward shocks upstream") {
  auto fd = fixtures::canonical_fd();
  double p = 0.4;
  Scenario sc;
  sc.kind = Scenario::Kind::Merge;
  sc.links.push_back({fd, {{}, {2.2}}});  // both approaches demand-heavy
  sc.links.push_back({fd, {{}, {2.4}}});
  sc.links.push_back({fd, {{}, {0.5}}});  // downstream free
  sc.priority = p;
  sc.horizon = 0.8;
  auto sol = run(sc);

  // Stationary boundary states carry the split fluxes p*C and (1-p)*C.
  double near1 = sol.sample(0, 0.75, -0.01);
  double near2 = sol.sample(1, 0.75, -0.01);
  CHECK(fd.flow(near1) == doctest::Approx(p * fd.capacity()).epsilon(1e-12));
  CHECK(fd.flow(near2) == doctest::Approx((1 - p) * fd.capacity()).epsilon(1e-12));
  CHECK(near1 > fd.critical_density());
  CHECK(near2 > fd.critical_density());
  // The adjustment waves moved backward into the approaches.
  CHECK(sol.sample(0, 0.75, -2.0) == 2.2);
  CHECK(sol.sample(1, 0.75, -2.0) == 2.4);
}

TEST_CASE("sampling before any front arrives returns the initial state") {
  auto fd = fixtures::canonical_fd();
  Scenario sc;
  sc.kind = Scenario::Kind::SingleLink;
  sc.links.push_back({fd, {{0.0}, {0.4, 1.9}}});
  sc.horizon = 1.0;
  auto sol = run(sc);
  CHECK(sol.sample(0, 0.5, -5.0) == 0.4);
  CHECK(sol.sample(0, 0.5, 5.0) == 1.9);
}

TEST_CASE("l1 distance: identity and shifted-shock geometry") {
  auto fd = fixtures::canonical_fd();
  auto make = [&](double jump_pos) {
    Scenario sc;
    sc.kind = Scenario::Kind::SingleLink;
    sc.links.push_back({fd, {{jump_pos}, {0.5, 2.0}}});
    sc.horizon = 1.0;
    return run(sc);
  };
  auto a = make(0.0);
  auto b = make(0.25);
  CHECK(l1_distance(a, a, 0, 0.8, -2.0, 2.0) == 0.0);
  // Zero-speed shock with jump 1.5 offset by 0.25.
  CHECK(l1_distance(a, b, 0, 0.8, -2.0, 2.0) == doctest::Approx(0.25 * 1.5).epsilon(1e-12));
}

TEST_CASE("tangent norm sums |shift| times |jump|") {
  std::vector<Front> fronts;
  CHECK(tangent_norm(fronts) == 0.0);
  fronts.push_back({0.0, 0.0, 0.0, 0.3, 0, 2.0});
  CHECK(tangent_norm(fronts) == doctest::Approx(0.6).epsilon(1e-15));
  fronts.push_back({0.0, 0.0, 0.7, 0.2, 1, -1.0});
  CHECK(tangent_norm(fronts) == doctest::Approx(0.6 + 0.5).epsilon(1e-15));
}

TEST_CASE("junction shift rule: factors one, arbitrary, and zero") {
  // Equal flow jumps pass the tangent contribution through unchanged.
  auto s = tangent_shift_across_junction(0.2, 1.0, 0.5, 0.2, 0.4);
  REQUIRE(s.has_value());
  CHECK(std::fabs(*s * 0.4) == doctest::Approx(1.0 * 0.5).epsilon(1e-12));
  // Zero source flow change produces no recipient.
  CHECK(!tangent_shift_across_junction(0.0, 1.0, 0.5, 0.1, 0.4).has_value());
  // Zero recipient jump cannot carry a shift.
  CHECK(!tangent_shift_across_junction(0.2, 1.0, 0.5, 0.0, 0.0).has_value());
}

TEST_CASE("multiplication-factor matrix entries and diagonal") {
  auto q = diverge_multiplication_matrix(0.25, 0.75);
  CHECK(q[0][1] == 0.25);
  CHECK(q[1][0] == 4.0);
  CHECK(q[2][1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  for (int i = 0; i < 3; ++i) CHECK(q[i][i] == 1.0);
  auto q5 = diverge_multiplication_matrix(0.5, 0.5);
  CHECK(q5[1][2] == 1.0);
  CHECK_THROWS_AS(diverge_multiplication_matrix(0.0, 1.0), std::domain_error);
}

TEST_CASE("multiplication-factor semigroup is exact over rationals") {
  for (int n = 1; n <= 9; ++n) {
    Rational r1 = Rational::of(n, 10);
    Rational r2 = Rational::of(10 - n, 10);
    auto q = diverge_multiplication_matrix(r1, r2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) CHECK(q[i][j] * q[j][k] == q[i][k]);
  }
}

TEST_CASE("tracked shift through a junction equals the measured displacement") {
  // The tracked run predicts d(position)/d(shift) per front; a second run
  // with the initial jump actually displaced measures it. The two must agree
  // (the dependence is piecewise linear in the displacement).
  auto fd = fixtures::canonical_fd();
  Scenario base;
  base.kind = Scenario::Kind::Diverge;
  base.links.push_back({fd, {{-0.5}, {0.9, 0.4}}});  // wave rides toward x = 0
  base.links.push_back({fd, {{}, {0.1}}});
  base.links.push_back({fd, {{}, {0.2}}});
  base.ratio_out1 = 0.3;
  base.ratio_out2 = 0.7;
  base.horizon = 1.2;
  base.tracked = TrackedShift{0, 0, 1.0};  // unit shift: fronts carry sensitivities
  auto sol_a = run(base);

  double ds = 1e-3;
  Scenario moved = base;
  moved.tracked.reset();
  moved.links[0].initial.positions[0] += ds;
  auto sol_b = run(moved);

  double t = 1.1;
  for (int link : {0, 1, 2}) {
    auto fa = sol_a.fronts(link, t);
    auto fb = sol_b.fronts(link, t);
    REQUIRE(fa.size() == fb.size());
    for (std::size_t k = 0; k < fa.size(); ++k) {
      double measured = fb[k].position - fa[k].position;
      CHECK(fa[k].shift * ds == doctest::Approx(measured).epsilon(1e-9));
    }
  }
}

TEST_CASE("tangent norms under constant ratios stay within the matrix bound") {
  auto fd = fixtures::canonical_fd();
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    double r1 = 0.2 + 0.6 * u(rng);
    Scenario sc;
    sc.kind = Scenario::Kind::Diverge;
    double up_far = 0.3 + 0.4 * u(rng);
    double up_near = 0.3 + 0.4 * u(rng);
    if (std::fabs(up_far - up_near) < 1e-3) continue;
    sc.links.push_back({fd, {{-0.4}, {up_far, up_near}}});
    sc.links.push_back({fd, {{}, {2.0 * u(rng)}}});
    sc.links.push_back({fd, {{}, {2.0 * u(rng)}}});
    sc.ratio_out1 = r1;
    sc.ratio_out2 = 1.0 - r1;
    sc.horizon = 1.0;
    sc.tracked = TrackedShift{0, 0, 1.0};
    auto sol = run(sc);
    auto q = diverge_multiplication_matrix(r1, 1.0 - r1);
    double bound = 0.0;
    for (auto& row : q)
      for (double v : row) bound = std::max(bound, v);
    double initial = std::fabs(1.0 * (up_near - up_far));
    double final_norm = 0.0;
    for (int link = 0; link < 3; ++link) final_norm += tangent_norm(sol.fronts(link, 1.0));
    CHECK(final_norm <= bound * initial * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("event cap aborts runaway scenarios") {
  auto fd = fixtures::canonical_fd();
  Scenario sc;
  sc.kind = Scenario::Kind::SingleLink;
  sc.links.push_back({fd, {{0.0, 0.1}, {0.5, 2.6, 0.9}}});
  sc.horizon = 10.0;
  sc.max_events = 0;
  CHECK_THROWS_AS(run(sc), std::runtime_error);
}

TEST_SUITE_END();
