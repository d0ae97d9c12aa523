#ifndef DNL_TESTS_ORACLES_HPP
#define DNL_TESTS_ORACLES_HPP

#include <cmath>
#include <limits>

// Brute-force references for the merge solver, independent of the closed
// form under test: maximize the total flow, then among near-maximizers pick
// the point closest to the right-of-way ray (1-p) * f1 = p * f2.

namespace oracles {

struct MergePoint {
  double f1 = 0.0;
  double f2 = 0.0;
};

inline double distance_to_ray(double f1, double f2, double p) {
  // Ray through the origin with direction (p, 1-p); the projection parameter
  // is nonnegative for nonnegative flows, so no clamping is needed.
  double denom = p * p + (1.0 - p) * (1.0 - p);
  double t = (f1 * p + f2 * (1.0 - p)) / denom;
  double dx = f1 - t * p;
  double dy = f2 - t * (1.0 - p);
  return std::sqrt(dx * dx + dy * dy);
}

// Full two-dimensional grid scan of the feasible rectangle.
inline MergePoint merge_oracle_grid(double d4, double d5, double s6, double p, double step) {
  double best_sum = -1.0;
  double best_dist = std::numeric_limits<double>::infinity();
  MergePoint best;
  for (double f1 = 0.0; f1 <= d4 + 1e-15; f1 += step) {
    double f1c = std::min(f1, d4);
    for (double f2 = 0.0; f2 <= d5 + 1e-15; f2 += step) {
      double f2c = std::min(f2, d5);
      if (f1c + f2c > s6 + 1e-12) break;
      double sum = f1c + f2c;
      double dist = distance_to_ray(f1c, f2c, p);
      if (sum > best_sum + 1e-12 ||
          (std::fabs(sum - best_sum) <= 1e-12 && dist < best_dist - 1e-15)) {
        best_sum = sum;
        best_dist = dist;
        best = {f1c, f2c};
      }
    }
  }
  return best;
}

// Grid scan restricted to the sum-maximal frontier f2 = min(d5, s6 - f1):
// any feasible point below the frontier is dominated by one on it, so the
// frontier sweep explores every candidate maximizer.
inline MergePoint merge_oracle_frontier(double d4, double d5, double s6, double p,
                                        double step) {
  double f1_max = std::min(d4, s6);
  double best_sum = -1.0;
  double best_dist = std::numeric_limits<double>::infinity();
  MergePoint best;
  auto consider = [&](double f1) {
    if (f1 < 0.0) return;
    double f2 = std::min(d5, s6 - f1);
    if (f2 < 0.0) return;
    double sum = f1 + f2;
    double dist = distance_to_ray(f1, f2, p);
    if (sum > best_sum + 1e-12 ||
        (std::fabs(sum - best_sum) <= 1e-12 && dist < best_dist - 1e-15)) {
      best_sum = sum;
      best_dist = dist;
      best = {f1, f2};
    }
  };
  for (double f1 = 0.0; f1 <= f1_max + 1e-15; f1 += step) consider(std::min(f1, f1_max));
  consider(f1_max);
  return best;
}

}  // namespace oracles

#endif
