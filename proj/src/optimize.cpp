#include "premium_bandit/optimize.hpp"

#include <cmath>

namespace pbandit {

std::pair<double, double> grid_golden_max(
    const std::function<double(double)>& f, double lo, double hi, int grid_n,
    double tol) {
  if (!(hi > lo)) return {lo, f(lo)};
  if (grid_n < 2) grid_n = 2;
  const double span = hi - lo;
  double best_x = lo;
  double best_v = f(lo);
  int best_i = 0;
  for (int i = 1; i < grid_n; ++i) {
    const double x = lo + span * static_cast<double>(i) / (grid_n - 1);
    const double v = f(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
      best_i = i;
    }
  }
  double a = best_i == 0 ? lo : lo + span * (best_i - 1) / (grid_n - 1);
  double b = best_i == grid_n - 1 ? hi : lo + span * (best_i + 1) / (grid_n - 1);
  static const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fm = f(mid);
  if (fm > best_v || (fm == best_v && mid < best_x)) return {mid, fm};
  return {best_x, best_v};
}

}  // namespace pbandit
