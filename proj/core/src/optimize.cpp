#include "bgq/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace bgq {

Maximum golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                           double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
    // Bracket no longer shrinks in floating point.
    if (c <= a || d >= b || !(c < d)) break;
  }
  return fc >= fd ? Maximum{c, fc} : Maximum{d, fd};
}

Maximum maximize_unimodal(const std::function<double(double)>& f, double lo, double hi,
                          std::size_t scan_points, double tol) {
  if (!(lo < hi)) throw std::invalid_argument("maximize_unimodal needs lo < hi");
  if (scan_points < 3) throw std::invalid_argument("need at least three scan points");
  std::vector<double> xs(scan_points), vs(scan_points);
  const double width = hi - lo;
  for (std::size_t i = 0; i < scan_points; ++i) {
    xs[i] = lo + width * (static_cast<double>(i) + 0.5) / static_cast<double>(scan_points);
    vs[i] = f(xs[i]);
    if (std::isnan(vs[i])) throw std::runtime_error("objective is NaN on the scan grid");
  }
  for (std::size_t i = 1; i + 1 < scan_points; ++i) {
    const double slack = 1e-12 * std::max({1.0, std::abs(vs[i - 1]), std::abs(vs[i + 1])});
    if (vs[i] < vs[i - 1] - slack && vs[i] < vs[i + 1] - slack) {
      throw std::runtime_error("objective is not unimodal on the scan grid");
    }
  }
  const auto best = static_cast<std::size_t>(std::max_element(vs.begin(), vs.end()) - vs.begin());
  const double a = best == 0 ? lo : xs[best - 1];
  const double b = best + 1 == scan_points ? hi : xs[best + 1];
  auto refined = golden_section_max(f, a, b, tol);
  if (refined.value < vs[best]) refined = {xs[best], vs[best]};
  return refined;
}

}  // namespace bgq
