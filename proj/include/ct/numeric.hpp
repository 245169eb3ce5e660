// Small numeric helpers shared across modules.
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ct {

// Neumaier compensated accumulator; deterministic for a fixed order.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = s_ + v;
    if (std::abs(s_) >= std::abs(v))
      c_ += (s_ - t) + v;
    else
      c_ += (v - t) + s_;
    s_ = t;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// Composite Simpson weights on a uniform grid with an even interval count.
inline std::vector<double> simpson_weights(std::size_t points, double dt) {
  if (points < 3 || points % 2 == 0)
    throw std::invalid_argument("simpson_weights: need an odd number of points (even interval count)");
  std::vector<double> w(points, 0.0);
  for (std::size_t i = 0; i + 2 < points; i += 2) {
    w[i] += dt / 3.0;
    w[i + 1] += 4.0 * dt / 3.0;
    w[i + 2] += dt / 3.0;
  }
  return w;
}

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) throw std::invalid_argument("loglog_slope: need positive samples");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace ct
