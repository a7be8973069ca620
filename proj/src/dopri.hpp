#pragma once
// Adaptive Dormand-Prince 5(4) stepping for small fixed-size systems.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

namespace infsep::detail {

template <int Dim>
struct Dopri {
  using Vec = Eigen::Matrix<double, Dim, 1>;
  double rtol = 1e-11;
  double atol = 1e-13;
  double hMin = 1e-15;
  long maxSteps = 200000;

  // Advances (t, y) toward tEnd. Stops early after the first accepted step at
  // which stop(t, y) holds. h carries the step size between calls.
  // Returns false when the step size underflows or the step budget runs out.
  template <typename Rhs, typename Stop>
  bool advance(const Rhs& f, double& t, Vec& y, double tEnd, double& h, const Stop& stop) const {
    const double dir = tEnd >= t ? 1.0 : -1.0;
    long steps = 0;
    while (dir * (tEnd - t) > 0) {
      if (++steps > maxSteps) return false;
      const bool clipped = std::abs(tEnd - t) < std::abs(h);
      double hs = clipped ? std::abs(tEnd - t) : std::abs(h);
      if (hs < hMin && std::abs(tEnd - t) > hMin) return false;
      const double hh = dir * hs;
      const Vec k1 = f(t, y);
      const Vec k2 = f(t + hh / 5, y + hh * (k1 / 5));
      const Vec k3 = f(t + 3 * hh / 10, y + hh * (3 * k1 / 40 + 9 * k2 / 40));
      const Vec k4 = f(t + 4 * hh / 5, y + hh * (44 * k1 / 45 - 56 * k2 / 15 + 32 * k3 / 9));
      const Vec k5 = f(t + 8 * hh / 9, y + hh * (19372 * k1 / 6561 - 25360 * k2 / 2187 + 64448 * k3 / 6561 -
                                                 212 * k4 / 729));
      const Vec k6 = f(t + hh, y + hh * (9017 * k1 / 3168 - 355 * k2 / 33 + 46732 * k3 / 5247 + 49 * k4 / 176 -
                                         5103 * k5 / 18656));
      const Vec y5 = y + hh * (35 * k1 / 384 + 500 * k3 / 1113 + 125 * k4 / 192 - 2187 * k5 / 6784 + 11 * k6 / 84);
      const Vec k7 = f(t + hh, y5);
      const Vec err = hh * (71 * k1 / 57600 - 71 * k3 / 16695 + 71 * k4 / 1920 - 17253 * k5 / 339200 +
                            22 * k6 / 525 - k7 / 40);
      double en = 0;
      for (int i = 0; i < Dim; ++i) {
        const double sc = atol + rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
        en = std::max(en, std::abs(err(i)) / sc);
      }
      if (!std::isfinite(en)) {
        h = hs / 4;
        continue;
      }
      const double fac = en == 0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      if (en <= 1) {
        t = clipped ? tEnd : t + hh;
        y = y5;
        // A clipped step says nothing about the attainable step size.
        h = clipped ? std::max(std::abs(h), hs * fac) : hs * fac;
        if (stop(t, y)) return true;
      } else {
        h = hs * fac;
      }
    }
    return true;
  }
};

}  // namespace infsep::detail
