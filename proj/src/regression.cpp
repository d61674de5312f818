#include <algorithm>
#include <cmath>

#include "lojalab/numerics.hpp"

namespace lojalab {

LineFit linfit(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), "linfit: x and y lengths differ");
  require(x.size() >= 3, "linfit needs at least 3 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(std::isfinite(x[i]) && std::isfinite(y[i]), "linfit: non-finite sample");
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0.0, "linfit: x values are all equal");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double r2 = 1.0;
  if (syy > 0.0) {
    double ssres = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (intercept + slope * x[i]);
      ssres += r * r;
    }
    r2 = std::clamp(1.0 - ssres / syy, 0.0, 1.0);
  }
  return {slope, intercept, r2};
}

}  // namespace lojalab
