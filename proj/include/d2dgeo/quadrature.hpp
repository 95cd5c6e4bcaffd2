#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

#include "d2dgeo/errors.hpp"

namespace d2dgeo::detail {

struct Panel {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

// Adaptive GK31 on [a, b]. Boost 1.74 leaves the panel error in [-1,1] units,
// so hand it an interval already mapped there.
template <class F>
inline Panel gk_panel(F&& f, double a, double b, double rel_tol) {
  Panel p;
  if (!(b > a)) return p;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  auto mapped = [&](double x) { return half * f(mid + half * x); };
  p.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(mapped, -1.0, 1.0, 18, rel_tol, &p.error,
                                                                         &p.l1);
  return p;
}

template <class F>
inline double gk_integrate(F&& f, double a, double b, double rel_tol, const char* what) {
  const Panel p = gk_panel(f, a, b, rel_tol);
  if (!(p.error <= std::max(100.0 * rel_tol * p.l1, 1e-300)) || !std::isfinite(p.value)) {
    throw convergence_error(std::string(what) + ": quadrature did not converge", p.error);
  }
  return p.value;
}

}  // namespace d2dgeo::detail
