#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace qgs::test {

// Sign changes of f on a uniform grid, each refined by bisection.
inline std::vector<double> sign_change_roots(const std::function<double(double)>& f, double lo, double hi,
                                             std::size_t n = 200000) {
  std::vector<double> roots;
  double a = lo, fa = f(a);
  for (std::size_t i = 1; i <= n; ++i) {
    const double b = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    const double fb = f(b);
    if (fa == 0) {
      roots.push_back(a);
    } else if (fa * fb < 0) {
      double x0 = a, x1 = b, f0 = fa;
      for (int it = 0; it < 200 && x1 - x0 > 1e-15 * (1 + std::abs(x1)); ++it) {
        const double m = 0.5 * (x0 + x1);
        const double fm = f(m);
        if (f0 * fm <= 0) {
          x1 = m;
        } else {
          x0 = m;
          f0 = fm;
        }
      }
      roots.push_back(0.5 * (x0 + x1));
    }
    a = b;
    fa = fb;
  }
  return roots;
}

// Dirichlet interval [0, L1 + L2] with potential 0 then V; continuity of φ and φ' at the step.
inline double interval_condition(double e, double l1, double l2, double v) {
  const double k1 = std::sqrt(e);
  if (e < v) {
    const double kappa = std::sqrt(v - e);
    return k1 * std::cos(k1 * l1) * std::tanh(kappa * l2) + kappa * std::sin(k1 * l1);
  }
  const double k2 = std::sqrt(e - v);
  return k1 * std::cos(k1 * l1) * std::sin(k2 * l2) + k2 * std::sin(k1 * l1) * std::cos(k2 * l2);
}

// Kirchhoff star; a leaf is Dirichlet when its coupling is empty, otherwise −φ'(L) = λ φ(L).
struct StarLeg {
  double length;
  double potential;
  std::optional<double> coupling;
};

inline double star_condition(double e, const std::vector<StarLeg>& legs) {
  std::vector<double> value, slope;
  for (const auto& leg : legs) {
    const double gap = e - leg.potential;
    double c, s_over_k, k_s;  // cos kL, sin kL / k, k sin kL (hyperbolic when evanescent)
    if (gap > 0) {
      const double k = std::sqrt(gap);
      c = std::cos(k * leg.length);
      s_over_k = std::sin(k * leg.length) / k;
      k_s = k * std::sin(k * leg.length);
    } else {
      const double kappa = std::sqrt(-gap);
      c = std::cosh(kappa * leg.length);
      s_over_k = std::sinh(kappa * leg.length) / kappa;
      k_s = -kappa * std::sinh(kappa * leg.length);
    }
    if (leg.coupling) {
      value.push_back(c + *leg.coupling * s_over_k);
      slope.push_back(k_s - *leg.coupling * c);
    } else {
      value.push_back(s_over_k);
      slope.push_back(-c);
    }
  }
  double total = 0;
  for (std::size_t i = 0; i < legs.size(); ++i) {
    double term = slope[i];
    for (std::size_t j = 0; j < legs.size(); ++j)
      if (j != i) term *= value[j];
    total += term;
  }
  return total;
}

}  // namespace qgs::test
