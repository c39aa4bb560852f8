#pragma once

// Internal 1-D root finding and derivative-free minimization helpers.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace ptsim::detail {

// Brent's method on [a, b]; f(a) and f(b) must bracket a root.
template <typename F>
double brent_root(F&& f, double a, double b, double tol = 1e-13, int max_iter = 200) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0) throw std::runtime_error("brent_root: endpoints do not bracket a root");
  if (std::abs(fa) < std::abs(fb)) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = a, fc = fa, d = b - a, s = b;
  bool mflag = true;
  for (int it = 0; it < max_iter; ++it) {
    if (fb == 0.0 || std::abs(b - a) < tol * (std::abs(b) + 1.0)) return b;
    if (fa != fc && fb != fc) {
      s = a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) +
          c * fa * fb / ((fc - fa) * (fc - fb));
    } else {
      s = b - fb * (b - a) / (fb - fa);
    }
    const double lo = (3.0 * a + b) / 4.0;
    const bool out_of_range = !((s > std::min(lo, b)) && (s < std::max(lo, b)));
    const double step_prev = mflag ? std::abs(b - c) : std::abs(c - d);
    if (out_of_range || std::abs(s - b) >= step_prev / 2.0) {
      s = (a + b) / 2.0;
      mflag = true;
    } else {
      mflag = false;
    }
    const double fs = f(s);
    d = c;
    c = b;
    fc = fb;
    if (fa * fs < 0.0) {
      b = s;
      fb = fs;
    } else {
      a = s;
      fa = fs;
    }
    if (std::abs(fa) < std::abs(fb)) {
      std::swap(a, b);
      std::swap(fa, fb);
    }
  }
  return b;
}

// Plain bisection for monotone sign predicates (robust against noisy f values
// as long as the sign is reliable).
template <typename Pred>
double bisect_predicate(Pred&& above, double lo, double hi, double tol, int max_iter = 200) {
  for (int it = 0; it < max_iter && (hi - lo) > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (above(mid))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

struct NelderMeadResult {
  std::array<double, 2> x;
  double fmin = 0.0;
  bool converged = false;
  int iterations = 0;
};

// 2-D Nelder-Mead with a relative f-spread stopping rule.
template <typename F>
NelderMeadResult nelder_mead_2d(F&& f, std::array<double, 2> x0, std::array<double, 2> scale,
                                double rel_tol = 1e-8, int max_iter = 500) {
  using Vec = std::array<double, 2>;
  struct Vertex {
    Vec x;
    double fx;
  };
  auto eval = [&](const Vec& x) { return f(x[0], x[1]); };
  std::array<Vertex, 3> s;
  s[0] = {x0, eval(x0)};
  s[1] = {{x0[0] + scale[0], x0[1]}, 0.0};
  s[1].fx = eval(s[1].x);
  s[2] = {{x0[0], x0[1] + scale[1]}, 0.0};
  s[2].fx = eval(s[2].x);

  NelderMeadResult out;
  int it = 0;
  for (; it < max_iter; ++it) {
    std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
    const double spread = std::abs(s[2].fx - s[0].fx);
    if (spread <= rel_tol * (std::abs(s[0].fx) + rel_tol)) {
      out.converged = true;
      break;
    }
    const Vec centroid{(s[0].x[0] + s[1].x[0]) / 2.0, (s[0].x[1] + s[1].x[1]) / 2.0};
    auto along = [&](double t) -> Vec {
      return {centroid[0] + t * (s[2].x[0] - centroid[0]),
              centroid[1] + t * (s[2].x[1] - centroid[1])};
    };
    const Vec xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < s[0].fx) {
      const Vec xe = along(-2.0);
      const double fe = eval(xe);
      s[2] = fe < fr ? Vertex{xe, fe} : Vertex{xr, fr};
    } else if (fr < s[1].fx) {
      s[2] = {xr, fr};
    } else {
      const Vec xc = along(0.5);
      const double fc = eval(xc);
      if (fc < s[2].fx) {
        s[2] = {xc, fc};
      } else {
        for (int i = 1; i < 3; ++i) {
          s[i].x = {(s[i].x[0] + s[0].x[0]) / 2.0, (s[i].x[1] + s[0].x[1]) / 2.0};
          s[i].fx = eval(s[i].x);
        }
      }
    }
  }
  std::sort(s.begin(), s.end(), [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
  out.x = s[0].x;
  out.fmin = s[0].fx;
  out.iterations = it;
  return out;
}

}  // namespace ptsim::detail
