#include "lor/optimizer.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace lor {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::GradientTolerance: return "gradient_tolerance";
    case Termination::StepTolerance: return "step_tolerance";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::LineSearchFailure: return "line_search_failure";
  }
  return "unknown";
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Minimiser of the cubic interpolating (a, fa, da) and (b, fb, db), kept
// inside the bracket; falls back to bisection.
double cubic_step(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  const double lo = std::min(a, b), hi = std::max(a, b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double t = b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
    const double margin = 0.1 * (hi - lo);
    if (std::isfinite(t) && t > lo + margin && t < hi - margin) return t;
  }
  return 0.5 * (a + b);
}

struct Point {
  double step, value, slope;
  std::vector<double> x, grad;
};

}  // namespace

OptimizationTrace minimize_lbfgs(const ObjectiveFunction& f, std::vector<double>& x,
                                 const OptimizerOptions& opt) {
  OptimizationTrace trace;
  std::vector<double> g;
  double fx = f(x, g);
  ++trace.evaluations;
  trace.entries.push_back({x, fx, norm(g), 0.0});

  std::deque<std::pair<std::vector<double>, std::vector<double>>> history;  // (s, y)
  const std::size_t n = x.size();

  for (int iter = 0;; ++iter) {
    if (norm(g) < opt.grad_tolerance * (1.0 + std::abs(fx))) {
      trace.reason = Termination::GradientTolerance;
      return trace;
    }
    if (iter >= opt.max_iterations) {
      trace.reason = Termination::MaxIterations;
      return trace;
    }

    // Two-loop recursion for d = -H g.
    std::vector<double> d(g);
    std::vector<double> alpha(history.size());
    for (std::size_t k = history.size(); k-- > 0;) {
      const auto& [s, y] = history[k];
      alpha[k] = dot(s, d) / dot(y, s);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * y[i];
    }
    if (!history.empty()) {
      const auto& [s, y] = history.back();
      const double gamma = dot(s, y) / dot(y, y);
      for (double& v : d) v *= gamma;
    }
    for (std::size_t k = 0; k < history.size(); ++k) {
      const auto& [s, y] = history[k];
      const double beta = dot(y, d) / dot(y, s);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * s[i];
    }
    for (double& v : d) v = -v;
    double slope0 = dot(g, d);
    if (!(slope0 < 0.0)) {
      // Not a descent direction; restart from steepest descent.
      history.clear();
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope0 = dot(g, d);
    }

    auto probe = [&](double step) {
      Point p;
      p.step = step;
      p.x.resize(n);
      for (std::size_t i = 0; i < n; ++i) p.x[i] = x[i] + step * d[i];
      p.value = f(p.x, p.grad);
      ++trace.evaluations;
      p.slope = dot(p.grad, d);
      return p;
    };

    // Strong Wolfe line search (bracketing, then zoom).
    const double step0 = history.empty() ? std::min(1.0, opt.initial_step / norm(d)) : 1.0;
    Point prev{0.0, fx, slope0, x, g};
    Point accepted;
    bool found = false;
    double step = step0;
    auto zoom = [&](Point lo, Point hi, int budget) {
      for (int k = 0; k < budget; ++k) {
        const double t = cubic_step(lo.step, lo.value, lo.slope, hi.step, hi.value, hi.slope);
        Point p = probe(t);
        if (p.value > fx + opt.c1 * t * slope0 || p.value >= lo.value) {
          hi = std::move(p);
        } else {
          if (std::abs(p.slope) <= -opt.c2 * slope0) {
            accepted = std::move(p);
            return true;
          }
          if (p.slope * (hi.step - lo.step) >= 0.0) hi = lo;
          lo = std::move(p);
        }
        if (std::abs(hi.step - lo.step) * norm(d) < 1e-14) break;
      }
      // Fall back to the best sufficient-decrease point seen.
      if (lo.step > 0.0 && lo.value < fx) {
        accepted = std::move(lo);
        return true;
      }
      return false;
    };
    for (int k = 0; k < opt.max_line_search; ++k) {
      Point p = probe(step);
      if (!std::isfinite(p.value)) {
        step = 0.5 * (prev.step + step);
        continue;
      }
      if (p.value > fx + opt.c1 * step * slope0 || (k > 0 && p.value >= prev.value)) {
        found = zoom(std::move(prev), std::move(p), opt.max_line_search);
        break;
      }
      if (std::abs(p.slope) <= -opt.c2 * slope0) {
        accepted = std::move(p);
        found = true;
        break;
      }
      if (p.slope >= 0.0) {
        found = zoom(std::move(p), std::move(prev), opt.max_line_search);
        break;
      }
      prev = std::move(p);
      step *= 2.0;
    }
    if (!found) {
      trace.reason = Termination::LineSearchFailure;
      return trace;
    }

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = accepted.x[i] - x[i];
      y[i] = accepted.grad[i] - g[i];
    }
    const double step_len = norm(s);
    x = accepted.x;
    g = accepted.grad;
    fx = accepted.value;
    trace.entries.push_back({x, fx, norm(g), step_len});
    if (dot(s, y) > 1e-12 * dot(y, y)) {
      history.emplace_back(std::move(s), std::move(y));
      if (history.size() > static_cast<std::size_t>(opt.memory)) history.pop_front();
    }
    if (step_len < opt.step_tolerance) {
      trace.reason = Termination::StepTolerance;
      return trace;
    }
  }
}

}  // namespace lor
