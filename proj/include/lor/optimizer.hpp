#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lor {

struct OptimizerOptions {
  int max_iterations = 100;
  int memory = 10;
  double grad_tolerance = 1e-6;  // relative: |g| < tol * (1 + |f|)
  double step_tolerance = 1e-9;  // absolute parameter change
  double initial_step = 1.0;     // length of the first trial step
  double c1 = 1e-4;              // sufficient decrease
  double c2 = 0.9;               // curvature
  int max_line_search = 30;
};

enum class Termination { GradientTolerance, StepTolerance, MaxIterations, LineSearchFailure };

std::string to_string(Termination t);

struct TraceEntry {
  std::vector<double> params;
  double value = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;  // parameter-space length of the accepted step
};

struct OptimizationTrace {
  std::vector<TraceEntry> entries;  // entries[0] is the starting point
  Termination reason = Termination::MaxIterations;
  int evaluations = 0;
};

/// f(x, grad) returns the value and writes the gradient.
using ObjectiveFunction = std::function<double(std::span<const double>, std::vector<double>&)>;

/// Limited-memory BFGS with a line search satisfying the strong Wolfe
/// conditions. `x` holds the start on entry and the last accepted iterate on
/// return.
OptimizationTrace minimize_lbfgs(const ObjectiveFunction& f, std::vector<double>& x,
                                 const OptimizerOptions& options = {});

}  // namespace lor
