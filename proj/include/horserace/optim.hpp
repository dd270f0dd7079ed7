#pragma once

#include <functional>
#include <span>
#include <vector>

namespace horserace {

struct BfgsOptions {
  int max_iterations = 500;
  /// Stop when the infinity norm of the gradient falls below this.
  double gradient_tolerance = 1e-8;
  /// Stop when an iteration improves the objective by less than this (relative).
  double function_tolerance = 1e-12;
  double finite_difference_step = 1e-5;
  /// Largest allowed step (infinity norm) in parameter space per iteration.
  double max_step = 1.0;
};

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes `objective` by BFGS with central-difference gradients and a
/// backtracking Armijo line search. Non-finite objective values are treated as
/// +infinity so the search backs away from them.
BfgsResult minimize_bfgs(const std::function<double(std::span<const double>)>& objective,
                         std::vector<double> start, const BfgsOptions& options = {});

}  // namespace horserace
