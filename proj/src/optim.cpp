#include "horserace/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace horserace {

namespace {

double safe_eval(const std::function<double(std::span<const double>)>& f,
                 std::span<const double> x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

std::vector<double> gradient(const std::function<double(std::span<const double>)>& f,
                             std::vector<double>& x, double fx, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = safe_eval(f, x);
    x[i] = xi - h;
    const double fm = safe_eval(f, x);
    x[i] = xi;
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * h);
    } else if (std::isfinite(fp)) {
      g[i] = (fp - fx) / h;
    } else if (std::isfinite(fm)) {
      g[i] = (fx - fm) / h;
    } else {
      g[i] = 0.0;
    }
  }
  return g;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) {
    m = std::max(m, std::abs(e));
  }
  return m;
}

}  // namespace

BfgsResult minimize_bfgs(const std::function<double(std::span<const double>)>& objective,
                         std::vector<double> start, const BfgsOptions& options) {
  const std::size_t n = start.size();
  BfgsResult result;
  result.x = std::move(start);
  result.value = safe_eval(objective, result.x);
  if (n == 0) {
    result.converged = true;
    return result;
  }
  if (!std::isfinite(result.value)) {
    return result;
  }

  // Inverse Hessian approximation, row-major.
  std::vector<double> H(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    H[i * n + i] = 1.0;
  }
  auto g = gradient(objective, result.x, result.value, options.finite_difference_step);
  std::vector<double> direction(n);
  std::vector<double> trial(n);

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    if (inf_norm(g) < options.gradient_tolerance) {
      result.converged = true;
      return result;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        s -= H[i * n + j] * g[j];
      }
      direction[i] = s;
    }
    double slope = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      slope += direction[i] * g[i];
    }
    if (slope >= 0.0) {
      // Not a descent direction: restart from steepest descent.
      std::fill(H.begin(), H.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        H[i * n + i] = 1.0;
        direction[i] = -g[i];
      }
      slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        slope -= g[i] * g[i];
      }
    }
    const double dnorm = inf_norm(direction);
    double step = dnorm > options.max_step ? options.max_step / dnorm : 1.0;

    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < n; ++i) {
        trial[i] = result.x[i] + step * direction[i];
      }
      f_new = safe_eval(objective, trial);
      if (f_new <= result.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No further progress possible at finite-difference resolution.
      result.converged = true;
      return result;
    }

    const double f_old = result.value;
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = trial[i] - result.x[i];
    }
    result.x = trial;
    result.value = f_new;
    auto g_new = gradient(objective, result.x, result.value, options.finite_difference_step);

    if (f_old - f_new <= options.function_tolerance * (std::abs(f_old) + options.function_tolerance)) {
      g = std::move(g_new);
      result.converged = true;
      return result;
    }

    std::vector<double> y(n);
    double sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = g_new[i] - g[i];
      sy += s[i] * y[i];
    }
    if (sy > 1e-12) {
      std::vector<double> Hy(n, 0.0);
      double yHy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          Hy[i] += H[i * n + j] * y[j];
        }
        yHy += y[i] * Hy[i];
      }
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          H[i * n + j] += rho * ((1.0 + rho * yHy) * s[i] * s[j] - Hy[i] * s[j] - s[i] * Hy[j]);
        }
      }
    }
    g = std::move(g_new);
  }
  result.converged = inf_norm(g) < options.gradient_tolerance;
  return result;
}

}  // namespace horserace
