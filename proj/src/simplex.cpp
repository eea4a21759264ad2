#include "csma/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace csma {

LpSolution solve_simplex(const LinearProgram& lp, const SimplexOptions& options) {
  const std::size_t m = lp.b.size(), n = lp.c.size();
  if (lp.A.size() != m) throw std::invalid_argument("LP: A/b row mismatch");
  for (double v : lp.b) {
    if (v < 0.0) throw std::invalid_argument("LP: right-hand side must be nonnegative");
  }

  // Columns 0..n-1 structural, n..n+m-1 slack, last column rhs.
  const std::size_t width = n + m + 1;
  std::vector<double> T(m * width, 0.0);
  auto at = [&](std::size_t r, std::size_t c) -> double& { return T[r * width + c]; };
  for (std::size_t r = 0; r < m; ++r) {
    if (lp.A[r].size() != n) throw std::invalid_argument("LP: ragged constraint matrix");
    for (std::size_t c = 0; c < n; ++c) at(r, c) = lp.A[r][c];
    at(r, n + r) = 1.0;
    at(r, width - 1) = lp.b[r];
  }
  // Reduced costs of the maximization; entering requires a positive entry.
  std::vector<double> cost(n + m, 0.0);
  for (std::size_t c = 0; c < n; ++c) cost[c] = lp.c[c];
  double objective = 0.0;
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) basis[r] = n + r;

  const double eps = options.tolerance;
  LpSolution sol;
  for (sol.iterations = 0; sol.iterations < options.max_iterations; ++sol.iterations) {
    std::size_t enter = n + m;
    for (std::size_t c = 0; c < n + m; ++c) {
      if (cost[c] > eps) {
        enter = c;
        break;
      }
    }
    if (enter == n + m) {
      sol.status = LpStatus::optimal;
      break;
    }
    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m; ++r) {
      const double a = at(r, enter);
      if (a <= eps) continue;
      const double ratio = at(r, width - 1) / a;
      if (ratio < best - eps || (std::abs(ratio - best) <= eps && basis[r] < basis[leave])) {
        best = ratio;
        leave = r;
      }
    }
    if (leave == m) {
      sol.status = LpStatus::unbounded;
      return sol;
    }

    const double piv = at(leave, enter);
    for (std::size_t c = 0; c < width; ++c) at(leave, c) /= piv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == leave) continue;
      const double f = at(r, enter);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < width; ++c) at(r, c) -= f * at(leave, c);
    }
    const double f = cost[enter];
    for (std::size_t c = 0; c < n + m; ++c) cost[c] -= f * at(leave, c);
    objective += f * at(leave, width - 1);
    basis[leave] = enter;
  }
  if (sol.status != LpStatus::optimal) return sol;

  sol.objective = objective;
  sol.z.assign(n, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    if (basis[r] < n) sol.z[basis[r]] = at(r, width - 1);
  }
  return sol;
}

}  // namespace csma
