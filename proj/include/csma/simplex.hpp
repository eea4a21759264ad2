#pragma once

#include <cstddef>
#include <vector>

namespace csma {

/// Dense linear program  max c.z  s.t.  A z <= b, z >= 0, with b >= 0 so the
/// slack basis is feasible. A is row-major, rows = b.size(), cols = c.size().
struct LinearProgram {
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<double> c;
};

enum class LpStatus { optimal, unbounded, iteration_limit };

struct LpSolution {
  LpStatus status = LpStatus::iteration_limit;
  double objective = 0.0;
  std::vector<double> z;
  std::size_t iterations = 0;
};

struct SimplexOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 100000;
};

/// Primal simplex on a dense tableau using Bland's rule (smallest eligible
/// index enters, smallest basic index leaves among ratio ties), which cannot
/// cycle.
LpSolution solve_simplex(const LinearProgram& lp, const SimplexOptions& options = {});

}  // namespace csma
