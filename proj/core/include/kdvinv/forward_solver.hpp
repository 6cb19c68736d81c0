#pragma once

#include <utility>
#include <vector>

#include "kdvinv/mesh.hpp"
#include "kdvinv/nonlinearity.hpp"

namespace kdvinv {

// Data of the linear problem
//   u_t + b u_x + u_xxx = f0 + (f1)_x  in (0,T) x (0,R),
//   u(0,x) = u0(x), u(t,0) = mu0(t), u(t,R) = nu0(t), u_x(t,R) = nu1(t).
struct LinearProblem {
  Grid grid;
  double b = 0.0;
  SpaceProfile u0;
  TimeSeries mu0;
  TimeSeries nu0;
  TimeSeries nu1;
  Field f0;
  Field f1;

  // All data zero on the given grid.
  static LinearProblem zero(const Grid& grid, double b);

  // Throws DomainError when shapes disagree or the zeroth-order corner
  // conditions mu0(0) = u0(0), nu0(0) = u0(R) fail (relative tolerance 1e-6).
  void validate() const;
};

struct SolveDiagnostics {
  double trace_error_left = 0.0;   // max_n |u(t_n,0) - mu0|
  double trace_error_right = 0.0;  // max_n |u(t_n,R) - nu0|
  double flux_error = 0.0;         // max_n |D_x u(t_n,R) - nu1|, one-sided stencil
  int step_count = 0;
  double linear_solve_residual = 0.0;
  int picard_iters = 0;
  std::vector<double> picard_residuals;
  bool converged = true;
};

struct Solution {
  Field u;
  SolveDiagnostics diagnostics;
};

// Crank-Nicolson in time, second-order stencils in space; three rows of each
// banded system carry the boundary conditions.
Solution solve_linear(const LinearProblem& p);

// Picard iteration v -> S(data, f1 - g(v)) until the X^0 distance of
// successive iterates drops below tol (absolute).
Solution solve_nonlinear(const LinearProblem& p, const Nonlinearity& g, double tol, int max_iter);

// Largest absolute residual of the weak integral identity over the test
// functions (T-t) x^2 sin(i pi x / R), i = 1..test_count.
double weak_residual(const Field& u, const LinearProblem& p, int test_count);

}  // namespace kdvinv
