#pragma once

#include <optional>
#include <vector>

#include "kdvinv/forward_solver.hpp"
#include "kdvinv/mesh.hpp"
#include "kdvinv/observation.hpp"
#include "kdvinv/scenario.hpp"

namespace kdvinv {

struct InnerOptions {
  // Rate of the weight e^{-gamma t} in the stopping metric; <= 0 selects 64/T.
  double gamma = 0.0;
  // Relative distance of successive iterates at which the iteration stops.
  double tol = 1e-10;
  int max_iter = 1000;
  double delta_floor = 1e-8;

  double resolved_gamma(const Grid& g) const { return gamma > 0.0 ? gamma : 64.0 / g.T; }
};

// Fixed point of one of the linear A-maps. Controls that a problem does not
// reconstruct are returned as zero series.
struct InnerResult {
  TimeSeries F;
  TimeSeries nu;
  int iterations = 0;
  // Weighted distance of successive iterates, in iteration order.
  std::vector<double> residuals;
  double gamma = 0.0;
};

// (F, nu) with int u omega_j = phi_j, j = 1,2, for u solving the linear
// problem with zero initial/Dirichlet data, flux nu and source F h.
// phi1t, phi2t must vanish at t = 0.
InnerResult gamma1(const TimeSeries& phi1t, const TimeSeries& phi2t, const Weight& w1, const Weight& w2, const Field& h,
                   double b, const InnerOptions& opts = {});
// F with int u omega_0 = phi_0 for zero boundary data and source F h.
InnerResult gamma2(const TimeSeries& phi0t, const Weight& w0, const Field& h, double b, const InnerOptions& opts = {});
// nu with int u omega_0 = phi_0 for zero source and flux nu.
InnerResult gamma3(const TimeSeries& phi0t, const Weight& w0, const Grid& grid, double b,
                   const InnerOptions& opts = {});

struct InverseOptions {
  // Relative X^0 distance of successive outer iterates.
  double tol = 1e-8;
  int max_outer = 50;
  InnerOptions inner;
  PreconditionOptions precondition;
};

struct InverseResult {
  std::optional<TimeSeries> F;
  std::optional<TimeSeries> nu1;
  Field u;
  std::vector<int> inner_iters;
  std::vector<double> outer_residuals;
  // Inner residuals of the last outer step.
  std::vector<double> inner_residuals;
  PreconditionReport precond;
  double contraction_gamma = 0.0;
  bool converged = false;
  // max_t |int u omega_j - phi_j| over the measurements used.
  double measurement_residual = 0.0;
  // max_m |nu1^(m)(0) - Phi'_m(R)|, problems 1 and 3.
  double trace_residual = 0.0;
};

InverseResult solve_inverse1(const Scenario& s, const InverseOptions& opts = {});
InverseResult solve_inverse2(const Scenario& s, const InverseOptions& opts = {});
InverseResult solve_inverse3(const Scenario& s, const InverseOptions& opts = {});
InverseResult solve_inverse(ProblemKind problem, const Scenario& s, const InverseOptions& opts = {});

struct ProbeRow {
  double gamma = 0.0;
  double factor = 0.0;
};

// Empirical contraction factor of the A-map of the given problem in the
// weighted norm: two applications of the map to a start and to the start
// moved by epsilon, factor = (|A^2 a - A^2 b| / |a - b|)^(1/2).
std::vector<ProbeRow> contraction_probe(ProblemKind problem, const Scenario& s, const std::vector<double>& gammas,
                                        double epsilon = 1e-3);

}  // namespace kdvinv
