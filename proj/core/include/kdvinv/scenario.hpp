#pragma once

#include <optional>
#include <vector>

#include "kdvinv/forward_solver.hpp"
#include "kdvinv/mesh.hpp"
#include "kdvinv/nonlinearity.hpp"
#include "kdvinv/observation.hpp"

namespace kdvinv {

// Complete data of the forward problem and of the three inverse problems
//   u_t + b u_x + u_xxx + (g(u))_x = h0 + F(t) h + (f1)_x,
// with measurements int u omega_j dx = phi_j.
//
// Problem 1 recovers (F, nu1) from two measurements, problem 2 recovers F
// with nu1 given, problem 3 recovers nu1 with the full source in h0.
struct Scenario {
  Grid grid;
  double b = 0.0;
  int k = 1;
  Nonlinearity g = Nonlinearity::zero();
  SpaceProfile u0;
  TimeSeries mu0;
  TimeSeries nu0;
  std::optional<TimeSeries> nu1;
  Field h0;
  std::optional<Field> h;
  Field f1;
  // Known amplitude of h, used by the forward problem only.
  std::optional<TimeSeries> F;
  std::vector<Weight> weights;
  std::vector<TimeSeries> measurements;

  // Zero data on the grid with no weights.
  static Scenario zero(const Grid& grid, double b, int k = 1);

  // Known part of the source: h0 (+ F h when F is set).
  Field known_source() const;
  // Traces d_t^m (known_source + (f1)_x) at t = 0, m = 0..k-1.
  std::vector<SpaceProfile> source_traces() const;
  CompatChain chain() const;

  // Linear problem with the scenario's u0, mu0, nu0, the given flux
  // boundary value and sources.
  LinearProblem linear_problem(const TimeSeries& flux, const Field& f0, const Field& f1_total) const;
};

}  // namespace kdvinv
