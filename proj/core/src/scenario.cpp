#include "kdvinv/scenario.hpp"

namespace kdvinv {

Scenario Scenario::zero(const Grid& grid, double b, int k) {
  Scenario s;
  s.grid = grid;
  s.b = b;
  s.k = k;
  s.u0 = SpaceProfile::zeros(grid);
  s.mu0 = TimeSeries::zeros(grid);
  s.nu0 = TimeSeries::zeros(grid);
  s.h0 = Field::zeros(grid);
  s.f1 = Field::zeros(grid);
  return s;
}

Field Scenario::known_source() const {
  Field f = h0;
  if (F && h) f += h->scaled_rows(*F);
  return f;
}

std::vector<SpaceProfile> Scenario::source_traces() const {
  Field f = known_source();
  if (f1.max_abs() > 0.0) f += diff_x(f1, 1);
  return source_traces_at_start(f, k);
}

CompatChain Scenario::chain() const { return phi_chain(u0, source_traces(), g, b, k); }

LinearProblem Scenario::linear_problem(const TimeSeries& flux, const Field& f0, const Field& f1_total) const {
  return LinearProblem{grid, b, u0, mu0, nu0, flux, f0, f1_total};
}

}  // namespace kdvinv
