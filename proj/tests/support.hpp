#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "kdvinv/forward_solver.hpp"
#include "kdvinv/harness/config.hpp"
#include "kdvinv/mesh.hpp"

namespace kdvinv::testing {

inline constexpr double pi = std::numbers::pi;

inline std::string source_path(const std::string& rel) { return std::string(KDVINV_SOURCE_DIR) + "/" + rel; }

// u*(t,x) = a e^{-t} sin(pi x) on R = 1, T = 0.5 with b = 1; the source makes
// u* exact for the linear equation, or for g(u) = u^2/2 when `quadratic`.
struct Manufactured {
  double a = 1.0;
  bool quadratic = false;

  double u(double t, double x) const { return a * std::exp(-t) * std::sin(pi * x); }

  LinearProblem problem(int N, int M) const {
    const Grid g = make_grid(1.0, 0.5, N, M);
    LinearProblem p = LinearProblem::zero(g, 1.0);
    p.u0 = SpaceProfile::sample(g, [&](double x) { return u(0.0, x); });
    p.nu1 = TimeSeries::sample(g, [&](double t) { return -a * pi * std::exp(-t); });
    p.f0 = Field::sample(g, [&](double t, double x) {
      const double e = a * std::exp(-t);
      double f = e * (-std::sin(pi * x) + (pi - pi * pi * pi) * std::cos(pi * x));
      if (quadratic) f += e * e * pi * std::sin(pi * x) * std::cos(pi * x);
      return f;
    });
    return p;
  }

  double max_error(const Field& sol) const {
    const Field exact = Field::sample(sol.grid(), [&](double t, double x) { return u(t, x); });
    return (sol - exact).max_abs();
  }
};

inline harness::ScenarioConfig demo_config() { return harness::load_config(source_path("scenarios/demo.json")); }

}  // namespace kdvinv::testing
