#include "kdvinv/inverse_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "kdvinv/calculus.hpp"

namespace kdvinv {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// The Crank-Nicolson solution satisfies q(t_{n+1}) - q(t_n) = dt/2 (r_n + r_{n+1})
// up to spatial error. Under that relation diff_t(q) equals this average of r,
// so subtracting the averaged interior term keeps the A-map consistent with
// the scheme instead of leaving an O(dt^2) mismatch where u varies quickly.
TimeSeries scheme_average(const TimeSeries& r) {
  const std::size_t m = r.size() - 1;
  TimeSeries out = r;
  out[0] = 0.75 * r[0] + 0.5 * r[1] - 0.25 * r[2];
  for (std::size_t n = 1; n < m; ++n) out[n] = 0.25 * r[n - 1] + 0.5 * r[n] + 0.25 * r[n + 1];
  out[m] = 0.75 * r[m] + 0.5 * r[m - 1] - 0.25 * r[m - 2];
  return out;
}

struct Controls {
  TimeSeries F;
  TimeSeries nu;
};

// The affine map (F, nu) -> (F, nu) whose fixed point solves a linear
// inverse problem: solve with the current controls, subtract the interior
// part of q' = r from the measured derivative and solve the remaining
// pointwise-in-time algebraic system for the controls.
class AMap {
public:
  AMap(ProblemKind kind, const Grid& grid, double b, std::vector<const Weight*> weights,
       std::vector<TimeSeries> reduced, const Field* h, double delta_floor)
      : kind_(kind), grid_(grid), b_(b), weights_(std::move(weights)), h_(h) {
    for (const TimeSeries& phi : reduced) {
      if (!(phi.grid() == grid_)) throw DomainError("measurement lives on a different grid");
      dphi_.push_back(diff_t(phi, 1));
    }
    for (const Weight* w : weights_) {
      if (!(w->profile.grid() == grid_)) throw DomainError("weight lives on a different grid");
      if (std::abs(w->b - b_) > 1e-14) throw DomainError("weight was built for a different b");
      if (h_) psi_.push_back(psi_of(*h_, *w));
    }
    switch (kind_) {
      case ProblemKind::two_measurements: {
        const TimeSeries d = delta_of(psi_[0], psi_[1], *weights_[0], *weights_[1]);
        const double m = min_abs_with_crossing(d);
        if (m < delta_floor) {
          throw NondegeneracyError(std::string(hypothesis::nondegeneracy) + ": min |Delta(t)| = " + fmt(m) +
                                   " is below " + fmt(delta_floor));
        }
        delta_ = d;
        break;
      }
      case ProblemKind::source_amplitude: {
        const double m = min_abs_with_crossing(psi_[0]);
        if (m < delta_floor) {
          throw NondegeneracyError(std::string(hypothesis::nondegeneracy) + ": min |psi_0(t)| = " + fmt(m) +
                                   " is below " + fmt(delta_floor));
        }
        break;
      }
      case ProblemKind::boundary_flux: {
        const double m = std::abs(weights_[0]->dprime_at_R);
        if (m < delta_floor) {
          throw NondegeneracyError(std::string(hypothesis::nondegeneracy) + ": |omega_0'(R)| = " + fmt(m) +
                                   " is below " + fmt(delta_floor));
        }
        break;
      }
      case ProblemKind::forward:
        throw DomainError("the forward problem has no inverse operator");
    }
  }

  Controls initial() const {
    std::vector<TimeSeries> zero(dphi_.size(), TimeSeries::zeros(grid_));
    return update(zero);
  }

  Controls apply(const Controls& c) const { return update(interior_terms(c)); }

  // Solution of the linear problem with zero data except the controls.
  Field solve(const Controls& c) const {
    LinearProblem p = LinearProblem::zero(grid_, b_);
    p.nu1 = c.nu;
    if (h_) p.f0 = h_->scaled_rows(c.F);
    return solve_linear(p).u;
  }

private:
  std::vector<TimeSeries> interior_terms(const Controls& c) const {
    const Field u = solve(c);
    std::vector<TimeSeries> out;
    for (const Weight* w : weights_) out.push_back(scheme_average(weighted_rows(u, w->combo)));
    return out;
  }

  Controls update(const std::vector<TimeSeries>& interior) const {
    Controls c{TimeSeries::zeros(grid_), TimeSeries::zeros(grid_)};
    const std::size_t n = grid_.time_points();
    switch (kind_) {
      case ProblemKind::two_measurements: {
        const double a1 = weights_[0]->dprime_at_R;
        const double a2 = weights_[1]->dprime_at_R;
        for (std::size_t i = 0; i < n; ++i) {
          const double z1 = dphi_[0][i] - interior[0][i];
          const double z2 = dphi_[1][i] - interior[1][i];
          c.F[i] = (z1 * a2 - z2 * a1) / delta_[i];
          c.nu[i] = (psi_[0][i] * z2 - psi_[1][i] * z1) / delta_[i];
        }
        break;
      }
      case ProblemKind::source_amplitude:
        for (std::size_t i = 0; i < n; ++i) c.F[i] = (dphi_[0][i] - interior[0][i]) / psi_[0][i];
        break;
      case ProblemKind::boundary_flux:
        for (std::size_t i = 0; i < n; ++i) c.nu[i] = (dphi_[0][i] - interior[0][i]) / weights_[0]->dprime_at_R;
        break;
      case ProblemKind::forward:
        break;
    }
    return c;
  }

  ProblemKind kind_;
  Grid grid_;
  double b_;
  std::vector<const Weight*> weights_;
  const Field* h_;
  std::vector<TimeSeries> dphi_;
  std::vector<TimeSeries> psi_;
  TimeSeries delta_;
};

double weighted(const Controls& c, double gamma) {
  return weighted_hk_norm(c.F, 0, gamma) + weighted_hk_norm(c.nu, 0, gamma);
}

double weighted_distance(const Controls& a, const Controls& b, double gamma) {
  return weighted(Controls{a.F - b.F, a.nu - b.nu}, gamma);
}

bool finite(const Controls& c) { return c.F.all_finite() && c.nu.all_finite(); }

InnerResult iterate(const AMap& A, const Grid& grid, const InnerOptions& opts, const Controls* start = nullptr) {
  if (!(opts.tol > 0.0)) throw DomainError("inner tolerance must be positive");
  if (opts.max_iter < 1) throw DomainError("inner iteration cap must be >= 1");
  const double gamma = opts.resolved_gamma(grid);
  const std::string hint = " (increase the weight rate gamma or reduce the horizon T)";
  const double eps = 16.0 * std::numeric_limits<double>::epsilon();
  InnerResult res;
  res.gamma = gamma;
  Controls x = start ? *start : A.initial();
  res.iterations = 1;
  if (!start && x.F.max_abs() == 0.0 && x.nu.max_abs() == 0.0) {
    res.F = std::move(x.F);
    res.nu = std::move(x.nu);
    return res;
  }
  while (true) {
    if (res.iterations >= opts.max_iter) {
      throw NoContraction("inner iteration did not reach tolerance " + fmt(opts.tol) + " in " +
                          std::to_string(opts.max_iter) + " iterations" + hint);
    }
    Controls y = A.apply(x);
    ++res.iterations;
    if (!finite(y)) throw NoContraction("inner iterate is not finite" + hint);
    const double d = weighted_distance(y, x, gamma);
    // The weight hides late times, so the plain distance must settle as well.
    const double d_plain = weighted_distance(y, x, 0.0);
    res.residuals.push_back(d);
    x = std::move(y);
    const double scale = weighted(x, gamma);
    const double scale_plain = weighted(x, 0.0);
    const bool weighted_done = d <= opts.tol * scale || d <= eps * scale;
    const bool plain_done = d_plain <= opts.tol * scale_plain || d_plain <= eps * scale_plain;
    if (weighted_done && plain_done) break;
    const auto& r = res.residuals;
    if (r.size() >= 6) {
      bool growing = true;
      for (std::size_t i = r.size() - 5; i < r.size(); ++i) growing = growing && r[i] > r[i - 1];
      if (growing && d > 1e3 * r.front()) throw NoContraction("inner residuals grow geometrically" + hint);
    }
  }
  res.F = std::move(x.F);
  res.nu = std::move(x.nu);
  return res;
}

}  // namespace

InnerResult gamma1(const TimeSeries& phi1t, const TimeSeries& phi2t, const Weight& w1, const Weight& w2, const Field& h,
                   double b, const InnerOptions& opts) {
  const AMap A(ProblemKind::two_measurements, h.grid(), b, {&w1, &w2}, {phi1t, phi2t}, &h, opts.delta_floor);
  return iterate(A, h.grid(), opts);
}

InnerResult gamma2(const TimeSeries& phi0t, const Weight& w0, const Field& h, double b, const InnerOptions& opts) {
  const AMap A(ProblemKind::source_amplitude, h.grid(), b, {&w0}, {phi0t}, &h, opts.delta_floor);
  return iterate(A, h.grid(), opts);
}

InnerResult gamma3(const TimeSeries& phi0t, const Weight& w0, const Grid& grid, double b, const InnerOptions& opts) {
  const AMap A(ProblemKind::boundary_flux, grid, b, {&w0}, {phi0t}, nullptr, opts.delta_floor);
  return iterate(A, grid, opts);
}

namespace {

std::size_t measurement_count(ProblemKind p) { return p == ProblemKind::two_measurements ? 2 : 1; }

void require_hard_preconditions(const PreconditionReport& rep) {
  if (rep.hard_ok()) return;
  const std::string& first = rep.failures.front();
  const auto colon = first.find(':');
  throw PreconditionError(first.substr(0, colon), colon == std::string::npos ? first : first.substr(colon + 2));
}

Field minus_g(const Field& f1, const Field& v, const Nonlinearity& g) {
  if (g.is_zero()) return f1;
  Field out = f1;
  const auto vv = v.values();
  auto ov = out.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] -= g(0, vv[i]);
  return out;
}

InnerResult run_inner(ProblemKind problem, const Scenario& s, const std::vector<TimeSeries>& reduced,
                      const InnerOptions& opts) {
  switch (problem) {
    case ProblemKind::two_measurements:
      return gamma1(reduced[0], reduced[1], s.weights[0], s.weights[1], *s.h, s.b, opts);
    case ProblemKind::source_amplitude:
      return gamma2(reduced[0], s.weights[0], *s.h, s.b, opts);
    case ProblemKind::boundary_flux:
      return gamma3(reduced[0], s.weights[0], s.grid, s.b, opts);
    case ProblemKind::forward:
      break;
  }
  throw DomainError("not an inverse problem");
}

}  // namespace

InverseResult solve_inverse(ProblemKind problem, const Scenario& s, const InverseOptions& opts) {
  if (problem == ProblemKind::forward) throw DomainError("solve_inverse needs an inverse problem id");
  if (!(opts.tol > 0.0)) throw DomainError("outer tolerance must be positive");
  if (opts.max_outer < 1) throw DomainError("outer iteration cap must be >= 1");

  InverseResult result;
  result.precond = check_preconditions(s, problem, opts.precondition);
  require_hard_preconditions(result.precond);
  InnerOptions inner = opts.inner;
  inner.delta_floor = opts.precondition.delta_floor;
  result.contraction_gamma = inner.resolved_gamma(s.grid);

  const Grid& grid = s.grid;
  const std::size_t count = measurement_count(problem);
  const bool flux_unknown = problem != ProblemKind::source_amplitude;
  const bool amplitude_unknown = problem != ProblemKind::boundary_flux;
  const CompatChain chain = s.chain();
  // Problems 1 and 2 treat h0 as the known part of the source; problem 3
  // takes the whole known source.
  const Field base_source = problem == ProblemKind::boundary_flux ? s.known_source() : s.h0;
  const TimeSeries flux_base = flux_unknown ? nu_star(chain, s.k, grid) : *s.nu1;

  const std::string smallness = " (smallness constant " + result.precond.smallness_kind + " = " +
                                fmt(result.precond.smallness_value) +
                                "; reduce the data amplitude or the horizon T)";

  Field v = Field::zeros(grid);
  Controls controls{TimeSeries::zeros(grid), TimeSeries::zeros(grid)};
  for (int it = 1; it <= opts.max_outer; ++it) {
    const Field f1 = minus_g(s.f1, v, s.g);
    Field w;
    Field u;
    try {
      w = solve_linear(s.linear_problem(flux_base, base_source, f1)).u;
      std::vector<TimeSeries> reduced;
      for (std::size_t j = 0; j < count; ++j) reduced.push_back(s.measurements[j] - q_of(w, s.weights[j]));
      InnerResult in = run_inner(problem, s, reduced, inner);
      result.inner_iters.push_back(in.iterations);
      result.inner_residuals = in.residuals;
      controls = Controls{std::move(in.F), std::move(in.nu)};
      Field source = base_source;
      if (amplitude_unknown) source += s.h->scaled_rows(controls.F);
      u = solve_linear(s.linear_problem(flux_base + controls.nu, source, f1)).u;
    } catch (const DivergedSolution& e) {
      throw NoContraction(std::string("outer iterate diverged: ") + e.what() + smallness);
    }
    if (s.g.is_zero()) {
      // v does not enter the map, so the first image is the fixed point.
      result.outer_residuals.push_back(0.0);
      result.u = std::move(u);
      result.converged = true;
      break;
    }
    const double scale = x0_norm(u);
    const double res = x0_norm(u - v) / std::max(scale, std::numeric_limits<double>::min());
    if (!std::isfinite(res)) throw NoContraction("outer residual is not finite" + smallness);
    result.outer_residuals.push_back(res);
    v = std::move(u);
    if (res < opts.tol || x0_norm(v) == 0.0) {
      result.converged = true;
      break;
    }
    const auto& r = result.outer_residuals;
    if (r.size() >= 4 && r[r.size() - 1] > r[r.size() - 2] && r[r.size() - 2] > r[r.size() - 3] &&
        r[r.size() - 3] > r[r.size() - 4] && res > 1.0) {
      throw NoContraction("outer residuals grow (" + fmt(res) + ")" + smallness);
    }
    if (it == opts.max_outer) {
      throw NoContraction("outer iteration did not converge in " + std::to_string(opts.max_outer) +
                          " steps (last relative residual " + fmt(res) + ")" + smallness);
    }
  }
  if (!result.converged) throw NoContraction("outer iteration did not converge" + smallness);
  if (result.u.values().empty()) result.u = std::move(v);

  if (amplitude_unknown) result.F = controls.F;
  if (flux_unknown) {
    result.nu1 = flux_base + controls.nu;
    for (int m = 0; m < s.k; ++m) {
      const double value = m == 0 ? (*result.nu1)[0] : diff_t(*result.nu1, m)[0];
      result.trace_residual =
          std::max(result.trace_residual, std::abs(value - derivative_at_right(chain.profiles[m], 1)));
    }
  }
  for (std::size_t j = 0; j < count; ++j) {
    result.measurement_residual =
        std::max(result.measurement_residual, (q_of(result.u, s.weights[j]) - s.measurements[j]).max_abs());
  }
  return result;
}

InverseResult solve_inverse1(const Scenario& s, const InverseOptions& opts) {
  return solve_inverse(ProblemKind::two_measurements, s, opts);
}

InverseResult solve_inverse2(const Scenario& s, const InverseOptions& opts) {
  return solve_inverse(ProblemKind::source_amplitude, s, opts);
}

InverseResult solve_inverse3(const Scenario& s, const InverseOptions& opts) {
  return solve_inverse(ProblemKind::boundary_flux, s, opts);
}

std::vector<ProbeRow> contraction_probe(ProblemKind problem, const Scenario& s, const std::vector<double>& gammas,
                                        double epsilon) {
  if (problem == ProblemKind::forward) throw DomainError("contraction_probe needs an inverse problem id");
  const Grid& grid = s.grid;
  const std::size_t count = measurement_count(problem);
  const CompatChain chain = s.chain();
  const Field base_source = problem == ProblemKind::boundary_flux ? s.known_source() : s.h0;
  const TimeSeries flux_base = problem != ProblemKind::source_amplitude ? nu_star(chain, s.k, grid) : *s.nu1;
  const Field w = solve_linear(s.linear_problem(flux_base, base_source, s.f1)).u;
  std::vector<const Weight*> weights;
  std::vector<TimeSeries> reduced;
  for (std::size_t j = 0; j < count; ++j) {
    weights.push_back(&s.weights[j]);
    reduced.push_back(s.measurements[j] - q_of(w, s.weights[j]));
  }
  const AMap A(problem, grid, s.b, weights, reduced, s.h ? &*s.h : nullptr, 0.0);

  const Controls a = A.initial();
  // Smooth perturbation of the unknown controls only.
  const TimeSeries bump = TimeSeries::sample(grid, [&](double t) { return epsilon * (1.0 + t / grid.T); });
  Controls b = a;
  if (problem != ProblemKind::boundary_flux) b.F += bump;
  if (problem != ProblemKind::source_amplitude) b.nu += bump;
  const Controls a2 = A.apply(A.apply(a));
  const Controls b2 = A.apply(A.apply(b));

  std::vector<ProbeRow> rows;
  for (double gamma : gammas) {
    const double before = weighted_distance(a, b, gamma);
    const double after = weighted_distance(a2, b2, gamma);
    rows.push_back({gamma, before > 0.0 ? std::sqrt(after / before) : 0.0});
  }
  return rows;
}

}  // namespace kdvinv
