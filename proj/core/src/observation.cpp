#include "kdvinv/observation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kdvinv/calculus.hpp"
#include "kdvinv/scenario.hpp"

namespace kdvinv {

namespace {

SpaceProfile combo_of(const SpaceProfile& omega, double b) {
  SpaceProfile c = wide_derivative(omega, 3);
  if (b != 0.0) c += wide_derivative(omega, 1) * b;
  return c;
}

double weighted_integral(std::span<const double> row, const SpaceProfile& w) {
  std::vector<double> prod(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) prod[i] = row[i] * w[i];
  return integrate_samples(prod, w.step());
}

}  // namespace

TimeSeries weighted_rows(const Field& u, const SpaceProfile& w) {
  if (!(u.grid() == w.grid())) throw DomainError("field and weight live on different grids");
  const Grid& g = u.grid();
  std::vector<double> out(g.time_points());
  for (int n = 0; n <= g.M; ++n) out[n] = weighted_integral(u.row(n), w);
  return TimeSeries(g, std::move(out));
}

namespace {

TimeSeries dt_or_same(const TimeSeries& s, int m) { return m == 0 ? s : diff_t(s, m); }
Field dt_or_same(const Field& f, int m) { return m == 0 ? f : diff_t(f, m); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

Weight Weight::from_profile(const SpaceProfile& omega, double b) {
  Weight w;
  w.profile = omega;
  w.b = b;
  w.dprime = wide_derivative(omega, 1);
  w.dprime_at_R = edge_derivative(omega, 1, Edge::right);
  w.dsecond_at_0 = edge_derivative(omega, 2, Edge::left);
  w.dsecond_at_R = edge_derivative(omega, 2, Edge::right);
  w.combo = combo_of(omega, b);
  w.from_stencils = true;
  return w;
}

Weight Weight::with_derivatives(const SpaceProfile& omega, double b, double dprime_at_R, double dsecond_at_0,
                                double dsecond_at_R) {
  Weight w = from_profile(omega, b);
  w.dprime_at_R = dprime_at_R;
  w.dsecond_at_0 = dsecond_at_0;
  w.dsecond_at_R = dsecond_at_R;
  w.from_stencils = false;
  return w;
}

double Weight::boundary_defect() const {
  return std::max({std::abs(profile.front()), std::abs(profile.back()), std::abs(edge_derivative(profile, 1, Edge::left))});
}

double Weight::combo_defect() const { return (combo - combo_of(profile, b)).max_abs(); }

TimeSeries q_of(const Field& u, const Weight& w) { return weighted_rows(u, w.profile); }

TimeSeries psi_of(const Field& h, const Weight& w) { return weighted_rows(h, w.profile); }

TimeSeries r_of(const Field& u, const Weight& w, int m, const LinearProblem& data) {
  if (m < 0) throw DomainError("r_of: order must be nonnegative");
  if (std::abs(data.b - w.b) > 1e-14) throw DomainError("r_of: weight was built for a different b");
  const Grid& g = u.grid();
  const Field um = dt_or_same(u, m);
  const Field f0m = dt_or_same(data.f0, m);
  const Field f1m = dt_or_same(data.f1, m);
  const TimeSeries mu = dt_or_same(data.mu0, m);
  const TimeSeries nu0 = dt_or_same(data.nu0, m);
  const TimeSeries nu1 = dt_or_same(data.nu1, m);
  std::vector<double> out(g.time_points());
  for (int n = 0; n <= g.M; ++n) {
    const double boundary = nu1[n] * w.dprime_at_R + mu[n] * w.dsecond_at_0 - nu0[n] * w.dsecond_at_R;
    out[n] = boundary + weighted_integral(um.row(n), w.combo) + weighted_integral(f0m.row(n), w.profile) -
             weighted_integral(f1m.row(n), w.dprime);
  }
  return TimeSeries(g, std::move(out));
}

TimeSeries delta_of(const TimeSeries& psi1, const TimeSeries& psi2, const Weight& w1, const Weight& w2) {
  return psi1 * w2.dprime_at_R - psi2 * w1.dprime_at_R;
}

double min_abs_with_crossing(const TimeSeries& s) {
  double m = std::abs(s[0]);
  for (std::size_t n = 1; n < s.size(); ++n) {
    if ((s[n] > 0.0 && s[n - 1] < 0.0) || (s[n] < 0.0 && s[n - 1] > 0.0)) return 0.0;
    m = std::min(m, std::abs(s[n]));
  }
  return m;
}

bool PreconditionReport::compat_ok() const {
  return std::all_of(compat.begin(), compat.end(), [](const CompatResidual& c) { return c.ok; });
}

namespace {

struct Requirements {
  std::size_t weights = 0;
  bool needs_h = false;
  bool needs_nu1 = false;
};

Requirements requirements(ProblemKind p) {
  switch (p) {
    case ProblemKind::two_measurements:
      return {2, true, false};
    case ProblemKind::source_amplitude:
      return {1, true, true};
    case ProblemKind::boundary_flux:
      return {1, false, false};
    case ProblemKind::forward:
      return {0, false, true};
  }
  return {};
}

}  // namespace

PreconditionReport check_preconditions(const Scenario& s, ProblemKind problem, const PreconditionOptions& opts) {
  const Requirements req = requirements(problem);
  if (s.weights.size() < req.weights || s.measurements.size() < req.weights) {
    throw DomainError("scenario needs " + std::to_string(req.weights) + " weights and measurements");
  }
  if (req.needs_h && !s.h) throw DomainError("scenario needs the source profile h");
  if (req.needs_nu1 && !s.nu1) throw DomainError("scenario needs the boundary flux nu1");

  const Grid& grid = s.grid;
  const int k = s.k;
  PreconditionReport rep;
  rep.problem_id = static_cast<int>(problem);
  rep.delta_floor = opts.delta_floor;

  // Weight conditions.
  for (std::size_t j = 0; j < req.weights; ++j) {
    const Weight& w = s.weights[j];
    const double defect = w.boundary_defect();
    const bool ok = defect <= 1e-8 && w.combo_defect() <= 1e-8 * (1.0 + w.combo.max_abs());
    rep.omega_ok.push_back(ok);
    rep.omega_defects.push_back(defect);
    if (w.from_stencils) rep.weight_derivatives_from_stencils = true;
    if (!ok) {
      rep.failures.push_back(std::string(hypothesis::weight_conditions) + ": weight " + std::to_string(j + 1) +
                             " violates omega(0) = omega'(0) = omega(R) = 0 (defect " + fmt(defect) + ")");
    }
  }

  // Nondegeneracy.
  switch (problem) {
    case ProblemKind::two_measurements: {
      const TimeSeries d =
          delta_of(psi_of(*s.h, s.weights[0]), psi_of(*s.h, s.weights[1]), s.weights[0], s.weights[1]);
      rep.delta_min = min_abs_with_crossing(d);
      rep.delta_kind = "determinant";
      break;
    }
    case ProblemKind::source_amplitude:
      rep.delta_min = min_abs_with_crossing(psi_of(*s.h, s.weights[0]));
      rep.delta_kind = "psi0";
      break;
    case ProblemKind::boundary_flux:
      rep.delta_min = std::abs(s.weights[0].dprime_at_R);
      rep.delta_kind = "omega0_prime_R";
      break;
    case ProblemKind::forward:
      break;
  }
  if (rep.delta_min && *rep.delta_min < opts.delta_floor) {
    rep.failures.push_back(std::string(hypothesis::nondegeneracy) + ": min |" + rep.delta_kind + "| = " +
                           fmt(*rep.delta_min) + " is below the floor " + fmt(opts.delta_floor));
  }

  // Compatibility of the data at t = 0.
  const CompatChain chain = s.chain();
  const double h2 = grid.dx() * grid.dx() + grid.dt() * grid.dt();
  const auto tolerance = [&](double ref) {
    return opts.compat_tol_override ? *opts.compat_tol_override : opts.compat_tol_factor * h2 * (1.0 + std::abs(ref));
  };
  const auto record = [&](const std::string& quantity, int m, double value, double ref, const char* hyp) {
    CompatResidual c{quantity, m, std::abs(value - ref), tolerance(ref), true};
    c.ok = c.residual <= c.tolerance;
    if (!c.ok) {
      rep.warnings.push_back(std::string(hyp) + ": " + quantity + " order " + std::to_string(m) + " residual " +
                             fmt(c.residual) + " exceeds " + fmt(c.tolerance));
    }
    rep.compat.push_back(std::move(c));
  };
  for (std::size_t j = 0; j < req.weights; ++j) {
    for (int m = 0; m <= k; ++m) {
      const double value = dt_or_same(s.measurements[j], m)[0];
      const double ref = integrate_space(chain.profiles[static_cast<std::size_t>(m)] * s.weights[j].profile);
      record("phi_" + std::to_string(problem == ProblemKind::two_measurements ? j + 1 : j), m, value, ref,
             hypothesis::measurement_compatibility);
    }
  }
  for (int m = 0; m < k; ++m) {
    const SpaceProfile& phi = chain.profiles[static_cast<std::size_t>(m)];
    record("mu0", m, dt_or_same(s.mu0, m)[0], phi.front(), hypothesis::boundary_compatibility);
    record("nu0", m, dt_or_same(s.nu0, m)[0], phi.back(), hypothesis::boundary_compatibility);
    if (req.needs_nu1) {
      record("nu1", m, dt_or_same(*s.nu1, m)[0], derivative_at_right(phi, 1), hypothesis::boundary_compatibility);
    }
  }

  // Smallness constant.
  const std::vector<SpaceProfile> traces = s.source_traces();
  double c = sobolev_norm(s.u0, 3 * k) + hs_time_norm(s.mu0, k, 1.0 / 3.0) + hs_time_norm(s.nu0, k, 1.0 / 3.0);
  c += mk_norm(s.known_source() + (s.f1.max_abs() > 0.0 ? diff_x(s.f1, 1) : Field::zeros(grid)), k, traces).value;
  if (req.needs_nu1) c += hk_time_norm(*s.nu1, k);
  for (std::size_t j = 0; j < req.weights; ++j) c += l2_norm(diff_t(s.measurements[j], k + 1));
  rep.smallness_value = c;
  rep.smallness_kind = "c" + std::to_string(rep.problem_id);
  return rep;
}

}  // namespace kdvinv
