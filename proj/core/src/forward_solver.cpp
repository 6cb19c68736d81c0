#include "kdvinv/forward_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "kdvinv/banded.hpp"
#include "kdvinv/calculus.hpp"

namespace kdvinv {

LinearProblem LinearProblem::zero(const Grid& grid, double b) {
  return LinearProblem{grid,
                       b,
                       SpaceProfile::zeros(grid),
                       TimeSeries::zeros(grid),
                       TimeSeries::zeros(grid),
                       TimeSeries::zeros(grid),
                       Field::zeros(grid),
                       Field::zeros(grid)};
}

void LinearProblem::validate() const {
  const auto same = [this](const Grid& g, const char* what) {
    if (!(g == grid)) throw DomainError(std::string("linear problem: ") + what + " lives on a different grid");
  };
  same(u0.grid(), "u0");
  same(mu0.grid(), "mu0");
  same(nu0.grid(), "nu0");
  same(nu1.grid(), "nu1");
  same(f0.grid(), "f0");
  same(f1.grid(), "f1");
  const double scale = std::max(1.0, u0.max_abs());
  if (std::abs(mu0.front() - u0.front()) > 1e-6 * scale) {
    throw DomainError("linear problem: mu0(0) does not match u0(0)");
  }
  if (std::abs(nu0.front() - u0.back()) > 1e-6 * scale) {
    throw DomainError("linear problem: nu0(0) does not match u0(R)");
  }
}

namespace {

constexpr std::size_t kLower = 2;
constexpr std::size_t kUpper = 3;

// Discrete b d/dx + d^3/dx^3 at interior node i (1 <= i <= N-2). Node 1 uses
// the shifted third-derivative stencil over x_0..x_4.
class Operator {
public:
  Operator(const Grid& g, double b) : n_(g.N), b_(b), h_(g.dx()) {}

  template <typename Fn>
  void for_each_weight(int i, Fn&& fn) const {
    const double d1 = b_ / (2.0 * h_);
    const double h3 = h_ * h_ * h_;
    if (i == 1) {
      constexpr double w[5] = {-1.5, 5.0, -6.0, 3.0, -0.5};
      for (int j = 0; j < 5; ++j) fn(j, w[j] / h3);
      fn(0, -d1);
      fn(2, d1);
      return;
    }
    fn(i - 2, -0.5 / h3);
    fn(i - 1, 1.0 / h3 - d1);
    fn(i + 1, -1.0 / h3 + d1);
    fn(i + 2, 0.5 / h3);
  }

  double apply(std::span<const double> u, int i) const {
    double s = 0.0;
    for_each_weight(i, [&](int j, double w) { s += w * u[static_cast<std::size_t>(j)]; });
    return s;
  }

  int n() const { return n_; }

private:
  int n_;
  double b_;
  double h_;
};

BandMatrix assemble(const Grid& g, const Operator& op) {
  const int N = g.N;
  const double half = 0.5 * g.dt();
  BandMatrix L(static_cast<std::size_t>(N) + 1, kLower, kUpper);
  L.at(0, 0) = 1.0;
  for (int i = 1; i <= N - 2; ++i) {
    const auto row = static_cast<std::size_t>(i);
    L.at(row, row) += 1.0;
    op.for_each_weight(i, [&](int j, double w) { L.at(row, static_cast<std::size_t>(j)) += half * w; });
  }
  const double inv2h = 1.0 / (2.0 * g.dx());
  const auto nm1 = static_cast<std::size_t>(N - 1);
  L.at(nm1, nm1 - 1) = inv2h;
  L.at(nm1, nm1) = -4.0 * inv2h;
  L.at(nm1, nm1 + 1) = 3.0 * inv2h;
  L.at(static_cast<std::size_t>(N), static_cast<std::size_t>(N)) = 1.0;
  return L;
}

double right_flux(std::span<const double> u, double h) {
  const std::size_t n = u.size() - 1;
  return (u[n - 2] - 4.0 * u[n - 1] + 3.0 * u[n]) / (2.0 * h);
}

}  // namespace

Solution solve_linear(const LinearProblem& p) {
  p.validate();
  const Grid& g = p.grid;
  const int N = g.N;
  const double dt = g.dt();
  const Operator op(g, p.b);
  BandMatrix L = assemble(g, op);
  const BandMatrix L_unfactored = L;
  L.factorize();

  // Total source f0 + D_x f1 at every time level.
  Field source = p.f0;
  if (p.f1.max_abs() > 0.0) source += diff_x(p.f1, 1);

  std::vector<double> values(g.space_points() * g.time_points(), 0.0);
  std::copy(p.u0.values().begin(), p.u0.values().end(), values.begin());

  SolveDiagnostics diag;
  std::vector<double> rhs(g.space_points());
  std::vector<double> check(g.space_points());
  for (int n = 0; n < g.M; ++n) {
    std::span<const double> prev(values.data() + static_cast<std::size_t>(n) * g.space_points(), g.space_points());
    const auto f_now = source.row(n);
    const auto f_next = source.row(n + 1);
    rhs[0] = p.mu0[n + 1];
    for (int i = 1; i <= N - 2; ++i) {
      rhs[i] = prev[i] - 0.5 * dt * op.apply(prev, i) + 0.5 * dt * (f_now[i] + f_next[i]);
    }
    rhs[N - 1] = p.nu1[n + 1];
    rhs[N] = p.nu0[n + 1];
    const std::vector<double> original = rhs;
    L.solve(rhs);
    L_unfactored.multiply(rhs, check);
    double res = 0.0;
    for (std::size_t i = 0; i < check.size(); ++i) res = std::max(res, std::abs(check[i] - original[i]));
    diag.linear_solve_residual = std::max(diag.linear_solve_residual, res);
    // Dirichlet rows are identities; pin them against pivoting round-off.
    rhs[0] = p.mu0[n + 1];
    rhs[N] = p.nu0[n + 1];
    for (double v : rhs) {
      if (!std::isfinite(v)) {
        throw DivergedSolution("non-finite value at time step " + std::to_string(n + 1));
      }
    }
    std::copy(rhs.begin(), rhs.end(), values.begin() + static_cast<std::ptrdiff_t>((n + 1) * g.space_points()));
    ++diag.step_count;
  }

  Field u(g, std::move(values));
  // Row 0 holds the initial datum; the boundary rows act from step 1 on.
  for (int n = 1; n <= g.M; ++n) {
    const auto r = u.row(n);
    diag.trace_error_left = std::max(diag.trace_error_left, std::abs(r.front() - p.mu0[n]));
    diag.trace_error_right = std::max(diag.trace_error_right, std::abs(r.back() - p.nu0[n]));
    diag.flux_error = std::max(diag.flux_error, std::abs(right_flux(r, g.dx()) - p.nu1[n]));
  }
  return Solution{std::move(u), std::move(diag)};
}

namespace {

bool decreasing_tail(const std::vector<double>& r, std::size_t count) {
  if (r.size() < count) return false;
  for (std::size_t i = r.size() - count + 1; i < r.size(); ++i) {
    if (!(r[i] < r[i - 1])) return false;
  }
  return true;
}

bool increasing_tail(const std::vector<double>& r, std::size_t count) {
  if (r.size() < count) return false;
  for (std::size_t i = r.size() - count + 1; i < r.size(); ++i) {
    if (!(r[i] > r[i - 1])) return false;
  }
  return true;
}

}  // namespace

Solution solve_nonlinear(const LinearProblem& p, const Nonlinearity& g, double tol, int max_iter) {
  if (!(tol > 0.0)) throw DomainError("Picard tolerance must be positive");
  if (max_iter < 1) throw DomainError("Picard iteration cap must be >= 1");
  Solution current = solve_linear(p);
  current.diagnostics.picard_iters = 1;
  if (g.is_zero()) return current;

  const std::string hint =
      " (the data or the horizon T is too large for the forward map to contract; reduce the amplitude or T)";
  std::vector<double> residuals;
  LinearProblem q = p;
  for (int s = 1; s <= max_iter; ++s) {
    std::vector<double> gv(current.u.values().size());
    const auto uv = current.u.values();
    for (std::size_t k = 0; k < gv.size(); ++k) {
      gv[k] = p.f1.values()[k] - g(0, uv[k]);
      if (!std::isfinite(gv[k])) throw NoContraction("Picard iterate overflowed at iteration " + std::to_string(s) + hint);
    }
    q.f1 = Field(p.grid, std::move(gv));
    Solution next;
    try {
      next = solve_linear(q);
    } catch (const DivergedSolution&) {
      throw NoContraction("Picard iterate diverged at iteration " + std::to_string(s) + hint);
    }
    const double res = x0_norm(next.u - current.u);
    if (!std::isfinite(res)) throw NoContraction("Picard residual is not finite at iteration " + std::to_string(s) + hint);
    residuals.push_back(res);
    next.diagnostics.picard_iters = s + 1;
    current = std::move(next);
    // Successive iterates that agree to round-off count as converged.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * x0_norm(current.u);
    // A contraction decreases every step; a stall far below the first
    // residual means the iterates sit on the linear solver's round-off.
    const bool stalled = residuals.size() >= 2 && res >= residuals[residuals.size() - 2] && res <= 1e-6 * residuals.front();
    if (res < tol || res <= floor || stalled) {
      current.diagnostics.picard_residuals = residuals;
      current.diagnostics.converged = true;
      return current;
    }
    if (residuals.size() >= 4 && increasing_tail(residuals, 4) && res > 1e6 * residuals.front()) {
      throw NoContraction("Picard residuals grow geometrically (" + std::to_string(res) + ")" + hint);
    }
  }
  current.diagnostics.picard_residuals = residuals;
  current.diagnostics.converged = false;
  if (!decreasing_tail(residuals, 3)) {
    throw NoContraction("Picard iteration reached " + std::to_string(max_iter) +
                        " iterations without a decreasing residual" + hint);
  }
  return current;
}

double weak_residual(const Field& u, const LinearProblem& p, int test_count) {
  if (test_count < 1) throw DomainError("weak_residual needs at least one test function");
  const Grid& g = u.grid();
  const double R = g.R;
  const double T = g.T;
  double worst = 0.0;
  std::vector<double> row(g.space_points());
  std::vector<double> in_time(g.time_points());
  std::vector<double> boundary(g.time_points());
  for (int idx = 1; idx <= test_count; ++idx) {
    const double kappa = idx * std::numbers::pi / R;
    std::vector<double> s(g.space_points()), s1(g.space_points()), s3(g.space_points());
    for (int i = 0; i <= g.N; ++i) {
      const double x = g.x(i);
      const double sn = std::sin(kappa * x);
      const double cs = std::cos(kappa * x);
      s[i] = x * x * sn;
      s1[i] = 2.0 * x * sn + kappa * x * x * cs;
      s3[i] = 6.0 * kappa * cs - 6.0 * kappa * kappa * x * sn - kappa * kappa * kappa * x * x * cs;
    }
    const double sign = idx % 2 == 0 ? 1.0 : -1.0;  // cos(i pi)
    const double s1_R = kappa * R * R * sign;
    const double s2_R = 4.0 * kappa * R * sign;
    for (int n = 0; n <= g.M; ++n) {
      const double w = T - g.t(n);
      const auto ur = u.row(n);
      const auto f0r = p.f0.row(n);
      const auto f1r = p.f1.row(n);
      for (int i = 0; i <= g.N; ++i) {
        // phi_t = -s, phi_x = w s', phi_xxx = w s'''
        row[i] = ur[i] * (-s[i] + w * (p.b * s1[i] + s3[i])) + f0r[i] * w * s[i] - f1r[i] * w * s1[i];
      }
      in_time[n] = integrate_samples(row, g.dx());
      // mu0 phi_xx(t,0) vanishes since s''(0) = 0.
      boundary[n] = w * (-p.nu0[n] * s2_R + p.nu1[n] * s1_R);
    }
    for (int i = 0; i <= g.N; ++i) row[i] = p.u0[i] * T * s[i];
    const double total =
        integrate_samples(in_time, g.dt()) + integrate_samples(row, g.dx()) + integrate_samples(boundary, g.dt());
    worst = std::max(worst, std::abs(total));
  }
  return worst;
}

}  // namespace kdvinv
