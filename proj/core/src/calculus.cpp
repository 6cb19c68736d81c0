#include "kdvinv/calculus.hpp"

#include <algorithm>
#include <cmath>

namespace kdvinv {

double l2_norm(const SpaceProfile& p) { return std::sqrt(integrate_space(p * p)); }

double l2_norm(const TimeSeries& s) { return std::sqrt(integrate_time(s * s)); }

double l2_norm(const Field& u) {
  const Grid& g = u.grid();
  std::vector<double> rows(g.time_points());
  std::vector<double> sq(g.space_points());
  for (int n = 0; n <= g.M; ++n) {
    auto r = u.row(n);
    for (std::size_t i = 0; i < r.size(); ++i) sq[i] = r[i] * r[i];
    rows[n] = integrate_samples(sq, g.dx());
  }
  return std::sqrt(std::max(0.0, integrate_samples(rows, g.dt())));
}

double max_time_l2(const Field& u) {
  const Grid& g = u.grid();
  double best = 0.0;
  std::vector<double> sq(g.space_points());
  for (int n = 0; n <= g.M; ++n) {
    auto r = u.row(n);
    for (std::size_t i = 0; i < r.size(); ++i) sq[i] = r[i] * r[i];
    best = std::max(best, integrate_samples(sq, g.dx()));
  }
  return std::sqrt(best);
}

double sobolev_norm(const SpaceProfile& p, int order) {
  double sum = integrate_space(p * p);
  for (int j = 1; j <= order; ++j) {
    const SpaceProfile d = derivative(p, j);
    sum += integrate_space(d * d);
  }
  return std::sqrt(std::max(0.0, sum));
}

namespace {
void check_traces(std::size_t got, int k) {
  if (k < 0) throw DomainError("norm order k must be >= 0");
  if (got != static_cast<std::size_t>(k)) {
    throw DomainError("expected " + std::to_string(k) + " initial traces, got " + std::to_string(got));
  }
}
}  // namespace

NormReport xk_norm(const Field& u, int k, std::span<const SpaceProfile> traces) {
  check_traces(traces.size(), k);
  NormReport rep;
  for (int m = 0; m <= k; ++m) {
    const Field dm = m == 0 ? u : diff_t(u, m);
    rep.add("max_t|d_t^" + std::to_string(m) + " u|_L2", max_time_l2(dm));
    rep.add("|d_t^" + std::to_string(m) + " u_x|_L2(Q)", l2_norm(diff_x(dm, 1)));
  }
  for (int m = 0; m < k; ++m) {
    rep.add("|trace_" + std::to_string(m) + "|_H^" + std::to_string(3 * (k - m)), sobolev_norm(traces[m], 3 * (k - m)));
  }
  return rep;
}

NormReport mk_norm(const Field& f, int k, std::span<const SpaceProfile> traces) {
  check_traces(traces.size(), k);
  NormReport rep;
  for (int m = 0; m <= k; ++m) {
    const Field dm = m == 0 ? f : diff_t(f, m);
    rep.add("|d_t^" + std::to_string(m) + " f|_L2(Q)", l2_norm(dm));
  }
  for (int m = 0; m < k; ++m) {
    const int order = 3 * (k - m - 1);
    rep.add("|trace_" + std::to_string(m) + "|_H^" + std::to_string(order), sobolev_norm(traces[m], order));
  }
  return rep;
}

double x0_norm(const Field& u) { return max_time_l2(u) + l2_norm(diff_x(u, 1)); }

double hk_time_norm(const TimeSeries& s, int k) {
  double sum = integrate_time(s * s);
  for (int m = 1; m <= k; ++m) {
    const TimeSeries d = diff_t(s, m);
    sum += integrate_time(d * d);
  }
  return std::sqrt(std::max(0.0, sum));
}

double slobodeckij_seminorm_sq(const TimeSeries& s, double frac) {
  const Grid& g = s.grid();
  const double dt = g.dt();
  const double p = 1.0 + 2.0 * frac;
  const auto w = [&](int n) { return (n == 0 || n == g.M) ? 0.5 * dt : dt; };
  std::vector<double> kernel(g.time_points());
  for (int lag = 1; lag <= g.M; ++lag) kernel[lag] = std::pow(lag * dt, -p);
  double sum = 0.0;
  for (int n = 0; n <= g.M; ++n) {
    for (int m = n + 1; m <= g.M; ++m) {
      const double diff = s[n] - s[m];
      sum += w(n) * w(m) * diff * diff * kernel[m - n];
    }
  }
  return 2.0 * sum;
}

double hs_time_norm(const TimeSeries& s, int k, double frac) {
  if (!(frac >= 0.0 && frac < 1.0)) throw DomainError("fractional exponent must lie in [0,1)");
  const double hk = hk_time_norm(s, k);
  if (frac == 0.0) return hk;
  const TimeSeries top = k == 0 ? s : diff_t(s, k);
  return std::sqrt(hk * hk + slobodeckij_seminorm_sq(top, frac));
}

double weighted_hk_norm(const TimeSeries& s, int k, double gamma) {
  const TimeSeries weight = TimeSeries::sample(s.grid(), [gamma](double t) { return std::exp(-gamma * t); });
  double sum = 0.0;
  for (int m = 0; m <= k; ++m) {
    const TimeSeries d = m == 0 ? s : diff_t(s, m);
    sum += l2_norm(weight * d);
  }
  return sum;
}

double interp_bound_ratio(const SpaceProfile& p) {
  const double denom = l2_norm(diff_x(p, 1)) + l2_norm(p);
  if (!(denom > 0.0)) throw DomainError("interpolation ratio of the zero profile is undefined");
  return p.max_abs() / denom;
}

}  // namespace kdvinv
