#include "kdvinv/mesh.hpp"

#include <algorithm>
#include <array>
#include <string>

namespace kdvinv {

Grid make_grid(double R, double T, int N, int M) {
  if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("grid length R must be positive, got " + std::to_string(R));
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("grid horizon T must be positive, got " + std::to_string(T));
  if (N < 8) throw DomainError("grid needs N >= 8 space cells, got " + std::to_string(N));
  if (M < 2) throw DomainError("grid needs M >= 2 time steps, got " + std::to_string(M));
  return Grid{R, T, N, M};
}

// ---------------------------------------------------------------------------
// Samples

template <Axis A>
Samples<A>::Samples(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != length(grid_)) {
    throw DomainError("sample count " + std::to_string(values_.size()) + " does not match grid length " +
                      std::to_string(length(grid_)));
  }
  if (!all_finite()) throw DomainError("samples contain non-finite values");
}

template <Axis A>
Samples<A> Samples<A>::sample(const Grid& grid, const std::function<double(double)>& fn) {
  std::vector<double> v(length(grid));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const int j = static_cast<int>(i);
    v[i] = fn(A == Axis::space ? grid.x(j) : grid.t(j));
  }
  return Samples(grid, std::move(v));
}

template <Axis A>
void Samples<A>::check_same(const Samples& o) const {
  if (!(grid_ == o.grid_) || values_.size() != o.values_.size()) throw DomainError("samples live on different grids");
}

template <Axis A>
Samples<A>& Samples<A>::operator+=(const Samples& o) {
  check_same(o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

template <Axis A>
Samples<A>& Samples<A>::operator-=(const Samples& o) {
  check_same(o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

template <Axis A>
Samples<A>& Samples<A>::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

template <Axis A>
double Samples<A>::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

template <Axis A>
bool Samples<A>::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

template class Samples<Axis::space>;
template class Samples<Axis::time>;

// ---------------------------------------------------------------------------
// Field

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.space_points() * grid_.time_points()) {
    throw DomainError("field sample count does not match (M+1)x(N+1)");
  }
  if (!all_finite()) throw DomainError("field contains non-finite values");
}

Field Field::zeros(const Grid& grid) {
  return Field(grid, std::vector<double>(grid.space_points() * grid.time_points(), 0.0));
}

Field Field::sample(const Grid& grid, const std::function<double(double, double)>& fn) {
  std::vector<double> v(grid.space_points() * grid.time_points());
  std::size_t k = 0;
  for (int n = 0; n <= grid.M; ++n) {
    const double t = grid.t(n);
    for (int i = 0; i <= grid.N; ++i) v[k++] = fn(t, grid.x(i));
  }
  return Field(grid, std::move(v));
}

Field Field::outer(const TimeSeries& s, const SpaceProfile& p) {
  if (!(s.grid() == p.grid())) throw DomainError("outer product of samples on different grids");
  const Grid& g = s.grid();
  std::vector<double> v(g.space_points() * g.time_points());
  std::size_t k = 0;
  for (int n = 0; n <= g.M; ++n)
    for (int i = 0; i <= g.N; ++i) v[k++] = s[n] * p[i];
  return Field(g, std::move(v));
}

SpaceProfile Field::row_profile(int n) const {
  auto r = row(n);
  return SpaceProfile(grid_, std::vector<double>(r.begin(), r.end()));
}

TimeSeries Field::column(int i) const {
  std::vector<double> v(grid_.time_points());
  for (int n = 0; n <= grid_.M; ++n) v[n] = (*this)(n, i);
  return TimeSeries(grid_, std::move(v));
}

void Field::set_row(int n, std::span<const double> r) {
  if (r.size() != grid_.space_points()) throw DomainError("row length does not match N+1");
  std::copy(r.begin(), r.end(), values_.begin() + static_cast<std::ptrdiff_t>(index(n, 0)));
}

void Field::check_same(const Field& o) const {
  if (!(grid_ == o.grid_)) throw DomainError("fields live on different grids");
}

Field& Field::operator+=(const Field& o) {
  check_same(o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  check_same(o);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
  return *this;
}

Field& Field::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

Field Field::scaled_rows(const TimeSeries& s) const {
  if (!(s.grid() == grid_)) throw DomainError("row scaling series lives on a different grid");
  Field r = *this;
  for (int n = 0; n <= grid_.M; ++n)
    for (double& v : r.row(n)) v *= s[n];
  return r;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field map(const Field& u, const std::function<double(double)>& fn) {
  std::vector<double> v(u.values().begin(), u.values().end());
  for (double& x : v) x = fn(x);
  return Field(u.grid(), std::move(v));
}

// ---------------------------------------------------------------------------
// Quadrature

double integrate_samples(std::span<const double> v, double h) {
  const std::size_t intervals = v.size() - 1;
  if (v.size() < 2) return 0.0;
  if (intervals % 2 == 1) {
    double s = 0.5 * (v.front() + v.back());
    for (std::size_t i = 1; i < intervals; ++i) s += v[i];
    return s * h;
  }
  double odd = 0.0;
  double even = 0.0;
  for (std::size_t i = 1; i < intervals; ++i) (i % 2 == 1 ? odd : even) += v[i];
  return h / 3.0 * (v.front() + v.back() + 4.0 * odd + 2.0 * even);
}

double integrate_space(const SpaceProfile& p) { return integrate_samples(p.values(), p.grid().dx()); }

double integrate_time(const TimeSeries& s) { return integrate_samples(s.values(), s.grid().dt()); }

double integrate_field(const Field& u) {
  const Grid& g = u.grid();
  std::vector<double> rows(g.time_points());
  for (int n = 0; n <= g.M; ++n) rows[n] = integrate_samples(u.row(n), g.dx());
  return integrate_samples(rows, g.dt());
}

// ---------------------------------------------------------------------------
// Finite differences

namespace {

// One-sided weights over samples 0..K-1. kThirdEdge1 is the stencil for x_1.
constexpr std::array<double, 3> kFirstEdge{-1.5, 2.0, -0.5};
constexpr std::array<double, 4> kSecondEdge{2.0, -5.0, 4.0, -1.0};
constexpr std::array<double, 5> kThirdEdge0{-2.5, 9.0, -12.0, 7.0, -1.5};
constexpr std::array<double, 5> kThirdEdge1{-1.5, 5.0, -6.0, 3.0, -0.5};

template <std::size_t K>
double apply_left(std::span<const double> v, const std::array<double, K>& w) {
  double s = 0.0;
  for (std::size_t j = 0; j < K; ++j) s += w[j] * v[j];
  return s;
}

// Mirror image at the right end; odd orders flip sign.
template <std::size_t K>
double apply_right(std::span<const double> v, const std::array<double, K>& w, int order) {
  const std::size_t n = v.size() - 1;
  double s = 0.0;
  for (std::size_t j = 0; j < K; ++j) s += w[j] * v[n - j];
  return order % 2 == 1 ? -s : s;
}

std::vector<double> first(std::span<const double> v, double h) {
  const std::size_t n = v.size() - 1;
  std::vector<double> d(v.size());
  d[0] = apply_left(v, kFirstEdge) / h;
  for (std::size_t i = 1; i < n; ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
  d[n] = apply_right(v, kFirstEdge, 1) / h;
  return d;
}

std::vector<double> second(std::span<const double> v, double h) {
  const std::size_t n = v.size() - 1;
  const double h2 = h * h;
  std::vector<double> d(v.size());
  d[0] = apply_left(v, kSecondEdge) / h2;
  for (std::size_t i = 1; i < n; ++i) d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
  d[n] = apply_right(v, kSecondEdge, 2) / h2;
  return d;
}

std::vector<double> third(std::span<const double> v, double h) {
  const std::size_t n = v.size() - 1;
  const double h3 = h * h * h;
  std::vector<double> d(v.size());
  d[0] = apply_left(v, kThirdEdge0) / h3;
  d[1] = apply_left(v, kThirdEdge1) / h3;
  for (std::size_t i = 2; i + 2 <= n; ++i) d[i] = (0.5 * (v[i + 2] - v[i - 2]) - (v[i + 1] - v[i - 1])) / h3;
  d[n - 1] = apply_right(v, kThirdEdge1, 3) / h3;
  d[n] = apply_right(v, kThirdEdge0, 3) / h3;
  return d;
}

}  // namespace

std::vector<double> differentiate(std::span<const double> v, double h, int order) {
  if (order < 0) throw DomainError("negative derivative order");
  if (v.size() < 5) throw DomainError("derivative stencils need at least 5 samples");
  std::vector<double> out(v.begin(), v.end());
  int remaining = order;
  while (remaining > 0) {
    const int step = std::min(remaining, 3);
    out = step == 1 ? first(out, h) : step == 2 ? second(out, h) : third(out, h);
    remaining -= step;
  }
  return out;
}

SpaceProfile diff_x(const SpaceProfile& p, int order) {
  if (order < 1 || order > 3) throw DomainError("diff_x supports orders 1, 2 and 3, got " + std::to_string(order));
  return derivative(p, order);
}

SpaceProfile derivative(const SpaceProfile& p, int order) {
  return SpaceProfile(p.grid(), differentiate(p.values(), p.grid().dx(), order));
}

namespace {
void check_time_order(const Grid& g, int order) {
  if (order < 1) throw DomainError("diff_t order must be >= 1");
  if (g.M < 2 * order + 2) {
    throw DomainError("diff_t of order " + std::to_string(order) + " needs M >= " + std::to_string(2 * order + 2));
  }
}
}  // namespace

TimeSeries diff_t(const TimeSeries& s, int order) {
  check_time_order(s.grid(), order);
  return TimeSeries(s.grid(), differentiate(s.values(), s.grid().dt(), order));
}

Field diff_x(const Field& u, int order) {
  const Grid& g = u.grid();
  Field d = Field::zeros(g);
  for (int n = 0; n <= g.M; ++n) d.set_row(n, differentiate(u.row(n), g.dx(), order));
  return d;
}

Field diff_t(const Field& u, int order) {
  const Grid& g = u.grid();
  check_time_order(g, order);
  Field d = Field::zeros(g);
  std::vector<double> col(g.time_points());
  for (int i = 0; i <= g.N; ++i) {
    for (int n = 0; n <= g.M; ++n) col[n] = u(n, i);
    const auto dc = differentiate(col, g.dt(), order);
    for (int n = 0; n <= g.M; ++n) d(n, i) = dc[n];
  }
  return d;
}

double derivative_at_left(const SpaceProfile& p, int order) {
  return differentiate(p.values(), p.grid().dx(), order).front();
}

double derivative_at_right(const SpaceProfile& p, int order) {
  return differentiate(p.values(), p.grid().dx(), order).back();
}

namespace {

// Weights of the order-th derivative at z from nodes xs (Fornberg 1988).
std::vector<double> fornberg(const std::vector<double>& xs, double z, int order) {
  const std::size_t n = xs.size();
  const auto m = static_cast<std::size_t>(order);
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = c[j][m];
  return w;
}

}  // namespace

SpaceProfile wide_derivative(const SpaceProfile& p, int order) {
  if (order < 1) throw DomainError("wide_derivative needs order >= 1");
  const auto width = static_cast<std::size_t>(order) + 4;
  const auto v = p.values();
  if (v.size() < width) throw DomainError("too few samples for wide_derivative");
  const double scale = std::pow(p.grid().dx(), order);
  std::vector<double> out(v.size());
  std::vector<double> xs(width);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::size_t start = std::min(i > width / 2 ? i - width / 2 : 0, v.size() - width);
    for (std::size_t j = 0; j < width; ++j) xs[j] = static_cast<double>(start + j);
    const std::vector<double> w = fornberg(xs, static_cast<double>(i), order);
    double s = 0.0;
    for (std::size_t j = 0; j < width; ++j) s += w[j] * v[start + j];
    out[i] = s / scale;
  }
  return SpaceProfile(p.grid(), std::move(out));
}

double edge_derivative(const SpaceProfile& p, int order, Edge edge) {
  static constexpr double first[6] = {-25.0 / 12, 4.0, -3.0, 4.0 / 3, -0.25, 0.0};
  static constexpr double second[6] = {15.0 / 4, -77.0 / 6, 107.0 / 6, -13.0, 61.0 / 12, -5.0 / 6};
  if (order != 1 && order != 2) throw DomainError("edge_derivative supports orders 1 and 2");
  const double* w = order == 1 ? first : second;
  const auto v = p.values();
  const std::size_t n = v.size() - 1;
  double s = 0.0;
  for (std::size_t j = 0; j < 6; ++j) s += w[j] * (edge == Edge::left ? v[j] : v[n - j]);
  // Mirroring x -> R - x flips the sign of odd derivatives.
  if (edge == Edge::right && order == 1) s = -s;
  return s / std::pow(p.grid().dx(), order);
}

}  // namespace kdvinv
