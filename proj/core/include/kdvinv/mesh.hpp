#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "kdvinv/errors.hpp"

namespace kdvinv {

// Uniform discretization of the rectangle (0,T) x (0,R):
// x_i = i*dx for i = 0..N, t_n = n*dt for n = 0..M.
struct Grid {
  double R = 1.0;
  double T = 1.0;
  int N = 8;
  int M = 2;

  double dx() const { return R / N; }
  double dt() const { return T / M; }
  double x(int i) const { return i == N ? R : i * dx(); }
  double t(int n) const { return n == M ? T : n * dt(); }
  std::size_t space_points() const { return static_cast<std::size_t>(N) + 1; }
  std::size_t time_points() const { return static_cast<std::size_t>(M) + 1; }

  friend bool operator==(const Grid&, const Grid&) = default;
};

Grid make_grid(double R, double T, int N, int M);

enum class Axis { space, time };

// Samples of a function of one variable on one axis of a grid:
// Axis::space gives N+1 samples of p(x), Axis::time gives M+1 samples of s(t).
template <Axis A>
class Samples {
public:
  Samples() = default;
  Samples(const Grid& grid, std::vector<double> values);

  static Samples zeros(const Grid& grid) { return Samples(grid, std::vector<double>(length(grid), 0.0)); }
  static Samples constant(const Grid& grid, double c) { return Samples(grid, std::vector<double>(length(grid), c)); }
  static Samples sample(const Grid& grid, const std::function<double(double)>& fn);

  static std::size_t length(const Grid& g) { return A == Axis::space ? g.space_points() : g.time_points(); }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double front() const { return values_.front(); }
  double back() const { return values_.back(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double coordinate(std::size_t i) const {
    return A == Axis::space ? grid_.x(static_cast<int>(i)) : grid_.t(static_cast<int>(i));
  }
  double step() const { return A == Axis::space ? grid_.dx() : grid_.dt(); }

  Samples& operator+=(const Samples& o);
  Samples& operator-=(const Samples& o);
  Samples& operator*=(double c);

  friend Samples operator+(Samples a, const Samples& b) { return a += b; }
  friend Samples operator-(Samples a, const Samples& b) { return a -= b; }
  friend Samples operator*(Samples a, double c) { return a *= c; }
  friend Samples operator*(double c, Samples a) { return a *= c; }

  // Pointwise product.
  friend Samples operator*(const Samples& a, const Samples& b) {
    Samples r = a;
    r.check_same(b);
    for (std::size_t i = 0; i < r.size(); ++i) r.values_[i] *= b.values_[i];
    return r;
  }

  double max_abs() const;
  bool all_finite() const;

private:
  void check_same(const Samples& o) const;

  Grid grid_{};
  std::vector<double> values_;
};

using SpaceProfile = Samples<Axis::space>;
using TimeSeries = Samples<Axis::time>;

// Samples u(t_n, x_i) stored row-major, one row per time level.
class Field {
public:
  Field() = default;
  Field(const Grid& grid, std::vector<double> values);

  static Field zeros(const Grid& grid);
  static Field sample(const Grid& grid, const std::function<double(double, double)>& fn);
  // f(t,x) = s(t) * p(x), or the product with a space-time field.
  static Field outer(const TimeSeries& s, const SpaceProfile& p);

  const Grid& grid() const { return grid_; }
  double operator()(int n, int i) const { return values_[index(n, i)]; }
  double& operator()(int n, int i) { return values_[index(n, i)]; }

  std::span<const double> row(int n) const { return {values_.data() + index(n, 0), grid_.space_points()}; }
  std::span<double> row(int n) { return {values_.data() + index(n, 0), grid_.space_points()}; }
  SpaceProfile row_profile(int n) const;
  TimeSeries column(int i) const;
  void set_row(int n, std::span<const double> r);

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double c);
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(Field a, double c) { return a *= c; }
  friend Field operator*(double c, Field a) { return a *= c; }

  // Multiplies every row n by s[n].
  Field scaled_rows(const TimeSeries& s) const;

  double max_abs() const;
  bool all_finite() const;

private:
  std::size_t index(int n, int i) const {
    return static_cast<std::size_t>(n) * grid_.space_points() + static_cast<std::size_t>(i);
  }
  void check_same(const Field& o) const;

  Grid grid_{};
  std::vector<double> values_;
};

// Applies fn pointwise to every sample.
Field map(const Field& u, const std::function<double(double)>& fn);

// Composite quadrature of equally spaced samples: Simpson for an even number
// of intervals, trapezoid otherwise.
double integrate_samples(std::span<const double> v, double h);

double integrate_space(const SpaceProfile& p);
double integrate_time(const TimeSeries& s);
// Double integral over (0,T) x (0,R).
double integrate_field(const Field& u);

// Derivative of equally spaced samples. Orders 1..3 use centered
// second-order stencils where they fit and one-sided second-order stencils
// near the ends; higher orders compose these.
std::vector<double> differentiate(std::span<const double> v, double h, int order);

// Spatial derivative, order in {1,2,3}.
SpaceProfile diff_x(const SpaceProfile& p, int order);
// Spatial derivative of any order >= 0 (composed beyond 3).
SpaceProfile derivative(const SpaceProfile& p, int order);
// Time derivative; requires M >= 2*order + 2.
TimeSeries diff_t(const TimeSeries& s, int order);

// Row-wise d/dx of a field.
Field diff_x(const Field& u, int order);
// Column-wise d/dt of a field.
Field diff_t(const Field& u, int order);

// One-sided second-order d/dx at x = 0 and x = R.
double derivative_at_left(const SpaceProfile& p, int order);
double derivative_at_right(const SpaceProfile& p, int order);

// Derivative from a sliding window of order+4 nodes (Fornberg weights),
// exact for polynomials of degree order+3. Used where second-order error
// would dominate, e.g. for weight profiles.
SpaceProfile wide_derivative(const SpaceProfile& p, int order);

enum class Edge { left, right };
// Fourth-order one-sided d/dx (order 1 or 2) at one end of the interval.
double edge_derivative(const SpaceProfile& p, int order, Edge edge);

}  // namespace kdvinv
