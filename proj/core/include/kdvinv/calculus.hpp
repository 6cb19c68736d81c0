#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kdvinv/mesh.hpp"

namespace kdvinv {

// A norm together with the summands of its defining formula.
struct NormReport {
  double value = 0.0;
  std::vector<std::pair<std::string, double>> parts;

  void add(std::string label, double v) {
    parts.emplace_back(std::move(label), v);
    value += v;
  }
};

double l2_norm(const SpaceProfile& p);
double l2_norm(const TimeSeries& s);
// L2 norm over the rectangle (0,T) x (0,R).
double l2_norm(const Field& u);
// max over time levels of the spatial L2 norm.
double max_time_l2(const Field& u);

// sqrt(sum_{j<=order} |p^(j)|^2), derivatives by finite differences.
double sobolev_norm(const SpaceProfile& p, int order);

// Sum_m [max_t |d_t^m u|_L2 + |d_t^m u_x|_L2(Q)] + Sum_{m<k} |traces[m]|_H^{3(k-m)}.
NormReport xk_norm(const Field& u, int k, std::span<const SpaceProfile> traces);
// Sum_m |d_t^m f|_L2(Q) + Sum_{m<k} |traces[m]|_H^{3(k-m-1)}.
NormReport mk_norm(const Field& f, int k, std::span<const SpaceProfile> traces);

// Distance used by the Picard loops: the k = 0 case of xk_norm,
// max_t |u|_L2 + |u_x|_L2(Q).
double x0_norm(const Field& u);

// sqrt(sum_{m<=k} |s^(m)|^2_L2(0,T)).
double hk_time_norm(const TimeSeries& s, int k);

// Squared Slobodeckij seminorm of s by a double trapezoid sum over (0,T)^2
// with the diagonal cells dropped.
double slobodeckij_seminorm_sq(const TimeSeries& s, double frac);

// (|s|^2_H^k + [s^(k)]^2_frac)^(1/2), the intrinsic H^{k+frac}(0,T) norm.
double hs_time_norm(const TimeSeries& s, int k, double frac);

// Sum_{m<=k} |e^{-gamma t} s^(m)|_L2(0,T).
double weighted_hk_norm(const TimeSeries& s, int k, double gamma);

// sup|p| / (|p'|_L2 + |p|_L2).
double interp_bound_ratio(const SpaceProfile& p);

}  // namespace kdvinv
