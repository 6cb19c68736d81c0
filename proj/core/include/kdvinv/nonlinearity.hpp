#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "kdvinv/mesh.hpp"

namespace kdvinv {

// The flux nonlinearity g with its derivatives g^(l), l = 0..arity.
// Registration checks g(0) = g'(0) = 0.
class Nonlinearity {
public:
  using Oracle = std::function<double(int level, double u)>;

  Nonlinearity(std::string name, int arity, Oracle eval);

  // g(u) = u^2/2.
  static Nonlinearity kdv_quadratic();
  // g(u) = u^3/3.
  static Nonlinearity cubic();
  // g(u) = cosh(u) - 1; grows faster than any power.
  static Nonlinearity cosh();
  // g(u) = sum_i c_i u^i; c_0 and c_1 must vanish.
  static Nonlinearity polynomial(std::vector<double> coefficients);
  static Nonlinearity zero();
  // Lookup of the built-in names "kdv_quadratic", "cubic", "cosh", "zero".
  static Nonlinearity builtin(const std::string& name);

  const std::string& name() const { return name_; }
  int arity() const { return arity_; }
  bool is_zero() const { return is_zero_; }
  double operator()(int level, double u) const;

private:
  std::string name_;
  int arity_;
  Oracle eval_;
  bool is_zero_ = false;
};

// One summand c * g^(l)(u) * prod_i d_t^{n_i} u of the expansion of d_t^m g(u).
// `orders` is sorted ascending and has exactly l entries.
struct ChainTerm {
  int level = 0;
  std::vector<int> orders;
  long long coefficient = 0;
};

// Expansion of d_t^m g(u(t)) obtained by repeated Leibniz differentiation
// starting from g(u). Terms are ordered by (level, orders).
std::vector<ChainTerm> chain_rule_terms(int m);

// Pointwise d_t^m g(u) from samples derivs[n] = d_t^n u, n = 0..m.
std::vector<double> dt_m_of_g(int m, std::span<const std::span<const double>> derivs, const Nonlinearity& g);
SpaceProfile dt_m_of_g(int m, std::span<const SpaceProfile> derivs, const Nonlinearity& g);
Field dt_m_of_g(int m, std::span<const Field> derivs, const Nonlinearity& g);

// Formal initial traces Phi_0..Phi_k of d_t^m u and the source traces they
// were built from.
struct CompatChain {
  std::vector<SpaceProfile> profiles;
  std::vector<SpaceProfile> source_traces;
};

// Phi_0 = u0, Phi_m = f_{m-1} - (b Phi'_{m-1} + Phi'''_{m-1}) - (d_t^{m-1} g(u)|_{t=0})'.
CompatChain phi_chain(const SpaceProfile& u0, std::span<const SpaceProfile> source_traces, const Nonlinearity& g,
                      double b, int k);
// The same recursion without the nonlinear term.
CompatChain phi_tilde_chain(const SpaceProfile& u0, std::span<const SpaceProfile> source_traces, double b, int k);

// |u0|_H^{3k} + Sum_m |f_m|_H^{3(k-m-1)}.
double kappa(const SpaceProfile& u0, std::span<const SpaceProfile> source_traces, int k);
// Sum_{m<k} |traces[m]|_H^{3(k-m)}.
double rho(std::span<const SpaceProfile> traces, int k);

// Taylor polynomial t -> Sum_{m<k} Phi'_m(R) t^m / m!, sampled on the time axis.
TimeSeries nu_star(const CompatChain& chain, int k, const Grid& grid);

// Initial traces d_t^m f|_{t=0}, m = 0..count-1, of a sampled source.
std::vector<SpaceProfile> source_traces_at_start(const Field& f, int count);

}  // namespace kdvinv
