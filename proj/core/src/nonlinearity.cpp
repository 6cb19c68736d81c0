#include "kdvinv/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "kdvinv/calculus.hpp"

namespace kdvinv {

namespace {
constexpr int kUnboundedArity = 64;
constexpr double kRegistrationTol = 1e-12;
}  // namespace

Nonlinearity::Nonlinearity(std::string name, int arity, Oracle eval)
    : name_(std::move(name)), arity_(arity), eval_(std::move(eval)) {
  if (arity_ < 1) throw DomainError("nonlinearity must provide at least g and g'");
  if (!eval_) throw DomainError("nonlinearity oracle is empty");
  if (std::abs(eval_(0, 0.0)) > kRegistrationTol || std::abs(eval_(1, 0.0)) > kRegistrationTol) {
    throw DomainError("nonlinearity '" + name_ + "' must satisfy g(0) = g'(0) = 0");
  }
}

Nonlinearity Nonlinearity::kdv_quadratic() {
  return Nonlinearity("kdv_quadratic", kUnboundedArity, [](int l, double u) {
    switch (l) {
      case 0: return 0.5 * u * u;
      case 1: return u;
      case 2: return 1.0;
      default: return 0.0;
    }
  });
}

Nonlinearity Nonlinearity::cubic() {
  return Nonlinearity("cubic", kUnboundedArity, [](int l, double u) {
    switch (l) {
      case 0: return u * u * u / 3.0;
      case 1: return u * u;
      case 2: return 2.0 * u;
      case 3: return 2.0;
      default: return 0.0;
    }
  });
}

Nonlinearity Nonlinearity::cosh() {
  return Nonlinearity("cosh", kUnboundedArity, [](int l, double u) {
    if (l == 0) return std::cosh(u) - 1.0;
    return l % 2 == 1 ? std::sinh(u) : std::cosh(u);
  });
}

Nonlinearity Nonlinearity::polynomial(std::vector<double> coefficients) {
  while (!coefficients.empty() && coefficients.back() == 0.0) coefficients.pop_back();
  const bool zero = coefficients.empty();
  Nonlinearity g("polynomial", kUnboundedArity, [c = std::move(coefficients)](int l, double u) {
    // l-th derivative of sum c_i u^i, Horner on the falling-factorial weights.
    double acc = 0.0;
    for (int i = static_cast<int>(c.size()) - 1; i >= l; --i) {
      double w = c[i];
      for (int j = 0; j < l; ++j) w *= (i - j);
      acc = acc * u + w;
    }
    return acc;
  });
  g.is_zero_ = zero;
  return g;
}

Nonlinearity Nonlinearity::zero() {
  Nonlinearity g = polynomial({});
  g.name_ = "zero";
  return g;
}

Nonlinearity Nonlinearity::builtin(const std::string& name) {
  if (name == "kdv_quadratic") return kdv_quadratic();
  if (name == "cubic") return cubic();
  if (name == "cosh") return cosh();
  if (name == "zero") return zero();
  throw DomainError("unknown nonlinearity '" + name + "' (expected kdv_quadratic, cubic, cosh or zero)");
}

double Nonlinearity::operator()(int level, double u) const {
  if (level < 0 || level > arity_) throw DomainError("derivative level outside the nonlinearity's arity");
  return eval_(level, u);
}

// ---------------------------------------------------------------------------

std::vector<ChainTerm> chain_rule_terms(int m) {
  if (m < 0) throw DomainError("negative differentiation order");
  using Key = std::pair<int, std::vector<int>>;
  std::map<Key, long long> terms{{Key{0, {}}, 1}};
  for (int step = 0; step < m; ++step) {
    std::map<Key, long long> next;
    for (const auto& [key, c] : terms) {
      const auto& [level, orders] = key;
      // d/dt g^(l)(u) = g^(l+1)(u) u_t
      std::vector<int> grown = orders;
      grown.insert(std::upper_bound(grown.begin(), grown.end(), 1), 1);
      next[Key{level + 1, grown}] += c;
      // Leibniz on each factor.
      for (std::size_t i = 0; i < orders.size(); ++i) {
        std::vector<int> bumped = orders;
        bumped[i] += 1;
        std::sort(bumped.begin(), bumped.end());
        next[Key{level, bumped}] += c;
      }
    }
    terms = std::move(next);
  }
  std::vector<ChainTerm> out;
  out.reserve(terms.size());
  for (auto& [key, c] : terms) out.push_back(ChainTerm{key.first, key.second, c});
  return out;
}

std::vector<double> dt_m_of_g(int m, std::span<const std::span<const double>> derivs, const Nonlinearity& g) {
  if (m > g.arity()) throw DomainError("nonlinearity arity " + std::to_string(g.arity()) + " is below order " + std::to_string(m));
  if (derivs.size() < static_cast<std::size_t>(m) + 1) throw DomainError("dt_m_of_g needs derivatives 0..m of u");
  const std::size_t len = derivs[0].size();
  for (const auto& d : derivs.first(static_cast<std::size_t>(m) + 1)) {
    if (d.size() != len) throw DomainError("derivative samples differ in length");
  }
  std::vector<double> out(len, 0.0);
  if (g.is_zero()) return out;
  const auto terms = chain_rule_terms(m);
  for (std::size_t p = 0; p < len; ++p) {
    const double u = derivs[0][p];
    double acc = 0.0;
    for (const ChainTerm& term : terms) {
      double prod = static_cast<double>(term.coefficient) * g(term.level, u);
      for (int n : term.orders) prod *= derivs[static_cast<std::size_t>(n)][p];
      acc += prod;
    }
    out[p] = acc;
  }
  return out;
}

SpaceProfile dt_m_of_g(int m, std::span<const SpaceProfile> derivs, const Nonlinearity& g) {
  if (derivs.empty()) throw DomainError("dt_m_of_g needs derivatives 0..m of u");
  std::vector<std::span<const double>> views;
  for (const auto& d : derivs) views.push_back(d.values());
  return SpaceProfile(derivs[0].grid(), dt_m_of_g(m, views, g));
}

Field dt_m_of_g(int m, std::span<const Field> derivs, const Nonlinearity& g) {
  if (derivs.empty()) throw DomainError("dt_m_of_g needs derivatives 0..m of u");
  std::vector<std::span<const double>> views;
  for (const auto& d : derivs) views.push_back(d.values());
  return Field(derivs[0].grid(), dt_m_of_g(m, views, g));
}

// ---------------------------------------------------------------------------

namespace {

CompatChain build_chain(const SpaceProfile& u0, std::span<const SpaceProfile> source_traces, const Nonlinearity* g,
                        double b, int k) {
  if (k < 0) throw DomainError("chain order k must be >= 0");
  if (source_traces.size() != static_cast<std::size_t>(k)) {
    throw DomainError("compatibility chain needs " + std::to_string(k) + " source traces");
  }
  CompatChain chain;
  chain.source_traces.assign(source_traces.begin(), source_traces.end());
  chain.profiles.push_back(u0);
  for (int m = 1; m <= k; ++m) {
    const SpaceProfile& prev = chain.profiles.back();
    SpaceProfile next = source_traces[m - 1] - b * diff_x(prev, 1) - diff_x(prev, 3);
    if (g != nullptr && !g->is_zero()) {
      const SpaceProfile gm = dt_m_of_g(m - 1, std::span<const SpaceProfile>(chain.profiles), *g);
      next -= diff_x(gm, 1);
    }
    chain.profiles.push_back(std::move(next));
  }
  return chain;
}

}  // namespace

CompatChain phi_chain(const SpaceProfile& u0, std::span<const SpaceProfile> source_traces, const Nonlinearity& g,
                      double b, int k) {
  return build_chain(u0, source_traces, &g, b, k);
}

CompatChain phi_tilde_chain(const SpaceProfile& u0, std::span<const SpaceProfile> source_traces, double b, int k) {
  return build_chain(u0, source_traces, nullptr, b, k);
}

double kappa(const SpaceProfile& u0, std::span<const SpaceProfile> source_traces, int k) {
  double v = sobolev_norm(u0, 3 * k);
  for (int m = 0; m < k && m < static_cast<int>(source_traces.size()); ++m) {
    v += sobolev_norm(source_traces[m], 3 * (k - m - 1));
  }
  return v;
}

double rho(std::span<const SpaceProfile> traces, int k) {
  double v = 0.0;
  for (int m = 0; m < k && m < static_cast<int>(traces.size()); ++m) v += sobolev_norm(traces[m], 3 * (k - m));
  return v;
}

TimeSeries nu_star(const CompatChain& chain, int k, const Grid& grid) {
  if (chain.profiles.size() < static_cast<std::size_t>(k)) throw DomainError("chain shorter than k");
  std::vector<double> coeff(static_cast<std::size_t>(k));
  double factorial = 1.0;
  for (int m = 0; m < k; ++m) {
    if (m > 0) factorial *= m;
    coeff[m] = derivative_at_right(chain.profiles[m], 1) / factorial;
  }
  return TimeSeries::sample(grid, [&coeff](double t) {
    double acc = 0.0;
    for (auto it = coeff.rbegin(); it != coeff.rend(); ++it) acc = acc * t + *it;
    return acc;
  });
}

std::vector<SpaceProfile> source_traces_at_start(const Field& f, int count) {
  std::vector<SpaceProfile> out;
  for (int m = 0; m < count; ++m) out.push_back(m == 0 ? f.row_profile(0) : diff_t(f, m).row_profile(0));
  return out;
}

}  // namespace kdvinv
