#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kdvinv/forward_solver.hpp"
#include "kdvinv/mesh.hpp"

namespace kdvinv {

// Integral observation weight omega together with the boundary derivatives
// that enter the measurement identity and the profile b omega' + omega'''.
struct Weight {
  SpaceProfile profile;
  SpaceProfile dprime;  // omega'
  double dprime_at_R = 0.0;
  double dsecond_at_0 = 0.0;
  double dsecond_at_R = 0.0;
  SpaceProfile combo;  // b omega' + omega'''
  double b = 0.0;
  // True when the boundary derivatives come from one-sided stencils rather
  // than analytic values supplied by the caller.
  bool from_stencils = true;

  static Weight from_profile(const SpaceProfile& omega, double b);
  static Weight with_derivatives(const SpaceProfile& omega, double b, double dprime_at_R, double dsecond_at_0,
                                 double dsecond_at_R);

  // Largest of |omega(0)|, |omega'(0)|, |omega(R)|.
  double boundary_defect() const;
  bool satisfies_boundary_conditions(double tol = 1e-8) const { return boundary_defect() <= tol; }
  // Max difference between the stored combo and one recomputed from the profile.
  double combo_defect() const;
};

// int_0^R u(t,x) w(x) dx at every time level.
TimeSeries weighted_rows(const Field& u, const SpaceProfile& w);

// q(t) = int_0^R u(t,x) omega(x) dx.
TimeSeries q_of(const Field& u, const Weight& w);

// Right side r(t;u,omega,m) of the identity q^(m+1) = r built from the data
// of the linear problem u solves.
TimeSeries r_of(const Field& u, const Weight& w, int m, const LinearProblem& data);

// psi(t) = int_0^R h(t,x) omega(x) dx.
TimeSeries psi_of(const Field& h, const Weight& w);

// Determinant | psi1  omega1'(R) ; psi2  omega2'(R) |.
TimeSeries delta_of(const TimeSeries& psi1, const TimeSeries& psi2, const Weight& w1, const Weight& w2);

// Smallest |s(t)| over the samples, or 0 when s changes sign between two
// consecutive samples.
double min_abs_with_crossing(const TimeSeries& s);

// Names of the hypotheses a scenario can violate.
namespace hypothesis {
inline constexpr const char* weight_conditions = "weight_conditions";
inline constexpr const char* nondegeneracy = "nondegeneracy";
inline constexpr const char* measurement_compatibility = "measurement_compatibility";
inline constexpr const char* boundary_compatibility = "boundary_compatibility";
}  // namespace hypothesis

enum class ProblemKind { two_measurements = 1, source_amplitude = 2, boundary_flux = 3, forward = 4 };

struct CompatResidual {
  std::string quantity;  // e.g. "phi_1", "mu0", "nu1"
  int order = 0;         // m
  double residual = 0.0;
  double tolerance = 0.0;
  bool ok = true;
};

struct PreconditionReport {
  int problem_id = 0;
  std::vector<bool> omega_ok;
  std::vector<double> omega_defects;
  std::vector<CompatResidual> compat;
  std::optional<double> delta_min;
  std::string delta_kind = "none";
  double delta_floor = 1e-8;
  double smallness_value = 0.0;
  std::string smallness_kind;
  bool weight_derivatives_from_stencils = false;
  // Hard failures block inversion; warnings are reported only.
  std::vector<std::string> failures;
  std::vector<std::string> warnings;

  bool hard_ok() const { return failures.empty(); }
  bool compat_ok() const;
  bool all_ok() const { return hard_ok() && warnings.empty(); }
};

struct PreconditionOptions {
  double delta_floor = 1e-8;
  // Compatibility residuals are accepted up to
  // compat_tol_factor * (dx^2 + dt^2) * (1 + |reference value|).
  double compat_tol_factor = 10.0;
  std::optional<double> compat_tol_override;
};

struct Scenario;

PreconditionReport check_preconditions(const Scenario& s, ProblemKind problem, const PreconditionOptions& opts = {});

}  // namespace kdvinv
