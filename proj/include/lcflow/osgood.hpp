#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "lcflow/errors.hpp"

namespace lcflow {

using Modulus = std::function<double(double)>;

/// mu(r) = r (1 + L) (1 + ln(1 + L)), L = ln(1 + 1/r); mu(0) = 0.
inline double osgood_mu(double r) {
  if (std::isnan(r) || r < 0.0) throw DomainError("mu needs r >= 0");
  if (r == 0.0) return 0.0;
  if (std::isinf(r)) return r;
  const double big_l = r < 1.0 ? -std::log(r) + std::log1p(r) : std::log1p(1.0 / r);
  return r * (1.0 + big_l) * (1.0 + std::log1p(big_l));
}

/// r (1 + ln(1 + 1/r))^2: integrable reciprocal at 0 (not an Osgood modulus).
inline double log_squared_modulus(double r) {
  if (std::isnan(r) || r < 0.0) throw DomainError("modulus needs r >= 0");
  if (r == 0.0) return 0.0;
  const double big_l = r < 1.0 ? -std::log(r) + std::log1p(r) : std::log1p(1.0 / r);
  return r * (1.0 + big_l) * (1.0 + big_l);
}

struct CertificateRow {
  double eps = 0.0;
  double integral = 0.0;
  double increment = 0.0;  // I(eps_k) - I(eps_{k-1}); 0 for the first row
  double error_estimate = 0.0;
};

struct Certificate {
  std::vector<CertificateRow> rows;
  bool strictly_increasing = false;
};

/// I(eps) = integral_eps^1 dr / mu(r), computed after r = exp(-exp(s)):
/// I = integral_{-inf}^{ln ln(1/eps)} r e^s / mu(r) ds.
inline double osgood_integral(double eps, const Modulus& mu, double* error = nullptr) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0, 1)");
  const double upper = std::log(-std::log(eps));
  auto integrand = [&mu](double s) {
    const double es = std::exp(s);
    const double r = std::exp(-es);
    if (r == 0.0) return 0.0;
    return r * es / mu(r);
  };
  double err = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, -std::numeric_limits<double>::infinity(), upper, 25, 1e-14, &err, &l1);
  if (!std::isfinite(value) || err > 1e-9 * std::max(1.0, std::abs(value))) {
    throw NumericError("quadrature of 1/mu did not converge (error estimate " + std::to_string(err) + ")");
  }
  if (error) *error = err;
  return value;
}

/// Integrals over a decreasing list of eps with their increments.
inline Certificate osgood_divergence_certificate(const std::vector<double>& eps_list,
                                                 const Modulus& mu = osgood_mu) {
  Certificate c;
  c.strictly_increasing = true;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (k > 0 && !(eps_list[k] < eps_list[k - 1])) throw DomainError("eps list must be decreasing");
    CertificateRow row;
    row.eps = eps_list[k];
    row.integral = osgood_integral(row.eps, mu, &row.error_estimate);
    if (k > 0) {
      row.increment = row.integral - c.rows.back().integral;
      if (!(row.increment > 0.0)) c.strictly_increasing = false;
    }
    c.rows.push_back(row);
  }
  return c;
}

struct ComparisonSolution {
  std::vector<double> t;
  std::vector<double> y;
  bool blew_up = false;
  double blow_up_time = std::numeric_limits<double>::infinity();
};

/// y' = c_fit F(t) mu(y), F linear between samples. Each sample interval is integrated
/// separately (dopri5, rtol 1e-12) so the kinks of F are never stepped over.
inline ComparisonSolution comparison_ode(const std::vector<double>& t, const std::vector<double>& f, double y0,
                                         double c_fit, const Modulus& mu = osgood_mu) {
  if (t.size() != f.size() || t.empty()) throw DomainError("time and F samples must align");
  if (!(y0 >= 0.0)) throw DomainError("y0 must be >= 0");
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!(f[k] >= 0.0)) throw DomainError("F must be nonnegative");
    if (k > 0 && !(t[k] > t[k - 1])) throw DomainError("sample times must increase");
  }
  ComparisonSolution out;
  out.t = t;
  out.y.assign(t.size(), y0);
  if (y0 == 0.0) return out;  // mu(0) = 0: the zero solution, with no roundoff drift

  namespace odeint = boost::numeric::odeint;
  using state_type = std::vector<double>;
  constexpr double overflow = 1e300;
  auto stepper = odeint::make_controlled(1e-13, 1e-12, odeint::runge_kutta_dopri5<state_type>());
  state_type y{y0};
  for (std::size_t k = 1; k < t.size(); ++k) {
    const double t0 = t[k - 1], t1 = t[k], f0 = f[k - 1], f1 = f[k];
    auto rhs = [&](const state_type& x, state_type& dxdt, double tt) {
      const double w = (tt - t0) / (t1 - t0);
      const double ff = (1.0 - w) * f0 + w * f1;
      const double yy = std::max(x[0], 0.0);
      dxdt[0] = std::isfinite(yy) && yy < overflow ? c_fit * ff * mu(yy) : std::numeric_limits<double>::infinity();
    };
    try {
      odeint::integrate_adaptive(stepper, rhs, y, t0, t1, (t1 - t0) / 16.0);
    } catch (const std::exception&) {
      y[0] = std::numeric_limits<double>::infinity();
    }
    if (!std::isfinite(y[0]) || y[0] >= overflow) {
      out.blew_up = true;
      out.blow_up_time = t1;
      for (std::size_t j = k; j < t.size(); ++j) out.y[j] = std::numeric_limits<double>::infinity();
      break;
    }
    out.y[k] = y[0];
  }
  return out;
}

/// Samples of the uniqueness functional and the bound function along a twin run.
struct OsgoodTrace {
  std::vector<double> t;
  std::vector<double> phi;
  std::vector<double> f;
  double gamma = 1.0 / 6.0;
};

struct MasterReport {
  bool holds = false;
  double c_fit = 1.0;
  double max_violation = 0.0;                // max_m LHS_m - RHS_m at the reported constant
  std::optional<std::size_t> first_violation;  // index of the first sample that fails
  std::vector<double> lhs, rhs;
};

/// Smallest C >= 1 with
///   Phi(t_m) + gamma int_0^{t_m} D <= Phi(0) + C int_0^{t_m} F mu(Phi) + tol for every m
/// (trapezoid rule in time). With a cap, constants above it make the check fail.
inline MasterReport check_master_inequality(const OsgoodTrace& trace, const std::vector<double>& frak_d,
                                            std::optional<double> c_cap = std::nullopt, double tol = 0.0,
                                            const Modulus& mu = osgood_mu) {
  const std::size_t n = trace.t.size();
  if (trace.phi.size() != n || trace.f.size() != n || frak_d.size() != n || n == 0) {
    throw DomainError("trace samples must align");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(trace.phi[k] >= 0.0)) throw DomainError("Phi must be nonnegative");
    if (k > 0 && !(trace.t[k] > trace.t[k - 1])) throw DomainError("samples must be time ordered");
  }
  std::vector<double> lhs(n), growth(n);
  double int_d = 0.0, int_g = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) {
      const double h = trace.t[k] - trace.t[k - 1];
      int_d += 0.5 * h * (frak_d[k] + frak_d[k - 1]);
      int_g += 0.5 * h * (trace.f[k] * mu(trace.phi[k]) + trace.f[k - 1] * mu(trace.phi[k - 1]));
    }
    lhs[k] = trace.phi[k] + trace.gamma * int_d;
    growth[k] = int_g;
  }
  const double base = trace.phi[0];
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> needed(n, 0.0);
  double c_req = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double excess = lhs[k] - base - tol;
    if (excess <= 0.0) continue;
    needed[k] = growth[k] > 0.0 ? excess / growth[k] : inf;
    c_req = std::max(c_req, needed[k]);
  }
  MasterReport rep;
  rep.c_fit = c_req;
  const double c_used = c_cap ? std::min(c_req, *c_cap) : c_req;
  rep.holds = std::isfinite(c_req) && (!c_cap || c_req <= *c_cap);
  rep.lhs = lhs;
  rep.rhs.resize(n);
  rep.max_violation = -inf;
  for (std::size_t k = 0; k < n; ++k) {
    rep.rhs[k] = base + (growth[k] > 0.0 ? c_used * growth[k] : 0.0) + tol;
    rep.max_violation = std::max(rep.max_violation, lhs[k] - rep.rhs[k]);
    if (!rep.first_violation && needed[k] > c_used) rep.first_violation = k;
  }
  return rep;
}

}  // namespace lcflow
