// ndrstats
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <algorithm>

#include "ndr/errors.hpp"

namespace ndr {

struct QuadratureResult {
  double value;
  double error_estimate;
  int subdivisions;
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights (QUADPACK dqk15).
inline constexpr double kWG[4] = {
    .129484966168869693270611432679082, .27970539148927666790146777142378,
    .381830050505118944950369775488975, .417959183673469387755102040816327};
inline constexpr double kXGK[8] = {
    .991455371120812639206854697526329, .949107912342758524526189684047851,
    .864864423359769072789712788640926, .741531185599394439863864773280788,
    .58608723546769113029414483825873,  .405845151377397166906606412076961,
    .207784955007898467600689403773245, 0.};
inline constexpr double kWGK[8] = {
    .02293532201052922496373200805897,  .063092092629978553290700663189204,
    .104790010322250183839876322541518, .140653259715525918745189590510238,
    .16900472663926790282658342659855,  .190350578064785409913256402421014,
    .204432940075298892414161999234649, .209482141084727828012999174891714};

template <class F>
void gk15(F& f, double a, double b, double* result, double* err) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double res_g = fc * kWG[3];
  double res_k = fc * kWGK[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXGK[j];
    const double fsum = f(c - dx) + f(c + dx);
    res_k += kWGK[j] * fsum;
    if (j % 2 == 1) res_g += kWG[j / 2] * fsum;
  }
  *result = res_k * h;
  *err = std::abs((res_k - res_g) * h);
}

template <class F>
double adapt(F& f, double a, double b, double tol, double val, double err,
             int depth, double* err_acc, int* splits) {
  if (err <= tol) {
    *err_acc += err;
    return val;
  }
  if (depth > 60)
    throw ConvergenceError("integrate: interval refinement stalled", err, depth);
  const double mid = 0.5 * (a + b);
  double lv, le, rv, re;
  gk15(f, a, mid, &lv, &le);
  gk15(f, mid, b, &rv, &re);
  ++*splits;
  return adapt(f, a, mid, 0.5 * tol, lv, le, depth + 1, err_acc, splits) +
         adapt(f, mid, b, 0.5 * tol, rv, re, depth + 1, err_acc, splits);
}

}  // namespace detail

// Adaptive Gauss-Kronrod integration of f over the finite interval [a, b].
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol = 1e-10,
                           double rel_tol = 1e-12) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("integrate: requires finite a < b");
  if (!(abs_tol > 0.0) || !(rel_tol >= 0.0))
    throw DomainError("integrate: requires abs_tol > 0, rel_tol >= 0");
  double val, err;
  detail::gk15(f, a, b, &val, &err);
  const double tol = std::max(abs_tol, rel_tol * std::abs(val));
  double err_acc = 0.0;
  int splits = 0;
  const double total = detail::adapt(f, a, b, tol, val, err, 0, &err_acc, &splits);
  return {total, err_acc, splits};
}

}  // namespace ndr
