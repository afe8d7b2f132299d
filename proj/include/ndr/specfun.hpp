// ndrstats
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ndr/errors.hpp"

namespace ndr {

// Termination policy for the series evaluations in this module.
struct SeriesControl {
  double rel_tol = 1e-14;  // in (0, 1e-6)
  int max_terms = 10000;   // >= 100
};

// ln Gamma(x), x > 0.
double ln_gamma(double x);

// ln B(a, b) and B(a, b), a > 0, b > 0; symmetric in (a, b).
double ln_beta(double a, double b);
double beta(double a, double b);

// e^-x I_nu(x) for integer nu >= 0, x >= 0. Lies in [0, 1].
double bessel_i_scaled(int nu, double x);

// ln I_nu(x) = x + ln(bessel_i_scaled(nu, x)). Rejects x = 0 with nu >= 1.
double ln_bessel_i(int nu, double x);

// Gauss hypergeometric 2F1(a, b; c; z) for c > 0, z < 1; symmetric in (a, b).
double hyp2f1(double a, double b, double c, double z, SeriesControl ctl = {});

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

}  // namespace ndr
