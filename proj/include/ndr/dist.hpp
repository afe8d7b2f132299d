// ndrstats
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ndr/errors.hpp"
#include "ndr/params.hpp"

namespace ndr {

// Intensity correlation induced by a field correlation: rho = rho_z^2.
double intensity_correlation(double rho_z);

// Joint density of the correlated exponential pair (the k = 1 case).
double joint_pdf_exponential(const GammaPairParams& p, double x1, double x2);

// Joint density of the correlated gamma pair. rho > 0 requires integer k
// (the kernel's Bessel order is k - 1); rho = 0 accepts any real k >= 1.
double joint_pdf_gamma(const GammaPairParams& p, double x1, double x2);

// Marginal Gamma(k, sigma) density.
double gamma_marginal_pdf(const GammaPairParams& p, double x);

// Density of the ratio Z = X1 / X2, z > 0.
double ratio_pdf(const GammaPairParams& p, double z);

// Density of the normalized dissimilarity ratio D = |X1 - X2| / (X1 + X2)
// on [0, 1].
double ndr_pdf(const GammaPairParams& p, double r);

// Density of the signed auxiliary variable D' = (Z - 1) / (Z + 1) on (-1, 1);
// even in r', and ndr_pdf(r) = 2 ndr_transform_pdf(r) for r in [0, 1).
double ndr_transform_pdf(const GammaPairParams& p, double r_prime);

// The three closed forms of <D^m>. All agree; they differ in the
// hypergeometric argument (f1 at -rho/(1-rho), f2 and f3 at rho).
enum class MomentForm { f1, f2, f3 };

double ndr_moment(const GammaPairParams& p, int m, MomentForm form);
// Form picked by rho: f2 for rho <= 0.5, f1 above (its argument is mapped
// back into (0, 1) by the Pfaff transformation).
double ndr_moment(const GammaPairParams& p, int m);

struct MeanBand {
  double mean;
  double half_band;  // half of the standard deviation of D
};
MeanBand ndr_mean_band(const GammaPairParams& p);

}  // namespace ndr
