// ndrstats
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace ndr {

// Parameters of the underlying pair of correlated circular complex Gaussians.
struct FieldParams {
  double sigma_z;  // per-component standard deviation, > 0
  double rho_z;    // field correlation, in [0, 1)
};

// Parameters of the correlated gamma pair. The levels are linked by
// sigma = 2 sigma_z^2 and rho = rho_z^2; each marginal is Gamma(k, sigma)
// with mean k sigma and variance k sigma^2.
struct GammaPairParams {
  double k;      // shape, > 0; densities need k >= 1, sampling needs integer k
  double sigma;  // scale, > 0
  double rho;    // intensity correlation, in [0, 1)
};

void validate(const FieldParams& fp);
void validate(const GammaPairParams& p);

FieldParams field_params(const GammaPairParams& p);
GammaPairParams gamma_params(const FieldParams& fp, double k);

// Whether k is close enough to an integer for the sum-of-exponentials sampler.
bool is_integer_shape(double k);

}  // namespace ndr
