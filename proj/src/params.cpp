// ndrstats
// SPDX-License-Identifier: Apache-2.0
#include "ndr/params.hpp"

#include <cmath>

#include "ndr/errors.hpp"

namespace ndr {

void validate(const FieldParams& fp) {
  if (!(fp.sigma_z > 0.0) || !std::isfinite(fp.sigma_z))
    throw DomainError("FieldParams: requires finite sigma_z > 0");
  if (!(fp.rho_z >= 0.0) || !(fp.rho_z < 1.0))
    throw DomainError("FieldParams: requires 0 <= rho_z < 1");
}

void validate(const GammaPairParams& p) {
  if (!(p.k > 0.0) || !std::isfinite(p.k))
    throw DomainError("GammaPairParams: requires finite k > 0");
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma))
    throw DomainError("GammaPairParams: requires finite sigma > 0");
  if (!(p.rho >= 0.0) || !(p.rho < 1.0))
    throw DomainError("GammaPairParams: requires 0 <= rho < 1");
}

FieldParams field_params(const GammaPairParams& p) {
  validate(p);
  return {std::sqrt(0.5 * p.sigma), std::sqrt(p.rho)};
}

GammaPairParams gamma_params(const FieldParams& fp, double k) {
  validate(fp);
  GammaPairParams p{k, 2.0 * fp.sigma_z * fp.sigma_z, fp.rho_z * fp.rho_z};
  validate(p);
  return p;
}

bool is_integer_shape(double k) {
  return std::isfinite(k) && std::abs(k - std::round(k)) <= 1e-9 && k >= 0.5;
}

}  // namespace ndr
