// ndrstats
// SPDX-License-Identifier: Apache-2.0
#include "ndr/dist.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ndr/specfun.hpp"

namespace ndr {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Below this the correlated kernels switch to the exact independent product
// form; the rho^((k-1)/2) pole is removable and its limit is that product.
constexpr double kRhoIndependent = 1e-12;

void require_density_shape(const GammaPairParams& p, const char* caller) {
  validate(p);
  if (!(p.k >= 1.0))
    throw DomainError(std::string(caller) + ": requires k >= 1");
}

}  // namespace

double intensity_correlation(double rho_z) {
  if (!(rho_z >= 0.0) || !(rho_z < 1.0))
    throw DomainError("intensity_correlation: requires 0 <= rho_z < 1");
  return rho_z * rho_z;
}

double gamma_marginal_pdf(const GammaPairParams& p, double x) {
  require_density_shape(p, "gamma_marginal_pdf");
  if (!(x >= 0.0)) throw DomainError("gamma_marginal_pdf: requires x >= 0");
  if (x == 0.0) return p.k == 1.0 ? 1.0 / p.sigma : 0.0;
  double ln_f = -x / p.sigma - ln_gamma(p.k) - p.k * std::log(p.sigma);
  if (p.k != 1.0) ln_f += (p.k - 1.0) * std::log(x);
  return std::exp(ln_f);
}

double joint_pdf_exponential(const GammaPairParams& p, double x1, double x2) {
  validate(p);
  if (p.k != 1.0) throw DomainError("joint_pdf_exponential: requires k = 1");
  if (!(x1 >= 0.0) || !(x2 >= 0.0))
    throw DomainError("joint_pdf_exponential: requires x1 >= 0, x2 >= 0");
  const double s = p.sigma;
  if (p.rho < kRhoIndependent)
    return std::exp(-(x1 + x2) / s) / (s * s);
  const double om = 1.0 - p.rho;
  const double u = 2.0 * std::sqrt(p.rho) * std::sqrt(x1) * std::sqrt(x2) / (s * om);
  double ln_f = -std::log(s * s * om) - (x1 + x2) / (s * om);
  if (u > 0.0) ln_f += ln_bessel_i(0, u);
  return std::exp(ln_f);
}

double joint_pdf_gamma(const GammaPairParams& p, double x1, double x2) {
  require_density_shape(p, "joint_pdf_gamma");
  if (!(x1 >= 0.0) || !(x2 >= 0.0))
    throw DomainError("joint_pdf_gamma: requires x1 >= 0, x2 >= 0");
  if (p.rho < kRhoIndependent)
    return gamma_marginal_pdf(p, x1) * gamma_marginal_pdf(p, x2);
  if (!is_integer_shape(p.k))
    throw DomainError(
        "joint_pdf_gamma: rho > 0 requires integer k (Bessel order k - 1)");
  const int k = static_cast<int>(std::lround(p.k));
  if (k > 1 && (x1 == 0.0 || x2 == 0.0)) return 0.0;
  const double om = 1.0 - p.rho;
  const double son = p.sigma * om;
  const double u = 2.0 * std::sqrt(p.rho) * std::sqrt(x1) * std::sqrt(x2) / son;
  double ln_f = -ln_gamma(k) - (k + 1.0) * std::log(p.sigma) - std::log(om) -
                (x1 + x2) / son;
  if (k > 1)
    ln_f += 0.5 * (k - 1.0) *
            (std::log(x1) + std::log(x2) - std::log(p.rho));
  if (u > 0.0) ln_f += ln_bessel_i(k - 1, u);
  return std::exp(ln_f);
}

double ratio_pdf(const GammaPairParams& p, double z) {
  require_density_shape(p, "ratio_pdf");
  if (!(z > 0.0) || !std::isfinite(z))
    throw DomainError("ratio_pdf: requires finite z > 0");
  const double zm = z - 1.0;
  // equals (z+1)^2 - 4 rho z; stays positive and cancellation-free as rho -> 1
  const double bracket = zm * zm + 4.0 * z * (1.0 - p.rho);
  double ln_f = p.k * std::log1p(-p.rho) + std::log1p(z) -
                ln_beta(p.k, p.k) - (p.k + 0.5) * std::log(bracket);
  if (p.k != 1.0) ln_f += (p.k - 1.0) * std::log(z);
  return std::exp(ln_f);
}

namespace {

// ln density of the signed auxiliary variable at |r'| < 1 (even in r').
double ln_ndr_transform(const GammaPairParams& p, double r) {
  double ln_f = p.k * std::log1p(-p.rho) - ln_beta(p.k, p.k) -
                (2.0 * p.k - 1.0) * kLn2 -
                (p.k + 0.5) * std::log((1.0 - p.rho) + p.rho * r * r);
  if (p.k != 1.0)
    ln_f += (p.k - 1.0) * (std::log1p(-r) + std::log1p(r));
  return ln_f;
}

}  // namespace

double ndr_pdf(const GammaPairParams& p, double r) {
  require_density_shape(p, "ndr_pdf");
  if (!(r >= 0.0) || !(r <= 1.0))
    throw DomainError("ndr_pdf: requires 0 <= r <= 1");
  if (r == 1.0 && p.k > 1.0) return 0.0;
  return std::exp(ln_ndr_transform(p, r) + kLn2);
}

double ndr_transform_pdf(const GammaPairParams& p, double r_prime) {
  require_density_shape(p, "ndr_transform_pdf");
  if (!(r_prime > -1.0) || !(r_prime < 1.0))
    throw DomainError("ndr_transform_pdf: requires -1 < r_prime < 1");
  return std::exp(ln_ndr_transform(p, std::abs(r_prime)));
}

double ndr_moment(const GammaPairParams& p, int m, MomentForm form) {
  validate(p);
  if (m < 0) throw DomainError("ndr_moment: requires m >= 0");
  const double k = p.k;
  const double rho = p.rho;
  const double mh = 0.5 * (m + 1.0);
  double ln_pref = ln_beta(mh, k) - ln_beta(k, k) - (2.0 * k - 1.0) * kLn2;
  const char* name = "f1";
  double arg = rho == 0.0 ? 0.0 : -rho / (1.0 - rho);
  double a = k + 0.5;
  double b = mh;
  switch (form) {
    case MomentForm::f1:
      ln_pref += -0.5 * std::log1p(-rho);
      break;
    case MomentForm::f2:
      name = "f2";
      arg = rho;
      a = 0.5 * m;
      ln_pref += 0.5 * m * std::log1p(-rho);
      break;
    case MomentForm::f3:
      name = "f3";
      arg = rho;
      a = k;
      b = k + 0.5;
      ln_pref += k * std::log1p(-rho);
      break;
  }
  double f;
  try {
    f = hyp2f1(a, b, k + mh, arg);
  } catch (const ConvergenceError& e) {
    throw ConvergenceError("ndr_moment: form " + std::string(name) +
                               " at argument " + std::to_string(arg) + ": " +
                               e.what(),
                           e.residual(), e.steps());
  }
  return std::exp(ln_pref) * f;
}

double ndr_moment(const GammaPairParams& p, int m) {
  return ndr_moment(p, m, p.rho <= 0.5 ? MomentForm::f2 : MomentForm::f1);
}

MeanBand ndr_mean_band(const GammaPairParams& p) {
  const double mean = ndr_moment(p, 1);
  const double m2 = ndr_moment(p, 2);
  double var = m2 - mean * mean;
  if (var < 0.0) var = 0.0;  // eps-negative guard as rho -> 1
  return {mean, 0.5 * std::sqrt(var)};
}

}  // namespace ndr
