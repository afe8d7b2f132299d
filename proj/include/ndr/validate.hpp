// ndrstats
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ndr/dist.hpp"
#include "ndr/errors.hpp"
#include "ndr/params.hpp"
#include "ndr/sampling.hpp"

namespace ndr {

// Density-normalized over in-range samples: sum(density * width) = 1.
// Out-of-range samples are counted, never silently dropped.
struct Histogram {
  std::vector<double> edges;  // strictly increasing, size bins + 1
  std::vector<std::size_t> counts;
  std::vector<double> density;
  std::size_t n_total = 0;
  std::size_t below_range = 0;
  std::size_t above_range = 0;
};

// 2-D analogue on [x_edges] x [y_edges], row-major cell index ix * ny + iy.
// Out-of-range samples are pooled into the last cell's count; the fit
// statistic excludes that cell.
struct Histogram2D {
  std::vector<double> x_edges;
  std::vector<double> y_edges;
  std::vector<std::size_t> counts;
  std::vector<double> density;
  std::size_t n_total = 0;
  std::size_t out_of_range = 0;
  std::size_t nx() const { return x_edges.size() - 1; }
  std::size_t ny() const { return y_edges.size() - 1; }
};

struct FitReport {
  double sup_distance = 0.0;  // max over bins of |empirical - analytic at center|
  double chi2_stat = 0.0;     // Pearson chi-square over bins with expected >= 5
  std::size_t dof = 0;
  double p_value = 1.0;
  double alpha = 0.01;
  bool pass = false;
};

struct MomentReport {
  int m = 0;
  double analytic_f1 = 0.0;
  double analytic_f2 = 0.0;
  double analytic_f3 = 0.0;
  double mc_estimate = 0.0;
  double mc_std_error = 0.0;
  bool mc_within_4se = false;  // |mc_estimate - analytic_f2| <= 4 mc_std_error + 1e-12
};

// Pearson product-moment correlation; requires n >= 2 and nonzero variance
// in each coordinate.
double empirical_correlation(const std::vector<IntensityPair>& pairs);
double empirical_correlation(const double* x, const double* y, std::size_t n,
                             std::size_t stride);
double empirical_correlation(const SampleBatch& batch);  // two-column batches

Histogram build_histogram(const std::vector<double>& samples, std::size_t bins,
                          double lo, double hi);
Histogram build_histogram(const double* samples, std::size_t n,
                          std::size_t stride, std::size_t bins, double lo,
                          double hi);

// Bin probabilities come from per-bin quadrature once bins are wider than
// 0.02, midpoint density otherwise; mass outside the histogram range enters
// the statistic as one pooled cell when its expected count reaches 5.
FitReport compare_to_pdf(const Histogram& h,
                         const std::function<double(double)>& pdf,
                         double alpha = 0.01);

double chi_square_p_value(double chi2, std::size_t dof);

// Kolmogorov-Smirnov sup distance between the samples and the uniform
// [0, 1] CDF.
double ks_statistic_uniform(std::vector<double> samples);

// One row per order: the three closed forms plus the Monte-Carlo estimate
// of <D^m> from n fresh NDR samples. Orders are restricted to 0..8.
std::vector<MomentReport> moment_table(const GammaPairParams& p,
                                       const std::vector<int>& orders,
                                       std::size_t n, SeedSpec seed);

struct CorrCurveRow {
  double rho_z;
  double empirical_corr;
  double theory_rho_z2;
};
std::vector<CorrCurveRow> figure_corr_curve(const std::vector<double>& rho_z_grid,
                                            std::size_t n, SeedSpec seed,
                                            double sigma_z = 1.0);

struct NdrVsRhoRow {
  double k;
  double rho;
  double mean;
  double lo;  // mean - half_band
  double hi;  // mean + half_band
};
std::vector<NdrVsRhoRow> figure_ndr_vs_rho(const std::vector<double>& k_set,
                                           const std::vector<double>& rho_grid);

struct MomentsVsKRow {
  double k;
  std::vector<double> moments;  // one per requested order
};
std::vector<MomentsVsKRow> figure_moments_vs_k(const std::vector<double>& k_grid,
                                               const std::vector<int>& m_set,
                                               double rho = 0.0);

// hi <= 0 selects the default range k sigma + 10 sqrt(k) sigma per axis.
struct GridSpec {
  std::size_t bins_x = 50;
  std::size_t bins_y = 50;
  double hi_x = 0.0;
  double hi_y = 0.0;
};

struct JointDensityResult {
  Histogram2D hist;
  std::vector<double> analytic;  // joint pdf at cell centers, hist layout
  FitReport fit;
  Histogram marginal_x1;
  Histogram marginal_x2;
  std::vector<double> marginal_analytic;  // gamma marginal at x1 bin centers
};

// Samples n gamma pairs, bins them, and fits against the closed-form joint
// density (the exponential form when k = 1). Cell probabilities use per-cell
// tensor Gauss-Legendre quadrature.
JointDensityResult joint_density_check(const GammaPairParams& p, GridSpec grid,
                                       std::size_t n, SeedSpec seed);

}  // namespace ndr
