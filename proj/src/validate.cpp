// ndrstats
// SPDX-License-Identifier: Apache-2.0
#include "ndr/validate.hpp"

#include <algorithm>
#include <cmath>

#include "ndr/quadrature.hpp"
#include "ndr/specfun.hpp"

namespace ndr {

namespace {

// Expected counts below this are left out of the chi-square statistic.
constexpr double kMinExpected = 5.0;

// Streams of distinct sweep points are spaced far enough apart that their
// internal chunk streams can never collide.
constexpr std::uint64_t kStreamSpacing = std::uint64_t{1} << 20;

// Gauss-Legendre 5-point rule on [-1, 1].
constexpr double kGL5X[5] = {-0.906179845938663992797626878299,
                             -0.538469310105683091036314420700, 0.0,
                             0.538469310105683091036314420700,
                             0.906179845938663992797626878299};
constexpr double kGL5W[5] = {0.236926885056189087514264040720,
                             0.478628670499366468041291514836,
                             0.568888888888888888888888888889,
                             0.478628670499366468041291514836,
                             0.236926885056189087514264040720};

}  // namespace

double empirical_correlation(const double* x, const double* y, std::size_t n,
                             std::size_t stride) {
  if (n < 2) throw DomainError("empirical_correlation: requires n >= 2");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i * stride];
    my += y[i * stride];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i * stride] - mx;
    const double dy = y[i * stride] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw DomainError("empirical_correlation: degenerate variance");
  return sxy / std::sqrt(sxx * syy);
}

double empirical_correlation(const std::vector<IntensityPair>& pairs) {
  static_assert(sizeof(IntensityPair) == 2 * sizeof(double));
  if (pairs.size() < 2)
    throw DomainError("empirical_correlation: requires n >= 2");
  return empirical_correlation(&pairs[0].x1, &pairs[0].x2, pairs.size(), 2);
}

double empirical_correlation(const SampleBatch& batch) {
  if (batch.columns != 2)
    throw DomainError("empirical_correlation: requires a two-column batch");
  return empirical_correlation(batch.data.data(), batch.data.data() + 1,
                               batch.rows(), 2);
}

Histogram build_histogram(const double* samples, std::size_t n,
                          std::size_t stride, std::size_t bins, double lo,
                          double hi) {
  if (bins < 1) throw DomainError("build_histogram: requires bins >= 1");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw DomainError("build_histogram: requires finite lo < hi");
  if (n == 0) throw DomainError("build_histogram: empty sample set");
  Histogram h;
  h.n_total = n;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = samples[i * stride];
    if (v < lo) {
      ++h.below_range;
    } else if (v > hi) {
      ++h.above_range;
    } else {
      std::size_t b = static_cast<std::size_t>((v - lo) * scale);
      if (b >= bins) b = bins - 1;  // v == hi lands in the last bin
      ++h.counts[b];
    }
  }
  const std::size_t in_range = n - h.below_range - h.above_range;
  if (in_range == 0)
    throw DomainError("build_histogram: no samples inside the range");
  h.density.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double width = h.edges[b + 1] - h.edges[b];
    h.density[b] =
        static_cast<double>(h.counts[b]) / (static_cast<double>(in_range) * width);
  }
  return h;
}

Histogram build_histogram(const std::vector<double>& samples, std::size_t bins,
                          double lo, double hi) {
  if (samples.empty()) throw DomainError("build_histogram: empty sample set");
  return build_histogram(samples.data(), samples.size(), 1, bins, lo, hi);
}

double chi_square_p_value(double chi2, std::size_t dof) {
  if (!(chi2 >= 0.0)) throw DomainError("chi_square_p_value: requires chi2 >= 0");
  if (dof < 1) throw DomainError("chi_square_p_value: requires dof >= 1");
  return gamma_q(0.5 * static_cast<double>(dof), 0.5 * chi2);
}

FitReport compare_to_pdf(const Histogram& h,
                         const std::function<double(double)>& pdf,
                         double alpha) {
  const std::size_t bins = h.counts.size();
  if (bins == 0 || h.n_total == 0)
    throw DomainError("compare_to_pdf: empty histogram");
  FitReport report;
  report.alpha = alpha;
  std::vector<double> prob(bins);
  double prob_sum = 0.0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = h.edges[b];
    const double hi = h.edges[b + 1];
    const double width = hi - lo;
    const double center = 0.5 * (lo + hi);
    report.sup_distance =
        std::max(report.sup_distance, std::abs(h.density[b] - pdf(center)));
    prob[b] = width > 0.02 ? integrate(pdf, lo, hi, 1e-10, 1e-9).value
                           : pdf(center) * width;
    prob_sum += prob[b];
  }
  const double n = static_cast<double>(h.n_total);
  std::size_t used = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double expected = n * prob[b];
    if (expected < kMinExpected) continue;
    const double observed = static_cast<double>(h.counts[b]);
    report.chi2_stat += (observed - expected) * (observed - expected) / expected;
    ++used;
  }
  // mass outside the histogram range enters as one pooled cell
  const double tail_expected = n * std::max(0.0, 1.0 - prob_sum);
  if (tail_expected >= kMinExpected) {
    const double observed = static_cast<double>(h.below_range + h.above_range);
    report.chi2_stat +=
        (observed - tail_expected) * (observed - tail_expected) / tail_expected;
    ++used;
  }
  if (used < 2)
    throw DomainError("compare_to_pdf: fewer than two cells reach the expected-count rule");
  report.dof = used - 1;
  report.p_value = chi_square_p_value(report.chi2_stat, report.dof);
  report.pass = report.p_value >= alpha;
  return report;
}

double ks_statistic_uniform(std::vector<double> samples) {
  if (samples.empty()) throw DomainError("ks_statistic_uniform: empty sample set");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double u = samples[i];
    if (!(u >= 0.0) || !(u <= 1.0))
      throw DomainError("ks_statistic_uniform: sample outside [0, 1]");
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - u);
    d = std::max(d, u - static_cast<double>(i) / n);
  }
  return d;
}

std::vector<MomentReport> moment_table(const GammaPairParams& p,
                                       const std::vector<int>& orders,
                                       std::size_t n, SeedSpec seed) {
  for (int m : orders)
    if (m < 0 || m > 8)
      throw DomainError("moment_table: orders restricted to 0..8");
  const SampleBatch batch = sample_batch(p, n, seed, SampleKind::ndr);
  const double nd = static_cast<double>(batch.rows());
  std::vector<MomentReport> table;
  table.reserve(orders.size());
  for (int m : orders) {
    MomentReport row;
    row.m = m;
    row.analytic_f1 = ndr_moment(p, m, MomentForm::f1);
    row.analytic_f2 = ndr_moment(p, m, MomentForm::f2);
    row.analytic_f3 = ndr_moment(p, m, MomentForm::f3);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double d : batch.data) {
      const double v = std::pow(d, m);
      sum += v;
      sum_sq += v * v;
    }
    row.mc_estimate = sum / nd;
    const double var =
        std::max(0.0, (sum_sq - nd * row.mc_estimate * row.mc_estimate) / (nd - 1.0));
    row.mc_std_error = std::sqrt(var / nd);
    // the 1e-12 floor covers zero-variance cases such as m = 0
    row.mc_within_4se = std::abs(row.mc_estimate - row.analytic_f2) <=
                        4.0 * row.mc_std_error + 1e-12;
    table.push_back(row);
  }
  return table;
}

std::vector<CorrCurveRow> figure_corr_curve(const std::vector<double>& rho_z_grid,
                                            std::size_t n, SeedSpec seed,
                                            double sigma_z) {
  std::vector<CorrCurveRow> rows;
  rows.reserve(rho_z_grid.size());
  for (std::size_t i = 0; i < rho_z_grid.size(); ++i) {
    const double rho_z = rho_z_grid[i];
    const GammaPairParams p = gamma_params(FieldParams{sigma_z, rho_z}, 1.0);
    const SampleBatch batch =
        sample_batch(p, n, SeedSpec{seed.seed, seed.stream_id + i * kStreamSpacing},
                     SampleKind::intensity);
    rows.push_back({rho_z, empirical_correlation(batch), rho_z * rho_z});
  }
  return rows;
}

std::vector<NdrVsRhoRow> figure_ndr_vs_rho(const std::vector<double>& k_set,
                                           const std::vector<double>& rho_grid) {
  std::vector<NdrVsRhoRow> rows;
  rows.reserve(k_set.size() * rho_grid.size());
  for (double k : k_set) {
    for (double rho : rho_grid) {
      const GammaPairParams p{k, 1.0, rho};
      const MeanBand mb = ndr_mean_band(p);
      rows.push_back({k, rho, mb.mean, mb.mean - mb.half_band, mb.mean + mb.half_band});
    }
  }
  return rows;
}

std::vector<MomentsVsKRow> figure_moments_vs_k(const std::vector<double>& k_grid,
                                               const std::vector<int>& m_set,
                                               double rho) {
  std::vector<MomentsVsKRow> rows;
  rows.reserve(k_grid.size());
  for (double k : k_grid) {
    const GammaPairParams p{k, 1.0, rho};
    MomentsVsKRow row;
    row.k = k;
    row.moments.reserve(m_set.size());
    for (int m : m_set) row.moments.push_back(ndr_moment(p, m));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

Histogram2D build_histogram_2d(const SampleBatch& batch, std::size_t bins_x,
                               std::size_t bins_y, double hi_x, double hi_y) {
  Histogram2D h;
  const std::size_t n = batch.rows();
  h.n_total = n;
  h.x_edges.resize(bins_x + 1);
  h.y_edges.resize(bins_y + 1);
  for (std::size_t i = 0; i <= bins_x; ++i)
    h.x_edges[i] = hi_x * static_cast<double>(i) / static_cast<double>(bins_x);
  for (std::size_t i = 0; i <= bins_y; ++i)
    h.y_edges[i] = hi_y * static_cast<double>(i) / static_cast<double>(bins_y);
  h.counts.assign(bins_x * bins_y, 0);
  const double sx = static_cast<double>(bins_x) / hi_x;
  const double sy = static_cast<double>(bins_y) / hi_y;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = batch.data[2 * i];
    const double y = batch.data[2 * i + 1];
    std::size_t ix;
    std::size_t iy;
    if (x < 0.0 || y < 0.0 || x > hi_x || y > hi_y) {
      ++h.out_of_range;
      ix = bins_x - 1;
      iy = bins_y - 1;
    } else {
      ix = std::min(static_cast<std::size_t>(x * sx), bins_x - 1);
      iy = std::min(static_cast<std::size_t>(y * sy), bins_y - 1);
    }
    ++h.counts[ix * bins_y + iy];
  }
  h.density.resize(h.counts.size());
  const double area = (hi_x / static_cast<double>(bins_x)) *
                      (hi_y / static_cast<double>(bins_y));
  for (std::size_t c = 0; c < h.counts.size(); ++c)
    h.density[c] = static_cast<double>(h.counts[c]) /
                   (static_cast<double>(n) * area);
  return h;
}

}  // namespace

JointDensityResult joint_density_check(const GammaPairParams& p, GridSpec grid,
                                       std::size_t n, SeedSpec seed) {
  validate(p);
  if (grid.bins_x < 2 || grid.bins_y < 2)
    throw DomainError("joint_density_check: requires at least 2 bins per axis");
  const double default_hi = p.k * p.sigma + 10.0 * std::sqrt(p.k) * p.sigma;
  const double hi_x = grid.hi_x > 0.0 ? grid.hi_x : default_hi;
  const double hi_y = grid.hi_y > 0.0 ? grid.hi_y : default_hi;

  const SampleBatch batch = sample_batch(p, n, seed, SampleKind::gamma);
  JointDensityResult result;
  result.hist = build_histogram_2d(batch, grid.bins_x, grid.bins_y, hi_x, hi_y);

  const auto pdf = [&p](double x, double y) {
    return p.k == 1.0 ? joint_pdf_exponential(p, x, y)
                      : joint_pdf_gamma(p, x, y);
  };

  const Histogram2D& h = result.hist;
  const std::size_t nx = h.nx();
  const std::size_t ny = h.ny();
  result.analytic.resize(nx * ny);
  result.fit.alpha = 0.01;
  const double nd = static_cast<double>(h.n_total);
  std::size_t used = 0;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    const double x0 = h.x_edges[ix];
    const double x1 = h.x_edges[ix + 1];
    const double xc = 0.5 * (x0 + x1);
    const double xh = 0.5 * (x1 - x0);
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const double y0 = h.y_edges[iy];
      const double y1 = h.y_edges[iy + 1];
      const double yc = 0.5 * (y0 + y1);
      const double yh = 0.5 * (y1 - y0);
      const std::size_t c = ix * ny + iy;
      result.analytic[c] = pdf(xc, yc);
      result.fit.sup_distance = std::max(
          result.fit.sup_distance, std::abs(h.density[c] - result.analytic[c]));
      if (ix == nx - 1 && iy == ny - 1) continue;  // pooled out-of-range cell
      double cell_prob = 0.0;
      for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b)
          cell_prob += kGL5W[a] * kGL5W[b] *
                       pdf(xc + xh * kGL5X[a], yc + yh * kGL5X[b]);
      cell_prob *= xh * yh;
      const double expected = nd * cell_prob;
      if (expected < kMinExpected) continue;
      const double observed = static_cast<double>(h.counts[c]);
      result.fit.chi2_stat +=
          (observed - expected) * (observed - expected) / expected;
      ++used;
    }
  }
  if (used < 2)
    throw DomainError("joint_density_check: fewer than two cells reach the expected-count rule");
  result.fit.dof = used - 1;
  result.fit.p_value = chi_square_p_value(result.fit.chi2_stat, result.fit.dof);
  result.fit.pass = result.fit.p_value >= result.fit.alpha;

  result.marginal_x1 = build_histogram(batch.data.data(), batch.rows(), 2,
                                       grid.bins_x, 0.0, hi_x);
  result.marginal_x2 = build_histogram(batch.data.data() + 1, batch.rows(), 2,
                                       grid.bins_y, 0.0, hi_y);
  result.marginal_analytic.resize(grid.bins_x);
  for (std::size_t b = 0; b < grid.bins_x; ++b) {
    const double center =
        0.5 * (result.marginal_x1.edges[b] + result.marginal_x1.edges[b + 1]);
    result.marginal_analytic[b] = gamma_marginal_pdf(p, center);
  }
  return result;
}

}  // namespace ndr
