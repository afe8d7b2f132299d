// ndrstats
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "ndr/errors.hpp"
#include "ndr/params.hpp"

namespace ndr {

// (seed, stream_id) pairs select non-overlapping generator streams.
struct SeedSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

struct IntensityPair {
  double x1;
  double x2;
};

struct ComplexPair {
  double z1_re;
  double z1_im;
  double z2_re;
  double z2_im;
};

// One deterministic generator stream. Single-owner: never share across threads.
class Rng {
 public:
  explicit Rng(SeedSpec s);
  double uniform();  // [0, 1)
  double normal();   // standard normal (Box-Muller)

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Z1 circular Gaussian with per-component sd sigma_z;
// Z2 = rho_z Z1 + sqrt(1 - rho_z^2) W with W independent of Z1.
ComplexPair sample_complex_pair(const FieldParams& fp, Rng& rng);

// (|Z1|^2, |Z2|^2): exponential marginals with mean 2 sigma_z^2,
// pair correlation rho_z^2.
IntensityPair sample_intensity_pair(const FieldParams& fp, Rng& rng);

// Sum of k independent intensity pairs; Gamma(k, sigma) marginals at
// pair correlation rho. Requires integer k.
IntensityPair sample_gamma_pair(const GammaPairParams& p, Rng& rng);

// |x1 - x2| / (x1 + x2) in [0, 1]; a zero-sum draw is resampled.
double sample_ndr(const GammaPairParams& p, Rng& rng);

enum class SampleKind { complex_pair, intensity, gamma, ndr };

std::size_t sample_kind_columns(SampleKind kind);  // 4, 2, 2, 1

// Row-major numeric batch; layout fixed by kind.
struct SampleBatch {
  SampleKind kind;
  std::size_t columns;
  std::vector<double> data;
  std::size_t rows() const { return columns ? data.size() / columns : 0; }
};

inline constexpr std::size_t kChunkRows = 65536;
inline constexpr std::size_t kMaxBatchBytes = std::size_t{1} << 34;

// Deterministic for fixed (p, count, seed, kind) at any worker count:
// rows are produced in fixed 65536-row chunks, chunk i drawing from stream
// seed.stream_id + i, and concatenated in chunk order. workers = 0 picks
// default_workers(). Batches above kMaxBatchBytes are refused.
SampleBatch sample_batch(const GammaPairParams& p, std::size_t count,
                         SeedSpec seed, SampleKind kind, unsigned workers = 0);

// NDR_STATS_THREADS if set to a positive integer, else hardware concurrency,
// at least 1.
unsigned default_workers();

}  // namespace ndr
