// ndrstats
// SPDX-License-Identifier: Apache-2.0
#include "ndr/sampling.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

namespace ndr {

Rng::Rng(SeedSpec s) {
  std::seed_seq seq{static_cast<std::uint32_t>(s.seed),
                    static_cast<std::uint32_t>(s.seed >> 32),
                    static_cast<std::uint32_t>(s.stream_id),
                    static_cast<std::uint32_t>(s.stream_id >> 32)};
  gen_.seed(seq);
}

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // u1 shifted into (0, 1] so the log stays finite
  const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * std::numbers::pi * u2;
  spare_ = rad * std::sin(ang);
  have_spare_ = true;
  return rad * std::cos(ang);
}

ComplexPair sample_complex_pair(const FieldParams& fp, Rng& rng) {
  validate(fp);
  const double c = fp.rho_z;
  const double s = std::sqrt((1.0 - c) * (1.0 + c));
  const double z1r = fp.sigma_z * rng.normal();
  const double z1i = fp.sigma_z * rng.normal();
  const double wr = fp.sigma_z * rng.normal();
  const double wi = fp.sigma_z * rng.normal();
  return {z1r, z1i, c * z1r + s * wr, c * z1i + s * wi};
}

IntensityPair sample_intensity_pair(const FieldParams& fp, Rng& rng) {
  const ComplexPair z = sample_complex_pair(fp, rng);
  return {z.z1_re * z.z1_re + z.z1_im * z.z1_im,
          z.z2_re * z.z2_re + z.z2_im * z.z2_im};
}

IntensityPair sample_gamma_pair(const GammaPairParams& p, Rng& rng) {
  validate(p);
  if (!is_integer_shape(p.k))
    throw DomainError(
        "sample_gamma_pair: sum-of-exponentials sampling requires integer k; "
        "use the analytic evaluators for real k");
  const int k = static_cast<int>(std::lround(p.k));
  const FieldParams fp = field_params(p);
  double x1 = 0.0;
  double x2 = 0.0;
  for (int i = 0; i < k; ++i) {
    const IntensityPair q = sample_intensity_pair(fp, rng);
    x1 += q.x1;
    x2 += q.x2;
  }
  return {x1, x2};
}

double sample_ndr(const GammaPairParams& p, Rng& rng) {
  for (;;) {
    const IntensityPair q = sample_gamma_pair(p, rng);
    const double s = q.x1 + q.x2;
    if (s > 0.0) return std::abs(q.x1 - q.x2) / s;
  }
}

std::size_t sample_kind_columns(SampleKind kind) {
  switch (kind) {
    case SampleKind::complex_pair:
      return 4;
    case SampleKind::intensity:
    case SampleKind::gamma:
      return 2;
    case SampleKind::ndr:
      return 1;
  }
  throw DomainError("sample_kind_columns: unknown kind");
}

namespace {

void fill_chunk(const GammaPairParams& p, SampleKind kind, SeedSpec seed,
                double* out, std::size_t n) {
  Rng rng(seed);
  switch (kind) {
    case SampleKind::complex_pair: {
      const FieldParams fp = field_params(p);
      for (std::size_t i = 0; i < n; ++i) {
        const ComplexPair z = sample_complex_pair(fp, rng);
        out[4 * i] = z.z1_re;
        out[4 * i + 1] = z.z1_im;
        out[4 * i + 2] = z.z2_re;
        out[4 * i + 3] = z.z2_im;
      }
      break;
    }
    case SampleKind::intensity: {
      const FieldParams fp = field_params(p);
      for (std::size_t i = 0; i < n; ++i) {
        const IntensityPair q = sample_intensity_pair(fp, rng);
        out[2 * i] = q.x1;
        out[2 * i + 1] = q.x2;
      }
      break;
    }
    case SampleKind::gamma:
      for (std::size_t i = 0; i < n; ++i) {
        const IntensityPair q = sample_gamma_pair(p, rng);
        out[2 * i] = q.x1;
        out[2 * i + 1] = q.x2;
      }
      break;
    case SampleKind::ndr:
      for (std::size_t i = 0; i < n; ++i) out[i] = sample_ndr(p, rng);
      break;
  }
}

}  // namespace

SampleBatch sample_batch(const GammaPairParams& p, std::size_t count,
                         SeedSpec seed, SampleKind kind, unsigned workers) {
  validate(p);
  if (count < 1) throw DomainError("sample_batch: requires count >= 1");
  const std::size_t cols = sample_kind_columns(kind);
  if ((kind == SampleKind::complex_pair || kind == SampleKind::intensity) &&
      p.k != 1.0)
    throw DomainError("sample_batch: field-level kinds require k = 1");
  if ((kind == SampleKind::gamma || kind == SampleKind::ndr) &&
      !is_integer_shape(p.k))
    throw DomainError("sample_batch: gamma and ndr kinds require integer k");
  if (count > kMaxBatchBytes / (cols * sizeof(double)))
    throw DomainError("sample_batch: count exceeds the batch size cap");

  SampleBatch batch{kind, cols, std::vector<double>(count * cols)};
  const std::size_t n_chunks = (count + kChunkRows - 1) / kChunkRows;
  auto run = [&](std::size_t ci) {
    const std::size_t begin = ci * kChunkRows;
    const std::size_t n = std::min(kChunkRows, count - begin);
    fill_chunk(p, kind, SeedSpec{seed.seed, seed.stream_id + ci},
               batch.data.data() + begin * cols, n);
  };

  unsigned nw = workers ? workers : default_workers();
  if (nw > n_chunks) nw = static_cast<unsigned>(n_chunks);
  if (nw <= 1) {
    for (std::size_t i = 0; i < n_chunks; ++i) run(i);
    return batch;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error = nullptr;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(nw);
  for (unsigned w = 0; w < nw; ++w) {
    pool.emplace_back([&] {
      try {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n_chunks) return;
          run(i);
        }
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return batch;
}

unsigned default_workers() {
  if (const char* s = std::getenv("NDR_STATS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && v >= 1 && v <= 4096)
      return static_cast<unsigned>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

}  // namespace ndr
