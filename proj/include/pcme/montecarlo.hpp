#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pcme/core.hpp"
#include "pcme/math.hpp"

namespace pcme {

struct MonteCarloConfig {
  std::uint64_t seed = 1;
  std::int64_t samples = 100000;
  int workers = 1;
  MonteCarloConfig(std::uint64_t seed_, std::int64_t samples_, int workers_ = 1)
      : seed(seed_), samples(samples_), workers(workers_) {
    if (samples < 1) throw std::invalid_argument("MonteCarloConfig: samples must be >= 1");
    if (workers < 1) throw std::invalid_argument("MonteCarloConfig: workers must be >= 1");
  }
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace detail

/// xoshiro256++ stream whose state is derived from (seed, stream index) via
/// splitmix64. Streams are single-owner: one stream never crosses threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t sm = seed;
    sm = detail::splitmix64(sm) ^ (0xD2B74407B1CE6E93ULL * (stream + 1));
    bool nonzero = false;
    for (auto& w : s_) {
      w = detail::splitmix64(sm);
      nonzero |= (w != 0);
    }
    if (!nonzero) s_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1); safe under log().
  double uniform_pos() {
    double u;
    do {
      u = uniform01();
    } while (u == 0.0);
    return u;
  }

  /// Standard normal via Box-Muller (the second deviate is discarded to
  /// keep the stream state a pure function of the call count).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// One gamma draw. Marsaglia-Tsang squeeze for shape >= 1; shapes below 1
/// go through the boost U^{1/shape} transform.
inline double sample_gamma(const GammaParams& p, RngStream& rng) {
  double shape = p.shape;
  double boost = 1.0;
  if (shape < 1.0) {
    boost = std::pow(rng.uniform_pos(), 1.0 / shape);
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / p.rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return boost * d * v / p.rate;
  }
}

/// One Poisson draw. Sequential-search inversion below mean 10, Hormann's
/// PTRS transformed rejection above.
inline long sample_poisson(double mean, RngStream& rng) {
  if (mean < 0.0) throw std::domain_error("sample_poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    const double p0 = std::exp(-mean);
    double u = rng.uniform01();
    long k = 0;
    double p = p0, cdf = p0;
    while (u > cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (k > 1000000) break;  // cdf saturated by rounding
    }
    return k;
  }
  const double log_mean = std::log(mean);
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform01() - 0.5;
    const double v = rng.uniform01();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const long k = static_cast<long>(kf);
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = kf * log_mean - mean - log_gamma(kf + 1.0);
    if (lhs <= rhs) return k;
  }
}

/// Y_i ~ Poisson([A x]_i + lambda_i), conditionally independent coordinates.
inline std::vector<int> sample_channel(const PoissonChannel& channel, const Vec& x,
                                       RngStream& rng) {
  Vec mean = channel.a_matrix.apply(x);
  std::vector<int> y(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double m = mean[i] + channel.dark_current[i];
    if (m < 0.0) throw std::domain_error("sample_channel: negative intensity");
    y[i] = static_cast<int>(sample_poisson(m, rng));
  }
  return y;
}

struct McStats {
  Vec mean;
  Vec std_err;
  std::int64_t samples = 0;
};

/// Seeded parallel mean/standard-error reduction. Worker w owns the
/// substream derived from (seed, w) and the index range
/// [w*N/W, (w+1)*N/W); partial sums are combined in worker order, so the
/// result is a pure function of (seed, samples, workers).
template <typename SampleFn>  // void fn(RngStream&, Vec& out), out.size() == dim
McStats mc_run(const MonteCarloConfig& cfg, std::size_t dim, SampleFn&& fn) {
  const int w = cfg.workers;
  std::vector<std::vector<KahanSum>> sums(w, std::vector<KahanSum>(dim));
  std::vector<std::vector<KahanSum>> sq(w, std::vector<KahanSum>(dim));

  auto body = [&](int worker) {
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(worker));
    const std::int64_t lo = cfg.samples * worker / w;
    const std::int64_t hi = cfg.samples * (worker + 1) / w;
    Vec out(dim);
    for (std::int64_t s = lo; s < hi; ++s) {
      fn(rng, out);
      for (std::size_t d = 0; d < dim; ++d) {
        sums[worker][d].add(out[d]);
        sq[worker][d].add(out[d] * out[d]);
      }
    }
  };

  if (w == 1) {
    body(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (int i = 0; i < w; ++i) threads.emplace_back(body, i);
    for (auto& t : threads) t.join();
  }

  McStats stats;
  stats.samples = cfg.samples;
  stats.mean.assign(dim, 0.0);
  stats.std_err.assign(dim, 0.0);
  const double n = static_cast<double>(cfg.samples);
  for (std::size_t d = 0; d < dim; ++d) {
    KahanSum total, total_sq;
    for (int i = 0; i < w; ++i) {
      total.add(sums[i][d].value());
      total_sq.add(sq[i][d].value());
    }
    const double mean = total.value() / n;
    stats.mean[d] = mean;
    if (cfg.samples > 1) {
      const double var =
          std::max(0.0, (total_sq.value() - n * mean * mean) / (n - 1.0));
      stats.std_err[d] = std::sqrt(var / n);
    }
  }
  return stats;
}

}  // namespace pcme
