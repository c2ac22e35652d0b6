#pragma once

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "diagram.hpp"

namespace csi {

enum class Sampler { sobol, plain };

inline std::string to_string(Sampler s) { return s == Sampler::sobol ? "sobol" : "plain"; }

inline Sampler parse_sampler(const std::string& s) {
  if (s == "sobol" || s == "qmc") return Sampler::sobol;
  if (s == "plain" || s == "mc") return Sampler::plain;
  throw Error("unknown sampler '" + s + "' (expected sobol or plain)");
}

struct MCParams {
  std::uint64_t samples = 2'000'000;
  std::uint64_t seed = 1;
  double truncation = 0;  // L; 0 selects 4 (R + 1)
  double concentration = 1.0;
  double broad_weight = 0.1;
  double uniform_weight = 0.7;
  double hotspot_weight = 0.2;     // time mass placed near self-approaches
  double hotspot_threshold = 1.0;  // distance below which an approach counts
  double time_scale = 0;  // 0: support radius + 1
  unsigned workers = 1;
  unsigned batches = 32;
  bool antithetic = false;  // plain sampler only
  Sampler sampler = Sampler::sobol;
  double max_rejected_fraction = 1e-3;
};

struct Diagnostics {
  double max_abs_weighted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t evaluated = 0;
  std::map<std::string, double> extra;
};

struct IntegralEstimate {
  double value = 0;
  double std_error = 0;
  std::uint64_t n_effective = 0;
  std::uint64_t seed = 0;
  double truncation = 0;
  std::vector<double> batch_means;
  Diagnostics diagnostics;
};

// Rebuilds value and std_error from batch_means.
inline void summarize(IntegralEstimate& e) {
  const std::size_t b = e.batch_means.size();
  if (b == 0) {
    e.value = e.std_error = 0;
    return;
  }
  double s = 0;
  for (double m : e.batch_means) s += m;
  e.value = s / static_cast<double>(b);
  if (b < 2) {
    e.std_error = 0;
    return;
  }
  double v = 0;
  for (double m : e.batch_means) v += (m - e.value) * (m - e.value);
  e.std_error = std::sqrt(v / static_cast<double>(b - 1) / static_cast<double>(b));
}

// Batchwise linear combination of estimates sharing a batch layout; the error
// therefore accounts for correlation from shared random points.
inline IntegralEstimate combine(const std::vector<std::pair<double, const IntegralEstimate*>>& terms) {
  IntegralEstimate out;
  std::size_t b = 0;
  for (auto& [c, e] : terms)
    if (!e->batch_means.empty()) {
      if (b && e->batch_means.size() != b) throw Error("combine: batch layouts differ");
      b = e->batch_means.size();
    }
  out.batch_means.assign(b, 0.0);
  for (auto& [c, e] : terms) {
    for (std::size_t i = 0; i < e->batch_means.size(); ++i) out.batch_means[i] += c * e->batch_means[i];
    out.n_effective += e->n_effective;
    out.seed = e->seed;
    out.truncation = std::max(out.truncation, e->truncation);
    auto& d = out.diagnostics;
    d.max_abs_weighted = std::max(d.max_abs_weighted, std::abs(c) * e->diagnostics.max_abs_weighted);
    d.rejected += e->diagnostics.rejected;
    d.evaluated += e->diagnostics.evaluated;
  }
  summarize(out);
  return out;
}

// A weighted integrand on the unit cube: returns f(x)/density(x) for a point
// u in (0,1)^dim, or NaN to reject the sample.  Must be thread-safe.
using CubeIntegrand = std::function<double(const double* u)>;

namespace detail {

inline std::uint64_t batch_stream_seed(std::uint64_t seed, std::uint64_t batch, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(salt)};
  std::uint32_t w[2];
  seq.generate(w, w + 2);
  return (static_cast<std::uint64_t>(w[0]) << 32) | w[1];
}

struct BatchResult {
  double sum = 0;
  double max_abs = 0;
  std::uint64_t rejected = 0;
  std::uint64_t evaluated = 0;
};

inline void accumulate(BatchResult& r, double v) {
  ++r.evaluated;
  if (!std::isfinite(v)) {
    ++r.rejected;
    return;
  }
  r.sum += v;
  r.max_abs = std::max(r.max_abs, std::abs(v));
}

inline BatchResult run_batch(const CubeIntegrand& f, std::size_t dim, std::uint64_t n, std::uint64_t seed,
                             std::uint64_t batch, const MCParams& p) {
  BatchResult r;
  std::vector<double> u(std::max<std::size_t>(dim, 1));
  std::mt19937_64 rng(batch_stream_seed(seed, batch, 0x5eed));
  if (p.sampler == Sampler::sobol && dim > 0) {
    // Random digital shift of the same Sobol prefix in every batch.
    std::vector<std::uint32_t> shift(dim);
    for (auto& s : shift) s = static_cast<std::uint32_t>(rng() >> 32);
    boost::random::sobol_engine<std::uint32_t, 32> gen(dim);
    std::vector<std::uint32_t> x(dim);
    for (std::uint64_t i = 0; i < n; ++i) {
      gen.generate(x.begin(), x.end());
      for (std::size_t j = 0; j < dim; ++j) u[j] = (static_cast<double>(x[j] ^ shift[j]) + 0.5) * 0x1p-32;
      accumulate(r, f(u.data()));
    }
    return r;
  }
  for (std::uint64_t i = 0; i < n; ++i) {
    if (p.antithetic && (i & 1))
      for (auto& x : u) x = 1.0 - x;
    else
      for (auto& x : u) x = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
    accumulate(r, f(u.data()));
  }
  return r;
}

}  // namespace detail

// Randomized quasi-Monte Carlo over (0,1)^dim with B independent batches.
// Batch b depends only on (seed, b), and batches are reduced in index order,
// so the result is bit-identical for any worker count.
inline IntegralEstimate cube_integrate(const CubeIntegrand& f, std::size_t dim, const MCParams& p) {
  if (p.samples == 0) throw Error("samples must be positive");
  if (dim > 1000) throw Error("integration dimension too large");
  const std::uint64_t batches = std::clamp<std::uint64_t>(p.batches, 1, p.samples);
  const std::uint64_t n = p.samples / batches;
  std::vector<detail::BatchResult> res(batches);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      std::uint64_t b = next.fetch_add(1);
      if (b >= batches) return;
      try {
        res[b] = detail::run_batch(f, dim, n, p.seed, b, p);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = batches;
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(p.workers, static_cast<unsigned>(batches)));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  IntegralEstimate e;
  e.seed = p.seed;
  e.truncation = p.truncation;
  for (auto& r : res) {
    e.batch_means.push_back(r.sum / static_cast<double>(n));
    e.diagnostics.max_abs_weighted = std::max(e.diagnostics.max_abs_weighted, r.max_abs);
    e.diagnostics.rejected += r.rejected;
    e.diagnostics.evaluated += r.evaluated;
  }
  e.n_effective = e.diagnostics.evaluated - e.diagnostics.rejected;
  if (static_cast<double>(e.diagnostics.rejected) >
      p.max_rejected_fraction * static_cast<double>(e.diagnostics.evaluated))
    throw Error("too many rejected samples: " + std::to_string(e.diagnostics.rejected) + " of " +
                std::to_string(e.diagnostics.evaluated));
  summarize(e);
  return e;
}

}  // namespace csi
