#include "hypersem/montecarlo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "hypersem/error.hpp"
#include "hypersem/random.hpp"

namespace hypersem::pipeline {

namespace {

constexpr std::uint64_t kTrialChunk = 1 << 16;
constexpr std::array<double, 4> kAnnulusFitBetas = {1.0, 2.0, 3.0, 4.0};

void require_trials(std::uint64_t trials) {
  if (trials < kMinTrials) {
    throw Error(ErrorCode::InvalidArgument,
                "at least " + std::to_string(kMinTrials) + " trials are required");
  }
}

void require_dim(int dim) {
  if (dim < 4) {
    throw Error(ErrorCode::DimensionTooSmall, "dimension must be at least 4");
  }
}

void require_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha < 1.0) {
    throw Error(ErrorCode::OutOfRange, "alpha must be at least 1");
  }
}

// Runs `trial(rng, counters)` `trials` times split into fixed-size chunks with
// derived seeds; per-chunk counters are summed in chunk order.
template <std::size_t N, typename Trial>
std::array<std::uint64_t, N> run_trials(std::uint64_t trials, std::uint64_t seed, Trial trial) {
  const std::uint64_t chunks = (trials + kTrialChunk - 1) / kTrialChunk;
  std::vector<std::array<std::uint64_t, N>> partial(chunks);
  for_each_chunk(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(c)}));
    std::array<std::uint64_t, N> counts{};
    const std::uint64_t begin = c * kTrialChunk;
    const std::uint64_t end = std::min(trials, begin + kTrialChunk);
    for (std::uint64_t t = begin; t < end; ++t) trial(rng, counts);
    partial[c] = counts;
  });
  std::array<std::uint64_t, N> total{};
  for (const auto& counts : partial) {
    for (std::size_t i = 0; i < N; ++i) total[i] += counts[i];
  }
  return total;
}

void fill_proportion(MonteCarloReport& r) {
  const double n = static_cast<double>(r.trials);
  r.empirical_probability = static_cast<double>(r.hits) / n;
  const double p = r.empirical_probability;
  r.half_width = 1.96 * std::sqrt(p * (1.0 - p) / n);
}

bool passes_bound(const MonteCarloReport& r) {
  const double se = r.half_width / 1.96;
  return r.empirical_probability - r.bound_value >= -2.0 * se;
}

}  // namespace

double MonteCarloReport::extra(const std::string& key) const {
  for (const auto& [name, value] : extras) {
    if (name == key) return value;
  }
  throw Error(ErrorCode::InvalidArgument, "report has no field '" + key + "'");
}

double slab_bound(double alpha) { return 1.0 - (2.0 / alpha) * std::exp(-alpha * alpha / 2.0); }

MonteCarloReport property2_mc(int dim, double alpha, std::uint64_t trials, std::uint64_t seed) {
  require_dim(dim);
  require_alpha(alpha);
  require_trials(trials);
  const double d = dim;
  const double threshold = 2.0 * alpha * std::sqrt(d / (d - 2.0));
  const auto counts = run_trials<1>(trials, seed, [&](Rng& rng, auto& c) {
    std::normal_distribution<double> normal;
    if (std::abs(normal(rng)) <= threshold) ++c[0];
  });
  MonteCarloReport r;
  r.experiment = "property2";
  r.dim = dim;
  r.parameter = alpha;
  r.trials = trials;
  r.hits = counts[0];
  r.bound_value = slab_bound(alpha);
  fill_proportion(r);
  r.passed = passes_bound(r);
  r.extras = {{"threshold", threshold}};
  return r;
}

MonteCarloReport tail_mc(int dim, double threshold, std::uint64_t trials, std::uint64_t seed) {
  require_dim(dim);
  require_trials(trials);
  if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
    throw Error(ErrorCode::OutOfRange, "threshold must be finite and nonnegative");
  }
  const auto counts = run_trials<1>(trials, seed, [&](Rng& rng, auto& c) {
    std::normal_distribution<double> normal;
    if (std::abs(normal(rng)) > threshold) ++c[0];
  });
  MonteCarloReport r;
  r.experiment = "tail";
  r.dim = dim;
  r.parameter = threshold;
  r.trials = trials;
  r.hits = counts[0];
  fill_proportion(r);
  return r;
}

MonteCarloReport sphere_slab_mc(int dim, double alpha, std::uint64_t trials, std::uint64_t seed) {
  require_dim(dim);
  require_alpha(alpha);
  require_trials(trials);
  const double t = alpha / std::sqrt(dim - 2.0);
  if (t > 1.0) {
    throw Error(ErrorCode::OutOfRange, "alpha / sqrt(d - 2) must not exceed 1");
  }
  const auto counts = run_trials<3>(trials, seed, [&, dim](Rng& rng, auto& c) {
    std::normal_distribution<double> normal;
    double first = 0.0;
    double norm2 = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double x = normal(rng);
      if (j == 0) first = x;
      norm2 += x * x;
    }
    const double z1 = first / std::sqrt(norm2);
    if (std::abs(z1) <= t) ++c[0];
    if (z1 > t) ++c[1];
    if (z1 < -t) ++c[2];
  });
  MonteCarloReport r;
  r.experiment = "sphere_slab";
  r.dim = dim;
  r.parameter = alpha;
  r.trials = trials;
  r.hits = counts[0];
  r.bound_value = slab_bound(alpha);
  fill_proportion(r);
  r.passed = passes_bound(r);
  const double n = static_cast<double>(trials);
  r.extras = {{"threshold", t},
              {"upper_tail", static_cast<double>(counts[1]) / n},
              {"lower_tail", static_cast<double>(counts[2]) / n}};
  return r;
}

MonteCarloReport annulus_mc(int dim, double beta, std::uint64_t trials, std::uint64_t seed) {
  require_dim(dim);
  require_trials(trials);
  const double root_d = std::sqrt(static_cast<double>(dim));
  if (!(beta > 0.0) || beta > root_d) {
    throw Error(ErrorCode::OutOfRange, "beta must lie in (0, sqrt(d)]");
  }
  constexpr std::size_t kFits = kAnnulusFitBetas.size();
  // Counter 0 is the requested beta; 1..4 are outside-counts for the fit betas.
  const auto counts = run_trials<kFits + 1>(trials, seed, [&, dim](Rng& rng, auto& c) {
    std::normal_distribution<double> normal;
    double norm2 = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double x = normal(rng);
      norm2 += x * x;
    }
    const double gap = std::abs(std::sqrt(norm2) - root_d);
    if (gap <= beta) ++c[0];
    for (std::size_t b = 0; b < kFits; ++b) {
      if (gap > kAnnulusFitBetas[b]) ++c[b + 1];
    }
  });

  MonteCarloReport r;
  r.experiment = "annulus";
  r.dim = dim;
  r.parameter = beta;
  r.trials = trials;
  r.hits = counts[0];
  fill_proportion(r);

  const double n = static_cast<double>(trials);
  bool decreasing = true;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t b = 0; b < kFits; ++b) {
    const double mass = static_cast<double>(counts[b + 1]) / n;
    r.extras.emplace_back("mass_outside_beta" + std::to_string(b + 1), mass);
    if (b > 0) {
      const auto prev = counts[b];
      const auto cur = counts[b + 1];
      if (cur > prev || (prev > 0 && cur == prev)) decreasing = false;
    }
    if (mass > 0.0) {
      const double x = kAnnulusFitBetas[b] * kAnnulusFitBetas[b];
      sxy += x * std::log(mass / 3.0);
      sxx += x * x;
    }
  }
  // Least squares of log(mass/3) = slope·β² through the origin.
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double c_hat = -slope;
  r.bound_value = 1.0 - 3.0 * std::exp(-c_hat * beta * beta);
  r.passed = decreasing && slope < 0.0;
  r.extras.emplace_back("mass_outside", 1.0 - r.empirical_probability);
  r.extras.emplace_back("slope", slope);
  r.extras.emplace_back("c_hat", c_hat);
  return r;
}

}  // namespace hypersem::pipeline
