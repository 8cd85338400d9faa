#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hypersem::pipeline {

/// Outcome of one concentration-of-measure experiment.
struct MonteCarloReport {
  std::string experiment;
  int dim = 0;
  double parameter = 0.0;  // alpha, or beta for the annulus
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double empirical_probability = 0.0;
  double bound_value = 0.0;
  bool passed = false;
  double half_width = 0.0;  // 95% normal-approximation half width
  std::vector<std::pair<std::string, double>> extras;

  double extra(const std::string& key) const;
};

inline constexpr std::uint64_t kMinTrials = 10'000;

/// 1 − (2/α)·e^{−α²/2}.
double slab_bound(double alpha);

/// P(|nᵀz| ≤ 2α√(d/(d−2))) for z ~ N(0, I_d). By rotation invariance n = e₁
/// and only z₁ is drawn. Passes when the empirical probability is at least
/// slab_bound(α) − 2·(standard error), i.e. the (1 − 3e^{−cd}) factor is
/// taken as 1.
MonteCarloReport property2_mc(int dim, double alpha, std::uint64_t trials, std::uint64_t seed);

/// Empirical P(|nᵀz| > threshold) for z ~ N(0, I_d). `passed` is left false;
/// callers compare against their own limit.
MonteCarloReport tail_mc(int dim, double threshold, std::uint64_t trials, std::uint64_t seed);

/// Uniform points on S^{d−1} (normalized Gaussian draws):
/// P(|z₁| ≤ α/√(d−2)) against slab_bound(α). Extras carry the upper and
/// lower tail frequencies P(z₁ > t) and P(z₁ < −t).
MonteCarloReport sphere_slab_mc(int dim, double alpha, std::uint64_t trials, std::uint64_t seed);

/// P(√d − β ≤ ‖z‖₂ ≤ √d + β). The same draws give the mass outside the
/// annulus for β ∈ {1, 2, 3, 4}; log(mass/3) is regressed on β² to estimate
/// ĉ. Passes when that mass is non-increasing in β (strictly while nonzero)
/// and the fitted slope is negative. bound_value = 1 − 3e^{−ĉβ²}.
MonteCarloReport annulus_mc(int dim, double beta, std::uint64_t trials, std::uint64_t seed);

}  // namespace hypersem::pipeline
