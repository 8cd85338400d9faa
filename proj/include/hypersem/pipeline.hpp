#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypersem/geometry.hpp"
#include "hypersem/oracle.hpp"
#include "hypersem/svm.hpp"

namespace hypersem::pipeline {

/// Synthesized corpus. Latents and scores are stored in single precision,
/// exactly as they are written to disk; scores are computed from the
/// rounded latents.
struct SampleDataset {
  std::uint32_t dim = 0;
  std::uint32_t attribute_count = 0;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
  Space space = Space::Z;
  std::vector<float> latents;  // count × dim, row-major
  std::vector<float> scores;   // count × attribute_count, row-major

  std::span<const float> latent(std::uint64_t i) const {
    return {latents.data() + i * dim, dim};
  }
  std::span<const float> score_row(std::uint64_t i) const {
    return {scores.data() + i * attribute_count, attribute_count};
  }
  LatentCode code(std::uint64_t i) const;
  std::vector<double> score_column(std::size_t attribute) const;

  bool operator==(const SampleDataset&) const = default;
};

inline constexpr std::uint64_t kSampleChunk = 1024;

/// Draws `count` codes from N(0, I_d) (warped when space = W) and scores
/// them with the observed-mode oracle. Chunk c uses the sub-seed
/// derive_seed(seed, {c}), so the result does not depend on threading.
SampleDataset synthesize_dataset(const oracle::GeneratorSpec& gen, std::uint64_t count,
                                 std::uint64_t seed, Space space = Space::Z);

struct CandidateSplit {
  std::string attribute;
  svm::LabeledDataset train;
  svm::LabeledDataset validation;
  std::size_t k = 0;
  std::vector<std::uint64_t> train_indices;
  std::vector<std::uint64_t> validation_indices;
};

/// Top-k scores are labeled +1 and bottom-k −1 (ties broken by ascending
/// sample index), then 70% of the 2k candidates go to training by a shuffle
/// seeded with split_seed.
CandidateSplit select_candidates(const SampleDataset& ds, std::span<const double> scores,
                                 const std::string& attribute, std::size_t k,
                                 std::uint64_t split_seed);
CandidateSplit select_candidates(const SampleDataset& ds, std::size_t column,
                                 const std::string& attribute, std::size_t k,
                                 std::uint64_t split_seed);

struct BoundarySet {
  Space space = Space::Z;
  std::vector<svm::TrainedBoundary> boundaries;  // attribute order, then "quality"

  const svm::TrainedBoundary* find(const std::string& name) const;
  const svm::TrainedBoundary& at(const std::string& name) const;
  std::vector<std::string> names() const;
  /// Boundaries other than "quality".
  std::vector<svm::TrainedBoundary> attributes() const;
};

struct FitOptions {
  std::size_t k = 2000;
  svm::SvmConfig svm{};
  bool include_quality = true;
};

/// One SVM per attribute (and the quality axis). Each boundary records its
/// held-out validation accuracy and its accuracy against the oracle labels
/// of every sample in ds.
BoundarySet fit_all_boundaries(const SampleDataset& ds, const oracle::GeneratorSpec& gen,
                               const FitOptions& options = {});

/// Pairwise cosines of the attribute normals (quality excluded).
Eigen::MatrixXd boundary_correlation(const BoundarySet& bs);

/// Pearson correlation of the score columns. Throws ZeroVariance.
Eigen::MatrixXd score_correlation(const SampleDataset& ds);

struct CorrelationReport {
  std::vector<std::string> attributes;
  Eigen::MatrixXd boundary_cosine;
  Eigen::MatrixXd score_pearson;
};

CorrelationReport correlate(const BoundarySet& bs, const SampleDataset& ds);

struct ScoreMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::uint64_t count = 0;
};

/// Streaming sample mean and covariance of oracle scores over fresh N(0, I)
/// draws, reduced in chunk order.
ScoreMoments score_moments(const oracle::GeneratorSpec& gen, std::uint64_t count,
                           std::uint64_t seed, oracle::ScoreMode mode);

struct SweepPoint {
  double alpha = 0.0;
  double score = 0.0;           // noiseless score of the boundary's attribute
  double identity_drift = 0.0;  // ‖identity(z_α) − identity(z_start)‖₂
  double true_distance = 0.0;   // planted-normal distance n*ᵀu
};

struct SweepReport {
  std::string attribute;
  LatentCode start;
  std::vector<SweepPoint> points;
  bool score_nondecreasing = true;
  bool drift_increasing_in_magnitude = true;
};

/// Projects z0 onto the boundary (distance 0), then records the planted
/// score and identity drift for each edit step α.
SweepReport distance_sweep(const oracle::GeneratorSpec& gen, const SemanticDirection& boundary,
                           const LatentCode& z0, std::span<const double> alphas);

struct ManipulationEffect {
  std::vector<std::string> attributes;
  // Per attribute: max over α of |s(α) − s(0)| and s(α_max) − s(α_min).
  Eigen::VectorXd max_abs_change;
  Eigen::VectorXd end_to_end_change;
};

/// Noiseless scores along z0 + α·direction.
ManipulationEffect manipulation_effect(const oracle::GeneratorSpec& gen,
                                       const SemanticDirection& direction, const LatentCode& z0,
                                       std::span<const double> alphas);

struct ArtifactCorrection {
  LatentCode code;
  int steps = 0;
  double noise_level = 0.0;
};

inline constexpr double kCleanNoiseLevel = 0.05;
inline constexpr int kMaxCorrectionSteps = 10;

/// Walks z along +quality until the rendered noise level is ≤ 0.05 or ten
/// steps have been taken.
ArtifactCorrection fix_artifact(const oracle::GeneratorSpec& gen, const BoundarySet& bs,
                                const LatentCode& z, double step);
ArtifactCorrection fix_artifact(const oracle::GeneratorSpec& gen,
                                const SemanticDirection& quality, const LatentCode& z,
                                double step);

}  // namespace hypersem::pipeline
