#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypersem/geometry.hpp"

namespace hypersem::svm {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Points (one per row) with ±1 labels.
struct LabeledDataset {
  RowMatrix points;
  std::vector<int> labels;
  Space space = Space::Z;

  std::size_t size() const noexcept { return labels.size(); }
  Eigen::Index dim() const noexcept { return points.cols(); }
};

/// Checks row/label counts, label values, and finiteness. Throws on violation.
void validate(const LabeledDataset& data);

struct SvmConfig {
  double lambda = 0.05;
  int epochs = 20;
  std::uint64_t seed = 0;
  double tolerance = 1e-6;
};

struct TrainedBoundary {
  SemanticDirection direction;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  // Accuracy against the generator's own labels over the whole corpus; only
  // filled in by the pipeline.
  double all_accuracy = 0.0;
};

/// Linear soft-margin SVM trained by Pegasos-style stochastic subgradient
/// descent on the primal:
///   min (1/N) Σ max(0, 1 - yᵢ(wᵀxᵢ + b)) + (λ/2)‖(w, b)‖²
/// with step 1/(λt), projection onto the ball of radius 1/√λ, and a
/// per-epoch shuffle driven by config.seed. The bias rides along as a
/// constant feature. The returned normal is w/‖w‖ and the intercept b/‖w‖.
TrainedBoundary fit(const LabeledDataset& train, const SvmConfig& config,
                    const std::string& name = "boundary");

/// sign(normalᵀz + intercept) with sign(0) = +1.
int classify(const SemanticDirection& direction, const Eigen::Ref<const Eigen::VectorXd>& z);
inline int classify(const TrainedBoundary& b, const Eigen::Ref<const Eigen::VectorXd>& z) {
  return classify(b.direction, z);
}

double accuracy(const SemanticDirection& direction, const LabeledDataset& data);
inline double accuracy(const TrainedBoundary& b, const LabeledDataset& data) {
  return accuracy(b.direction, data);
}

}  // namespace hypersem::svm
