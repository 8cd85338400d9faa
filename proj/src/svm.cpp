#include "hypersem/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hypersem/error.hpp"
#include "hypersem/random.hpp"

namespace hypersem::svm {

void validate(const LabeledDataset& data) {
  if (data.labels.empty()) {
    throw Error(ErrorCode::EmptyDataset, "dataset has no points");
  }
  if (static_cast<std::size_t>(data.points.rows()) != data.labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "point and label counts differ");
  }
  for (int y : data.labels) {
    if (y != 1 && y != -1) {
      throw Error(ErrorCode::InvalidArgument, "labels must be -1 or +1");
    }
  }
  if (!data.points.allFinite()) {
    throw Error(ErrorCode::NonFinite, "dataset has non-finite coordinates");
  }
}

TrainedBoundary fit(const LabeledDataset& train, const SvmConfig& config,
                    const std::string& name) {
  validate(train);
  if (!(config.lambda > 0.0) || config.epochs < 1 || !(config.tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "SVM config needs lambda > 0, epochs >= 1, tolerance > 0");
  }
  const bool has_pos = std::find(train.labels.begin(), train.labels.end(), 1) != train.labels.end();
  const bool has_neg = std::find(train.labels.begin(), train.labels.end(), -1) != train.labels.end();
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::SingleClass, "training data for '" + name + "' has a single label");
  }

  const Eigen::Index d = train.dim();
  const std::size_t n = train.size();
  const double radius = 1.0 / std::sqrt(config.lambda);

  // Last slot is the bias weight.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd previous(d + 1);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, {0x5356'4Dull}));

  std::uint64_t t = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    previous = w;
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (config.lambda * static_cast<double>(t));
      const double y = train.labels[i];
      const auto x = train.points.row(static_cast<Eigen::Index>(i));
      const double margin = y * (x.dot(w.head(d)) + w[d]);
      w *= 1.0 - eta * config.lambda;
      if (margin < 1.0) {
        w.head(d).noalias() += (eta * y) * x.transpose();
        w[d] += eta * y;
      }
      const double norm = w.norm();
      if (norm > radius) w *= radius / norm;
    }
    const double scale = std::max(w.norm(), 1e-300);
    if (epoch > 0 && (w - previous).norm() <= config.tolerance * scale) break;
  }

  const double wnorm = w.head(d).norm();
  if (!(wnorm > 0.0)) {
    throw Error(ErrorCode::ZeroVector, "SVM for '" + name + "' converged to a zero normal");
  }
  TrainingMeta meta{config.seed, static_cast<std::uint64_t>(n), 0.0};
  SemanticDirection direction(name, w.head(d) / wnorm, train.space, w[d] / wnorm, meta);
  TrainedBoundary out{std::move(direction), 0.0, 0.0, 0.0};
  out.train_accuracy = accuracy(out.direction, train);
  return out;
}

int classify(const SemanticDirection& direction, const Eigen::Ref<const Eigen::VectorXd>& z) {
  if (z.size() != direction.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "classify: " + std::to_string(z.size()) +
                                                  " != " + std::to_string(direction.dim()));
  }
  return direction.normal().dot(z) + direction.intercept() >= 0.0 ? 1 : -1;
}

double accuracy(const SemanticDirection& direction, const LabeledDataset& data) {
  validate(data);
  if (data.dim() != direction.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "accuracy: dataset and boundary dimensions differ");
  }
  const Eigen::VectorXd margins =
      (data.points * direction.normal()).array() + direction.intercept();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int predicted = margins[static_cast<Eigen::Index>(i)] >= 0.0 ? 1 : -1;
    if (predicted == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace hypersem::svm
