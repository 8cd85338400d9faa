#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace hypersem {

enum class Space : std::uint8_t { Z = 0, W = 1 };

std::string_view to_string(Space space);
Space parse_space(std::string_view text);

/// A point of the latent space, tagged with the space it lives in.
/// Holds at least 4 finite coordinates.
class LatentCode {
 public:
  static constexpr Eigen::Index kMinDim = 4;

  LatentCode(Eigen::VectorXd values, Space space = Space::Z);

  static LatentCode zeros(Eigen::Index dim, Space space = Space::Z);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  Space space() const noexcept { return space_; }
  Eigen::Index dim() const noexcept { return values_.size(); }

  bool operator==(const LatentCode& other) const {
    return space_ == other.space_ && values_ == other.values_;
  }

 private:
  Eigen::VectorXd values_;
  Space space_;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::uint64_t train_count = 0;
  double val_accuracy = 0.0;

  bool operator==(const TrainingMeta&) const = default;
};

/// Unit normal of a semantic hyperplane. The intercept is kept for
/// classification only; manipulation always goes through the origin.
class SemanticDirection {
 public:
  static constexpr double kUnitTolerance = 1e-9;

  /// Throws UnitNormViolation unless |‖normal‖ - 1| ≤ 1e-9.
  SemanticDirection(std::string name, Eigen::VectorXd normal, Space space = Space::Z,
                    double intercept = 0.0, TrainingMeta meta = {});

  /// Normalizes `raw` first (ZeroVector when it vanishes).
  static SemanticDirection from_raw(std::string name, const Eigen::VectorXd& raw,
                                    Space space = Space::Z, double intercept = 0.0,
                                    TrainingMeta meta = {});

  const std::string& name() const noexcept { return name_; }
  const Eigen::VectorXd& normal() const noexcept { return normal_; }
  Space space() const noexcept { return space_; }
  double intercept() const noexcept { return intercept_; }
  const TrainingMeta& meta() const noexcept { return meta_; }
  Eigen::Index dim() const noexcept { return normal_.size(); }

  bool operator==(const SemanticDirection& other) const {
    return name_ == other.name_ && space_ == other.space_ && intercept_ == other.intercept_ &&
           meta_ == other.meta_ && normal_ == other.normal_;
  }

 private:
  std::string name_;
  Eigen::VectorXd normal_;
  Space space_;
  double intercept_;
  TrainingMeta meta_;
};

/// Ordered set of directions to condition on. Names are distinct, all
/// directions share space and dimension, and the Gram matrix of the normals
/// is well conditioned (smallest eigenvalue > 1e-6).
class ConditionSet {
 public:
  static constexpr double kMinGramEigenvalue = 1e-6;

  explicit ConditionSet(std::vector<SemanticDirection> directions);

  const std::vector<SemanticDirection>& directions() const noexcept { return directions_; }
  std::size_t size() const noexcept { return directions_.size(); }
  bool empty() const noexcept { return directions_.empty(); }

  /// d×p matrix whose columns are the condition normals.
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }

 private:
  std::vector<SemanticDirection> directions_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd gram_;
};

Eigen::VectorXd normalize(const Eigen::VectorXd& v);

/// Signed "distance" nᵀz of a code to the hyperplane through the origin.
double distance(const SemanticDirection& n, const LatentCode& z);

/// z + αn.
LatentCode edit(const LatentCode& z, const SemanticDirection& n, double alpha);

/// (1 - t)·z1 + t·z2 for t in [0, 1].
LatentCode interpolate(const LatentCode& z1, const LatentCode& z2, double t);

double cosine(const SemanticDirection& n1, const SemanticDirection& n2);

/// Removes from the primal normal its least-squares projection onto the span
/// of the condition normals and renormalizes. The result is orthogonal to
/// every condition normal, so moving along it leaves their distances fixed.
SemanticDirection condition(const SemanticDirection& primal, const ConditionSet& conditions);

}  // namespace hypersem
