#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hypersem/geometry.hpp"

namespace hypersem::oracle {

/// Default attribute-to-boundary cosine matrix, in the order
/// pose, smile, age, gender, eyeglasses.
Eigen::MatrixXd default_gram();
std::vector<std::string> default_attributes();

struct GeneratorConfig {
  std::vector<std::string> attributes = default_attributes();
  Eigen::MatrixXd gram = default_gram();
  int dim = 512;
  std::uint64_t seed = 0;
  double noise_sigma = 0.1;
  // Empty means 1.0 for every attribute.
  std::vector<double> lambdas;
  int identity_dims = 8;
  double warp_scale = 2.0;
  // Space in which the attribute scores are linear.
  Space space = Space::Z;
};

enum class ScoreMode {
  Observed,   // tanh(λ nᵀu) + keyed Gaussian noise: what the attribute predictor reports
  Noiseless,  // tanh(λ nᵀu)
  Linear,     // λ nᵀu, diagnostic only
};

/// The synthetic generator: planted unit normals N* (d×m) with Gram G',
/// positive slopes Λ*, a quality axis, an identity subspace orthogonal to
/// both, and an invertible Z→W warp. Immutable after construction.
class GeneratorSpec {
 public:
  const GeneratorConfig& config() const noexcept { return config_; }
  int dim() const noexcept { return config_.dim; }
  std::size_t attribute_count() const noexcept { return config_.attributes.size(); }
  const std::vector<std::string>& attributes() const noexcept { return config_.attributes; }
  Space space() const noexcept { return config_.space; }

  /// Index of a named attribute; throws UnknownAttribute.
  std::size_t attribute_index(const std::string& name) const;
  std::optional<std::size_t> find_attribute(const std::string& name) const;

  const Eigen::MatrixXd& normals() const noexcept { return normals_; }
  const Eigen::VectorXd& lambdas() const noexcept { return lambdas_; }
  const Eigen::VectorXd& quality_dir() const noexcept { return quality_dir_; }
  const Eigen::MatrixXd& identity_dirs() const noexcept { return identity_dirs_; }
  const Eigen::MatrixXd& warp_rotation() const noexcept { return warp_rotation_; }
  double warp_scale() const noexcept { return config_.warp_scale; }
  /// The Gram matrix actually realized by the normals (the configured one,
  /// repaired to the nearest unit-diagonal PSD matrix if necessary).
  const Eigen::MatrixXd& realized_gram() const noexcept { return realized_gram_; }
  bool gram_was_repaired() const noexcept { return gram_repaired_; }

  /// Planted direction of attribute i (or "quality") as a SemanticDirection
  /// in the generator's scoring space.
  SemanticDirection ground_truth(const std::string& name) const;

 private:
  friend GeneratorSpec make_generator(const GeneratorConfig& config);

  GeneratorConfig config_;
  Eigen::MatrixXd normals_;
  Eigen::VectorXd lambdas_;
  Eigen::VectorXd quality_dir_;
  Eigen::MatrixXd identity_dirs_;
  Eigen::MatrixXd warp_rotation_;
  Eigen::MatrixXd realized_gram_;
  bool gram_repaired_ = false;
};

struct GramRepair {
  Eigen::MatrixXd gram;
  bool repaired = false;
  int iterations = 0;
};

/// Nearest unit-diagonal positive-semidefinite matrix by alternating
/// projections with Dykstra's correction (at most 100 rounds). Matrices that
/// are already PSD come back unchanged. Throws GramNotRepairable.
GramRepair repair_gram(const Eigen::MatrixXd& gram);

GeneratorSpec make_generator(const GeneratorConfig& config);

/// Coordinates in which the scores are linear: the code itself when its
/// space matches the generator's, warp(z) for a Z code and a W generator.
/// A W code given to a Z generator is a SpaceMismatch.
Eigen::VectorXd semantic_coordinates(const GeneratorSpec& gen, const LatentCode& code);

/// Semantic scores s (length m).
Eigen::VectorXd score(const GeneratorSpec& gen, const LatentCode& code,
                      ScoreMode mode = ScoreMode::Observed);

/// Noiseless ground-truth projection n*ᵀu of the quality axis.
double quality_coordinate(const GeneratorSpec& gen, const LatentCode& code);

/// sign(n*ᵢᵀu) with sign(0) = +1. "quality" is accepted as an attribute.
int label(const GeneratorSpec& gen, const LatentCode& code, const std::string& attribute);

struct FaceParams {
  double yaw = 0.0;              // degrees, [-45, 45]
  double mouth_curve = 0.0;      // [-1, 1]
  double wrinkle_density = 0.5;  // [0, 1]
  double jaw_width = 1.0;        // [0.6, 1.4]
  double glasses_opacity = 0.5;  // [0, 1]
  std::vector<double> identity_features;
  double noise_level = 0.0;  // [0, 1]

  /// Copy with every field clamped to its range.
  FaceParams clamped() const;
  /// Flattened in a fixed order: yaw, mouth, wrinkle, jaw, glasses, identity..., noise.
  Eigen::VectorXd to_vector() const;

  bool operator==(const FaceParams&) const = default;
};

constexpr double kYawSpan = 45.0;
constexpr double kJawSpan = 0.4;
constexpr double kQualityScale = 5.0;

/// Deterministic face description driven by the noiseless scores. Attributes
/// that the generator does not define stay at their neutral value.
FaceParams face_params(const GeneratorSpec& gen, const LatentCode& code);

/// Scores implied by a face description (inverse of the per-attribute maps),
/// in generator attribute order. Attributes with no face channel are 0.
Eigen::VectorXd scores_from_face(const GeneratorSpec& gen, const FaceParams& face);

/// w = R·tanh(s·z)/s.
LatentCode warp(const GeneratorSpec& gen, const LatentCode& z);
/// Exact inverse of warp; OutOfRange when some |s·(Rᵀw)ⱼ| ≥ 1.
LatentCode unwarp(const GeneratorSpec& gen, const LatentCode& w);

/// Scalable-vector-graphics rendering of a face; a pure function of params.
std::string render(const FaceParams& params);

struct InvertOptions {
  int max_steps = 10'000;
  double tolerance = 1e-6;  // objective value required for success
};

struct InversionResult {
  LatentCode code;
  double objective = 0.0;
  int steps = 0;
  // Some implied score of the target has magnitude > 0.99, so the solution
  // sits far out on a tanh plateau.
  bool saturated = false;
};

/// Finds a latent code (in the generator's scoring space) whose face
/// parameters reproduce `target`, minimizing ‖face_params(z) − target‖² from
/// a seeded N(0, I) start. Throws NoConvergence with the final residual.
InversionResult invert(const GeneratorSpec& gen, const FaceParams& target,
                       std::uint64_t init_seed, const InvertOptions& options = {});

}  // namespace hypersem::oracle
