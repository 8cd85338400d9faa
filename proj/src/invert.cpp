#include <algorithm>
#include <cmath>

#include "hypersem/error.hpp"
#include "hypersem/oracle.hpp"
#include "hypersem/random.hpp"

namespace hypersem::oracle {

namespace {

constexpr double kSaturatedScore = 0.99;
constexpr double kInitialDamping = 1e-3;
constexpr double kMaxDamping = 1e12;
// Long steps can push a tanh channel into saturation, where its gradient vanishes.
constexpr double kMaxStepNorm = 1.0;
constexpr std::uint64_t kInitStream = 7;

double raw_noise(const GeneratorSpec& gen, const Eigen::VectorXd& u) {
  return -gen.quality_dir().dot(u) / kQualityScale;
}

// The rendered noise level is clamped to [0, 1]. Only the side of the clamp
// that the target lies on is kept, so a target inside (0, 1) still has a
// gradient from the clean side; at any exact solution both forms agree.
double relaxed_noise(double raw, double target) {
  if (target <= 0.0) return std::max(raw, 0.0);
  if (target >= 1.0) return std::min(raw, 1.0);
  return raw;
}

bool noise_channel_active(const GeneratorSpec& gen, const Eigen::VectorXd& u, double target) {
  const double raw = raw_noise(gen, u);
  if (target <= 0.0) return raw > 0.0;
  if (target >= 1.0) return raw < 1.0;
  return true;
}

// d(relaxed face vector)/du. Rows follow FaceParams::to_vector().
Eigen::MatrixXd face_jacobian(const GeneratorSpec& gen, const Eigen::VectorXd& u,
                              double target_noise) {
  const Eigen::Index d = u.size();
  const Eigen::Index k = gen.identity_dirs().cols();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(6 + k, d);

  const std::pair<const char*, double> channels[] = {
      {"pose", kYawSpan}, {"smile", 1.0}, {"age", 0.5}, {"gender", kJawSpan}, {"eyeglasses", 0.5}};
  for (Eigen::Index row = 0; row < 5; ++row) {
    const auto idx = gen.find_attribute(channels[row].first);
    if (!idx) continue;
    const auto i = static_cast<Eigen::Index>(*idx);
    const double lambda = gen.lambdas()[i];
    const double t = std::tanh(lambda * gen.normals().col(i).dot(u));
    jac.row(row) = (channels[row].second * lambda * (1.0 - t * t)) * gen.normals().col(i).transpose();
  }
  jac.middleRows(5, k) = gen.identity_dirs().transpose();
  if (noise_channel_active(gen, u, target_noise)) {
    jac.row(5 + k) = -gen.quality_dir().transpose() / kQualityScale;
  }
  return jac;
}

}  // namespace

InversionResult invert(const GeneratorSpec& gen, const FaceParams& target, std::uint64_t init_seed,
                       const InvertOptions& options) {
  const auto k = static_cast<std::size_t>(gen.identity_dirs().cols());
  if (target.identity_features.size() != k) {
    throw Error(ErrorCode::DimensionMismatch,
                "target has " + std::to_string(target.identity_features.size()) +
                    " identity features, generator has " + std::to_string(k));
  }
  if (!(target.clamped() == target) || !target.to_vector().allFinite()) {
    throw Error(ErrorCode::OutOfRange, "target face parameters lie outside their ranges");
  }
  if (options.max_steps < 1 || !(options.tolerance > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invert needs max_steps >= 1 and tolerance > 0");
  }

  const Space space = gen.space();
  const Eigen::VectorXd goal = target.to_vector();
  const Eigen::Index noise_row = goal.size() - 1;
  auto residual = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd r = face_params(gen, LatentCode(u, space)).to_vector() - goal;
    r[noise_row] = relaxed_noise(raw_noise(gen, u), target.noise_level) - target.noise_level;
    return r;
  };

  Rng rng(derive_seed(init_seed, {kInitStream}));
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(gen.dim());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = normal(rng);

  Eigen::VectorXd r = residual(u);
  double objective = r.squaredNorm();
  const double stop = options.tolerance * 1e-6;
  double damping = kInitialDamping;
  int steps = 0;
  while (steps < options.max_steps && objective > stop) {
    ++steps;
    const Eigen::MatrixXd jac = face_jacobian(gen, u, target.noise_level);
    Eigen::MatrixXd normal_matrix = jac * jac.transpose();
    normal_matrix.diagonal().array() += damping;
    // Minimum-norm damped Gauss-Newton step in latent space.
    Eigen::VectorXd step = -jac.transpose() * normal_matrix.ldlt().solve(r);
    if (const double len = step.norm(); len > kMaxStepNorm) step *= kMaxStepNorm / len;
    const Eigen::VectorXd trial = u + step;
    const Eigen::VectorXd trial_r = residual(trial);
    const double trial_objective = trial_r.squaredNorm();
    if (trial_objective < objective) {
      u = trial;
      r = trial_r;
      objective = trial_objective;
      damping = std::max(damping / 3.0, 1e-12);
    } else {
      damping *= 4.0;
      if (damping > kMaxDamping) break;
    }
  }

  objective = (face_params(gen, LatentCode(u, space)).to_vector() - goal).squaredNorm();
  if (!(objective <= options.tolerance)) {
    throw Error(ErrorCode::NoConvergence, "inversion stopped after " + std::to_string(steps) +
                                              " steps with residual " + std::to_string(objective));
  }
  const bool saturated = scores_from_face(gen, target).cwiseAbs().maxCoeff() > kSaturatedScore;
  return InversionResult{LatentCode(u, space), objective, steps, saturated};
}

}  // namespace hypersem::oracle
