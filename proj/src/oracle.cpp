#include "hypersem/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hypersem/error.hpp"
#include "hypersem/random.hpp"

namespace hypersem::oracle {

namespace {

constexpr int kMaxRepairRounds = 100;
constexpr double kRepairFailure = -1e-6;
constexpr std::uint64_t kFrameStream = 1;
constexpr std::uint64_t kWarpStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kIdentityStream = 4;

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd m(rows, cols);
  // Column-major fill order is part of the determinism contract.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  // Fix column signs so the frame is a unique function of `a`.
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

Eigen::MatrixXd psd_part(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

double min_eigenvalue(const Eigen::MatrixXd& a) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

double clamp01(double x) { return x <= 0.0 ? 0.0 : std::min(x, 1.0); }

double attribute_score(const GeneratorSpec& gen, const Eigen::VectorXd& s, const char* name) {
  const auto idx = gen.find_attribute(name);
  return idx ? s[static_cast<Eigen::Index>(*idx)] : 0.0;
}

}  // namespace

Eigen::MatrixXd default_gram() {
  Eigen::MatrixXd g(5, 5);
  // clang-format off
  g <<  1.00, -0.04, -0.06, -0.05, -0.04,
       -0.04,  1.00,  0.04, -0.10, -0.05,
       -0.06,  0.04,  1.00,  0.49,  0.38,
       -0.05, -0.10,  0.49,  1.00,  0.52,
       -0.04, -0.05,  0.38,  0.52,  1.00;
  // clang-format on
  return g;
}

std::vector<std::string> default_attributes() {
  return {"pose", "smile", "age", "gender", "eyeglasses"};
}

std::size_t GeneratorSpec::attribute_index(const std::string& name) const {
  if (auto idx = find_attribute(name)) return *idx;
  throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + name + "'");
}

std::optional<std::size_t> GeneratorSpec::find_attribute(const std::string& name) const {
  const auto it = std::find(config_.attributes.begin(), config_.attributes.end(), name);
  if (it == config_.attributes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - config_.attributes.begin());
}

SemanticDirection GeneratorSpec::ground_truth(const std::string& name) const {
  if (name == "quality") {
    return SemanticDirection(name, quality_dir_, config_.space, 0.0, {config_.seed, 0, 1.0});
  }
  const auto i = static_cast<Eigen::Index>(attribute_index(name));
  return SemanticDirection(name, normals_.col(i), config_.space, 0.0, {config_.seed, 0, 1.0});
}

GramRepair repair_gram(const Eigen::MatrixXd& gram) {
  const Eigen::Index m = gram.rows();
  if (m == 0 || gram.cols() != m) {
    throw Error(ErrorCode::InvalidArgument, "target Gram matrix must be square and non-empty");
  }
  if (!gram.allFinite() || (gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "target Gram matrix must be finite and symmetric");
  }
  if ((gram.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "target Gram matrix must have a unit diagonal");
  }
  if (min_eigenvalue(gram) >= 0.0) {
    return {gram, false, 0};
  }

  // Higham's alternating projections: PSD cone with Dykstra's correction,
  // then unit diagonal.
  Eigen::MatrixXd y = gram;
  Eigen::MatrixXd correction = Eigen::MatrixXd::Zero(m, m);
  int rounds = 0;
  for (; rounds < kMaxRepairRounds; ++rounds) {
    const Eigen::MatrixXd r = y - correction;
    const Eigen::MatrixXd x = psd_part(r);
    correction = x - r;
    const Eigen::MatrixXd previous = y;
    y = x;
    y.diagonal().setOnes();
    if ((y - previous).norm() < 1e-14 && min_eigenvalue(y) >= -1e-12) break;
  }
  if (min_eigenvalue(y) < kRepairFailure) {
    throw Error(ErrorCode::GramNotRepairable,
                "alternating projections did not reach a PSD matrix within 100 rounds");
  }
  // Close the remaining gap exactly: clip the spectrum and restore the diagonal.
  Eigen::MatrixXd clipped = psd_part(y);
  const Eigen::VectorXd inv_sqrt = clipped.diagonal().cwiseSqrt().cwiseInverse();
  clipped = inv_sqrt.asDiagonal() * clipped * inv_sqrt.asDiagonal();
  clipped = 0.5 * (clipped + clipped.transpose());
  clipped.diagonal().setOnes();
  return {clipped, true, rounds};
}

GeneratorSpec make_generator(const GeneratorConfig& config) {
  const auto m = static_cast<Eigen::Index>(config.attributes.size());
  if (m == 0) {
    throw Error(ErrorCode::InvalidArgument, "generator needs at least one attribute");
  }
  std::set<std::string> names;
  for (const auto& name : config.attributes) {
    if (name.empty() || name == "quality" || !names.insert(name).second) {
      throw Error(ErrorCode::InvalidArgument,
                  "attribute names must be unique, non-empty and not 'quality': '" + name + "'");
    }
  }
  if (config.gram.rows() != m || config.gram.cols() != m) {
    throw Error(ErrorCode::DimensionMismatch, "Gram matrix must be m×m for m attributes");
  }
  if (config.identity_dims < 0) {
    throw Error(ErrorCode::InvalidArgument, "identity_dims must be nonnegative");
  }
  const Eigen::Index k = config.identity_dims;
  if (config.dim < LatentCode::kMinDim || config.dim < m + k + 1) {
    throw Error(ErrorCode::DimensionTooSmall,
                "latent dimension " + std::to_string(config.dim) + " cannot host " +
                    std::to_string(m) + " attributes, a quality axis and " + std::to_string(k) +
                    " identity directions");
  }
  if (!(config.noise_sigma >= 0.0) || !std::isfinite(config.noise_sigma)) {
    throw Error(ErrorCode::InvalidArgument, "noise_sigma must be finite and nonnegative");
  }
  if (!(config.warp_scale > 0.0 && config.warp_scale <= 3.0)) {
    throw Error(ErrorCode::OutOfRange, "warp_scale must lie in (0, 3]");
  }
  if (!config.lambdas.empty() && static_cast<Eigen::Index>(config.lambdas.size()) != m) {
    throw Error(ErrorCode::DimensionMismatch, "need one lambda per attribute");
  }

  GeneratorSpec gen;
  gen.config_ = config;
  gen.lambdas_ = Eigen::VectorXd::Ones(m);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(config.lambdas.size()); ++i) {
    const double lambda = config.lambdas[static_cast<std::size_t>(i)];
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw Error(ErrorCode::InvalidArgument, "every lambda must be positive");
    }
    gen.lambdas_[i] = lambda;
  }

  const GramRepair repair = repair_gram(config.gram);
  gen.realized_gram_ = repair.gram;
  gen.gram_repaired_ = repair.repaired;

  // Factor G' = FᵀF and embed the columns of F through a seeded orthonormal frame.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(repair.gram);
  const Eigen::MatrixXd factor = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                                 eig.eigenvectors().transpose();
  const Eigen::Index d = config.dim;
  // Semantic and quality axes live on the first d − k coordinates, identity on
  // the last k. Disjoint supports make identity features bit-identical under
  // edits along planted normals, not merely equal up to rounding.
  const Eigen::Index semantic_rows = d - k;
  const Eigen::MatrixXd frame = orthonormal_columns(
      gaussian_matrix(semantic_rows, m + 1, derive_seed(config.seed, {kFrameStream})));
  gen.normals_ = Eigen::MatrixXd::Zero(d, m);
  gen.normals_.topRows(semantic_rows) = frame.leftCols(m) * factor;
  for (Eigen::Index i = 0; i < m; ++i) gen.normals_.col(i).normalize();
  gen.quality_dir_ = Eigen::VectorXd::Zero(d);
  gen.quality_dir_.head(semantic_rows) = frame.col(m);
  gen.identity_dirs_ = Eigen::MatrixXd::Zero(d, k);
  if (k > 0) {
    gen.identity_dirs_.bottomRows(k) =
        orthonormal_columns(gaussian_matrix(k, k, derive_seed(config.seed, {kIdentityStream})));
  }
  gen.warp_rotation_ = orthonormal_columns(gaussian_matrix(d, d, derive_seed(config.seed, {kWarpStream})));
  return gen;
}

Eigen::VectorXd semantic_coordinates(const GeneratorSpec& gen, const LatentCode& code) {
  if (code.dim() != gen.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "latent dimension " + std::to_string(code.dim()) +
                                                  " != generator dimension " +
                                                  std::to_string(gen.dim()));
  }
  if (code.space() == gen.space()) return code.values();
  if (code.space() == Space::Z) return warp(gen, code).values();
  throw Error(ErrorCode::SpaceMismatch, "a Z-space generator cannot score W codes");
}

Eigen::VectorXd score(const GeneratorSpec& gen, const LatentCode& code, ScoreMode mode) {
  const Eigen::VectorXd u = semantic_coordinates(gen, code);
  Eigen::VectorXd s = gen.lambdas().cwiseProduct(gen.normals().transpose() * u);
  if (mode == ScoreMode::Linear) return s;
  s = s.array().tanh();
  if (mode == ScoreMode::Observed && gen.config().noise_sigma > 0.0) {
    const std::uint64_t key = hash_values({code.values().data(), static_cast<std::size_t>(code.dim())});
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const std::uint64_t stream =
          derive_seed(gen.config().seed, {kNoiseStream, key, static_cast<std::uint64_t>(i)});
      s[i] += gen.config().noise_sigma * keyed_normal(stream);
    }
  }
  return s;
}

double quality_coordinate(const GeneratorSpec& gen, const LatentCode& code) {
  return gen.quality_dir().dot(semantic_coordinates(gen, code));
}

int label(const GeneratorSpec& gen, const LatentCode& code, const std::string& attribute) {
  const Eigen::VectorXd u = semantic_coordinates(gen, code);
  const double value =
      attribute == "quality"
          ? gen.quality_dir().dot(u)
          : gen.normals().col(static_cast<Eigen::Index>(gen.attribute_index(attribute))).dot(u);
  return value >= 0.0 ? 1 : -1;
}

FaceParams FaceParams::clamped() const {
  FaceParams out = *this;
  out.yaw = std::clamp(yaw, -kYawSpan, kYawSpan);
  out.mouth_curve = std::clamp(mouth_curve, -1.0, 1.0);
  out.wrinkle_density = clamp01(wrinkle_density);
  out.jaw_width = std::clamp(jaw_width, 1.0 - kJawSpan, 1.0 + kJawSpan);
  out.glasses_opacity = clamp01(glasses_opacity);
  out.noise_level = clamp01(noise_level);
  return out;
}

Eigen::VectorXd FaceParams::to_vector() const {
  const auto k = static_cast<Eigen::Index>(identity_features.size());
  Eigen::VectorXd v(6 + k);
  v[0] = yaw;
  v[1] = mouth_curve;
  v[2] = wrinkle_density;
  v[3] = jaw_width;
  v[4] = glasses_opacity;
  for (Eigen::Index i = 0; i < k; ++i) v[5 + i] = identity_features[static_cast<std::size_t>(i)];
  v[5 + k] = noise_level;
  return v;
}

FaceParams face_params(const GeneratorSpec& gen, const LatentCode& code) {
  const Eigen::VectorXd u = semantic_coordinates(gen, code);
  const Eigen::VectorXd s =
      gen.lambdas().cwiseProduct(gen.normals().transpose() * u).array().tanh().matrix();
  FaceParams p;
  p.yaw = kYawSpan * attribute_score(gen, s, "pose");
  p.mouth_curve = attribute_score(gen, s, "smile");
  p.wrinkle_density = (attribute_score(gen, s, "age") + 1.0) / 2.0;
  p.jaw_width = 1.0 + kJawSpan * attribute_score(gen, s, "gender");
  p.glasses_opacity = clamp01((attribute_score(gen, s, "eyeglasses") + 1.0) / 2.0);
  const Eigen::VectorXd identity = gen.identity_dirs().transpose() * u;
  p.identity_features.assign(identity.data(), identity.data() + identity.size());
  p.noise_level = clamp01(-gen.quality_dir().dot(u) / kQualityScale);
  return p.clamped();
}

Eigen::VectorXd scores_from_face(const GeneratorSpec& gen, const FaceParams& face) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gen.attribute_count()));
  auto put = [&](const char* name, double value) {
    if (auto idx = gen.find_attribute(name)) s[static_cast<Eigen::Index>(*idx)] = value;
  };
  put("pose", face.yaw / kYawSpan);
  put("smile", face.mouth_curve);
  put("age", 2.0 * face.wrinkle_density - 1.0);
  put("gender", (face.jaw_width - 1.0) / kJawSpan);
  put("eyeglasses", 2.0 * face.glasses_opacity - 1.0);
  return s;
}

LatentCode warp(const GeneratorSpec& gen, const LatentCode& z) {
  if (z.space() != Space::Z) {
    throw Error(ErrorCode::SpaceMismatch, "warp expects a Z code");
  }
  if (z.dim() != gen.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "warp: latent dimension mismatch");
  }
  const double s = gen.warp_scale();
  const Eigen::VectorXd squashed = (s * z.values()).array().tanh() / s;
  return LatentCode(gen.warp_rotation() * squashed, Space::W);
}

LatentCode unwarp(const GeneratorSpec& gen, const LatentCode& w) {
  if (w.space() != Space::W) {
    throw Error(ErrorCode::SpaceMismatch, "unwarp expects a W code");
  }
  if (w.dim() != gen.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "unwarp: latent dimension mismatch");
  }
  const double s = gen.warp_scale();
  const Eigen::VectorXd v = s * (gen.warp_rotation().transpose() * w.values());
  if (v.cwiseAbs().maxCoeff() >= 1.0) {
    throw Error(ErrorCode::OutOfRange, "W code lies outside the image of the warp");
  }
  return LatentCode(v.array().atanh() / s, Space::Z);
}

}  // namespace hypersem::oracle
