#include "hypersem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hypersem/error.hpp"

namespace hypersem {

namespace {

constexpr double kZeroNorm = 1e-12;
constexpr double kDegenerateResidual = 1e-9;

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": " + std::to_string(a) + " != " + std::to_string(b));
  }
}

void require_same_space(Space a, Space b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::SpaceMismatch, std::string(what) + ": " + std::string(to_string(a)) +
                                              " vs " + std::string(to_string(b)));
  }
}

}  // namespace

std::string_view to_string(Space space) { return space == Space::Z ? "Z" : "W"; }

Space parse_space(std::string_view text) {
  if (text == "Z" || text == "z") return Space::Z;
  if (text == "W" || text == "w") return Space::W;
  throw Error(ErrorCode::InvalidArgument, "unknown latent space '" + std::string(text) + "'");
}

LatentCode::LatentCode(Eigen::VectorXd values, Space space)
    : values_(std::move(values)), space_(space) {
  if (values_.size() < kMinDim) {
    throw Error(ErrorCode::DimensionTooSmall,
                "latent codes need at least 4 dimensions, got " + std::to_string(values_.size()));
  }
  if (!values_.allFinite()) {
    throw Error(ErrorCode::NonFinite, "latent code has non-finite entries");
  }
}

LatentCode LatentCode::zeros(Eigen::Index dim, Space space) {
  return LatentCode(Eigen::VectorXd::Zero(dim), space);
}

SemanticDirection::SemanticDirection(std::string name, Eigen::VectorXd normal, Space space,
                                     double intercept, TrainingMeta meta)
    : name_(std::move(name)),
      normal_(std::move(normal)),
      space_(space),
      intercept_(intercept),
      meta_(meta) {
  if (normal_.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "direction '" + name_ + "' is empty");
  }
  if (!normal_.allFinite() || !std::isfinite(intercept_)) {
    throw Error(ErrorCode::NonFinite, "direction '" + name_ + "' has non-finite entries");
  }
  const double norm = normal_.norm();
  if (std::abs(norm - 1.0) > kUnitTolerance) {
    throw Error(ErrorCode::UnitNormViolation,
                "direction '" + name_ + "' has norm " + std::to_string(norm));
  }
}

SemanticDirection SemanticDirection::from_raw(std::string name, const Eigen::VectorXd& raw,
                                              Space space, double intercept, TrainingMeta meta) {
  return SemanticDirection(std::move(name), normalize(raw), space, intercept, meta);
}

ConditionSet::ConditionSet(std::vector<SemanticDirection> directions)
    : directions_(std::move(directions)) {
  if (directions_.empty()) {
    return;
  }
  std::set<std::string> names;
  const auto& first = directions_.front();
  for (const auto& d : directions_) {
    if (!names.insert(d.name()).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate condition '" + d.name() + "'");
    }
    require_same_dim(first.dim(), d.dim(), "condition dimensions");
    require_same_space(first.space(), d.space(), "condition spaces");
  }
  basis_.resize(first.dim(), static_cast<Eigen::Index>(directions_.size()));
  for (std::size_t j = 0; j < directions_.size(); ++j) {
    basis_.col(static_cast<Eigen::Index>(j)) = directions_[j].normal();
  }
  gram_ = basis_.transpose() * basis_;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= kMinGramEigenvalue) {
    throw Error(ErrorCode::DegenerateProjection,
                "condition normals are (nearly) linearly dependent; smallest Gram eigenvalue " +
                    std::to_string(eig.eigenvalues().minCoeff()));
  }
}

Eigen::VectorXd normalize(const Eigen::VectorXd& v) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::NonFinite, "cannot normalize a non-finite vector");
  }
  const double norm = v.norm();
  if (norm <= kZeroNorm) {
    throw Error(ErrorCode::ZeroVector, "cannot normalize a vector of norm " + std::to_string(norm));
  }
  return v / norm;
}

double distance(const SemanticDirection& n, const LatentCode& z) {
  require_same_dim(n.dim(), z.dim(), "distance");
  require_same_space(n.space(), z.space(), "distance");
  return n.normal().dot(z.values());
}

LatentCode edit(const LatentCode& z, const SemanticDirection& n, double alpha) {
  require_same_dim(n.dim(), z.dim(), "edit");
  require_same_space(n.space(), z.space(), "edit");
  if (!std::isfinite(alpha)) {
    throw Error(ErrorCode::NonFinite, "edit step must be finite");
  }
  return LatentCode(z.values() + alpha * n.normal(), z.space());
}

LatentCode interpolate(const LatentCode& z1, const LatentCode& z2, double t) {
  require_same_dim(z1.dim(), z2.dim(), "interpolate");
  require_same_space(z1.space(), z2.space(), "interpolate");
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "interpolation parameter must lie in [0, 1]");
  }
  if (t == 0.0) return z1;
  if (t == 1.0) return z2;
  return LatentCode((1.0 - t) * z1.values() + t * z2.values(), z1.space());
}

double cosine(const SemanticDirection& n1, const SemanticDirection& n2) {
  require_same_dim(n1.dim(), n2.dim(), "cosine");
  return std::clamp(n1.normal().dot(n2.normal()), -1.0, 1.0);
}

SemanticDirection condition(const SemanticDirection& primal, const ConditionSet& conditions) {
  if (conditions.empty()) {
    return primal;
  }
  const auto& c = conditions.basis();
  require_same_dim(primal.dim(), c.rows(), "condition");
  require_same_space(primal.space(), conditions.directions().front().space(), "condition");

  std::string name = primal.name() + "|";
  for (const auto& d : conditions.directions()) {
    if (d.name() == primal.name()) {
      throw Error(ErrorCode::DegenerateProjection,
                  "cannot condition '" + primal.name() + "' on itself");
    }
    if (name.back() != '|') name += ',';
    name += d.name();
  }

  // Normal equations on the (small, well-conditioned) Gram matrix.
  const Eigen::VectorXd coef = conditions.gram().ldlt().solve(c.transpose() * primal.normal());
  Eigen::VectorXd residual = primal.normal() - c * coef;
  const double norm = residual.norm();
  if (norm <= kDegenerateResidual) {
    throw Error(ErrorCode::DegenerateProjection,
                "'" + primal.name() + "' lies in the span of its conditions");
  }
  residual /= norm;
  return SemanticDirection(std::move(name), std::move(residual), primal.space(), 0.0,
                           primal.meta());
}

}  // namespace hypersem
