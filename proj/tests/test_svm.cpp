#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "hypersem/error.hpp"
#include "hypersem/svm.hpp"

using namespace hypersem;
using svm::LabeledDataset;

namespace {

LabeledDataset make(std::initializer_list<std::pair<int, std::vector<double>>> rows) {
  LabeledDataset ds;
  const auto d = static_cast<Eigen::Index>(rows.begin()->second.size());
  ds.points.resize(static_cast<Eigen::Index>(rows.size()), d);
  Eigen::Index r = 0;
  for (const auto& [y, x] : rows) {
    for (Eigen::Index j = 0; j < d; ++j) ds.points(r, j) = x[static_cast<std::size_t>(j)];
    ds.labels.push_back(y);
    ++r;
  }
  return ds;
}

// Planted hyperplane through the origin, points kept at |n*ᵀx| ≥ margin.
LabeledDataset planted(const Eigen::VectorXd& n, std::size_t count, double margin, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  LabeledDataset ds;
  ds.points.resize(static_cast<Eigen::Index>(count), n.size());
  for (std::size_t i = 0; i < count;) {
    Eigen::VectorXd x(n.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = normal(rng);
    const double s = n.dot(x);
    if (std::abs(s) < margin) continue;
    ds.points.row(static_cast<Eigen::Index>(i)) = x.transpose();
    ds.labels.push_back(s >= 0.0 ? 1 : -1);
    ++i;
  }
  return ds;
}

// Brute-force maximum-margin direction in 2-D: scan angles, put the offset
// midway between the classes, keep the widest gap.
Eigen::Vector2d grid_search_direction(const LabeledDataset& ds) {
  double best_gap = -INFINITY;
  Eigen::Vector2d best;
  const int steps = 200'000;
  for (int k = 0; k < steps; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / steps;
    const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
    double min_pos = INFINITY;
    double max_neg = -INFINITY;
    for (Eigen::Index i = 0; i < ds.points.rows(); ++i) {
      const double p = ds.points.row(i).head<2>().dot(u);
      if (ds.labels[static_cast<std::size_t>(i)] > 0) {
        min_pos = std::min(min_pos, p);
      } else {
        max_neg = std::max(max_neg, p);
      }
    }
    if (min_pos - max_neg > best_gap) {
      best_gap = min_pos - max_neg;
      best = u;
    }
  }
  return best;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("four-point example agrees with brute-force max-margin direction") {
  const auto ds = make({{1, {2, 0}}, {1, {3, 1}}, {-1, {-2, 0}}, {-1, {-3, -1}}});
  const Eigen::Vector2d oracle = grid_search_direction(ds);
  CHECK(oracle.dot(Eigen::Vector2d(1, 0)) >= 0.999);
  const auto b = svm::fit(ds, {});
  CHECK(b.direction.normal().dot(oracle) >= 0.99);
  CHECK(b.train_accuracy == 1.0);
}

TEST_CASE("mirrored pairs are separated perfectly") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  LabeledDataset ds;
  ds.points.resize(200, 6);
  for (Eigen::Index i = 0; i < 100; ++i) {
    Eigen::VectorXd x(6);
    for (Eigen::Index j = 0; j < 6; ++j) x[j] = normal(rng);
    x[0] = 1.0 + std::abs(x[0]);
    ds.points.row(2 * i) = x.transpose();
    ds.points.row(2 * i + 1) = -x.transpose();
    ds.labels.push_back(1);
    ds.labels.push_back(-1);
  }
  CHECK(svm::fit(ds, {}).train_accuracy == 1.0);
}

TEST_CASE("planted boundary is recovered in 32 dimensions") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  Eigen::VectorXd n(32);
  for (Eigen::Index j = 0; j < 32; ++j) n[j] = normal(rng);
  n.normalize();
  const auto ds = planted(n, 2000, 0.0, 3);
  const auto b = svm::fit(ds, {});
  CHECK(b.direction.normal().dot(n) >= 0.95);
}

TEST_CASE("separable data with margin 0.5 and small lambda trains to 100%") {
  Eigen::VectorXd n = Eigen::VectorXd::Zero(16);
  n[3] = 1.0;
  const auto ds = planted(n, 1000, 0.5, 8);
  svm::SvmConfig config;
  config.lambda = 1e-4;
  CHECK(svm::fit(ds, config).train_accuracy == 1.0);
}

TEST_CASE("fit is deterministic") {
  Eigen::VectorXd n = Eigen::VectorXd::Ones(10).normalized();
  const auto ds = planted(n, 500, 0.1, 4);
  svm::SvmConfig config;
  config.seed = 42;
  const auto a = svm::fit(ds, config);
  const auto b = svm::fit(ds, config);
  CHECK(a.direction == b.direction);
  CHECK(a.train_accuracy == b.train_accuracy);
  config.seed = 43;
  const auto c = svm::fit(ds, config);
  CHECK(c.direction.meta().seed == 43);
}

TEST_CASE("scaling the inputs preserves the decisions") {
  Eigen::VectorXd n = Eigen::VectorXd::Zero(8);
  n[0] = 0.6;
  n[1] = 0.8;
  const auto ds = planted(n, 600, 0.5, 21);
  const auto test = planted(n, 300, 0.5, 22);
  for (double c : {0.5, 3.0}) {
    LabeledDataset scaled = ds;
    scaled.points *= c;
    const auto a = svm::fit(ds, {});
    const auto b = svm::fit(scaled, {});
    for (Eigen::Index i = 0; i < test.points.rows(); ++i) {
      const Eigen::VectorXd x = test.points.row(i).transpose();
      CHECK(svm::classify(a, x) == svm::classify(b, Eigen::VectorXd(c * x)));
    }
  }
}

TEST_CASE("negated labels give the opposite normal") {
  Eigen::VectorXd n = Eigen::VectorXd::Zero(12);
  n[5] = 1.0;
  const auto ds = planted(n, 800, 0.3, 12);
  LabeledDataset flipped = ds;
  for (int& y : flipped.labels) y = -y;
  const auto a = svm::fit(ds, {});
  const auto b = svm::fit(flipped, {});
  CHECK(cosine(a.direction, b.direction) <= -0.99);
}

TEST_CASE("classify and accuracy") {
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(4, 0);
  const SemanticDirection d("x", e1, Space::Z, 0.0);
  CHECK(svm::classify(d, Eigen::Vector4d(5, 0, 0, 0)) == 1);
  CHECK(svm::classify(d, Eigen::Vector4d(-5, 0, 0, 0)) == -1);
  const SemanticDirection shifted("x", e1, Space::Z, 1.5);
  CHECK(svm::classify(shifted, Eigen::Vector4d(-1.5, 0, 0, 0)) == 1);
  CHECK(code_of([&] { svm::classify(d, Eigen::Vector3d(1, 0, 0)); }) == ErrorCode::DimensionMismatch);

  auto ds = make({{1, {1, 0, 0, 0}}, {-1, {-1, 0, 0, 0}}, {1, {2, 1, 0, 0}}});
  CHECK(svm::accuracy(d, ds) == 1.0);
  for (int& y : ds.labels) y = -y;
  CHECK(svm::accuracy(d, ds) == 0.0);
  CHECK(code_of([&] { svm::accuracy(d, LabeledDataset{}); }) == ErrorCode::EmptyDataset);
}

TEST_CASE("fit rejects bad input") {
  CHECK(code_of([] { svm::fit(LabeledDataset{}, {}); }) == ErrorCode::EmptyDataset);
  CHECK(code_of([] { svm::fit(make({{1, {1, 0}}, {1, {2, 0}}}), {}); }) == ErrorCode::SingleClass);
  CHECK(code_of([] { svm::fit(make({{1, {1, 0}}, {0, {2, 0}}}), {}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([] { svm::fit(make({{1, {NAN, 0}}, {-1, {2, 0}}}), {}); }) == ErrorCode::NonFinite);
  svm::SvmConfig bad;
  bad.lambda = 0.0;
  CHECK(code_of([&] { svm::fit(make({{1, {1, 0}}, {-1, {-1, 0}}}), bad); }) == ErrorCode::InvalidArgument);
  bad = {};
  bad.epochs = 0;
  CHECK(code_of([&] { svm::fit(make({{1, {1, 0}}, {-1, {-1, 0}}}), bad); }) == ErrorCode::InvalidArgument);
}
