#include <cmath>
#include <random>

#include <doctest.h>

#include "hypersem/error.hpp"
#include "hypersem/geometry.hpp"

using namespace hypersem;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Eigen::VectorXd axis(Eigen::Index d, Eigen::Index i) { return Eigen::VectorXd::Unit(d, i); }

SemanticDirection dir(const std::string& name, const Eigen::VectorXd& v) {
  return SemanticDirection::from_raw(name, v);
}

Eigen::VectorXd gaussian(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = normal(rng);
  return v;
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

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

TEST_CASE("latent code invariants") {
  CHECK(code_of([] { LatentCode(vec({1, 2, 3})); }) == ErrorCode::DimensionTooSmall);
  CHECK(code_of([] { LatentCode(vec({1, 2, NAN, 0})); }) == ErrorCode::NonFinite);
  CHECK(code_of([] { LatentCode(vec({1, 2, INFINITY, 0})); }) == ErrorCode::NonFinite);
  const LatentCode z(vec({1, 2, 3, 4}), Space::W);
  CHECK(z.dim() == 4);
  CHECK(z.space() == Space::W);
  CHECK(parse_space("W") == Space::W);
  CHECK(code_of([] { parse_space("Q"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("normalize") {
  CHECK(normalize(vec({3, 0, 0, 0})) == vec({1, 0, 0, 0}));
  CHECK(code_of([] { normalize(vec({0, 0, 0, 0})); }) == ErrorCode::ZeroVector);
  CHECK(code_of([] { normalize(vec({1e-13, 0, 0, 0})); }) == ErrorCode::ZeroVector);
  const Eigen::VectorXd n = normalize(vec({1, 1, 0, 0}));
  CHECK(n[0] == doctest::Approx(kInvSqrt2).epsilon(1e-15));
  CHECK(n[1] == doctest::Approx(kInvSqrt2).epsilon(1e-15));
  CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("semantic direction rejects non-unit normals") {
  CHECK(code_of([] { SemanticDirection("a", vec({0.5, 0, 0, 0})); }) == ErrorCode::UnitNormViolation);
  CHECK_NOTHROW(SemanticDirection("a", vec({1.0 + 5e-10, 0, 0, 0})));
  CHECK(code_of([] { SemanticDirection("a", vec({1.0 + 5e-9, 0, 0, 0})); }) ==
        ErrorCode::UnitNormViolation);
}

TEST_CASE("distance") {
  const auto e1 = dir("e1", axis(4, 0));
  CHECK(distance(e1, LatentCode(vec({3, 0, 0, 0}))) == 3.0);
  CHECK(distance(e1, LatentCode::zeros(4)) == 0.0);
  const auto diag = dir("diag", vec({1, 1, 0, 0}));
  CHECK(distance(diag, LatentCode(vec({1, 1, 0, 0}))) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(distance(e1, LatentCode(vec({-2, 5, 0, 0}))) == -2.0);
  CHECK(code_of([&] { distance(e1, LatentCode::zeros(5)); }) == ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { distance(e1, LatentCode::zeros(4, Space::W)); }) == ErrorCode::SpaceMismatch);
}

TEST_CASE("edit") {
  const auto e1 = dir("e1", axis(4, 0));
  CHECK(edit(LatentCode::zeros(4), e1, 2.0).values() == vec({2, 0, 0, 0}));
  const LatentCode z(vec({0.3, -1.1, 2.0, 0.7}));
  CHECK(edit(z, e1, 0.0) == z);
  CHECK(code_of([&] { edit(z, e1, NAN); }) == ErrorCode::NonFinite);
  CHECK(code_of([&] { edit(LatentCode::zeros(5), e1, 1.0); }) == ErrorCode::DimensionMismatch);

  const LatentCode at(vec({-1.3, 4.0, 0, 0}));
  CHECK(distance(e1, edit(at, e1, 1.3)) == doctest::Approx(0.0).epsilon(1e-15));

  // Dyadic steps along an axis are exactly representable, so additivity is exact.
  CHECK(edit(edit(z, e1, 0.5), e1, 0.25) == edit(z, e1, 0.75));
}

TEST_CASE("interpolate") {
  const LatentCode z1(vec({1, -2, 3, 0.5}));
  const LatentCode z2(vec({-4, 0, 1, 9}));
  CHECK(interpolate(z1, z2, 0.0) == z1);
  CHECK(interpolate(z1, z2, 1.0) == z2);
  CHECK(interpolate(LatentCode::zeros(4), LatentCode(vec({2, 2, 0, 0})), 0.5).values() == vec({1, 1, 0, 0}));
  CHECK(code_of([&] { interpolate(z1, z2, 1.5); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { interpolate(z1, z2, -0.1); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { interpolate(z1, LatentCode::zeros(4, Space::W), 0.5); }) == ErrorCode::SpaceMismatch);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = dir("n", gaussian(rng, 16));
    const LatentCode a(gaussian(rng, 16));
    const LatentCode b(gaussian(rng, 16));
    const double t = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double expected = (1.0 - t) * distance(n, a) + t * distance(n, b);
    CHECK(distance(n, interpolate(a, b, t)) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("cosine") {
  const auto e1 = dir("e1", axis(4, 0));
  const auto e2 = dir("e2", axis(4, 1));
  CHECK(cosine(e1, e1) == 1.0);
  CHECK(cosine(e1, e2) == 0.0);
  CHECK(cosine(e1, dir("d", vec({1, 1, 0, 0}))) == doctest::Approx(kInvSqrt2).epsilon(1e-15));
  CHECK(code_of([&] { cosine(e1, dir("x", axis(5, 0))); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("condition set validation") {
  const auto a = dir("a", axis(4, 0));
  const auto b = dir("b", axis(4, 1));
  CHECK(code_of([&] { ConditionSet({a, SemanticDirection("a", axis(4, 1))}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { ConditionSet({a, dir("c", vec({1, 1e-9, 0, 0}))}); }) ==
        ErrorCode::DegenerateProjection);
  CHECK(code_of([&] { ConditionSet({a, SemanticDirection("w", axis(4, 1), Space::W)}); }) ==
        ErrorCode::SpaceMismatch);
  const ConditionSet set({a, b});
  CHECK(set.size() == 2);
  CHECK(set.basis().cols() == 2);
}

TEST_CASE("condition: worked examples") {
  const auto e1 = dir("e1", axis(4, 0));
  const auto e2 = dir("e2", axis(4, 1));
  const auto e3 = dir("e3", axis(4, 2));

  // Orthogonal conditions leave the primal alone.
  const auto same = condition(e1, ConditionSet({e2, e3}));
  CHECK((same.normal() - e1.normal()).cwiseAbs().maxCoeff() <= 1e-15);

  CHECK(code_of([&] { condition(e1, ConditionSet({dir("c", axis(4, 0))})); }) ==
        ErrorCode::DegenerateProjection);
  CHECK(code_of([&] { condition(e1, ConditionSet({e1})); }) == ErrorCode::DegenerateProjection);

  // e1 − (e1·c)c with c = (1,1,0,0)/√2 is (1/2, −1/2, 0, 0); normalized (1/√2, −1/√2, 0, 0).
  const auto c = dir("c", vec({1, 1, 0, 0}));
  const auto r = condition(e1, ConditionSet({c}));
  CHECK(r.normal()[0] == doctest::Approx(kInvSqrt2).epsilon(1e-15));
  CHECK(r.normal()[1] == doctest::Approx(-kInvSqrt2).epsilon(1e-15));
  CHECK(r.normal()[2] == 0.0);
  CHECK(r.normal()[3] == 0.0);
  CHECK(r.intercept() == 0.0);

  // Primal in the span of two conditions.
  CHECK(code_of([&] { condition(dir("p", vec({1, 1, 0, 0})), ConditionSet({e1, e2})); }) ==
        ErrorCode::DegenerateProjection);
  // Empty condition set returns the primal.
  CHECK(condition(e1, ConditionSet({})) == e1);
}

TEST_CASE("condition: properties over random directions") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 8 + trial % 24;
    const auto primal = dir("p", gaussian(rng, d));
    std::vector<SemanticDirection> conds;
    const int p = 1 + trial % 4;
    for (int i = 0; i < p; ++i) conds.push_back(dir("c" + std::to_string(i), gaussian(rng, d)));
    const ConditionSet set(conds);
    const auto r = condition(primal, set);

    CHECK(std::abs(r.normal().norm() - 1.0) <= 1e-12);
    for (const auto& c : conds) CHECK(std::abs(cosine(r, c)) <= 1e-9);

    const auto again = condition(r, set);
    CHECK((again.normal() - r.normal()).cwiseAbs().maxCoeff() <= 1e-9);

    const LatentCode z(gaussian(rng, d));
    const double alpha = std::normal_distribution<double>(0.0, 3.0)(rng);
    const LatentCode moved = edit(z, r, alpha);
    for (const auto& c : conds) CHECK(std::abs(distance(c, moved) - distance(c, z)) <= 1e-9);
    CHECK(std::abs(distance(r, moved) - distance(r, z) - alpha) <= 1e-9);

    // Additivity within rounding.
    const double beta = std::normal_distribution<double>(0.0, 3.0)(rng);
    const auto twice = edit(edit(z, primal, alpha), primal, beta).values();
    const auto once = edit(z, primal, alpha + beta).values();
    CHECK((twice - once).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("condition: single-condition closed form matches least squares") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n1 = dir("p", gaussian(rng, 12));
    const auto n2 = dir("c", gaussian(rng, 12));
    const Eigen::VectorXd closed = n1.normal() - n1.normal().dot(n2.normal()) * n2.normal();
    const auto r = condition(n1, ConditionSet({n2}));
    // Both are normalized versions of the same pre-normalization vector.
    CHECK((r.normal() * closed.norm() - closed).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("condition is independent of the order of the conditions") {
  std::mt19937_64 rng(99);
  const auto primal = dir("p", gaussian(rng, 10));
  const auto a = dir("a", gaussian(rng, 10));
  const auto b = dir("b", gaussian(rng, 10));
  const auto ab = condition(primal, ConditionSet({a, b}));
  const auto ba = condition(primal, ConditionSet({b, a}));
  CHECK((ab.normal() - ba.normal()).cwiseAbs().maxCoeff() <= 1e-12);
}
