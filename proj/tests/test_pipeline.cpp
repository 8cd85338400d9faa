#include <algorithm>
#include <cmath>
#include <set>

#include <doctest.h>

#include "hypersem/error.hpp"
#include "hypersem/pipeline.hpp"
#include "hypersem/random.hpp"

using namespace hypersem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

oracle::GeneratorSpec small_generator(int dim, double noise, Space space = Space::Z,
                                      std::uint64_t seed = 3) {
  oracle::GeneratorConfig config;
  config.dim = dim;
  config.noise_sigma = noise;
  config.space = space;
  config.seed = seed;
  return oracle::make_generator(config);
}

struct WorkerGuard {
  ~WorkerGuard() { set_worker_count(0); }
};

}  // namespace

TEST_CASE("synthesize_dataset is a pure function of the seed") {
  const auto gen = small_generator(32, 0.1);
  WorkerGuard guard;
  set_worker_count(1);
  const auto serial = pipeline::synthesize_dataset(gen, 5000, 9);
  set_worker_count(4);
  const auto parallel = pipeline::synthesize_dataset(gen, 5000, 9);
  CHECK(serial == parallel);
  CHECK(serial.count == 5000);
  CHECK(serial.latents.size() == 5000u * 32u);
  CHECK(serial.scores.size() == 5000u * 5u);

  const auto other = pipeline::synthesize_dataset(gen, 5000, 10);
  CHECK(other.latents != serial.latents);

  // A prefix of a larger draw is the smaller draw.
  const auto longer = pipeline::synthesize_dataset(gen, 6000, 9);
  CHECK(std::equal(serial.latents.begin(), serial.latents.end(), longer.latents.begin()));
}

TEST_CASE("stored scores are the observed oracle scores of the stored latents") {
  const auto gen = small_generator(16, 0.1);
  const auto ds = pipeline::synthesize_dataset(gen, 300, 4);
  for (std::uint64_t i = 0; i < ds.count; i += 37) {
    const Eigen::VectorXd s = oracle::score(gen, ds.code(i), oracle::ScoreMode::Observed);
    for (std::size_t a = 0; a < ds.attribute_count; ++a) {
      CHECK(ds.score_row(i)[a] == static_cast<float>(s[static_cast<Eigen::Index>(a)]));
    }
  }
  const auto column = ds.score_column(2);
  CHECK(column.size() == 300);
  CHECK(column[37] == static_cast<double>(ds.score_row(37)[2]));
}

TEST_CASE("synthesized latents are standard normal per coordinate") {
  const auto gen = small_generator(512, 0.1);
  const auto ds = pipeline::synthesize_dataset(gen, 50'000, 1);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(512);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(512);
  for (std::uint64_t i = 0; i < ds.count; ++i) {
    const auto row = ds.latent(i);
    for (Eigen::Index j = 0; j < 512; ++j) {
      const double x = row[static_cast<std::size_t>(j)];
      sum[j] += x;
      sum_sq[j] += x * x;
    }
  }
  const double n = static_cast<double>(ds.count);
  const Eigen::VectorXd mean = sum / n;
  const Eigen::VectorXd var = (sum_sq / n - mean.cwiseProduct(mean)) * (n / (n - 1.0));
  CHECK(mean.cwiseAbs().maxCoeff() <= 0.02);
  CHECK(var.minCoeff() >= 0.95);
  CHECK(var.maxCoeff() <= 1.05);
}

TEST_CASE("synthesize_dataset rejects bad requests") {
  const auto gen = small_generator(16, 0.1);
  CHECK(code_of([&] { pipeline::synthesize_dataset(gen, 0, 1); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { pipeline::synthesize_dataset(gen, 10, 1, Space::W); }) == ErrorCode::SpaceMismatch);
  const auto wgen = small_generator(16, 0.1, Space::W);
  const auto w = pipeline::synthesize_dataset(wgen, 10, 1, Space::W);
  CHECK(w.space == Space::W);
  CHECK(w.code(0).space() == Space::W);
}

TEST_CASE("select_candidates picks the extremes") {
  const auto gen = small_generator(16, 0.1);
  const auto ds = pipeline::synthesize_dataset(gen, 3, 1);
  const std::vector<double> scores = {-1.0, 0.0, 1.0};
  const auto split = pipeline::select_candidates(ds, scores, "x", 1, 0);
  std::set<std::uint64_t> chosen(split.train_indices.begin(), split.train_indices.end());
  chosen.insert(split.validation_indices.begin(), split.validation_indices.end());
  CHECK(chosen == std::set<std::uint64_t>{0, 2});
  CHECK(split.train.labels.size() + split.validation.labels.size() == 2);
  const auto label_of = [&](std::uint64_t idx) {
    for (std::size_t i = 0; i < split.train_indices.size(); ++i) {
      if (split.train_indices[i] == idx) return split.train.labels[i];
    }
    for (std::size_t i = 0; i < split.validation_indices.size(); ++i) {
      if (split.validation_indices[i] == idx) return split.validation.labels[i];
    }
    return 0;
  };
  CHECK(label_of(0) == -1);
  CHECK(label_of(2) == 1);
}

TEST_CASE("select_candidates splits 70/30 and validates k") {
  const auto gen = small_generator(16, 0.1);
  const auto ds = pipeline::synthesize_dataset(gen, 50'000, 2);
  const auto split = pipeline::select_candidates(ds, 0, "pose", 2000, 5);
  CHECK(split.train.labels.size() == 2800);
  CHECK(split.validation.labels.size() == 1200);
  CHECK(split.train.points.rows() == 2800);
  CHECK(split.train.points.cols() == 16);

  // Candidates are the 2000 highest and 2000 lowest scores.
  auto column = ds.score_column(0);
  std::vector<double> sorted = column;
  std::sort(sorted.begin(), sorted.end());
  const double low_cut = sorted[1999];
  const double high_cut = sorted[sorted.size() - 2000];
  for (std::size_t i = 0; i < split.train_indices.size(); ++i) {
    const double s = column[split.train_indices[i]];
    if (split.train.labels[i] > 0) {
      CHECK(s >= high_cut);
    } else {
      CHECK(s <= low_cut);
    }
  }

  const auto again = pipeline::select_candidates(ds, 0, "pose", 2000, 5);
  CHECK(again.train_indices == split.train_indices);
  const auto reshuffled = pipeline::select_candidates(ds, 0, "pose", 2000, 6);
  CHECK(reshuffled.train_indices != split.train_indices);

  CHECK(code_of([&] { pipeline::select_candidates(ds, 0, "pose", 25'001, 5); }) == ErrorCode::KTooLarge);
  CHECK(code_of([&] { pipeline::select_candidates(ds, 0, "pose", 0, 5); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("tied scores break by sample index") {
  const auto gen = small_generator(16, 0.1);
  const auto ds = pipeline::synthesize_dataset(gen, 10, 1);
  const std::vector<double> flat(10, 0.25);
  const auto split = pipeline::select_candidates(ds, flat, "x", 3, 0);
  std::set<std::uint64_t> negatives;
  std::set<std::uint64_t> positives;
  const auto collect = [&](const std::vector<std::uint64_t>& idx, const std::vector<int>& labels) {
    for (std::size_t i = 0; i < idx.size(); ++i) (labels[i] > 0 ? positives : negatives).insert(idx[i]);
  };
  collect(split.train_indices, split.train.labels);
  collect(split.validation_indices, split.validation.labels);
  CHECK(negatives == std::set<std::uint64_t>{0, 1, 2});
  CHECK(positives == std::set<std::uint64_t>{7, 8, 9});
}

TEST_CASE("fit_all_boundaries recovers the planted normals") {
  const auto gen = small_generator(64, 0.0);
  const auto ds = pipeline::synthesize_dataset(gen, 20'000, 11);
  pipeline::FitOptions options;
  options.k = 1000;
  const auto set = pipeline::fit_all_boundaries(ds, gen, options);
  CHECK(set.names().size() == 6);
  CHECK(set.names().back() == "quality");
  CHECK(set.attributes().size() == 5);
  for (const auto& b : set.boundaries) {
    INFO(b.direction.name());
    CHECK(cosine(b.direction, gen.ground_truth(b.direction.name())) >= 0.95);
    CHECK(b.val_accuracy >= 0.95);
    CHECK(b.direction.meta().train_count == 1400);
  }
  CHECK(code_of([&] { set.at("hair"); }) == ErrorCode::UnknownAttribute);
  CHECK(set.find("hair") == nullptr);

  WorkerGuard guard;
  set_worker_count(1);
  const auto serial = pipeline::fit_all_boundaries(ds, gen, options);
  for (std::size_t i = 0; i < set.boundaries.size(); ++i) {
    CHECK(serial.boundaries[i].direction == set.boundaries[i].direction);
  }

  const auto corr = pipeline::boundary_correlation(set);
  CHECK(corr.rows() == 5);
  CHECK((corr - gen.realized_gram()).cwiseAbs().maxCoeff() <= 0.1);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(corr(i, i) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(corr.isApprox(corr.transpose()));

  const auto report = pipeline::correlate(set, ds);
  CHECK(report.attributes == gen.attributes());
  CHECK((report.score_pearson - report.boundary_cosine).cwiseAbs().maxCoeff() <= 0.15);
}

TEST_CASE("score correlation") {
  const auto gen = small_generator(16, 0.1);
  auto ds = pipeline::synthesize_dataset(gen, 2000, 3);
  const auto r = pipeline::score_correlation(ds);
  CHECK(r.rows() == 5);
  CHECK(r.maxCoeff() <= 1.0);
  CHECK(r.minCoeff() >= -1.0);
  CHECK(r == r.transpose());

  // A duplicated column correlates perfectly.
  for (std::uint64_t i = 0; i < ds.count; ++i) ds.scores[i * 5 + 1] = ds.scores[i * 5];
  CHECK(pipeline::score_correlation(ds)(0, 1) == doctest::Approx(1.0).epsilon(1e-12));

  for (std::uint64_t i = 0; i < ds.count; ++i) ds.scores[i * 5 + 3] = 0.5f;
  CHECK(code_of([&] { pipeline::score_correlation(ds); }) == ErrorCode::ZeroVariance);

  pipeline::BoundarySet one{Space::Z, {{gen.ground_truth("age"), 1, 1, 1}}};
  CHECK(code_of([&] { pipeline::boundary_correlation(one); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("score moments in the linear regime") {
  const auto gen = small_generator(64, 0.1);
  const auto moments = pipeline::score_moments(gen, 100'000, 5, oracle::ScoreMode::Linear);
  CHECK(moments.count == 100'000);
  CHECK(moments.mean.cwiseAbs().maxCoeff() <= 0.01);
  const Eigen::MatrixXd expected =
      gen.lambdas().asDiagonal() * gen.normals().transpose() * gen.normals() * gen.lambdas().asDiagonal();
  CHECK((moments.covariance - expected).cwiseAbs().maxCoeff() <= 0.02);

  WorkerGuard guard;
  set_worker_count(1);
  const auto serial = pipeline::score_moments(gen, 100'000, 5, oracle::ScoreMode::Linear);
  CHECK(serial.mean == moments.mean);
  CHECK(serial.covariance == moments.covariance);
}

TEST_CASE("distance sweep") {
  const auto gen = small_generator(64, 0.0);
  const LatentCode z0 = LatentCode(Eigen::VectorXd::Constant(64, 0.3));
  const std::vector<double> alphas = {-10, -5, -3, 0, 3, 5, 10};

  const auto truth = pipeline::distance_sweep(gen, gen.ground_truth("age"), z0, alphas);
  CHECK(truth.score_nondecreasing);
  CHECK(std::abs(distance(gen.ground_truth("age"), truth.start)) <= 1e-12);
  for (const auto& p : truth.points) CHECK(p.identity_drift == 0.0);
  CHECK(truth.points.back().score >= 0.995);
  CHECK(truth.points.front().score <= -0.995);
  CHECK(truth.points[3].score == doctest::Approx(0.0).epsilon(1e-12));

  // A slightly tilted direction leaks into the identity subspace.
  Eigen::VectorXd tilted = gen.normals().col(2) + 0.2 * gen.identity_dirs().col(0);
  const auto recovered = SemanticDirection::from_raw("age", tilted);
  const auto sweep = pipeline::distance_sweep(gen, recovered, z0, alphas);
  CHECK(sweep.drift_increasing_in_magnitude);
  CHECK(sweep.points[4].identity_drift < sweep.points[5].identity_drift);
  CHECK(sweep.points[5].identity_drift < sweep.points[6].identity_drift);
  CHECK(std::abs(sweep.points.back().score) >= 0.995);

  CHECK(code_of([&] {
          const std::vector<double> bad = {1, 0};
          pipeline::distance_sweep(gen, recovered, z0, bad);
        }) == ErrorCode::InvalidArgument);
}

TEST_CASE("conditional manipulation keeps conditioned scores fixed") {
  const auto gen = small_generator(64, 0.0);
  const LatentCode z0 = LatentCode::zeros(64);
  const std::vector<double> alphas = {-3, -1.5, 0, 1.5, 3};
  const auto age = gen.ground_truth("age");
  const auto gender = gen.ground_truth("gender");
  const auto glasses = gen.ground_truth("eyeglasses");
  const auto ia = static_cast<Eigen::Index>(gen.attribute_index("age"));
  const auto ig = static_cast<Eigen::Index>(gen.attribute_index("gender"));
  const auto ie = static_cast<Eigen::Index>(gen.attribute_index("eyeglasses"));

  const auto plain = pipeline::manipulation_effect(gen, age, z0, alphas);
  CHECK(plain.max_abs_change[ig] >= 0.15);

  const auto cond = pipeline::manipulation_effect(gen, condition(age, ConditionSet({gender})), z0, alphas);
  CHECK(cond.max_abs_change[ig] <= 0.05);
  CHECK(std::abs(cond.end_to_end_change[ia]) >= 0.5);

  const auto multi =
      pipeline::manipulation_effect(gen, condition(glasses, ConditionSet({age, gender})), z0, alphas);
  CHECK(multi.max_abs_change[ia] <= 0.05);
  CHECK(multi.max_abs_change[ig] <= 0.05);
  CHECK(std::abs(multi.end_to_end_change[ie]) >= 0.5);
}

TEST_CASE("fix_artifact walks toward clean renders") {
  const auto gen = small_generator(64, 0.0);
  const LatentCode dirty(-6.0 * gen.quality_dir());
  CHECK(oracle::face_params(gen, dirty).noise_level == 1.0);
  const auto fixed = pipeline::fix_artifact(gen, gen.ground_truth("quality"), dirty, 2.0);
  CHECK(fixed.steps == 3);
  CHECK(fixed.noise_level <= pipeline::kCleanNoiseLevel);

  const auto clean = pipeline::fix_artifact(gen, gen.ground_truth("quality"), LatentCode::zeros(64), 2.0);
  CHECK(clean.steps == 0);

  const auto capped = pipeline::fix_artifact(gen, gen.ground_truth("quality"), LatentCode(-1000.0 * gen.quality_dir()), 1.0);
  CHECK(capped.steps == pipeline::kMaxCorrectionSteps);

  pipeline::BoundarySet no_quality{Space::Z, {{gen.ground_truth("age"), 1, 1, 1}}};
  CHECK(code_of([&] { pipeline::fix_artifact(gen, no_quality, dirty, 2.0); }) ==
        ErrorCode::QualityBoundaryMissing);
  CHECK(code_of([&] { pipeline::fix_artifact(gen, gen.ground_truth("quality"), dirty, 0.0); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("W space separates the warped generator at least as well as Z") {
  const auto gen = small_generator(64, 0.1, Space::W);
  pipeline::FitOptions options;
  options.k = 800;
  options.include_quality = false;
  const auto in_w = pipeline::fit_all_boundaries(pipeline::synthesize_dataset(gen, 20'000, 2, Space::W), gen, options);
  const auto in_z = pipeline::fit_all_boundaries(pipeline::synthesize_dataset(gen, 20'000, 2, Space::Z), gen, options);
  CHECK(in_w.space == Space::W);
  CHECK(in_z.space == Space::Z);
  for (std::size_t i = 0; i < in_w.boundaries.size(); ++i) {
    INFO(in_w.boundaries[i].direction.name());
    CHECK(in_w.boundaries[i].val_accuracy >= in_z.boundaries[i].val_accuracy);
  }
}

TEST_CASE("conditional manipulation with recovered boundaries") {
  const auto gen = small_generator(64, 0.1);
  pipeline::FitOptions options;
  options.k = 1000;
  options.include_quality = false;
  const auto set = pipeline::fit_all_boundaries(pipeline::synthesize_dataset(gen, 20'000, 6), gen, options);
  const auto ia = static_cast<Eigen::Index>(gen.attribute_index("age"));
  const auto ig = static_cast<Eigen::Index>(gen.attribute_index("gender"));
  const std::vector<double> alphas = {-3, -1.5, 0, 1.5, 3};
  const auto dir = condition(set.at("age").direction, ConditionSet({set.at("gender").direction}));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LatentCode z0 = pipeline::synthesize_dataset(gen, 1, 100 + seed).code(0);
    const auto effect = pipeline::manipulation_effect(gen, dir, z0, alphas);
    CHECK(effect.max_abs_change[ig] <= 0.1);
    CHECK(std::abs(effect.end_to_end_change[ia]) >= 0.4);
  }
}
