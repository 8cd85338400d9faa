#include "hypersem/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hypersem/error.hpp"
#include "hypersem/random.hpp"

namespace hypersem::pipeline {

namespace {

constexpr std::uint64_t kSplitStream = 0x53504C4954ull;
constexpr std::uint64_t kSvmStream = 0x53564Dull;
constexpr std::uint64_t kMomentChunk = 4096;

Eigen::VectorXd to_double(std::span<const float> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return v;
}

svm::LabeledDataset gather(const SampleDataset& ds, const std::vector<std::uint64_t>& rows,
                           const std::vector<int>& labels) {
  svm::LabeledDataset out;
  out.space = ds.space;
  out.points.resize(static_cast<Eigen::Index>(rows.size()), ds.dim);
  out.labels = labels;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = ds.latent(rows[r]);
    for (std::uint32_t j = 0; j < ds.dim; ++j) out.points(static_cast<Eigen::Index>(r), j) = src[j];
  }
  return out;
}

// Planted labels of every sample for every attribute plus quality (last column).
std::vector<std::vector<int>> oracle_labels(const SampleDataset& ds,
                                            const oracle::GeneratorSpec& gen) {
  const std::size_t m = gen.attribute_count();
  Eigen::MatrixXd axes(gen.dim(), static_cast<Eigen::Index>(m + 1));
  axes.leftCols(static_cast<Eigen::Index>(m)) = gen.normals();
  axes.col(static_cast<Eigen::Index>(m)) = gen.quality_dir();

  std::vector<std::vector<int>> labels(m + 1, std::vector<int>(ds.count));
  const std::uint64_t chunks = (ds.count + kSampleChunk - 1) / kSampleChunk;
  for_each_chunk(chunks, [&](std::size_t c) {
    const std::uint64_t begin = c * kSampleChunk;
    const std::uint64_t end = std::min(ds.count, begin + kSampleChunk);
    for (std::uint64_t i = begin; i < end; ++i) {
      const Eigen::VectorXd u = oracle::semantic_coordinates(gen, ds.code(i));
      const Eigen::VectorXd proj = axes.transpose() * u;
      for (std::size_t a = 0; a <= m; ++a) labels[a][i] = proj[static_cast<Eigen::Index>(a)] >= 0.0 ? 1 : -1;
    }
  });
  return labels;
}

double full_set_accuracy(const SampleDataset& ds, const SemanticDirection& direction,
                         const std::vector<int>& truth) {
  std::uint64_t correct = 0;
  for (std::uint64_t i = 0; i < ds.count; ++i) {
    const auto x = ds.latent(i);
    double margin = direction.intercept();
    for (std::uint32_t j = 0; j < ds.dim; ++j) margin += direction.normal()[j] * x[j];
    if ((margin >= 0.0 ? 1 : -1) == truth[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.count);
}

void require_sorted_finite(std::span<const double> alphas) {
  if (alphas.empty()) {
    throw Error(ErrorCode::InvalidArgument, "need at least one step");
  }
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!std::isfinite(alphas[i])) {
      throw Error(ErrorCode::NonFinite, "steps must be finite");
    }
    if (i > 0 && alphas[i] < alphas[i - 1]) {
      throw Error(ErrorCode::InvalidArgument, "steps must be sorted ascending");
    }
  }
}

}  // namespace

LatentCode SampleDataset::code(std::uint64_t i) const {
  if (i >= count) {
    throw Error(ErrorCode::OutOfRange, "sample index " + std::to_string(i) + " out of range");
  }
  return LatentCode(to_double(latent(i)), space);
}

std::vector<double> SampleDataset::score_column(std::size_t attribute) const {
  if (attribute >= attribute_count) {
    throw Error(ErrorCode::OutOfRange, "score column " + std::to_string(attribute) + " out of range");
  }
  std::vector<double> column(count);
  for (std::uint64_t i = 0; i < count; ++i) column[i] = scores[i * attribute_count + attribute];
  return column;
}

SampleDataset synthesize_dataset(const oracle::GeneratorSpec& gen, std::uint64_t count,
                                 std::uint64_t seed, Space space) {
  if (count == 0) {
    throw Error(ErrorCode::InvalidArgument, "count must be at least 1");
  }
  if (space == Space::W && gen.space() != Space::W) {
    throw Error(ErrorCode::SpaceMismatch, "W datasets need a W-space generator");
  }
  SampleDataset ds;
  ds.dim = static_cast<std::uint32_t>(gen.dim());
  ds.attribute_count = static_cast<std::uint32_t>(gen.attribute_count());
  ds.count = count;
  ds.seed = seed;
  ds.space = space;
  ds.latents.resize(count * ds.dim);
  ds.scores.resize(count * ds.attribute_count);

  const std::uint64_t chunks = (count + kSampleChunk - 1) / kSampleChunk;
  for_each_chunk(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(c)}));
    std::normal_distribution<double> normal;
    const std::uint64_t begin = c * kSampleChunk;
    const std::uint64_t end = std::min(count, begin + kSampleChunk);
    Eigen::VectorXd z(ds.dim);
    for (std::uint64_t i = begin; i < end; ++i) {
      for (std::uint32_t j = 0; j < ds.dim; ++j) z[j] = normal(rng);
      Eigen::VectorXd stored = z;
      if (space == Space::W) stored = oracle::warp(gen, LatentCode(z, Space::Z)).values();
      float* row = ds.latents.data() + i * ds.dim;
      for (std::uint32_t j = 0; j < ds.dim; ++j) {
        row[j] = static_cast<float>(stored[j]);
        stored[j] = row[j];
      }
      const Eigen::VectorXd s = oracle::score(gen, LatentCode(stored, space));
      for (std::uint32_t a = 0; a < ds.attribute_count; ++a) {
        ds.scores[i * ds.attribute_count + a] = static_cast<float>(s[a]);
      }
    }
  });
  return ds;
}

CandidateSplit select_candidates(const SampleDataset& ds, std::span<const double> scores,
                                 const std::string& attribute, std::size_t k,
                                 std::uint64_t split_seed) {
  if (scores.size() != ds.count) {
    throw Error(ErrorCode::DimensionMismatch, "one score per sample required");
  }
  if (k == 0) {
    throw Error(ErrorCode::InvalidArgument, "k must be positive");
  }
  if (2 * k > ds.count) {
    throw Error(ErrorCode::KTooLarge, "2k = " + std::to_string(2 * k) + " exceeds " +
                                          std::to_string(ds.count) + " samples");
  }
  std::vector<std::uint64_t> order(ds.count);
  std::iota(order.begin(), order.end(), std::uint64_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint64_t a, std::uint64_t b) { return scores[a] < scores[b]; });

  // Candidates: top-k (+1) then bottom-k (−1). Equal scores keep index order,
  // so the lowest indices of a tied block land at the bottom.
  std::vector<std::pair<std::uint64_t, int>> candidates;
  candidates.reserve(2 * k);
  for (std::size_t i = 0; i < k; ++i) candidates.emplace_back(order[ds.count - k + i], 1);
  for (std::size_t i = 0; i < k; ++i) candidates.emplace_back(order[i], -1);

  Rng rng(derive_seed(split_seed, {kSplitStream}));
  std::shuffle(candidates.begin(), candidates.end(), rng);
  const std::size_t train_count = (7 * candidates.size() + 5) / 10;

  CandidateSplit split;
  split.attribute = attribute;
  split.k = k;
  std::vector<int> train_labels;
  std::vector<int> val_labels;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto& indices = i < train_count ? split.train_indices : split.validation_indices;
    auto& labels = i < train_count ? train_labels : val_labels;
    indices.push_back(candidates[i].first);
    labels.push_back(candidates[i].second);
  }
  split.train = gather(ds, split.train_indices, train_labels);
  split.validation = gather(ds, split.validation_indices, val_labels);
  return split;
}

CandidateSplit select_candidates(const SampleDataset& ds, std::size_t column,
                                 const std::string& attribute, std::size_t k,
                                 std::uint64_t split_seed) {
  const std::vector<double> scores = ds.score_column(column);
  return select_candidates(ds, scores, attribute, k, split_seed);
}

const svm::TrainedBoundary* BoundarySet::find(const std::string& name) const {
  for (const auto& b : boundaries) {
    if (b.direction.name() == name) return &b;
  }
  return nullptr;
}

const svm::TrainedBoundary& BoundarySet::at(const std::string& name) const {
  if (const auto* b = find(name)) return *b;
  throw Error(ErrorCode::UnknownAttribute, "no boundary named '" + name + "'");
}

std::vector<std::string> BoundarySet::names() const {
  std::vector<std::string> out;
  for (const auto& b : boundaries) out.push_back(b.direction.name());
  return out;
}

std::vector<svm::TrainedBoundary> BoundarySet::attributes() const {
  std::vector<svm::TrainedBoundary> out;
  for (const auto& b : boundaries) {
    if (b.direction.name() != "quality") out.push_back(b);
  }
  return out;
}

BoundarySet fit_all_boundaries(const SampleDataset& ds, const oracle::GeneratorSpec& gen,
                               const FitOptions& options) {
  if (ds.dim != static_cast<std::uint32_t>(gen.dim()) ||
      ds.attribute_count != gen.attribute_count()) {
    throw Error(ErrorCode::DimensionMismatch, "dataset does not match the generator");
  }
  const std::size_t m = gen.attribute_count();
  const auto truth = oracle_labels(ds, gen);

  std::vector<std::vector<double>> columns;
  std::vector<std::string> names = gen.attributes();
  for (std::size_t a = 0; a < m; ++a) columns.push_back(ds.score_column(a));
  if (options.include_quality) {
    // Quality is labeled by hand in the original setting; here by the planted axis.
    std::vector<double> quality(ds.count);
    for (std::uint64_t i = 0; i < ds.count; ++i) {
      quality[i] = oracle::quality_coordinate(gen, ds.code(i));
    }
    columns.push_back(std::move(quality));
    names.emplace_back("quality");
  }

  auto fit_one = [&](std::size_t a) {
      const auto idx = static_cast<std::uint64_t>(a);
      const CandidateSplit split = select_candidates(
          ds, columns[a], names[a], options.k, derive_seed(ds.seed, {kSplitStream, idx}));
      svm::SvmConfig config = options.svm;
      config.seed = derive_seed(options.svm.seed, {kSvmStream, idx});
      svm::TrainedBoundary b = svm::fit(split.train, config, names[a]);
      b.val_accuracy = svm::accuracy(b.direction, split.validation);
      b.all_accuracy = full_set_accuracy(ds, b.direction, truth[a < m ? a : m]);
      TrainingMeta meta{config.seed, split.train.size(), b.val_accuracy};
      b.direction = SemanticDirection(b.direction.name(), b.direction.normal(), ds.space,
                                      b.direction.intercept(), meta);
      return b;
  };
  BoundarySet out;
  out.space = ds.space;
  std::vector<std::optional<svm::TrainedBoundary>> results(names.size());
  for_each_chunk(names.size(), [&](std::size_t a) { results[a] = fit_one(a); });
  for (auto& r : results) out.boundaries.push_back(std::move(*r));
  return out;
}

Eigen::MatrixXd boundary_correlation(const BoundarySet& bs) {
  const auto attrs = bs.attributes();
  if (attrs.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "need at least two attribute boundaries");
  }
  const auto m = static_cast<Eigen::Index>(attrs.size());
  Eigen::MatrixXd c(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    c(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      c(i, j) = c(j, i) = cosine(attrs[static_cast<std::size_t>(i)].direction,
                                 attrs[static_cast<std::size_t>(j)].direction);
    }
  }
  return c;
}

Eigen::MatrixXd score_correlation(const SampleDataset& ds) {
  if (ds.count < 2) {
    throw Error(ErrorCode::InvalidArgument, "need at least two samples");
  }
  const Eigen::Index m = ds.attribute_count;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
  for (std::uint64_t i = 0; i < ds.count; ++i) mean += to_double(ds.score_row(i));
  mean /= static_cast<double>(ds.count);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  for (std::uint64_t i = 0; i < ds.count; ++i) {
    const Eigen::VectorXd c = to_double(ds.score_row(i)) - mean;
    cov.noalias() += c * c.transpose();
  }
  const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  for (Eigen::Index a = 0; a < m; ++a) {
    if (!(sd[a] > 0.0)) {
      throw Error(ErrorCode::ZeroVariance, "score column " + std::to_string(a) + " is constant");
    }
  }
  Eigen::MatrixXd rho = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
  rho = (0.5 * (rho + rho.transpose())).cwiseMax(-1.0).cwiseMin(1.0);
  rho.diagonal().setOnes();
  return rho;
}

CorrelationReport correlate(const BoundarySet& bs, const SampleDataset& ds) {
  CorrelationReport report;
  for (const auto& b : bs.attributes()) report.attributes.push_back(b.direction.name());
  report.boundary_cosine = boundary_correlation(bs);
  report.score_pearson = score_correlation(ds);
  if (report.score_pearson.rows() != report.boundary_cosine.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "boundary set and dataset disagree on attributes");
  }
  return report;
}

ScoreMoments score_moments(const oracle::GeneratorSpec& gen, std::uint64_t count,
                           std::uint64_t seed, oracle::ScoreMode mode) {
  if (count < 2) {
    throw Error(ErrorCode::InvalidArgument, "need at least two samples");
  }
  const auto m = static_cast<Eigen::Index>(gen.attribute_count());
  const std::uint64_t chunks = (count + kMomentChunk - 1) / kMomentChunk;
  std::vector<Eigen::VectorXd> sums(chunks);
  std::vector<Eigen::MatrixXd> products(chunks);
  for_each_chunk(chunks, [&](std::size_t c) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(c)}));
    std::normal_distribution<double> normal;
    const std::uint64_t begin = c * kMomentChunk;
    const std::uint64_t end = std::min(count, begin + kMomentChunk);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
    Eigen::MatrixXd prod = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd z(gen.dim());
    for (std::uint64_t i = begin; i < end; ++i) {
      for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = normal(rng);
      const Eigen::VectorXd s = oracle::score(gen, LatentCode(z, Space::Z), mode);
      sum += s;
      prod.noalias() += s * s.transpose();
    }
    sums[c] = std::move(sum);
    products[c] = std::move(prod);
  });
  Eigen::VectorXd total = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd total_prod = Eigen::MatrixXd::Zero(m, m);
  for (std::uint64_t c = 0; c < chunks; ++c) {
    total += sums[c];
    total_prod += products[c];
  }
  const double n = static_cast<double>(count);
  ScoreMoments out;
  out.count = count;
  out.mean = total / n;
  out.covariance = (total_prod - n * out.mean * out.mean.transpose()) / (n - 1.0);
  return out;
}

SweepReport distance_sweep(const oracle::GeneratorSpec& gen, const SemanticDirection& boundary,
                           const LatentCode& z0, std::span<const double> alphas) {
  require_sorted_finite(alphas);
  const bool is_quality = boundary.name() == "quality";
  const Eigen::VectorXd truth =
      is_quality ? gen.quality_dir()
                 : Eigen::VectorXd(gen.normals().col(
                       static_cast<Eigen::Index>(gen.attribute_index(boundary.name()))));
  const double lambda =
      is_quality ? 1.0 : gen.lambdas()[static_cast<Eigen::Index>(gen.attribute_index(boundary.name()))];

  const LatentCode start = edit(z0, boundary, -distance(boundary, z0));
  const Eigen::VectorXd identity0 =
      gen.identity_dirs().transpose() * oracle::semantic_coordinates(gen, start);

  SweepReport report{boundary.name(), start, {}, true, true};
  for (double alpha : alphas) {
    const LatentCode z = edit(start, boundary, alpha);
    const Eigen::VectorXd u = oracle::semantic_coordinates(gen, z);
    SweepPoint p;
    p.alpha = alpha;
    p.true_distance = truth.dot(u);
    p.score = std::tanh(lambda * p.true_distance);
    p.identity_drift = (gen.identity_dirs().transpose() * u - identity0).norm();
    if (!report.points.empty() && p.score < report.points.back().score) {
      report.score_nondecreasing = false;
    }
    report.points.push_back(p);
  }
  auto by_magnitude = report.points;
  std::stable_sort(by_magnitude.begin(), by_magnitude.end(),
                   [](const SweepPoint& a, const SweepPoint& b) {
                     return std::abs(a.alpha) < std::abs(b.alpha);
                   });
  for (std::size_t i = 1; i < by_magnitude.size(); ++i) {
    if (std::abs(by_magnitude[i].alpha) > std::abs(by_magnitude[i - 1].alpha) &&
        !(by_magnitude[i].identity_drift > by_magnitude[i - 1].identity_drift)) {
      report.drift_increasing_in_magnitude = false;
    }
  }
  return report;
}

ManipulationEffect manipulation_effect(const oracle::GeneratorSpec& gen,
                                       const SemanticDirection& direction, const LatentCode& z0,
                                       std::span<const double> alphas) {
  require_sorted_finite(alphas);
  const Eigen::VectorXd base = oracle::score(gen, z0, oracle::ScoreMode::Noiseless);
  ManipulationEffect out;
  out.attributes = gen.attributes();
  out.max_abs_change = Eigen::VectorXd::Zero(base.size());
  Eigen::VectorXd first;
  Eigen::VectorXd last;
  for (double alpha : alphas) {
    const Eigen::VectorXd s =
        oracle::score(gen, edit(z0, direction, alpha), oracle::ScoreMode::Noiseless);
    out.max_abs_change = out.max_abs_change.cwiseMax((s - base).cwiseAbs());
    if (first.size() == 0) first = s;
    last = s;
  }
  out.end_to_end_change = last - first;
  return out;
}

ArtifactCorrection fix_artifact(const oracle::GeneratorSpec& gen, const BoundarySet& bs,
                                const LatentCode& z, double step) {
  const auto* quality = bs.find("quality");
  if (quality == nullptr) {
    throw Error(ErrorCode::QualityBoundaryMissing, "boundary set has no 'quality' entry");
  }
  return fix_artifact(gen, quality->direction, z, step);
}

ArtifactCorrection fix_artifact(const oracle::GeneratorSpec& gen,
                                const SemanticDirection& quality, const LatentCode& z,
                                double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(ErrorCode::InvalidArgument, "correction step must be positive");
  }
  ArtifactCorrection out{z, 0, oracle::face_params(gen, z).noise_level};
  while (out.noise_level > kCleanNoiseLevel && out.steps < kMaxCorrectionSteps) {
    out.code = edit(out.code, quality, step);
    ++out.steps;
    out.noise_level = oracle::face_params(gen, out.code).noise_level;
  }
  return out;
}

}  // namespace hypersem::pipeline
