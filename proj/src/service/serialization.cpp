#include "hypersem/service/serialization.hpp"

#include "hypersem/error.hpp"

namespace hypersem::service {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedFile, what);
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) malformed(std::string("expected an object holding '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) malformed(std::string("missing field '") + key + "'");
  return *it;
}

template <typename T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    malformed(std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return get<T>(j, key);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) malformed(std::string(what) + " must be a number");
  return j.get<double>();
}

Space space_field(const Json& j) {
  const auto text = get<std::string>(j, "space");
  try {
    return parse_space(text);
  } catch (const Error&) {
    malformed("space must be \"Z\" or \"W\", got \"" + text + "\"");
  }
}

}  // namespace

Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::MalformedFile,
                what + ": invalid JSON at byte offset " + std::to_string(e.byte) + ": " + e.what());
  }
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  if (!j.is_array()) malformed("matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      malformed("matrix rows must be arrays of equal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = number(row[static_cast<std::size_t>(c)], "matrix entry");
  }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) malformed("vector must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], "vector entry");
  return v;
}

Json to_json(const SemanticDirection& direction) {
  const TrainingMeta& meta = direction.meta();
  return Json{{"name", direction.name()},
              {"space", std::string(to_string(direction.space()))},
              {"dim", direction.dim()},
              {"normal", vector_to_json(direction.normal())},
              {"intercept", direction.intercept()},
              {"meta",
               {{"seed", meta.seed},
                {"train_count", meta.train_count},
                {"val_accuracy", meta.val_accuracy}}}};
}

SemanticDirection direction_from_json(const Json& j) {
  const auto name = get<std::string>(j, "name");
  if (name.empty()) malformed("direction name must not be empty");
  const Space space = space_field(j);
  const auto dim = get<std::int64_t>(j, "dim");
  Eigen::VectorXd normal = vector_from_json(field(j, "normal"));
  if (normal.size() != dim) {
    malformed("normal has " + std::to_string(normal.size()) + " entries but dim is " +
              std::to_string(dim));
  }
  const double intercept = get<double>(j, "intercept");
  const Json& meta_json = field(j, "meta");
  const TrainingMeta meta{get<std::uint64_t>(meta_json, "seed"),
                          get<std::uint64_t>(meta_json, "train_count"),
                          get<double>(meta_json, "val_accuracy")};
  return SemanticDirection(name, std::move(normal), space, intercept, meta);
}

Json to_json(const LatentCode& code) {
  return Json{{"space", std::string(to_string(code.space()))},
              {"dim", code.dim()},
              {"values", vector_to_json(code.values())}};
}

LatentCode latent_from_json(const Json& j) {
  const Space space = space_field(j);
  Eigen::VectorXd values = vector_from_json(field(j, "values"));
  if (j.contains("dim") && get<std::int64_t>(j, "dim") != values.size()) {
    malformed("latent 'dim' does not match the number of values");
  }
  return LatentCode(std::move(values), space);
}

Json to_json(const oracle::GeneratorConfig& config) {
  return Json{{"attributes", config.attributes},
              {"gram", matrix_to_json(config.gram)},
              {"dim", config.dim},
              {"seed", config.seed},
              {"noise_sigma", config.noise_sigma},
              {"lambdas", config.lambdas},
              {"identity_dims", config.identity_dims},
              {"warp_scale", config.warp_scale},
              {"space", std::string(to_string(config.space))}};
}

oracle::GeneratorConfig generator_config_from_json(const Json& j) {
  if (!j.is_object()) malformed("generator config must be an object");
  oracle::GeneratorConfig config;
  config.attributes = get_or(j, "attributes", config.attributes);
  if (j.contains("gram")) {
    config.gram = matrix_from_json(j["gram"]);
  } else if (j.contains("attributes")) {
    const auto m = static_cast<Eigen::Index>(config.attributes.size());
    if (config.attributes != oracle::default_attributes()) config.gram = Eigen::MatrixXd::Identity(m, m);
  }
  config.dim = get_or(j, "dim", config.dim);
  config.seed = get_or(j, "seed", config.seed);
  config.noise_sigma = get_or(j, "noise_sigma", config.noise_sigma);
  config.lambdas = get_or(j, "lambdas", config.lambdas);
  config.identity_dims = get_or(j, "identity_dims", config.identity_dims);
  config.warp_scale = get_or(j, "warp_scale", config.warp_scale);
  if (j.contains("space")) config.space = space_field(j);
  return config;
}

Json to_json(const oracle::FaceParams& face) {
  return Json{{"yaw", face.yaw},
              {"mouth_curve", face.mouth_curve},
              {"wrinkle_density", face.wrinkle_density},
              {"jaw_width", face.jaw_width},
              {"glasses_opacity", face.glasses_opacity},
              {"identity_features", face.identity_features},
              {"noise_level", face.noise_level}};
}

oracle::FaceParams face_from_json(const Json& j) {
  oracle::FaceParams face;
  face.yaw = get<double>(j, "yaw");
  face.mouth_curve = get<double>(j, "mouth_curve");
  face.wrinkle_density = get<double>(j, "wrinkle_density");
  face.jaw_width = get<double>(j, "jaw_width");
  face.glasses_opacity = get<double>(j, "glasses_opacity");
  face.identity_features = get<std::vector<double>>(j, "identity_features");
  face.noise_level = get<double>(j, "noise_level");
  return face;
}

Json to_json(const svm::TrainedBoundary& boundary) {
  Json j = to_json(boundary.direction);
  j["train_accuracy"] = boundary.train_accuracy;
  j["val_accuracy"] = boundary.val_accuracy;
  j["all_accuracy"] = boundary.all_accuracy;
  return j;
}

svm::TrainedBoundary trained_boundary_from_json(const Json& j) {
  return svm::TrainedBoundary{direction_from_json(j), get_or(j, "train_accuracy", 0.0),
                              get_or(j, "val_accuracy", 0.0), get_or(j, "all_accuracy", 0.0)};
}

Json to_json(const pipeline::BoundarySet& set) {
  Json list = Json::array();
  for (const auto& b : set.boundaries) list.push_back(to_json(b));
  return Json{{"space", std::string(to_string(set.space))}, {"boundaries", std::move(list)}};
}

pipeline::BoundarySet boundary_set_from_json(const Json& j) {
  pipeline::BoundarySet set;
  set.space = space_field(j);
  const Json& list = field(j, "boundaries");
  if (!list.is_array()) malformed("'boundaries' must be an array");
  for (const Json& item : list) {
    auto b = trained_boundary_from_json(item);
    if (b.direction.space() != set.space) {
      throw Error(ErrorCode::SpaceMismatch, "boundary '" + b.direction.name() +
                                                "' does not live in the set's space");
    }
    if (set.find(b.direction.name()) != nullptr) {
      malformed("duplicate boundary '" + b.direction.name() + "'");
    }
    set.boundaries.push_back(std::move(b));
  }
  return set;
}

Json to_json(const pipeline::MonteCarloReport& report) {
  Json extras = Json::object();
  for (const auto& [key, value] : report.extras) extras[key] = value;
  return Json{{"experiment", report.experiment},
              {"dim", report.dim},
              {"parameter", report.parameter},
              {"trials", report.trials},
              {"hits", report.hits},
              {"empirical_probability", report.empirical_probability},
              {"bound_value", report.bound_value},
              {"half_width", report.half_width},
              {"passed", report.passed},
              {"extras", std::move(extras)}};
}

Json to_json(const pipeline::CorrelationReport& report) {
  return Json{{"attributes", report.attributes},
              {"boundary_cosine", matrix_to_json(report.boundary_cosine)},
              {"score_pearson", matrix_to_json(report.score_pearson)}};
}

Json to_json(const pipeline::SweepReport& report) {
  Json points = Json::array();
  for (const auto& p : report.points) {
    points.push_back(Json{{"alpha", p.alpha},
                          {"score", p.score},
                          {"identity_drift", p.identity_drift},
                          {"true_distance", p.true_distance}});
  }
  return Json{{"attribute", report.attribute},
              {"start", to_json(report.start)},
              {"points", std::move(points)},
              {"score_nondecreasing", report.score_nondecreasing},
              {"drift_increasing_in_magnitude", report.drift_increasing_in_magnitude}};
}

}  // namespace hypersem::service
