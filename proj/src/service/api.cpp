#include "hypersem/service/api.hpp"

#include <random>

#include <httplib.h>

#include "hypersem/error.hpp"
#include "hypersem/random.hpp"

namespace hypersem::service {

namespace {

constexpr std::uint64_t kSampleStream = 0x53414D50ull;

Json error_body(const std::string& code, const std::string& message) {
  return Json{{"error", {{"code", code}, {"message", message}}}};
}

std::vector<std::string> string_list(const Json& body, const char* key) {
  if (!body.contains(key)) return {};
  return body.at(key).get<std::vector<std::string>>();
}

Json request_to_json(const ManipulationRequest& req) {
  return Json{{"attribute", req.attribute}, {"alpha", req.alpha}, {"conditions", req.conditions}};
}

BoundaryMap usable_boundaries(const BoundaryMap& all, const oracle::GeneratorSpec& gen) {
  BoundaryMap out;
  for (const auto& [name, direction] : all) {
    if (direction.dim() == gen.dim() && direction.space() == gen.space()) out.emplace(name, direction);
  }
  return out;
}

}  // namespace

LatentCode sample_code(const oracle::GeneratorSpec& gen, std::uint64_t seed) {
  Rng rng(derive_seed(seed, {kSampleStream}));
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(gen.dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  const LatentCode code(z, Space::Z);
  return gen.space() == Space::W ? oracle::warp(gen, code) : code;
}

ApiResponse error_response(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    const int status = err->code() == ErrorCode::IoFailure ? 500 : 400;
    return {status, error_body(std::string(to_string(err->code())), err->what())};
  }
  if (dynamic_cast<const nlohmann::json::exception*>(&e) != nullptr) {
    return {400, error_body("InvalidArgument", std::string("malformed request: ") + e.what())};
  }
  return {500, error_body("Internal", e.what())};
}

Api::Api(ApiConfig config)
    : config_(std::move(config)),
      generator_(std::make_shared<const oracle::GeneratorSpec>(oracle::make_generator(config_.generator))),
      store_(config_.store_dir) {
  BoundaryMap boundaries;
  std::error_code ec;
  if (std::filesystem::is_directory(store_.directory(), ec)) {
    boundaries = usable_boundaries(store_.load_all(), *generator_);
  }
  session_seed_ = config_.seed;
  session_ = std::make_unique<Session>(generator_, std::move(boundaries),
                                       sample_code(*generator_, session_seed_));
}

ApiResponse Api::handle(const std::string& method, const std::string& path, const std::string& body) {
  try {
    const auto parse_body = [&] {
      return body.empty() ? Json::object() : parse_json(body, "request body");
    };
    if (method == "GET") {
      std::shared_lock lock(mutex_);
      if (path == "/api/generator") return {200, generator_info()};
      if (path == "/api/boundaries") return {200, boundaries_info()};
      if (path == "/api/render/current") return {200, session_state()};
      if (path == "/api/correlations") return {200, correlations()};
    } else if (method == "POST") {
      const Json request = parse_body();
      if (!request.is_object()) {
        return {400, error_body("InvalidArgument", "request body must be a JSON object")};
      }
      std::unique_lock lock(mutex_);
      if (path == "/api/sample") return {200, sample(request)};
      if (path == "/api/edit") return {200, edit(request)};
      if (path == "/api/invert") return {200, invert(request)};
      if (path == "/api/boundaries/fit") return {200, fit(request)};
    }
    static const char* const kKnown[] = {"/api/generator", "/api/boundaries", "/api/render/current",
                                         "/api/correlations", "/api/sample", "/api/edit",
                                         "/api/invert", "/api/boundaries/fit"};
    for (const char* known : kKnown) {
      if (path == known) return {405, error_body("MethodNotAllowed", method + " " + path)};
    }
    return {404, error_body("NotFound", "no endpoint " + path)};
  } catch (const std::exception& e) {
    return error_response(e);
  }
}

Json Api::generator_info() const {
  const auto& gen = *generator_;
  return Json{{"config", to_json(gen.config())},
              {"dim", gen.dim()},
              {"space", std::string(to_string(gen.space()))},
              {"attributes", gen.attributes()},
              {"lambdas", vector_to_json(gen.lambdas())},
              {"realized_gram", matrix_to_json(gen.realized_gram())},
              {"gram_was_repaired", gen.gram_was_repaired()},
              {"identity_dims", gen.identity_dirs().cols()},
              {"fit_sample_cap", config_.fit_sample_cap}};
}

Json Api::session_state() const {
  const auto& gen = *generator_;
  const LatentCode& z = session_->current();
  const Eigen::VectorXd s = oracle::score(gen, z, oracle::ScoreMode::Noiseless);
  Json scores = Json::object();
  for (std::size_t i = 0; i < gen.attribute_count(); ++i) {
    scores[gen.attributes()[i]] = s[static_cast<Eigen::Index>(i)];
  }
  Json distances = Json::object();
  for (const auto& [name, direction] : session_->boundaries()) distances[name] = distance(direction, z);
  Json history = Json::array();
  for (const auto& req : session_->history()) history.push_back(request_to_json(req));
  const oracle::FaceParams face = oracle::face_params(gen, z);
  return Json{{"seed", session_seed_},
              {"latent", to_json(z)},
              {"scores", std::move(scores)},
              {"distances", std::move(distances)},
              {"face", to_json(face)},
              {"svg", oracle::render(face)},
              {"history", std::move(history)}};
}

Json Api::boundaries_info() const {
  Json list = Json::array();
  for (const auto& [name, direction] : session_->boundaries()) {
    Json item = to_json(direction);
    if (name == "quality" || generator_->find_attribute(name)) {
      item["cosine_to_planted"] = cosine(direction, generator_->ground_truth(name));
    }
    list.push_back(std::move(item));
  }
  return Json{{"space", std::string(to_string(generator_->space()))},
              {"store", store_.directory().string()},
              {"boundaries", std::move(list)}};
}

Json Api::sample(const Json& body) {
  std::uint64_t seed = 0;
  if (body.contains("seed") && !body["seed"].is_null()) {
    seed = body["seed"].get<std::uint64_t>();
  } else {
    std::random_device device;
    seed = (static_cast<std::uint64_t>(device()) << 32) ^ device();
  }
  session_seed_ = seed;
  session_->reset(sample_code(*generator_, seed));
  return session_state();
}

Json Api::edit(const Json& body) {
  ManipulationRequest req;
  req.attribute = body.at("attribute").get<std::string>();
  req.alpha = body.at("alpha").get<double>();
  req.conditions = string_list(body, "conditions");
  const SemanticDirection direction = session_->apply(req);
  Json cosines = Json::object();
  for (const auto& [name, other] : session_->boundaries()) cosines[name] = cosine(direction, other);
  Json out = session_state();
  Json resolved = to_json(direction);
  resolved["cosines"] = std::move(cosines);
  out["direction"] = std::move(resolved);
  return out;
}

Json Api::invert(const Json& body) {
  const oracle::FaceParams target = face_from_json(body.at("target"));
  oracle::InvertOptions options;
  options.max_steps = body.value("max_steps", options.max_steps);
  options.tolerance = body.value("tolerance", options.tolerance);
  const std::uint64_t seed = body.value("seed", std::uint64_t{0});
  const oracle::InversionResult result = oracle::invert(*generator_, target, seed, options);
  session_seed_ = seed;
  session_->reset(result.code);
  Json out = session_state();
  out["inversion"] = Json{{"objective", result.objective},
                          {"steps", result.steps},
                          {"saturated", result.saturated}};
  return out;
}

Json Api::fit(const Json& body) {
  const std::string source = body.value("source", std::string("fit"));
  const auto& gen = *generator_;
  pipeline::BoundarySet set;
  set.space = gen.space();
  if (source == "ground_truth") {
    for (const auto& name : gen.attributes()) set.boundaries.push_back({gen.ground_truth(name), 1.0, 1.0, 1.0});
    set.boundaries.push_back({gen.ground_truth("quality"), 1.0, 1.0, 1.0});
  } else if (source == "fit") {
    const auto samples = body.value("samples", config_.fit_sample_cap);
    if (samples > config_.fit_sample_cap) {
      throw Error(ErrorCode::OutOfRange, "samples " + std::to_string(samples) + " exceed the cap of " +
                                             std::to_string(config_.fit_sample_cap));
    }
    pipeline::FitOptions options;
    options.k = body.value("k", std::max<std::uint64_t>(1, samples / 25));
    options.svm.lambda = body.value("lambda", options.svm.lambda);
    options.svm.epochs = body.value("epochs", options.svm.epochs);
    const std::uint64_t seed = body.value("seed", std::uint64_t{0});
    options.svm.seed = seed;
    const auto ds = pipeline::synthesize_dataset(gen, samples, seed, gen.space());
    set = pipeline::fit_all_boundaries(ds, gen, options);
  } else {
    throw Error(ErrorCode::InvalidArgument, "source must be \"fit\" or \"ground_truth\"");
  }

  BoundaryMap boundaries;
  Json saved = Json::array();
  for (const auto& b : set.boundaries) {
    saved.push_back(store_.save(b.direction).string());
    boundaries.emplace(b.direction.name(), b.direction);
  }
  session_->set_boundaries(std::move(boundaries));
  Json out = to_json(set);
  out["source"] = source;
  out["saved"] = std::move(saved);
  return out;
}

Json Api::correlations() {
  std::vector<svm::TrainedBoundary> attrs;
  for (const auto& name : generator_->attributes()) {
    const auto it = session_->boundaries().find(name);
    if (it != session_->boundaries().end()) attrs.push_back({it->second, 0.0, 0.0, 0.0});
  }
  if (attrs.size() != generator_->attribute_count()) {
    throw Error(ErrorCode::UnknownAttribute, "correlations need a boundary for every attribute");
  }
  std::lock_guard lock(sample_mutex_);
  if (!score_sample_) {
    score_sample_ = pipeline::synthesize_dataset(*generator_, config_.fit_sample_cap,
                                                 config_.generator.seed, generator_->space());
  }
  pipeline::BoundarySet set{generator_->space(), std::move(attrs)};
  Json out = to_json(pipeline::correlate(set, *score_sample_));
  out["planted_gram"] = matrix_to_json(generator_->realized_gram());
  return out;
}

HttpServer::HttpServer(Api& api) : api_(api), server_(std::make_unique<httplib::Server>()) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse r = api_.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(r.body.dump(), "application/json");
  };
  const std::string pattern = R"(/api/.*)";
  server_->Get(pattern, route);
  server_->Post(pattern, route);
  server_->Options(pattern, [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorCode::IoFailure, "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() { server_->stop(); }

}  // namespace hypersem::service
