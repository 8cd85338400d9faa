#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "hypersem/oracle.hpp"
#include "hypersem/pipeline.hpp"
#include "hypersem/service/boundary_store.hpp"
#include "hypersem/service/serialization.hpp"
#include "hypersem/service/session.hpp"

namespace httplib {
class Server;
}

namespace hypersem::service {

/// A fresh code for the generator: N(0, I_d) from `seed`, warped when the
/// generator scores in W.
LatentCode sample_code(const oracle::GeneratorSpec& gen, std::uint64_t seed);

struct ApiConfig {
  oracle::GeneratorConfig generator{};
  std::filesystem::path store_dir = BoundaryStore::default_directory();
  std::uint64_t fit_sample_cap = 20'000;
  std::uint64_t seed = 0;  // seed of the initial session code
};

struct ApiResponse {
  int status = 200;
  Json body;
};

/// Transport-independent request handling for the editor API:
///   GET  /api/generator          GET  /api/boundaries
///   POST /api/sample             POST /api/boundaries/fit
///   POST /api/edit               GET  /api/correlations
///   POST /api/invert             GET  /api/render/current
/// Reads run concurrently; requests that change the session or the boundary
/// set are serialized.
class Api {
 public:
  explicit Api(ApiConfig config);

  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body);

  const oracle::GeneratorSpec& generator() const noexcept { return *generator_; }

 private:
  Json generator_info() const;
  Json session_state() const;
  Json boundaries_info() const;
  Json sample(const Json& body);
  Json edit(const Json& body);
  Json invert(const Json& body);
  Json fit(const Json& body);
  Json correlations();

  ApiConfig config_;
  std::shared_ptr<const oracle::GeneratorSpec> generator_;
  BoundaryStore store_;
  std::unique_ptr<Session> session_;
  std::uint64_t session_seed_ = 0;
  std::optional<pipeline::SampleDataset> score_sample_;
  mutable std::shared_mutex mutex_;
  std::mutex sample_mutex_;
};

/// Maps an exception to the JSON error body and status the API returns.
ApiResponse error_response(const std::exception& e);

/// HTTP front end over an Api.
class HttpServer {
 public:
  explicit HttpServer(Api& api);
  ~HttpServer();

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void listen();
  void stop();

 private:
  Api& api_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace hypersem::service
