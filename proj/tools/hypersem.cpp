#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hypersem/dataset_io.hpp"
#include "hypersem/error.hpp"
#include "hypersem/montecarlo.hpp"
#include "hypersem/oracle.hpp"
#include "hypersem/pipeline.hpp"
#include "hypersem/service/api.hpp"
#include "hypersem/service/boundary_store.hpp"
#include "hypersem/service/serialization.hpp"
#include "hypersem/service/session.hpp"

using namespace hypersem;
using service::Json;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write to " + path + " failed");
}

Json read_json(const std::string& path) { return service::parse_json(read_text(path), path); }

oracle::GeneratorSpec load_generator(const std::string& path) {
  const oracle::GeneratorConfig config =
      path.empty() ? oracle::GeneratorConfig{} : service::generator_config_from_json(read_json(path));
  return oracle::make_generator(config);
}

service::BoundaryMap load_boundaries(const std::string& path, const oracle::GeneratorSpec& gen) {
  service::BoundaryMap out;
  if (path.empty()) {
    for (const auto& name : gen.attributes()) out.emplace(name, gen.ground_truth(name));
    out.emplace("quality", gen.ground_truth("quality"));
    return out;
  }
  for (auto& b : service::boundary_set_from_json(read_json(path)).boundaries) {
    out.emplace(b.direction.name(), b.direction);
  }
  return out;
}

LatentCode load_latent(const std::string& path, const oracle::GeneratorSpec& gen, std::uint64_t seed) {
  return path.empty() ? service::sample_code(gen, seed) : service::latent_from_json(read_json(path));
}

Json scores_json(const oracle::GeneratorSpec& gen, const LatentCode& z) {
  const Eigen::VectorXd s = oracle::score(gen, z, oracle::ScoreMode::Noiseless);
  Json out = Json::object();
  for (std::size_t i = 0; i < gen.attribute_count(); ++i) out[gen.attributes()[i]] = s[static_cast<Eigen::Index>(i)];
  return out;
}

Json moments_report(const oracle::GeneratorSpec& gen, std::uint64_t trials, std::uint64_t seed) {
  const auto moments = pipeline::score_moments(gen, trials, seed, oracle::ScoreMode::Linear);
  const Eigen::MatrixXd lambda = gen.lambdas().asDiagonal();
  const Eigen::MatrixXd expected = lambda * gen.normals().transpose() * gen.normals() * lambda;
  const double mean_err = moments.mean.cwiseAbs().maxCoeff();
  const double cov_err = (moments.covariance - expected).cwiseAbs().maxCoeff();
  return Json{{"experiment", "score_moments"},
              {"trials", trials},
              {"mean", service::vector_to_json(moments.mean)},
              {"covariance", service::matrix_to_json(moments.covariance)},
              {"expected_covariance", service::matrix_to_json(expected)},
              {"max_abs_mean", mean_err},
              {"max_abs_covariance_error", cov_err},
              {"passed", mean_err <= 0.01 && cov_err <= 0.02}};
}

service::HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic latent-space workbench: synthetic generator, boundary fitting, editing"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string out = "-";
  std::string config_path;
  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed");
    cmd->add_option("--out", out, "Output path ('-' for stdout)");
  };
  auto with_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Generator config (JSON); defaults when omitted")
        ->check(CLI::ExistingFile);
  };

  // gen-config
  auto* gen_cmd = app.add_subcommand("gen-config", "Write a generator configuration");
  common(gen_cmd);
  oracle::GeneratorConfig gen_config;
  std::string space_text = "Z";
  std::vector<std::string> attributes;
  gen_cmd->add_option("--dim", gen_config.dim, "Latent dimension");
  gen_cmd->add_option("--noise-sigma", gen_config.noise_sigma, "Observed score noise");
  gen_cmd->add_option("--identity-dims", gen_config.identity_dims, "Identity directions");
  gen_cmd->add_option("--warp-scale", gen_config.warp_scale, "Z to W warp scale");
  gen_cmd->add_option("--lambda", gen_config.lambdas, "Score slope per attribute");
  gen_cmd->add_option("--space", space_text, "Scoring space (Z or W)");
  gen_cmd->add_option("--attributes", attributes, "Attribute names (identity Gram)")->delimiter(',');

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "Synthesize a scored dataset (LSDS)");
  common(sample_cmd);
  with_config(sample_cmd);
  std::uint64_t count = 50'000;
  std::string sample_space;
  sample_cmd->add_option("--count", count, "Number of samples");
  sample_cmd->add_option("--space", sample_space, "Stored space (default: generator space)");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit boundaries on a dataset");
  common(fit_cmd);
  with_config(fit_cmd);
  std::string data_path;
  std::vector<std::string> fit_attrs;
  pipeline::FitOptions fit_options;
  bool save_to_store = false;
  fit_cmd->add_option("--data", data_path, "Dataset file")->required();
  fit_cmd->add_option("--attr", fit_attrs, "Attribute(s) to keep (default: all and quality)");
  fit_cmd->add_option("--k", fit_options.k, "Candidates per side");
  fit_cmd->add_option("--lambda", fit_options.svm.lambda, "SVM regularization");
  fit_cmd->add_option("--epochs", fit_options.svm.epochs, "SVM epochs");
  fit_cmd->add_flag("--store", save_to_store, "Also save each boundary to the store");

  // correlate
  auto* corr_cmd = app.add_subcommand("correlate", "Boundary cosines and score correlations");
  common(corr_cmd);
  std::string boundaries_path;
  corr_cmd->add_option("--boundaries", boundaries_path, "Boundary set file")->required();
  corr_cmd->add_option("--data", data_path, "Dataset file")->required();

  // edit
  auto* edit_cmd = app.add_subcommand("edit", "Move a code along a (conditioned) boundary");
  common(edit_cmd);
  with_config(edit_cmd);
  std::string latent_path;
  service::ManipulationRequest request;
  edit_cmd->add_option("--boundaries", boundaries_path, "Boundary set file (default: planted)");
  edit_cmd->add_option("--latent", latent_path, "Latent code file (default: sampled from --seed)");
  edit_cmd->add_option("--attr", request.attribute, "Attribute to edit")->required();
  edit_cmd->add_option("--alpha", request.alpha, "Step along the direction")->required();
  edit_cmd->add_option("--condition", request.conditions, "Attribute(s) to hold fixed");

  // render
  auto* render_cmd = app.add_subcommand("render", "Render the face of a code as SVG");
  common(render_cmd);
  with_config(render_cmd);
  render_cmd->add_option("--latent", latent_path, "Latent code file (default: sampled from --seed)");

  // invert
  auto* invert_cmd = app.add_subcommand("invert", "Find a code that renders a target face");
  common(invert_cmd);
  with_config(invert_cmd);
  std::string target_path;
  oracle::InvertOptions invert_options;
  invert_cmd->add_option("--target", target_path, "Target face parameters (JSON)")->required();
  invert_cmd->add_option("--max-steps", invert_options.max_steps, "Iteration cap");
  invert_cmd->add_option("--tolerance", invert_options.tolerance, "Squared residual tolerance");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Monte Carlo checks of the concentration results");
  common(verify_cmd);
  with_config(verify_cmd);
  bool v_property2 = false, v_tail = false, v_sphere = false, v_annulus = false, v_moments = false;
  int dim = 512;
  double alpha = 2.0, beta = 5.0, threshold = 5.0;
  std::uint64_t trials = 1'000'000;
  verify_cmd->add_flag("--property2", v_property2, "Slab probability for a Gaussian");
  verify_cmd->add_flag("--tail", v_tail, "P(|n^T z| > threshold)");
  verify_cmd->add_flag("--sphere", v_sphere, "Slab probability on the unit sphere");
  verify_cmd->add_flag("--annulus", v_annulus, "Gaussian annulus mass");
  verify_cmd->add_flag("--moments", v_moments, "Linear score mean and covariance");
  verify_cmd->add_option("--d", dim, "Dimension");
  verify_cmd->add_option("--alpha", alpha, "Slab parameter");
  verify_cmd->add_option("--beta", beta, "Annulus half width");
  verify_cmd->add_option("--threshold", threshold, "Tail threshold");
  verify_cmd->add_option("--trials", trials, "Number of trials");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
  common(serve_cmd);
  with_config(serve_cmd);
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store_dir;
  std::uint64_t cap = 20'000;
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)");
  serve_cmd->add_option("--store", store_dir, "Boundary store (default: $HYPERSEM_HOME or .hypersem)");
  serve_cmd->add_option("--sample-cap", cap, "Largest sample count accepted by /api/boundaries/fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen_cmd->parsed()) {
      gen_config.seed = seed;
      gen_config.space = parse_space(space_text);
      if (!attributes.empty()) {
        gen_config.attributes = attributes;
        const auto m = static_cast<Eigen::Index>(attributes.size());
        gen_config.gram = Eigen::MatrixXd::Identity(m, m);
      }
      oracle::make_generator(gen_config);  // validate before writing
      write_text(out, service::dump(service::to_json(gen_config)));
    } else if (sample_cmd->parsed()) {
      if (out == "-") throw Error(ErrorCode::InvalidArgument, "sample needs --out for the dataset file");
      const auto gen = load_generator(config_path);
      const Space space = sample_space.empty() ? gen.space() : parse_space(sample_space);
      const auto ds = pipeline::synthesize_dataset(gen, count, seed, space);
      pipeline::write_dataset(out, ds);
      std::cerr << "wrote " << ds.count << " samples (d=" << ds.dim << ", m=" << ds.attribute_count
                << ") to " << out << "\n";
    } else if (fit_cmd->parsed()) {
      const auto gen = load_generator(config_path);
      for (const auto& a : fit_attrs) {
        if (a != "quality") gen.attribute_index(a);
      }
      const auto ds = pipeline::read_dataset(data_path);
      fit_options.svm.seed = seed;
      fit_options.include_quality =
          fit_attrs.empty() || std::find(fit_attrs.begin(), fit_attrs.end(), "quality") != fit_attrs.end();
      auto set = pipeline::fit_all_boundaries(ds, gen, fit_options);
      if (!fit_attrs.empty()) {
        std::erase_if(set.boundaries, [&](const svm::TrainedBoundary& b) {
          return std::find(fit_attrs.begin(), fit_attrs.end(), b.direction.name()) == fit_attrs.end();
        });
      }
      if (save_to_store) {
        service::BoundaryStore store(service::BoundaryStore::default_directory());
        for (const auto& b : set.boundaries) std::cerr << "saved " << store.save(b.direction).string() << "\n";
      }
      write_text(out, service::dump(service::to_json(set)));
    } else if (corr_cmd->parsed()) {
      const auto set = service::boundary_set_from_json(read_json(boundaries_path));
      const auto ds = pipeline::read_dataset(data_path);
      write_text(out, service::dump(service::to_json(pipeline::correlate(set, ds))));
    } else if (edit_cmd->parsed()) {
      const auto gen = load_generator(config_path);
      const auto boundaries = load_boundaries(boundaries_path, gen);
      const LatentCode z0 = load_latent(latent_path, gen, seed);
      const SemanticDirection direction = service::resolve_direction(boundaries, request);
      const LatentCode z1 = edit(z0, direction, request.alpha);
      Json cosines = Json::object();
      for (const auto& [name, other] : boundaries) cosines[name] = cosine(direction, other);
      Json resolved = service::to_json(direction);
      resolved["cosines"] = std::move(cosines);
      write_text(out, service::dump(Json{{"request",
                                          {{"attribute", request.attribute},
                                           {"alpha", request.alpha},
                                           {"conditions", request.conditions}}},
                                         {"direction", std::move(resolved)},
                                         {"before", {{"latent", service::to_json(z0)}, {"scores", scores_json(gen, z0)}}},
                                         {"after", {{"latent", service::to_json(z1)}, {"scores", scores_json(gen, z1)}}},
                                         {"face", service::to_json(oracle::face_params(gen, z1))}}));
    } else if (render_cmd->parsed()) {
      const auto gen = load_generator(config_path);
      const LatentCode z = load_latent(latent_path, gen, seed);
      const auto face = oracle::face_params(gen, z);
      const std::string svg = oracle::render(face);
      const bool svg_out = out.size() >= 4 && out.compare(out.size() - 4, 4, ".svg") == 0;
      write_text(out, svg_out ? svg
                              : service::dump(Json{{"face", service::to_json(face)},
                                                   {"scores", scores_json(gen, z)},
                                                   {"svg", svg}}));
    } else if (invert_cmd->parsed()) {
      const auto gen = load_generator(config_path);
      const auto target = service::face_from_json(read_json(target_path));
      const auto result = oracle::invert(gen, target, seed, invert_options);
      write_text(out, service::dump(Json{{"latent", service::to_json(result.code)},
                                         {"objective", result.objective},
                                         {"steps", result.steps},
                                         {"saturated", result.saturated},
                                         {"face", service::to_json(oracle::face_params(gen, result.code))}}));
    } else if (verify_cmd->parsed()) {
      const int chosen = v_property2 + v_tail + v_sphere + v_annulus + v_moments;
      if (chosen != 1) {
        throw Error(ErrorCode::InvalidArgument,
                    "choose exactly one of --property2, --tail, --sphere, --annulus, --moments");
      }
      Json report;
      if (v_property2) report = service::to_json(pipeline::property2_mc(dim, alpha, trials, seed));
      if (v_tail) report = service::to_json(pipeline::tail_mc(dim, threshold, trials, seed));
      if (v_sphere) report = service::to_json(pipeline::sphere_slab_mc(dim, alpha, trials, seed));
      if (v_annulus) report = service::to_json(pipeline::annulus_mc(dim, beta, trials, seed));
      if (v_moments) report = moments_report(load_generator(config_path), trials, seed);
      write_text(out, service::dump(report));
      if (report.contains("passed")) {
        std::cerr << report["experiment"].get<std::string>() << ": "
                  << (report["passed"].get<bool>() ? "passed" : "FAILED") << "\n";
      }
    } else if (serve_cmd->parsed()) {
      service::ApiConfig api_config;
      if (!config_path.empty()) api_config.generator = service::generator_config_from_json(read_json(config_path));
      if (!store_dir.empty()) api_config.store_dir = store_dir;
      api_config.fit_sample_cap = cap;
      api_config.seed = seed;
      service::Api api(api_config);
      service::HttpServer server(api);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      const std::string ready = service::dump(Json{{"host", host}, {"port", bound}});
      if (out == "-") {
        std::cout << ready << std::flush;
      } else {
        write_text(out, ready);
      }
      std::cerr << "listening on http://" << host << ":" << bound << "\n";
      server.listen();
      g_server = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_io_error(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
