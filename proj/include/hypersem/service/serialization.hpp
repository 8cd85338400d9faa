#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "hypersem/geometry.hpp"
#include "hypersem/montecarlo.hpp"
#include "hypersem/oracle.hpp"
#include "hypersem/pipeline.hpp"
#include "hypersem/svm.hpp"

namespace hypersem::service {

// Insertion-ordered objects keep documents stable and readable.
using Json = nlohmann::ordered_json;

/// Parses UTF-8 JSON text. Syntax errors become MalformedFile with the byte
/// offset reported by the parser.
Json parse_json(std::string_view text, const std::string& what);

/// Doubles are written in the shortest form that reads back to the same
/// bits, so every document round-trips losslessly.
std::string dump(const Json& doc);

Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j);
Json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const Json& j);

// {name, space, dim, normal, intercept, meta: {seed, train_count, val_accuracy}}
Json to_json(const SemanticDirection& direction);
SemanticDirection direction_from_json(const Json& j);

// {space, dim, values}
Json to_json(const LatentCode& code);
LatentCode latent_from_json(const Json& j);

Json to_json(const oracle::GeneratorConfig& config);
/// Missing keys take their defaults (Table 2 attributes and Gram, d = 512).
/// A custom attribute list without a Gram gets the identity.
oracle::GeneratorConfig generator_config_from_json(const Json& j);

Json to_json(const oracle::FaceParams& face);
oracle::FaceParams face_from_json(const Json& j);

Json to_json(const svm::TrainedBoundary& boundary);
svm::TrainedBoundary trained_boundary_from_json(const Json& j);

// {space, boundaries: [...]}
Json to_json(const pipeline::BoundarySet& set);
pipeline::BoundarySet boundary_set_from_json(const Json& j);

Json to_json(const pipeline::MonteCarloReport& report);
Json to_json(const pipeline::CorrelationReport& report);
Json to_json(const pipeline::SweepReport& report);

}  // namespace hypersem::service
