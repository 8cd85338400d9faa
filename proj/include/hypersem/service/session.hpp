#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hypersem/geometry.hpp"
#include "hypersem/oracle.hpp"

namespace hypersem::service {

struct ManipulationRequest {
  std::string attribute;
  double alpha = 0.0;
  std::vector<std::string> conditions;

  bool operator==(const ManipulationRequest&) const = default;
};

using BoundaryMap = std::map<std::string, SemanticDirection>;

/// The direction an edit request moves along: the named boundary, projected
/// off the condition boundaries when there are any. Throws UnknownAttribute,
/// InvalidArgument (attribute listed among its own conditions) or
/// DegenerateProjection.
SemanticDirection resolve_direction(const BoundaryMap& boundaries, const ManipulationRequest& req);

/// One editing session: a starting code and the requests applied since.
///
/// The current code is initial + Σ cₖ·nₖ over the distinct resolved
/// directions, where cₖ sums the steps still outstanding along nₖ. A step
/// that exactly negates an outstanding one cancels it, so +α followed by −α
/// restores the previous code bit for bit.
class Session {
 public:
  Session(std::shared_ptr<const oracle::GeneratorSpec> generator, BoundaryMap boundaries,
          LatentCode initial);

  const oracle::GeneratorSpec& generator() const noexcept { return *generator_; }
  const BoundaryMap& boundaries() const noexcept { return boundaries_; }
  const LatentCode& initial() const noexcept { return initial_; }
  const LatentCode& current() const noexcept { return current_; }
  const std::vector<ManipulationRequest>& history() const noexcept { return history_; }

  /// Resolves, applies and records the request; returns the resolved direction.
  SemanticDirection apply(const ManipulationRequest& req);

  /// Starts over from a new code with an empty history.
  void reset(LatentCode initial);

  /// Swaps the boundary set. The current code becomes the new starting point.
  void set_boundaries(BoundaryMap boundaries);

  /// Recomputes the code reached by applying `history` to `initial`.
  static LatentCode replay(const LatentCode& initial, const BoundaryMap& boundaries,
                           const std::vector<ManipulationRequest>& history);

 private:
  struct Track {
    std::string key;
    SemanticDirection direction;
    std::vector<double> steps;
  };

  static void accumulate(std::vector<Track>& tracks, const SemanticDirection& direction,
                         const std::string& key, double alpha);
  static LatentCode compose(const LatentCode& initial, const std::vector<Track>& tracks);

  std::shared_ptr<const oracle::GeneratorSpec> generator_;
  BoundaryMap boundaries_;
  LatentCode initial_;
  LatentCode current_;
  std::vector<ManipulationRequest> history_;
  std::vector<Track> tracks_;
};

}  // namespace hypersem::service
