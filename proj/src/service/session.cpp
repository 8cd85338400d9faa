#include "hypersem/service/session.hpp"

#include <algorithm>
#include <cmath>

#include "hypersem/error.hpp"

namespace hypersem::service {

namespace {

std::string track_key(const ManipulationRequest& req) {
  std::string key = req.attribute;
  for (const auto& c : req.conditions) key += "|" + c;
  return key;
}

const SemanticDirection& lookup(const BoundaryMap& boundaries, const std::string& name) {
  const auto it = boundaries.find(name);
  if (it == boundaries.end()) {
    throw Error(ErrorCode::UnknownAttribute, "no boundary loaded for attribute '" + name + "'");
  }
  return it->second;
}

}  // namespace

SemanticDirection resolve_direction(const BoundaryMap& boundaries, const ManipulationRequest& req) {
  if (!std::isfinite(req.alpha)) {
    throw Error(ErrorCode::NonFinite, "alpha must be finite");
  }
  const SemanticDirection& primal = lookup(boundaries, req.attribute);
  if (std::find(req.conditions.begin(), req.conditions.end(), req.attribute) != req.conditions.end()) {
    throw Error(ErrorCode::InvalidArgument,
                "attribute '" + req.attribute + "' cannot be conditioned on itself");
  }
  if (req.conditions.empty()) return primal;
  std::vector<SemanticDirection> conditions;
  for (const auto& name : req.conditions) conditions.push_back(lookup(boundaries, name));
  return condition(primal, ConditionSet(std::move(conditions)));
}

Session::Session(std::shared_ptr<const oracle::GeneratorSpec> generator, BoundaryMap boundaries,
                 LatentCode initial)
    : generator_(std::move(generator)),
      boundaries_(std::move(boundaries)),
      initial_(initial),
      current_(std::move(initial)) {
  if (!generator_) throw Error(ErrorCode::InvalidArgument, "session needs a generator");
  if (initial_.dim() != generator_->dim()) {
    throw Error(ErrorCode::DimensionMismatch, "initial code does not match the generator dimension");
  }
}

void Session::accumulate(std::vector<Track>& tracks, const SemanticDirection& direction,
                         const std::string& key, double alpha) {
  if (alpha == 0.0) return;
  auto track = std::find_if(tracks.begin(), tracks.end(), [&](const Track& t) { return t.key == key; });
  if (track == tracks.end()) {
    tracks.push_back(Track{key, direction, {alpha}});
    return;
  }
  auto& steps = track->steps;
  const auto match = std::find(steps.rbegin(), steps.rend(), -alpha);
  if (match == steps.rend()) {
    steps.push_back(alpha);
    return;
  }
  steps.erase(std::next(match).base());
  if (steps.empty()) tracks.erase(track);
}

LatentCode Session::compose(const LatentCode& initial, const std::vector<Track>& tracks) {
  LatentCode code = initial;
  for (const auto& t : tracks) {
    double coefficient = 0.0;
    for (double s : t.steps) coefficient += s;
    code = edit(code, t.direction, coefficient);
  }
  return code;
}

SemanticDirection Session::apply(const ManipulationRequest& req) {
  SemanticDirection direction = resolve_direction(boundaries_, req);
  if (direction.dim() != current_.dim() || direction.space() != current_.space()) {
    throw Error(ErrorCode::SpaceMismatch, "boundary '" + req.attribute +
                                              "' does not match the session's latent space");
  }
  std::vector<Track> tracks = tracks_;
  accumulate(tracks, direction, track_key(req), req.alpha);
  current_ = compose(initial_, tracks);
  tracks_ = std::move(tracks);
  history_.push_back(req);
  return direction;
}

void Session::reset(LatentCode initial) {
  if (initial.dim() != generator_->dim()) {
    throw Error(ErrorCode::DimensionMismatch, "code does not match the generator dimension");
  }
  initial_ = initial;
  current_ = std::move(initial);
  history_.clear();
  tracks_.clear();
}

void Session::set_boundaries(BoundaryMap boundaries) {
  boundaries_ = std::move(boundaries);
  initial_ = current_;
  history_.clear();
  tracks_.clear();
}

LatentCode Session::replay(const LatentCode& initial, const BoundaryMap& boundaries,
                           const std::vector<ManipulationRequest>& history) {
  std::vector<Track> tracks;
  for (const auto& req : history) {
    accumulate(tracks, resolve_direction(boundaries, req), track_key(req), req.alpha);
  }
  return compose(initial, tracks);
}

}  // namespace hypersem::service
