#include "sceval/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace sceval {

std::string_view to_string(RUClass c) {
  switch (c) {
    case RUClass::Vehicle:
      return "vehicle";
    case RUClass::Pedestrian:
      return "pedestrian";
    case RUClass::Cyclist:
      return "cyclist";
  }
  return "unknown";
}

std::string_view short_label(RUClass c) {
  switch (c) {
    case RUClass::Vehicle:
      return "Veh.";
    case RUClass::Pedestrian:
      return "Ped.";
    case RUClass::Cyclist:
      return "Cyc.";
  }
  return "?";
}

std::optional<RUClass> parse_ru_class(std::string_view name) {
  for (RUClass c : kAllClasses) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double speed(const State& state) {
  if (!state.valid) throw std::logic_error("speed() called on an invalid state");
  return std::hypot(state.vx, state.vy);
}

double normalize_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

Track::Track(std::string id, RUClass ru_class, std::vector<State> states, bool is_ttp)
    : id_(std::move(id)), ru_class_(ru_class), states_(std::move(states)), is_ttp_(is_ttp) {
  if (states_.size() != kFrameCount) {
    throw InputError("track '" + id_ + "': expected " + std::to_string(kFrameCount) +
                     " states, got " + std::to_string(states_.size()));
  }
  if (std::none_of(states_.begin(), states_.end(), [](const State& s) { return s.valid; })) {
    throw InputError("track '" + id_ + "': no valid state");
  }
  for (std::size_t f = 0; f < states_.size(); ++f) {
    State& s = states_[f];
    if (!s.valid) s = State{};
    if (s.valid && !(std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.vx) &&
                     std::isfinite(s.vy) && std::isfinite(s.heading))) {
      throw InputError("track '" + id_ + "': non-finite value in states[" + std::to_string(f) + "]");
    }
  }
}

std::optional<State> Track::at(std::size_t frame) const {
  if (!valid_at(frame)) return std::nullopt;
  return states_[frame];
}

std::vector<FrameState> Track::valid_states() const {
  std::vector<FrameState> out;
  out.reserve(states_.size());
  for (std::size_t f = 0; f < states_.size(); ++f) {
    if (states_[f].valid) out.push_back({f, &states_[f]});
  }
  return out;
}

Scene::Scene(std::string scene_id, std::vector<double> timestamps, std::vector<Track> tracks)
    : scene_id_(std::move(scene_id)), timestamps_(std::move(timestamps)), tracks_(std::move(tracks)) {
  if (timestamps_.size() != kFrameCount) {
    throw InputError("scene '" + scene_id_ + "': expected " + std::to_string(kFrameCount) +
                     " timestamps, got " + std::to_string(timestamps_.size()));
  }
  for (std::size_t i = 1; i < timestamps_.size(); ++i) {
    const double step = timestamps_[i] - timestamps_[i - 1];
    if (std::abs(step - kFramePeriod) > 1e-6) {
      throw InputError("scene '" + scene_id_ + "': timestamps[" + std::to_string(i) +
                       "] breaks the 0.1 s spacing");
    }
  }
  std::unordered_set<std::string_view> seen;
  for (const Track& t : tracks_) {
    if (!seen.insert(t.id()).second) {
      throw InputError("scene '" + scene_id_ + "': duplicate track id '" + t.id() + "'");
    }
  }
}

const Track* Scene::find_track(std::string_view id) const {
  for (const Track& t : tracks_) {
    if (t.id() == id) return &t;
  }
  return nullptr;
}

std::vector<double> default_timestamps(double start) {
  std::vector<double> ts(kFrameCount);
  for (std::size_t i = 0; i < kFrameCount; ++i) ts[i] = start + static_cast<double>(i) / kFrameRate;
  return ts;
}

HorizonGrid::HorizonGrid(std::vector<double> horizons) : horizons_(std::move(horizons)) {
  if (horizons_.empty()) throw InputError("horizon grid is empty");
  offsets_.reserve(horizons_.size());
  for (std::size_t i = 0; i < horizons_.size(); ++i) {
    const double h = horizons_[i];
    if (i > 0 && !(h > horizons_[i - 1])) {
      throw InputError("horizon grid must be strictly increasing");
    }
    const double frames = h * kFrameRate;
    const double rounded = std::round(frames);
    if (std::abs(frames - rounded) > 1e-6 || rounded < 1.0 ||
        rounded > static_cast<double>(kFutureFrames)) {
      throw InputError("horizon " + std::to_string(h) + " s does not map to a future frame");
    }
    offsets_.push_back(static_cast<std::size_t>(rounded));
  }
}

std::optional<std::size_t> HorizonGrid::index_of(double seconds) const {
  for (std::size_t i = 0; i < horizons_.size(); ++i) {
    if (std::abs(horizons_[i] - seconds) <= 1e-9) return i;
  }
  return std::nullopt;
}

HorizonGrid default_horizon_grid() {
  std::vector<double> hs;
  hs.reserve(16);
  for (int k = 0; k < 16; ++k) hs.push_back(0.1 + k / 2.0);
  return HorizonGrid(std::move(hs));
}

PredictionSet::PredictionSet(std::string track_id, std::vector<std::vector<Point2>> trajectories,
                             std::vector<double> confidences)
    : track_id_(std::move(track_id)),
      trajectories_(std::move(trajectories)),
      confidences_(std::move(confidences)) {
  if (trajectories_.empty()) {
    throw InputError("prediction for track '" + track_id_ + "' has no trajectories");
  }
  if (confidences_.size() != trajectories_.size()) {
    throw InputError("prediction for track '" + track_id_ + "': " +
                     std::to_string(confidences_.size()) + " confidences for " +
                     std::to_string(trajectories_.size()) + " trajectories");
  }
  const std::size_t len = trajectories_.front().size();
  for (const auto& traj : trajectories_) {
    if (traj.size() != len || len == 0) {
      throw InputError("prediction for track '" + track_id_ +
                       "': trajectories have differing or zero length");
    }
  }
  for (double c : confidences_) {
    if (!(c >= 0.0)) {
      throw InputError("prediction for track '" + track_id_ + "': negative confidence");
    }
  }
}

Point2 RigidTransform2::rotate(Point2 v) const {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

Point2 RigidTransform2::apply(Point2 p) const {
  const Point2 r = rotate(p);
  return {r.x + tx, r.y + ty};
}

State RigidTransform2::apply(const State& s) const {
  if (!s.valid) return s;
  const Point2 p = apply(s.position());
  const Point2 v = rotate({s.vx, s.vy});
  return {p.x, p.y, v.x, v.y, normalize_angle(s.heading + angle), true};
}

Track RigidTransform2::apply(const Track& track) const {
  std::vector<State> states;
  states.reserve(track.raw_states().size());
  for (const State& s : track.raw_states()) states.push_back(apply(s));
  return Track(track.id(), track.ru_class(), std::move(states), track.is_ttp());
}

Scene RigidTransform2::apply(const Scene& scene) const {
  std::vector<Track> tracks;
  tracks.reserve(scene.tracks().size());
  for (const Track& t : scene.tracks()) tracks.push_back(apply(t));
  return Scene(scene.scene_id(), scene.timestamps(), std::move(tracks));
}

PredictionSet RigidTransform2::apply(const PredictionSet& preds) const {
  auto trajectories = preds.trajectories();
  for (auto& traj : trajectories) {
    for (Point2& p : traj) p = apply(p);
  }
  return PredictionSet(preds.track_id(), std::move(trajectories), preds.confidences());
}

}  // namespace sceval
