#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sceval {

// Fixed scene layout: 11 observed frames (including the current one) and
// 80 future frames, sampled at 10 Hz.
inline constexpr std::size_t kHistoryFrames = 11;
inline constexpr std::size_t kFutureFrames = 80;
inline constexpr std::size_t kFrameCount = kHistoryFrames + kFutureFrames;
inline constexpr std::size_t kCurrentIndex = kHistoryFrames - 1;
inline constexpr double kFramePeriod = 0.1;
inline constexpr double kFrameRate = 10.0;

/// Raised for malformed or inconsistent input data.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RUClass { Vehicle, Pedestrian, Cyclist };

inline constexpr std::array<RUClass, 3> kAllClasses{RUClass::Vehicle, RUClass::Pedestrian,
                                                    RUClass::Cyclist};

std::string_view to_string(RUClass c);
/// Short column label used in rendered tables ("Veh.", "Ped.", "Cyc.").
std::string_view short_label(RUClass c);
std::optional<RUClass> parse_ru_class(std::string_view name);

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

double distance(Point2 a, Point2 b);

struct State {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double heading = 0.0;
  bool valid = false;

  Point2 position() const { return {x, y}; }

  friend bool operator==(const State&, const State&) = default;
};

/// Magnitude of the velocity of a valid state. Throws std::logic_error when
/// called on an invalid state.
double speed(const State& state);

/// Wraps an angle into (-pi, pi].
double normalize_angle(double radians);

/// A valid state together with its frame index.
struct FrameState {
  std::size_t frame;
  const State* state;
};

class Track {
 public:
  Track(std::string id, RUClass ru_class, std::vector<State> states, bool is_ttp);

  const std::string& id() const { return id_; }
  RUClass ru_class() const { return ru_class_; }
  bool is_ttp() const { return is_ttp_; }

  bool valid_at(std::size_t frame) const { return frame < states_.size() && states_[frame].valid; }

  /// The state at `frame`, or nullopt when the frame is invalid.
  std::optional<State> at(std::size_t frame) const;

  /// Valid states in frame order.
  std::vector<FrameState> valid_states() const;

  /// Raw per-frame states. Invalid entries are zeroed at construction.
  const std::vector<State>& raw_states() const { return states_; }

  friend bool operator==(const Track&, const Track&) = default;

 private:
  std::string id_;
  RUClass ru_class_;
  std::vector<State> states_;
  bool is_ttp_;
};

class Scene {
 public:
  Scene(std::string scene_id, std::vector<double> timestamps, std::vector<Track> tracks);

  const std::string& scene_id() const { return scene_id_; }
  const std::vector<double>& timestamps() const { return timestamps_; }
  std::size_t current_index() const { return kCurrentIndex; }
  const std::vector<Track>& tracks() const { return tracks_; }

  const Track* find_track(std::string_view id) const;

  friend bool operator==(const Scene&, const Scene&) = default;

 private:
  std::string scene_id_;
  std::vector<double> timestamps_;
  std::vector<Track> tracks_;
};

/// Evenly spaced timestamps starting at `start`, one per frame.
std::vector<double> default_timestamps(double start = 0.0);

/// Prediction horizons in seconds after the current frame, each mapped to a
/// future frame offset at 10 Hz.
class HorizonGrid {
 public:
  explicit HorizonGrid(std::vector<double> horizons);

  const std::vector<double>& horizons() const { return horizons_; }
  const std::vector<std::size_t>& frame_offsets() const { return offsets_; }
  std::size_t size() const { return horizons_.size(); }

  /// Absolute frame index of horizon `i` within a scene.
  std::size_t frame_of(std::size_t i) const { return kCurrentIndex + offsets_[i]; }

  /// Index of the horizon equal to `seconds` (within 1e-9), if present.
  std::optional<std::size_t> index_of(double seconds) const;

  friend bool operator==(const HorizonGrid&, const HorizonGrid&) = default;

 private:
  std::vector<double> horizons_;
  std::vector<std::size_t> offsets_;
};

/// 0.1 s, then every 0.5 s up to 7.6 s (2 Hz starting at the first future frame).
HorizonGrid default_horizon_grid();

class PredictionSet {
 public:
  PredictionSet(std::string track_id, std::vector<std::vector<Point2>> trajectories,
                std::vector<double> confidences);

  const std::string& track_id() const { return track_id_; }
  const std::vector<std::vector<Point2>>& trajectories() const { return trajectories_; }
  const std::vector<double>& confidences() const { return confidences_; }
  std::size_t mode_count() const { return trajectories_.size(); }
  std::size_t horizon_count() const { return trajectories_.front().size(); }

  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;

 private:
  std::string track_id_;
  std::vector<std::vector<Point2>> trajectories_;
  std::vector<double> confidences_;
};

/// Rotation about the origin followed by a translation.
struct RigidTransform2 {
  double angle = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Point2 apply(Point2 p) const;
  Point2 rotate(Point2 v) const;
  State apply(const State& s) const;
  Track apply(const Track& track) const;
  Scene apply(const Scene& scene) const;
  PredictionSet apply(const PredictionSet& preds) const;
};

}  // namespace sceval
