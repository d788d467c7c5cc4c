#include "sceval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace sceval::synth {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t randint(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

// Speeds below this read as "still" under the default 0.01 m/s threshold.
constexpr double kStillJitter = 0.008;
// Creeping tracks never cover 1 m (the default minimum chord).
constexpr double kCreepMin = 0.03;
constexpr double kCreepMax = 0.09;
// Tracks with a shape travel at least this far between first and last valid frames.
constexpr double kShapeMinLength = 6.5;
// Twice the default straightness threshold.
constexpr double kBendMinDeviation = 1.0;

std::pair<double, double> cruise_range(RUClass c) {
  switch (c) {
    case RUClass::Vehicle:
      return {3.0, 15.0};
    case RUClass::Cyclist:
      return {2.0, 7.0};
    case RUClass::Pedestrian:
      return {0.8, 2.0};
  }
  return {1.0, 1.0};
}

RUClass draw_class(std::mt19937_64& rng) {
  const double u = uniform(rng, 0.0, 1.0);
  if (u < 0.6) return RUClass::Vehicle;
  if (u < 0.85) return RUClass::Pedestrian;
  return RUClass::Cyclist;
}

}  // namespace

TagSet expected_tags(const TrackPattern& p) {
  TagSet t;
  if (p.shape == ShapeKind::Straight) t.insert(Tag::Straight);
  if (p.shape == ShapeKind::NonStraight) t.insert(Tag::NonStraight);
  switch (p.motion) {
    case MotionKind::Starting:
      t.insert(Tag::Starting);
      break;
    case MotionKind::Stopping:
      t.insert(Tag::Stopping);
      break;
    case MotionKind::Still:
      t.insert(Tag::Still);
      break;
    case MotionKind::Moving:
      break;
  }
  switch (p.observation) {
    case ObservationKind::Full:
      t.insert(Tag::Full);
      break;
    case ObservationKind::VeryLate:
      t.insert(Tag::VeryLate);
      [[fallthrough]];
    case ObservationKind::Late:
      t.insert(Tag::Late);
      break;
    case ObservationKind::Reappearance:
      t.insert(Tag::Reappearance);
      break;
    case ObservationKind::Partial:
    case ObservationKind::Unobserved:
      break;
  }
  t.insert(p.ttp ? Tag::Ttp : Tag::Nttp);
  return t;
}

std::optional<std::string> pattern_conflict(const TrackPattern& p) {
  if (p.motion == MotionKind::Still && p.shape != ShapeKind::None) {
    return "a still track (T5) has no shape (T1/T2)";
  }
  if (p.observation == ObservationKind::Unobserved && p.motion != MotionKind::Moving) {
    return "an unobserved track carries no motion tag (T3/T4/T5)";
  }
  if (p.constant_velocity) {
    if (p.motion == MotionKind::Starting || p.motion == MotionKind::Stopping) {
      return "constant velocity excludes T3/T4";
    }
    if (p.shape == ShapeKind::NonStraight) return "constant velocity excludes T2";
  }
  return std::nullopt;
}

const std::vector<TrackPattern>& all_patterns() {
  static const std::vector<TrackPattern> patterns = [] {
    std::vector<TrackPattern> out;
    for (bool cv : {false, true}) {
      for (ShapeKind s : {ShapeKind::Straight, ShapeKind::NonStraight, ShapeKind::None}) {
        for (MotionKind m : {MotionKind::Starting, MotionKind::Stopping, MotionKind::Still,
                             MotionKind::Moving}) {
          for (ObservationKind o :
               {ObservationKind::Full, ObservationKind::Late, ObservationKind::VeryLate,
                ObservationKind::Partial, ObservationKind::Reappearance,
                ObservationKind::Unobserved}) {
            for (bool ttp : {false, true}) {
              TrackPattern p{s, m, o, ttp, cv};
              if (!pattern_conflict(p)) out.push_back(p);
            }
          }
        }
      }
    }
    return out;
  }();
  return patterns;
}

TrackPattern resolve_pattern(const TagSet& requested, bool constant_velocity,
                             std::mt19937_64& rng) {
  static constexpr std::pair<Tag, Tag> kExclusive[] = {
      {Tag::Straight, Tag::NonStraight}, {Tag::Starting, Tag::Stopping},
      {Tag::Starting, Tag::Still},       {Tag::Stopping, Tag::Still},
      {Tag::Late, Tag::Full},            {Tag::VeryLate, Tag::Full},
      {Tag::Late, Tag::Reappearance},    {Tag::VeryLate, Tag::Reappearance},
      {Tag::Full, Tag::Reappearance},    {Tag::Ttp, Tag::Nttp},
      {Tag::Still, Tag::Straight},       {Tag::Still, Tag::NonStraight},
  };
  for (const auto& [a, b] : kExclusive) {
    if (requested.contains(a) && requested.contains(b)) {
      throw InputError("unsatisfiable tag pattern: " + std::string(tag_code(a)) + " conflicts with " +
                       std::string(tag_code(b)));
    }
  }
  if (constant_velocity) {
    for (Tag t : {Tag::NonStraight, Tag::Starting, Tag::Stopping}) {
      if (requested.contains(t)) {
        throw InputError("unsatisfiable tag pattern: " + std::string(tag_code(t)) +
                         " conflicts with constant-velocity motion");
      }
    }
  }

  std::vector<const TrackPattern*> candidates;
  for (const TrackPattern& p : all_patterns()) {
    if (p.constant_velocity != constant_velocity) continue;
    const TagSet tags = expected_tags(p);
    bool ok = true;
    for (Tag t : requested.tags()) ok = ok && tags.contains(t);
    if (ok) candidates.push_back(&p);
  }
  if (candidates.empty()) {
    throw InputError("unsatisfiable tag pattern: " + requested.to_string());
  }
  return *candidates[randint(rng, 0, candidates.size() - 1)];
}

namespace {

// nullopt when the draw cannot carry the pattern's bend.
std::optional<Track> draw_track(const TrackPattern& p, const std::string& id, std::mt19937_64& rng) {
  if (auto conflict = pattern_conflict(p)) throw InputError("unsatisfiable pattern: " + *conflict);

  const RUClass ru = draw_class(rng);

  // Validity mask.
  std::array<bool, kFrameCount> valid{};
  const std::size_t last = coin(rng, 0.7) ? kFrameCount - 1 : randint(rng, 60, kFrameCount - 2);
  std::size_t future_start = kHistoryFrames;
  auto set_range = [&](std::size_t a, std::size_t b) {
    for (std::size_t f = a; f <= b; ++f) valid[f] = true;
  };
  switch (p.observation) {
    case ObservationKind::Full:
      set_range(0, kCurrentIndex);
      break;
    case ObservationKind::Late:
      set_range(kHistoryFrames - randint(rng, 2, 3), kCurrentIndex);
      break;
    case ObservationKind::VeryLate:
      valid[kCurrentIndex] = true;
      break;
    case ObservationKind::Partial:
      if (coin(rng, 0.5)) {
        set_range(kHistoryFrames - randint(rng, 4, 10), kCurrentIndex);
      } else {
        // Gap right before the current frame: never contiguous, never full.
        bool any = false;
        for (std::size_t f = 0; f + 2 < kHistoryFrames; ++f) {
          valid[f] = coin(rng, 0.5);
          any = any || valid[f];
        }
        if (!any) valid[randint(rng, 0, kHistoryFrames - 3)] = true;
        valid[kCurrentIndex] = true;
      }
      break;
    case ObservationKind::Reappearance: {
      const std::size_t a = randint(rng, 0, 8);
      set_range(a, randint(rng, a, kCurrentIndex - 1));
      future_start = randint(rng, kHistoryFrames, 25);
      break;
    }
    case ObservationKind::Unobserved:
      future_start = randint(rng, kHistoryFrames, 25);
      break;
  }
  set_range(future_start, last);

  // Normalized speed profile and the frames held still.
  std::array<double, kFrameCount> u{};
  std::array<bool, kFrameCount> still{};
  auto ramp = [](double from, double to, double t) { return from + (to - from) * t; };
  switch (p.motion) {
    case MotionKind::Still:
      still.fill(true);
      break;
    case MotionKind::Moving: {
      const std::size_t variant =
          p.constant_velocity ? 0 : randint(rng, 0, p.shape == ShapeKind::None ? 1 : 2);
      if (variant == 0) {
        u.fill(1.0);
      } else if (variant == 1) {
        const double a = uniform(rng, p.shape == ShapeKind::None ? 0.7 : 0.3, 1.0);
        const bool accelerating = coin(rng, 0.5);
        for (std::size_t f = 0; f < kFrameCount; ++f) {
          const double t = static_cast<double>(f) / static_cast<double>(kFrameCount - 1);
          u[f] = accelerating ? ramp(a, 1.0, t) : ramp(1.0, a, t);
        }
      } else {
        // Stop for a while, then move again before the track ends.
        const std::size_t d = randint(rng, 15, last - 30);
        const std::size_t m1 = randint(rng, 3, 6);
        const std::size_t hold = randint(rng, 6, 12);
        const std::size_t m2 = randint(rng, 3, 6);
        for (std::size_t f = 0; f < kFrameCount; ++f) {
          if (f <= d) {
            u[f] = 1.0;
          } else if (f < d + m1) {
            u[f] = ramp(1.0, 0.0, static_cast<double>(f - d) / static_cast<double>(m1));
          } else if (f < d + m1 + hold) {
            still[f] = true;
          } else if (f < d + m1 + hold + m2) {
            u[f] = static_cast<double>(f - (d + m1 + hold) + 1) / static_cast<double>(m2);
          } else {
            u[f] = 1.0;
          }
        }
      }
      break;
    }
    case MotionKind::Starting: {
      const std::size_t s = randint(rng, kCurrentIndex, 25);
      const std::size_t m = randint(rng, 5, 15);
      for (std::size_t f = 0; f < kFrameCount; ++f) {
        if (f <= s) {
          still[f] = true;
        } else if (f < s + m) {
          u[f] = static_cast<double>(f - s) / static_cast<double>(m);
        } else {
          u[f] = 1.0;
        }
      }
      break;
    }
    case MotionKind::Stopping: {
      const std::size_t d = randint(rng, 20, last - 20);
      const std::size_t m = randint(rng, 3, 10);
      for (std::size_t f = 0; f < kFrameCount; ++f) {
        if (f <= d) {
          u[f] = 1.0;
        } else if (f < d + m) {
          u[f] = ramp(1.0, 0.0, static_cast<double>(f - d) / static_cast<double>(m));
        } else {
          still[f] = true;
        }
      }
      break;
    }
  }

  std::size_t first_valid = 0;
  while (!valid[first_valid]) ++first_valid;
  std::size_t last_valid = kFrameCount - 1;
  while (!valid[last_valid]) --last_valid;

  // Cruise speed.
  double cruise = 0.0;
  if (p.shape == ShapeKind::None) {
    cruise = uniform(rng, kCreepMin, kCreepMax);
  } else {
    const auto [lo, hi] = cruise_range(ru);
    cruise = uniform(rng, lo, hi);
    double unit_length = 0.0;
    for (std::size_t f = first_valid; f < last_valid; ++f) {
      unit_length += 0.5 * (u[f] + u[f + 1]) * kFramePeriod;
    }
    cruise = std::max(cruise, kShapeMinLength / unit_length);
  }

  const double theta0 = uniform(rng, -std::numbers::pi, std::numbers::pi);
  const Point2 origin{uniform(rng, -1000.0, 1000.0), uniform(rng, -1000.0, 1000.0)};
  const double turn = p.shape == ShapeKind::NonStraight
                          ? uniform(rng, std::numbers::pi / 2, std::numbers::pi) * (coin(rng, 0.5) ? 1 : -1)
                          : 0.0;

  auto build = [&](double cruise_speed) {
    std::array<double, kFrameCount> v{};
    for (std::size_t f = 0; f < kFrameCount; ++f) {
      if (still[f]) {
        v[f] = p.constant_velocity ? 0.0 : uniform(rng, 0.0, kStillJitter);
      } else {
        v[f] = cruise_speed * u[f];
      }
    }

    // Arc length along the path.
    std::array<double, kFrameCount> s{};
    for (std::size_t f = 1; f < kFrameCount; ++f) {
      s[f] = p.constant_velocity ? v[0] * kFramePeriod * static_cast<double>(f)
                                 : s[f - 1] + 0.5 * (v[f - 1] + v[f]) * kFramePeriod;
    }
    const double curvature = turn == 0.0 ? 0.0 : turn / (s[last_valid] - s[first_valid]);

    std::vector<State> states(kFrameCount);
    for (std::size_t f = 0; f < kFrameCount; ++f) {
      if (!valid[f]) continue;
      const double theta = theta0 + curvature * s[f];
      State& st = states[f];
      if (curvature == 0.0) {
        st.x = origin.x + s[f] * std::cos(theta0);
        st.y = origin.y + s[f] * std::sin(theta0);
      } else {
        st.x = origin.x + (std::sin(theta) - std::sin(theta0)) / curvature;
        st.y = origin.y + (std::cos(theta0) - std::cos(theta)) / curvature;
      }
      st.vx = v[f] * std::cos(theta);
      st.vy = v[f] * std::sin(theta);
      st.heading = normalize_angle(theta);
      st.valid = true;
    }
    return states;
  };

  std::vector<State> states = build(cruise);
  // Sparse masks can leave the valid points bunched near the chord ends; a
  // longer arc pushes the middle ones out.
  if (p.shape == ShapeKind::NonStraight) {
    for (int i = 0;; ++i) {
      const Track probe(id, ru, states, p.ttp);
      if (chord_deviation(probe).max_deviation >= kBendMinDeviation) break;
      if (i == 8) return std::nullopt;
      cruise *= 1.5;
      states = build(cruise);
    }
  }
  return Track(id, ru, std::move(states), p.ttp);
}

}  // namespace

Track gen_track(const TrackPattern& p, std::string id, std::mt19937_64& rng) {
  while (true) {
    if (auto t = draw_track(p, id, rng)) return std::move(*t);
  }
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SynthScene gen_scene(std::span<const CompositionEntry> composition, std::uint64_t seed,
                     std::string scene_id) {
  std::mt19937_64 rng(seed);
  std::vector<Track> tracks;
  std::vector<TagSet> expected;
  for (const CompositionEntry& entry : composition) {
    for (std::size_t i = 0; i < entry.count; ++i) {
      const TrackPattern p = resolve_pattern(entry.tags, entry.constant_velocity, rng);
      tracks.push_back(gen_track(p, "t" + std::to_string(tracks.size()), rng));
      expected.push_back(expected_tags(p));
    }
  }
  return {Scene(std::move(scene_id), default_timestamps(), std::move(tracks)), std::move(expected)};
}

SynthScene gen_random_scene(std::span<const TrackPattern> patterns, std::size_t track_count,
                            std::uint64_t seed, std::string scene_id) {
  if (patterns.empty()) throw InputError("no track patterns to draw from");
  std::mt19937_64 rng(seed);
  std::vector<Track> tracks;
  std::vector<TagSet> expected;
  for (std::size_t i = 0; i < track_count; ++i) {
    const TrackPattern& p = patterns[randint(rng, 0, patterns.size() - 1)];
    tracks.push_back(gen_track(p, "t" + std::to_string(i), rng));
    expected.push_back(expected_tags(p));
  }
  return {Scene(std::move(scene_id), default_timestamps(), std::move(tracks)), std::move(expected)};
}

PredictionSet gen_prediction_with_error(const Track& track, const HorizonGrid& grid,
                                        std::span<const std::optional<double>> target_fde,
                                        std::uint64_t seed) {
  if (target_fde.size() != grid.size()) {
    throw InputError("expected one error target per grid horizon");
  }
  std::mt19937_64 rng(seed);
  std::vector<Point2> traj;
  traj.reserve(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const std::size_t frame = grid.frame_of(j);
    const auto gt = track.at(frame);
    if (target_fde[j]) {
      if (!gt) {
        throw InputError("error target at horizon " + std::to_string(grid.horizons()[j]) +
                         " s where the ground truth of track '" + track.id() + "' is invalid");
      }
      const double sp = std::hypot(gt->vx, gt->vy);
      Point2 normal;
      if (sp > 1e-9) {
        normal = {-gt->vy / sp, gt->vx / sp};
      } else {
        const double a = uniform(rng, -std::numbers::pi, std::numbers::pi);
        normal = {std::cos(a), std::sin(a)};
      }
      traj.push_back({gt->x + *target_fde[j] * normal.x, gt->y + *target_fde[j] * normal.y});
      continue;
    }
    if (gt) {
      traj.push_back(gt->position());
      continue;
    }
    // Nearest valid ground truth, searching earlier frames first.
    std::optional<State> near;
    for (std::size_t d = 1; !near && d < kFrameCount; ++d) {
      if (frame >= d) near = track.at(frame - d);
      if (!near && frame + d < kFrameCount) near = track.at(frame + d);
    }
    traj.push_back(near->position());
  }
  return PredictionSet(track.id(), {std::move(traj)}, {1.0});
}

}  // namespace sceval::synth
