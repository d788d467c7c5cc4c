#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sceval/core.hpp"
#include "sceval/tagging.hpp"

namespace sceval::synth {

enum class ShapeKind { Straight, NonStraight, None };
enum class MotionKind { Starting, Stopping, Still, Moving };
enum class ObservationKind { Full, Late, VeryLate, Partial, Reappearance, Unobserved };

/// One fully determined track template. Every satisfiable pattern maps to
/// exactly one tag set under default TagParams.
struct TrackPattern {
  ShapeKind shape = ShapeKind::Straight;
  MotionKind motion = MotionKind::Moving;
  ObservationKind observation = ObservationKind::Full;
  bool ttp = false;
  bool constant_velocity = false;

  friend bool operator==(const TrackPattern&, const TrackPattern&) = default;
};

/// Tags a track generated from `p` carries under default TagParams.
TagSet expected_tags(const TrackPattern& p);

/// Reason the pattern cannot be realized, or nullopt.
std::optional<std::string> pattern_conflict(const TrackPattern& p);

/// Every realizable pattern, in a fixed order.
const std::vector<TrackPattern>& all_patterns();

/// Requested tags for `count` tracks. Dimensions the request leaves open
/// (shape, motion, observation, TTP) are drawn at random among realizable
/// choices, so every generated track carries a superset of `tags`.
struct CompositionEntry {
  TagSet tags;
  std::size_t count = 1;
  bool constant_velocity = false;
};

/// Picks a realizable pattern whose tags contain `requested`. Throws
/// InputError naming the conflicting tags when none exists.
TrackPattern resolve_pattern(const TagSet& requested, bool constant_velocity, std::mt19937_64& rng);

/// Generates one track from a pattern.
Track gen_track(const TrackPattern& p, std::string id, std::mt19937_64& rng);

struct SynthScene {
  Scene scene;
  std::vector<TagSet> expected;  // parallel to scene.tracks()
};

/// Scene with the requested composition, reproducible per seed.
SynthScene gen_scene(std::span<const CompositionEntry> composition, std::uint64_t seed,
                     std::string scene_id = "synth");

/// Scene whose tracks are drawn uniformly from `patterns`.
SynthScene gen_random_scene(std::span<const TrackPattern> patterns, std::size_t track_count,
                            std::uint64_t seed, std::string scene_id);

/// Independent per-index seed derived from a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Single-mode prediction whose error at each targeted horizon equals the
/// target: the ground truth offset perpendicular to the motion direction.
/// Untargeted horizons copy the nearest valid ground-truth position. Throws
/// InputError when a target sits on a horizon with invalid ground truth.
PredictionSet gen_prediction_with_error(const Track& track, const HorizonGrid& grid,
                                        std::span<const std::optional<double>> target_fde,
                                        std::uint64_t seed);

}  // namespace sceval::synth
