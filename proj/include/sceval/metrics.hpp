#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sceval/core.hpp"
#include "sceval/tagging.hpp"

namespace sceval {

enum class Metric { MinAde, MinFde };

std::string_view to_string(Metric m);
std::optional<Metric> parse_metric(std::string_view text);

/// minADE up to horizon `horizon_index`: for every mode, the mean L2 error
/// over grid horizons <= the requested one where the ground truth is valid;
/// then the minimum over modes. nullopt when no such horizon exists.
///
/// Throws InputError if the prediction length differs from the grid, or
/// std::out_of_range for a bad horizon index.
std::optional<double> min_ade(const Track& track, const PredictionSet& preds,
                              const HorizonGrid& grid, std::size_t horizon_index);

/// minFDE at horizon `horizon_index`; nullopt when the ground truth is invalid there.
std::optional<double> min_fde(const Track& track, const PredictionSet& preds,
                              const HorizonGrid& grid, std::size_t horizon_index);

struct PerTrackError {
  std::string track_id;
  RUClass ru_class = RUClass::Vehicle;
  // One entry per grid horizon; nullopt where the metric is not evaluable.
  std::vector<std::optional<double>> minade;
  std::vector<std::optional<double>> minfde;
  // Grid indices with valid ground truth.
  std::vector<std::size_t> evaluated_horizons;
};

PerTrackError evaluate_track(const Track& track, const PredictionSet& preds,
                             const HorizonGrid& grid);

struct SceneEvaluation {
  std::vector<PerTrackError> errors;       // scene track order
  std::vector<std::string> missing_tracks;  // tracks with no prediction
};

/// Pairs every prediction with its track. Throws InputError naming unknown
/// or duplicated track ids, or on a trajectory length mismatch.
SceneEvaluation evaluate_scene(const Scene& scene, std::span<const PredictionSet> predictions,
                               const HorizonGrid& grid);

/// Mergeable count / mean / std / max. Variance is tracked with Welford's
/// update and Chan's pairwise merge; std is the population deviation.
class Accumulator {
 public:
  void add(double x);
  void merge(const Accumulator& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double stddev() const;
  double max() const { return max_; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double max_ = 0.0;
};

struct CellKey {
  std::string model;
  RUClass ru_class = RUClass::Vehicle;
  std::optional<Tag> tag;         // nullopt = ALL tracks
  std::optional<double> horizon;  // seconds; nullopt = over all horizons
  Metric metric = Metric::MinAde;

  friend auto operator<=>(const CellKey&, const CellKey&) = default;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct MetricCell {
  CellKey key;
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double max = 0.0;
};

/// How the over-all-horizons minFDE row is formed.
enum class AllHorizonFde {
  Final,  // minFDE at the last evaluated horizon
  Mean,   // mean of minFDE over evaluated horizons
};

class CellStore {
 public:
  void add(const CellKey& key, double value) { cells_[key].add(value); }
  void merge(const CellStore& other);

  /// Records that a track was excluded from a horizon's cells (invalid ground truth).
  void note_exclusion(const std::string& model, double horizon) { ++exclusions_[{model, horizon}]; }

  const std::map<CellKey, Accumulator>& cells() const { return cells_; }
  const std::map<std::pair<std::string, double>, std::size_t>& exclusions() const {
    return exclusions_;
  }
  bool empty() const { return cells_.empty(); }

  /// Snapshot in key order.
  std::vector<MetricCell> to_cells() const;

 private:
  std::map<CellKey, Accumulator> cells_;
  std::map<std::pair<std::string, double>, std::size_t> exclusions_;
};

/// Adds one track's errors to every (tag in tags + ALL) x (evaluated horizon +
/// ALL) cell of both metrics. Tracks with no evaluated horizon contribute
/// only exclusions.
void accumulate(CellStore& store, const PerTrackError& error, const TagSet& tags,
                const std::string& model, const HorizonGrid& grid,
                AllHorizonFde fde_mode = AllHorizonFde::Final);

}  // namespace sceval
