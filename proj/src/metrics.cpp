#include "sceval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace sceval {

std::string_view to_string(Metric m) { return m == Metric::MinAde ? "minADE" : "minFDE"; }

std::optional<Metric> parse_metric(std::string_view text) {
  if (text == "minADE") return Metric::MinAde;
  if (text == "minFDE") return Metric::MinFde;
  return std::nullopt;
}

namespace {

void check_shapes(const PredictionSet& preds, const HorizonGrid& grid, std::size_t horizon_index) {
  if (preds.horizon_count() != grid.size()) {
    throw InputError("prediction for track '" + preds.track_id() + "' has " +
                     std::to_string(preds.horizon_count()) + " points per trajectory, grid has " +
                     std::to_string(grid.size()));
  }
  if (horizon_index >= grid.size()) throw std::out_of_range("horizon index outside the grid");
}

}  // namespace

std::optional<double> min_ade(const Track& track, const PredictionSet& preds,
                              const HorizonGrid& grid, std::size_t horizon_index) {
  check_shapes(preds, grid, horizon_index);
  std::vector<Point2> truth;
  std::vector<std::size_t> used;
  for (std::size_t j = 0; j <= horizon_index; ++j) {
    if (const auto s = track.at(grid.frame_of(j))) {
      truth.push_back(s->position());
      used.push_back(j);
    }
  }
  if (used.empty()) return std::nullopt;

  // The min is taken over whole trajectories, never per horizon.
  double best = std::numeric_limits<double>::infinity();
  for (const auto& traj : preds.trajectories()) {
    double sum = 0.0;
    for (std::size_t i = 0; i < used.size(); ++i) sum += distance(traj[used[i]], truth[i]);
    best = std::min(best, sum / static_cast<double>(used.size()));
  }
  return best;
}

std::optional<double> min_fde(const Track& track, const PredictionSet& preds,
                              const HorizonGrid& grid, std::size_t horizon_index) {
  check_shapes(preds, grid, horizon_index);
  const auto s = track.at(grid.frame_of(horizon_index));
  if (!s) return std::nullopt;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& traj : preds.trajectories()) {
    best = std::min(best, distance(traj[horizon_index], s->position()));
  }
  return best;
}

PerTrackError evaluate_track(const Track& track, const PredictionSet& preds,
                             const HorizonGrid& grid) {
  PerTrackError out;
  out.track_id = track.id();
  out.ru_class = track.ru_class();
  out.minade.reserve(grid.size());
  out.minfde.reserve(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    out.minade.push_back(min_ade(track, preds, grid, j));
    out.minfde.push_back(min_fde(track, preds, grid, j));
    if (out.minfde.back()) out.evaluated_horizons.push_back(j);
  }
  return out;
}

SceneEvaluation evaluate_scene(const Scene& scene, std::span<const PredictionSet> predictions,
                               const HorizonGrid& grid) {
  std::unordered_map<std::string_view, const PredictionSet*> by_track;
  std::vector<std::string> unknown;
  for (const PredictionSet& p : predictions) {
    if (!scene.find_track(p.track_id())) {
      unknown.push_back(p.track_id());
      continue;
    }
    if (!by_track.emplace(p.track_id(), &p).second) {
      throw InputError("scene '" + scene.scene_id() + "': duplicate prediction for track '" +
                       p.track_id() + "'");
    }
  }
  if (!unknown.empty()) {
    std::string msg = "scene '" + scene.scene_id() + "': predictions for unknown tracks:";
    for (const auto& id : unknown) msg += " " + id;
    throw InputError(msg);
  }

  SceneEvaluation out;
  for (const Track& track : scene.tracks()) {
    const auto it = by_track.find(track.id());
    if (it == by_track.end()) {
      out.missing_tracks.push_back(track.id());
      continue;
    }
    out.errors.push_back(evaluate_track(track, *it->second, grid));
  }
  return out;
}

void Accumulator::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
  max_ = n_ == 1 ? x : std::max(max_, x);
}

void Accumulator::merge(const Accumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double total = na + nb;
  const double delta = other.mean_ - mean_;
  mean_ = (na * mean_ + nb * other.mean_) / total;
  m2_ += other.m2_ + delta * delta * (na * nb / total);
  n_ += other.n_;
  max_ = std::max(max_, other.max_);
}

double Accumulator::stddev() const {
  if (n_ == 0) return 0.0;
  return std::sqrt(std::max(0.0, m2_ / static_cast<double>(n_)));
}

void CellStore::merge(const CellStore& other) {
  for (const auto& [key, acc] : other.cells_) cells_[key].merge(acc);
  for (const auto& [key, n] : other.exclusions_) exclusions_[key] += n;
}

std::vector<MetricCell> CellStore::to_cells() const {
  std::vector<MetricCell> out;
  out.reserve(cells_.size());
  for (const auto& [key, acc] : cells_) {
    out.push_back({key, acc.count(), acc.mean(), acc.stddev(), acc.max()});
  }
  return out;
}

void accumulate(CellStore& store, const PerTrackError& error, const TagSet& tags,
                const std::string& model, const HorizonGrid& grid, AllHorizonFde fde_mode) {
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!error.minfde[j]) store.note_exclusion(model, grid.horizons()[j]);
  }
  if (error.evaluated_horizons.empty()) return;

  double ade_all = 0.0;
  double fde_mean = 0.0;
  for (std::size_t j : error.evaluated_horizons) {
    ade_all += *error.minade[j];
    fde_mean += *error.minfde[j];
  }
  const double n = static_cast<double>(error.evaluated_horizons.size());
  ade_all /= n;
  fde_mean /= n;
  const double fde_all = fde_mode == AllHorizonFde::Final
                             ? *error.minfde[error.evaluated_horizons.back()]
                             : fde_mean;

  std::vector<std::optional<Tag>> groups{std::nullopt};
  for (Tag t : tags.tags()) groups.emplace_back(t);

  CellKey key{model, error.ru_class, std::nullopt, std::nullopt, Metric::MinAde};
  for (const auto& tag : groups) {
    key.tag = tag;
    key.horizon = std::nullopt;
    key.metric = Metric::MinAde;
    store.add(key, ade_all);
    key.metric = Metric::MinFde;
    store.add(key, fde_all);
    for (std::size_t j : error.evaluated_horizons) {
      key.horizon = grid.horizons()[j];
      key.metric = Metric::MinAde;
      store.add(key, *error.minade[j]);
      key.metric = Metric::MinFde;
      store.add(key, *error.minfde[j]);
    }
  }
}

}  // namespace sceval
