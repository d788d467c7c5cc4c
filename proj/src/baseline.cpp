#include "sceval/baseline.hpp"

namespace sceval {

std::optional<PredictionSet> predict_cv(const Track& track, const HorizonGrid& grid) {
  const auto current = track.at(kCurrentIndex);
  if (!current) return std::nullopt;
  std::vector<Point2> traj;
  traj.reserve(grid.size());
  for (double h : grid.horizons()) {
    traj.push_back({current->x + current->vx * h, current->y + current->vy * h});
  }
  return PredictionSet(track.id(), {std::move(traj)}, {1.0});
}

}  // namespace sceval
