#include "oracle.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

namespace {

std::size_t frame_for(double h) { return 10 + static_cast<std::size_t>(std::lround(h * 10.0)); }

double dist(sceval::Point2 a, const sceval::State& s) {
  const double dx = a.x - s.x;
  const double dy = a.y - s.y;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

double naive_min_ade(const sceval::Track& track, const sceval::PredictionSet& preds,
                     const std::vector<double>& horizons, std::size_t j) {
  const auto& states = track.raw_states();
  double best = -1.0;
  for (std::size_t k = 0; k < preds.trajectories().size(); ++k) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t t = 0; t < horizons.size(); ++t) {
      if (horizons[t] > horizons[j]) continue;
      const auto& s = states[frame_for(horizons[t])];
      if (!s.valid) continue;
      sum += dist(preds.trajectories()[k][t], s);
      ++n;
    }
    if (n == 0) return -1.0;
    const double ade = sum / n;
    if (best < 0.0 || ade < best) best = ade;
  }
  return best;
}

double naive_min_fde(const sceval::Track& track, const sceval::PredictionSet& preds,
                     const std::vector<double>& horizons, std::size_t j) {
  const auto& s = track.raw_states()[frame_for(horizons[j])];
  if (!s.valid) return -1.0;
  double best = -1.0;
  for (const auto& traj : preds.trajectories()) {
    const double d = dist(traj[j], s);
    if (best < 0.0 || d < best) best = d;
  }
  return best;
}

double point_line_distance(sceval::Point2 p, sceval::Point2 a, sceval::Point2 b) {
  const double abx = b.x - a.x;
  const double aby = b.y - a.y;
  const double t = ((p.x - a.x) * abx + (p.y - a.y) * aby) / (abx * abx + aby * aby);
  const double fx = a.x + t * abx;
  const double fy = a.y + t * aby;
  return std::sqrt((p.x - fx) * (p.x - fx) + (p.y - fy) * (p.y - fy));
}

sceval::Track random_track(std::mt19937_64& rng, const std::string& id) {
  std::uniform_real_distribution<double> pos(-100.0, 100.0);
  std::uniform_real_distribution<double> vel(-15.0, 15.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double p_valid = unit(rng);
  std::vector<sceval::State> states(sceval::kFrameCount);
  bool any = false;
  for (std::size_t f = 0; f < states.size(); ++f) {
    auto& s = states[f];
    s.valid = f == sceval::kCurrentIndex ? unit(rng) < 0.75 : unit(rng) < p_valid;
    s.x = pos(rng);
    s.y = pos(rng);
    s.vx = vel(rng);
    s.vy = vel(rng);
    s.heading = std::atan2(s.vy, s.vx);
    any = any || s.valid;
  }
  if (!any) states[sceval::kCurrentIndex].valid = true;
  return sceval::Track(id, sceval::RUClass::Vehicle, std::move(states), unit(rng) < 0.5);
}

sceval::PredictionSet random_prediction(const sceval::Track& track, std::size_t k,
                                        std::size_t horizon_count, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 3.0);
  std::uniform_real_distribution<double> conf(0.0, 1.0);
  std::vector<std::vector<sceval::Point2>> trajs(k);
  std::vector<double> confs(k);
  const auto& anchor = track.raw_states()[sceval::kCurrentIndex];
  for (std::size_t m = 0; m < k; ++m) {
    for (std::size_t t = 0; t < horizon_count; ++t) {
      trajs[m].push_back({anchor.x + noise(rng), anchor.y + noise(rng)});
    }
    confs[m] = conf(rng);
  }
  return sceval::PredictionSet(track.id(), std::move(trajs), std::move(confs));
}

Stats naive_stats(const std::vector<double>& xs) {
  Stats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(xs.size()));
  s.max = *std::max_element(xs.begin(), xs.end());
  return s;
}

}  // namespace oracle
