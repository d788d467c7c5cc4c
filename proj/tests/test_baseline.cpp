#include <doctest.h>

#include <random>
#include <sstream>

#include "oracle.hpp"
#include "sceval/baseline.hpp"
#include "sceval/io.hpp"
#include "sceval/metrics.hpp"

using namespace sceval;

namespace {

Track moving(double vx, double vy) {
  std::vector<State> s(kFrameCount);
  for (std::size_t f = 0; f < kFrameCount; ++f) {
    const double t = 0.1 * (static_cast<double>(f) - 10.0);
    s[f] = {vx * t, vy * t, vx, vy, 0.0, true};
  }
  return Track("m", RUClass::Vehicle, std::move(s), true);
}

}  // namespace

TEST_CASE("cv extrapolates from the current state") {
  const HorizonGrid g = default_horizon_grid();
  const auto p = predict_cv(moving(2.0, 1.0), g);
  REQUIRE(p);
  CHECK(p->mode_count() == 1);
  CHECK(p->confidences() == std::vector<double>{1.0});
  CHECK(p->trajectories()[0][0].x == doctest::Approx(0.2));
  CHECK(p->trajectories()[0][0].y == doctest::Approx(0.1));
  CHECK(p->trajectories()[0][15].x == doctest::Approx(15.2));
}

TEST_CASE("zero velocity stays put") {
  std::vector<State> s(kFrameCount, State{4.0, -2.0, 0.0, 0.0, 1.0, true});
  const Track t("z", RUClass::Pedestrian, s, false);
  const auto p = predict_cv(t, default_horizon_grid());
  REQUIRE(p);
  for (const Point2& q : p->trajectories()[0]) CHECK(q == Point2{4.0, -2.0});
}

TEST_CASE("cv is exact on constant-velocity ground truth") {
  const HorizonGrid g = default_horizon_grid();
  const Track t = moving(-3.0, 7.5);
  const auto p = predict_cv(t, g);
  for (std::size_t j = 0; j < g.size(); ++j) {
    CHECK(*min_fde(t, *p, g, j) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("no prediction without a current state") {
  std::vector<State> s(kFrameCount, State{0, 0, 1, 0, 0, true});
  s[kCurrentIndex].valid = false;
  CHECK_FALSE(predict_cv(Track("x", RUClass::Cyclist, s, false), default_horizon_grid()));
}

TEST_CASE("cv commutes with rigid motion") {
  const HorizonGrid g = default_horizon_grid();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 100; ++i) {
    const Track t = oracle::random_track(rng, "r");
    const RigidTransform2 tf{u(rng) / 30.0, u(rng), u(rng)};
    const auto a = predict_cv(t, g);
    const auto b = predict_cv(tf.apply(t), g);
    REQUIRE(a.has_value() == b.has_value());
    if (!a) continue;
    const PredictionSet ta = tf.apply(*a);
    for (std::size_t j = 0; j < g.size(); ++j) {
      CHECK(distance(ta.trajectories()[0][j], b->trajectories()[0][j]) < 1e-9);
    }
  }
}

TEST_CASE("cv output survives the prediction file") {
  const HorizonGrid g = default_horizon_grid();
  const auto p = predict_cv(moving(0.3, -0.7), g);
  std::stringstream buf;
  io::PredictionWriter w(buf, g);
  w.write({"s0", "CV", *p});
  const io::PredictionFile f = io::read_predictions(buf);
  REQUIRE(f.records.size() == 1);
  CHECK(f.records[0].prediction == *p);
  CHECK(f.records[0].model == "CV");
  CHECK(f.grid.horizons() == g.horizons());
}
