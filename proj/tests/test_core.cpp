#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sceval/core.hpp"

using namespace sceval;

namespace {

std::vector<State> all_valid(double vx = 0.0, double vy = 0.0) {
  std::vector<State> s(kFrameCount);
  for (std::size_t f = 0; f < kFrameCount; ++f) {
    s[f] = {vx * 0.1 * f, vy * 0.1 * f, vx, vy, 0.0, true};
  }
  return s;
}

}  // namespace

TEST_CASE("default horizon grid") {
  const HorizonGrid g = default_horizon_grid();
  REQUIRE(g.size() == 16);
  CHECK(g.horizons()[0] == doctest::Approx(0.1));
  CHECK(g.horizons()[15] == doctest::Approx(7.6));
  CHECK(g.frame_offsets()[0] == 1);
  CHECK(g.frame_offsets()[2] == 11);
  CHECK(g.frame_offsets()[15] == 76);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(g.frame_offsets()[i] == 1 + 5 * i);
  }
}

TEST_CASE("horizon offsets round-trip through scene timestamps") {
  const HorizonGrid g = default_horizon_grid();
  for (double start : {0.0, 3.7, 1234.5}) {
    const auto ts = default_timestamps(start);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(ts[g.frame_of(i)] - ts[kCurrentIndex] - g.horizons()[i]) < 1e-6);
    }
  }
}

TEST_CASE("horizon grid rejects bad grids") {
  CHECK_THROWS_AS(HorizonGrid({}), InputError);
  CHECK_THROWS_AS(HorizonGrid({0.5, 0.5}), InputError);
  CHECK_THROWS_AS(HorizonGrid({0.15}), InputError);
  CHECK_THROWS_AS(HorizonGrid({0.0}), InputError);
  CHECK_THROWS_AS(HorizonGrid({8.1}), InputError);
  CHECK(HorizonGrid({0.1, 8.0}).frame_offsets()[1] == 80);
  CHECK(default_horizon_grid().index_of(3.1) == std::optional<std::size_t>(6));
  CHECK_FALSE(default_horizon_grid().index_of(3.0));
}

TEST_CASE("speed") {
  CHECK(speed({0, 0, 0, 0, 0, true}) == 0.0);
  CHECK(speed({0, 0, 3, 4, 0, true}) == 5.0);
  CHECK(speed({0, 0, 0.01, 0, 0, true}) == 0.01);
  CHECK_THROWS_AS(speed({0, 0, 3, 4, 0, false}), std::logic_error);
}

TEST_CASE("speed is rotation invariant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-20, 20);
  std::uniform_real_distribution<double> a(-10, 10);
  for (int i = 0; i < 1000; ++i) {
    const State s{0, 0, u(rng), u(rng), 0, true};
    const RigidTransform2 tf{a(rng), u(rng), u(rng)};
    CHECK(std::abs(speed(tf.apply(s)) - speed(s)) < 1e-9);
  }
}

TEST_CASE("normalize_angle wraps into (-pi, pi]") {
  constexpr double pi = std::numbers::pi;
  CHECK(normalize_angle(pi) == doctest::Approx(pi));
  CHECK(normalize_angle(-pi) == doctest::Approx(pi));
  CHECK(normalize_angle(3 * pi / 2) == doctest::Approx(-pi / 2));
  CHECK(normalize_angle(0.25) == 0.25);
}

TEST_CASE("track invariants") {
  CHECK_THROWS_AS(Track("a", RUClass::Vehicle, std::vector<State>(90), false), InputError);
  CHECK_THROWS_AS(Track("a", RUClass::Vehicle, std::vector<State>(kFrameCount), false), InputError);

  auto states = all_valid(1.0, 0.0);
  states[3] = {9, 9, 9, 9, 9, false};
  const Track t("a", RUClass::Cyclist, states, true);
  CHECK_FALSE(t.at(3));
  CHECK(t.raw_states()[3] == State{});
  CHECK(t.valid_states().size() == kFrameCount - 1);
  CHECK(t.at(10)->x == doctest::Approx(1.0));

  states[5].x = std::nan("");
  CHECK_THROWS_AS(Track("a", RUClass::Vehicle, states, false), InputError);
}

TEST_CASE("scene invariants") {
  const Track t("a", RUClass::Vehicle, all_valid(), false);
  CHECK_NOTHROW(Scene("s", default_timestamps(), {t}));
  CHECK_THROWS_AS(Scene("s", std::vector<double>(90, 0.0), {t}), InputError);
  auto ts = default_timestamps();
  ts[40] += 0.05;
  CHECK_THROWS_AS(Scene("s", ts, {t}), InputError);
  CHECK_THROWS_AS(Scene("s", default_timestamps(), {t, t}), InputError);
  const Scene s("s", default_timestamps(), {t});
  CHECK(s.find_track("a") != nullptr);
  CHECK(s.find_track("b") == nullptr);
  CHECK(s.current_index() == 10);
}

TEST_CASE("prediction set invariants") {
  CHECK_THROWS_AS(PredictionSet("a", {}, {}), InputError);
  CHECK_THROWS_AS(PredictionSet("a", {{{0, 0}}}, {}), InputError);
  CHECK_THROWS_AS(PredictionSet("a", {{{0, 0}}, {{0, 0}, {1, 1}}}, {0.5, 0.5}), InputError);
  CHECK_THROWS_AS(PredictionSet("a", {{{0, 0}}}, {-1.0}), InputError);
  const PredictionSet p("a", {{{0, 0}, {1, 1}}, {{2, 2}, {3, 3}}}, {0.3, 0.7});
  CHECK(p.mode_count() == 2);
  CHECK(p.horizon_count() == 2);
}

TEST_CASE("rigid transform preserves distances") {
  const RigidTransform2 tf{0.7, 100.0, -50.0};
  const Point2 a{1, 2};
  const Point2 b{-4, 8};
  CHECK(distance(tf.apply(a), tf.apply(b)) == doctest::Approx(distance(a, b)).epsilon(1e-12));
  const State s{1, 2, 3, 4, 0.1, true};
  const State r = tf.apply(s);
  CHECK(r.heading == doctest::Approx(0.8));
  CHECK(speed(r) == doctest::Approx(5.0));
}
