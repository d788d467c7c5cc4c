#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sceval/report.hpp"

using namespace sceval;

namespace {

// Small hand-built store: two models, two classes, two tags, two horizons.
std::vector<MetricCell> fixture() {
  std::vector<MetricCell> cells;
  const std::vector<std::optional<Tag>> tags{std::nullopt, Tag::Straight, Tag::Still};
  const std::vector<std::optional<double>> horizons{std::nullopt, 0.1, 7.6};
  double v = 0.125;
  for (const std::string model : {"CV", "Net"}) {
    for (RUClass c : {RUClass::Vehicle, RUClass::Pedestrian}) {
      for (const auto& tag : tags) {
        for (const auto& h : horizons) {
          if (tag && h) continue;
          for (Metric m : {Metric::MinAde, Metric::MinFde}) {
            v = v * 1.7 + 0.31;
            if (v > 20) v -= 19.5;
            cells.push_back({{model, c, tag, h, m}, 10, v, v / 4, 2 * v});
          }
        }
      }
    }
  }
  return cells;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void check_golden(const std::string& name, const std::string& actual) {
  const std::string path = std::string(SCEVAL_GOLDEN_DIR) + "/" + name;
  if (std::getenv("SCEVAL_UPDATE_GOLDEN")) {
    std::ofstream(path) << actual;
  }
  CHECK(read_file(path) == actual);
}

}  // namespace

TEST_CASE("group keys") {
  CHECK(parse_group_by("tag") == GroupBy::Tag);
  CHECK(parse_group_by("horizon") == GroupBy::Horizon);
  CHECK(parse_group_by("overall") == GroupBy::Overall);
  CHECK_FALSE(parse_group_by("class"));
}

TEST_CASE("select_cells keeps the view's slice") {
  const auto cells = fixture();
  for (const MetricCell& c : select_cells(cells, GroupBy::Tag)) {
    CHECK(c.key.tag);
    CHECK_FALSE(c.key.horizon);
  }
  for (const MetricCell& c : select_cells(cells, GroupBy::Horizon)) {
    CHECK_FALSE(c.key.tag);
    CHECK(c.key.horizon);
  }
  CHECK(select_cells(cells, GroupBy::Overall).size() == 8);
}

TEST_CASE("human views match the golden files") {
  const auto cells = fixture();
  check_golden("horizon.md", render_human(cells, GroupBy::Horizon));
  check_golden("tag.md", render_human(cells, GroupBy::Tag));
  check_golden("overall.md", render_human(cells, GroupBy::Overall));
}

TEST_CASE("markers need two distinct values") {
  std::vector<MetricCell> cells{
      {{"A", RUClass::Vehicle, std::nullopt, std::nullopt, Metric::MinAde}, 1, 1.0, 0, 1.0},
      {{"B", RUClass::Vehicle, std::nullopt, std::nullopt, Metric::MinAde}, 1, 2.0, 0, 2.0},
  };
  const std::string two = render_human(cells, GroupBy::Overall);
  CHECK(two.find("1.000*") != std::string::npos);
  CHECK(two.find("2.000^") != std::string::npos);

  cells[1].mean = 1.0;
  std::string tie = render_human(cells, GroupBy::Overall);
  tie = tie.substr(0, tie.find("\n\n"));  // drop the legend
  CHECK(tie.find('*') == std::string::npos);
  CHECK(tie.find('^') == std::string::npos);

  cells.pop_back();
  const std::string one = render_human(cells, GroupBy::Overall);
  CHECK(one.find("1.000*") == std::string::npos);
}
