#include "sceval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "sceval/io.hpp"

namespace sceval {

std::optional<GroupBy> parse_group_by(std::string_view text) {
  if (text == "tag") return GroupBy::Tag;
  if (text == "horizon") return GroupBy::Horizon;
  if (text == "overall") return GroupBy::Overall;
  return std::nullopt;
}

std::vector<MetricCell> select_cells(const std::vector<MetricCell>& cells, GroupBy group) {
  std::vector<MetricCell> out;
  for (const MetricCell& c : cells) {
    const bool keep = group == GroupBy::Tag       ? (c.key.tag && !c.key.horizon)
                      : group == GroupBy::Horizon ? (!c.key.tag && c.key.horizon)
                                                  : (!c.key.tag && !c.key.horizon);
    if (keep) out.push_back(c);
  }
  std::sort(out.begin(), out.end(),
            [](const MetricCell& a, const MetricCell& b) { return a.key < b.key; });
  return out;
}

namespace {

struct Row {
  std::vector<std::string> labels;
  std::string peer;  // rows with the same peer are compared column-wise
  std::vector<std::optional<double>> values;
};

struct Table {
  std::vector<std::string> label_headers;
  std::vector<std::string> value_headers;
  std::vector<Row> rows;
};

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string render(const Table& t) {
  const std::size_t ncols = t.value_headers.size();
  // Per-peer, per-column extremes.
  std::map<std::string, std::vector<std::pair<double, double>>> extremes;
  std::map<std::string, std::vector<std::size_t>> present;
  for (const Row& r : t.rows) {
    auto& ex = extremes[r.peer];
    auto& n = present[r.peer];
    if (ex.empty()) {
      ex.assign(ncols, {0.0, 0.0});
      n.assign(ncols, 0);
    }
    for (std::size_t c = 0; c < ncols; ++c) {
      if (!r.values[c]) continue;
      const double v = *r.values[c];
      if (n[c] == 0) {
        ex[c] = {v, v};
      } else {
        ex[c].first = std::min(ex[c].first, v);
        ex[c].second = std::max(ex[c].second, v);
      }
      ++n[c];
    }
  }

  std::ostringstream out;
  out << '|';
  for (const auto& h : t.label_headers) out << ' ' << h << " |";
  for (const auto& h : t.value_headers) out << ' ' << h << " |";
  out << "\n|";
  for (std::size_t i = 0; i < t.label_headers.size(); ++i) out << " --- |";
  for (std::size_t i = 0; i < ncols; ++i) out << " ---: |";
  out << '\n';
  for (const Row& r : t.rows) {
    out << '|';
    for (const auto& l : r.labels) out << ' ' << l << " |";
    const auto& ex = extremes[r.peer];
    const auto& n = present[r.peer];
    for (std::size_t c = 0; c < ncols; ++c) {
      if (!r.values[c]) {
        out << " - |";
        continue;
      }
      const double v = *r.values[c];
      std::string text = fixed3(v);
      if (n[c] >= 2 && ex[c].first < ex[c].second) {
        if (v == ex[c].first) text += '*';
        if (v == ex[c].second) text += '^';
      }
      out << ' ' << text << " |";
    }
    out << '\n';
  }
  out << "\n`*` lowest and `^` highest error in the column across models.\n";
  return out.str();
}

using CellMap = std::map<CellKey, const MetricCell*>;

const MetricCell* lookup(const CellMap& m, const CellKey& k) {
  const auto it = m.find(k);
  return it == m.end() ? nullptr : it->second;
}

std::vector<std::string> models_of(const std::vector<MetricCell>& cells) {
  std::vector<std::string> out;
  for (const MetricCell& c : cells) {
    if (std::find(out.begin(), out.end(), c.key.model) == out.end()) out.push_back(c.key.model);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RUClass> classes_of(const std::vector<MetricCell>& cells) {
  std::set<RUClass> s;
  for (const MetricCell& c : cells) s.insert(c.key.ru_class);
  return {s.begin(), s.end()};
}

Table per_model_rows(const std::vector<MetricCell>& cells, GroupBy group) {
  CellMap map;
  std::set<double> horizon_set;
  for (const MetricCell& c : cells) {
    map[c.key] = &c;
    if (c.key.horizon) horizon_set.insert(*c.key.horizon);
  }
  const std::vector<double> horizons(horizon_set.begin(), horizon_set.end());

  Table t;
  t.label_headers = {"Model", "RU", "Metric [m]"};
  if (group == GroupBy::Horizon) {
    for (double h : horizons) {
      for (const char* stat : {"mean", "std", "max"}) {
        t.value_headers.push_back(io::format_double(h) + " s " + stat);
      }
    }
  } else {
    for (Tag tag : kAllTags) {
      t.value_headers.push_back(std::string(tag_code(tag)) + " " + std::string(tag_name(tag)));
    }
  }

  for (const std::string& model : models_of(cells)) {
    for (RUClass cls : classes_of(cells)) {
      for (Metric metric : {Metric::MinAde, Metric::MinFde}) {
        Row r;
        r.labels = {model, std::string(short_label(cls)), std::string(to_string(metric))};
        r.peer = std::string(to_string(cls)) + "/" + std::string(to_string(metric));
        if (group == GroupBy::Horizon) {
          for (double h : horizons) {
            const MetricCell* c = lookup(map, {model, cls, std::nullopt, h, metric});
            r.values.push_back(c ? std::optional(c->mean) : std::nullopt);
            r.values.push_back(c ? std::optional(c->std) : std::nullopt);
            r.values.push_back(c ? std::optional(c->max) : std::nullopt);
          }
        } else {
          for (Tag tag : kAllTags) {
            const MetricCell* c = lookup(map, {model, cls, tag, std::nullopt, metric});
            r.values.push_back(c ? std::optional(c->mean) : std::nullopt);
          }
        }
        t.rows.push_back(std::move(r));
      }
    }
  }
  return t;
}

Table overall_rows(const std::vector<MetricCell>& cells) {
  CellMap map;
  for (const MetricCell& c : cells) map[c.key] = &c;
  Table t;
  t.label_headers = {"Model"};
  for (Metric metric : {Metric::MinAde, Metric::MinFde}) {
    for (RUClass cls : kAllClasses) {
      t.value_headers.push_back(std::string(to_string(metric)) + " " + std::string(short_label(cls)));
    }
  }
  for (const std::string& model : models_of(cells)) {
    Row r;
    r.labels = {model};
    for (Metric metric : {Metric::MinAde, Metric::MinFde}) {
      for (RUClass cls : kAllClasses) {
        const MetricCell* c = lookup(map, {model, cls, std::nullopt, std::nullopt, metric});
        r.values.push_back(c ? std::optional(c->mean) : std::nullopt);
      }
    }
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace

std::string render_human(const std::vector<MetricCell>& cells, GroupBy group) {
  const std::vector<MetricCell> selected = select_cells(cells, group);
  const Table t = group == GroupBy::Overall ? overall_rows(selected) : per_model_rows(selected, group);
  return render(t);
}

}  // namespace sceval
