#include "sceval/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace sceval::io {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw InputError(path + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "not finite");
  return d;
}

std::string string_of(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

const json& array(const json& v, const std::string& path, std::optional<std::size_t> size = {}) {
  if (!v.is_array()) fail(path, "expected an array");
  if (size && v.size() != *size) {
    fail(path, "expected " + std::to_string(*size) + " entries, got " + std::to_string(v.size()));
  }
  return v;
}

json parse_json(std::string_view text, const std::string& path) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(path, std::string("malformed JSON: ") + e.what());
  }
}

// Backward difference from the previous valid frame; forward difference at
// the first valid frame; zero for a single valid frame.
void synthesize_velocities(std::vector<State>& states) {
  std::vector<std::size_t> valid;
  for (std::size_t f = 0; f < states.size(); ++f) {
    if (states[f].valid) valid.push_back(f);
  }
  for (std::size_t i = 0; i < valid.size(); ++i) {
    State& s = states[valid[i]];
    if (valid.size() == 1) {
      s.vx = s.vy = 0.0;
      continue;
    }
    const std::size_t a = i == 0 ? valid[0] : valid[i - 1];
    const std::size_t b = i == 0 ? valid[1] : valid[i];
    const double dt = static_cast<double>(b - a) * kFramePeriod;
    s.vx = (states[b].x - states[a].x) / dt;
    s.vy = (states[b].y - states[a].y) / dt;
  }
}

Track parse_track(const json& j, const std::string& path) {
  std::string id = string_of(field(j, "id", path), path + ".id");
  const std::string cls = string_of(field(j, "class", path), path + ".class");
  const auto ru = parse_ru_class(cls);
  if (!ru) fail(path + ".class", "unknown class '" + cls + "'");
  const bool is_ttp = boolean(field(j, "is_ttp", path), path + ".is_ttp");

  const std::string spath = path + ".states";
  const json& js = array(field(j, "states", path), spath, kFrameCount);
  std::vector<State> states(kFrameCount);
  std::size_t with_velocity = 0;
  std::size_t n_valid = 0;
  for (std::size_t f = 0; f < kFrameCount; ++f) {
    const std::string p = spath + "[" + std::to_string(f) + "]";
    const json& o = js[f];
    State& s = states[f];
    s.valid = boolean(field(o, "valid", p), p + ".valid");
    if (!s.valid) continue;
    ++n_valid;
    s.x = number(field(o, "x", p), p + ".x");
    s.y = number(field(o, "y", p), p + ".y");
    s.heading = o.contains("heading") ? normalize_angle(number(o["heading"], p + ".heading")) : 0.0;
    const bool has_vx = o.contains("vx");
    const bool has_vy = o.contains("vy");
    if (has_vx != has_vy) fail(p, "vx and vy must be given together");
    if (has_vx) {
      s.vx = number(o["vx"], p + ".vx");
      s.vy = number(o["vy"], p + ".vy");
      ++with_velocity;
    }
  }
  if (n_valid == 0) fail(spath, "no valid state");
  if (with_velocity == 0) {
    synthesize_velocities(states);
  } else if (with_velocity != n_valid) {
    fail(spath, "velocities present on some valid states but not others");
  }
  return Track(std::move(id), *ru, std::move(states), is_ttp);
}

std::string scene_label(const json& j) {
  if (j.is_object()) {
    const auto it = j.find("scene_id");
    if (it != j.end() && it->is_string()) return "scene '" + it->get<std::string>() + "'";
  }
  return "scene";
}

}  // namespace

Scene parse_scene(std::string_view line) {
  const json j = parse_json(line, "scene");
  const std::string root = scene_label(j);
  if (!j.is_object()) fail(root, "expected an object");
  std::string scene_id = string_of(field(j, "scene_id", root), root + ".scene_id");

  const json& jt = array(field(j, "timestamps", root), root + ".timestamps", kFrameCount);
  std::vector<double> timestamps;
  timestamps.reserve(kFrameCount);
  for (std::size_t i = 0; i < jt.size(); ++i) {
    timestamps.push_back(number(jt[i], root + ".timestamps[" + std::to_string(i) + "]"));
  }

  const json& ci = field(j, "current_index", root);
  if (!ci.is_number_integer() || ci.get<long long>() != static_cast<long long>(kCurrentIndex)) {
    fail(root + ".current_index", "must be " + std::to_string(kCurrentIndex));
  }

  const json& jtracks = array(field(j, "tracks", root), root + ".tracks");
  std::vector<Track> tracks;
  tracks.reserve(jtracks.size());
  for (std::size_t i = 0; i < jtracks.size(); ++i) {
    const std::string p = root + ".tracks[" + std::to_string(i) + "]";
    try {
      tracks.push_back(parse_track(jtracks[i], p));
    } catch (const InputError& e) {
      const std::string msg = e.what();
      if (msg.rfind(p, 0) == 0) throw;
      fail(p, msg);
    }
  }
  try {
    return Scene(std::move(scene_id), std::move(timestamps), std::move(tracks));
  } catch (const InputError& e) {
    fail(root, e.what());
  }
}

void write_scene(std::ostream& out, const Scene& scene) {
  ordered_json j;
  j["scene_id"] = scene.scene_id();
  j["timestamps"] = scene.timestamps();
  j["current_index"] = scene.current_index();
  ordered_json tracks = ordered_json::array();
  for (const Track& t : scene.tracks()) {
    ordered_json jt;
    jt["id"] = t.id();
    jt["class"] = std::string(to_string(t.ru_class()));
    jt["is_ttp"] = t.is_ttp();
    ordered_json states = ordered_json::array();
    for (const State& s : t.raw_states()) {
      ordered_json js;
      if (s.valid) {
        js["x"] = s.x;
        js["y"] = s.y;
        js["vx"] = s.vx;
        js["vy"] = s.vy;
        js["heading"] = s.heading;
      }
      js["valid"] = s.valid;
      states.push_back(std::move(js));
    }
    jt["states"] = std::move(states);
    tracks.push_back(std::move(jt));
  }
  j["tracks"] = std::move(tracks);
  out << j.dump() << '\n';
}

SceneReader::SceneReader(std::istream& in, ParseMode mode, std::string source)
    : in_(in), mode_(mode), source_(std::move(source)) {}

std::optional<Scene> SceneReader::next() {
  while (std::getline(in_, line_)) {
    ++line_no_;
    if (line_.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      return parse_scene(line_);
    } catch (const InputError& e) {
      std::string msg = source_ + ":" + std::to_string(line_no_) + ": " + e.what();
      if (mode_ == ParseMode::Strict) throw InputError(msg);
      diagnostics_.push_back(std::move(msg));
    }
  }
  return std::nullopt;
}

std::vector<Scene> read_scenes(std::istream& in) {
  SceneReader reader(in);
  std::vector<Scene> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

// ---------------------------------------------------------------------------

PredictionFile read_predictions(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return std::string(source) + ":" + std::to_string(line_no); };

  std::optional<HorizonGrid> grid;
  std::vector<PredictionRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = parse_json(line, "record");
      if (!grid) {
        const std::string fmt = string_of(field(j, "format", "header"), "header.format");
        if (fmt != "sceval-predictions") fail("header.format", "unexpected format '" + fmt + "'");
        const json& jg = array(field(j, "grid", "header"), "header.grid");
        std::vector<double> hs;
        for (std::size_t i = 0; i < jg.size(); ++i) {
          hs.push_back(number(jg[i], "header.grid[" + std::to_string(i) + "]"));
        }
        grid.emplace(std::move(hs));
        continue;
      }
      std::string scene_id = string_of(field(j, "scene_id", "record"), "record.scene_id");
      std::string model = string_of(field(j, "model", "record"), "record.model");
      if (!is_valid_model_name(model)) fail("record.model", "invalid model name '" + model + "'");
      std::string track_id = string_of(field(j, "track_id", "record"), "record.track_id");
      const json& jtraj = array(field(j, "trajectories", "record"), "record.trajectories");
      std::vector<std::vector<Point2>> trajectories;
      for (std::size_t k = 0; k < jtraj.size(); ++k) {
        const std::string pk = "record.trajectories[" + std::to_string(k) + "]";
        const json& pts = array(jtraj[k], pk, grid->size());
        std::vector<Point2> traj;
        traj.reserve(pts.size());
        for (std::size_t t = 0; t < pts.size(); ++t) {
          const std::string pt = pk + "[" + std::to_string(t) + "]";
          const json& xy = array(pts[t], pt, 2);
          traj.push_back({number(xy[0], pt + "[0]"), number(xy[1], pt + "[1]")});
        }
        trajectories.push_back(std::move(traj));
      }
      const json& jc = array(field(j, "confidences", "record"), "record.confidences");
      std::vector<double> confidences;
      for (std::size_t k = 0; k < jc.size(); ++k) {
        confidences.push_back(number(jc[k], "record.confidences[" + std::to_string(k) + "]"));
      }
      records.push_back({std::move(scene_id), std::move(model),
                         PredictionSet(std::move(track_id), std::move(trajectories),
                                       std::move(confidences))});
    } catch (const InputError& e) {
      throw InputError(where() + ": " + e.what());
    }
  }
  if (!grid) throw InputError(std::string(source) + ": missing prediction file header");
  return {std::move(*grid), std::move(records)};
}

PredictionWriter::PredictionWriter(std::ostream& out, const HorizonGrid& grid)
    : out_(out), grid_size_(grid.size()) {
  ordered_json h;
  h["format"] = "sceval-predictions";
  h["version"] = 1;
  h["grid"] = grid.horizons();
  out_ << h.dump() << '\n';
}

void PredictionWriter::write(const PredictionRecord& record) {
  if (record.prediction.horizon_count() != grid_size_) {
    throw InputError("prediction for track '" + record.prediction.track_id() +
                     "' does not match the grid length");
  }
  if (!is_valid_model_name(record.model)) throw InputError("invalid model name '" + record.model + "'");
  ordered_json j;
  j["scene_id"] = record.scene_id;
  j["track_id"] = record.prediction.track_id();
  j["model"] = record.model;
  ordered_json trajs = ordered_json::array();
  for (const auto& traj : record.prediction.trajectories()) {
    ordered_json pts = ordered_json::array();
    for (const Point2& p : traj) pts.push_back({p.x, p.y});
    trajs.push_back(std::move(pts));
  }
  j["trajectories"] = std::move(trajs);
  j["confidences"] = record.prediction.confidences();
  out_ << j.dump() << '\n';
}

// ---------------------------------------------------------------------------

void write_tag_record(std::ostream& out, const TagRecord& record) {
  ordered_json j;
  j["scene_id"] = record.scene_id;
  j["track_id"] = record.track_id;
  j["class"] = std::string(to_string(record.ru_class));
  ordered_json tags = ordered_json::array();
  for (Tag t : record.tags.tags()) tags.push_back(std::string(tag_code(t)));
  j["tags"] = std::move(tags);
  out << j.dump() << '\n';
}

std::vector<TagRecord> read_tags(std::istream& in, std::string_view source) {
  std::vector<TagRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = parse_json(line, "tags");
      TagRecord rec;
      rec.scene_id = string_of(field(j, "scene_id", "tags"), "tags.scene_id");
      rec.track_id = string_of(field(j, "track_id", "tags"), "tags.track_id");
      const std::string cls = string_of(field(j, "class", "tags"), "tags.class");
      const auto ru = parse_ru_class(cls);
      if (!ru) fail("tags.class", "unknown class '" + cls + "'");
      rec.ru_class = *ru;
      const json& jt = array(field(j, "tags", "tags"), "tags.tags");
      for (std::size_t i = 0; i < jt.size(); ++i) {
        const std::string p = "tags.tags[" + std::to_string(i) + "]";
        const auto tag = parse_tag(string_of(jt[i], p));
        if (!tag) fail(p, "unknown tag");
        rec.tags.insert(*tag);
      }
      out.push_back(std::move(rec));
    } catch (const InputError& e) {
      throw InputError(std::string(source) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(std::string_view text, const std::string& where) {
  T v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw InputError(where + ": cannot parse '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

TagParams parse_tag_params(std::istream& in, std::string_view source) {
  TagParams p;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw InputError(where + ": expected 'key = value'");
    const std::string_view key = trim(view.substr(0, eq));
    const std::string_view value = trim(view.substr(eq + 1));
    if (key == "still_speed_max") {
      p.still_speed_max = parse_value<double>(value, where);
    } else if (key == "straight_max_deviation") {
      p.straight_max_deviation = parse_value<double>(value, where);
    } else if (key == "min_chord_for_shape") {
      p.min_chord_for_shape = parse_value<double>(value, where);
    } else if (key == "late_max_frames") {
      p.late_max_frames = parse_value<std::size_t>(value, where);
    } else if (key == "very_late_max_frames") {
      p.very_late_max_frames = parse_value<std::size_t>(value, where);
    } else if (key == "stop_dwell_frames") {
      p.stop_dwell_frames = parse_value<std::size_t>(value, where);
    } else {
      throw InputError(where + ": unknown key '" + std::string(key) + "'");
    }
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------

bool is_valid_model_name(std::string_view name) {
  if (name.empty() || name == "ALL") return false;
  for (char c : name) {
    if (c == ',' || c == '"' || c == '|' || c == '\n' || c == '\r') return false;
  }
  return true;
}

void write_machine_report(std::ostream& out, const std::vector<MetricCell>& cells) {
  out << kReportHeader << '\n';
  for (const MetricCell& c : cells) {
    out << c.key.model << ',' << to_string(c.key.ru_class) << ','
        << (c.key.tag ? tag_code(*c.key.tag) : std::string_view("ALL")) << ','
        << (c.key.horizon ? format_double(*c.key.horizon) : std::string("ALL")) << ','
        << to_string(c.key.metric) << ',' << c.count << ',' << format_double(c.mean) << ','
        << format_double(c.std) << ',' << format_double(c.max) << '\n';
  }
}

std::vector<MetricCell> read_machine_report(std::istream& in, std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<MetricCell> out;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (!header) {
      if (line != kReportHeader) throw InputError(where + ": unexpected report header");
      header = true;
      continue;
    }
    std::vector<std::string_view> f;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (f.size() != 9) throw InputError(where + ": expected 9 fields, got " + std::to_string(f.size()));
    MetricCell c;
    c.key.model = std::string(f[0]);
    if (!is_valid_model_name(c.key.model)) throw InputError(where + ": invalid model name");
    const auto ru = parse_ru_class(f[1]);
    if (!ru) throw InputError(where + ": unknown class '" + std::string(f[1]) + "'");
    c.key.ru_class = *ru;
    if (f[2] != "ALL") {
      const auto tag = parse_tag(f[2]);
      if (!tag) throw InputError(where + ": unknown tag '" + std::string(f[2]) + "'");
      c.key.tag = *tag;
    }
    if (f[3] != "ALL") c.key.horizon = parse_value<double>(f[3], where);
    const auto metric = parse_metric(f[4]);
    if (!metric) throw InputError(where + ": unknown metric '" + std::string(f[4]) + "'");
    c.key.metric = *metric;
    c.count = parse_value<std::size_t>(f[5], where);
    c.mean = parse_value<double>(f[6], where);
    c.std = parse_value<double>(f[7], where);
    c.max = parse_value<double>(f[8], where);
    out.push_back(std::move(c));
  }
  if (!header) throw InputError(std::string(source) + ": empty report");
  return out;
}

}  // namespace sceval::io
