#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sceval/core.hpp"
#include "sceval/metrics.hpp"
#include "sceval/tagging.hpp"

namespace sceval::io {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Scene files: one JSON object per line.
//
//   {"scene_id": "...", "timestamps": [91 numbers], "current_index": 10,
//    "tracks": [{"id": "...", "class": "vehicle|pedestrian|cyclist",
//                "is_ttp": bool,
//                "states": [91 x {"x","y","vx","vy","heading","valid"}]}]}
//
// Invalid states may omit every field except "valid". When no valid state of
// a track carries "vx"/"vy", velocities are synthesized from positions.
// Unknown keys are ignored.
// ---------------------------------------------------------------------------

/// Parses one scene record. Throws InputError with the field path on failure.
Scene parse_scene(std::string_view line);

void write_scene(std::ostream& out, const Scene& scene);

enum class ParseMode { Strict, Lenient };

/// Streams scenes from a line-delimited source; holds at most one scene.
class SceneReader {
 public:
  SceneReader(std::istream& in, ParseMode mode = ParseMode::Strict, std::string source = "<input>");

  /// Next scene, or nullopt at end of input. In strict mode a malformed
  /// record throws InputError naming the line; in lenient mode it is skipped
  /// and recorded in diagnostics().
  std::optional<Scene> next();

  std::size_t line_number() const { return line_no_; }
  std::size_t skipped() const { return diagnostics_.size(); }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

 private:
  std::istream& in_;
  ParseMode mode_;
  std::string source_;
  std::string line_;
  std::size_t line_no_ = 0;
  std::vector<std::string> diagnostics_;
};

/// Reads every scene of a stream (strict mode).
std::vector<Scene> read_scenes(std::istream& in);

// ---------------------------------------------------------------------------
// Prediction files: a header line declaring the horizon grid, then one record
// per (scene, track, model).
//
//   {"format": "sceval-predictions", "version": 1, "grid": [h0, h1, ...]}
//   {"scene_id", "track_id", "model", "trajectories": [K][|grid|][2],
//    "confidences": [K]}
// ---------------------------------------------------------------------------

struct PredictionRecord {
  std::string scene_id;
  std::string model;
  PredictionSet prediction;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct PredictionFile {
  HorizonGrid grid;
  std::vector<PredictionRecord> records;
};

PredictionFile read_predictions(std::istream& in, std::string_view source = "<input>");

class PredictionWriter {
 public:
  PredictionWriter(std::ostream& out, const HorizonGrid& grid);
  /// Throws InputError if the trajectory length differs from the grid.
  void write(const PredictionRecord& record);

 private:
  std::ostream& out_;
  std::size_t grid_size_;
};

// ---------------------------------------------------------------------------
// Tag files: one JSON object per track.
//   {"scene_id", "track_id", "class", "tags": ["T1", "T8", "T11"]}
// ---------------------------------------------------------------------------

struct TagRecord {
  std::string scene_id;
  std::string track_id;
  RUClass ru_class = RUClass::Vehicle;
  TagSet tags;

  friend bool operator==(const TagRecord&, const TagRecord&) = default;
};

void write_tag_record(std::ostream& out, const TagRecord& record);
std::vector<TagRecord> read_tags(std::istream& in, std::string_view source = "<input>");

/// TagParams from "key = value" lines; '#' starts a comment. Unknown keys
/// and malformed values throw InputError. The result is validated.
TagParams parse_tag_params(std::istream& in, std::string_view source = "<params>");

// ---------------------------------------------------------------------------
// Metric reports (machine view): comma-separated with header
//   model,ru_class,tag,horizon,metric,count,mean,std,max
// tag and horizon are "ALL" for aggregate rows; numbers at full precision.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kReportHeader = "model,ru_class,tag,horizon,metric,count,mean,std,max";

/// Model names end up in CSV cells and table columns.
bool is_valid_model_name(std::string_view name);

void write_machine_report(std::ostream& out, const std::vector<MetricCell>& cells);
std::vector<MetricCell> read_machine_report(std::istream& in, std::string_view source = "<input>");

}  // namespace sceval::io
