#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <CLI11.hpp>

#include "sceval/baseline.hpp"
#include "sceval/core.hpp"
#include "sceval/io.hpp"
#include "sceval/metrics.hpp"
#include "sceval/report.hpp"
#include "sceval/synth.hpp"
#include "sceval/tagging.hpp"

namespace sceval::cli {

namespace {

class Input {
 public:
  explicit Input(const std::string& path) : path_(path) {
    if (path == "-") {
      stream_ = &std::cin;
      return;
    }
    file_.open(path);
    if (!file_) throw InputError("cannot open '" + path + "' for reading");
    stream_ = &file_;
  }
  std::istream& get() { return *stream_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream file_;
  std::istream* stream_ = nullptr;
};

class Output {
 public:
  Output(const std::string& path, std::ostream& stdout_stream) : path_(path) {
    if (path == "-") {
      stream_ = &stdout_stream;
      return;
    }
    file_.open(path, std::ios::binary | std::ios::trunc);
    if (!file_) throw InputError("cannot open '" + path + "' for writing");
    stream_ = &file_;
  }
  std::ostream& get() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw std::runtime_error("write to '" + path_ + "' failed");
  }

 private:
  std::string path_;
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

unsigned resolve_jobs(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Applies fn to every index in [0, n) on up to `jobs` threads; results keep
// index order. The first exception (by index) is rethrown.
template <typename R, typename Fn>
std::vector<R> parallel_map(std::size_t n, unsigned jobs, Fn fn) {
  std::vector<std::optional<R>> results(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < n; i += step) {
      try {
        results[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(jobs, n);
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w, workers);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

/// Streams scenes in batches so that memory stays bounded by one batch.
template <typename Fn>
void for_each_batch(io::SceneReader& reader, std::size_t batch_size, Fn fn) {
  std::vector<Scene> batch;
  while (auto scene = reader.next()) {
    batch.push_back(std::move(*scene));
    if (batch.size() == batch_size) {
      fn(batch);
      batch.clear();
    }
  }
  if (!batch.empty()) fn(batch);
}

HorizonGrid parse_grid(const std::string& text) {
  if (text == "default") return default_horizon_grid();
  std::vector<double> hs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      hs.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw InputError("bad --grid entry '" + item + "'");
    }
  }
  return HorizonGrid(std::move(hs));
}

TagSet parse_tag_list(const std::string& text) {
  TagSet out;
  if (text == "any" || text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = parse_tag(item);
    if (!t) throw InputError("unknown tag '" + item + "'");
    out.insert(*t);
  }
  return out;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * fraction);
  return buf;
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  std::string out;
  std::string expected_tags;
  std::size_t scenes = 100;
  std::size_t tracks_per_scene = 20;
  std::uint64_t seed = 0;
  bool constant_velocity = false;
  std::vector<std::string> patterns;
};

int cmd_synth(const SynthOptions& o, std::ostream& out) {
  std::vector<synth::CompositionEntry> composition;
  for (const std::string& entry : o.patterns) {
    const auto colon = entry.rfind(':');
    if (colon == std::string::npos) throw InputError("pattern '" + entry + "' must be TAGS:COUNT");
    synth::CompositionEntry e;
    e.tags = parse_tag_list(entry.substr(0, colon));
    try {
      e.count = std::stoul(entry.substr(colon + 1));
    } catch (const std::logic_error&) {
      throw InputError("pattern '" + entry + "' has a bad count");
    }
    e.constant_velocity = o.constant_velocity;
    composition.push_back(e);
  }
  std::vector<synth::TrackPattern> pool;
  for (const auto& p : synth::all_patterns()) {
    if (p.constant_velocity == o.constant_velocity) pool.push_back(p);
  }

  Output scenes_out(o.out, out);
  const std::string tags_path = o.expected_tags.empty() ? o.out + ".tags" : o.expected_tags;
  Output tags_out(tags_path, out);
  std::size_t n_tracks = 0;
  for (std::size_t i = 0; i < o.scenes; ++i) {
    const std::uint64_t seed = synth::derive_seed(o.seed, i);
    const std::string id = "synth-" + std::to_string(o.seed) + "-" + std::to_string(i);
    const synth::SynthScene s = composition.empty()
                                    ? synth::gen_random_scene(pool, o.tracks_per_scene, seed, id)
                                    : synth::gen_scene(composition, seed, id);
    io::write_scene(scenes_out.get(), s.scene);
    for (std::size_t t = 0; t < s.expected.size(); ++t) {
      const Track& track = s.scene.tracks()[t];
      io::write_tag_record(tags_out.get(), {id, track.id(), track.ru_class(), s.expected[t]});
    }
    n_tracks += s.expected.size();
  }
  scenes_out.finish();
  tags_out.finish();
  if (o.out != "-" && tags_path != "-") {
    out << "wrote " << o.scenes << " scenes, " << n_tracks << " tracks\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct TagOptions {
  std::string scenes;
  std::string out;
  std::string params;
  unsigned jobs = 0;
  bool lenient = false;
};

void print_tag_summary(std::ostream& out, const std::vector<TagSet>& tagsets) {
  const TagFrequencies all = tag_frequencies(tagsets);
  const TagFrequencies ttp = tag_frequencies(tagsets, Tag::Ttp);
  out << "tracks: " << all.population << " (TTP: " << ttp.population << ")\n";
  char line[128];
  std::snprintf(line, sizeof line, "%-4s %-13s %9s %9s\n", "tag", "name", "all", "TTP");
  out << line;
  for (Tag t : kAllTags) {
    std::snprintf(line, sizeof line, "%-4s %-13s %9s %9s\n", std::string(tag_code(t)).c_str(),
                  std::string(tag_name(t)).c_str(), percent(all.fraction.at(t)).c_str(),
                  percent(ttp.fraction.at(t)).c_str());
    out << line;
  }
}

int cmd_tag(const TagOptions& o, std::ostream& out, std::ostream& err) {
  TagParams params;
  if (!o.params.empty()) {
    Input pin(o.params);
    params = io::parse_tag_params(pin.get(), o.params);
  }
  params.validate();
  const unsigned jobs = resolve_jobs(o.jobs);

  Input in(o.scenes);
  io::SceneReader reader(in.get(), o.lenient ? io::ParseMode::Lenient : io::ParseMode::Strict,
                         o.scenes);
  std::ostringstream records;
  std::vector<TagSet> all;
  std::size_t n_scenes = 0;
  for_each_batch(reader, 64 * static_cast<std::size_t>(jobs), [&](const std::vector<Scene>& batch) {
    auto tagged = parallel_map<std::vector<TagSet>>(batch.size(), jobs, [&](std::size_t i) {
      std::vector<TagSet> ts;
      for (const Track& t : batch[i].tracks()) ts.push_back(tag_track(t, params));
      return ts;
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const Scene& scene = batch[i];
      for (std::size_t t = 0; t < scene.tracks().size(); ++t) {
        const Track& track = scene.tracks()[t];
        io::write_tag_record(records, {scene.scene_id(), track.id(), track.ru_class(), tagged[i][t]});
        all.push_back(tagged[i][t]);
      }
    }
    n_scenes += batch.size();
  });
  for (const auto& d : reader.diagnostics()) err << "skipped: " << d << '\n';
  if (n_scenes == 0) throw InputError("no scenes in '" + o.scenes + "'");
  if (all.empty()) throw InputError("no tracks in '" + o.scenes + "'");

  Output tags_out(o.out, out);
  tags_out.get() << records.str();
  tags_out.finish();
  print_tag_summary(o.out == "-" ? err : out, all);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct PredictOptions {
  std::string scenes;
  std::string out;
  std::string model = "CV";
  std::string grid = "default";
};

int cmd_predict_cv(const PredictOptions& o, std::ostream& out, std::ostream& err) {
  if (!io::is_valid_model_name(o.model)) throw InputError("invalid model name '" + o.model + "'");
  const HorizonGrid grid = parse_grid(o.grid);
  Input in(o.scenes);
  io::SceneReader reader(in.get(), io::ParseMode::Strict, o.scenes);
  Output pout(o.out, out);
  io::PredictionWriter writer(pout.get(), grid);
  std::size_t predicted = 0;
  std::size_t skipped = 0;
  while (auto scene = reader.next()) {
    for (const Track& t : scene->tracks()) {
      if (auto p = predict_cv(t, grid)) {
        writer.write({scene->scene_id(), o.model, std::move(*p)});
        ++predicted;
      } else {
        ++skipped;
      }
    }
  }
  pout.finish();
  err << "predict-cv: " << predicted << " tracks predicted, " << skipped
      << " not predictable (no state at the current frame)\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvaluateOptions {
  std::string scenes;
  std::vector<std::string> predictions;
  std::string tags;
  std::string out;
  std::string grid = "default";
  bool ttp_only = false;
  unsigned jobs = 0;
  std::string all_horizon_fde = "final";
};

struct ModelPredictions {
  std::string model;
  std::vector<PredictionSet> sets;
};

struct SceneResult {
  CellStore cells;
  std::map<std::string, std::size_t> evaluated;  // per model
  std::map<std::string, std::size_t> missing;    // per model
};

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  const HorizonGrid grid = parse_grid(o.grid);
  AllHorizonFde fde_mode;
  if (o.all_horizon_fde == "final") {
    fde_mode = AllHorizonFde::Final;
  } else if (o.all_horizon_fde == "mean") {
    fde_mode = AllHorizonFde::Mean;
  } else {
    throw InputError("--all-horizon-fde must be 'final' or 'mean'");
  }
  const unsigned jobs = resolve_jobs(o.jobs);

  // scene id -> per-model predictions
  std::unordered_map<std::string, std::vector<ModelPredictions>> predictions;
  std::set<std::string> models;
  for (const std::string& path : o.predictions) {
    Input in(path);
    io::PredictionFile file = io::read_predictions(in.get(), path);
    if (!(file.grid == grid)) throw InputError(path + ": horizon grid differs from the evaluation grid");
    for (io::PredictionRecord& rec : file.records) {
      models.insert(rec.model);
      auto& per_model = predictions[rec.scene_id];
      auto it = std::find_if(per_model.begin(), per_model.end(),
                             [&](const ModelPredictions& m) { return m.model == rec.model; });
      if (it == per_model.end()) {
        per_model.push_back({rec.model, {}});
        it = std::prev(per_model.end());
      }
      it->sets.push_back(std::move(rec.prediction));
    }
  }

  std::unordered_map<std::string, TagSet> tags;
  {
    Input in(o.tags);
    for (io::TagRecord& r : io::read_tags(in.get(), o.tags)) {
      tags[r.scene_id + '\n' + r.track_id] = r.tags;
    }
  }

  Input in(o.scenes);
  io::SceneReader reader(in.get(), io::ParseMode::Strict, o.scenes);
  CellStore store;
  std::map<std::string, std::size_t> evaluated;
  std::map<std::string, std::size_t> missing;
  std::set<std::string> seen_scenes;
  std::size_t eligible_tracks = 0;

  for_each_batch(reader, 64 * static_cast<std::size_t>(jobs), [&](const std::vector<Scene>& batch) {
    auto results = parallel_map<SceneResult>(batch.size(), jobs, [&](std::size_t i) {
      const Scene& scene = batch[i];
      SceneResult r;
      const auto pit = predictions.find(scene.scene_id());
      for (const std::string& model : models) {
        const PredictionSet* begin = nullptr;
        std::size_t count = 0;
        if (pit != predictions.end()) {
          for (const ModelPredictions& m : pit->second) {
            if (m.model == model) {
              begin = m.sets.data();
              count = m.sets.size();
            }
          }
        }
        const SceneEvaluation ev =
            evaluate_scene(scene, std::span<const PredictionSet>(begin, count), grid);
        for (const std::string& id : ev.missing_tracks) {
          if (!o.ttp_only || scene.find_track(id)->is_ttp()) ++r.missing[model];
        }
        for (const PerTrackError& e : ev.errors) {
          if (o.ttp_only && !scene.find_track(e.track_id)->is_ttp()) continue;
          const auto tit = tags.find(scene.scene_id() + '\n' + e.track_id);
          if (tit == tags.end()) {
            throw InputError("no tags for track '" + e.track_id + "' of scene '" + scene.scene_id() +
                             "'");
          }
          accumulate(r.cells, e, tit->second, model, grid, fde_mode);
          ++r.evaluated[model];
        }
      }
      return r;
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (!seen_scenes.insert(batch[i].scene_id()).second) {
        throw InputError("duplicate scene id '" + batch[i].scene_id() + "'");
      }
      for (const Track& t : batch[i].tracks()) eligible_tracks += !o.ttp_only || t.is_ttp();
      store.merge(results[i].cells);
      for (const auto& [m, n] : results[i].evaluated) evaluated[m] += n;
      for (const auto& [m, n] : results[i].missing) missing[m] += n;
    }
  });

  std::vector<std::string> orphans;
  for (const auto& [scene_id, _] : predictions) {
    if (!seen_scenes.count(scene_id)) orphans.push_back(scene_id);
  }
  if (!orphans.empty()) {
    std::sort(orphans.begin(), orphans.end());
    std::string msg = "predictions reference unknown scenes:";
    for (const auto& s : orphans) msg += " " + s;
    throw InputError(msg);
  }

  Output rout(o.out, out);
  io::write_machine_report(rout.get(), store.to_cells());
  rout.finish();

  for (const std::string& model : models) {
    err << "evaluate: model " << model << ": " << evaluated[model] << " tracks evaluated, "
        << missing[model] << " without prediction\n";
  }
  for (const auto& [key, n] : store.exclusions()) {
    err << "evaluate: model " << key.first << ": " << n << " tracks excluded at "
        << io::format_double(key.second) << " s (invalid ground truth)\n";
  }
  if (o.ttp_only && eligible_tracks == 0) {
    err << "warning: no TTP tracks in '" << o.scenes << "'; the report is empty\n";
  } else if (store.empty()) {
    err << "warning: nothing was evaluated; the report is empty\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct ReportOptions {
  std::string metrics;
  std::string format = "human";
  std::string group_by = "horizon";
  std::string out = "-";
};

int cmd_report(const ReportOptions& o, std::ostream& out) {
  const auto group = parse_group_by(o.group_by);
  if (!group) throw InputError("unknown group key '" + o.group_by + "'");
  if (o.format != "human" && o.format != "machine") {
    throw InputError("unknown format '" + o.format + "'");
  }
  Input in(o.metrics);
  const std::vector<MetricCell> cells = io::read_machine_report(in.get(), o.metrics);
  Output rout(o.out, out);
  if (o.format == "human") {
    rout.get() << render_human(cells, *group);
  } else {
    io::write_machine_report(rout.get(), select_cells(cells, *group));
  }
  rout.finish();
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Scenario-based evaluation of trajectory predictions", "sceval"};
  app.require_subcommand(1);

  SynthOptions synth_opts;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic scenes with known tags");
  synth_cmd->add_option("--out", synth_opts.out, "Scene file to write")->required();
  synth_cmd->add_option("--expected-tags", synth_opts.expected_tags,
                        "Sidecar tag file (default: <out>.tags)");
  synth_cmd->add_option("--scenes", synth_opts.scenes, "Number of scenes")->capture_default_str();
  synth_cmd->add_option("--tracks-per-scene", synth_opts.tracks_per_scene,
                        "Tracks per scene when no --pattern is given")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_opts.seed, "Random seed")->capture_default_str();
  synth_cmd->add_flag("--constant-velocity", synth_opts.constant_velocity,
                      "Only constant-velocity motion");
  synth_cmd->add_option("--pattern", synth_opts.patterns,
                        "Per-scene composition entry TAGS:COUNT, e.g. T5:3 or T1,T6:2");

  TagOptions tag_opts;
  auto* tag_cmd = app.add_subcommand("tag", "Tag every track of a scene file");
  tag_cmd->add_option("--scenes", tag_opts.scenes, "Scene file")->required();
  tag_cmd->add_option("--out", tag_opts.out, "Tag file to write")->required();
  tag_cmd->add_option("--params", tag_opts.params, "Tagging parameters (key = value)");
  tag_cmd->add_option("--jobs", tag_opts.jobs, "Worker threads (0 = hardware)");
  tag_cmd->add_flag("--lenient", tag_opts.lenient, "Skip malformed scene records");

  PredictOptions pred_opts;
  auto* pred_cmd = app.add_subcommand("predict-cv", "Constant-velocity baseline predictions");
  pred_cmd->add_option("--scenes", pred_opts.scenes, "Scene file")->required();
  pred_cmd->add_option("--out", pred_opts.out, "Prediction file to write")->required();
  pred_cmd->add_option("--model", pred_opts.model, "Model name")->capture_default_str();
  pred_cmd->add_option("--grid", pred_opts.grid, "'default' or comma-separated horizons [s]")
      ->capture_default_str();

  EvaluateOptions eval_opts;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score prediction files");
  eval_cmd->add_option("--scenes", eval_opts.scenes, "Scene file")->required();
  eval_cmd->add_option("--predictions", eval_opts.predictions, "Prediction files")
      ->required()
      ->expected(1, -1);
  eval_cmd->add_option("--tags", eval_opts.tags, "Tag file")->required();
  eval_cmd->add_option("--out", eval_opts.out, "Metric report to write")->required();
  eval_cmd->add_option("--grid", eval_opts.grid, "'default' or comma-separated horizons [s]")
      ->capture_default_str();
  eval_cmd->add_flag("--ttp-only", eval_opts.ttp_only, "Only tracks flagged TTP");
  eval_cmd->add_option("--jobs", eval_opts.jobs, "Worker threads (0 = hardware)");
  eval_cmd->add_option("--all-horizon-fde", eval_opts.all_horizon_fde,
                       "Over-all-horizons minFDE: 'final' or 'mean'")
      ->capture_default_str();

  ReportOptions report_opts;
  auto* report_cmd = app.add_subcommand("report", "Render a metric report");
  report_cmd->add_option("--metrics", report_opts.metrics, "Metric report")->required();
  report_cmd->add_option("--format", report_opts.format, "human or machine")->capture_default_str();
  report_cmd->add_option("--group-by", report_opts.group_by, "tag, horizon or overall")
      ->capture_default_str();
  report_cmd->add_option("--out", report_opts.out, "Output path")->capture_default_str();

  std::vector<std::string> argv_store{"sceval"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return e.get_exit_code() == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth_opts, out);
    if (*tag_cmd) return cmd_tag(tag_opts, out, err);
    if (*pred_cmd) return cmd_predict_cv(pred_opts, out, err);
    if (*eval_cmd) return cmd_evaluate(eval_opts, out, err);
    if (*report_cmd) return cmd_report(report_opts, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace sceval::cli
