#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/taxonomy.hpp"
#include "crossmatch/detection/events.hpp"
#include "crossmatch/io/config.hpp"
#include "crossmatch/io/json_io.hpp"
#include "crossmatch/io/readings_csv.hpp"
#include "crossmatch/io/report.hpp"
#include "crossmatch/pipeline.hpp"
#include "crossmatch/sim/library.hpp"

namespace crossmatch::cli {

namespace fs = std::filesystem;

// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::string> field, taxonomy, library;
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> lag;
  std::optional<double> z_threshold, influence, min_gap, max_fuse_gap;
  bool no_fuse = false;
  std::optional<double> eps_space, eps_time;
  std::optional<std::size_t> min_pts;
  std::optional<double> confidence_floor, tol_velocity, tol_angle, min_overlap;
  bool no_inverse = false;
};

/// Defaults, then the config file (if any), then `o`.
inline io::PipelineConfig resolve_config(const std::string& config_path, const Overrides& o) {
  io::PipelineConfig c;
  if (!config_path.empty()) c = io::load_pipeline_config(config_path, c);
  if (o.field) c.field_path = *o.field;
  if (o.taxonomy) c.taxonomy_path = *o.taxonomy;
  if (o.library) c.library_path = *o.library;
  if (o.dt) c.dt = *o.dt;
  if (o.seed) c.seed = *o.seed;
  auto& d = c.events.detector;
  if (o.lag) d.lag = *o.lag;
  if (o.z_threshold) d.z_threshold = *o.z_threshold;
  if (o.influence) d.influence = *o.influence;
  if (o.min_gap) d.min_gap = *o.min_gap;
  if (o.max_fuse_gap) c.events.max_fuse_gap = *o.max_fuse_gap;
  if (o.no_fuse) c.events.fuse = false;
  if (o.eps_space) c.inverse.cluster.eps_space = *o.eps_space;
  if (o.eps_time) c.inverse.cluster.eps_time = *o.eps_time;
  if (o.min_pts) c.inverse.cluster.min_pts = *o.min_pts;
  if (o.confidence_floor) c.inverse.confidence_floor = *o.confidence_floor;
  if (o.tol_velocity || o.tol_angle) {
    require(o.tol_velocity && o.tol_angle, "--tol-velocity and --tol-angle must be given together");
    c.tolerances = MatchTolerances{*o.tol_velocity, *o.tol_angle};
  }
  if (o.min_overlap) c.match.min_overlap = *o.min_overlap;
  if (o.no_inverse)
    c.inverse.use_direction = c.inverse.use_velocity = c.inverse.use_angle = c.inverse.use_category = false;
  c.validate();
  return c;
}

inline std::optional<Taxonomy> load_taxonomy(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return io::taxonomy_from_json(io::load_json_file(path));
}

// ---- simulate -------------------------------------------------------------

struct SimulateResult {
  std::string digest;
  std::size_t records = 0;
  std::size_t skipped = 0;
  std::size_t observations = 0;
};

inline std::uint64_t observation_seed(std::uint64_t base, std::uint64_t k) {
  return base ^ (0x9E3779B97F4A7C15ull * (k + 1));
}

/// Writes a library to `out_dir`, plus `observations/` (noisy replays of
/// every record with a truth table) when the experiment spec lists noise levels. A
/// `pipeline.json` next to the manifest points detect/match at this library.
inline SimulateResult cmd_simulate(const io::ExperimentSpec& spec, const std::string& out_dir) {
  spec.validate();
  auto field_json = io::load_json_file(spec.field_path);
  auto field = io::field_from_json(field_json);
  auto taxonomy = load_taxonomy(spec.taxonomy_path);
  auto lib = generate_library(spec.geometries, spec.grid, field, spec.simulation, spec.detector, spec.seed,
                              taxonomy ? &*taxonomy : nullptr, spec.threads);
  SimulateResult res;
  res.digest = save_library(lib, out_dir);
  res.records = lib.records.size();
  res.skipped = lib.skipped.size();

  io::save_json_file((fs::path(out_dir) / "field.json").string(), field_json);
  io::json pipeline = {{"field", "field.json"}, {"library", "."}, {"dt", lib.dt()},
                       {"seed", spec.seed}, {"detector", io::to_json(spec.detector)}};
  if (taxonomy) {
    io::save_json_file((fs::path(out_dir) / "taxonomy.json").string(), io::to_json(*taxonomy));
    pipeline["taxonomy"] = "taxonomy.json";
  }
  if (spec.ablate_inverse)
    pipeline["inverse"] = {{"use_direction", false}, {"use_velocity", false}, {"use_angle", false},
                           {"use_category", false}};
  io::save_json_file((fs::path(out_dir) / "pipeline.json").string(), pipeline);

  if (spec.noise_levels.empty()) return res;
  auto obs_dir = fs::path(out_dir) / "observations";
  std::error_code ec;
  fs::create_directories(obs_dir, ec);
  if (ec) throw IoError("cannot create '" + obs_dir.string() + "': " + ec.message());
  std::map<std::string, const ObjectGeometry*> by_type;
  for (const auto& g : spec.geometries) by_type[g.type_id] = &g;
  io::TruthTable truth;
  std::uint64_t k = 0;
  for (std::size_t li = 0; li < spec.noise_levels.size(); ++li)
    for (std::size_t rep = 0; rep < spec.repetitions; ++rep)
      for (const auto& rec : lib.records) {
        const auto& g = *by_type.at(*rec.hypothesis.label.object_type);
        SimulationConfig cfg;
        cfg.field = field;
        cfg.motion = rec.hypothesis.motion;
        cfg.detection_range = lib.params.detection_range;
        cfg.noise_sigma = spec.noise_levels[li];
        cfg.dt = lib.params.dt;
        cfg.d_min = lib.params.d_min;
        cfg.lead_in = lib.params.lead_in;
        cfg.start_position = crossing_start(field, g, cfg.motion, cfg.detection_range);
        auto obs = simulate(g, cfg, observation_seed(spec.seed, k++));
        std::string id = "n" + std::to_string(li) + "-" + rec.id + "-" + std::to_string(rep);
        io::save_readings_csv((obs_dir / (id + ".csv")).string(), obs.dataset);
        truth[id] = rec.hypothesis;
        ++res.observations;
      }
  io::save_json_file((obs_dir / "truth.json").string(), io::truth_to_json(truth));
  return res;
}

// ---- detect ---------------------------------------------------------------

inline SensorField field_for(const io::PipelineConfig& cfg) {
  if (!cfg.field_path.empty()) return io::field_from_json(io::load_json_file(cfg.field_path));
  require(!cfg.library_path.empty(), "a sensor field is required (--field or a library)");
  auto m = io::load_json_file((fs::path(cfg.library_path) / "manifest.json").string());
  return io::field_from_json(io::get_field<io::json>(m, "field", "manifest"));
}

/// Detects events in each CSV; ids are "<file stem>:e<k>".
inline io::json cmd_detect(const std::vector<std::string>& csv_paths, const io::PipelineConfig& cfg) {
  auto field = field_for(cfg);
  std::vector<Event> all;
  std::optional<double> sample_dt;
  for (const auto& p : csv_paths) {
    auto readings = io::load_readings_csv(p);
    auto dt = io::sample_interval(readings);
    if (dt && (!sample_dt || *dt > *sample_dt)) sample_dt = dt;
    auto events = detect_events(readings, field, cfg.events);
    auto stem = fs::path(p).stem().string();
    for (auto& e : events) {
      e.id = stem + ":" + e.id;
      all.push_back(std::move(e));
    }
  }
  return io::events_to_json(all, field, sample_dt);
}

// ---- match ----------------------------------------------------------------

inline io::json cmd_match(const io::json& events_json, const io::PipelineConfig& cfg, bool with_timing = true,
                          const std::string& events_source = "events") {
  require(!cfg.library_path.empty(), "a simulation library is required (--library)");
  auto loaded = load_library(cfg.library_path);
  const auto& lib = loaded.library;
  auto taxonomy = load_taxonomy(cfg.taxonomy_path);
  auto events = io::events_from_json(events_json, lib.field, events_source);
  // Readings sampled more coarsely than the library would leave holes in the
  // resampled matrix.
  if (events.sample_dt)
    require(*events.sample_dt <= lib.dt() * (1 + 1e-9),
            "event sample interval " + io::format_double(*events.sample_dt) + " s is coarser than the library dt " +
                io::format_double(lib.dt()) + " s");
  Pipeline pipeline(lib, taxonomy ? &*taxonomy : nullptr, cfg);
  io::json out = io::json::array();
  for (const auto& e : events.events) out.push_back(io::to_json(pipeline.process(e), with_timing));
  const auto& tol = pipeline.tolerances();
  return {{"schema_version", io::kMatchSchemaVersion},
          {"library_digest", loaded.digest},
          {"dt", lib.dt()},
          {"tolerances", {{"velocity", std::isfinite(tol.velocity) ? io::json(tol.velocity) : io::json(nullptr)},
                          {"angle", std::isfinite(tol.angle) ? io::json(tol.angle) : io::json(nullptr)}}},
          {"events", out}};
}

// ---- evaluate -------------------------------------------------------------

inline io::EvaluationInput load_evaluation_input(const std::vector<std::string>& report_paths,
                                                 const std::string& truth_path) {
  require(!truth_path.empty(), "a truth file is required (--truth)");
  io::EvaluationInput in;
  in.truth = io::truth_from_json(io::load_json_file(truth_path), truth_path);
  for (const auto& p : report_paths) {
    auto evs = io::read_match_report(io::load_json_file(p), p);
    in.events.insert(in.events.end(), evs.begin(), evs.end());
  }
  return in;
}

inline std::vector<std::string> default_levels(const Taxonomy& t) {
  std::vector<std::string> levels{Taxonomy::kTypeLevel};
  for (const auto& [name, m] : t.schemes()) levels.push_back(name);
  return levels;
}

/// Writes eval_<level>.json, eval_<level>.csv and ranks_<level>.csv.
inline std::vector<io::LevelEvaluation> cmd_evaluate(const std::vector<std::string>& report_paths,
                                                     const std::string& truth_path, const Taxonomy& taxonomy,
                                                     std::vector<std::string> levels, const std::string& out_dir) {
  if (levels.empty()) levels = default_levels(taxonomy);
  auto in = load_evaluation_input(report_paths, truth_path);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  std::vector<io::LevelEvaluation> out;
  for (const auto& level : levels) {
    auto ev = io::evaluate_level(in, level, taxonomy);
    auto base = fs::path(out_dir);
    io::save_json_file((base / ("eval_" + level + ".json")).string(), io::to_json(ev));
    io::save_text_file((base / ("eval_" + level + ".csv")).string(), io::metrics_csv(ev.report));
    io::save_text_file((base / ("ranks_" + level + ".csv")).string(), io::rank_histogram_csv(ev.report.ranks));
    out.push_back(std::move(ev));
  }
  return out;
}

// ---- rank -----------------------------------------------------------------

/// Group ranking per event as CSV. With a truth table, a column flags the
/// groups holding the true label at `level`.
inline std::string cmd_rank(const std::vector<std::string>& report_paths, const io::TruthTable* truth,
                            const Taxonomy* taxonomy, const std::string& level) {
  require(!truth || taxonomy, "ranking against truth needs a taxonomy");
  if (taxonomy) require(taxonomy->has_level(level), "unknown taxonomy level '" + level + "'");
  std::ostringstream os;
  os << "event_id,rank,sdist,size,members" << (truth ? ",contains_truth" : "") << '\n';
  for (const auto& p : report_paths)
    for (const auto& e : io::read_match_report(io::load_json_file(p), p)) {
      auto ranking = group_ranks(e.scores);
      std::optional<std::string> want;
      if (truth) {
        auto t = io::find_truth(*truth, e.event_id);
        require(t != nullptr, "no truth entry for event id: " + e.event_id);
        if (*t) want = label_at_level((*t)->label, level, *taxonomy);
      }
      for (std::size_t i = 0; i < ranking.groups.size(); ++i) {
        const auto& g = ranking.groups[i];
        os << e.event_id << ',' << ranking.rank_of_group(i) << ',' << g.sdist << ',' << g.members.size() << ',';
        for (std::size_t m = 0; m < g.members.size(); ++m)
          os << (m ? " " : "") << g.members[m].score.simulation_id;
        if (truth) {
          bool hit = false;
          for (const auto& m : g.members)
            hit = hit || (want && label_at_level(m.hypothesis.label, level, *taxonomy) == want);
          os << ',' << (hit ? 1 : 0);
        }
        os << '\n';
      }
    }
  return os.str();
}

}  // namespace crossmatch::cli
