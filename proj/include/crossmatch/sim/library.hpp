#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/hypothesis.hpp"
#include "crossmatch/core/taxonomy.hpp"
#include "crossmatch/io/digest.hpp"
#include "crossmatch/io/json_io.hpp"
#include "crossmatch/io/readings_csv.hpp"
#include "crossmatch/matching/activation_matrix.hpp"
#include "crossmatch/sim/simulate.hpp"

namespace crossmatch {

struct SimulationGrid {
  std::vector<Direction> directions;
  std::vector<double> velocities;
  std::vector<double> angles;

  void validate() const {
    require(!directions.empty(), "simulation grid has no directions");
    require(!velocities.empty(), "simulation grid has no velocities");
    require(!angles.empty(), "simulation grid has no angles");
    for (double v : velocities) MotionVector{{}, v, {}}.validate();
    for (double a : angles) MotionVector{{}, {}, a}.validate();
  }
};

namespace detail {
inline double half_min_step(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (v.size() < 2) return std::numeric_limits<double>::infinity();
  double step = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < v.size(); ++i) step = std::min(step, v[i] - v[i - 1]);
  return step / 2;
}
}  // namespace detail

// Half the grid spacing on each continuous axis, so any value inside the grid
// range lies within tolerance of some simulated value. A single-valued axis
// gets an unbounded tolerance.
inline MatchTolerances default_tolerances(const SimulationGrid& grid) {
  return {detail::half_min_step(grid.velocities), detail::half_min_step(grid.angles)};
}

struct SkippedRun {
  Hypothesis hypothesis;
  std::string reason;
};

// Simulation parameters shared by every run of a library.
struct SimulationParams {
  double detection_range = 4.0;
  double noise_sigma = 0.0;
  double dt = 0.1;
  double d_min = 0.1;
  double lead_in = 5.0;
};

/// H_sim together with the synthetic datasets that back it.
struct SimulationLibrary {
  SensorField field;
  SimulationParams params;
  DetectorConfig detector;
  SimulationGrid grid;
  std::uint64_t seed = 0;
  std::vector<SimulationRecord> records;
  std::vector<SkippedRun> skipped;

  double dt() const { return params.dt; }

  HypothesisSet hypotheses() const {
    HypothesisSet hs(Provenance::simulated);
    for (const auto& r : records) hs.insert(r.hypothesis);
    return hs;
  }

  using Key = std::tuple<std::string, Direction, std::size_t, std::size_t>;

  // Manifest index: (type, direction, velocity bin, angle bin) -> record.
  std::map<Key, std::size_t> index() const {
    std::map<Key, std::size_t> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& h = records[i].hypothesis;
      auto bin = [](const std::vector<double>& axis, double v) {
        auto it = std::find(axis.begin(), axis.end(), v);
        return static_cast<std::size_t>(it - axis.begin());
      };
      out.emplace(Key{*h.label.object_type, *h.motion.direction, bin(grid.velocities, *h.motion.velocity),
                      bin(grid.angles, *h.motion.angle)},
                  i);
    }
    return out;
  }

  const SimulationRecord* find(const Hypothesis& h) const {
    for (const auto& r : records)
      if (r.hypothesis == h) return &r;
    return nullptr;
  }
};

/// One record per geometry x direction x velocity x angle, activation
/// matrices precomputed with `detector`. Runs are independent and are
/// distributed over worker threads; record i uses seed `seed ^ i`, so the
/// result does not depend on scheduling. Failing runs are reported in
/// `skipped` instead of aborting the library.
inline SimulationLibrary generate_library(std::vector<ObjectGeometry> geometries, const SimulationGrid& grid,
                                          const SensorField& field, SimulationParams params,
                                          const DetectorConfig& detector, std::uint64_t seed,
                                          const Taxonomy* taxonomy = nullptr, unsigned threads = 0) {
  grid.validate();
  detector.validate();
  require(!geometries.empty(), "no geometries to simulate");
  for (std::size_t i = 0; i < geometries.size(); ++i) {
    auto& g = geometries[i];
    g.validate();
    for (std::size_t j = 0; j < i; ++j)
      require(geometries[j].type_id != g.type_id, "duplicate geometry type '" + g.type_id + "'");
    if (taxonomy) {
      if (g.category.empty()) g.category = taxonomy->category_of(g.type_id).value_or("");
      taxonomy->validate({g.type_id, g.category});
    }
    require(!g.category.empty(), "geometry '" + g.type_id + "' has no category");
  }
  // The detector must be warmed up before the object arrives.
  params.lead_in = std::max(params.lead_in, static_cast<double>(detector.lag + 1) * params.dt);

  struct Job {
    const ObjectGeometry* geometry;
    MotionVector motion;
  };
  std::vector<Job> jobs;
  for (const auto& g : geometries)
    for (auto d : grid.directions)
      for (double v : grid.velocities)
        for (double a : grid.angles) jobs.push_back({&g, {d, v, a}});

  std::vector<std::optional<SimulationRecord>> done(jobs.size());
  std::vector<std::string> errors(jobs.size());
  auto run = [&](std::size_t i) {
    const auto& job = jobs[i];
    SimulationConfig cfg;
    cfg.field = field;
    cfg.motion = job.motion;
    cfg.detection_range = params.detection_range;
    cfg.noise_sigma = params.noise_sigma;
    cfg.dt = params.dt;
    cfg.d_min = params.d_min;
    cfg.lead_in = params.lead_in;
    cfg.start_position = crossing_start(field, *job.geometry, job.motion, params.detection_range);
    try {
      auto rec = simulate(*job.geometry, cfg, seed ^ static_cast<std::uint64_t>(i));
      rec.activation = binarize(std::span<const Reading>(rec.dataset), field, detector, params.dt);
      done[i] = std::move(rec);
    } catch (const ValidationError& e) {
      errors[i] = e.what();
    }
  };
  unsigned n = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  n = static_cast<unsigned>(std::min<std::size_t>(n, jobs.size()));
  if (n <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < jobs.size(); i += n) run(i);
      });
  }

  SimulationLibrary lib;
  lib.field = field;
  lib.params = params;
  lib.detector = detector;
  lib.grid = grid;
  lib.seed = seed;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    Hypothesis h{{jobs[i].geometry->type_id, jobs[i].geometry->category}, jobs[i].motion};
    if (!done[i]) {
      lib.skipped.push_back({h, errors[i]});
      continue;
    }
    char id[16];
    std::snprintf(id, sizeof id, "r%04zu", i);
    done[i]->id = id;
    lib.records.push_back(std::move(*done[i]));
  }
  return lib;
}

// ---- persistence ----------------------------------------------------------

inline constexpr int kManifestSchemaVersion = 1;

namespace detail {
inline std::string record_dir(const std::string& id) { return "records/" + id; }

inline io::json grid_json(const SimulationGrid& g) {
  io::json dirs = io::json::array();
  for (auto d : g.directions) dirs.push_back(to_string(d));
  return {{"directions", dirs}, {"velocities", g.velocities}, {"angles", g.angles}};
}

inline SimulationGrid grid_from_json(const io::json& j) {
  SimulationGrid g;
  for (const auto& d : io::get_field<std::vector<std::string>>(j, "directions", "grid"))
    g.directions.push_back(parse_direction(d));
  g.velocities = io::get_field<std::vector<double>>(j, "velocities", "grid");
  g.angles = io::get_field<std::vector<double>>(j, "angles", "grid");
  return g;
}

inline io::json params_json(const SimulationParams& p) {
  return {{"detection_range", p.detection_range}, {"noise_sigma", p.noise_sigma}, {"dt", p.dt},
          {"d_min", p.d_min}, {"lead_in", p.lead_in}};
}

inline SimulationParams params_from_json(const io::json& j, SimulationParams base = {}) {
  const std::string ctx = "simulation";
  base.detection_range = io::get_or<double>(j, "detection_range", base.detection_range, ctx);
  base.noise_sigma = io::get_or<double>(j, "noise_sigma", base.noise_sigma, ctx);
  base.dt = io::get_or<double>(j, "dt", base.dt, ctx);
  base.d_min = io::get_or<double>(j, "d_min", base.d_min, ctx);
  base.lead_in = io::get_or<double>(j, "lead_in", base.lead_in, ctx);
  return base;
}
}  // namespace detail

/// Writes `manifest.json` plus `records/<id>/readings.csv` and
/// `records/<id>/activation.bin`. Returns the manifest digest.
inline std::string save_library(const SimulationLibrary& lib, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "records", ec);
  if (ec) throw IoError("cannot create library directory '" + dir + "': " + ec.message());

  io::json recs = io::json::array();
  for (const auto& r : lib.records) {
    auto rel = detail::record_dir(r.id);
    fs::create_directories(fs::path(dir) / rel, ec);
    if (ec) throw IoError("cannot create '" + (fs::path(dir) / rel).string() + "': " + ec.message());
    std::ostringstream csv;
    io::write_readings_csv(csv, r.dataset);
    std::string csv_text = csv.str();
    auto bin = encode_activation_bin(r.activation);
    {
      auto p = (fs::path(dir) / rel / "readings.csv").string();
      std::ofstream out(p, std::ios::binary);
      if (!out || !out.write(csv_text.data(), static_cast<std::streamsize>(csv_text.size())))
        throw IoError("cannot write '" + p + "'");
    }
    save_activation_bin((fs::path(dir) / rel / "activation.bin").string(), r.activation);
    recs.push_back({{"id", r.id},
                    {"hypothesis", io::to_json(r.hypothesis)},
                    {"seed", r.seed},
                    {"rows", r.activation.rows()},
                    {"cols", r.activation.cols()},
                    {"readings", rel + "/readings.csv"},
                    {"readings_sha256", io::sha256_hex(csv_text)},
                    {"activation", rel + "/activation.bin"},
                    {"activation_sha256", io::sha256_hex(bin)}});
  }
  io::json skipped = io::json::array();
  for (const auto& s : lib.skipped) skipped.push_back({{"hypothesis", io::to_json(s.hypothesis)}, {"reason", s.reason}});

  io::json m = {{"schema_version", kManifestSchemaVersion},
                {"dt", lib.params.dt},
                {"simulation", detail::params_json(lib.params)},
                {"detector", io::to_json(lib.detector)},
                {"grid", detail::grid_json(lib.grid)},
                {"seed", lib.seed},
                {"field", io::to_json(lib.field)},
                {"records", recs},
                {"skipped", skipped}};
  std::string digest = io::sha256_hex(m.dump());
  m["digest"] = digest;
  io::save_json_file((fs::path(dir) / "manifest.json").string(), m);
  return digest;
}

struct LoadedLibrary {
  SimulationLibrary library;
  std::string digest;
};

/// Reads a library directory. Activation matrices are always loaded and
/// checked against their recorded digests; raw readings only on request.
inline LoadedLibrary load_library(const std::string& dir, bool with_readings = false) {
  namespace fs = std::filesystem;
  auto mpath = (fs::path(dir) / "manifest.json").string();
  if (!fs::exists(mpath)) throw IoError("library manifest not found: '" + mpath + "'");
  auto m = io::load_json_file(mpath);
  const std::string ctx = mpath;
  require(io::get_field<int>(m, "schema_version", ctx) == kManifestSchemaVersion,
          ctx + ": unsupported schema_version");
  LoadedLibrary out;
  auto& lib = out.library;
  out.digest = io::get_field<std::string>(m, "digest", ctx);
  lib.params = detail::params_from_json(io::get_field<io::json>(m, "simulation", ctx));
  lib.params.dt = io::get_field<double>(m, "dt", ctx);
  lib.detector = io::detector_from_json(io::get_field<io::json>(m, "detector", ctx));
  lib.grid = detail::grid_from_json(io::get_field<io::json>(m, "grid", ctx));
  lib.seed = io::get_field<std::uint64_t>(m, "seed", ctx);
  lib.field = io::field_from_json(io::get_field<io::json>(m, "field", ctx));
  for (const auto& r : io::get_field<io::json>(m, "records", ctx)) {
    SimulationRecord rec;
    rec.id = io::get_field<std::string>(r, "id", ctx);
    rec.hypothesis = io::hypothesis_from_json(io::get_field<io::json>(r, "hypothesis", ctx));
    require(rec.hypothesis.fully_specified(), ctx + ": record '" + rec.id + "' is not fully specified");
    rec.seed = io::get_field<std::uint64_t>(r, "seed", ctx);
    auto bin_path = (fs::path(dir) / io::get_field<std::string>(r, "activation", ctx)).string();
    std::ifstream in(bin_path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + bin_path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(io::sha256_hex(bytes) == io::get_field<std::string>(r, "activation_sha256", ctx),
            bin_path + ": digest mismatch");
    rec.activation = decode_activation_bin(bytes, lib.params.dt);
    require(rec.activation.cols() == lib.field.size(), bin_path + ": column count does not match the field");
    if (with_readings)
      rec.dataset = io::load_readings_csv((fs::path(dir) / io::get_field<std::string>(r, "readings", ctx)).string());
    lib.records.push_back(std::move(rec));
  }
  if (m.contains("skipped"))
    for (const auto& s : m["skipped"])
      lib.skipped.push_back({io::hypothesis_from_json(s.at("hypothesis")), s.value("reason", "")});
  return out;
}

}  // namespace crossmatch
