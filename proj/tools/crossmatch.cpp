// crossmatch command-line driver.
//
//   crossmatch simulate --spec experiment.json --out lib/
//   crossmatch detect   --config lib/pipeline.json obs.csv -o events.json
//   crossmatch match    --config lib/pipeline.json events.json -o report.json
//   crossmatch evaluate --taxonomy taxonomy.json --truth truth.json report.json --out eval/
//   crossmatch rank     report.json [--truth truth.json --taxonomy t.json --level arc]
//
// Exit status: 0 success, 2 invalid input, 1 internal error.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crossmatch/cli/commands.hpp"

namespace {

using namespace crossmatch;

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    io::save_text_file(path, text);
}

void add_pipeline_flags(CLI::App* cmd, std::string& config, cli::Overrides& o) {
  cmd->add_option("-c,--config", config, "pipeline config (JSON)");
  cmd->add_option("--field", o.field, "sensor field JSON");
  cmd->add_option("--taxonomy", o.taxonomy, "taxonomy JSON");
  cmd->add_option("--library", o.library, "simulation library directory");
  cmd->add_option("--dt", o.dt, "expected library dt (s)");
  cmd->add_option("--seed", o.seed, "seed");
  cmd->add_option("--lag", o.lag, "detector window length (samples)");
  cmd->add_option("--z-threshold", o.z_threshold, "detector z threshold");
  cmd->add_option("--influence", o.influence, "detector influence of flagged samples");
  cmd->add_option("--min-gap", o.min_gap, "silence (s) that closes an event");
  cmd->add_option("--max-fuse-gap", o.max_fuse_gap, "largest gap (s) bridged by event fusion");
  cmd->add_flag("--no-fuse", o.no_fuse, "disable event fusion");
  cmd->add_option("--eps-space", o.eps_space, "cluster spatial radius (m)");
  cmd->add_option("--eps-time", o.eps_time, "cluster temporal radius (s)");
  cmd->add_option("--min-pts", o.min_pts, "cluster density threshold");
  cmd->add_option("--confidence-floor", o.confidence_floor, "classifier confidence floor");
  cmd->add_option("--tol-velocity", o.tol_velocity, "velocity tolerance (m/s)");
  cmd->add_option("--tol-angle", o.tol_angle, "angle tolerance (deg)");
  cmd->add_option("--min-overlap", o.min_overlap, "minimum overlap fraction for partial matches");
  cmd->add_flag("--no-inverse", o.no_inverse, "ignore inverse estimates (all-wildcard H_real)");
}

int run(int argc, char** argv) {
  CLI::App app{"Time-invariant matching of sensor-field events against simulated hypotheses"};
  app.require_subcommand(1);

  std::string spec_path, out_dir;
  std::optional<std::uint64_t> sim_seed;
  std::optional<unsigned> threads;
  auto* sim = app.add_subcommand("simulate", "generate a simulation library (and noisy observations)");
  sim->add_option("-s,--spec", spec_path, "experiment spec (JSON)")->required();
  sim->add_option("-o,--out", out_dir, "output directory")->required();
  sim->add_option("--seed", sim_seed, "override the experiment seed");
  sim->add_option("--threads", threads, "worker threads (0 = hardware)");

  std::string config;
  cli::Overrides ov;
  std::vector<std::string> inputs;
  std::string output;
  auto* det = app.add_subcommand("detect", "detect events in readings CSV files");
  add_pipeline_flags(det, config, ov);
  det->add_option("inputs", inputs, "readings CSV files")->required();
  det->add_option("-o,--output", output, "events JSON (default stdout)");

  bool no_timing = false;
  std::string events_path;
  auto* mat = app.add_subcommand("match", "match detected events against a library");
  add_pipeline_flags(mat, config, ov);
  mat->add_option("events", events_path, "events JSON")->required();
  mat->add_option("-o,--output", output, "match report JSON (default stdout)");
  mat->add_flag("--no-timing", no_timing, "omit wall-clock times (byte-reproducible reports)");

  std::string truth_path, taxonomy_path, level = "type";
  std::vector<std::string> levels;
  auto* ev = app.add_subcommand("evaluate", "metrics and group-rank histograms from match reports");
  ev->add_option("reports", inputs, "match report JSON files")->required();
  ev->add_option("--truth", truth_path, "truth labels JSON")->required();
  ev->add_option("--taxonomy", taxonomy_path, "taxonomy JSON")->required();
  ev->add_option("--level", levels, "taxonomy levels (default: all)");
  ev->add_option("-o,--out", out_dir, "output directory")->required();

  auto* rk = app.add_subcommand("rank", "dissimilarity group ranking per event as CSV");
  rk->add_option("reports", inputs, "match report JSON files")->required();
  rk->add_option("--truth", truth_path, "truth labels JSON");
  rk->add_option("--taxonomy", taxonomy_path, "taxonomy JSON");
  rk->add_option("--level", level, "taxonomy level for --truth");
  rk->add_option("-o,--output", output, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*sim) {
    auto spec = io::load_experiment(spec_path);
    if (sim_seed) spec.seed = *sim_seed;
    if (threads) spec.threads = *threads;
    auto r = cli::cmd_simulate(spec, out_dir);
    std::cerr << "library: " << r.records << " records, " << r.skipped << " skipped, " << r.observations
              << " observations, digest " << r.digest << '\n';
  } else if (*det) {
    auto cfg = cli::resolve_config(config, ov);
    write_output(output, cli::cmd_detect(inputs, cfg).dump(2) + "\n");
  } else if (*mat) {
    auto cfg = cli::resolve_config(config, ov);
    write_output(output, cli::cmd_match(io::load_json_file(events_path), cfg, !no_timing, events_path).dump(2) + "\n");
  } else if (*ev) {
    auto taxonomy = io::taxonomy_from_json(io::load_json_file(taxonomy_path));
    for (const auto& r : cli::cmd_evaluate(inputs, truth_path, taxonomy, levels, out_dir))
      std::cerr << r.report.level << ": F1 " << r.report.f1 << ", rank<=3 " << r.report.ranks.fraction_at_most(3)
                << " (" << r.report.examples << " events)\n";
  } else if (*rk) {
    std::optional<io::TruthTable> truth;
    std::optional<Taxonomy> taxonomy;
    if (!truth_path.empty()) truth = io::truth_from_json(io::load_json_file(truth_path), truth_path);
    if (!taxonomy_path.empty()) taxonomy = io::taxonomy_from_json(io::load_json_file(taxonomy_path));
    write_output(output, cli::cmd_rank(inputs, truth ? &*truth : nullptr, taxonomy ? &*taxonomy : nullptr, level));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const crossmatch::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const crossmatch::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
