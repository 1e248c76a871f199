// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crossmatch/cli/commands.hpp"
#include "crossmatch/crossmatch.hpp"

using namespace crossmatch;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

std::string data_path(const std::string& name) { return std::string(CROSSMATCH_DATA_DIR) + "/" + name; }

SensorField sample_field() { return io::field_from_json(io::load_json_file(data_path("field.json"))); }
Taxonomy sample_taxonomy() { return io::taxonomy_from_json(io::load_json_file(data_path("taxonomy.json"))); }

std::vector<ObjectGeometry> sample_geometries(const std::set<std::string>& only = {}) {
  std::vector<ObjectGeometry> out;
  for (const auto& j : io::load_json_file(data_path("geometries.json"))) {
    auto g = io::geometry_from_json(j);
    if (only.empty() || only.count(g.type_id)) out.push_back(std::move(g));
  }
  return out;
}

std::string format(const char* fmt, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

// ---- random matrix corpus (criteria 1, 2, 8) ------------------------------

// Plain bool grid, kept apart from the packed representation under test.
using Grid = std::vector<std::vector<bool>>;

struct Pair {
  Grid a, b;
  BinaryActivationMatrix ma, mb;
};

BinaryActivationMatrix pack(const Grid& g, std::size_t cols) {
  BinaryActivationMatrix m(g.size(), cols, 1.0);
  for (std::size_t r = 0; r < g.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c) m.set(r, c, g[r][c]);
  return m;
}

std::vector<Pair> random_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Pair> out;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t ra = 1 + rng() % 12, rb = 1 + rng() % 20, cols = 1 + rng() % 16;
    std::bernoulli_distribution bit(0.05 + 0.9 * std::uniform_real_distribution<double>()(rng));
    Pair p;
    p.a.assign(ra, std::vector<bool>(cols));
    p.b.assign(rb, std::vector<bool>(cols));
    for (auto& row : p.a)
      for (std::size_t c = 0; c < cols; ++c) row[c] = bit(rng);
    for (auto& row : p.b)
      for (std::size_t c = 0; c < cols; ++c) row[c] = bit(rng);
    p.ma = pack(p.a, cols);
    p.mb = pack(p.b, cols);
    out.push_back(std::move(p));
  }
  return out;
}

// Slides the shorter grid over every full-overlap window of the longer one,
// counting differing cells directly.
std::uint64_t brute_force_sdist(const Grid& a, const Grid& b) {
  const Grid& s = a.size() <= b.size() ? a : b;
  const Grid& l = a.size() <= b.size() ? b : a;
  std::uint64_t best = UINT64_MAX;
  for (std::size_t o = 0; o + s.size() <= l.size(); ++o) {
    std::uint64_t d = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t c = 0; c < s[i].size(); ++c) d += s[i][c] != l[i + o][c];
    best = std::min(best, d);
  }
  return best;
}

Outcome criterion_oracle(const std::vector<Pair>& corpus) {
  auto t0 = Clock::now();
  std::size_t bad = 0;
  for (const auto& p : corpus)
    if (sdist(pdist(p.ma, p.mb)).sdist != brute_force_sdist(p.a, p.b)) ++bad;
  double s = seconds_since(t0);
  return {bad == 0 && s < 5.0, std::to_string(corpus.size() - bad) + "/" + std::to_string(corpus.size()) +
                                   " pairs equal" + format(", %.3f s (limit 5 s)", s)};
}

Outcome criterion_transpose(const std::vector<Pair>& corpus) {
  std::size_t bad = 0;
  for (const auto& p : corpus)
    if (sdist(pdist(p.ma, p.mb)).sdist != sdist(pdist(p.mb, p.ma)).sdist) ++bad;
  return {bad == 0, std::to_string(corpus.size() - bad) + "/" + std::to_string(corpus.size()) + " pairs symmetric"};
}

Outcome criterion_bit_flip(const std::vector<Pair>& corpus) {
  std::mt19937_64 rng(808);
  std::size_t bad = 0, trials = 0;
  std::uint64_t max_delta = 0;
  for (const auto& p : corpus) {
    auto a = p.ma, b = p.mb;
    auto before = sdist(pdist(a, b)).sdist;
    auto& target = (rng() & 1) ? a : b;
    target.flip(rng() % target.rows(), rng() % target.cols());
    auto after = sdist(pdist(a, b)).sdist;
    auto delta = after > before ? after - before : before - after;
    max_delta = std::max(max_delta, delta);
    bad += delta > 1;
    ++trials;
  }
  return {bad == 0 && trials == 1000, std::to_string(trials - bad) + "/" + std::to_string(trials) +
                                          " flips within 1, max change " + std::to_string(max_delta)};
}

// ---- closed loop (criteria 3, 4, 6) ----------------------------------------

std::vector<Reading> csv_round_trip(const std::vector<Reading>& readings) {
  std::ostringstream out;
  io::write_readings_csv(out, readings);
  std::istringstream in(out.str());
  return io::read_readings_csv(in);
}

// The longest detected event; the crossing itself when detection is clean.
std::optional<Event> main_event(const std::vector<Reading>& readings, const SensorField& field,
                                const EventPipelineConfig& cfg) {
  auto events = detect_events(readings, field, cfg);
  if (events.empty()) return std::nullopt;
  return *std::max_element(events.begin(), events.end(),
                           [](const Event& a, const Event& b) { return a.frames.size() < b.frames.size(); });
}

SimulationGrid full_grid() { return {{Direction::right, Direction::left}, {4, 6, 8}, {-4, 0, 4}}; }

Outcome criterion_self_match() {
  auto t0 = Clock::now();
  auto tax = sample_taxonomy();
  auto lib = generate_library(sample_geometries({"A320", "B763"}), full_grid(), sample_field(), {}, {}, 2024, &tax);
  io::PipelineConfig cfg;
  cfg.events.detector = lib.detector;
  Pipeline pipeline(lib, &tax, cfg);
  std::size_t exact = 0, rank1 = 0;
  for (const auto& rec : lib.records) {
    auto ev = main_event(csv_round_trip(rec.dataset), lib.field, cfg.events);
    if (!ev) continue;
    auto r = pipeline.process(*ev);
    bool found = false;
    for (const auto& s : r.outcome.scores)
      found = found || (s.score.simulation_id == rec.id && s.score.sdist == 0);
    if (found && r.outcome.h_final.contains(rec.hypothesis)) ++exact;
    if (!r.ranking.groups.empty())
      for (const auto& m : r.ranking.groups.front().members) rank1 += m.score.simulation_id == rec.id;
  }
  double s = seconds_since(t0);
  const auto n = lib.records.size();
  return {n == 36 && exact == n && rank1 == n && s < 60.0,
          std::to_string(exact) + "/" + std::to_string(n) + " exact self-matches, rank-1 " + std::to_string(rank1) +
              "/" + std::to_string(n) + format(", %.2f s (limit 60 s)", s)};
}

Outcome criterion_noisy_loop() {
  auto t0 = Clock::now();
  const double sigma = 0.08;
  auto tax = sample_taxonomy();
  auto geoms = sample_geometries();
  auto lib = generate_library(geoms, full_grid(), sample_field(), {}, {}, 7, &tax);
  io::PipelineConfig cfg;
  cfg.events.detector = lib.detector;
  Pipeline pipeline(lib, &tax, cfg);
  std::map<std::string, const ObjectGeometry*> by_type;
  for (const auto& g : geoms) by_type[g.type_id] = &g;

  std::size_t type_top3 = 0, cat_top3 = 0, flipped = 0, cells = 0;
  const std::size_t n = 100;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& rec = lib.records[k % lib.records.size()];
    const auto& g = *by_type.at(*rec.hypothesis.label.object_type);
    SimulationConfig sc;
    sc.field = lib.field;
    sc.motion = rec.hypothesis.motion;
    sc.detection_range = lib.params.detection_range;
    sc.noise_sigma = sigma;
    sc.dt = lib.params.dt;
    sc.d_min = lib.params.d_min;
    sc.lead_in = lib.params.lead_in;
    sc.start_position = crossing_start(lib.field, g, sc.motion, sc.detection_range);
    auto obs = simulate(g, sc, cli::observation_seed(7, k));
    auto ev = main_event(obs.dataset, lib.field, cfg.events);
    if (!ev) continue;
    auto m = binarize(*ev, lib.field, lib.dt());
    flipped += sdist(pdist(m, rec.activation)).sdist;
    cells += std::min(m.rows(), rec.activation.rows()) * m.cols();
    auto r = pipeline.process(*ev);
    auto t = true_class_rank(r.ranking, rec.hypothesis.label, Taxonomy::kTypeLevel, tax);
    auto c = true_class_rank(r.ranking, rec.hypothesis.label, tax.category_scheme(), tax);
    type_top3 += t && *t <= 3;
    cat_top3 += c && *c <= 3;
  }
  double s = seconds_since(t0);
  double flip_rate = cells ? static_cast<double>(flipped) / static_cast<double>(cells) : 0.0;
  bool noise_ok = flip_rate >= 0.08 && flip_rate <= 0.12;
  return {noise_ok && type_top3 >= 80 && cat_top3 >= 95 && s < 300.0,
          format("sigma %.2f flips %.1f%% of bits; ", sigma, 100 * flip_rate) + "type rank<=3 " +
              std::to_string(type_top3) + "/100 (need 80), category rank<=3 " + std::to_string(cat_top3) +
              "/100 (need 95)" + format(", %.1f s (limit 300 s)", s)};
}

Outcome criterion_motion() {
  auto lib = generate_library(sample_geometries(), full_grid(), sample_field(), {}, {}, 11);
  EventPipelineConfig ecfg;
  ecfg.detector = lib.detector;
  std::set<std::size_t> primary(lib.field.primary_line().members.begin(), lib.field.primary_line().members.end());
  std::size_t eligible = 0, good = 0;
  double worst = 0;
  for (const auto& rec : lib.records) {
    auto ev = main_event(rec.dataset, lib.field, ecfg);
    if (!ev) continue;
    std::size_t hit = 0;
    for (auto c : active_columns(*ev)) hit += primary.count(c);
    if (hit < 3) continue;
    ++eligible;
    auto mv = run_inverse(*ev, lib.field, {}, nullptr, nullptr).motion;
    if (!mv.direction || !mv.velocity) continue;
    double v = *rec.hypothesis.motion.velocity;
    double err = std::abs(*mv.velocity - v) / v;
    worst = std::max(worst, err);
    good += *mv.direction == *rec.hypothesis.motion.direction && err <= 0.10;
  }
  return {eligible > 0 && good == eligible,
          std::to_string(good) + "/" + std::to_string(eligible) + " eligible runs" +
              format(", worst velocity error %.2f%% (limit 10%%)", 100 * worst)};
}

// ---- wildcard algebra (criterion 5) ----------------------------------------

Outcome criterion_wildcards() {
  std::mt19937_64 rng(55);
  const std::vector<std::string> types{"A320", "B738", "B763", "A333"};
  const std::map<std::string, std::string> cat{{"A320", "C"}, {"B738", "C"}, {"B763", "D"}, {"A333", "E"}};
  std::size_t trials = 0, passed = 0;
  for (int grid = 0; grid < 50; ++grid) {
    std::vector<double> vs, as;
    for (double v = 2 + static_cast<double>(rng() % 3); v <= 12; v += 1 + static_cast<double>(rng() % 3)) vs.push_back(v);
    for (double a = -8; a <= 8; a += 2 + static_cast<double>(rng() % 4)) as.push_back(a);
    HypothesisSet sim(Provenance::simulated);
    for (const auto& t : types)
      for (auto d : {Direction::right, Direction::left})
        for (double v : vs)
          for (double a : as)
            if (rng() % 4) sim.insert({{t, cat.at(t)}, {d, v, a}});
    MatchTolerances tol{0.5 + static_cast<double>(rng() % 3) * 0.5, 1.0 + static_cast<double>(rng() % 3)};
    auto pattern = [&] {
      Hypothesis p;
      if (rng() % 3 == 0) p.label.object_type = types[rng() % types.size()];
      if (rng() % 2) p.label.category = std::vector<std::string>{"C", "D", "E"}[rng() % 3];
      if (rng() % 2) p.motion.direction = rng() % 2 ? Direction::right : Direction::left;
      if (rng() % 2) p.motion.velocity = vs[rng() % vs.size()] + std::uniform_real_distribution<double>(-1, 1)(rng);
      if (rng() % 2) p.motion.angle = as[rng() % as.size()] + std::uniform_real_distribution<double>(-2, 2)(rng);
      return p;
    };
    for (int k = 0; k < 20; ++k) {
      ++trials;
      bool ok = true;
      HypothesisSet real(Provenance::inverse);
      for (std::size_t i = 0, n = 1 + rng() % 3; i < n; ++i) real.insert(pattern());
      auto base = intersect_hypotheses(sim, real, tol);
      for (const auto& h : base) ok = ok && sim.contains(h);

      auto wider = real;
      wider.insert(pattern());
      auto grown = intersect_hypotheses(sim, wider, tol);
      for (const auto& h : base) ok = ok && grown.contains(h);

      HypothesisSet narrowed(Provenance::inverse);
      for (auto p : real) {
        if (!p.motion.direction) p.motion.direction = Direction::left;
        if (!p.label.category) p.label.category = "D";
        narrowed.insert(p);
      }
      for (const auto& h : intersect_hypotheses(sim, narrowed, tol)) ok = ok && base.contains(h);

      InverseResult inv;
      auto p = pattern();
      inv.category = p.label.category;
      inv.motion = p.motion;
      auto once = build_h_real(inv, sim, tol);
      for (const auto& h : once) ok = ok && sim.contains(h) && hypothesis_matches(h, inv.pattern(), tol);
      ok = ok && build_h_real(inv, once, tol).items() == once.items();
      passed += ok;
    }
  }
  return {passed == trials, std::to_string(passed) + "/" + std::to_string(trials) + " randomized cases hold"};
}

// ---- metrics oracle (criterion 7) ------------------------------------------

struct Reference {
  double precision = 0, recall = 0, f1 = 0;
};

// Straight from the definitions: every label seen in either column is a
// class; per-class scores from raw counts, averaged with support weights.
Reference reference_metrics(const std::vector<std::string>& truth, const std::vector<std::string>& pred) {
  std::set<std::string> labels(truth.begin(), truth.end());
  labels.insert(pred.begin(), pred.end());
  Reference r;
  const double n = static_cast<double>(truth.size());
  for (const auto& l : labels) {
    double tp = 0, predicted = 0, support = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      tp += truth[i] == l && pred[i] == l;
      predicted += pred[i] == l;
      support += truth[i] == l;
    }
    double p = predicted > 0 ? tp / predicted : 0;
    double rc = support > 0 ? tp / support : 0;
    double f = p + rc > 0 ? 2 * p * rc / (p + rc) : 0;
    r.precision += support / n * p;
    r.recall += support / n * rc;
    r.f1 += support / n * f;
  }
  return r;
}

Outcome criterion_metrics() {
  std::mt19937_64 rng(77);
  const std::vector<std::string> pool{"C", "D", "E", "F", kUnknownLabel};
  std::size_t good = 0;
  double worst = 0;
  for (int setup = 0; setup < 20; ++setup) {
    std::size_t n = 1 + rng() % 40, k = 1 + rng() % 4;
    std::vector<std::string> truth, pred;
    std::vector<LabeledPrediction> lp;
    for (std::size_t i = 0; i < n; ++i) {
      truth.push_back(pool[rng() % k]);
      pred.push_back(rng() % 3 == 0 ? truth.back() : pool[rng() % pool.size()]);
      LabeledPrediction p;
      p.truth = truth.back();
      if (pred.back() != kUnknownLabel) p.predicted = {pred.back()};
      lp.push_back(p);
    }
    auto got = classification_metrics(lp);
    auto want = reference_metrics(truth, pred);
    double d = std::max({std::abs(got.precision - want.precision), std::abs(got.recall - want.recall),
                         std::abs(got.f1 - want.f1)});
    worst = std::max(worst, d);
    good += d <= 1e-12;
  }
  return {good == 20, std::to_string(good) + "/20 setups agree" + format(", max deviation %.2e", worst)};
}

// ---- determinism (criterion 9) ---------------------------------------------

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& cmd) {
  int status = std::system((cmd + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome criterion_determinism() {
  auto root = fs::temp_directory_path() / ("crossmatch_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  io::json spec = {{"field", data_path("field.json")},
                   {"taxonomy", data_path("taxonomy.json")},
                   {"geometries", data_path("geometries.json")},
                   {"grid", {{"directions", {"right", "left"}}, {"velocities", {4, 8}}, {"angles", {0, 4}}}},
                   {"seed", 314},
                   {"noise_levels", {0.08}},
                   {"threads", 2}};
  io::save_json_file((root / "spec.json").string(), spec);
  const std::string cli = CROSSMATCH_CLI;
  std::vector<std::string> manifests, reports;
  bool ok = true;
  for (const char* run_name : {"a", "b"}) {
    auto dir = root / run_name;
    ok = ok && run(cli + " simulate --spec " + (root / "spec.json").string() + " --out " + dir.string()) == 0;
    std::string csvs;
    if (fs::exists(dir / "observations")) {
      std::vector<std::string> files;
      for (const auto& e : fs::directory_iterator(dir / "observations"))
        if (e.path().extension() == ".csv") files.push_back(e.path().string());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) csvs += " " + f;
    }
    auto cfg = (dir / "pipeline.json").string();
    ok = ok && !csvs.empty();
    ok = ok && run(cli + " detect -c " + cfg + csvs + " -o " + (dir / "events.json").string()) == 0;
    ok = ok && run(cli + " match --no-timing -c " + cfg + " " + (dir / "events.json").string() + " -o " +
                   (dir / "report.json").string()) == 0;
    manifests.push_back(slurp((dir / "manifest.json").string()));
    reports.push_back(slurp((dir / "report.json").string()));
  }
  fs::remove_all(root);
  bool same_manifest = !manifests[0].empty() && manifests[0] == manifests[1];
  bool same_report = !reports[0].empty() && reports[0] == reports[1];
  std::string detail = std::string(ok ? "commands succeeded" : "a command failed") +
                       ", manifests " + (same_manifest ? "identical" : "differ") + " (" +
                       std::to_string(manifests[0].size()) + " bytes), reports " +
                       (same_report ? "identical" : "differ") + " (" + std::to_string(reports[0].size()) + " bytes)";
  return {ok && same_manifest && same_report, detail};
}

}  // namespace

int main() {
  auto attempt = [](int id, const std::string& name, auto&& fn) {
    try {
      report(id, name, fn());
    } catch (const std::exception& e) {
      report(id, name, {false, std::string("error: ") + e.what()});
    }
  };
  auto corpus = random_corpus(1000, 20240601);
  attempt(1, "sdist oracle equivalence", [&] { return criterion_oracle(corpus); });
  attempt(2, "transpose symmetry", [&] { return criterion_transpose(corpus); });
  attempt(3, "exact self-match (36 records)", [] { return criterion_self_match(); });
  attempt(4, "noisy closed loop", [] { return criterion_noisy_loop(); });
  attempt(5, "wildcard algebra", [] { return criterion_wildcards(); });
  attempt(6, "motion estimation", [] { return criterion_motion(); });
  attempt(7, "metrics oracle", [] { return criterion_metrics(); });
  attempt(8, "bit-flip sensitivity", [&] { return criterion_bit_flip(corpus); });
  attempt(9, "determinism", [] { return criterion_determinism(); });
  std::cout << (failures ? "FAILED: " + std::to_string(failures) + " of 9 criteria" : "all 9 criteria passed")
            << std::endl;
  return failures ? 1 : 0;
}
