#pragma once

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/taxonomy.hpp"
#include "crossmatch/detection/events.hpp"
#include "crossmatch/eval/metrics.hpp"
#include "crossmatch/eval/ranking.hpp"
#include "crossmatch/io/json_io.hpp"
#include "crossmatch/io/readings_csv.hpp"
#include "crossmatch/pipeline.hpp"

namespace crossmatch::io {

inline constexpr int kEventsSchemaVersion = 1;
inline constexpr int kMatchSchemaVersion = 1;
inline constexpr int kTruthSchemaVersion = 1;
inline constexpr int kEvalSchemaVersion = 1;

// Smallest positive spacing between consecutive readings of one sensor.
inline std::optional<double> sample_interval(std::span<const Reading> readings) {
  std::map<std::string, double> last;
  std::optional<double> best;
  for (const auto& r : readings) {
    auto [it, fresh] = last.try_emplace(r.sensor_id, r.t);
    if (!fresh) {
      double d = r.t - it->second;
      if (d > 0 && (!best || d < *best)) best = d;
      it->second = r.t;
    }
  }
  return best;
}

// ---- events ---------------------------------------------------------------

struct EventFile {
  std::optional<double> sample_dt;
  std::vector<Event> events;
};

inline json events_to_json(std::span<const Event> events, const SensorField& field,
                            std::optional<double> sample_dt) {
  json arr = json::array();
  for (const auto& e : events) {
    json frames = json::array();
    for (const auto& f : e.frames) {
      json ids = json::array();
      for (auto c : f.active) ids.push_back(field.sensor(c).id);
      frames.push_back({{"t", f.t}, {"active", ids}, {"magnitudes", f.magnitudes}});
    }
    arr.push_back({{"id", e.id}, {"t0", e.t0}, {"tk", e.tk}, {"frames", frames}});
  }
  return {{"schema_version", kEventsSchemaVersion},
          {"sample_dt", sample_dt ? json(*sample_dt) : json(nullptr)},
          {"events", arr}};
}

/// Rebuilds events against `field`; sensor ids absent from it are an error.
inline EventFile events_from_json(const json& j, const SensorField& field, const std::string& source = "events") {
  require(get_field<int>(j, "schema_version", source) == kEventsSchemaVersion, source + ": unsupported schema_version");
  EventFile out;
  if (j.contains("sample_dt") && !j["sample_dt"].is_null()) out.sample_dt = j["sample_dt"].get<double>();
  for (const auto& je : get_field<json>(j, "events", source)) {
    Event e;
    e.id = get_field<std::string>(je, "id", source);
    const std::string ctx = source + ": event '" + e.id + "'";
    e.t0 = get_field<double>(je, "t0", ctx);
    e.tk = get_field<double>(je, "tk", ctx);
    for (const auto& jf : get_field<json>(je, "frames", ctx)) {
      ActivationFrame f;
      f.t = get_field<double>(jf, "t", ctx);
      auto ids = get_field<std::vector<std::string>>(jf, "active", ctx);
      auto mags = get_or<std::vector<double>>(jf, "magnitudes", {}, ctx);
      require(mags.empty() || mags.size() == ids.size(), ctx + ": magnitudes and active ids differ in length");
      std::vector<std::pair<std::size_t, double>> cols;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        auto c = field.index_of(ids[i]);
        require(c.has_value(), ctx + ": unknown sensor '" + ids[i] + "'");
        cols.emplace_back(*c, mags.empty() ? 1.0 : mags[i]);
      }
      std::sort(cols.begin(), cols.end());
      for (auto [c, m] : cols) {
        f.active.push_back(c);
        f.magnitudes.push_back(m);
      }
      require(!f.active.empty(), ctx + ": frame at t=" + format_double(f.t) + " has no active sensor");
      require(e.frames.empty() || f.t > e.frames.back().t, ctx + ": frames must be strictly increasing in t");
      e.frames.push_back(std::move(f));
    }
    require(!e.frames.empty(), ctx + ": no frames");
    out.events.push_back(std::move(e));
  }
  return out;
}

// ---- match reports --------------------------------------------------------

inline json to_json(const InverseResult& r) {
  return {{"motion", to_json(r.motion)},
          {"category", opt_json(r.category)},
          {"scenario", r.diagnostics.scenario()},
          {"clusters", r.diagnostics.clusters},
          {"determined",
           {{"direction", r.diagnostics.direction},
            {"velocity", r.diagnostics.velocity},
            {"angle", r.diagnostics.angle},
            {"category", r.diagnostics.classified}}}};
}

inline json to_json(const EventResult& r, bool with_timing) {
  const auto& o = r.outcome;
  bool matched = o.status == MatchStatus::matched;
  json scores = json::array();
  for (const auto& s : o.scores)
    scores.push_back({{"simulation_id", s.score.simulation_id},
                      {"hypothesis", to_json(s.hypothesis)},
                      {"sdist", s.score.sdist},
                      {"best_offset", s.score.best_offset}});
  json groups = json::array();
  for (std::size_t i = 0; i < r.ranking.groups.size(); ++i) {
    json ids = json::array();
    for (const auto& m : r.ranking.groups[i].members) ids.push_back(m.score.simulation_id);
    groups.push_back({{"rank", r.ranking.rank_of_group(i)}, {"sdist", r.ranking.groups[i].sdist}, {"members", ids}});
  }
  json final_set = json::array();
  for (const auto& h : o.h_final) final_set.push_back(to_json(h));
  json j = {{"event_id", r.event_id},
            {"status", matched ? "matched" : "no_compatible_simulation"},
            {"outcome", matched ? "classified" : kUnknownLabel},
            {"inverse", to_json(r.inverse)},
            {"h_real_size", r.h_real_size},
            {"h_red_size", o.h_red_size},
            {"min_sdist", matched ? json(o.min_sdist) : json(nullptr)},
            {"h_final", final_set},
            {"scores", scores},
            {"groups", groups}};
  if (with_timing) j["wall_time_s"] = r.wall_time_s;
  return j;
}

// What evaluation needs back from a report entry.
struct ReportedEvent {
  std::string event_id;
  bool matched = false;
  std::vector<Hypothesis> h_final;
  std::vector<ScoredHypothesis> scores;
};

inline std::vector<ReportedEvent> read_match_report(const json& j, const std::string& source) {
  require(get_field<int>(j, "schema_version", source) == kMatchSchemaVersion, source + ": unsupported schema_version");
  std::vector<ReportedEvent> out;
  for (const auto& je : get_field<json>(j, "events", source)) {
    ReportedEvent e;
    e.event_id = get_field<std::string>(je, "event_id", source);
    const std::string ctx = source + ": event '" + e.event_id + "'";
    e.matched = get_field<std::string>(je, "status", ctx) == "matched";
    for (const auto& h : get_field<json>(je, "h_final", ctx)) e.h_final.push_back(hypothesis_from_json(h));
    for (const auto& s : get_field<json>(je, "scores", ctx)) {
      ScoredHypothesis sh;
      sh.hypothesis = hypothesis_from_json(get_field<json>(s, "hypothesis", ctx));
      sh.score.simulation_id = get_field<std::string>(s, "simulation_id", ctx);
      sh.score.sdist = get_field<std::uint64_t>(s, "sdist", ctx);
      sh.score.best_offset = get_field<std::int64_t>(s, "best_offset", ctx);
      e.scores.push_back(std::move(sh));
    }
    out.push_back(std::move(e));
  }
  return out;
}

// ---- truth labels ---------------------------------------------------------

// Observation id -> true hypothesis; an empty optional marks an unlabeled id.
using TruthTable = std::map<std::string, std::optional<Hypothesis>>;

inline json truth_to_json(const TruthTable& t) {
  json m = json::object();
  for (const auto& [id, h] : t) m[id] = h ? to_json(*h) : json(nullptr);
  return {{"schema_version", kTruthSchemaVersion}, {"truth", m}};
}

inline TruthTable truth_from_json(const json& j, const std::string& source) {
  require(get_field<int>(j, "schema_version", source) == kTruthSchemaVersion, source + ": unsupported schema_version");
  TruthTable t;
  auto entries = get_field<json>(j, "truth", source);
  for (const auto& [id, h] : entries.items())
    t[id] = h.is_null() ? std::nullopt : std::optional<Hypothesis>(hypothesis_from_json(h));
  return t;
}

// Event ids look like "<observation>:e<k>"; truth may be keyed by either.
inline const std::optional<Hypothesis>* find_truth(const TruthTable& t, const std::string& event_id) {
  if (auto it = t.find(event_id); it != t.end()) return &it->second;
  auto colon = event_id.rfind(':');
  if (colon != std::string::npos)
    if (auto it = t.find(event_id.substr(0, colon)); it != t.end()) return &it->second;
  return nullptr;
}

// ---- evaluation -----------------------------------------------------------

struct EvaluationInput {
  std::vector<ReportedEvent> events;
  TruthTable truth;
};

struct LevelEvaluation {
  EvalReport report;
  std::size_t unlabeled = 0;
};

/// Metrics and true-class ranks at one taxonomy level. Every reported event
/// must have a truth entry; missing ones are listed in the error.
inline LevelEvaluation evaluate_level(const EvaluationInput& in, const std::string& level, const Taxonomy& taxonomy) {
  require(taxonomy.has_level(level), "unknown taxonomy level '" + level + "'");
  std::vector<std::string> missing;
  for (const auto& e : in.events)
    if (!find_truth(in.truth, e.event_id)) missing.push_back(e.event_id);
  if (!missing.empty()) {
    std::string msg = "no truth entry for event id(s):";
    for (const auto& m : missing) msg += " " + m;
    throw ValidationError(msg);
  }
  LevelEvaluation out;
  std::vector<LabeledPrediction> preds;
  std::vector<std::optional<std::size_t>> ranks;
  for (const auto& e : in.events) {
    const auto& truth = *find_truth(in.truth, e.event_id);
    if (!truth) {
      ++out.unlabeled;
      continue;
    }
    auto want = label_at_level(truth->label, level, taxonomy);
    require(want.has_value(), "truth for '" + e.event_id + "' has no label at level '" + level + "'");
    LabeledPrediction p;
    p.truth = *want;
    if (e.matched)
      for (const auto& h : e.h_final)
        if (auto l = label_at_level(h.label, level, taxonomy)) p.predicted.push_back(*l);
    preds.push_back(std::move(p));
    ranks.push_back(e.matched ? true_class_rank(group_ranks(e.scores), truth->label, level, taxonomy) : std::nullopt);
  }
  require(!preds.empty(), "no labelled events to evaluate");
  out.report = classification_metrics(preds, level);
  out.report.ranks = rank_histogram(ranks);
  return out;
}

inline json to_json(const LevelEvaluation& ev) {
  const auto& r = ev.report;
  json classes = json::object();
  for (const auto& [label, m] : r.per_class)
    classes[label] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
                      {"support", m.support}, {"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}};
  json confusion = json::array();
  for (const auto& [k, n] : r.confusion) confusion.push_back({{"truth", k.first}, {"predicted", k.second}, {"count", n}});
  json hist = json::array();
  for (const auto& [rank, n] : r.ranks.counts) hist.push_back({{"rank", rank}, {"count", n}});
  return {{"schema_version", kEvalSchemaVersion},
          {"level", r.level},
          {"examples", r.examples},
          {"unlabeled", ev.unlabeled},
          {"tie_rule", "lexicographically smallest label"},
          {"tie_resolutions", r.tie_resolutions},
          {"weighted", {{"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}}},
          {"accuracy", r.accuracy},
          {"per_class", classes},
          {"confusion", confusion},
          {"rank_histogram", {{"counts", hist}, {"absent", r.ranks.absent}}}};
}

inline std::string metrics_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "class,precision,recall,f1,support\n";
  for (const auto& [label, m] : r.per_class)
    os << label << ',' << format_double(m.precision) << ',' << format_double(m.recall) << ','
       << format_double(m.f1) << ',' << m.support << '\n';
  os << "weighted," << format_double(r.precision) << ',' << format_double(r.recall) << ',' << format_double(r.f1)
     << ',' << r.examples << '\n';
  return os.str();
}

inline std::string rank_histogram_csv(const RankHistogram& h) {
  std::ostringstream os;
  os << "rank,count\n";
  for (const auto& [rank, n] : h.counts) os << rank << ',' << n << '\n';
  return os.str();
}

inline void save_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size())))
    throw IoError("cannot write '" + path + "'");
}

}  // namespace crossmatch::io
