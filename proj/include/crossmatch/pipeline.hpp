#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include "crossmatch/core/error.hpp"
#include "crossmatch/core/taxonomy.hpp"
#include "crossmatch/eval/ranking.hpp"
#include "crossmatch/inverse/classifier.hpp"
#include "crossmatch/inverse/inverse.hpp"
#include "crossmatch/io/config.hpp"
#include "crossmatch/matching/match.hpp"
#include "crossmatch/sim/library.hpp"

namespace crossmatch {

struct EventResult {
  std::string event_id;
  InverseResult inverse;
  std::size_t h_real_size = 0;
  MatchOutcome outcome;
  GroupRanking ranking;
  double wall_time_s = 0.0;
};

/// One configured inverse + matching pass over a loaded library. The initial
/// hypothesis set H_0 is the library grid itself.
class Pipeline {
public:
  Pipeline(const SimulationLibrary& lib, const Taxonomy* taxonomy, io::PipelineConfig cfg)
      : lib_(lib), taxonomy_(taxonomy), cfg_(std::move(cfg)), h0_(Provenance::initial) {
    require(!lib_.records.empty(), "simulation library is empty");
    if (cfg_.dt)
      require(std::abs(*cfg_.dt - lib_.dt()) <= 1e-12 * std::max(1.0, lib_.dt()),
              "configured dt " + io::format_double(*cfg_.dt) + " does not match the library dt " +
                  io::format_double(lib_.dt()));
    tol_ = cfg_.tolerances.value_or(default_tolerances(lib_.grid));
    for (const auto& h : lib_.hypotheses()) h0_.insert(h);
    if (taxonomy_) {
      for (const auto& r : lib_.records) taxonomy_->validate(r.hypothesis.label);
      classifier_ = std::make_unique<SpanBinClassifier>(
          cfg_.classifier.bins ? SpanBinClassifier(*cfg_.classifier.bins)
                               : SpanBinClassifier::calibrate(lib_.records, lib_.field, cfg_.classifier.margin));
    }
  }

  const SimulationLibrary& library() const { return lib_; }
  const MatchTolerances& tolerances() const { return tol_; }
  const HypothesisSet& h0() const { return h0_; }
  const Classifier* classifier() const { return classifier_.get(); }

  EventResult process(const Event& event) const {
    auto start = std::chrono::steady_clock::now();
    EventResult r;
    r.event_id = event.id;
    r.inverse = run_inverse(event, lib_.field, cfg_.inverse, classifier_.get(), taxonomy_);
    auto h_real = build_h_real(r.inverse, h0_, tol_);
    r.h_real_size = h_real.size();
    // An inverse result that contradicts every member of H_0 leaves nothing to match.
    if (!h_real.empty()) {
      r.outcome = match(event, h_real, lib_, tol_, cfg_.match);
      r.ranking = group_ranks(r.outcome.scores);
    }
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
  }

private:
  const SimulationLibrary& lib_;
  const Taxonomy* taxonomy_;
  io::PipelineConfig cfg_;
  MatchTolerances tol_;
  HypothesisSet h0_;
  std::unique_ptr<SpanBinClassifier> classifier_;
};

}  // namespace crossmatch
