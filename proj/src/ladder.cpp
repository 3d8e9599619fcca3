#include "srpanova/ladder.hpp"

#include <algorithm>

#include "srpanova/error.hpp"

namespace srp {

std::size_t LadderResult::class_of(const std::string& label) const {
  for (std::size_t c = 0; c < classes.size(); ++c) {
    for (auto m : classes[c].members.members) {
      if (specs[m].label == label) return c;
    }
  }
  throw InputError("label not in the ladder: " + label);
}

LadderResult run_ladder(const FactorDesign& design, const Dataset& data, const IcarModel& icar,
                        const McmcConfig& config, const LadderOptions& options) {
  config.validate(true);
  LadderResult r;
  for (auto& s : enumerate_ladder(design)) {
    if (options.families.empty() ||
        std::find(options.families.begin(), options.families.end(), s.family) != options.families.end()) {
      r.specs.push_back(std::move(s));
    }
  }
  if (r.specs.empty()) throw InputError("no ladder entries selected");

  std::vector<StructuralClass> classes;
  if (options.dedup) {
    classes = dedup_structural(r.specs);
  } else {
    for (std::size_t i = 0; i < r.specs.size(); ++i) classes.push_back(StructuralClass{{i}});
  }

  std::vector<FitScore> scores;
  for (auto& cls : classes) {
    ClassFit cf;
    cf.members = cls;
    FitScore shared;
    try {
      FitResult f = fit(r.specs[cls.representative()], data, icar, config, design);
      if (options.keep_summaries) cf.summary = summarize(f, data, design);
      f.release_draws();
      shared = f.score();
      cf.fit = std::move(f);
    } catch (const std::exception& e) {
      cf.error = e.what();
      shared.failed = true;
    }
    for (auto m : cls.members) {
      FitScore s = shared;
      s.family = r.specs[m].family;
      s.label = r.specs[m].label;
      scores.push_back(std::move(s));
    }
    r.classes.push_back(std::move(cf));
  }
  r.table = comparison_table(std::move(scores));
  return r;
}

}  // namespace srp
