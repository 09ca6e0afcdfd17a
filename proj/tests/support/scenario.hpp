#pragma once

#include "avdelay/fusion.hpp"
#include "avdelay/synth.hpp"

namespace fixture {

// Small generated scenario shared by the pipeline tests (built once).
inline const avdelay::synth::Scenario& small_scenario() {
  static const avdelay::synth::Scenario s = [] {
    avdelay::synth::ScenarioConfig c;
    c.days = 2;
    c.flights_per_day = 300;
    c.seed = 5;
    return avdelay::synth::generate(c);
  }();
  return s;
}

inline const avdelay::fusion::FusedDataset& small_fused() {
  static const avdelay::fusion::FusedDataset f = avdelay::fusion::featurize(small_scenario().data, {});
  return f;
}

}  // namespace fixture
