#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mintops/world.hpp"

namespace mintops::world {

/// Generation knobs. Families:
///  - "shortcut": walls crossed by region-covered shortcuts plus off-path
///    regions that never change the plan;
///  - "passive-mix": fixed layouts that stress the passive baselines, the
///    layout chosen by `kind` or by the seed when `kind` is empty;
///  - "decoy": goal ambiguity only, several labelled boxes and one person.
struct GenParams {
  std::string family = "shortcut";
  int width = 20;
  int height = 11;
  int regions = 2;
  double off_path = 0.5;
  int candidates = 1;
  double obstacle_density = 0.0;
  std::string kind;
  int count = 1;  // suite size when used as a suite spec

  friend bool operator==(const GenParams&, const GenParams&) = default;
};

/// Parses "key=value,key=value". Throws ValidationError on unknown keys or bad values.
GenParams parse_gen_params(std::string_view spec);
std::string to_string(const GenParams& params);

/// Passive-mix layouts in the order they recur along consecutive seeds.
const std::vector<std::string>& passive_mix_pattern();

/// Deterministic for fixed (seed, params). Throws ValidationError when the
/// parameters cannot be realized.
Scenario generate_scenario(std::uint64_t seed, const GenParams& params);

/// Scenarios for seeds seed, seed+1, ..., seed+count-1.
std::vector<Scenario> generate_suite(std::uint64_t seed, int count, const GenParams& params);

}  // namespace mintops::world
