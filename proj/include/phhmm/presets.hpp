#pragma once

#include <string>
#include <vector>

#include "phhmm/model.hpp"

namespace phhmm {

// Two-regime demonstration model: a "no inflow" regime emitting 0 and a
// "rain" regime emitting Poisson(5) counts, both with two-phase sojourn
// laws. Used by the built-in simulation study (release 5, capacity 20).
PhTypeHmm preset_two_regime_demo();

// Three-regime annual-inflow model of the Quiebrajano reservoir (drought /
// dry / wet), with exponential inflow densities, a cyclic embedded chain
// and sojourn laws of 1, 2 and 1 phases. The initial law is uniform.
PhTypeHmm preset_quiebrajano();

std::vector<std::string> preset_names();
PhTypeHmm preset_by_name(const std::string& name);

}  // namespace phhmm
