#include "phhmm/presets.hpp"

#include "phhmm/common.hpp"

namespace phhmm {

PhTypeHmm preset_two_regime_demo() {
  std::vector<DiscretePhaseType> sojourn;
  sojourn.push_back(DiscretePhaseType::validate({0.5, 0.5}, {{0.5, 0.4}, {0.3, 0.5}}));
  sojourn.push_back(DiscretePhaseType::validate({0.5, 0.5}, {{0.3, 0.3}, {0.2, 0.5}}));
  std::vector<EmissionLaw> emission{DegenerateEmission{0.0}, PoissonEmission{5.0}};
  return PhTypeHmm::validate({"calm", "rain"}, {0.6, 0.4}, {{0.0, 1.0}, {1.0, 0.0}},
                             std::move(sojourn), std::move(emission));
}

PhTypeHmm preset_quiebrajano() {
  std::vector<DiscretePhaseType> sojourn;
  sojourn.push_back(DiscretePhaseType::validate({1.0}, {{0.0}}));  // drought: one year
  sojourn.push_back(DiscretePhaseType::validate({1.0, 0.0}, {{0.2651, 0.7349}, {0.0, 0.2254}}));
  sojourn.push_back(DiscretePhaseType::validate({1.0}, {{0.9543}}));  // wet: geometric
  std::vector<EmissionLaw> emission{ExponentialEmission{6.006}, ExponentialEmission{0.626},
                                    ExponentialEmission{0.071}};
  const Matrix jump{{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0}};
  return PhTypeHmm::validate({"drought", "dry", "wet"}, {1.0 / 3, 1.0 / 3, 1.0 / 3}, jump,
                             std::move(sojourn), std::move(emission));
}

std::vector<std::string> preset_names() { return {"two-regime-demo", "quiebrajano"}; }

PhTypeHmm preset_by_name(const std::string& name) {
  if (name == "two-regime-demo") return preset_two_regime_demo();
  if (name == "quiebrajano") return preset_quiebrajano();
  throw DataError("unknown preset '" + name + "'; available: two-regime-demo, quiebrajano");
}

}  // namespace phhmm
