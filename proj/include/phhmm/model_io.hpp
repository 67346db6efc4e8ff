#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "phhmm/model.hpp"

namespace phhmm {

struct FitMetadata {
  double loglik = 0.0;
  double aic = 0.0;
  long iterations = 0;
  std::uint64_t seed = 0;
  std::size_t parameter_count = 0;
};

// Model persistence. JSON with an explicit schema_version; every numeric
// parameter is stored as a 17-significant-digit decimal string, so write ->
// read -> write is byte-identical and values survive exactly. Loading
// re-runs full model validation.
std::string model_to_json(const PhTypeHmm& m,
                          const std::optional<FitMetadata>& fit_meta = std::nullopt);
PhTypeHmm model_from_json(const std::string& text, std::optional<FitMetadata>* fit_meta = nullptr);

void save_model(const PhTypeHmm& m, const std::string& path,
                const std::optional<FitMetadata>& fit_meta = std::nullopt);
PhTypeHmm load_model(const std::string& path, std::optional<FitMetadata>* fit_meta = nullptr);

}  // namespace phhmm
