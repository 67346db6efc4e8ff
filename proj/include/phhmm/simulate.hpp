#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phhmm/estimate.hpp"
#include "phhmm/reservoir.hpp"

namespace phhmm {

// One simulated trajectory of a PH-HMM: the hidden regime and phase at each
// step, the emitted signal, and the sojourn segments. The final segment is
// censored when the horizon cuts a sojourn short.
struct SamplePath {
  std::vector<std::size_t> regime;          // length N
  std::vector<std::size_t> extended_state;  // length N, index into expand_model order
  Vec signal;                               // length N

  struct Segment {
    std::size_t regime;
    std::size_t entry;     // time step the regime was entered
    std::size_t duration;  // steps spent (so far, if censored)
    bool censored;
  };
  std::vector<Segment> segments;
};

// Simulates the model: draw the initial regime from beta, emit one signal
// per step while the DPH phase chain runs, jump through the embedded matrix
// on absorption, truncate at n steps. Identical seeds give identical paths.
SamplePath sample_path(const PhTypeHmm& m, std::size_t n, std::uint64_t seed);
SamplePath sample_path(const PhTypeHmm& m, std::size_t n, RandomStream& rng);

struct ReplicationConfig {
  std::size_t replicates = 100;
  std::size_t path_length = 100;
  FitConfig fit;
  std::uint64_t seed = 1;
  int workers = 1;
  // Start each replicate's EM at the true model (the estimator-consistency
  // setting: the fit tracks the optimum around the truth instead of racing
  // randomly initialized restarts). Disable for a cold-start study.
  bool warm_start_at_truth = true;
  // Moran chain settings for the dependability summaries.
  double omega = 5.0;
  double capacity = 20.0;
  std::optional<std::size_t> max_states;
  long horizon = 10;
  double zero_band_edge = 1.0;
};

// Replicated estimation study: sample M paths from the truth, fit each,
// canonically order, and average the recovered parameters and the derived
// Moran/dependability quantities. Replicate r draws from substream
// (seed, r); failures are recorded and skipped, not fatal.
struct ReplicationReport {
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::vector<std::string> failures;  // messages of failed replicates

  // Element-wise means over completed replicates, canonical regime order.
  std::vector<Vec> mean_alpha;      // per regime
  std::vector<Matrix> mean_transient;
  Matrix mean_jump;
  Matrix mean_ptilde;
  Matrix mean_moran;

  // True-model references on the same layout.
  Matrix true_moran;
  Vec true_mttf;                    // per non-empty state v = 1..k-1
  Matrix true_reliability;          // (k-1) x (horizon+1), row v-1
  Matrix true_availability;         // k x (horizon+1)
  Matrix mean_reliability;          // averaged over replicates
  Matrix mean_availability;
  std::vector<Vec> mttf_samples;    // per non-empty state: completed-replicate values
  Vec mean_mttf;
};

ReplicationReport replication_study(const PhTypeHmm& true_model, const ReplicationConfig& cfg);

// Pointwise bootstrap prediction bands for a future signal window.
struct ForecastBands {
  std::size_t horizon = 0;
  std::size_t replicates = 0;
  std::uint64_t seed = 0;
  Vec mean;                    // per step, length horizon
  Vec levels;                  // quantile levels in (0,1), ascending
  std::vector<Vec> quantiles;  // quantiles[q][step]
};

struct ForecastConfig {
  std::size_t horizon = 5;
  std::size_t replicates = 500;
  std::uint64_t seed = 1;
  int workers = 1;
  Vec levels = {0.05, 0.25, 0.75, 0.95};
  // When set, the hidden state is initialized from the filtered terminal
  // posterior of this observed series; otherwise paths start from beta.
  std::optional<std::vector<double>> history;
};

ForecastBands forecast(const PhTypeHmm& m, const ForecastConfig& cfg);

// Type-7 empirical quantile (linear interpolation between order statistics)
// of an unsorted sample; used for the forecast bands.
double sample_quantile(Vec values, double level);

}  // namespace phhmm
