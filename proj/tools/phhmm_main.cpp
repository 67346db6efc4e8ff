#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phhmm/common.hpp"
#include "phhmm/estimate.hpp"
#include "phhmm/model_io.hpp"
#include "phhmm/presets.hpp"
#include "phhmm/reservoir.hpp"
#include "phhmm/series.hpp"
#include "phhmm/simulate.hpp"

namespace {

using namespace phhmm;

std::string num(double x) { return format_double(x, 12); }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << content;
  if (!out) throw DataError(path + ": write failed");
}

PhTypeHmm load_model_arg(const std::string& model_path, const std::string& preset) {
  if (!model_path.empty() && !preset.empty())
    throw DataError("give either --model or --preset, not both");
  if (!model_path.empty()) return load_model(model_path);
  if (!preset.empty()) return preset_by_name(preset);
  throw DataError("a model is required: --model FILE or --preset NAME");
}

FitFamily family_from_name(const std::string& name) {
  if (name == "categorical") return FitFamily::Categorical;
  if (name == "poisson") return FitFamily::Poisson;
  if (name == "exponential") return FitFamily::Exponential;
  if (name == "degenerate") return FitFamily::Degenerate;
  throw DataError("unknown emission family '" + name +
                  "' (categorical, poisson, exponential, degenerate)");
}

struct FitFlags {
  std::string data_path;
  int regimes = 2;
  std::vector<std::size_t> phases;
  std::string emission = "categorical";
  long max_iter = 500;
  double tol = 1e-8;
  int restarts = 20;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;
};

void add_fit_config_flags(CLI::App* cmd, FitFlags& f) {
  cmd->add_option("--regimes", f.regimes, "Number of hidden regimes")->check(CLI::PositiveNumber);
  cmd->add_option("--phases", f.phases,
                  "Sojourn phase count per regime (default: 1 for each regime)");
  cmd->add_option("--emission", f.emission,
                  "Emission family: categorical, poisson, exponential, degenerate");
  cmd->add_option("--max-iter", f.max_iter, "EM iteration cap");
  cmd->add_option("--tol", f.tol, "Relative log-likelihood stopping tolerance");
  cmd->add_option("--restarts", f.restarts, "Random restarts");
  cmd->add_option("--workers", f.workers, "Worker threads (never changes results)");
}

FitConfig make_fit_config(const FitFlags& f) {
  FitConfig cfg;
  cfg.phase_layout.assign(static_cast<std::size_t>(f.regimes), 1);
  if (!f.phases.empty()) {
    if (f.phases.size() != static_cast<std::size_t>(f.regimes))
      throw DataError("--phases needs one value per regime");
    cfg.phase_layout = f.phases;
  }
  cfg.family = family_from_name(f.emission);
  cfg.max_iterations = f.max_iter;
  cfg.tol = f.tol;
  cfg.restarts = f.restarts;
  cfg.seed = f.seed;
  cfg.workers = f.workers;
  return cfg;
}

int cmd_fit(const FitFlags& flags) {
  const InflowSeries series = ingest_csv(flags.data_path);
  const FitConfig cfg = make_fit_config(flags);
  const FitReport report = fit(series.inflow, cfg);

  std::cout << "loglik " << num(report.loglik) << "\n";
  std::cout << "aic " << num(report.aic) << "\n";
  std::cout << "parameters " << report.parameter_count << "\n";
  std::cout << "iterations " << report.iterations << "\n";
  std::cout << "restarts " << cfg.restarts << " failed " << report.failed_restarts << "\n";
  for (std::size_t i = 0; i < report.model.num_regimes(); ++i) {
    const auto& law = report.model.emission()[i];
    std::cout << "regime " << report.model.regime_labels()[i] << " emission "
              << emission_family_name(law) << " mean " << num(emission_mean(law))
              << " sojourn_mean " << num(report.model.sojourn()[i].mean()) << "\n";
  }

  if (!flags.out.empty()) {
    FitMetadata meta;
    meta.loglik = report.loglik;
    meta.aic = report.aic;
    meta.iterations = report.iterations;
    meta.seed = cfg.seed;
    meta.parameter_count = report.parameter_count;
    save_model(report.model, flags.out, meta);
    std::cout << "model written to " << flags.out << "\n";
  }
  return 0;
}

std::string moran_csv(const Matrix& m, const std::string& kind) {
  std::ostringstream out;
  out << "kind,row,col,value\n";
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out << kind << "," << r << "," << c << "," << num(m(r, c)) << "\n";
  return out.str();
}

int cmd_reliability(const std::string& model_path, const std::string& preset, double release,
                    double capacity, long horizon, std::size_t max_states, double zero_band,
                    const std::string& out_path, const std::string& matrix_out) {
  const PhTypeHmm model = load_model_arg(model_path, preset);
  const ExtendedHmm extended = expand_model(model);
  const std::size_t n0 = static_cast<std::size_t>(std::floor(capacity / release));
  const InflowLaw law = marginal_inflow_law(extended, release, n0, zero_band);
  const MoranChain chain =
      moran_build(law, release, capacity,
                  max_states ? std::optional<std::size_t>(max_states) : std::nullopt);

  std::ostringstream table;
  table << "v,n,reliability,availability,mttf\n";
  const std::size_t k = chain.num_states();
  for (std::size_t v = 0; v < k; ++v) {
    std::string mttf_text;
    if (v > 0) {
      try {
        mttf_text = num(mttf(chain, v));
      } catch (const NumericError&) {
        mttf_text = "inf";
      }
    }
    for (long n = 0; n <= horizon; ++n) {
      table << v << "," << n << ",";
      if (v > 0) table << num(reliability(chain, v, n));
      table << "," << num(availability(chain, v, n)) << "," << mttf_text << "\n";
    }
  }
  if (out_path.empty())
    std::cout << table.str();
  else
    write_file(out_path, table.str());

  const std::string matrix_text = moran_csv(chain.p, "moran");
  if (matrix_out.empty())
    std::cout << matrix_text;
  else
    write_file(matrix_out, matrix_text);
  return 0;
}

int cmd_simulate(const std::string& model_path, const std::string& preset, const FitFlags& fitf,
                 std::size_t replicates, std::size_t length, double omega, double capacity,
                 std::size_t max_states, long horizon, double zero_band, bool cold_start,
                 bool estimate_emissions, const std::string& out_prefix) {
  const PhTypeHmm model = load_model_arg(model_path, preset);

  ReplicationConfig cfg;
  cfg.replicates = replicates;
  cfg.path_length = length;
  cfg.seed = fitf.seed;
  cfg.workers = fitf.workers;
  cfg.omega = omega;
  cfg.capacity = capacity;
  if (max_states) cfg.max_states = max_states;
  cfg.horizon = horizon;
  cfg.zero_band_edge = zero_band;
  cfg.warm_start_at_truth = !cold_start;

  FitFlags refit = fitf;
  if (refit.phases.empty()) refit.phases = model.phase_layout();
  refit.regimes = static_cast<int>(model.num_regimes());
  cfg.fit = make_fit_config(refit);
  cfg.fit.workers = 1;  // replicates fan out instead
  cfg.fit.fix_emissions = !cold_start && !estimate_emissions;
  if (!cold_start) cfg.fit.alpha_recovery = AlphaRecovery::RowAveraged;

  const ReplicationReport report = replication_study(model, cfg);
  std::cout << "replicates " << cfg.replicates << " completed " << report.completed << " failed "
            << report.failed << "\n";

  std::ostringstream est;
  est << "quantity,regime,i,j,value\n";
  for (std::size_t r = 0; r < report.mean_alpha.size(); ++r)
    for (std::size_t f = 0; f < report.mean_alpha[r].size(); ++f)
      est << "alpha," << (r + 1) << "," << f << ",," << num(report.mean_alpha[r][f]) << "\n";
  for (std::size_t r = 0; r < report.mean_transient.size(); ++r)
    for (std::size_t i = 0; i < report.mean_transient[r].rows(); ++i)
      for (std::size_t j = 0; j < report.mean_transient[r].cols(); ++j)
        est << "T," << (r + 1) << "," << i << "," << j << ","
            << num(report.mean_transient[r](i, j)) << "\n";
  for (std::size_t i = 0; i < report.mean_jump.rows(); ++i)
    for (std::size_t j = 0; j < report.mean_jump.cols(); ++j)
      est << "jump,," << i << "," << j << "," << num(report.mean_jump(i, j)) << "\n";
  for (std::size_t i = 0; i < report.mean_ptilde.rows(); ++i)
    for (std::size_t j = 0; j < report.mean_ptilde.cols(); ++j)
      est << "ptilde,," << i << "," << j << "," << num(report.mean_ptilde(i, j)) << "\n";
  write_file(out_prefix + "estimates.csv", est.str());

  write_file(out_prefix + "moran.csv",
             moran_csv(report.true_moran, "true") + moran_csv(report.mean_moran, "avg"));

  std::ostringstream curves;
  curves << "measure,source,v,n,value\n";
  auto emit_curves = [&curves](const char* measure, const char* source, const Matrix& m,
                              std::size_t v_offset) {
    for (std::size_t v = 0; v < m.rows(); ++v)
      for (std::size_t n = 0; n < m.cols(); ++n)
        curves << measure << "," << source << "," << (v + v_offset) << "," << n << ","
               << num(m(v, n)) << "\n";
  };
  emit_curves("reliability", "true", report.true_reliability, 1);
  emit_curves("reliability", "avg", report.mean_reliability, 1);
  emit_curves("availability", "true", report.true_availability, 0);
  emit_curves("availability", "avg", report.mean_availability, 0);
  write_file(out_prefix + "curves.csv", curves.str());

  std::ostringstream mt;
  mt << "source,v,replicate,value\n";
  for (std::size_t v = 0; v < report.true_mttf.size(); ++v)
    mt << "true," << (v + 1) << ",," << num(report.true_mttf[v]) << "\n";
  for (std::size_t v = 0; v < report.mean_mttf.size(); ++v)
    mt << "avg," << (v + 1) << ",," << num(report.mean_mttf[v]) << "\n";
  for (std::size_t v = 0; v < report.mttf_samples.size(); ++v)
    for (std::size_t r = 0; r < report.mttf_samples[v].size(); ++r)
      mt << "sample," << (v + 1) << "," << r << "," << num(report.mttf_samples[v][r]) << "\n";
  write_file(out_prefix + "mttf.csv", mt.str());
  return 0;
}

int cmd_forecast(const std::string& model_path, const std::string& preset, std::size_t horizon,
                 std::size_t bootstrap, std::uint64_t seed, int workers,
                 const std::string& data_path, const std::string& out_path) {
  const PhTypeHmm model = load_model_arg(model_path, preset);
  ForecastConfig cfg;
  cfg.horizon = horizon;
  cfg.replicates = bootstrap;
  cfg.seed = seed;
  cfg.workers = workers;
  if (!data_path.empty()) cfg.history = ingest_csv(data_path).inflow;
  const ForecastBands bands = forecast(model, cfg);

  std::ostringstream out;
  out << "step,mean,q05,q25,q75,q95\n";
  for (std::size_t h = 0; h < bands.horizon; ++h) {
    out << (h + 1) << "," << num(bands.mean[h]);
    for (std::size_t q = 0; q < bands.levels.size(); ++q) out << "," << num(bands.quantiles[q][h]);
    out << "\n";
  }
  if (out_path.empty())
    std::cout << out.str();
  else
    write_file(out_path, out.str());
  return 0;
}

int cmd_audit(const std::string& data_path, double capacity, const std::string& out_path) {
  const InflowSeries series = ingest_csv(data_path);
  if (!series.outflow || !series.stored)
    throw DataError("audit needs outflow_hm3 and stored_hm3 columns");
  for (std::size_t i = 0; i < series.size(); ++i)
    if ((*series.stored)[i] > capacity)
      throw DataError("stored volume in year " + std::to_string(series.year[i]) +
                      " exceeds the capacity " + num(capacity));

  const std::size_t n = series.size();
  if (n < 2) throw DataError("audit needs at least two years of records");
  const Vec inflows(series.inflow.begin(), series.inflow.end() - 1);
  const Vec outflows(series.outflow->begin(), series.outflow->end() - 1);
  const Vec recorded(series.stored->begin() + 1, series.stored->end());
  const BalanceAudit audit =
      balance_audit((*series.stored)[0], inflows, outflows, recorded, capacity);

  std::ostringstream out;
  out << "hydro_year_start,computed_hm3,recorded_hm3,discrepancy_hm3\n";
  for (std::size_t i = 0; i < audit.computed.size(); ++i)
    out << series.year[i + 1] << "," << num(audit.computed[i]) << "," << num(audit.recorded[i])
        << "," << num(audit.discrepancy[i]) << "\n";
  if (out_path.empty())
    std::cout << out.str();
  else
    write_file(out_path, out.str());

  // Largest discrepancies, most suspicious first.
  std::vector<std::size_t> order(audit.computed.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(audit.discrepancy[a]) > std::abs(audit.discrepancy[b]);
  });
  const std::size_t top = std::min<std::size_t>(3, order.size());
  for (std::size_t i = 0; i < top; ++i)
    std::cout << "discrepancy " << series.year[order[i] + 1] << " "
              << num(audit.discrepancy[order[i]]) << "\n";
  return 0;
}

int cmd_validate(const std::string& model_path, const std::string& preset,
                 const std::string& data_path) {
  std::optional<PhTypeHmm> model;
  if (!model_path.empty() || !preset.empty()) {
    model = load_model_arg(model_path, preset);
    std::cout << "model OK: " << model->num_regimes() << " regimes, "
              << model->extended_size() << " extended states\n";
  }
  std::optional<InflowSeries> series;
  if (!data_path.empty()) {
    series = ingest_csv(data_path);
    std::cout << "data OK: " << series->size() << " years (" << series->year.front() << ".."
              << series->year.back() << ")\n";
  }
  if (model && series) {
    const Trellis t = forward_pass(expand_model(*model), series->inflow);
    std::cout << "loglik " << num(t.loglik) << "\n";
  }
  if (!model && !series) throw DataError("nothing to validate: give --model, --preset or --data");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hidden phase-type Markov modelling of reservoir inflows"};
  app.require_subcommand(1);

  // Shared model-source flags.
  std::string model_path, preset, data_path, out_path, matrix_out, out_prefix = "study_";

  FitFlags fitf;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a PH-HMM to an annual inflow series");
  fit_cmd->add_option("--data", fitf.data_path, "Input CSV")->required();
  add_fit_config_flags(fit_cmd, fitf);
  fit_cmd->add_option("--seed", fitf.seed, "Random seed")->envname("PHHMM_SEED");
  fit_cmd->add_option("--out", fitf.out, "Model file to write");

  std::size_t replicates = 100, length = 100, max_states = 0, horizon_steps = 5, bootstrap = 500;
  long horizon = 10;
  double release = 5.0, capacity = 20.0, zero_band = 1.0;

  bool cold_start = false, estimate_emissions = false;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Replicated sample-and-refit study");
  sim_cmd->add_option("--model", model_path, "Model file");
  sim_cmd->add_option("--preset", preset, "Built-in model: two-regime-demo, quiebrajano");
  sim_cmd->add_option("--replicates", replicates, "Number of replicates");
  sim_cmd->add_option("--length", length, "Sample path length");
  sim_cmd->add_flag("--cold-start", cold_start,
                    "Random EM restarts instead of warm-starting each fit at the true model");
  sim_cmd->add_flag("--estimate-emissions", estimate_emissions,
                    "Re-estimate emission parameters during warm-started fits");
  sim_cmd->add_option("--release", release, "Annual release volume (hm^3)");
  sim_cmd->add_option("--capacity", capacity, "Reservoir capacity (hm^3)");
  sim_cmd->add_option("--max-states", max_states, "Merge Moran states beyond this count");
  sim_cmd->add_option("--horizon", horizon, "Dependability curve horizon");
  sim_cmd->add_option("--zero-band", zero_band, "Upper edge of the zero-inflow band (hm^3)");
  sim_cmd->add_option("--out-prefix", out_prefix, "Prefix for the emitted CSV files");
  add_fit_config_flags(sim_cmd, fitf);
  sim_cmd->add_option("--seed", fitf.seed, "Random seed")->envname("PHHMM_SEED");

  CLI::App* fc_cmd = app.add_subcommand("forecast", "Bootstrap prediction bands");
  fc_cmd->add_option("--model", model_path, "Model file");
  fc_cmd->add_option("--preset", preset, "Built-in model");
  fc_cmd->add_option("--horizon", horizon_steps, "Forecast steps");
  fc_cmd->add_option("--bootstrap", bootstrap, "Bootstrap sample paths");
  fc_cmd->add_option("--seed", fitf.seed, "Random seed")->envname("PHHMM_SEED");
  fc_cmd->add_option("--workers", fitf.workers, "Worker threads");
  fc_cmd->add_option("--data", data_path, "Observed series: start from its filtered terminal state");
  fc_cmd->add_option("--out", out_path, "Output CSV (stdout when omitted)");

  CLI::App* rel_cmd = app.add_subcommand("reliability", "Moran chain dependability table");
  rel_cmd->add_option("--model", model_path, "Model file");
  rel_cmd->add_option("--preset", preset, "Built-in model");
  rel_cmd->add_option("--release", release, "Annual release volume omega (hm^3)")->required();
  rel_cmd->add_option("--capacity", capacity, "Reservoir capacity (hm^3)")->required();
  rel_cmd->add_option("--horizon", horizon, "Table horizon in years");
  rel_cmd->add_option("--max-states", max_states, "Merge Moran states beyond this count");
  rel_cmd->add_option("--zero-band", zero_band, "Upper edge of the zero-inflow band (hm^3)");
  rel_cmd->add_option("--out", out_path, "Dependability table CSV (stdout when omitted)");
  rel_cmd->add_option("--matrix-out", matrix_out, "Moran matrix CSV (stdout when omitted)");

  CLI::App* audit_cmd = app.add_subcommand("audit", "Water-balance audit of recorded volumes");
  audit_cmd->add_option("--data", data_path, "CSV with outflow_hm3 and stored_hm3")->required();
  audit_cmd->add_option("--capacity", capacity, "Maximum capacity C1 (hm^3)")->required();
  audit_cmd->add_option("--out", out_path, "Audit CSV (stdout when omitted)");

  CLI::App* val_cmd = app.add_subcommand("validate", "Validate a model file and/or data CSV");
  val_cmd->add_option("--model", model_path, "Model file");
  val_cmd->add_option("--preset", preset, "Built-in model");
  val_cmd->add_option("--data", data_path, "Data CSV; with a model, prints its loglik");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(fit_cmd)) return cmd_fit(fitf);
    if (app.got_subcommand(sim_cmd)) {
      // A warm-started study runs one bounded EM per replicate unless the
      // user asks otherwise.
      if (!cold_start) {
        if (sim_cmd->count("--restarts") == 0) fitf.restarts = 1;
        if (sim_cmd->count("--max-iter") == 0) fitf.max_iter = 80;
        if (sim_cmd->count("--tol") == 0) fitf.tol = 1e-9;
      }
      return cmd_simulate(model_path, preset, fitf, replicates, length, release, capacity,
                          max_states, horizon, zero_band, cold_start, estimate_emissions,
                          out_prefix);
    }
    if (app.got_subcommand(fc_cmd))
      return cmd_forecast(model_path, preset, horizon_steps, bootstrap, fitf.seed, fitf.workers,
                          data_path, out_path);
    if (app.got_subcommand(rel_cmd))
      return cmd_reliability(model_path, preset, release, capacity, horizon, max_states, zero_band,
                             out_path, matrix_out);
    if (app.got_subcommand(audit_cmd)) return cmd_audit(data_path, capacity, out_path);
    if (app.got_subcommand(val_cmd)) return cmd_validate(model_path, preset, data_path);
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
