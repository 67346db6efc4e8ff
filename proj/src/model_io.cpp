#include "phhmm/model_io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "phhmm/common.hpp"

namespace phhmm {

namespace {

using json = nlohmann::ordered_json;

json encode_vec(const Vec& v) {
  json out = json::array();
  for (double x : v) out.push_back(format_double_exact(x));
  return out;
}

json encode_matrix(const Matrix& m) {
  json out = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) out.push_back(encode_vec(m.row(r)));
  return out;
}

double decode_number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string text = j.get<std::string>();
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size())
      throw DataError("model file: cannot parse number '" + text + "' in " + where);
    return v;
  }
  throw DataError("model file: expected a number in " + where);
}

Vec decode_vec(const json& j, const std::string& where) {
  if (!j.is_array()) throw DataError("model file: expected an array in " + where);
  Vec v;
  v.reserve(j.size());
  for (const auto& x : j) v.push_back(decode_number(x, where));
  return v;
}

Matrix decode_matrix(const json& j, const std::string& where) {
  if (!j.is_array()) throw DataError("model file: expected a matrix in " + where);
  if (j.empty()) return Matrix();
  const std::size_t cols = j.front().size();
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vec row = decode_vec(j[r], where);
    if (row.size() != cols) throw DataError("model file: ragged matrix in " + where);
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
  }
  return m;
}

json encode_emission(const EmissionLaw& law) {
  json out;
  out["family"] = emission_family_name(law);
  if (const auto* d = std::get_if<DegenerateEmission>(&law)) {
    out["value"] = format_double_exact(d->value);
  } else if (const auto* c = std::get_if<CategoricalEmission>(&law)) {
    out["alphabet"] = encode_vec(c->alphabet);
    out["probs"] = encode_vec(c->probs);
  } else if (const auto* p = std::get_if<PoissonEmission>(&law)) {
    out["lambda"] = format_double_exact(p->lambda);
  } else {
    out["rate"] = format_double_exact(std::get<ExponentialEmission>(law).rate);
  }
  return out;
}

EmissionLaw decode_emission(const json& j, std::size_t index) {
  const std::string where = "emission[" + std::to_string(index) + "]";
  if (!j.contains("family")) throw DataError("model file: missing family in " + where);
  const std::string family = j.at("family").get<std::string>();
  if (family == "degenerate") return DegenerateEmission{decode_number(j.at("value"), where)};
  if (family == "categorical")
    return CategoricalEmission{decode_vec(j.at("alphabet"), where),
                               decode_vec(j.at("probs"), where)};
  if (family == "poisson") return PoissonEmission{decode_number(j.at("lambda"), where)};
  if (family == "exponential") return ExponentialEmission{decode_number(j.at("rate"), where)};
  throw DataError("model file: unknown emission family '" + family + "' in " + where);
}

}  // namespace

std::string model_to_json(const PhTypeHmm& m, const std::optional<FitMetadata>& fit_meta) {
  json out;
  out["schema_version"] = 1;
  out["regimes"] = m.regime_labels();
  out["beta"] = encode_vec(m.beta());
  out["jump"] = encode_matrix(m.jump());
  json sojourn = json::array();
  for (const auto& s : m.sojourn()) {
    json d;
    d["alpha"] = encode_vec(s.alpha());
    d["T"] = encode_matrix(s.transient());
    sojourn.push_back(std::move(d));
  }
  out["sojourn"] = std::move(sojourn);
  json emission = json::array();
  for (const auto& law : m.emission()) emission.push_back(encode_emission(law));
  out["emission"] = std::move(emission);
  if (fit_meta) {
    json meta;
    meta["loglik"] = format_double_exact(fit_meta->loglik);
    meta["aic"] = format_double_exact(fit_meta->aic);
    meta["iterations"] = fit_meta->iterations;
    meta["seed"] = fit_meta->seed;
    meta["parameter_count"] = fit_meta->parameter_count;
    out["fit"] = std::move(meta);
  }
  return out.dump(2) + "\n";
}

PhTypeHmm model_from_json(const std::string& text, std::optional<FitMetadata>* fit_meta) {
  json in;
  try {
    in = json::parse(text);
  } catch (const std::exception& ex) {
    throw DataError(std::string("model file: invalid JSON: ") + ex.what());
  }
  if (!in.contains("schema_version") || in.at("schema_version").get<int>() != 1)
    throw DataError("model file: missing or unsupported schema_version (expected 1)");
  for (const char* key : {"regimes", "beta", "jump", "sojourn", "emission"})
    if (!in.contains(key)) throw DataError(std::string("model file: missing field '") + key + "'");

  std::vector<std::string> labels = in.at("regimes").get<std::vector<std::string>>();
  Vec beta = decode_vec(in.at("beta"), "beta");
  Matrix jump = decode_matrix(in.at("jump"), "jump");

  std::vector<DiscretePhaseType> sojourn;
  for (std::size_t i = 0; i < in.at("sojourn").size(); ++i) {
    const auto& d = in.at("sojourn")[i];
    const std::string where = "sojourn[" + std::to_string(i) + "]";
    sojourn.push_back(DiscretePhaseType::validate(decode_vec(d.at("alpha"), where),
                                                  decode_matrix(d.at("T"), where)));
  }
  std::vector<EmissionLaw> emission;
  for (std::size_t i = 0; i < in.at("emission").size(); ++i)
    emission.push_back(decode_emission(in.at("emission")[i], i));

  if (fit_meta) {
    fit_meta->reset();
    if (in.contains("fit")) {
      const auto& meta = in.at("fit");
      FitMetadata fm;
      fm.loglik = decode_number(meta.at("loglik"), "fit.loglik");
      fm.aic = decode_number(meta.at("aic"), "fit.aic");
      fm.iterations = meta.value("iterations", 0L);
      fm.seed = meta.value("seed", std::uint64_t{0});
      fm.parameter_count = meta.value("parameter_count", std::size_t{0});
      *fit_meta = fm;
    }
  }
  return PhTypeHmm::validate(std::move(labels), std::move(beta), std::move(jump),
                             std::move(sojourn), std::move(emission));
}

void save_model(const PhTypeHmm& m, const std::string& path,
                const std::optional<FitMetadata>& fit_meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << model_to_json(m, fit_meta);
  if (!out) throw DataError(path + ": write failed");
}

PhTypeHmm load_model(const std::string& path, std::optional<FitMetadata>* fit_meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str(), fit_meta);
}

}  // namespace phhmm
