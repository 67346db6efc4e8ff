#pragma once

#include <stdexcept>
#include <string>

namespace phhmm {

// Invalid model parameters, malformed input files, inconsistent series.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: singular systems, reducible chains, diverged fits.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Tolerance for stochasticity constraints on user-supplied parameters.
// Inputs within this distance of a valid value are renormalized; anything
// further off is rejected.
inline constexpr double kStochasticTol = 1e-12;

std::string format_double(double x, int significant_digits = 12);

// 17 significant digits: round-trips any double exactly through text.
inline std::string format_double_exact(double x) { return format_double(x, 17); }

}  // namespace phhmm
