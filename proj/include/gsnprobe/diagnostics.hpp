#pragma once

// Convergence, independence and stickiness diagnostics over chain logs.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gsnprobe/samplers.hpp"
#include "gsnprobe/tabular.hpp"

namespace gsnprobe::diagnostics {

// Result that may be undefined (zero variance, too few pairs).
struct Correlation {
  std::optional<double> value;
  std::size_t pairs = 0;
  std::string reason;

  bool defined() const { return value.has_value(); }
};

// Pearson correlation of (x_t, x_{t+lag}); pairs with a non-finite member
// are dropped.
Correlation autocorrelation(std::span<const double> series, std::size_t lag);

struct AcfRow {
  std::size_t lag;
  Correlation r;
};
std::vector<AcfRow> autocorrelation_by_lag(std::span<const double> series,
                                           std::span<const std::size_t> lags);

// Per-epoch energies of one chain (requires trace records for every epoch).
std::vector<double> energy_series(std::span<const ChainRecord> records, std::uint64_t chain_id);

struct EditProfile {
  std::vector<std::size_t> edits;
  std::size_t max_zero_run = 0;  // longest streak of epochs with no edits
};

EditProfile edit_rate_profile(std::span<const std::size_t> edits);
EditProfile edit_rate_profile(std::span<const ChainRecord> records, std::uint64_t chain_id);

// Smallest n with delta^(k n) < eps.
std::uint64_t independence_epochs(double delta, std::uint64_t k, double eps);

// Smallest n with [1 - (1 - delta)^k]^n < eps. Can exceed 64 bits.
boost::multiprecision::cpp_int turnover_epochs(double delta, std::uint64_t k, double eps);

// Smallest t with TV(e_start T^t, pi) < tol, where pi is the stationary
// vector of T.
std::size_t mixing_time_estimate(const tabular::TransitionMatrix& t, std::size_t start, double tol,
                                 std::size_t max_steps = 1000000);
// Same, given a precomputed stationary vector.
std::size_t mixing_time_estimate(const tabular::TransitionMatrix& t, std::span<const double> pi,
                                 std::size_t start, double tol, std::size_t max_steps = 1000000);
// Maximum over all start states.
std::size_t worst_case_mixing_time(const tabular::TransitionMatrix& t, double tol);

// Trend check of measured times against c * n ln n.
struct NLogNTrend {
  double c = 0.0;                // smallest constant bounding every point
  std::vector<double> ratios;    // t(n) / (n ln n)
  std::vector<double> residuals; // c n ln n - t(n), all nonnegative
  double ratio_slope = 0.0;      // least-squares slope of ratios against n
  bool consistent() const;       // ratio_slope <= 0
};
NLogNTrend nlogn_trend(std::span<const std::size_t> n, std::span<const double> times);

// Compares the final `window` finite energies of two chains.
struct WindowComparison {
  double mean_a = 0.0;
  double mean_b = 0.0;
  double pooled_sd = 0.0;
  double separation() const;  // |mean_a - mean_b| / pooled_sd
};
WindowComparison compare_terminal_windows(std::span<const double> a, std::span<const double> b,
                                          std::size_t window);

}  // namespace gsnprobe::diagnostics
