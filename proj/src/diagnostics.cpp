#include "gsnprobe/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "gsnprobe/error.hpp"

namespace gsnprobe::diagnostics {

namespace mp = boost::multiprecision;
using BigFloat = mp::cpp_bin_float_100;

Correlation autocorrelation(std::span<const double> series, std::size_t lag) {
  Correlation out;
  if (lag >= series.size()) {
    out.reason = "lag " + std::to_string(lag) + " is not shorter than the series";
    return out;
  }
  std::vector<double> a, b;
  for (std::size_t t = 0; t + lag < series.size(); ++t) {
    if (std::isfinite(series[t]) && std::isfinite(series[t + lag])) {
      a.push_back(series[t]);
      b.push_back(series[t + lag]);
    }
  }
  out.pairs = a.size();
  if (a.size() < 3) {
    out.reason = "fewer than 3 valid pairs";
    return out;
  }
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    out.reason = "zero variance";
    return out;
  }
  out.value = std::clamp(sab / (std::sqrt(saa) * std::sqrt(sbb)), -1.0, 1.0);
  return out;
}

std::vector<AcfRow> autocorrelation_by_lag(std::span<const double> series,
                                           std::span<const std::size_t> lags) {
  std::vector<AcfRow> rows;
  rows.reserve(lags.size());
  for (auto lag : lags) rows.push_back({lag, autocorrelation(series, lag)});
  return rows;
}

std::vector<double> energy_series(std::span<const ChainRecord> records, std::uint64_t chain_id) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.chain_id == chain_id && r.kind != RecordKind::kTruncated) out.push_back(r.energy.value);
  }
  return out;
}

EditProfile edit_rate_profile(std::span<const std::size_t> edits) {
  EditProfile p;
  p.edits.assign(edits.begin(), edits.end());
  std::size_t run = 0;
  for (auto e : edits) {
    run = e == 0 ? run + 1 : 0;
    p.max_zero_run = std::max(p.max_zero_run, run);
  }
  return p;
}

EditProfile edit_rate_profile(std::span<const ChainRecord> records, std::uint64_t chain_id) {
  std::vector<std::size_t> edits;
  for (const auto& r : records) {
    if (r.chain_id == chain_id && r.kind != RecordKind::kTruncated) edits.push_back(r.edits);
  }
  return edit_rate_profile(edits);
}

namespace {

void check_bound_args(double delta, std::uint64_t k, double eps) {
  if (!(delta > 0.0 && delta < 1.0)) throw UsageError("delta must lie in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) throw UsageError("eps must lie in (0, 1)");
  if (k < 1) throw UsageError("k must be at least 1");
}

// Smallest integer n with n * log_base < log_eps, both logs negative.
// Ratios within 1e-60 of an integer count as exact ties (strict inequality).
mp::cpp_int smallest_exceeding(const BigFloat& log_base, const BigFloat& log_eps) {
  if (log_base >= 0) throw UsageError("base of the bound must be below one");
  const BigFloat x = log_eps / log_base;
  const BigFloat nearest = mp::round(x);
  BigFloat floor_x = mp::floor(x);
  if (mp::abs(x - nearest) <= BigFloat("1e-60") * mp::abs(x)) floor_x = nearest;
  return static_cast<mp::cpp_int>(floor_x) + 1;
}

}  // namespace

std::uint64_t independence_epochs(double delta, std::uint64_t k, double eps) {
  check_bound_args(delta, k, eps);
  const BigFloat log_base = BigFloat(k) * mp::log(BigFloat(delta));
  const auto n = smallest_exceeding(log_base, mp::log(BigFloat(eps)));
  if (n > std::numeric_limits<std::uint64_t>::max()) {
    throw UsageError("independence bound exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(n);
}

mp::cpp_int turnover_epochs(double delta, std::uint64_t k, double eps) {
  check_bound_args(delta, k, eps);
  const BigFloat stuck = mp::pow(BigFloat(1) - BigFloat(delta), static_cast<long long>(k));
  const BigFloat log_base = mp::log1p(-stuck);
  return smallest_exceeding(log_base, mp::log(BigFloat(eps)));
}

std::size_t mixing_time_estimate(const tabular::TransitionMatrix& t, std::span<const double> pi,
                                 std::size_t start, double tol, std::size_t max_steps) {
  if (start >= t.states()) throw UsageError("start state out of range");
  std::vector<double> mu(t.states(), 0.0);
  mu[start] = 1.0;
  double gap = tabular::tv_distance(mu, pi);
  for (std::size_t step = 0; step <= max_steps; ++step) {
    if (gap < tol) return step;
    mu = t.apply(mu);
    gap = tabular::tv_distance(mu, pi);
  }
  throw ConvergenceError("chain did not mix within " + std::to_string(max_steps) + " steps", gap);
}

std::size_t mixing_time_estimate(const tabular::TransitionMatrix& t, std::size_t start, double tol,
                                 std::size_t max_steps) {
  const auto pi = tabular::stationary_distribution(t);
  return mixing_time_estimate(t, pi, start, tol, max_steps);
}

std::size_t worst_case_mixing_time(const tabular::TransitionMatrix& t, double tol) {
  const auto pi = tabular::stationary_distribution(t);
  std::size_t worst = 0;
  for (std::size_t s = 0; s < t.states(); ++s) {
    worst = std::max(worst, mixing_time_estimate(t, pi, s, tol));
  }
  return worst;
}

bool NLogNTrend::consistent() const { return ratio_slope <= 0.0; }

NLogNTrend nlogn_trend(std::span<const std::size_t> n, std::span<const double> times) {
  if (n.size() != times.size() || n.size() < 2) {
    throw UsageError("nlogn_trend needs at least two (n, time) points");
  }
  NLogNTrend out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] < 2) throw UsageError("nlogn_trend needs n >= 2");
    const double scale = static_cast<double>(n[i]) * std::log(static_cast<double>(n[i]));
    out.ratios.push_back(times[i] / scale);
  }
  out.c = *std::max_element(out.ratios.begin(), out.ratios.end());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double scale = static_cast<double>(n[i]) * std::log(static_cast<double>(n[i]));
    out.residuals.push_back(out.c * scale - times[i]);
    mx += static_cast<double>(n[i]);
    my += out.ratios[i];
  }
  mx /= static_cast<double>(n.size());
  my /= static_cast<double>(n.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double dx = static_cast<double>(n[i]) - mx;
    sxy += dx * (out.ratios[i] - my);
    sxx += dx * dx;
  }
  out.ratio_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return out;
}

double WindowComparison::separation() const {
  const double diff = std::abs(mean_a - mean_b);
  if (pooled_sd == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / pooled_sd;
}

WindowComparison compare_terminal_windows(std::span<const double> a, std::span<const double> b,
                                          std::size_t window) {
  auto tail = [window](std::span<const double> s) {
    std::vector<double> out;
    for (auto it = s.rbegin(); it != s.rend() && out.size() < window; ++it) {
      if (std::isfinite(*it)) out.push_back(*it);
    }
    if (out.size() < 2) throw UsageError("terminal window holds fewer than two finite energies");
    return out;
  };
  const auto ta = tail(a), tb = tail(b);
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto ss = [](const std::vector<double>& v, double m) {
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
  };
  WindowComparison out;
  out.mean_a = mean(ta);
  out.mean_b = mean(tb);
  const double dof = static_cast<double>(ta.size() + tb.size() - 2);
  out.pooled_sd = std::sqrt((ss(ta, out.mean_a) + ss(tb, out.mean_b)) / dof);
  return out;
}

}  // namespace gsnprobe::diagnostics
