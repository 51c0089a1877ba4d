#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gsnprobe/vocabulary.hpp"

namespace gsnprobe {

inline constexpr double kProbabilityTolerance = 1e-9;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct DistributionCheck {
  bool ok = true;
  std::string reason;
  std::size_t offending_index = 0;

  explicit operator bool() const { return ok; }
};

// Passes iff every entry is finite and nonnegative and the sum is within
// `tolerance` of one.
DistributionCheck validate_distribution(std::span<const double> p,
                                        double tolerance = kProbabilityTolerance);

// Source of per-site conditionals P(w_k | w_-k).
//
// Callers go through query()/query_sites(), which substitute the mask at the
// queried site before the backend sees the sequence, so answers depend only
// on the masked context. Every returned vector is validated.
class ConditionalModel {
 public:
  virtual ~ConditionalModel() = default;

  virtual const Vocabulary& vocabulary() const = 0;
  virtual std::size_t length() const = 0;
  virtual std::string fingerprint() const = 0;

  // Backends that cannot serve concurrent chains return false; the chain
  // runner then runs chains one at a time.
  virtual bool thread_safe() const { return true; }

  std::vector<double> query(const TokenSequence& seq, std::size_t site) const;
  std::vector<std::vector<double>> query_sites(const TokenSequence& seq,
                                               std::span<const std::size_t> sites) const;

 protected:
  // `masked[site]` already holds the mask id.
  virtual std::vector<double> conditional_at(const TokenSequence& masked,
                                             std::size_t site) const = 0;

  // Batched form; receives the unmasked sequence. The default masks each
  // site in turn and calls conditional_at.
  virtual std::vector<std::vector<double>> conditionals_at(
      const TokenSequence& seq, std::span<const std::size_t> sites) const;

 private:
  void check_sequence(const TokenSequence& seq) const;
};

// Pseudo-log-likelihood sum_k ln P(w_k | w_-k), natural log. A zero
// conditional on the realized token yields -infinity rather than an error.
struct EnergyScore {
  double value = 0.0;
  bool finite() const { return value != kNegInf; }
};

EnergyScore energy_score(const ConditionalModel& model, const TokenSequence& seq);

// Per-site terms ln P(w_k | w_-k); their sum is energy_score.
std::vector<double> energy_terms(const ConditionalModel& model, const TokenSequence& seq);

inline double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace gsnprobe
