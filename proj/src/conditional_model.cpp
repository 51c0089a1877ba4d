#include "gsnprobe/conditional_model.hpp"

#include <cmath>
#include <numeric>

#include "gsnprobe/error.hpp"

namespace gsnprobe {

DistributionCheck validate_distribution(std::span<const double> p, double tolerance) {
  DistributionCheck result;
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (std::isnan(p[i])) {
      return {false, "NaN entry at index " + std::to_string(i), i};
    }
    if (p[i] < 0.0) {
      return {false, "negative entry at index " + std::to_string(i), i};
    }
    if (!std::isfinite(p[i])) {
      return {false, "infinite entry at index " + std::to_string(i), i};
    }
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > tolerance) {
    result.ok = false;
    result.reason = "entries sum to " + std::to_string(sum);
  }
  return result;
}

void ConditionalModel::check_sequence(const TokenSequence& seq) const {
  if (seq.size() != length()) {
    throw UsageError("sequence length " + std::to_string(seq.size()) +
                     " does not match model length " + std::to_string(length()));
  }
  check_ids(vocabulary(), seq);
}

std::vector<double> ConditionalModel::query(const TokenSequence& seq, std::size_t site) const {
  check_sequence(seq);
  if (site >= seq.size()) throw UsageError("site " + std::to_string(site) + " out of range");
  TokenSequence masked = seq;
  masked[site] = vocabulary().mask_id();
  auto p = conditional_at(masked, site);
  if (p.size() != vocabulary().size()) {
    throw BackendError("backend returned " + std::to_string(p.size()) +
                       " probabilities for site " + std::to_string(site) +
                       ", expected " + std::to_string(vocabulary().size()));
  }
  if (auto check = validate_distribution(p); !check) {
    throw BackendError("invalid conditional at site " + std::to_string(site) + ": " +
                       check.reason);
  }
  return p;
}

std::vector<std::vector<double>> ConditionalModel::query_sites(
    const TokenSequence& seq, std::span<const std::size_t> sites) const {
  check_sequence(seq);
  for (auto s : sites) {
    if (s >= seq.size()) throw UsageError("site " + std::to_string(s) + " out of range");
  }
  auto out = conditionals_at(seq, sites);
  if (out.size() != sites.size()) {
    throw BackendError("backend returned " + std::to_string(out.size()) +
                       " vectors for " + std::to_string(sites.size()) + " sites");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() != vocabulary().size()) {
      throw BackendError("backend returned wrong-sized vector for site " +
                         std::to_string(sites[i]));
    }
    if (auto check = validate_distribution(out[i]); !check) {
      throw BackendError("invalid conditional at site " + std::to_string(sites[i]) +
                         ": " + check.reason);
    }
  }
  return out;
}

std::vector<std::vector<double>> ConditionalModel::conditionals_at(
    const TokenSequence& seq, std::span<const std::size_t> sites) const {
  std::vector<std::vector<double>> out;
  out.reserve(sites.size());
  for (auto s : sites) {
    TokenSequence masked = seq;
    masked[s] = vocabulary().mask_id();
    out.push_back(conditional_at(masked, s));
  }
  return out;
}

std::vector<double> energy_terms(const ConditionalModel& model, const TokenSequence& seq) {
  std::vector<std::size_t> sites(seq.size());
  std::iota(sites.begin(), sites.end(), std::size_t{0});
  if (seq.size() != model.length()) {
    throw UsageError("sequence length " + std::to_string(seq.size()) +
                     " does not match model length " + std::to_string(model.length()));
  }
  auto vectors = model.query_sites(seq, sites);
  std::vector<double> terms(seq.size());
  for (std::size_t k = 0; k < seq.size(); ++k) terms[k] = safe_log(vectors[k][seq[k]]);
  return terms;
}

EnergyScore energy_score(const ConditionalModel& model, const TokenSequence& seq) {
  double total = 0.0;
  for (double t : energy_terms(model, seq)) {
    if (t == kNegInf) return {kNegInf};
    total += t;
  }
  return {total};
}

}  // namespace gsnprobe
