#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gsnprobe/conditional_model.hpp"
#include "gsnprobe/rng.hpp"

namespace gsnprobe {

enum class Kernel { kGsn, kFixedOrder, kMh };

std::string to_string(Kernel kernel);
Kernel parse_kernel(const std::string& name);

struct ChainConfig {
  std::uint64_t epochs = 0;
  std::uint64_t burn_in = 1000;
  std::uint64_t lag = 500;  // 0 and 1 both record every epoch past burn-in
  double epsilon = 0.001;   // per-epoch probability of resetting to all-mask
  Kernel kernel = Kernel::kGsn;
  std::optional<std::vector<std::size_t>> order;  // fixed-order only
  std::uint64_t seed = 0;
  // Emit a record for every epoch, not only the scheduled samples.
  bool trace = false;
};

// Throws UsageError when the config cannot drive a chain of length n.
void validate(const ChainConfig& config, std::size_t n);

bool is_sample_epoch(const ChainConfig& config, std::uint64_t epoch);

enum class RecordKind { kSample, kEpoch, kTruncated };

struct ChainRecord {
  RecordKind kind = RecordKind::kSample;
  std::uint64_t chain_id = 0;
  std::uint64_t epoch = 0;
  TokenSequence tokens;
  std::string text;
  EnergyScore energy;
  std::size_t edits = 0;
  std::uint64_t epochs_since_reset = 0;
  std::string reason;  // truncation cause
};

struct StepResult {
  std::size_t site = 0;
  bool changed = false;
};

// Resamples `site` from its masked conditional.
bool resample_site(const ConditionalModel& model, TokenSequence& seq, std::size_t site, Rng& rng);

// One GSN update: uniform site, then resample_site.
StepResult gsn_step(const ConditionalModel& model, TokenSequence& seq, Rng& rng);

// Chain state for the Metropolis-Hastings kernel; caches the energy of the
// current sequence so each proposal costs n-1 fresh conditionals.
struct MhState {
  TokenSequence seq;
  double energy = kNegInf;
};

MhState make_mh_state(const ConditionalModel& model, TokenSequence seq);

struct MhStepResult {
  std::size_t site = 0;
  bool accepted = false;
  bool changed = false;
  double acceptance = 1.0;
};

// GSN proposal with pseudo-likelihood acceptance.
MhStepResult mh_step(const ConditionalModel& model, MhState& state, Rng& rng);

// Energy with the chain convention: any masked site scores -infinity.
EnergyScore chain_energy(const ConditionalModel& model, const TokenSequence& seq);

TokenSequence all_mask(const ConditionalModel& model);

using RecordSink = std::function<void(const ChainRecord&)>;

// Runs one chain. An epoch is n single-site updates; before each epoch the
// state resets to all-mask with probability epsilon. A backend failure ends
// the chain with a kTruncated record.
void run_chain(const ConditionalModel& model, const ChainConfig& config, std::uint64_t chain_id,
               const std::optional<TokenSequence>& init, const RecordSink& sink);

std::vector<ChainRecord> run_chain(const ConditionalModel& model, const ChainConfig& config,
                                   std::uint64_t chain_id = 0,
                                   const std::optional<TokenSequence>& init = std::nullopt);

// Runs `count` chains, in parallel when the model allows it. Chain c uses
// seed derive_seed(config.seed, c). The result is ordered by chain id.
std::vector<std::vector<ChainRecord>> run_chains(
    const ConditionalModel& model, const ChainConfig& config, std::size_t count,
    const std::optional<TokenSequence>& init = std::nullopt);

}  // namespace gsnprobe
