#include "gsnprobe/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "gsnprobe/error.hpp"
#include "gsnprobe/wordpiece.hpp"

namespace gsnprobe {

std::string to_string(Kernel kernel) {
  switch (kernel) {
    case Kernel::kGsn: return "gsn";
    case Kernel::kFixedOrder: return "fixed-order";
    case Kernel::kMh: return "mh";
  }
  return "unknown";
}

Kernel parse_kernel(const std::string& name) {
  if (name == "gsn") return Kernel::kGsn;
  if (name == "fixed-order") return Kernel::kFixedOrder;
  if (name == "mh") return Kernel::kMh;
  throw UsageError("unknown kernel '" + name + "' (expected gsn, fixed-order or mh)");
}

void validate(const ChainConfig& config, std::size_t n) {
  if (!(config.epsilon >= 0.0 && config.epsilon <= 1.0)) {
    throw UsageError("epsilon must lie in [0, 1]");
  }
  if (n == 0) throw UsageError("chain length must be positive");
  if (config.order) {
    if (config.kernel != Kernel::kFixedOrder) {
      throw UsageError("a site order only applies to the fixed-order kernel");
    }
    std::vector<std::size_t> sorted = *config.order;
    std::sort(sorted.begin(), sorted.end());
    bool ok = sorted.size() == n;
    for (std::size_t i = 0; ok && i < n; ++i) ok = sorted[i] == i;
    if (!ok) throw UsageError("site order is not a permutation of 0.." + std::to_string(n - 1));
  }
}

bool is_sample_epoch(const ChainConfig& config, std::uint64_t epoch) {
  if (epoch < config.burn_in) return false;
  const std::uint64_t lag = std::max<std::uint64_t>(config.lag, 1);
  return (epoch - config.burn_in) % lag == 0;
}

bool resample_site(const ConditionalModel& model, TokenSequence& seq, std::size_t site, Rng& rng) {
  const auto p = model.query(seq, site);
  const auto next = static_cast<TokenId>(rng.categorical(p));
  const bool changed = next != seq[site];
  seq[site] = next;
  return changed;
}

StepResult gsn_step(const ConditionalModel& model, TokenSequence& seq, Rng& rng) {
  if (seq.size() != model.length()) throw UsageError("gsn_step: sequence length mismatch");
  StepResult r;
  r.site = rng.index(seq.size());
  r.changed = resample_site(model, seq, r.site, rng);
  return r;
}

TokenSequence all_mask(const ConditionalModel& model) {
  return TokenSequence(model.length(), model.vocabulary().mask_id());
}

EnergyScore chain_energy(const ConditionalModel& model, const TokenSequence& seq) {
  const auto mask = model.vocabulary().mask_id();
  if (std::find(seq.begin(), seq.end(), mask) != seq.end()) return {kNegInf};
  return energy_score(model, seq);
}

MhState make_mh_state(const ConditionalModel& model, TokenSequence seq) {
  MhState state{std::move(seq), kNegInf};
  state.energy = chain_energy(model, state.seq).value;
  return state;
}

MhStepResult mh_step(const ConditionalModel& model, MhState& state, Rng& rng) {
  auto& seq = state.seq;
  if (seq.size() != model.length()) throw UsageError("mh_step: sequence length mismatch");
  MhStepResult r;
  r.site = rng.index(seq.size());
  const auto p = model.query(seq, r.site);
  const auto current = seq[r.site];
  const auto proposal = static_cast<TokenId>(rng.categorical(p));
  if (proposal == current) {
    r.accepted = true;
    return r;
  }

  TokenSequence candidate = seq;
  candidate[r.site] = proposal;
  const auto mask = model.vocabulary().mask_id();
  double candidate_energy;
  if (std::find(candidate.begin(), candidate.end(), mask) != candidate.end()) {
    candidate_energy = kNegInf;
  } else {
    // Site r.site conditions on the unchanged context, so its term is
    // already known from the proposal vector.
    std::vector<std::size_t> others;
    others.reserve(seq.size() - 1);
    for (std::size_t k = 0; k < seq.size(); ++k) {
      if (k != r.site) others.push_back(k);
    }
    candidate_energy = safe_log(p[proposal]);
    const auto vectors = model.query_sites(candidate, others);
    for (std::size_t i = 0; i < others.size() && candidate_energy != kNegInf; ++i) {
      const double t = safe_log(vectors[i][candidate[others[i]]]);
      candidate_energy = t == kNegInf ? kNegInf : candidate_energy + t;
    }
  }

  if (state.energy == kNegInf) {
    r.acceptance = 1.0;
  } else if (candidate_energy == kNegInf || p[current] <= 0.0) {
    r.acceptance = 0.0;
  } else {
    const double log_ratio =
        candidate_energy - state.energy + std::log(p[current]) - std::log(p[proposal]);
    r.acceptance = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
  }
  r.accepted = r.acceptance >= 1.0 || (r.acceptance > 0.0 && rng.uniform() < r.acceptance);
  if (r.accepted) {
    seq = std::move(candidate);
    state.energy = candidate_energy;
    r.changed = true;
  }
  return r;
}

void run_chain(const ConditionalModel& model, const ChainConfig& config, std::uint64_t chain_id,
               const std::optional<TokenSequence>& init, const RecordSink& sink) {
  const std::size_t n = model.length();
  validate(config, n);
  Rng rng(derive_seed(config.seed, chain_id));
  const TokenSequence reset_state = all_mask(model);
  TokenSequence seq = init.value_or(reset_state);
  if (seq.size() != n) throw UsageError("initial sequence length does not match the model");
  check_ids(model.vocabulary(), seq);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (config.order) order = *config.order;

  std::optional<MhState> mh;
  std::uint64_t since_reset = 0;
  std::uint64_t epoch = 0;
  try {
    if (config.kernel == Kernel::kMh) mh = make_mh_state(model, seq);
    for (; epoch < config.epochs; ++epoch) {
      if (rng.bernoulli(config.epsilon)) {
        seq = reset_state;
        since_reset = 0;
        if (mh) *mh = MhState{reset_state, kNegInf};
      }
      std::size_t edits = 0;
      switch (config.kernel) {
        case Kernel::kGsn:
          for (std::size_t i = 0; i < n; ++i) edits += gsn_step(model, seq, rng).changed;
          break;
        case Kernel::kFixedOrder:
          for (auto site : order) edits += resample_site(model, seq, site, rng);
          break;
        case Kernel::kMh:
          for (std::size_t i = 0; i < n; ++i) edits += mh_step(model, *mh, rng).changed;
          seq = mh->seq;
          break;
      }
      const bool sample = is_sample_epoch(config, epoch);
      if (sample || config.trace) {
        ChainRecord rec;
        rec.kind = sample ? RecordKind::kSample : RecordKind::kEpoch;
        rec.chain_id = chain_id;
        rec.epoch = epoch;
        rec.tokens = seq;
        rec.text = wordpiece::detokenize(model.vocabulary(), seq.ids());
        rec.energy = chain_energy(model, seq);
        rec.edits = edits;
        rec.epochs_since_reset = since_reset;
        sink(rec);
      }
      ++since_reset;
    }
  } catch (const BackendError& e) {
    ChainRecord rec;
    rec.kind = RecordKind::kTruncated;
    rec.chain_id = chain_id;
    rec.epoch = epoch;
    rec.tokens = seq;
    rec.energy = {kNegInf};
    rec.epochs_since_reset = since_reset;
    rec.reason = e.what();
    sink(rec);
  }
}

std::vector<ChainRecord> run_chain(const ConditionalModel& model, const ChainConfig& config,
                                   std::uint64_t chain_id, const std::optional<TokenSequence>& init) {
  std::vector<ChainRecord> out;
  run_chain(model, config, chain_id, init, [&](const ChainRecord& r) { out.push_back(r); });
  return out;
}

std::vector<std::vector<ChainRecord>> run_chains(const ConditionalModel& model,
                                                 const ChainConfig& config, std::size_t count,
                                                 const std::optional<TokenSequence>& init) {
  validate(config, model.length());
  std::vector<std::vector<ChainRecord>> out(count);
  if (!model.thread_safe() || count <= 1) {
    for (std::size_t c = 0; c < count; ++c) out[c] = run_chain(model, config, c, init);
    return out;
  }
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(count, std::thread::hardware_concurrency()));
  std::vector<std::exception_ptr> errors(count);
  for (std::size_t begin = 0; begin < count; begin += workers) {
    std::vector<std::jthread> threads;
    for (std::size_t c = begin; c < std::min(count, begin + workers); ++c) {
      threads.emplace_back([&, c] {
        try {
          out[c] = run_chain(model, config, c, init);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace gsnprobe
