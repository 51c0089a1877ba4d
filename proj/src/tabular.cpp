#include "gsnprobe/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <Eigen/Core>

#include "gsnprobe/error.hpp"
#include "gsnprobe/hash.hpp"

namespace gsnprobe::tabular {

namespace {

using Triplet = Eigen::Triplet<double>;

TransitionMatrix::Factor make_factor(std::size_t states, const std::vector<Triplet>& entries) {
  TransitionMatrix::Factor m(static_cast<Eigen::Index>(states), static_cast<Eigen::Index>(states));
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

// K_k(x -> x') = 1[x'_-k = x_-k] P(x'_k | x_-k), optionally scaled.
void add_site_update(const ConditionalTable& cond, std::size_t site, double scale,
                     std::vector<Triplet>& entries) {
  const auto& space = cond.space();
  for (std::size_t x = 0; x < space.size(); ++x) {
    auto p = cond.given(x, site);
    for (std::size_t v = 0; v < space.vocab_size(); ++v) {
      if (p[v] == 0.0) continue;
      entries.emplace_back(static_cast<int>(x),
                           static_cast<int>(space.with_symbol(x, site, static_cast<TokenId>(v))),
                           scale * p[v]);
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- StateSpace

StateSpace::StateSpace(std::size_t n, std::size_t vocab_size) : n_(n), vocab_size_(vocab_size) {
  if (n == 0) throw UsageError("state space needs at least one site");
  if (vocab_size == 0) throw UsageError("state space needs at least one symbol");
  std::size_t size = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (size > kMaxStates / vocab_size) {
      throw UsageError("state space V^n = " + std::to_string(vocab_size) + "^" +
                       std::to_string(n) + " exceeds the cap of " + std::to_string(kMaxStates));
    }
    size *= vocab_size;
  }
  size_ = size;
  stride_.resize(n);
  std::size_t s = 1;
  for (std::size_t k = n; k-- > 0;) {
    stride_[k] = s;
    s *= vocab_size;
  }
}

std::size_t StateSpace::encode(std::span<const TokenId> symbols) const {
  if (symbols.size() != n_) throw UsageError("encode: wrong sequence length");
  std::size_t idx = 0;
  for (std::size_t k = 0; k < n_; ++k) {
    if (symbols[k] >= vocab_size_) throw UsageError("encode: symbol out of range");
    idx += symbols[k] * stride_[k];
  }
  return idx;
}

std::vector<TokenId> StateSpace::decode(std::size_t state) const {
  std::vector<TokenId> out(n_);
  for (std::size_t k = 0; k < n_; ++k) out[k] = symbol(state, k);
  return out;
}

TokenId StateSpace::symbol(std::size_t state, std::size_t site) const {
  return static_cast<TokenId>((state / stride_[site]) % vocab_size_);
}

std::size_t StateSpace::with_symbol(std::size_t state, std::size_t site, TokenId value) const {
  return state - symbol(state, site) * stride_[site] + value * stride_[site];
}

std::size_t StateSpace::context(std::size_t state, std::size_t site) const {
  const std::size_t low = state % stride_[site];
  const std::size_t high = state / (stride_[site] * vocab_size_);
  return high * stride_[site] + low;
}

// ---------------------------------------------------------------- ExactJoint

ExactJoint::ExactJoint(StateSpace space, std::vector<double> probs)
    : space_(space), probs_(std::move(probs)) {
  if (probs_.size() != space_.size()) {
    throw FormatError("joint has " + std::to_string(probs_.size()) + " entries, expected " +
                      std::to_string(space_.size()));
  }
  if (auto check = validate_distribution(probs_, 1e-12); !check) {
    throw ValidationError("invalid joint: " + check.reason);
  }
}

ExactJoint ExactJoint::uniform(std::size_t n, std::size_t vocab_size) {
  StateSpace space(n, vocab_size);
  return ExactJoint(space, std::vector<double>(space.size(), 1.0 / space.size()));
}

ExactJoint ExactJoint::random_dirichlet(std::size_t n, std::size_t vocab_size, double alpha,
                                        Rng& rng) {
  StateSpace space(n, vocab_size);
  auto p = rng.dirichlet(space.size(), alpha);
  // Renormalize once more so the 1e-12 sum check never trips on rounding.
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= total;
  return ExactJoint(space, std::move(p));
}

// ---------------------------------------------------------- ConditionalTable

ConditionalTable::ConditionalTable(StateSpace space)
    : space_(space),
      data_(space.n() * space.size(), 1.0 / static_cast<double>(space.vocab_size())) {}

std::span<const double> ConditionalTable::at(std::size_t site, std::size_t context) const {
  const std::size_t v = space_.vocab_size();
  const std::size_t offset = (site * space_.contexts_per_site() + context) * v;
  return std::span<const double>(data_).subspan(offset, v);
}

void ConditionalTable::set(std::size_t site, std::size_t context, std::span<const double> p) {
  if (site >= space_.n() || context >= space_.contexts_per_site()) {
    throw UsageError("conditional index out of range");
  }
  if (p.size() != space_.vocab_size()) throw UsageError("conditional has wrong length");
  if (auto check = validate_distribution(p); !check) {
    throw ValidationError("conditional for site " + std::to_string(site) + " context " +
                          std::to_string(context) + ": " + check.reason);
  }
  const std::size_t offset = (site * space_.contexts_per_site() + context) * p.size();
  std::copy(p.begin(), p.end(), data_.begin() + static_cast<std::ptrdiff_t>(offset));
}

ConditionalTable ConditionalTable::with_inconsistency(std::size_t site, std::size_t context,
                                                      TokenId symbol, double amount) const {
  if (symbol >= space_.vocab_size()) throw UsageError("perturbed symbol out of range");
  auto base = at(site, context);
  std::vector<double> p(base.begin(), base.end());
  p[symbol] += amount;
  if (p[symbol] < 0.0) throw UsageError("perturbation drives a probability negative");
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= total;
  ConditionalTable out = *this;
  out.set(site, context, p);
  return out;
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::kGsn: return "gsn";
    case KernelKind::kFixedOrder: return "fixed-order";
    case KernelKind::kMh: return "mh";
    case KernelKind::kMixture: return "mixture";
  }
  return "unknown";
}

// ---------------------------------------------------------- TransitionMatrix

TransitionMatrix::TransitionMatrix(KernelKind kind, std::vector<Factor> factors)
    : kind_(kind), factors_(std::move(factors)) {
  if (factors_.empty()) throw UsageError("transition matrix needs at least one factor");
  states_ = static_cast<std::size_t>(factors_.front().rows());
  for (const auto& f : factors_) {
    if (static_cast<std::size_t>(f.rows()) != states_ ||
        static_cast<std::size_t>(f.cols()) != states_) {
      throw UsageError("transition factors must be square and equally sized");
    }
  }
}

std::vector<double> TransitionMatrix::apply(std::span<const double> row) const {
  if (row.size() != states_) throw UsageError("row vector has wrong length");
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size()));
  for (const auto& f : factors_) {
    Eigen::VectorXd next = f.transpose() * v;
    v.swap(next);
  }
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<double> TransitionMatrix::row(std::size_t state) const {
  std::vector<double> e(states_, 0.0);
  e.at(state) = 1.0;
  return apply(e);
}

double TransitionMatrix::max_row_defect() const {
  // Product rows sum to one iff T * 1 = 1.
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(states_));
  Eigen::VectorXd v = ones;
  for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) {
    Eigen::VectorXd next = (*it) * v;
    v.swap(next);
  }
  double defect = (v - ones).cwiseAbs().maxCoeff();
  for (const auto& f : factors_) {
    for (Eigen::Index r = 0; r < f.outerSize(); ++r) {
      for (Factor::InnerIterator it(f, r); it; ++it) {
        if (it.value() < 0.0) defect = std::max(defect, -it.value());
      }
    }
  }
  return defect;
}

std::vector<char> TransitionMatrix::reach(std::size_t start, bool backward) const {
  // Support propagation: a state set is closed when one more step of the
  // kernel adds nothing new.
  std::vector<char> seen(states_, 0);
  seen[start] = 1;
  std::vector<std::size_t> frontier{start};
  while (!frontier.empty()) {
    std::vector<char> cur(states_, 0);
    for (auto s : frontier) cur[s] = 1;
    auto push = [&](const Factor& f) {
      std::vector<char> nxt(states_, 0);
      if (!backward) {
        for (std::size_t r = 0; r < states_; ++r) {
          if (!cur[r]) continue;
          for (Factor::InnerIterator it(f, static_cast<Eigen::Index>(r)); it; ++it) {
            if (it.value() > 0.0) nxt[static_cast<std::size_t>(it.col())] = 1;
          }
        }
      } else {
        for (std::size_t r = 0; r < states_; ++r) {
          for (Factor::InnerIterator it(f, static_cast<Eigen::Index>(r)); it; ++it) {
            if (it.value() > 0.0 && cur[static_cast<std::size_t>(it.col())]) nxt[r] = 1;
          }
        }
      }
      cur.swap(nxt);
    };
    if (!backward) {
      for (const auto& f : factors_) push(f);
    } else {
      for (auto it = factors_.rbegin(); it != factors_.rend(); ++it) push(*it);
    }
    frontier.clear();
    for (std::size_t s = 0; s < states_; ++s) {
      if (cur[s] && !seen[s]) {
        seen[s] = 1;
        frontier.push_back(s);
      }
    }
  }
  return seen;
}

bool TransitionMatrix::irreducible() const {
  auto all = [](const std::vector<char>& v) {
    return std::all_of(v.begin(), v.end(), [](char c) { return c != 0; });
  };
  return all(reach(0, false)) && all(reach(0, true));
}

// ------------------------------------------------------------------ Kernels

ConditionalTable derive_conditionals(const ExactJoint& joint) {
  const auto& space = joint.space();
  ConditionalTable table(space);
  const std::size_t v = space.vocab_size();
  std::vector<double> p(v);
  for (std::size_t site = 0; site < space.n(); ++site) {
    std::vector<char> done(space.contexts_per_site(), 0);
    for (std::size_t x = 0; x < space.size(); ++x) {
      const std::size_t ctx = space.context(x, site);
      if (done[ctx]) continue;
      done[ctx] = 1;
      double total = 0.0;
      for (std::size_t s = 0; s < v; ++s) {
        p[s] = joint[space.with_symbol(x, site, static_cast<TokenId>(s))];
        total += p[s];
      }
      if (total > 0.0) {
        for (auto& q : p) q /= total;
      } else {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(v));
      }
      table.set(site, ctx, p);
    }
  }
  return table;
}

TransitionMatrix gsn_transition_matrix(const ConditionalTable& cond) {
  const auto& space = cond.space();
  std::vector<Triplet> entries;
  entries.reserve(space.size() * space.n() * space.vocab_size());
  const double scale = 1.0 / static_cast<double>(space.n());
  for (std::size_t site = 0; site < space.n(); ++site) add_site_update(cond, site, scale, entries);
  std::vector<TransitionMatrix::Factor> factors;
  factors.push_back(make_factor(space.size(), entries));
  return TransitionMatrix(KernelKind::kGsn, std::move(factors));
}

TransitionMatrix fixed_order_transition_matrix(const ConditionalTable& cond,
                                               std::span<const std::size_t> order) {
  const auto& space = cond.space();
  std::vector<std::size_t> sorted(order.begin(), order.end());
  std::sort(sorted.begin(), sorted.end());
  bool is_perm = sorted.size() == space.n();
  for (std::size_t i = 0; is_perm && i < sorted.size(); ++i) is_perm = sorted[i] == i;
  if (!is_perm) throw UsageError("site order is not a permutation of 0..n-1");
  std::vector<TransitionMatrix::Factor> factors;
  for (auto site : order) {
    std::vector<Triplet> entries;
    add_site_update(cond, site, 1.0, entries);
    factors.push_back(make_factor(space.size(), entries));
  }
  return TransitionMatrix(KernelKind::kFixedOrder, std::move(factors));
}

double pseudo_log_likelihood(const ConditionalTable& cond, std::size_t state) {
  double s = 0.0;
  for (std::size_t k = 0; k < cond.space().n(); ++k) {
    const double p = cond.given(state, k)[cond.space().symbol(state, k)];
    if (p <= 0.0) return kNegInf;
    s += std::log(p);
  }
  return s;
}

std::vector<double> pseudo_likelihood_distribution(const ConditionalTable& cond) {
  const std::size_t size = cond.space().size();
  std::vector<double> s(size);
  double top = kNegInf;
  for (std::size_t x = 0; x < size; ++x) {
    s[x] = pseudo_log_likelihood(cond, x);
    top = std::max(top, s[x]);
  }
  if (top == kNegInf) throw ValidationError("every state has zero pseudo-likelihood");
  double z = 0.0;
  for (auto& v : s) {
    v = std::exp(v - top);
    z += v;
  }
  for (auto& v : s) v /= z;
  return s;
}

double mh_acceptance(const ConditionalTable& cond, std::size_t from, std::size_t to,
                     std::size_t site) {
  if (from == to) return 1.0;
  const auto& space = cond.space();
  const double s_from = pseudo_log_likelihood(cond, from);
  const double s_to = pseudo_log_likelihood(cond, to);
  if (s_from == kNegInf) return 1.0;
  if (s_to == kNegInf) return 0.0;
  // Both moves condition on the same context x_-site.
  auto p = cond.given(from, site);
  const double forward = p[space.symbol(to, site)];
  const double reverse = p[space.symbol(from, site)];
  if (reverse <= 0.0) return 0.0;
  const double log_ratio = s_to - s_from + std::log(reverse) - std::log(forward);
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

TransitionMatrix mh_transition_matrix(const ConditionalTable& cond) {
  const auto& space = cond.space();
  const double scale = 1.0 / static_cast<double>(space.n());
  std::vector<double> energy(space.size());
  for (std::size_t x = 0; x < space.size(); ++x) energy[x] = pseudo_log_likelihood(cond, x);

  std::vector<Triplet> entries;
  entries.reserve(space.size() * (space.n() * (space.vocab_size() - 1) + 1));
  for (std::size_t x = 0; x < space.size(); ++x) {
    double stay = 0.0;
    for (std::size_t site = 0; site < space.n(); ++site) {
      auto p = cond.given(x, site);
      const TokenId current = space.symbol(x, site);
      for (std::size_t v = 0; v < space.vocab_size(); ++v) {
        const double q = scale * p[v];
        if (q == 0.0) continue;
        if (v == current) {
          stay += q;
          continue;
        }
        const std::size_t y = space.with_symbol(x, site, static_cast<TokenId>(v));
        double alpha;
        if (energy[x] == kNegInf) {
          alpha = 1.0;
        } else if (energy[y] == kNegInf || p[current] <= 0.0) {
          alpha = 0.0;
        } else {
          const double log_ratio =
              energy[y] - energy[x] + std::log(p[current]) - std::log(p[v]);
          alpha = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
        }
        if (alpha > 0.0) entries.emplace_back(static_cast<int>(x), static_cast<int>(y), q * alpha);
        stay += q * (1.0 - alpha);
      }
    }
    entries.emplace_back(static_cast<int>(x), static_cast<int>(x), stay);
  }
  std::vector<TransitionMatrix::Factor> factors;
  factors.push_back(make_factor(space.size(), entries));
  return TransitionMatrix(KernelKind::kMh, std::move(factors));
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw UsageError("tv_distance: lengths " + std::to_string(p.size()) + " and " +
                     std::to_string(q.size()) + " differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

std::vector<double> stationary_distribution(const TransitionMatrix& t, StationaryOptions options) {
  if (!t.irreducible()) {
    throw NonErgodicError(to_string(t.kind()) +
                          " kernel is reducible; the stationary vector is not unique");
  }
  const std::size_t s = t.states();
  std::vector<double> p(s, 1.0 / static_cast<double>(s));
  double gap = 1.0;
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    auto next = t.apply(p);
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    for (auto& x : next) x /= total;
    gap = tv_distance(p, next);
    p.swap(next);
    if (gap < options.tolerance) return p;
  }
  throw ConvergenceError("power iteration did not converge in " +
                             std::to_string(options.max_iterations) +
                             " iterations (last TV gap " + std::to_string(gap) + ")",
                         gap);
}

// ------------------------------------------------------------- TabularModel

namespace {

std::vector<std::string> model_tokens(const StateSpace& space, std::vector<std::string> names) {
  if (names.empty()) {
    for (std::size_t i = 0; i < space.vocab_size(); ++i) names.push_back("t" + std::to_string(i));
  }
  if (names.size() != space.vocab_size()) {
    throw FormatError("fixture lists " + std::to_string(names.size()) + " tokens for V = " +
                      std::to_string(space.vocab_size()));
  }
  names.emplace_back(kDefaultMaskToken);
  names.emplace_back(kDefaultUnkToken);
  return names;
}

}  // namespace

TabularModel::TabularModel(ConditionalTable table, std::vector<std::string> symbol_names)
    : table_(std::move(table)), vocab_(model_tokens(table_.space(), std::move(symbol_names))) {}

std::string TabularModel::fingerprint() const {
  Fnv1a h;
  const auto& space = table_.space();
  h.update_u64(space.n());
  h.update_u64(space.vocab_size());
  for (std::size_t site = 0; site < space.n(); ++site) {
    for (std::size_t c = 0; c < space.contexts_per_site(); ++c) {
      for (double p : table_.at(site, c)) {
        std::uint64_t bits;
        std::memcpy(&bits, &p, sizeof bits);
        h.update_u64(bits);
      }
    }
  }
  h.update_u64(vocab_.fingerprint());
  return "tabular:" + hex64(h.digest());
}

std::optional<std::size_t> TabularModel::state_of(const TokenSequence& seq) const {
  const auto v = table_.space().vocab_size();
  for (auto id : seq) {
    if (id >= v) return std::nullopt;
  }
  return table_.space().encode(seq.ids());
}

std::vector<double> TabularModel::conditional_at(const TokenSequence& masked,
                                                 std::size_t site) const {
  const auto& space = table_.space();
  const std::size_t v = space.vocab_size();
  std::vector<double> out(vocab_.size(), 0.0);
  bool context_masked = false;
  std::vector<TokenId> symbols(masked.begin(), masked.end());
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    if (k == site) {
      symbols[k] = 0;
    } else if (symbols[k] >= v) {
      context_masked = true;
    }
  }
  if (context_masked) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(v), 1.0 / static_cast<double>(v));
    return out;
  }
  auto p = table_.given(space.encode(symbols), site);
  std::copy(p.begin(), p.end(), out.begin());
  return out;
}

// ------------------------------------------------------------------ Fixture

Fixture Fixture::from_joint(ExactJoint joint) {
  auto cond = derive_conditionals(joint);
  return Fixture{std::move(joint), std::move(cond), {}};
}

nlohmann::json Fixture::to_json() const {
  const auto& space = conditionals.space();
  nlohmann::json j;
  j["n"] = space.n();
  j["vocab_size"] = space.vocab_size();
  if (!tokens.empty()) j["tokens"] = tokens;
  if (joint) j["joint"] = joint->probs();
  nlohmann::json sites = nlohmann::json::array();
  for (std::size_t site = 0; site < space.n(); ++site) {
    nlohmann::json contexts = nlohmann::json::array();
    for (std::size_t c = 0; c < space.contexts_per_site(); ++c) {
      auto p = conditionals.at(site, c);
      contexts.push_back(std::vector<double>(p.begin(), p.end()));
    }
    sites.push_back(std::move(contexts));
  }
  j["conditionals"] = std::move(sites);
  return j;
}

Fixture Fixture::from_json(const nlohmann::json& j) {
  try {
    StateSpace space(j.at("n").get<std::size_t>(), j.at("vocab_size").get<std::size_t>());
    std::optional<ExactJoint> joint;
    if (j.contains("joint")) joint.emplace(space, j.at("joint").get<std::vector<double>>());
    std::vector<std::string> tokens;
    if (j.contains("tokens")) tokens = j.at("tokens").get<std::vector<std::string>>();
    if (!tokens.empty() && tokens.size() != space.vocab_size()) {
      throw FormatError("fixture token list does not match vocab_size");
    }
    if (!j.contains("conditionals")) {
      if (!joint) throw FormatError("fixture needs a joint or conditionals");
      auto cond = derive_conditionals(*joint);
      return Fixture{std::move(joint), std::move(cond), std::move(tokens)};
    }
    ConditionalTable cond(space);
    const auto& sites = j.at("conditionals");
    if (sites.size() != space.n()) throw FormatError("conditionals: wrong number of sites");
    for (std::size_t site = 0; site < space.n(); ++site) {
      const auto& contexts = sites.at(site);
      if (contexts.size() != space.contexts_per_site()) {
        throw FormatError("conditionals: site " + std::to_string(site) +
                          " has wrong number of contexts");
      }
      for (std::size_t c = 0; c < contexts.size(); ++c) {
        cond.set(site, c, contexts.at(c).get<std::vector<double>>());
      }
    }
    return Fixture{std::move(joint), std::move(cond), std::move(tokens)};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed tabular fixture: ") + e.what());
  }
}

Fixture Fixture::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open fixture " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

void Fixture::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

}  // namespace gsnprobe::tabular
