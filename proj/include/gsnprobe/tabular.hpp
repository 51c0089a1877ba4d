#pragma once

// Exact dependency networks over enumerable state spaces, and the
// brute-force transition-matrix oracles used to check the samplers.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include "json.hpp"

#include "gsnprobe/conditional_model.hpp"
#include "gsnprobe/rng.hpp"

namespace gsnprobe::tabular {

inline constexpr std::size_t kMaxStates = 100000;

// Sequences of length n over V symbols, indexed lexicographically with
// site 0 most significant.
class StateSpace {
 public:
  // Throws UsageError when V^n exceeds kMaxStates.
  StateSpace(std::size_t n, std::size_t vocab_size);

  std::size_t n() const { return n_; }
  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t size() const { return size_; }
  std::size_t contexts_per_site() const { return size_ / vocab_size_; }

  std::size_t encode(std::span<const TokenId> symbols) const;
  std::vector<TokenId> decode(std::size_t state) const;
  TokenId symbol(std::size_t state, std::size_t site) const;
  // Index of the state with `site` replaced by `value`.
  std::size_t with_symbol(std::size_t state, std::size_t site, TokenId value) const;
  // Index of w_-site among the V^(n-1) contexts of that site.
  std::size_t context(std::size_t state, std::size_t site) const;

  bool operator==(const StateSpace&) const = default;

 private:
  std::size_t n_;
  std::size_t vocab_size_;
  std::size_t size_;
  std::vector<std::size_t> stride_;
};

class ExactJoint {
 public:
  ExactJoint(StateSpace space, std::vector<double> probs);

  static ExactJoint uniform(std::size_t n, std::size_t vocab_size);
  static ExactJoint random_dirichlet(std::size_t n, std::size_t vocab_size, double alpha,
                                    Rng& rng);

  const StateSpace& space() const { return space_; }
  const std::vector<double>& probs() const { return probs_; }
  double operator[](std::size_t state) const { return probs_[state]; }

 private:
  StateSpace space_;
  std::vector<double> probs_;
};

// One probability vector per (site, context). The vectors need not agree
// with any joint distribution.
class ConditionalTable {
 public:
  explicit ConditionalTable(StateSpace space);  // uniform everywhere

  const StateSpace& space() const { return space_; }

  std::span<const double> at(std::size_t site, std::size_t context) const;
  void set(std::size_t site, std::size_t context, std::span<const double> p);
  // Conditional for `site` given the other sites of `state`.
  std::span<const double> given(std::size_t state, std::size_t site) const {
    return at(site, space_.context(state, site));
  }

  // Copy with one vector perturbed: `amount` is added to entry `symbol` and
  // the vector renormalized.
  ConditionalTable with_inconsistency(std::size_t site, std::size_t context, TokenId symbol,
                                      double amount) const;

 private:
  StateSpace space_;
  std::vector<double> data_;
};

enum class KernelKind { kGsn, kFixedOrder, kMh, kMixture };
std::string to_string(KernelKind kind);

// Row-stochastic operator over a StateSpace. Fixed-order kernels are kept as
// the ordered product of their single-site factors instead of a dense matrix.
class TransitionMatrix {
 public:
  using Factor = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  TransitionMatrix(KernelKind kind, std::vector<Factor> factors);

  KernelKind kind() const { return kind_; }
  std::size_t states() const { return states_; }
  const std::vector<Factor>& factors() const { return factors_; }

  // Row vector times the matrix.
  std::vector<double> apply(std::span<const double> row) const;
  std::vector<double> row(std::size_t state) const;
  // Largest |row sum - 1| over all rows of the product.
  double max_row_defect() const;
  bool irreducible() const;

 private:
  std::vector<char> reach(std::size_t start, bool backward) const;

  KernelKind kind_;
  std::vector<Factor> factors_;
  std::size_t states_;
};

ConditionalTable derive_conditionals(const ExactJoint& joint);

TransitionMatrix gsn_transition_matrix(const ConditionalTable& cond);
TransitionMatrix fixed_order_transition_matrix(const ConditionalTable& cond,
                                               std::span<const std::size_t> order);
TransitionMatrix mh_transition_matrix(const ConditionalTable& cond);

// Metropolis-Hastings acceptance for a single-site move from `from` to `to`
// (they differ at most at `site`).
double mh_acceptance(const ConditionalTable& cond, std::size_t from, std::size_t to,
                     std::size_t site);

// s(x) = sum_k ln P(x_k | x_-k) under the table.
double pseudo_log_likelihood(const ConditionalTable& cond, std::size_t state);
// exp(s(x)) / Z over the whole state space.
std::vector<double> pseudo_likelihood_distribution(const ConditionalTable& cond);

struct StationaryOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 1000000;
};

// Power iteration from the uniform vector. Reducible kernels raise
// NonErgodicError; failure to converge raises ConvergenceError.
std::vector<double> stationary_distribution(const TransitionMatrix& t,
                                            StationaryOptions options = {});

double tv_distance(std::span<const double> p, std::span<const double> q);

// ConditionalModel backed by a table. Token ids 0..V-1 are the table
// symbols, followed by [MASK] and [UNK]; the special tokens always receive
// probability zero. Contexts that still contain a mask get the uniform
// vector over the V symbols.
class TabularModel final : public ConditionalModel {
 public:
  explicit TabularModel(ConditionalTable table, std::vector<std::string> symbol_names = {});

  const Vocabulary& vocabulary() const override { return vocab_; }
  std::size_t length() const override { return table_.space().n(); }
  std::string fingerprint() const override;

  const ConditionalTable& table() const { return table_; }
  // Index of a mask-free sequence in the table's state space.
  std::optional<std::size_t> state_of(const TokenSequence& seq) const;

 protected:
  std::vector<double> conditional_at(const TokenSequence& masked, std::size_t site) const override;

 private:
  ConditionalTable table_;
  Vocabulary vocab_;
};

// JSON fixture: {"n", "vocab_size", "tokens"?, "joint"?, "conditionals"?}.
// When only a joint is present the conditionals are derived from it.
struct Fixture {
  std::optional<ExactJoint> joint;
  ConditionalTable conditionals;
  std::vector<std::string> tokens;

  static Fixture from_joint(ExactJoint joint);
  nlohmann::json to_json() const;
  static Fixture from_json(const nlohmann::json& j);
  static Fixture load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

}  // namespace gsnprobe::tabular
