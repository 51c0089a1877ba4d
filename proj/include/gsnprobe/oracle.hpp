#pragma once

// Exact verification battery over a tabular fixture: GSN consistency,
// sweep-order dependence and the MH stationary identity.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gsnprobe/tabular.hpp"

namespace gsnprobe::oracle {

inline constexpr double kExactTolerance = 1e-8;
inline constexpr double kOrderDependenceThreshold = 0.01;

enum class Status { kPass, kFail, kInfo };
std::string to_string(Status status);

struct Check {
  std::string name;
  std::optional<double> tv;
  std::string expectation;  // e.g. "<= 1e-08"
  Status status = Status::kInfo;
  std::string detail;
};

struct Report {
  std::size_t n = 0;
  std::size_t vocab_size = 0;
  bool has_joint = false;
  std::vector<Check> checks;

  bool passed() const;
  std::string text() const;
  nlohmann::json to_json() const;
};

// Sweep orders compared by the order-dependence check: identity and its
// reverse.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> default_orders(std::size_t n);

Report run_battery(const tabular::Fixture& fixture);

}  // namespace gsnprobe::oracle
