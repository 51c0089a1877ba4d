#include "gsnprobe/oracle.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "gsnprobe/error.hpp"

namespace gsnprobe::oracle {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

struct Stationary {
  std::optional<std::vector<double>> pi;
  std::string error;
};

Stationary solve(const tabular::TransitionMatrix& t) {
  try {
    return {tabular::stationary_distribution(t), {}};
  } catch (const NonErgodicError& e) {
    return {std::nullopt, e.what()};
  } catch (const ConvergenceError& e) {
    return {std::nullopt, e.what()};
  }
}

Check bounded(std::string name, const Stationary& a, const Stationary& b, double limit) {
  Check c{std::move(name), std::nullopt, "<= " + sci(limit), Status::kFail, {}};
  if (!a.pi || !b.pi) {
    c.detail = !a.pi ? a.error : b.error;
    return c;
  }
  c.tv = tabular::tv_distance(*a.pi, *b.pi);
  c.status = *c.tv <= limit ? Status::kPass : Status::kFail;
  return c;
}

}  // namespace

std::string to_string(Status status) {
  switch (status) {
    case Status::kPass: return "PASS";
    case Status::kFail: return "FAIL";
    case Status::kInfo: return "INFO";
  }
  return "?";
}

bool Report::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const Check& c) { return c.status == Status::kFail; });
}

std::string Report::text() const {
  std::ostringstream out;
  out << "tabular oracle: n=" << n << " V=" << vocab_size << " states=" << [this] {
    std::size_t s = 1;
    for (std::size_t i = 0; i < n; ++i) s *= vocab_size;
    return s;
  }() << (has_joint ? " (joint supplied)" : " (conditionals only)") << '\n';
  for (const auto& c : checks) {
    out << "  " << to_string(c.status) << "  " << c.name;
    if (c.tv) out << "  TV=" << sci(*c.tv);
    if (!c.expectation.empty()) out << "  (expect " << c.expectation << ")";
    if (!c.detail.empty()) out << "  " << c.detail;
    out << '\n';
  }
  out << (passed() ? "result: PASS" : "result: FAIL") << '\n';
  return out.str();
}

nlohmann::json Report::to_json() const {
  nlohmann::json checks_json = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json j{{"name", c.name}, {"status", to_string(c.status)},
                     {"expectation", c.expectation}, {"detail", c.detail}};
    j["tv"] = c.tv ? nlohmann::json(*c.tv) : nlohmann::json(nullptr);
    checks_json.push_back(std::move(j));
  }
  return {{"n", n}, {"vocab_size", vocab_size}, {"has_joint", has_joint},
          {"passed", passed()}, {"checks", std::move(checks_json)}};
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> default_orders(std::size_t n) {
  std::vector<std::size_t> forward(n);
  std::iota(forward.begin(), forward.end(), std::size_t{0});
  return {forward, std::vector<std::size_t>(forward.rbegin(), forward.rend())};
}

Report run_battery(const tabular::Fixture& fixture) {
  using namespace tabular;
  const auto& cond = fixture.conditionals;
  Report report;
  report.n = cond.space().n();
  report.vocab_size = cond.space().vocab_size();
  report.has_joint = fixture.joint.has_value();

  const Stationary gsn = solve(gsn_transition_matrix(cond));
  const auto [forward, backward] = default_orders(report.n);
  const Stationary fwd = solve(fixed_order_transition_matrix(cond, forward));
  const Stationary bwd = solve(fixed_order_transition_matrix(cond, backward));
  const Stationary mh = solve(mh_transition_matrix(cond));
  const Stationary pl{pseudo_likelihood_distribution(cond), {}};

  if (fixture.joint) {
    const Stationary joint{fixture.joint->probs(), {}};
    report.checks.push_back(bounded("gsn stationary vs joint", gsn, joint, kExactTolerance));
    report.checks.push_back(bounded("sweep order forward vs reverse", fwd, bwd,
                                    kExactTolerance));
    report.checks.push_back(bounded("mh stationary vs pseudo-likelihood", mh, pl, kExactTolerance));
    Check cal{"mh stationary vs joint", std::nullopt, "", Status::kInfo, {}};
    if (mh.pi) {
      cal.tv = tv_distance(*mh.pi, fixture.joint->probs());
      if (gsn.pi) {
        const double g = tv_distance(*gsn.pi, fixture.joint->probs());
        cal.detail = g <= *cal.tv ? "gsn at least as close" : "mh closer than gsn";
      }
    } else {
      cal.detail = mh.error;
    }
    report.checks.push_back(std::move(cal));
    return report;
  }

  Check order{"sweep order forward vs reverse", std::nullopt,
              "> " + sci(kOrderDependenceThreshold) + " flags order dependence", Status::kInfo, {}};
  if (fwd.pi && bwd.pi) {
    order.tv = tv_distance(*fwd.pi, *bwd.pi);
    order.detail = *order.tv > kOrderDependenceThreshold ? "order-dependent"
                   : *order.tv <= kExactTolerance         ? "order-invariant"
                                                          : "weakly order-dependent";
  } else {
    order.status = Status::kFail;
    order.detail = !fwd.pi ? fwd.error : bwd.error;
  }
  report.checks.push_back(std::move(order));
  Check g{"gsn stationary vs forward sweep", std::nullopt, "", Status::kInfo, {}};
  if (gsn.pi && fwd.pi) g.tv = tv_distance(*gsn.pi, *fwd.pi);
  else g.detail = !gsn.pi ? gsn.error : fwd.error;
  report.checks.push_back(std::move(g));
  report.checks.push_back(bounded("mh stationary vs pseudo-likelihood", mh, pl, kExactTolerance));
  return report;
}

}  // namespace gsnprobe::oracle
