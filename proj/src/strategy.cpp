#include "coevo/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coevo/error.hpp"

namespace coevo {

PairShape::PairShape(std::size_t num_agents, std::size_t num_actions)
    : n_(num_agents), m_(num_actions) {
  if (n_ < 2) throw InvalidArgument("need at least 2 agents");
  if (m_ < 1) throw InvalidArgument("need at least 1 action");
}

void check_table_size(const PairShape& shape, std::size_t size) {
  if (size != shape.size())
    throw InvalidArgument("table has " + std::to_string(size) + " values, shape needs " +
                          std::to_string(shape.size()));
}

FactoredState::FactoredState(std::size_t num_agents, std::size_t num_actions)
    : shape_(num_agents, num_actions),
      links_(num_agents * (num_agents - 1), 0.0),
      actions_(num_agents * num_actions, 0.0) {}

FactoredState::FactoredState(std::size_t num_agents, std::size_t num_actions,
                             std::span<const double> flat)
    : FactoredState(num_agents, num_actions) {
  if (flat.size() != flat_size())
    throw InvalidArgument("factored state needs " + std::to_string(flat_size()) + " values");
  std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(links_.size()),
            links_.begin());
  std::copy(flat.begin() + static_cast<std::ptrdiff_t>(links_.size()), flat.end(),
            actions_.begin());
}

std::vector<double> FactoredState::flat() const {
  std::vector<double> out(links_);
  out.insert(out.end(), actions_.begin(), actions_.end());
  return out;
}

PolicyParams::PolicyParams(double temperature) : temperature_(temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw InvalidArgument("policy temperature must be positive and finite");
}

JointState boltzmann_policy(const QTable& q, const PolicyParams& params) {
  const PairShape& shape = q.shape();
  JointState out(shape);
  const double beta = params.beta();
  for (Agent x = 0; x < shape.num_agents(); ++x) {
    auto qx = q.agent_block(x);
    for (double v : qx)
      if (!std::isfinite(v)) throw InvalidArgument("Q-table contains a non-finite value");
    const double qmax = *std::max_element(qx.begin(), qx.end());
    auto px = out.agent_block(x);
    double z = 0.0;
    for (std::size_t k = 0; k < qx.size(); ++k) {
      px[k] = std::exp(beta * (qx[k] - qmax));
      z += px[k];
    }
    for (double& p : px) p /= z;
  }
  return out;
}

FactorResult factor_state(const JointState& s) {
  const PairShape& shape = s.shape();
  const std::size_t n = shape.num_agents(), m = shape.num_actions();
  FactorResult result{FactoredState(n, m), 0.0};
  FactoredState& f = result.state;
  for (Agent x = 0; x < n; ++x)
    for (Agent y = 0; y < n; ++y) {
      if (y == x) continue;
      for (Action i = 0; i < m; ++i) {
        f.link(x, y) += s(x, y, i);
        f.action(x, i) += s(x, y, i);
      }
    }
  for (Agent x = 0; x < n; ++x)
    for (Agent y = 0; y < n; ++y) {
      if (y == x) continue;
      for (Action i = 0; i < m; ++i)
        result.residual =
            std::max(result.residual, std::abs(s(x, y, i) - f.link(x, y) * f.action(x, i)));
    }
  return result;
}

JointState compose_state(const FactoredState& f) {
  const std::size_t n = f.num_agents(), m = f.num_actions();
  JointState s(PairShape(n, m));
  for (Agent x = 0; x < n; ++x)
    for (Agent y = 0; y < n; ++y) {
      if (y == x) continue;
      for (Action i = 0; i < m; ++i) s(x, y, i) = f.link(x, y) * f.action(x, i);
    }
  return s;
}

namespace {

void check_group(std::span<const double> values, Agent x, const char* group, double tol,
                 std::vector<SimplexViolation>& out) {
  double sum = 0.0;
  bool out_of_range = false;
  for (double v : values) {
    sum += v;
    if (!(v >= -tol && v <= 1.0 + tol)) out_of_range = true;
  }
  if (!(std::abs(sum - 1.0) <= tol) || out_of_range) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "agent " << x << ' ' << group;
    if (out_of_range) msg << " has an entry outside [0,1]";
    else msg << " sums to " << sum;
    out.push_back({x, group, sum, msg.str()});
  }
}

}  // namespace

std::vector<SimplexViolation> validate_simplex(const JointState& s, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("simplex tolerance must be positive");
  std::vector<SimplexViolation> out;
  for (Agent x = 0; x < s.shape().num_agents(); ++x)
    check_group(s.agent_block(x), x, "joint", tol, out);
  return out;
}

std::vector<SimplexViolation> validate_simplex(const FactoredState& f, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("simplex tolerance must be positive");
  std::vector<SimplexViolation> out;
  for (Agent x = 0; x < f.num_agents(); ++x) {
    check_group(f.links_of(x), x, "links", tol, out);
    check_group(f.actions_of(x), x, "actions", tol, out);
  }
  return out;
}

JointState uniform_joint_state(const PairShape& shape) {
  return JointState(shape, 1.0 / static_cast<double>(shape.block_size()));
}

FactoredState uniform_factored_state(std::size_t num_agents, std::size_t num_actions) {
  FactoredState f(num_agents, num_actions);
  for (Agent x = 0; x < num_agents; ++x) {
    for (Agent y = 0; y < num_agents; ++y)
      if (y != x) f.link(x, y) = 1.0 / static_cast<double>(num_agents - 1);
    for (Action i = 0; i < num_actions; ++i)
      f.action(x, i) = 1.0 / static_cast<double>(num_actions);
  }
  return f;
}

}  // namespace coevo
