// Copyright 2026 The mace-matting Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mace/consensus.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "mace/error.hpp"

namespace mace {
namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void require_compatible(const StackedState& state,
                        std::span<const AgentOp> agents) {
  if (agents.size() != state.agent_count())
    throw Error(ErrorCode::invalid_argument,
                "agent count " + std::to_string(agents.size()) +
                    " does not match state copies " +
                    std::to_string(state.agent_count()));
}

}  // namespace

StackedState::StackedState(std::size_t agents, std::size_t length, double fill)
    : copies_(agents, Vector(length, fill)) {
  if (agents == 0)
    throw Error(ErrorCode::invalid_argument, "stacked state needs N >= 1");
}

StackedState::StackedState(std::vector<Vector> copies)
    : copies_(std::move(copies)) {
  if (copies_.empty())
    throw Error(ErrorCode::invalid_argument, "stacked state needs N >= 1");
  for (const auto& c : copies_)
    if (c.size() != copies_.front().size())
      throw Error(ErrorCode::dimension_mismatch,
                  "stacked state copies differ in length");
}

StackedState StackedState::broadcast(std::span<const double> value,
                                     std::size_t agents) {
  return StackedState(
      std::vector<Vector>(agents, Vector(value.begin(), value.end())));
}

double StackedState::norm() const {
  double s = 0.0;
  for (const auto& c : copies_)
    for (double x : c) s += x * x;
  return std::sqrt(s);
}

Vector StackedState::average() const {
  Vector mean(length(), 0.0);
  for (const auto& c : copies_)
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += c[k];
  const double inv = 1.0 / static_cast<double>(copies_.size());
  for (double& m : mean) m *= inv;
  return mean;
}

Vector AgentOp::operator()(std::span<const double> input) const {
  Vector out = fn_(input);
  if (out.size() != input.size())
    throw Error(ErrorCode::dimension_mismatch,
                "agent '" + name_ + "' returned " + std::to_string(out.size()) +
                    " values for input of length " +
                    std::to_string(input.size()));
  return out;
}

StackedState consensus_average(const StackedState& state) {
  return StackedState::broadcast(state.average(), state.agent_count());
}

StackedState reflect_consensus(const StackedState& state) {
  const Vector mean = state.average();
  StackedState out = state;
  for (std::size_t i = 0; i < out.agent_count(); ++i)
    for (std::size_t k = 0; k < mean.size(); ++k)
      out[i][k] = 2.0 * mean[k] - state[i][k];
  return out;
}

StackedState reflect_agents(const StackedState& state,
                            std::span<const AgentOp> agents, bool parallel) {
  require_compatible(state, agents);
  const std::size_t n_agents = agents.size();

  auto evaluate = [&](std::size_t i) -> Vector {
    try {
      return agents[i](state[i]);
    } catch (const SolverError& e) {
      throw SolverError(e.code(), "agent '" + agents[i].name() + "': " + e.what(),
                        e.residual(), e.iterations());
    } catch (const Error& e) {
      throw Error(e.code(), "agent '" + agents[i].name() + "': " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::internal,
                  "agent '" + agents[i].name() + "': " + e.what());
    }
  };

  std::vector<Vector> outputs(n_agents);
  if (parallel && n_agents > 1) {
    std::vector<std::future<Vector>> pending;
    pending.reserve(n_agents - 1);
    for (std::size_t i = 1; i < n_agents; ++i)
      pending.push_back(std::async(std::launch::async, evaluate, i));
    outputs[0] = evaluate(0);
    for (std::size_t i = 1; i < n_agents; ++i) outputs[i] = pending[i - 1].get();
  } else {
    for (std::size_t i = 0; i < n_agents; ++i) outputs[i] = evaluate(i);
  }

  for (std::size_t i = 0; i < n_agents; ++i)
    for (std::size_t k = 0; k < outputs[i].size(); ++k)
      outputs[i][k] = 2.0 * outputs[i][k] - state[i][k];
  return StackedState(std::move(outputs));
}

EquilibriumReport mace_iterate(const StackedState& initial,
                               std::span<const AgentOp> agents,
                               const IterationOptions& options) {
  require_compatible(initial, agents);
  if (!(options.tol > 0.0))
    throw Error(ErrorCode::invalid_argument, "mace_iterate: tol must be > 0");
  if (options.max_iter < 1)
    throw Error(ErrorCode::invalid_argument, "mace_iterate: max_iter must be >= 1");
  if (!(options.mann_weight > 0.0 && options.mann_weight <= 1.0))
    throw Error(ErrorCode::invalid_argument,
                "mace_iterate: mann_weight must lie in (0, 1]");

  const double rho = options.mann_weight;
  const double floor = std::numeric_limits<double>::epsilon();
  EquilibriumReport report;
  StackedState v = initial;

  for (int t = 0; t < options.max_iter; ++t) {
    StackedState z;
    try {
      z = reflect_agents(v, agents, options.parallel_agents);
    } catch (const SolverError& e) {
      throw SolverError(e.code(), "iteration " + std::to_string(t) + ": " + e.what(),
                        e.residual(), e.iterations());
    } catch (const Error& e) {
      throw Error(e.code(), "iteration " + std::to_string(t) + ": " + e.what());
    }
    for (std::size_t i = 0; i < z.agent_count(); ++i)
      for (double x : z[i])
        if (!std::isfinite(x))
          throw Error(ErrorCode::numeric,
                      "iteration " + std::to_string(t) + ": agent '" +
                          agents[i].name() + "' produced a non-finite value");

    StackedState next = reflect_consensus(z);
    double step = 0.0;
    for (std::size_t i = 0; i < next.agent_count(); ++i)
      for (std::size_t k = 0; k < next.length(); ++k) {
        const double updated = (1.0 - rho) * v[i][k] + rho * next[i][k];
        const double d = updated - v[i][k];
        step += d * d;
        next[i][k] = updated;
      }
    step = std::sqrt(step);
    const double relative = step / std::max(v.norm(), floor);
    report.step_history.push_back(step);
    report.residual_history.push_back(relative);
    v = std::move(next);
    report.iterations_used = t + 1;
    if (relative < options.tol) {
      report.converged = true;
      break;
    }
  }

  report.solution = v.average();
  report.tensions.resize(v.agent_count());
  for (std::size_t i = 0; i < v.agent_count(); ++i) {
    report.tensions[i] = v[i];
    for (std::size_t k = 0; k < v.length(); ++k)
      report.tensions[i][k] -= report.solution[k];
  }
  report.final_state = std::move(v);
  return report;
}

EquilibriumDiagnostics verify_equilibrium(const EquilibriumReport& report,
                                          std::span<const AgentOp> agents,
                                          double tol) {
  if (agents.size() != report.tensions.size())
    throw Error(ErrorCode::invalid_argument,
                "verify_equilibrium: agent count does not match report");
  const std::size_t n = report.solution.size();
  const double root_n = std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1)));

  EquilibriumDiagnostics diag;
  diag.tol = tol;
  Vector tension_sum(n, 0.0);
  Vector point(n);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      point[k] = report.solution[k] + report.tensions[i][k];
      tension_sum[k] += report.tensions[i][k];
    }
    Vector out = agents[i](point);
    for (std::size_t k = 0; k < n; ++k) out[k] -= report.solution[k];
    diag.agent_residuals.push_back(norm2(out) / root_n);
  }
  diag.consensus_residual = norm2(tension_sum) / root_n;
  diag.pass = diag.consensus_residual <= tol;
  for (double r : diag.agent_residuals) diag.pass = diag.pass && r <= tol;
  return diag;
}

double check_firm_nonexpansiveness(const AgentOp& agent,
                                   const std::function<Vector()>& sampler,
                                   int trials) {
  if (trials < 1)
    throw Error(ErrorCode::invalid_argument,
                "check_firm_nonexpansiveness: trials must be >= 1");
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Vector x = sampler();
    const Vector y = sampler();
    if (x.size() != y.size())
      throw Error(ErrorCode::dimension_mismatch, "sampler lengths differ");
    const Vector fx = agent(x);
    const Vector fy = agent(y);
    double df2 = 0.0, rest2 = 0.0, dx2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double dx = x[k] - y[k];
      const double df = fx[k] - fy[k];
      df2 += df * df;
      rest2 += (dx - df) * (dx - df);
      dx2 += dx * dx;
    }
    worst = std::max(worst, df2 + rest2 - dx2);
  }
  return worst;
}

}  // namespace mace
