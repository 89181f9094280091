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

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mace {

using Vector = std::vector<double>;

// N copies of length-n vectors, one per agent.
class StackedState {
 public:
  StackedState() = default;
  StackedState(std::size_t agents, std::size_t length, double fill = 0.0);
  explicit StackedState(std::vector<Vector> copies);

  // Every copy set to `value`.
  static StackedState broadcast(std::span<const double> value,
                                std::size_t agents);

  std::size_t agent_count() const noexcept { return copies_.size(); }
  std::size_t length() const noexcept {
    return copies_.empty() ? 0 : copies_.front().size();
  }

  Vector& operator[](std::size_t i) noexcept { return copies_[i]; }
  const Vector& operator[](std::size_t i) const noexcept { return copies_[i]; }

  const std::vector<Vector>& copies() const noexcept { return copies_; }

  // Euclidean norm over the whole stack.
  double norm() const;
  // Arithmetic mean of the copies.
  Vector average() const;

  friend bool operator==(const StackedState&, const StackedState&) = default;

 private:
  std::vector<Vector> copies_;
};

// A named map R^n -> R^n. Must be pure and safe to call concurrently.
class AgentOp {
 public:
  using Fn = std::function<Vector(std::span<const double>)>;

  AgentOp(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  const std::string& name() const noexcept { return name_; }
  // Evaluates the agent; throws Error if the output length differs.
  Vector operator()(std::span<const double> input) const;

 private:
  std::string name_;
  Fn fn_;
};

struct EquilibriumReport {
  Vector solution;                // x* = <v>
  std::vector<Vector> tensions;   // u_i = v_i - x*
  std::vector<double> residual_history;  // ||v+ - v|| / max(||v||, eps)
  std::vector<double> step_history;      // ||v+ - v||
  int iterations_used = 0;
  bool converged = false;
  StackedState final_state;
};

struct IterationOptions {
  double tol = 1e-4;
  int max_iter = 30;
  double mann_weight = 1.0;
  bool parallel_agents = true;
};

struct EquilibriumDiagnostics {
  std::vector<double> agent_residuals;  // ||F_i(x*+u_i) - x*|| / sqrt(n)
  double consensus_residual = 0.0;      // ||sum_i u_i|| / sqrt(n)
  double tol = 0.0;
  bool pass = false;
};

// (G v)_i = <v> for every i.
StackedState consensus_average(const StackedState& state);
// (2G - I) v.
StackedState reflect_consensus(const StackedState& state);
// (2F - I) v: copy i becomes 2 F_i(v_i) - v_i.
StackedState reflect_agents(const StackedState& state,
                            std::span<const AgentOp> agents,
                            bool parallel = false);

// Iterates v <- (1 - rho) v + rho (2G - I)(2F - I) v.
EquilibriumReport mace_iterate(const StackedState& initial,
                               std::span<const AgentOp> agents,
                               const IterationOptions& options);

EquilibriumDiagnostics verify_equilibrium(const EquilibriumReport& report,
                                          std::span<const AgentOp> agents,
                                          double tol);

// Largest sampled value of
//   ||F(x)-F(y)||^2 + ||(x-y)-(F(x)-F(y))||^2 - ||x-y||^2.
// Nonpositive (up to roundoff) for firmly nonexpansive maps.
double check_firm_nonexpansiveness(const AgentOp& agent,
                                   const std::function<Vector()>& sampler,
                                   int trials);

}  // namespace mace
