#pragma once

#include "grid/graph.hpp"
#include "grid/scenario.hpp"
#include "grid/simulator.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace grid {

/// Anything that can be observed and actuated: the simulator here, a
/// building controller elsewhere.
class ExecutionBackend {
 public:
  virtual ~ExecutionBackend() = default;

  virtual const std::vector<Variable>& variables() const = 0;
  /// Returns to the operating conditions identified by `episode` with every
  /// intervention lifted. Calling it twice with the same id replays the same
  /// uncontrolled conditions where the backend can do so.
  virtual void reset(std::uint64_t episode) = 0;
  virtual Eigen::VectorXd observe() = 0;
  virtual void intervene(int variable, double value) = 0;
  virtual void step() = 0;
  /// Wall-clock length of one step, used by the scheduler.
  virtual double seconds_per_step() const { return 60.0; }
};

class SimulatorBackend final : public ExecutionBackend {
 public:
  SimulatorBackend(ScenarioSpec spec, std::uint64_t seed);

  const std::vector<Variable>& variables() const override;
  void reset(std::uint64_t episode) override;
  Eigen::VectorXd observe() override;
  void intervene(int variable, double value) override;
  void step() override;

  const ScenarioSpec& spec() const { return spec_; }
  const SimState& state() const { return state_; }

 private:
  ScenarioSpec spec_;
  std::uint64_t seed_;
  SimState state_;
};

}  // namespace grid
