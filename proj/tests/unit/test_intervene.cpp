#include "grid/backend.hpp"
#include "grid/errors.hpp"
#include "grid/intervene.hpp"
#include "grid/simulator.hpp"

#include <gtest/gtest.h>

using namespace grid;

namespace {

class FixedValueProvider final : public PriorProvider {
 public:
  explicit FixedValueProvider(std::string answer) : answer_(std::move(answer)) {}
  ProviderKind kind() const override { return ProviderKind::Remote; }
  std::string complete(const PromptSpec&, const std::vector<Variable>&) const override { return answer_; }

 private:
  std::string answer_;
};

const Sleeper kNoSleep = [](std::chrono::milliseconds) {};

TrialResult trial(double delta) {
  TrialResult t;
  t.delta = delta;
  return t;
}

}  // namespace

TEST(SchedulerTest, SpacingAndStabilization) {
  Scheduler s(300, 600, 1000);
  EXPECT_DOUBLE_EQ(s.earliest_start(), 0.0);
  s.book(0, 2400);
  EXPECT_DOUBLE_EQ(s.earliest_start(), 3000.0);
  EXPECT_THROW(s.book(2900, 10), SpacingViolation);
  s.book(3000, 10);
  Scheduler short_trials(300, 0, 1000);
  short_trials.book(0, 10);
  EXPECT_DOUBLE_EQ(short_trials.earliest_start(), 300.0);
  EXPECT_THROW(short_trials.book(200, 10), SpacingViolation);
}

TEST(SchedulerTest, DailyCap) {
  Scheduler s(0, 0, 2);
  s.book(0, 10);
  s.book(s.earliest_start(), 10);
  EXPECT_EQ(s.booked_on_day(0), 2);
  EXPECT_DOUBLE_EQ(s.earliest_start(), 86400.0);
  EXPECT_THROW(s.book(100, 10), CapExceeded);
  Scheduler strict(0, 0, 1, false);
  strict.book(0, 10);
  EXPECT_THROW(strict.earliest_start(), CapExceeded);
}

TEST(Design, FallbackPicksFartherBound) {
  const auto vars = base_scenario().variables;
  InterventionConfig cfg;
  EXPECT_DOUBLE_EQ(design_intervention({0, 3}, vars, 23.5, cfg).target_value, 30.0);
  EXPECT_DOUBLE_EQ(design_intervention({0, 3}, vars, 25.0, cfg).target_value, 18.0);
  EXPECT_DOUBLE_EQ(design_intervention({0, 3}, vars, 24.0, cfg).target_value, 30.0);
  EXPECT_EQ(design_intervention({0, 3}, vars, 24.0, cfg).origin, "fallback");
  EXPECT_THROW(design_intervention({3, 4}, vars, 0.0, cfg), NotIntervenable);
  // the mock provider never proposes values
  const MockProvider mock;
  EXPECT_EQ(design_intervention({1, 3}, vars, 45, cfg, &mock).origin, "fallback");
}

TEST(Design, RemoteValueIsClamped) {
  const auto vars = base_scenario().variables;
  const FixedValueProvider p("{\"variable\": \"Temperature\", \"value\": 45}");
  const auto plan = design_intervention({0, 3}, vars, 23.5, {}, &p, nullptr, kNoSleep);
  EXPECT_EQ(plan.origin, "llm");
  EXPECT_DOUBLE_EQ(plan.target_value, 30.0);
  const FixedValueProvider junk("no idea");
  EXPECT_EQ(design_intervention({0, 3}, vars, 23.5, {}, &junk, nullptr, kNoSleep).origin, "fallback");
}

TEST(Adjudicate, AnyTrialOrMajority) {
  EXPECT_EQ(adjudicate({trial(0.02), trial(-0.15), trial(0.0)}, 0.1), EdgeStatus::Validated);
  EXPECT_EQ(adjudicate({trial(0.1), trial(-0.1), trial(0.05)}, 0.1), EdgeStatus::Refuted);
  EXPECT_EQ(adjudicate({trial(0.2), trial(0.0), trial(0.0)}, 0.1, true), EdgeStatus::Refuted);
  EXPECT_EQ(adjudicate({trial(0.2), trial(0.3), trial(0.0)}, 0.1, true), EdgeStatus::Validated);
  EXPECT_EQ(adjudicate({}, 0.1), EdgeStatus::Refuted);
}

TEST(Execute, TrueEdgeValidatesNonEdgeRefutes) {
  const auto spec = base_scenario();
  SimulatorBackend backend(spec, 3);
  Scheduler sched;
  std::uint64_t episode = 0;
  const auto outcomes = OutcomeVariables::from_names(spec.variables, "OverallSatisfaction", "EnergyConsumption");
  const auto plan = design_intervention({0, 3}, spec.variables, 23.5, {});
  const auto rec = execute(plan, backend, sched, episode, outcomes);
  EXPECT_EQ(rec.verdict, EdgeStatus::Validated);
  ASSERT_EQ(rec.trials.size(), 3u);
  EXPECT_EQ(episode, 3u);
  EXPECT_GT(rec.representative_delta(), 0.1);
  EXPECT_GT(rec.energy_increase, 0.0);
  EXPECT_GE(rec.satisfaction_loss, 0.0);
  // the gate fired, so every trial used the long window
  for (const auto& t : rec.trials) EXPECT_EQ(t.window, 60);
  EXPECT_EQ(rec.post_samples.size(), 180u);
  EXPECT_EQ(sched.bookings().size(), 3u);

  const auto non_edge = execute(design_intervention({0, 1}, spec.variables, 23.5, {}), backend, sched, episode);
  EXPECT_EQ(non_edge.verdict, EdgeStatus::Refuted);
  for (const auto& t : non_edge.trials) {
    EXPECT_DOUBLE_EQ(t.delta, 0.0);
    EXPECT_EQ(t.window, 20);
  }
}

TEST(Execute, SharedTargetsMatchSeparateRuns) {
  const auto spec = base_scenario();
  const auto plan = design_intervention({1, 4}, spec.variables, 45.0, {});
  SimulatorBackend b1(spec, 8), b2(spec, 8);
  Scheduler s1, s2;
  std::uint64_t e1 = 0, e2 = 0;
  const auto single = execute(plan, b1, s1, e1);
  const auto multi = execute_multi(plan, {3, 0, 4}, b2, s2, e2);
  ASSERT_EQ(multi.size(), 3u);
  EXPECT_EQ(multi[0].plan.target, "OverallSatisfaction");
  EXPECT_EQ(multi[1].plan.target, "EnergyConsumption");
  EXPECT_EQ(multi[2].plan.target, "Temperature");
  EXPECT_EQ(multi[2].verdict, EdgeStatus::Refuted);
  EXPECT_EQ(multi[0].verdict, single.verdict);
  for (std::size_t k = 0; k < single.trials.size(); ++k)
    EXPECT_DOUBLE_EQ(multi[0].trials[k].delta, single.trials[k].delta);
  EXPECT_EQ(multi[1].post_samples.size(), multi[0].post_samples.size());
}

TEST(Execute, RejectsBadPlans) {
  const auto spec = base_scenario();
  SimulatorBackend backend(spec, 1);
  Scheduler sched;
  std::uint64_t ep = 0;
  auto plan = design_intervention({0, 3}, spec.variables, 23.5, {});
  plan.target_value = 99;
  EXPECT_THROW(execute(plan, backend, sched, ep), OutOfBounds);
  plan = design_intervention({0, 3}, spec.variables, 23.5, {});
  plan.edge = {3, 4};
  EXPECT_THROW(execute(plan, backend, sched, ep), NotIntervenable);
  plan.config.n_trials = 0;
  EXPECT_THROW(execute(plan, backend, sched, ep), InvalidArgument);
}

TEST(PseudoSamples, WeightAndRegime) {
  const auto spec = base_scenario();
  SimulatorBackend backend(spec, 2);
  Scheduler sched;
  std::uint64_t ep = 0;
  const auto rec = execute(design_intervention({2, 3}, spec.variables, 90, {}), backend, sched, ep);
  const auto ps = to_pseudo_samples(rec);
  ASSERT_FALSE(ps.empty());
  for (const auto& s : ps) {
    EXPECT_DOUBLE_EQ(s.weight, 2.0);
    EXPECT_EQ(s.regime, Regime::intervention("AirQuality", 500));
    EXPECT_DOUBLE_EQ(s.values(2), 500.0);
  }
}

TEST(RecordJson, FieldsAndJsonl) {
  const auto spec = base_scenario();
  SimulatorBackend backend(spec, 2);
  Scheduler sched;
  std::uint64_t ep = 0;
  const auto rec = execute(design_intervention({0, 4}, spec.variables, 23.5, {}), backend, sched, ep);
  const auto j = record_to_json(rec);
  EXPECT_EQ(j["plan"]["edge"], nlohmann::json::array({"Temperature", "OverallSatisfaction"}));
  EXPECT_EQ(j["trial_results"].size(), 3u);
  EXPECT_EQ(j["verdict"], std::string(to_string(rec.verdict)));
  const auto lines = records_to_jsonl({rec, rec});
  EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), 2);
}
