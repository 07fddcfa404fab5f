#include <doctest.h>

#include <cmath>

#include "metaadapt/concern_io.hpp"
#include "metaadapt/policy.hpp"
#include "metaadapt/policy_gradient.hpp"
#include "metaadapt/rollout.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace metaadapt;

namespace {

Episode episode_with_rewards(const std::vector<double>& rewards) {
  Episode e;
  for (double r : rewards) e.steps.push_back({0, 0, r, 0});
  return e;
}

// Chain 0 -> 1 -> ... -> n-1 (terminal) under action 0; action 1 stays.
SynthesizedMdp chain(Index n, int horizon) {
  auto mdp = testing::blank_mdp(n, 2, horizon);
  for (Index s = 0; s + 1 < n; ++s) {
    mdp.transition[0](s, s + 1) = 1.0;
    mdp.transition[1](s, s) = 1.0;
    mdp.reward[0](s, s + 1) = 1.0;
  }
  mdp.terminal_states = {n - 1};
  return mdp;
}

}  // namespace

TEST_SUITE("policy_engine") {
  TEST_CASE("zero weights give a uniform distribution over available actions") {
    const PolicyParams p(3, 4, 4);
    Eigen::Array<bool, 4, 1> all;
    all << true, true, true, true;
    const auto uniform = action_distribution(p, 0, all);
    for (Index a = 0; a < 4; ++a) CHECK(uniform(a) == doctest::Approx(0.25));

    Eigen::Array<bool, 4, 1> two;
    two << true, false, true, false;
    const auto masked = action_distribution(p, 1, two);
    CHECK(masked(0) == doctest::Approx(0.5));
    CHECK(masked(1) == 0.0);
    CHECK(masked(2) == doctest::Approx(0.5));
    CHECK(masked(3) == 0.0);
  }

  TEST_CASE("empty mask is a degenerate state") {
    const PolicyParams p(2, 2, 3);
    const Eigen::Array<bool, 3, 1> none = Eigen::Array<bool, 3, 1>::Constant(false);
    CHECK_THROWS_AS(action_distribution(p, 0, none), DegenerateStateError);
  }

  TEST_CASE("raising one logit raises its probability") {
    auto p = PolicyParams::random(3, 4, 4, 11, 0.5);
    const Eigen::Array<bool, 4, 1> all = Eigen::Array<bool, 4, 1>::Constant(true);
    const auto before = action_distribution(p, 2, all);
    p.output_bias()(1) += 0.3;
    const auto after = action_distribution(p, 2, all);
    CHECK(after(1) > before(1));
  }

  TEST_CASE("policy outputs are distributions on every state of every base model") {
    const auto base = build_model_base(load_configset(testing::kExample / "configset.json"));
    const auto p = PolicyParams::random(16, 8, 5, 5, 2.0);
    for (const auto& m : base.models) {
      const auto mask = m.action_mask();
      const auto table = policy_table(p, mask);
      for (Index s = 0; s < m.num_states(); ++s) {
        if (!mask.row(s).any()) continue;
        CHECK(std::abs(table.row(s).sum() - 1.0) <= 1e-9);
        for (Index a = 0; a < m.num_actions(); ++a) {
          if (!mask(s, a)) CHECK(table(s, a) == 0.0);
        }
      }
    }
  }

  TEST_CASE("deterministic MDP and one-hot policy give identical episodes across seeds") {
    const auto mdp = chain(5, 10);
    PolicyParams p(5, 2, 2);
    p.output_bias()(0) = 1000.0;
    const auto first = rollout(p, mdp, 1);
    REQUIRE(first.length() == 4);
    CHECK(first.terminated);
    for (std::uint64_t seed = 2; seed < 20; ++seed) {
      const auto e = rollout(p, mdp, seed);
      REQUIRE(e.length() == first.length());
      for (std::size_t t = 0; t < e.length(); ++t) {
        CHECK(e.steps[t].state == static_cast<Index>(t));
        CHECK(e.steps[t].next_state == static_cast<Index>(t + 1));
        CHECK(e.steps[t].action == 0);
      }
    }
  }

  TEST_CASE("episode length never exceeds the horizon") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto mdp = testing::random_mdp(6, 3, seed, 7);
      const auto p = PolicyParams::random(6, 4, 3, seed);
      CHECK(rollout(p, mdp, seed).length() <= 7);
    }
    PolicyParams stay(5, 2, 2);
    stay.output_bias()(1) = 1000.0;
    const auto e = rollout(stay, chain(5, 12), 3);
    CHECK(e.length() == 12);
    CHECK_FALSE(e.terminated);
  }

  TEST_CASE("state without actions stops the episode with a flag") {
    auto mdp = testing::blank_mdp(3, 1, 10);
    mdp.transition[0](0, 1) = 1.0;
    mdp.terminal_states = {2};
    const auto e = rollout(PolicyParams(3, 2, 1), mdp, 1);
    CHECK(e.length() == 1);
    CHECK(e.stuck);
    CHECK_FALSE(e.terminated);
  }

  TEST_CASE("next-state frequencies match the transition row") {
    auto mdp = testing::blank_mdp(4, 1, 1);
    const std::array<double, 3> probs{0.2, 0.5, 0.3};
    for (Index j = 0; j < 3; ++j) mdp.transition[0](0, j + 1) = probs[j];
    mdp.terminal_states = {1, 2, 3};
    const PolicyParams p(4, 2, 1);
    constexpr int kSteps = 10000;
    std::array<int, 4> counts{};
    Rng rng(2024);
    for (int i = 0; i < kSteps; ++i) ++counts[static_cast<std::size_t>(rollout(p, mdp, rng).steps[0].next_state)];
    CHECK(counts[0] == 0);
    for (std::size_t j = 0; j < 3; ++j) {
      const double mean = kSteps * probs[j];
      const double sd = std::sqrt(kSteps * probs[j] * (1.0 - probs[j]));
      CHECK(std::abs(counts[j + 1] - mean) <= 3.0 * sd);
    }
  }

  TEST_CASE("discounted return") {
    CHECK(discounted_return(episode_with_rewards({1, 1, 1}), 0.5) == doctest::Approx(1.75));
    CHECK(discounted_return(episode_with_rewards({0, 0, 0, 0}), 0.9) == 0.0);
    CHECK(discounted_return(episode_with_rewards({3, 5, 7}), 0.0) == 3.0);
    CHECK(windowed_return(episode_with_rewards({1, 1, 1}), 0.5, 1, 2) == doctest::Approx(0.75));
  }

  TEST_CASE("exact expected return on the bandit") {
    const auto bandit = testing::bandit_mdp(1.0, 0.0);
    auto p = PolicyParams::random(2, 3, 2, 9, 1.0);
    const auto probs = policy_table(p, bandit.action_mask());
    CHECK(expected_return(p, bandit, 0.95) == doctest::Approx(probs(0, 0)));
  }

  TEST_CASE("returns equal to the baseline give a zero gradient") {
    const auto bandit = testing::bandit_mdp(1.0, 1.0);
    const auto p = PolicyParams::random(2, 3, 2, 4);
    const auto batch = sample_batch(p, bandit, 16, 8);
    CHECK(policy_gradient(p, batch, 0.95).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("single step without baseline is minus the score times the reward") {
    const auto bandit = testing::bandit_mdp(1.0, 0.0);
    const PolicyParams p(2, 3, 2);
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const auto batch = sample_batch(p, bandit, 1, seed);
      const auto a = batch.episodes[0].steps[0].action;
      const double r = batch.episodes[0].steps[0].reward;
      const auto g = policy_gradient(p, batch, 0.95, GradientOptions{false});
      // With zero weights h = 0, so only the output bias carries gradient.
      const Eigen::Index b2 = p.size() - 2;
      CHECK(g.head(b2).cwiseAbs().maxCoeff() == 0.0);
      for (Index i = 0; i < 2; ++i) CHECK(g(b2 + i) == doctest::Approx(r * (0.5 - (i == a ? 1.0 : 0.0))));
    }
  }

  TEST_CASE("stale batch is refused") {
    const auto bandit = testing::bandit_mdp();
    const auto p = PolicyParams::random(2, 3, 2, 4);
    const auto batch = sample_batch(p, bandit, 4, 1);
    auto moved = p;
    moved.flat()(0) += 1e-3;
    CHECK_THROWS_AS(policy_gradient(moved, batch, 0.95), StalenessError);
  }

  TEST_CASE("analytic gradient matches central finite differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      CAPTURE(seed);
      CHECK(testing::gradient_check_error(seed) <= 1e-4);
    }
  }

  TEST_CASE("sgd step") {
    const auto p = PolicyParams::random(3, 2, 2, 7);
    const PolicyParams::Vector zero = PolicyParams::Vector::Zero(p.size());
    CHECK(sgd_step(p, zero, 0.5) == p);
    CHECK(sgd_step(p, p.flat(), 1.0).flat().cwiseAbs().maxCoeff() == 0.0);

    const PolicyParams::Vector g = PolicyParams::Vector::LinSpaced(p.size(), -1.0, 1.0);
    const auto twice = sgd_step(sgd_step(p, g, 0.25), g, 0.25);
    const auto once = sgd_step(p, g, 0.5);
    CHECK((twice.flat() - once.flat()).cwiseAbs().maxCoeff() <= 1e-15);

    const auto copy = p;
    (void)sgd_step(p, g, 0.1);
    CHECK(p == copy);

    PolicyParams::Vector bad = g;
    bad(0) = std::nan("");
    CHECK_THROWS_AS(sgd_step(p, bad, 0.1), NumericalError);
  }

  TEST_CASE("gradient ascent on the bandit finds the paying arm") {
    const auto bandit = testing::bandit_mdp(1.0, 0.0);
    auto p = PolicyParams::random(2, 8, 2, 3);
    const Eigen::Array<bool, 2, 1> both = Eigen::Array<bool, 2, 1>::Constant(true);
    int steps = 0;
    while (steps < 500 && action_distribution(p, 0, both)(0) <= 0.95) {
      const auto batch = sample_batch(p, bandit, 10, derive_seed(77, {static_cast<std::uint64_t>(steps)}));
      p = sgd_step(p, policy_gradient(p, batch, 0.95), 0.5);
      ++steps;
    }
    CHECK(action_distribution(p, 0, both)(0) > 0.95);
    CHECK(steps < 500);
  }
}
