#include <doctest.h>

#include "metaadapt/baselines.hpp"
#include "metaadapt/concern_io.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace metaadapt;

TEST_SUITE("baselines_oracle") {
  TEST_CASE("two-state chain") {
    auto mdp = testing::blank_mdp(2, 1);
    mdp.transition[0](0, 1) = 1.0;
    mdp.reward[0](0, 1) = 1.0;
    mdp.terminal_states = {1};
    const auto sol = solve_oracle(mdp, 0.5);
    CHECK(sol.values(0) == doctest::Approx(1.0));
    CHECK(sol.optimal_return == doctest::Approx(1.0));
    CHECK(sol.policy[0] == 0);
    CHECK(sol.policy[1] == -1);
  }

  TEST_CASE("all-zero rewards give zero values") {
    const auto base = build_model_base(load_configset(testing::kExample / "configset.json"));
    auto mdp = base.models[4];
    for (auto& r : mdp.reward) r.setZero();
    CHECK(solve_oracle(mdp, 0.95).values.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("deterministic fork picks the larger reward") {
    auto mdp = testing::blank_mdp(3, 2);
    mdp.action_names = {"d", "u"};
    mdp.transition[0](0, 2) = 1.0;
    mdp.reward[0](0, 2) = 1.0;
    mdp.transition[1](0, 1) = 1.0;
    mdp.reward[1](0, 1) = 2.0;
    mdp.terminal_states = {1, 2};
    const auto sol = solve_oracle(mdp, 0.9);
    CHECK(sol.policy[0] == 1);
    CHECK(sol.optimal_return == doctest::Approx(2.0));
  }

  TEST_CASE("value iteration equals policy enumeration on random MDPs") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      CAPTURE(seed);
      Rng rng(seed);
      const auto n = 2 + static_cast<Index>(rng.below(5));
      const auto m = 1 + static_cast<Index>(rng.below(3));
      const auto mdp = testing::random_mdp(n, m, derive_seed(seed, {1}), 20, 0.9);
      const auto sol = solve_oracle(mdp, 0.9, 1e-12);
      const auto expected = testing::brute_force_values(mdp, 0.9);
      CHECK((sol.values - expected).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK(bellman_residual(mdp, sol.values, 0.9) <= 1e-6);
      // The greedy policy attains the optimal values.
      Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
      Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
      const Eigen::MatrixXd immediate = mdp.expected_reward();
      for (Index s = 0; s < n; ++s) {
        const auto a = sol.policy[static_cast<std::size_t>(s)];
        if (a < 0) continue;
        p.row(s) = mdp.transition[a].row(s);
        r(s) = immediate(s, a);
      }
      const Eigen::VectorXd greedy = (Eigen::MatrixXd::Identity(n, n) - 0.9 * p).fullPivLu().solve(r);
      CHECK((greedy - expected).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }

  TEST_CASE("undiscounted loop without termination does not converge") {
    auto mdp = testing::blank_mdp(2, 1);
    mdp.transition[0](0, 0) = 1.0;
    mdp.reward[0](0, 0) = 1.0;
    mdp.terminal_states = {1};
    CHECK_THROWS_AS(solve_oracle(mdp, 1.0, 1e-10, 500), NonConvergenceError);
  }

  TEST_CASE("OPE with zero steps is the random policy") {
    const auto mdp = testing::example_mdp("env_open.json", "cap_low.json", "obj_g2.json");
    OpeOptions ope;
    ope.adapt.max_gradient_steps = 0;
    const auto out = train_ope(mdp, ope);
    REQUIRE(out.curve.returns.size() == 1);
    CHECK(out.curve.returns[0] == expected_return(ope_initial_params(mdp, ope), mdp, ope.adapt.discount));
  }

  TEST_CASE("OPE on the bandit reaches the paying arm within 500 steps") {
    const auto bandit = testing::bandit_mdp(1.0, 0.0);
    OpeOptions ope;
    ope.adapt.max_gradient_steps = 500;
    ope.adapt.step_size = 0.5;
    ope.adapt.episodes = 10;
    ope.hidden = 8;
    const auto out = train_ope(bandit, ope);
    const Eigen::Array<bool, 2, 1> both = Eigen::Array<bool, 2, 1>::Constant(true);
    CHECK(action_distribution(out.params, 0, both)(0) >= 0.95);
  }

  TEST_CASE("pre-trained policy") {
    const auto base = build_model_base(load_configset(testing::kExample / "configset.json"));
    PretrainOptions opts;
    opts.max_gradient_steps = 5;
    const std::size_t id = 2;
    const double discount = opts.discount;

    SUBCASE("on its training model it is near the oracle") {
      const auto& truth = base.models[id];
      const auto out = pretrained_policy(base, id, truth, opts);
      REQUIRE(out.curve.returns.size() == 6);
      for (double r : out.curve.returns) CHECK(r == out.curve.returns.front());
      CHECK(out.curve.returns.front() >= 0.9 * solve_oracle(truth, discount).optimal_return);
    }

    SUBCASE("with another goal it is below the oracle") {
      const auto truth = testing::example_mdp("env_b_blocked.json", "cap_low.json", "obj_g1.json");
      const auto out = pretrained_policy(base, id, truth, opts);
      CHECK(out.curve.returns.front() < solve_oracle(truth, discount).optimal_return);
    }

    SUBCASE("unknown model id") { CHECK_THROWS(pretrained_policy(base, 99, base.models[0], opts)); }
  }
}
