#include <doctest.h>

#include <filesystem>

#include "metaadapt/concern_io.hpp"
#include "metaadapt/experiments.hpp"
#include "support.hpp"

using namespace metaadapt;

namespace {

CaseSpec find_case(const std::string& id) {
  for (auto& c : load_cases(testing::kExample / "cases.json")) {
    if (c.id == id) return c;
  }
  FAIL("missing case " << id);
  return {};
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.meta.outer_iterations = 3;
  cfg.meta.meta_batch_size = 4;
  cfg.meta.inner_gradient_steps = 1;
  cfg.meta.hidden = 6;
  cfg.pretrain.training_steps = 5;
  cfg.pretrain.hidden = 6;
  cfg.ope_hidden = 6;
  return cfg;
}

ApproachCurves curves_from(Approach approach, Eigen::MatrixXd samples) { return {approach, std::move(samples)}; }

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("metaadapt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("experiment_cli") {
  TEST_CASE("utility") {
    CHECK(utility(0.0, 0.0, 1.0, kPreferences[0]) == doctest::Approx(0.45));
    CHECK_NOTHROW(kPreferences[1].validate());
    for (const auto& w : kPreferences) {
      for (double t : {0.0, 0.3, 1.0}) CHECK(utility(t, t, t, w) == doctest::Approx((w.a3 - w.a1 - w.a2) * t));
    }
    CHECK_THROWS_AS((UtilityWeights{0.5, 0.5, 0.5}.validate()), ConfigurationError);
    CHECK_THROWS_AS((UtilityWeights{-0.1, 0.6, 0.5}.validate()), ConfigurationError);
    CHECK_THROWS_AS(utility(0.1, 0.1, 0.1, UtilityWeights{0.2, 0.2, 0.2}), ConfigurationError);
  }

  TEST_CASE("min-max normalization maps extremes to 0 and 1") {
    const auto n = min_max_normalize({4.0, 10.0, 7.0, 4.0});
    CHECK(n[0] == 0.0);
    CHECK(n[1] == 1.0);
    CHECK(n[2] == doctest::Approx(0.5));
    CHECK(n[3] == 0.0);
    for (double v : min_max_normalize({2.5, 2.5})) CHECK(v == 0.0);
  }

  TEST_CASE("converged step") {
    CHECK(converged_step({0.0, 0.5, 0.96, 1.0}) == 2);
    CHECK(converged_step({1.0, 1.0}) == 0);
    CHECK(converged_step({0.0, 0.0, 0.0}) == 0);
    CHECK(converged_step({-1.0, -2.0}) == 0);
    CHECK_THROWS_AS(converged_step({}), ConfigurationError);
  }

  TEST_CASE("case file loads all eight causes and coverages") {
    const auto cases = load_cases(testing::kExample / "cases.json");
    REQUIRE(cases.size() == 8);
    int covered = 0;
    for (const auto& c : cases) {
      covered += c.covered;
      CHECK_NOTHROW(load_case(c));
    }
    CHECK(covered == 4);
  }

  TEST_CASE("coverage flag must match the configuration set") {
    auto spec = find_case("objective-not-covered");
    spec.covered = true;
    CHECK_THROWS_AS(load_case(spec), ConfigurationError);
    spec = find_case("objective-covered");
    spec.covered = false;
    CHECK_THROWS_AS(load_case(spec), ConfigurationError);
    spec = find_case("objective-covered");
    spec.assumed = spec.truth;
    spec.assumed.obj = testing::kExample / "obj_g4.json";
    CHECK_THROWS_AS(load_case(spec), ConfigurationError);
  }

  TEST_CASE("case curves have one sample per repetition and step") {
    auto spec = find_case("objective-covered");
    spec.repetitions = 3;
    spec.max_gradient_steps = 4;
    const auto loaded = load_case(spec);
    const auto cfg = tiny_config();
    const std::vector<Approach> all{Approach::merap, Approach::ope, Approach::pretrained, Approach::oracle};
    const auto result = run_case(loaded, all, 5, cfg);
    for (Approach a : all) {
      const auto& c = result.at(a);
      CHECK(c.samples.rows() == 3);
      CHECK(c.samples.cols() == 5);
      CHECK((c.mean().array() >= c.min().array() - 1e-12).all());
      CHECK((c.mean().array() <= c.max().array() + 1e-12).all());
    }
    for (Index k = 0; k < 5; ++k) CHECK(result.at(Approach::oracle).samples(0, k) == result.oracle_return);
    for (Index k = 0; k < 5; ++k) {
      CHECK(result.at(Approach::pretrained).samples(1, k) == result.at(Approach::pretrained).samples(1, 0));
    }

    const auto again = run_case(loaded, all, 5, cfg);
    for (Approach a : all) CHECK(again.at(a).samples == result.at(a).samples);

    const auto table = runs_table({result});
    CHECK(table.rows.size() == 4 * 3 * 5);
    const auto back = cases_from_runs(table);
    REQUIRE(back.size() == 1);
    CHECK(back[0].oracle_return == result.oracle_return);
    for (Approach a : all) CHECK(back[0].at(a).samples == result.at(a).samples);
    CHECK(curves_table({result}).rows.size() == 4 * 5);
  }

  TEST_CASE("a one-point grid yields one row") {
    const auto base = build_model_base(load_configset(testing::kExample / "configset.json"));
    SweepOptions opts;
    opts.repetitions = 1;
    opts.max_gradient_steps = 2;
    std::vector<TrainedVariant> trained;
    const auto rows = run_sweep({{1, 2}}, base, {base.models[0]}, 3, tiny_config(), opts, &trained);
    CHECK(rows.size() == 1);
    CHECK(trained.size() == 1);
    CHECK(rows[0].training_ms > 0.0);
    CHECK_THROWS_AS(run_sweep({}, base, {base.models[0]}, 3, tiny_config(), opts), ConfigurationError);
  }

  TEST_CASE("default grid contains the named variants") {
    const auto grid = default_sweep_grid();
    CHECK(grid.size() == 6);
    for (const auto& [name, point] : default_variants()) {
      bool found = false;
      for (const auto& g : grid) {
        found = found || (g.inner_gradient_steps == point.inner_gradient_steps &&
                          g.meta_batch_size == point.meta_batch_size);
      }
      CHECK_MESSAGE(found, name);
    }
  }

  TEST_CASE("sweep scoring uses normalized columns") {
    std::vector<SweepRow> rows{{{1, 30}, 100.0, 5.0, 2.0, {}}, {{3, 90}, 300.0, 1.0, 4.0, {}}};
    score_sweep(rows);
    // Row 0: t=0, e=1, r=0. Row 1: t=1, e=0, r=1.
    for (std::size_t p = 0; p < 3; ++p) {
      CHECK(rows[0].utility[p] == doctest::Approx(-kPreferences[p].a2));
      CHECK(rows[1].utility[p] == doctest::Approx(-kPreferences[p].a1 + kPreferences[p].a3));
    }
    const auto back = sweep_from_table(sweep_table(rows));
    REQUIRE(back.size() == 2);
    CHECK(back[1].point.meta_batch_size == 90);
    CHECK(back[1].utility[2] == rows[1].utility[2]);
  }

  TEST_CASE("OPE has no offline time and is the last comparison row") {
    const auto base = build_model_base(load_configset(testing::kExample / "configset.json"));
    const auto cfg = tiny_config();
    ComparisonOptions opts;
    opts.repetitions = 2;
    opts.merap_steps = 3;
    opts.ope_steps = 3;
    std::vector<NamedVariant> variants;
    for (const auto& [name, point] : default_variants()) {
      variants.push_back({name, train_variant(base, {point.inner_gradient_steps, 2}, cfg.meta, 1)});
    }
    const auto rows = run_replanning_comparison(variants, base.models[1], 9, cfg, opts);
    REQUIRE(rows.size() == 4);
    CHECK(rows.back().variant == "ope");
    CHECK(rows.back().offline_ms == 0.0);
    CHECK(rows.back().replan_ratio_vs_ope == doctest::Approx(rows.back().replan_ms > 0 ? 1.0 : 0.0));
    const auto back = comparison_from_table(comparison_table({rows, rows}));
    REQUIRE(back.size() == 2);
    CHECK(back[1][2].variant == "merap_v3");
    CHECK(back[1][2].replan_ms == rows[2].replan_ms);
  }

  TEST_CASE("tables round trip through both formats") {
    Table t{{"name", "count", "value"}, {}};
    t.add({std::string("a,b \"q\""), 3LL, 0.1});
    t.add({std::string("plain"), -7LL, 1e-300});
    for (auto fmt : {TableFormat::csv, TableFormat::structured}) {
      const auto dir = scratch_dir(extension(fmt).substr(1));
      write_table(t, dir, "t", fmt);
      const auto back = read_table(dir, "t");
      CHECK(back.columns == t.columns);
      REQUIRE(back.rows.size() == 2);
      CHECK(back.text(0, "name") == "a,b \"q\"");
      CHECK(back.number(1, "count") == -7.0);
      CHECK(back.number(0, "value") == 0.1);
      CHECK(back.number(1, "value") == 1e-300);
    }
    CHECK_THROWS(parse_table_format("xml"));
  }

  TEST_CASE("acceptance checks on synthetic results") {
    Eigen::MatrixXd good = Eigen::MatrixXd::Constant(15, 31, 1.0);
    good.col(0).setZero();
    Eigen::MatrixXd poor = Eigen::MatrixXd::Constant(15, 31, 0.2);
    CaseResult covered{"c", Cause::objective, true, 1.0,
                       {curves_from(Approach::merap, good), curves_from(Approach::ope, poor),
                        curves_from(Approach::pretrained, poor)}};
    CHECK(check_covered_adaptability({covered}).passed);
    CHECK(check_baseline_separation({covered}).passed);

    CaseResult stuck{"n", Cause::objective, false, 1.0, {curves_from(Approach::merap, poor)}};
    CHECK(check_local_optimum({covered, stuck}).passed);
    CHECK_FALSE(check_local_optimum({covered}).passed);

    CaseResult slow = covered;
    slow.curves[0] = curves_from(Approach::merap, poor);
    CHECK_FALSE(check_covered_adaptability({slow}).passed);
    CHECK_FALSE(check_baseline_separation({slow}).passed);

    const std::vector<ComparisonRow> run{{"merap_v1", 10, 3.0, 0.03, 1, 3},
                                         {"merap_v2", 20, 2.0, 0.02, 1, 2},
                                         {"merap_v3", 30, 1.0, 0.01, 1, 1},
                                         {"ope", 0, 100.0, 1.0, 1, 60}};
    CHECK(check_replanning_ratio({run}).passed);
    CHECK(check_orderings({run, run}).passed);
    auto swapped = run;
    swapped[1].replan_ms = 0.5;
    CHECK_FALSE(check_orderings({run, swapped}).passed);
    swapped[2].replan_ratio_vs_ope = 0.2;
    CHECK_FALSE(check_replanning_ratio({swapped}).passed);

    std::vector<SweepRow> rows{{{1, 30}, 10.0, 0, 0, {}}, {{1, 70}, 20.0, 0, 0, {}}, {{3, 30}, 30.0, 0, 0, {}}};
    CHECK(check_sweep_monotonicity(rows).passed);
    rows[1].training_ms = 5.0;
    CHECK_FALSE(check_sweep_monotonicity(rows).passed);
    CHECK(format_check(check_sweep_monotonicity(rows)).find("criterion 6 [FAIL]") == 0);
  }
}
