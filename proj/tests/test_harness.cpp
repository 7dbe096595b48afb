#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "phaselearn/harness.hpp"

#include <algorithm>
#include <cmath>

using namespace phaselearn;

TEST_CASE("run_trials basics") {
    ExperimentSpec spec;
    spec.learner = "binary";
    spec.n = 6;
    spec.d = 1;
    spec.m_grid = {64};
    spec.trials = 1;
    spec.seed = 71;
    auto rows = run_trials(spec);
    REQUIRE_EQ(rows.size(), 1u);
    CHECK_EQ(rows[0].successes, 1);
    CHECK_EQ(rows[0].trials, 1);
    CHECK_EQ(rows[0].mean_samples, 6.0 * 64);

    ExperimentSpec bad = spec;
    bad.m_grid.clear();
    CHECK_THROWS(run_trials(bad));
    bad = spec;
    bad.learner = "nonsense";
    CHECK_THROWS(run_trials(bad));
    bad = spec;
    bad.learner = "generalized";
    bad.d = 2;
    bad.q = 8;
    CHECK_THROWS(run_trials(bad));
    bad = spec;
    bad.learner = "stabilizer";
    bad.support_dim = 9;
    CHECK_THROWS(run_trials(bad));
}

TEST_CASE("csv output is deterministic and embeds the config") {
    ExperimentSpec spec;
    spec.learner = "binary";
    spec.n = 6;
    spec.d = 2;
    spec.m_grid = {8, 16, 32};
    spec.trials = 20;
    spec.seed = 72;
    auto csv1 = to_csv(spec, run_trials(spec));
    auto csv2 = to_csv(spec, run_trials(spec));
    CHECK_EQ(csv1, csv2);
    CHECK(csv1.find("seed=72") != std::string::npos);
    CHECK(csv1.find("learner=binary") != std::string::npos);
    CHECK(csv1.find("m,successes,trials,mean_samples,mean_wall_ms") != std::string::npos);

    // Worker fan-out merges deterministically by trial index.
    ExperimentSpec par = spec;
    par.workers = 4;
    CHECK_EQ(to_csv(par, run_trials(par)).find("workers=4") != std::string::npos, true);
    auto rows1 = run_trials(spec);
    auto rows4 = run_trials(par);
    REQUIRE_EQ(rows1.size(), rows4.size());
    for (std::size_t i = 0; i < rows1.size(); ++i) {
        CHECK_EQ(rows1[i].successes, rows4[i].successes);
        CHECK_EQ(rows1[i].mean_samples, rows4[i].mean_samples);
    }

    // Per-trial outcomes depend on (m, trial index) only: reordering the grid
    // permutes the rows without changing any of them.
    ExperimentSpec rev = spec;
    std::reverse(rev.m_grid.begin(), rev.m_grid.end());
    auto rows_rev = run_trials(rev);
    for (std::size_t i = 0; i < rows1.size(); ++i) {
        const TrialRow& r = rows_rev[rows_rev.size() - 1 - i];
        CHECK_EQ(rows1[i].m, r.m);
        CHECK_EQ(rows1[i].successes, r.successes);
        CHECK_EQ(rows1[i].mean_samples, r.mean_samples);
    }
}

TEST_CASE("every learner id runs end to end through the sweep") {
    struct Case {
        const char* learner;
        int n, d, m;
        double eps;
    };
    for (auto c : {Case{"binary", 6, 2, 40, 0.0}, Case{"sparse", 8, 2, 32, 0.0},
                   Case{"generalized", 4, 2, 200, 0.0}, Case{"stabilizer", 6, 2, 220, 0.0},
                   Case{"noisy-quadratic", 8, 2, 300, 0.1},
                   Case{"local-noisy-quadratic", 8, 2, 300, 0.1}}) {
        ExperimentSpec spec;
        spec.learner = c.learner;
        spec.n = c.n;
        spec.d = c.d;
        spec.q = 4;
        spec.s = 3;
        spec.gd = 2;
        spec.eps = c.eps;
        spec.support_dim = 3;
        spec.m_grid = {c.m};
        spec.trials = 10;
        spec.seed = 73;
        auto rows = run_trials(spec);
        REQUIRE_EQ(rows.size(), 1u);
        INFO(c.learner);
        CHECK_GE(rows[0].successes, 8);
    }
}

TEST_CASE("fit_exponent on synthetic power laws") {
    std::vector<std::pair<double, double>> quad, cubic;
    for (double n : {6.0, 8.0, 10.0, 12.0}) {
        quad.push_back({n, n * n});
        cubic.push_back({n, 0.5 * n * n * n});
    }
    auto f2 = fit_exponent(quad);
    CHECK_LT(std::abs(f2.exponent - 2.0), 1e-9);
    CHECK_LT(f2.half_width, 1e-9);
    auto f3 = fit_exponent(cubic);
    CHECK_LT(std::abs(f3.exponent - 3.0), 1e-9);
    CHECK_THROWS(fit_exponent({{6.0, 36.0}, {8.0, 64.0}}));
}

TEST_CASE("threshold_m picks the first qualifying grid point") {
    std::vector<TrialRow> rows = {{8, 50, 100, 0, 0}, {16, 95, 100, 0, 0}, {32, 100, 100, 0, 0}};
    CHECK_EQ(threshold_m(rows, 0.95), 16);
    CHECK_EQ(threshold_m(rows, 0.99), 32);
    CHECK_EQ(threshold_m(rows, 1.1), -1);
}

TEST_CASE("threshold_scan brackets the binary learner's sample threshold") {
    ExperimentSpec spec;
    spec.learner = "binary";
    spec.n = 6;
    spec.d = 2;
    spec.trials = 50;
    spec.seed = 74;
    auto point = threshold_scan(spec, 0.95, int(count_monomials_up_to(5, 1)));
    CHECK_GT(point.m_per_round, 5);
    CHECK_LT(point.m_per_round, 200);
    CHECK_EQ(point.total_samples, 6.0 * point.m_per_round);
}

TEST_CASE("config parsing with overrides and errors") {
    auto spec = parse_experiment_config(
        "# comment\nlearner=sparse\nn=12\nd=3\ns=4\nm_grid=16,32,64\ntrials=7\nseed=99\n"
        "workers=2\nout=sweep.csv\n");
    CHECK_EQ(spec.learner, "sparse");
    CHECK_EQ(spec.n, 12);
    CHECK_EQ(spec.s, 4);
    REQUIRE_EQ(spec.m_grid.size(), 3u);
    CHECK_EQ(spec.m_grid[1], 32);
    CHECK_EQ(spec.trials, 7);
    CHECK_EQ(spec.seed, 99u);
    CHECK_EQ(spec.workers, 2);
    CHECK_EQ(spec.out_path, "sweep.csv");

    CHECK_THROWS(parse_experiment_config("bogus line\n"));
    CHECK_THROWS(parse_experiment_config("unknown_key=3\n"));
    CHECK_THROWS(parse_experiment_config("n=abc\n"));
}

TEST_CASE("verification table passes with its pinned tolerances") {
    auto checks = verify_numerics();
    CHECK_GE(checks.size(), 5u);
    for (const auto& c : checks) {
        INFO(c.name);
        CHECK(c.pass);
    }
}
