#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "isomix/likelihood.hpp"
#include "isomix/posterior.hpp"
#include "isomix/simulate.hpp"

using namespace isomix;

TEST_SUITE("simulate") {

TEST_CASE("presets carry the advertised dimensions") {
    Scenario low = Scenario::preset("low");
    CHECK(low.N == 50);
    CHECK(low.J == 2);
    CHECK(low.K == 3);
    CHECK(low.L == 2);
    Scenario medium = Scenario::preset("medium");
    CHECK(medium.N == 200);
    CHECK(medium.J == 3);
    CHECK(medium.K == 4);
    CHECK(medium.L == 5);
    Scenario high = Scenario::preset("high");
    CHECK(high.N == 500);
    CHECK(high.J == 4);
    CHECK(high.K == 5);
    CHECK(high.L == 10);
    CHECK_THROWS_WITH_AS(Scenario::preset("extreme"), doctest::Contains("medium"),
                         Error);

    Scenario bad = low;
    bad.N = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = low;
    bad.sigma_s_hi = bad.sigma_s_lo;
    CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("same seed reproduces the dataset, different seed does not") {
    Scenario low = Scenario::preset("low");
    SimulatedDataset a = simulate_dataset(low, 99);
    SimulatedDataset b = simulate_dataset(low, 99);
    CHECK(a.truth_json == b.truth_json);
    CHECK(csv_to_string(a.mixtures_csv) == csv_to_string(b.mixtures_csv));
    CHECK(csv_to_string(a.covariates_csv) == csv_to_string(b.covariates_csv));
    CHECK(a.input.y == b.input.y);
    SimulatedDataset c = simulate_dataset(low, 100);
    CHECK(a.input.y != c.input.y);
}

TEST_CASE("generated tables and assembled input line up") {
    SimulatedDataset sim = simulate_dataset(Scenario::preset("medium"), 5);
    const SimmInput& in = sim.input;
    CHECK(in.n_obs() == 200);
    CHECK(in.n_tracers() == 3);
    CHECK(in.n_sources() == 4);
    CHECK(in.n_design_cols() == 5);
    CHECK(sim.true_beta.rows() == 4);
    CHECK(sim.true_beta.cols() == 5);
    CHECK(sim.true_sigma.size() == 3);
    CHECK((sim.true_sigma.array() > 0).all());

    // Discrimination off, concentrations one.
    CHECK(in.mu_c.isZero(0.0));
    CHECK(in.sigma_c.isZero(0.0));
    CHECK((in.q.array() == 1.0).all());

    CHECK(sim.covariates_csv.header ==
          std::vector<std::string>{"z1", "z2", "z3", "z4"});
    CHECK(sim.mixtures_csv.header == std::vector<std::string>{"tr1", "tr2", "tr3"});
    CHECK(sim.sources_csv.header.front() == "name");
    CHECK(sim.sources_csv.header.back() == "sd_tr3");

    // The CSV cells round-trip to the matrices bit for bit.
    std::vector<double> col = sim.mixtures_csv.numeric_column("tr2");
    for (int i = 0; i < in.n_obs(); ++i) CHECK(col[i] == in.y(i, 1));
    std::vector<double> z1 = sim.covariates_csv.numeric_column("z1");
    CHECK(z1.size() == 200);

    CHECK(sim.truth_json.find("\"beta\"") != std::string::npos);
    CHECK(sim.truth_json.find("\"sigma\"") != std::string::npos);
    CHECK(sim.truth_json.find("\"seed\": 5") != std::string::npos);
}

TEST_CASE("single-design-column scenario is intercept only") {
    Scenario s;
    s.name = "custom";
    s.N = 20;
    s.J = 1;
    s.K = 2;
    s.L = 1;
    SimulatedDataset sim = simulate_dataset(s, 3);
    CHECK(sim.input.n_design_cols() == 1);
    CHECK((sim.input.X.array() == 1.0).all());
    CHECK(sim.covariates_csv.header.empty());
}

TEST_CASE("standardized residuals under the recorded truth are standard normal") {
    // y is generated as mean + sd * z with z standard normal, where mean/sd
    // come from the forward-model moments at the recorded parameters.  Back
    // out z across many datasets and check its first two moments.
    Scenario low = Scenario::preset("low");
    double sum = 0.0, sum_sq = 0.0;
    int count = 0;
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        SimulatedDataset sim = simulate_dataset(low, seed);
        const SimmInput& in = sim.input;
        for (int i = 0; i < in.n_obs(); ++i) {
            VectorXd f = sim.true_beta * in.X.row(i).transpose();
            VectorXd p = clr_proportions(f);
            for (int j = 0; j < in.n_tracers(); ++j) {
                double mean = 0.0;
                double var = sim.true_sigma[j] * sim.true_sigma[j];
                for (int k = 0; k < in.n_sources(); ++k) {
                    mean += p[k] * in.mu_s(k, j);
                    var += p[k] * p[k] * in.sigma_s(k, j) * in.sigma_s(k, j);
                }
                double z = (in.y(i, j) - mean) / std::sqrt(var);
                sum += z;
                sum_sq += z * z;
                ++count;
            }
        }
    }
    REQUIRE(count == 1000 * 50 * 2);
    double mean = sum / count;
    double var = sum_sq / count - mean * mean;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(count)));
    CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / count));
}

TEST_CASE("coverage check matches the posterior-predictive computation") {
    const FittedModel& model = testing::synthetic_fit();
    CoverageResult cov = coverage_check(model, 0.5);
    PosteriorPredictive pp = posterior_predictive(model, 0.5, model.config.seed);
    CHECK(cov.coverage == pp.coverage);
    REQUIRE(cov.per_tracer.size() == pp.per_tracer_coverage.size());
    for (size_t j = 0; j < cov.per_tracer.size(); ++j)
        CHECK(cov.per_tracer[j] == pp.per_tracer_coverage[j]);
}

TEST_CASE("coefficient recovery report against known draws") {
    FittedModel model = testing::synthetic_fit();  // copy
    const int S = model.n_draws();
    Rng rng(2024);
    for (int c = 0; c < 6; ++c)  // beta block: K*L = 6 columns
        for (int s = 0; s < S; ++s) model.theta_draws(s, c) = rng.normal();

    SUBCASE("truth at the draw center falls mid-distribution") {
        MatrixXd truth = MatrixXd::Zero(3, 2);
        BetaRecovery rec = beta_recovery_report(model, truth);
        CHECK(rec.table.columns() ==
              std::vector<std::string>{"k", "l", "truth", "post_mean", "post_sd",
                                       "quantile", "inside90"});
        REQUIRE(rec.table.n_rows() == 6);
        int mean_col = rec.table.column_index("post_mean");
        int sd_col = rec.table.column_index("post_sd");
        int q_col = rec.table.column_index("quantile");
        int in_col = rec.table.column_index("inside90");
        for (int r = 0; r < 6; ++r) {
            CHECK(std::abs(rec.table.number(r, mean_col)) < 0.06);
            CHECK(rec.table.number(r, sd_col) == doctest::Approx(1.0).epsilon(0.06));
            CHECK(rec.table.number(r, q_col) > 0.44);
            CHECK(rec.table.number(r, q_col) < 0.56);
            CHECK(rec.table.number(r, in_col) == 1.0);
        }
        CHECK(rec.fraction_inside90 == 1.0);
        CHECK(rec.table.number(0, 0) == 1.0);  // k index is 1-based
        CHECK(rec.table.number(0, 1) == 1.0);  // l index is 1-based
        CHECK(rec.table.number(5, 0) == 3.0);
        CHECK(rec.table.number(5, 1) == 2.0);
    }

    SUBCASE("truth far outside the draws is reported outside") {
        MatrixXd truth = MatrixXd::Constant(3, 2, 100.0);
        BetaRecovery rec = beta_recovery_report(model, truth);
        int q_col = rec.table.column_index("quantile");
        int in_col = rec.table.column_index("inside90");
        for (int r = 0; r < 6; ++r) {
            CHECK(rec.table.number(r, q_col) == 1.0);
            CHECK(rec.table.number(r, in_col) == 0.0);
        }
        CHECK(rec.fraction_inside90 == 0.0);
    }

    SUBCASE("shape mismatch is rejected") {
        CHECK_THROWS_WITH_AS(beta_recovery_report(model, MatrixXd::Zero(2, 2)),
                             doctest::Contains("3x2"), Error);
    }
}

}  // TEST_SUITE
