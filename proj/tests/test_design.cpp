#include <doctest.h>

#include <cmath>

#include "isomix/csv.hpp"
#include "isomix/dataset.hpp"
#include "isomix/design.hpp"
#include "isomix/types.hpp"

using namespace isomix;

namespace {

CsvTable table_of(const std::string& text) { return parse_csv(text); }

}  // namespace

TEST_SUITE("design") {

TEST_CASE("continuous covariate standardized: column mean 0, sample sd 1") {
    CsvTable raw = table_of("x\n1.6\n1.7\n2.1\n2.5\n1.1\n3.7\n4.5\n6.8\n7.1\n7.7\n");
    DesignMatrix d = build_design_matrix(raw, parse_covariate_spec("x:continuous"));
    REQUIRE(d.X.rows() == 10);
    REQUIRE(d.X.cols() == 2);
    CHECK(d.meta.columns[0].label == "(Intercept)");
    CHECK(d.meta.columns[1].label == "x");
    CHECK((d.X.col(0).array() == 1.0).all());
    double mean = d.X.col(1).mean();
    double ss = (d.X.col(1).array() - mean).square().sum();
    CHECK(std::abs(mean) < 1e-12);
    CHECK(std::sqrt(ss / 9.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-level factor gets treatment coding with intercept") {
    CsvTable raw = table_of("sex\nM\nF\nM\nF\n");
    DesignMatrix d = build_design_matrix(raw, parse_covariate_spec("sex:categorical"));
    // Sole categorical: full one-hot without intercept.
    CHECK(d.X.cols() == 2);
    CHECK(d.meta.columns[0].label == "sex=M");
    CHECK(d.meta.columns[1].label == "sex=F");

    // Alongside a continuous covariate it drops the first level instead.
    CsvTable raw2 = table_of("sex,z\nM,1\nF,2\nM,3\nF,0\n");
    DesignMatrix d2 =
        build_design_matrix(raw2, parse_covariate_spec("sex:categorical,z:continuous"));
    REQUIRE(d2.X.cols() == 3);
    CHECK(d2.meta.columns[0].label == "(Intercept)");
    CHECK(d2.meta.columns[1].label == "sex=F");
    for (int i = 0; i < 4; ++i) {
        double v = d2.X(i, 1);
        CHECK((v == 0.0 || v == 1.0));
    }
    CHECK(d2.X(0, 1) == 0.0);  // M is the dropped reference level
    CHECK(d2.X(1, 1) == 1.0);
}

TEST_CASE("eight groups one-hot: group-3 row is the third unit vector") {
    std::string text = "group\n";
    for (int rep = 0; rep < 2; ++rep)
        for (int g = 1; g <= 8; ++g) text += "g" + std::to_string(g) + "\n";
    CsvTable raw = table_of(text);
    DesignMatrix d = build_design_matrix(raw, parse_covariate_spec("group:categorical"));
    REQUIRE(d.X.cols() == 8);
    REQUIRE(d.X.rows() == 16);
    for (int c = 0; c < 8; ++c) CHECK(d.X(2, c) == (c == 2 ? 1.0 : 0.0));
    for (int i = 0; i < 16; ++i) CHECK(d.X.row(i).sum() == 1.0);
}

TEST_CASE("levels ordered by first appearance") {
    CsvTable raw = table_of("h\nMarine\nFresh\nMarine\nBrackish\n");
    DesignMatrix d = build_design_matrix(raw, parse_covariate_spec("h:categorical"));
    CHECK(d.meta.columns[0].label == "h=Marine");
    CHECK(d.meta.columns[1].label == "h=Fresh");
    CHECK(d.meta.columns[2].label == "h=Brackish");
}

TEST_CASE("constant continuous column rejected") {
    CsvTable raw = table_of("x\n2\n2\n2\n");
    CHECK_THROWS_WITH_AS(
        build_design_matrix(raw, parse_covariate_spec("x:continuous")),
        doctest::Contains("constant"), Error);
}

TEST_CASE("single-level categorical rejected") {
    CsvTable raw = table_of("g\na\na\na\n");
    CHECK_THROWS_AS(build_design_matrix(raw, parse_covariate_spec("g:categorical")),
                    Error);
}

TEST_CASE("unknown covariate error lists available names") {
    CsvTable raw = table_of("x,y\n1,2\n3,4\n");
    try {
        build_design_matrix(raw, parse_covariate_spec("zz:continuous"));
        FAIL("expected error");
    } catch (const Error& e) {
        std::string msg = e.what();
        CHECK(msg.find("zz") != std::string::npos);
        CHECK(msg.find("x") != std::string::npos);
        CHECK(msg.find("y") != std::string::npos);
    }
}

TEST_CASE("standardize then de-standardize reproduces raw values to 1e-12") {
    CsvTable raw = table_of("x\n1.6\n1.7\n2.1\n2.5\n1.1\n3.7\n4.5\n6.8\n7.1\n7.7\n");
    DesignMatrix d = build_design_matrix(raw, parse_covariate_spec("x:continuous"));
    const DesignColumn& col = d.meta.columns[1];
    std::vector<double> raw_x = raw.numeric_column("x");
    for (int i = 0; i < 10; ++i)
        CHECK(std::abs(d.X(i, 1) * col.sd + col.mean - raw_x[i]) < 1e-12);
}

TEST_CASE("design matrix construction is bit-deterministic") {
    CsvTable raw = table_of("x,g\n1.25,a\n-0.5,b\n3.75,a\n0.125,c\n");
    CovariateSpec spec = parse_covariate_spec("x:continuous,g:categorical");
    DesignMatrix a = build_design_matrix(raw, spec);
    DesignMatrix b = build_design_matrix(raw, spec);
    CHECK(a.X == b.X);
}

TEST_CASE("encode_rows applies stored standardization and rejects unseen levels") {
    CsvTable raw = table_of("x,g\n1,a\n2,b\n3,a\n4,b\n");
    DesignMatrix d =
        build_design_matrix(raw, parse_covariate_spec("x:continuous,g:categorical"));
    CsvTable new_rows = table_of("x,g\n2.5,b\n");
    MatrixXd enc = encode_rows(new_rows, d.meta);
    REQUIRE(enc.rows() == 1);
    const DesignColumn& xcol = d.meta.columns[1];
    CHECK(enc(0, 1) == doctest::Approx((2.5 - xcol.mean) / xcol.sd).epsilon(1e-14));
    CHECK(enc(0, 2) == 1.0);  // g=b indicator

    CsvTable bad = table_of("x,g\n2.5,zebra\n");
    try {
        encode_rows(bad, d.meta);
        FAIL("expected error");
    } catch (const Error& e) {
        std::string msg = e.what();
        CHECK(msg.find("zebra") != std::string::npos);
        CHECK(msg.find("a") != std::string::npos);  // known levels listed
    }

    CsvTable missing = table_of("x\n2.5\n");
    CHECK_THROWS_WITH_AS(encode_rows(missing, d.meta), doctest::Contains("g"), Error);
}

TEST_CASE("intercept-only design") {
    DesignMatrix d = intercept_only_design(4);
    CHECK(d.X.rows() == 4);
    CHECK(d.X.cols() == 1);
    CHECK((d.X.array() == 1.0).all());
    CHECK(d.meta.columns[0].kind == ColumnKind::Intercept);
}

}  // TEST_SUITE
