// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "stsad/errors.hpp"
#include "stsad/io.hpp"
#include "stsad/selection.hpp"
#include "stsad/structural.hpp"

using namespace stsad;

namespace {

std::vector<LabeledSeries> parse(const std::string& text) {
    std::istringstream in(text);
    return parse_kpi_csv(in);
}

const std::string kHeader = "timestamp,value,label,KPI ID\n";

}  // namespace

TEST_CASE("two interleaved KPIs group into two series") {
    std::string csv = kHeader;
    for (int i = 0; i < 4; ++i) {
        csv += std::to_string(60 * i) + ",1.0,0,a\n";
        csv += std::to_string(60 * i) + ",2.0,0,b\n";
    }
    const auto out = parse(csv);
    REQUIRE(out.size() == 2);
    CHECK(out[0].kpi_id == "a");
    CHECK(out[1].kpi_id == "b");
    CHECK(out[0].series.size() == 4);
    CHECK(out[1].series.size() == 4);
}

TEST_CASE("raw KPI row spot-check") {
    const auto out = parse(kHeader +
                           "1469376000,0.847,0,da403e4e-d95f-32f0-8f9e-93efa3af942e\n"
                           "1469376060,0.851,0,da403e4e-d95f-32f0-8f9e-93efa3af942e\n");
    REQUIRE(out.size() == 1);
    CHECK(out[0].series.timestamps[0] == 1469376000);
    CHECK(out[0].series.values[0] == 0.847);
    CHECK(out[0].labels[0] == 0);
    CHECK(out[0].kpi_id == "da403e4e-d95f-32f0-8f9e-93efa3af942e");
    CHECK(out[0].series.granularity == 60);
}

TEST_CASE("header-only file yields an empty list") {
    CHECK(parse(kHeader).empty());
}

TEST_CASE("rows out of order are sorted per KPI") {
    const auto out = parse(kHeader + "120,3.0,0,x\n0,1.0,0,x\n60,2.0,1,x\n");
    REQUIRE(out.size() == 1);
    CHECK(out[0].series.timestamps == std::vector<std::int64_t>{0, 60, 120});
    CHECK(out[0].labels == std::vector<std::uint8_t>{0, 1, 0});
}

TEST_CASE("malformed input is rejected with a line number") {
    SUBCASE("wrong header") {
        CHECK_THROWS_AS((void)parse("time,value,label,kpi\n"), DataError);
    }
    SUBCASE("bad value") {
        CHECK_THROWS_WITH_AS((void)parse(kHeader + "0,notanumber,0,x\n"),
                             doctest::Contains("line 2"), DataError);
    }
    SUBCASE("extra column") {
        CHECK_THROWS_WITH_AS((void)parse(kHeader + "0,1.0,0,x,extra\n"),
                             doctest::Contains("4 columns"), DataError);
    }
    SUBCASE("non-binary label") {
        CHECK_THROWS_WITH_AS((void)parse(kHeader + "0,1.0,2,x\n"),
                             doctest::Contains("non-binary"), DataError);
    }
    SUBCASE("duplicate timestamp within a KPI") {
        CHECK_THROWS_WITH_AS((void)parse(kHeader + "0,1.0,0,x\n0,2.0,0,x\n"),
                             doctest::Contains("duplicate"), DataError);
    }
    SUBCASE("bad timestamp") {
        CHECK_THROWS_WITH_AS((void)parse(kHeader + "abc,1.0,0,x\n"),
                             doctest::Contains("timestamp"), DataError);
    }
}

TEST_CASE("CSV round-trip is the identity on well-formed input") {
    std::string csv = kHeader;
    csv += "0,0.25,0,k1\n60,0.5,1,k1\n120,0.125,0,k1\n";
    csv += "0,17.75,0,k2\n300,18.5,0,k2\n600,16.25,1,k2\n";
    const auto first = parse(csv);
    std::ostringstream out;
    write_kpi_csv(out, first);
    const auto second = parse(out.str());
    REQUIRE(second.size() == first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(second[i].kpi_id == first[i].kpi_id);
        CHECK(second[i].series.timestamps == first[i].series.timestamps);
        CHECK(second[i].series.values == first[i].series.values);
        CHECK(second[i].labels == first[i].labels);
    }
}

TEST_CASE("series JSON interchange round-trips") {
    const auto first = parse(kHeader + "0,1.5,0,j\n60,2.5,1,j\n180,3.5,0,j\n");
    const std::string json = series_to_json(first[0]);
    const LabeledSeries back = series_from_json(json);
    CHECK(back.kpi_id == first[0].kpi_id);
    CHECK(back.series.granularity == first[0].series.granularity);
    CHECK(back.series.timestamps == first[0].series.timestamps);
    CHECK(back.series.values == first[0].series.values);
    CHECK(back.labels == first[0].labels);
}

TEST_CASE("fitted model JSON round-trips exactly") {
    const StructuralSpec spec = StructuralSpec::parse("local_linear:none:ar1:log1p");
    const ModelFamily family(spec, 300);
    Eigen::VectorXd theta(family.n_params());
    theta << -0.731, 0.22, -1.9, 0.4071;

    FittedModel m;
    m.kpi_id = "round-trip";
    m.spec = spec;
    m.granularity = 300;
    m.theta = theta;
    m.train_variance = 3.14159;
    m.model = family.materialize(theta, m.train_variance);
    m.layout = family.layout();
    m.train_start = 1000;
    m.train_end = 1000 + 299 * 300;
    m.zero_count = 3;
    m.total_count = 300;
    m.loglik = -123.456789012345;
    m.posterior.mean = Eigen::VectorXd::LinSpaced(m.model.state_dim(), 0.1, 0.9);
    m.posterior.cov =
        Eigen::MatrixXd::Identity(m.model.state_dim(), m.model.state_dim()) * 0.333333333333333;

    const std::string json = fitted_model_to_json(m);
    const FittedModel back = fitted_model_from_json(json);
    CHECK(back.kpi_id == m.kpi_id);
    CHECK(back.spec == m.spec);
    CHECK(back.granularity == m.granularity);
    REQUIRE(back.theta.size() == m.theta.size());
    for (Eigen::Index i = 0; i < m.theta.size(); ++i) {
        CHECK(back.theta(i) == m.theta(i));  // bitwise
    }
    CHECK(back.train_variance == m.train_variance);
    CHECK(back.loglik == m.loglik);
    CHECK(back.zero_count == m.zero_count);
    CHECK(back.total_count == m.total_count);
    CHECK((back.posterior.mean - m.posterior.mean).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.posterior.cov - m.posterior.cov).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.model.T - m.model.T).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.model.H == m.model.H);

    // Serializing again produces identical bytes.
    CHECK(fitted_model_to_json(back) == json);
}
