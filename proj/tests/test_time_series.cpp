// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stsad/errors.hpp"
#include "stsad/rng.hpp"
#include "stsad/time_series.hpp"

using namespace stsad;

namespace {

TimeSeries make_series(std::vector<std::int64_t> ts, std::vector<double> vs, std::int64_t g) {
    return TimeSeries{std::move(ts), std::move(vs), g};
}

}  // namespace

TEST_CASE("infer_granularity") {
    SUBCASE("regular minutely gaps") {
        const std::vector<std::int64_t> ts{0, 60, 120, 180};
        CHECK(infer_granularity(ts) == 60);
    }
    SUBCASE("one missing point keeps the 5-minute step") {
        const std::vector<std::int64_t> ts{0, 300, 600, 1200, 1500};
        CHECK(infer_granularity(ts) == 300);
    }
    SUBCASE("inconsistent gaps are rejected") {
        const std::vector<std::int64_t> ts{0, 60, 150};
        CHECK_THROWS_AS((void)infer_granularity(ts), DataError);
    }
    SUBCASE("invariant to removing one interior point") {
        std::vector<std::int64_t> ts;
        for (int i = 0; i < 30; ++i) ts.push_back(1000 + 60 * i);
        for (std::size_t drop = 1; drop + 1 < ts.size(); ++drop) {
            auto copy = ts;
            copy.erase(copy.begin() + static_cast<std::ptrdiff_t>(drop));
            CHECK(infer_granularity(copy) == 60);
        }
    }
}

TEST_CASE("fill_gaps") {
    SUBCASE("no gaps is the identity") {
        const auto s = make_series({0, 60, 120}, {1.0, 2.0, 3.0}, 60);
        const GridSeries g = fill_gaps(s);
        CHECK(g.series.timestamps == s.timestamps);
        CHECK(g.series.values == s.values);
        CHECK(g.missing == std::vector<std::uint8_t>{0, 0, 0});
    }
    SUBCASE("one missing step inserts one masked point") {
        const auto s = make_series({0, 60, 180}, {1.0, 2.0, 4.0}, 60);
        const GridSeries g = fill_gaps(s);
        REQUIRE(g.series.size() == 4);
        CHECK(g.series.timestamps == std::vector<std::int64_t>{0, 60, 120, 180});
        CHECK(g.missing == std::vector<std::uint8_t>{0, 0, 1, 0});
    }
}

TEST_CASE("transforms") {
    SUBCASE("identity is exact") { CHECK(apply_transform(5.0, Transform::identity) == 5.0); }
    SUBCASE("log1p of zero is zero") { CHECK(apply_transform(0.0, Transform::log1p) == 0.0); }
    SUBCASE("negative under log1p is a domain error") {
        CHECK_THROWS_AS((void)apply_transform(-0.5, Transform::log1p), DataError);
    }
    SUBCASE("band inversion maps endpoints monotonically") {
        const Band b = invert_band(1.0, 0.1, 3.0, Transform::log1p);
        CHECK(b.lo == doctest::Approx(std::exp(0.7) - 1.0).epsilon(1e-12));
        CHECK(b.hi == doctest::Approx(std::exp(1.3) - 1.0).epsilon(1e-12));
        CHECK(b.expected == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
    }
    SUBCASE("log1p round-trips to 1e-12 relative") {
        Rng rng(3);
        for (int i = 0; i < 200; ++i) {
            const double v = std::abs(rng.normal()) * 100.0;
            const double back = invert_mean(apply_transform(v, Transform::log1p), Transform::log1p);
            CHECK(back == doctest::Approx(v).epsilon(1e-12));
        }
    }
}

TEST_CASE("train_validation_split") {
    auto series_of = [](std::size_t n) {
        TimeSeries s;
        s.granularity = 60;
        for (std::size_t i = 0; i < n; ++i) {
            s.timestamps.push_back(static_cast<std::int64_t>(60 * i));
            s.values.push_back(static_cast<double>(i));
        }
        return s;
    };
    SUBCASE("T=10 gives 8/2") {
        const auto [train, val] = train_validation_split(series_of(10));
        CHECK(train.size() == 8);
        CHECK(val.size() == 2);
    }
    SUBCASE("T=5 gives 4/1") {
        const auto [train, val] = train_validation_split(series_of(5));
        CHECK(train.size() == 4);
        CHECK(val.size() == 1);
    }
    SUBCASE("T=100 gives 80/20") {
        const auto [train, val] = train_validation_split(series_of(100));
        CHECK(train.size() == 80);
        CHECK(val.size() == 20);
    }
    SUBCASE("too short is an error") {
        CHECK_THROWS_AS((void)train_validation_split(series_of(4)), DataError);
    }
    SUBCASE("concatenation reproduces the input") {
        const auto input = series_of(37);
        const auto [train, val] = train_validation_split(input);
        std::vector<double> joined = train.values;
        joined.insert(joined.end(), val.values.begin(), val.values.end());
        CHECK(joined == input.values);
    }
}

TEST_CASE("series validation") {
    SUBCASE("non-finite values rejected") {
        auto s = make_series({0, 60}, {1.0, std::nan("")}, 60);
        CHECK_THROWS_AS(s.validate(), DataError);
    }
    SUBCASE("non-increasing timestamps rejected") {
        auto s = make_series({60, 60}, {1.0, 2.0}, 60);
        CHECK_THROWS_AS(s.validate(), DataError);
    }
    SUBCASE("gap not a multiple of granularity rejected") {
        auto s = make_series({0, 90}, {1.0, 2.0}, 60);
        CHECK_THROWS_AS(s.validate(), DataError);
    }
}

TEST_CASE("zero detection tolerance") {
    CHECK(is_zero_value(0.0));
    CHECK(is_zero_value(1e-13));
    CHECK(is_zero_value(-1e-13));
    CHECK(!is_zero_value(1e-9));
}
