#include "wgm/errors.hpp"
#include "wgm/fixtures.hpp"
#include "wgm/waterfall.hpp"

#include <doctest.h>

#include <cmath>

using namespace wgm;

namespace
{

// Spectrum with one Fano line per center (nullopt: absent) on a flat unit background.
Spectrum synthetic(const std::vector<std::optional<double>> &centers, double width = 0.1)
{
    Spectrum s;
    s.origin_thz = fixtures::kCenterThz;
    s.detuning_ghz = fixtures::linspace(-2.0, 2.0, 801);
    for (double x : s.detuning_ghz)
    {
        double value = 1.0;
        for (const auto &c : centers)
        {
            if (c)
            {
                value *= FanoLine{*c, width, 0.5, 0.0}.factor(x);
            }
        }
        s.intensity.push_back(value);
    }
    return s;
}

BackgroundModel unit()
{
    BackgroundModel bg;
    bg.offset = 1.0;
    return bg;
}

} // namespace

TEST_CASE("static molecule gives a constant trajectory")
{
    std::vector<Spectrum> steps(8, synthetic({0.3}));
    WaterfallInit init;
    const WaterfallResult r = track_waterfall(steps, {}, unit(), init);
    REQUIRE(r.steps.size() == 8);
    for (const WaterfallStep &s : r.steps)
    {
        REQUIRE(s.center_ghz[0]);
        CHECK(*s.center_ghz[0] == doctest::Approx(0.3).epsilon(1e-6));
        CHECK_FALSE(s.merged[0]);
    }
    const TrackLine line = fit_track_line(r, 0);
    CHECK(std::abs(line.slope) < 1e-9);
}

TEST_CASE("crossing trajectories are followed through a merged region")
{
    std::vector<Spectrum> steps;
    std::vector<double> axis;
    for (int k = 0; k <= 20; ++k)
    {
        const double v = -20.0 + 2.0 * k;
        axis.push_back(v);
        steps.push_back(synthetic({0.05 * v + 0.5, -0.04 * v - 0.4}));
    }
    WaterfallInit init;
    init.molecules = 2;
    init.centers_ghz = {-0.5, 0.4};
    const WaterfallResult r = track_waterfall(steps, axis, unit(), init);
    std::size_t merged = 0;
    for (std::size_t s = 0; s < r.steps.size(); ++s)
    {
        const WaterfallStep &step = r.steps[s];
        merged += step.merged[0];
        if (step.center_ghz[0] && !step.merged[0])
        {
            CHECK(*step.center_ghz[0] == doctest::Approx(0.05 * axis[s] + 0.5).epsilon(1e-3));
        }
        if (step.center_ghz[1] && !step.merged[1])
        {
            CHECK(*step.center_ghz[1] == doctest::Approx(-0.04 * axis[s] - 0.4).epsilon(1e-3));
        }
    }
    CHECK(merged <= 4);
    const TrackLine a = fit_track_line(r, 0);
    const TrackLine b = fit_track_line(r, 1);
    CHECK(a.slope == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(b.slope == doctest::Approx(-0.04).epsilon(1e-3));
    CHECK(track_crossing(a, b) == doctest::Approx(-10.0).epsilon(0.01));
}

TEST_CASE("near-degenerate lines share one candidate and are flagged as merged")
{
    std::vector<Spectrum> steps{synthetic({-0.6, 0.6}), synthetic({-0.3, 0.3}), synthetic({-0.005, 0.005}),
                                synthetic({0.3, -0.3})};
    WaterfallInit init;
    init.molecules = 2;
    init.centers_ghz = {-0.6, 0.6};
    const WaterfallResult r = track_waterfall(steps, {}, unit(), init);
    CHECK(r.steps[2].merged[0]);
    CHECK(r.steps[2].merged[1]);
    REQUIRE(r.steps[2].center_ghz[0]);
    CHECK(*r.steps[2].center_ghz[0] == doctest::Approx(0.0).epsilon(0.02));
    REQUIRE(r.steps[3].center_ghz[0]);
    CHECK(*r.steps[3].center_ghz[0] == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(*r.steps[3].center_ghz[1] == doctest::Approx(-0.3).epsilon(1e-3));
}

TEST_CASE("a vanished line leaves a gap instead of a guess")
{
    std::vector<Spectrum> steps{synthetic({0.0}), synthetic({0.02}), synthetic({std::nullopt}), synthetic({0.06})};
    WaterfallInit init;
    const WaterfallResult r = track_waterfall(steps, {}, unit(), init);
    CHECK(r.steps[1].center_ghz[0]);
    CHECK_FALSE(r.steps[2].center_ghz[0]);
    REQUIRE(r.steps[3].center_ghz[0]);
    CHECK(*r.steps[3].center_ghz[0] == doctest::Approx(0.06).epsilon(1e-3));
}

TEST_CASE("jumps beyond the association radius are not followed")
{
    std::vector<Spectrum> steps{synthetic({-1.0}), synthetic({1.0})};
    WaterfallInit init;
    const WaterfallResult r = track_waterfall(steps, {}, unit(), init);
    CHECK_FALSE(r.steps[1].center_ghz[0]);
}

TEST_CASE("asymmetric lines yield one candidate each")
{
    Spectrum s;
    s.origin_thz = fixtures::kCenterThz;
    s.detuning_ghz = fixtures::linspace(-2.0, 2.0, 801);
    for (double x : s.detuning_ghz)
    {
        s.intensity.push_back(FanoLine{-0.5, 0.12, 0.6, 1.0}.factor(x) * FanoLine{0.7, 0.12, 0.6, -0.8}.factor(x));
    }
    const std::vector<double> c = find_line_candidates(s, unit(), 0.02, 0.12);
    REQUIRE(c.size() == 2);
    const auto [lo, hi] = std::minmax(c[0], c[1]);
    CHECK(lo == doctest::Approx(-0.5).epsilon(1e-3));
    CHECK(hi == doctest::Approx(0.7).epsilon(1e-3));
}

TEST_CASE("tracking is independent of the worker count")
{
    std::vector<Spectrum> steps;
    for (int k = 0; k < 12; ++k)
    {
        steps.push_back(synthetic({0.05 * k - 0.3, 0.5 - 0.03 * k}));
    }
    WaterfallInit init;
    init.molecules = 2;
    init.workers = 1;
    const WaterfallResult one = track_waterfall(steps, {}, unit(), init);
    init.workers = 5;
    const WaterfallResult many = track_waterfall(steps, {}, unit(), init);
    for (std::size_t s = 0; s < steps.size(); ++s)
    {
        CHECK(one.steps[s].center_ghz == many.steps[s].center_ghz);
        CHECK(one.steps[s].merged == many.steps[s].merged);
    }
}

TEST_CASE("waterfall inputs are validated")
{
    WaterfallInit init;
    CHECK_THROWS_AS(track_waterfall({}, {}, unit(), init), ValidationError);
    std::vector<Spectrum> steps{synthetic({0.0}), synthetic({0.0})};
    CHECK_THROWS_AS(track_waterfall(steps, {1.0}, unit(), init), ValidationError);
    init.molecules = 0;
    CHECK_THROWS_AS(track_waterfall(steps, {}, unit(), init), ValidationError);
    init.molecules = 2;
    init.centers_ghz = {0.0};
    CHECK_THROWS_AS(track_waterfall(steps, {}, unit(), init), ValidationError);
    init = {};
    steps[1].detuning_ghz[0] -= 0.1;
    CHECK_THROWS_AS(track_waterfall(steps, {}, unit(), init), InterfaceError);
}

TEST_CASE("track lines need two resolved points and crossings need distinct slopes")
{
    WaterfallResult r;
    r.axis = {0.0, 1.0};
    r.steps.resize(2);
    r.steps[0].center_ghz = {0.1};
    r.steps[0].merged = {false};
    r.steps[1].center_ghz = {std::nullopt};
    r.steps[1].merged = {false};
    CHECK_THROWS_AS(fit_track_line(r, 0), DomainError);
    CHECK_THROWS_AS(track_crossing(TrackLine{1.0, 0.0}, TrackLine{1.0, 2.0}), DomainError);
}
