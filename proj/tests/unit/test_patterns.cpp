// SPDX-License-Identifier: Apache-2.0
//
// ramimo - multi-user MIMO simulation with pattern-reconfigurable antennas
// Copyright (C) 2026 The ramimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ramimo/patterns.hpp"

using namespace ramimo;

namespace
{
    constexpr double deg = std::numbers::pi / 180.0;

    // Composite Simpson rule on [lo, hi] with n (even) intervals.
    template <typename F>
    double simpson(F f, double lo, double hi, int n)
    {
        const double h = (hi - lo) / n;
        double s = f(lo) + f(hi);
        for (int i = 1; i < n; ++i)
            s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
        return s * h / 3.0;
    }

    double shape(double offset_deg, double bw, double q)
    {
        return std::abs(offset_deg) < bw ? std::pow(std::cos(offset_deg * std::numbers::pi / (2.0 * bw)), q) : 0.0;
    }
}

TEST(Patterns, CentersSpanTheCoverage)
{
    const PatternSet p = generate_pattern_set(10, AngularGrid::uniform());
    ASSERT_EQ(p.mode_count(), 10u);
    EXPECT_DOUBLE_EQ(p.centers_deg.front(), -60.0);
    EXPECT_DOUBLE_EQ(p.centers_deg.back(), 60.0);
    EXPECT_NEAR(p.centers_deg[1] - p.centers_deg[0], 120.0 / 9.0, 1e-12);

    const PatternSet single = generate_pattern_set(1, AngularGrid::uniform());
    EXPECT_DOUBLE_EQ(single.centers_deg[0], 0.0);
}

TEST(Patterns, EveryModeHasUnitEnergyOnTheGrid)
{
    const PatternSet p = generate_pattern_set(10, AngularGrid::uniform());
    const auto w = p.grid.quadrature_weights();
    for (std::size_t m = 0; m < p.mode_count(); ++m)
    {
        double e = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            e += w[i] * p.gains[m][i] * p.gains[m][i];
        EXPECT_NEAR(e, 1.0, 1e-12);
    }
}

TEST(Patterns, GainFollowsTheRaisedCosineAndVanishesBeyondTheNull)
{
    const PatternSet p = generate_pattern_set(10, AngularGrid::uniform(), 30.0, 2.0);
    const double c = p.centers_deg[4];
    EXPECT_NEAR(p.gain(4, c, 0.0), p.amplitude[4], 1e-15);
    EXPECT_NEAR(p.gain(4, c + 15.0, 0.0), p.amplitude[4] * 0.5, 1e-12); // cos^2(pi/4)
    EXPECT_EQ(p.gain(4, c + 30.0, 0.0), 0.0);
    EXPECT_EQ(p.gain(4, c - 45.0, 7.0), 0.0);
    EXPECT_THROW(p.gain(10, 0.0, 0.0), std::out_of_range);
}

TEST(Patterns, CorrelationMatchesIndependentQuadrature)
{
    // The gains do not depend on elevation, so the double integral factorizes into the
    // elevation span times a one-dimensional azimuth integral.
    const PatternSet p = generate_pattern_set(10, AngularGrid::uniform(), 30.0, 2.0);
    const CMatrix r = pattern_correlation(p);
    const double el_span = 60.0 * deg;
    for (auto [a, b] : {std::pair{0, 0}, std::pair{3, 4}, std::pair{4, 6}, std::pair{2, 7}})
    {
        const double ca = p.centers_deg[a], cb = p.centers_deg[b];
        // Simpson on the exact shapes; amplitudes come from the same normalization.
        const double integral = simpson([&](double az) { return shape(az - ca, 30, 2) * shape(az - cb, 30, 2); },
                                        -90.0, 90.0, 36000) * deg;
        const double expected = p.amplitude[a] * p.amplitude[b] * el_span * integral;
        EXPECT_NEAR(r(a, b).real(), expected, 2e-3 * std::max(expected, 1e-3)) << a << "," << b;
    }
    EXPECT_NEAR(r(2, 7).real(), 0.0, 1e-15); // no overlapping support
}

TEST(Patterns, CorrelationIsSymmetricPsdWithUnitDiagonal)
{
    const PatternSet p = generate_pattern_set(8, AngularGrid::uniform());
    const CMatrix r = pattern_correlation(p);
    EXPECT_TRUE(is_hermitian(r));
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        EXPECT_NEAR(r(i, i).real(), 1.0, 1e-12);
    EXPECT_GT(hermitian_eig(r).eigenvalues.minCoeff(), -1e-12);
}

TEST(Patterns, CoverageMeanGainMatchesQuadrature)
{
    const PatternSet p = generate_pattern_set(10, AngularGrid::uniform());
    double sum = 0.0;
    for (std::size_t m = 0; m < 10; ++m)
        sum += simpson([&](double az) { return p.gain(m, az, 0.0); }, -60.0, 60.0, 24000);
    EXPECT_NEAR(p.coverage_mean_gain, sum / (120.0 * 10.0), 1e-5 * p.coverage_mean_gain);
}

TEST(Patterns, IsotropicPatternIsFlat)
{
    const PatternSet iso = generate_isotropic_pattern(AngularGrid::uniform());
    ASSERT_EQ(iso.mode_count(), 1u);
    EXPECT_DOUBLE_EQ(iso.gain(0, -80.0, 10.0), iso.gain(0, 33.0, -20.0));
    EXPECT_NEAR(iso.coverage_mean_gain, iso.amplitude[0], 1e-12);
}

TEST(Patterns, SplitCorrelationsPicksBlocks)
{
    const PatternSet p = generate_pattern_set(5, AngularGrid::uniform());
    const CMatrix r = pattern_correlation(p);
    const std::vector<std::size_t> trained{3, 1};
    const CorrelationSplit s = split_correlations(r, trained);
    ASSERT_EQ(s.trained.rows(), 2);
    ASSERT_EQ(s.cross.rows(), 3);
    EXPECT_EQ(s.untrained, (std::vector<std::size_t>{0, 2, 4}));
    EXPECT_EQ(s.trained(0, 1), r(3, 1));
    EXPECT_EQ(s.cross(2, 0), r(4, 3));

    const std::vector<std::size_t> dup{1, 1}, out_of_range{5};
    EXPECT_THROW(split_correlations(r, dup), std::invalid_argument);
    EXPECT_THROW(split_correlations(r, out_of_range), std::invalid_argument);
}

TEST(Patterns, RejectsInvalidParameters)
{
    const AngularGrid g = AngularGrid::uniform();
    EXPECT_THROW(generate_pattern_set(0, g), std::invalid_argument);
    EXPECT_THROW(generate_pattern_set(4, g, 0.0), std::invalid_argument);
    EXPECT_THROW(generate_pattern_set(200, g), std::invalid_argument); // closer than the 1 degree grid step
    EXPECT_THROW(AngularGrid::uniform(32, 31), std::invalid_argument);
    EXPECT_THROW(AngularGrid::uniform(181, 8), std::invalid_argument);
}

TEST(Patterns, CsvHasHeaderAndOneRowPerSample)
{
    const PatternSet p = generate_pattern_set(2, AngularGrid::uniform(64, 16));
    std::ostringstream os;
    write_patterns_csv(os, p);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "mode,azimuth_deg,elevation_deg,gain");
    std::size_t rows = 0;
    while (std::getline(is, line))
        ++rows;
    EXPECT_EQ(rows, 2u * 64u * 16u);
}
