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

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "ramimo/channel.hpp"

using namespace ramimo;

namespace
{
    SystemConfig small_config()
    {
        SystemConfig cfg;
        cfg.n_tx = 4;
        cfg.n_rx = 2;
        cfg.users = 2;
        cfg.n_rf = 4;
        cfg.streams_per_user = 1;
        cfg.modes = 5;
        return cfg;
    }
}

TEST(Channel, ComposeMatchesSelectionMatrixSum)
{
    rng_type rng(21);
    const CandidatePool pool = test::gaussian_pool(rng, 5, 4, 6);
    std::uniform_int_distribution<std::size_t> pick(0, 4);
    for (int rep = 0; rep < 50; ++rep)
    {
        std::vector<std::size_t> m(6);
        for (auto &x : m)
            x = pick(rng);
        const ModeAssignment a(m, 5);
        const Eigen::MatrixXi w = a.selection_matrix();

        // Independent oracle: sum over modes of H[nu] * Diag(W[:, nu]) built element by element.
        CMatrix oracle = CMatrix::Zero(4, 6);
        for (int nu = 0; nu < 5; ++nu)
            for (int c = 0; c < 6; ++c)
                for (int r = 0; r < 4; ++r)
                    oracle(r, c) += pool[nu](r, c) * double(w(c, nu));

        EXPECT_EQ(compose_channel(pool, a), oracle);
        EXPECT_EQ(compose_channel(pool, w), oracle);
        EXPECT_EQ(ModeAssignment::from_selection(w), a);
    }
}

TEST(Channel, SelectionMatrixValidation)
{
    Eigen::MatrixXi w = Eigen::MatrixXi::Zero(3, 2);
    w(0, 0) = 1;
    w(1, 1) = 1;
    EXPECT_THROW(ModeAssignment::from_selection(w), std::invalid_argument); // row 2 empty
    w(2, 0) = 1;
    w(2, 1) = 1;
    EXPECT_THROW(ModeAssignment::from_selection(w), std::invalid_argument); // row 2 doubled
    w(2, 1) = 2;
    EXPECT_THROW(ModeAssignment::from_selection(w), std::invalid_argument);
    EXPECT_THROW(ModeAssignment({0, 3}, 3), std::invalid_argument);

    rng_type rng(22);
    const CandidatePool pool = test::gaussian_pool(rng, 2, 2, 4);
    EXPECT_THROW(compose_channel(pool, ModeAssignment::uniform(3, 0, 2)), std::invalid_argument);
}

TEST(Channel, SteeringFollowsPlanarArrayPhases)
{
    SystemConfig cfg;
    cfg.n_tx = 8; // 2 x 4
    const auto [rows, cols] = cfg.tx_array();
    EXPECT_EQ(rows, 2u);
    EXPECT_EQ(cols, 4u);

    const CVector broadside = tx_steering(cfg, 0.0, 0.0);
    EXPECT_LT((broadside - CVector::Ones(8)).norm(), 1e-14);

    const CVector a = tx_steering(cfg, 30.0, 0.0);
    // Half-wavelength spacing: horizontal neighbour phase step pi * sin(30 deg) = pi / 2.
    EXPECT_NEAR(std::arg(a[1] / a[0]), std::numbers::pi / 2, 1e-12);
    EXPECT_NEAR(std::abs(a[4] - a[0]), 0.0, 1e-12); // same column, other row, zero elevation
    const CVector b = tx_steering(cfg, 0.0, 30.0);
    EXPECT_NEAR(std::arg(b[4] / b[0]), std::numbers::pi / 2, 1e-12);
}

TEST(Channel, MeanEntryPowerIsAboutOne)
{
    const SystemConfig cfg = small_config();
    const PatternSet patterns = generate_pattern_set(cfg.modes, AngularGrid::uniform());
    double power = 0.0;
    std::size_t count = 0;
    for (std::uint64_t s = 0; s < 3000; ++s)
    {
        const CandidatePool pool = build_candidate_pool(sample_propagation(cfg, Geometry{}, s), patterns, cfg);
        for (const auto &h : pool.modes)
        {
            power += h.squaredNorm();
            count += std::size_t(h.size());
        }
    }
    EXPECT_NEAR(power / double(count), 1.0, 0.05);
}

TEST(Channel, GenerationIsDeterministicAndSeedSensitive)
{
    const SystemConfig cfg = small_config();
    const PatternSet patterns = generate_pattern_set(cfg.modes, AngularGrid::uniform());
    const auto a = build_candidate_pool(sample_propagation(cfg, Geometry{}, 7), patterns, cfg);
    const auto b = build_candidate_pool(sample_propagation(cfg, Geometry{}, 7), patterns, cfg);
    const auto c = build_candidate_pool(sample_propagation(cfg, Geometry{}, 8), patterns, cfg);
    for (std::size_t nu = 0; nu < a.mode_count(); ++nu)
        EXPECT_EQ(a[nu], b[nu]);
    double diff = 0.0;
    for (std::size_t nu = 0; nu < a.mode_count(); ++nu)
        diff += (a[nu] - c[nu]).norm();
    EXPECT_GT(diff, 0.0);
}

TEST(Channel, PathsStayInsideTheGeometry)
{
    const SystemConfig cfg = small_config();
    const Geometry geo;
    for (std::uint64_t s = 0; s < 200; ++s)
    {
        const PathSet set = sample_propagation(cfg, geo, s);
        ASSERT_EQ(set.users.size(), cfg.users);
        for (const auto &u : set.users)
        {
            EXPECT_GE(u.distance_m, geo.min_distance_m);
            EXPECT_LE(u.distance_m, geo.max_distance_m);
            double total = 0.0;
            for (const auto &p : u.paths)
            {
                EXPECT_GE(p.azimuth_deg, geo.azimuth_min_deg);
                EXPECT_LE(p.azimuth_deg, geo.azimuth_max_deg);
                total += p.power;
            }
            EXPECT_NEAR(total, 1.0, 1e-12);
            EXPECT_EQ(u.paths[0].azimuth_deg, u.los_azimuth_deg);
        }
    }
}

TEST(Channel, UserBlocksPartitionTheRows)
{
    const SystemConfig cfg = small_config();
    rng_type rng(23);
    const CMatrix h = test::gaussian_matrix(rng, 4, 4);
    EXPECT_EQ(user_block(h, 1, cfg), h.bottomRows(2));
    EXPECT_THROW(user_block(h, 2, cfg), std::out_of_range);
    EXPECT_THROW(user_block(h.topRows(3), 0, cfg), std::invalid_argument);
}

TEST(Channel, ConfigValidation)
{
    SystemConfig cfg = small_config();
    EXPECT_NO_THROW(cfg.validate());
    cfg.n_rf = 1;
    EXPECT_THROW(cfg.validate(), std::invalid_argument); // 2 streams > 1 RF chain
    cfg = small_config();
    cfg.n_rf = 5;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.tx_rows = 3;
    cfg.tx_cols = 2;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.snr_db = 10.0;
    EXPECT_NEAR(cfg.noise_power(), 0.1, 1e-15);
}

TEST(Channel, PoolCsvLayout)
{
    rng_type rng(24);
    const CandidatePool pool = test::gaussian_pool(rng, 2, 2, 3);
    std::ostringstream os;
    write_pool_csv(os, pool, 9);
    const std::string text = os.str();
    EXPECT_EQ(text.rfind("trial,mode,row,col,re,im\n9,0,0,0,", 0), 0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 2 * 3);
}
