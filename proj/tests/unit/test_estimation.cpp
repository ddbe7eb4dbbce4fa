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
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "ramimo/estimation.hpp"

using namespace ramimo;

namespace
{
    // Gaussian per-antenna mode channels with correlation r, observed with LS noise of variance q.
    std::vector<TrainingSample> synthetic_samples(rng_type &rng, const CMatrix &r, std::size_t count,
                                                  std::size_t antennas, double q, double azimuth_lo = -60.0,
                                                  double azimuth_hi = 60.0)
    {
        const Eigen::LLT<CMatrix> llt(r + 1e-12 * CMatrix::Identity(r.rows(), r.cols()));
        const CMatrix root = llt.matrixL();
        std::uniform_real_distribution<double> az(azimuth_lo, azimuth_hi);
        std::vector<TrainingSample> out;
        for (std::size_t s = 0; s < count; ++s)
        {
            TrainingSample t;
            t.truth.los_azimuth_deg = az(rng);
            for (std::size_t n = 0; n < antennas; ++n)
            {
                const CMatrix h = root * test::gaussian_matrix(rng, r.rows(), 1);
                t.truth.per_antenna.push_back(h);
                t.observed.per_antenna.push_back(h + std::sqrt(q) * test::gaussian_matrix(rng, r.rows(), 1));
            }
            t.observed.los_azimuth_deg = t.truth.los_azimuth_deg;
            out.push_back(std::move(t));
        }
        return out;
    }

    CMatrix test_correlation(std::size_t modes)
    {
        return pattern_correlation(generate_pattern_set(modes, AngularGrid::uniform())) +
               0.05 * CMatrix::Identity(Eigen::Index(modes), Eigen::Index(modes));
    }
}

TEST(Estimation, PilotsAreOrthogonal)
{
    const CMatrix x = orthogonal_pilots(4, 2.5);
    EXPECT_LT((x * x.adjoint() - 10.0 * CMatrix::Identity(4, 4)).norm(), 1e-12);
    EXPECT_THROW(orthogonal_pilots(0, 1.0), std::invalid_argument);
}

TEST(Estimation, NoiselessLeastSquaresRecoversTheChannel)
{
    rng_type rng(51);
    const CandidatePool pool = test::gaussian_pool(rng, 3, 4, 6);
    const CandidatePool seen = observe_pool(pool, 0.0, 0.7, 1);
    for (std::size_t nu = 0; nu < 3; ++nu)
        EXPECT_LT((seen[nu] - pool[nu]).norm(), 1e-12 * pool[nu].norm());

    const std::vector<std::size_t> modes{2, 0};
    const PilotBlock block = simulate_uplink_training(pool, modes, 0.0, 1.0, 1);
    ASSERT_EQ(block.received.size(), 2u);
    EXPECT_EQ(block.received[0].rows(), 6);
    EXPECT_EQ(block.received[0].cols(), 4);
    EXPECT_LT((ls_estimate(block)[0] - pool[2]).norm(), 1e-12);
}

TEST(Estimation, LeastSquaresErrorVarianceIsNoiseRatio)
{
    rng_type rng(52);
    const CandidatePool pool = test::gaussian_pool(rng, 4, 4, 8);
    const double noise = 0.3, pilot = 2.0;
    const double q = noise_ratio(noise, pilot, 4);
    double err = 0.0;
    std::size_t n = 0;
    for (std::uint64_t s = 0; s < 400; ++s)
    {
        const CandidatePool seen = observe_pool(pool, noise, pilot, s);
        for (std::size_t nu = 0; nu < 4; ++nu)
        {
            err += (seen[nu] - pool[nu]).squaredNorm();
            n += std::size_t(pool[nu].size());
        }
    }
    EXPECT_NEAR(err / double(n) / q, 1.0, 0.03);
}

TEST(Estimation, TrainingNoiseDependsOnlyOnSeedAndMode)
{
    rng_type rng(53);
    const CandidatePool pool = test::gaussian_pool(rng, 4, 2, 3);
    const std::vector<std::size_t> a{0, 2}, b{2, 3};
    const PilotBlock x = simulate_uplink_training(pool, a, 0.1, 1.0, 77);
    const PilotBlock y = simulate_uplink_training(pool, b, 0.1, 1.0, 77);
    const PilotBlock z = simulate_uplink_training(pool, b, 0.1, 1.0, 78);
    EXPECT_EQ(x.received[1], y.received[0]);
    EXPECT_NE(y.received[0], z.received[0]);
    const std::vector<std::size_t> bad{4};
    EXPECT_THROW(simulate_uplink_training(pool, bad, 0.1, 1.0, 1), std::invalid_argument);
}

TEST(Estimation, MmseTrivialCases)
{
    rng_type rng(54);
    const CMatrix obs = test::gaussian_matrix(rng, 3, 2);
    const CMatrix r = test::psd_with_spectrum(rng, RVector::LinSpaced(3, 0.5, 2.0));
    EXPECT_EQ(mmse_estimate(obs, r, 0.0), obs);
    EXPECT_LT((mmse_estimate(obs, CMatrix::Identity(3, 3), 0.25) - obs / 1.25).norm(), 1e-14);
    EXPECT_THROW(mmse_estimate(obs, CMatrix::Identity(2, 2), 0.1), std::invalid_argument);
    EXPECT_THROW(mmse_estimate(obs, r, -1.0), std::invalid_argument);
}

TEST(Estimation, PredictionTrivialCases)
{
    const CMatrix full = test_correlation(5);
    const std::vector<std::size_t> trained{1, 3};
    const CorrelationSet set = make_correlation_set(full, trained, CorrelationSource::pattern);
    rng_type rng(55);
    const CMatrix obs = test::gaussian_matrix(rng, 2, 3);

    const CMatrix pred = predict_untrained(obs, set, 0.0);
    EXPECT_LT((pred - set.r_hch * set.r_hh.inverse() * obs).norm(), 1e-10 * obs.norm());

    const double q = 0.2;
    const CMatrix loaded = set.r_hh + q * CMatrix::Identity(2, 2);
    EXPECT_LT((predict_untrained(obs, set, q) - set.r_hch * loaded.inverse() * obs).norm(), 1e-12);

    // Nothing to predict when every mode is trained.
    const std::vector<std::size_t> all{0, 1, 2, 3, 4};
    const CMatrix none = predict_untrained(test::gaussian_matrix(rng, 5, 1), make_correlation_set(full, all, CorrelationSource::pattern), q);
    EXPECT_EQ(none.rows(), 0);
}

TEST(Estimation, AnalyticErrorClosedForms)
{
    CMatrix r(1, 1);
    r(0, 0) = 2.0;
    const std::vector<std::size_t> one{0};
    EXPECT_NEAR(analytic_mmse_error(r, one, 0.5), 2.0 * 0.5 / 2.5, 1e-14);

    const CMatrix full = test_correlation(6);
    const std::vector<std::size_t> all{0, 1, 2, 3, 4, 5};
    EXPECT_NEAR(analytic_mmse_error(full, all, 0.0), 0.0, 1e-10);
    // Uncorrelated modes: untrained ones contribute their full power.
    const std::vector<std::size_t> two{0, 5};
    const CMatrix diag = CMatrix::Identity(6, 6);
    EXPECT_NEAR(analytic_mmse_error(diag, two, 0.25), 4.0 + 2.0 * 0.25 / 1.25, 1e-12);
}

TEST(Estimation, AnalyticErrorDecreasesAlongNestedTrainingSets)
{
    const CMatrix full = test_correlation(10);
    std::vector<std::size_t> trained;
    double previous = full.trace().real();
    for (std::size_t m : {4, 0, 8, 2, 6, 9, 1, 5, 3, 7})
    {
        trained.push_back(m);
        const double e = analytic_mmse_error(full, trained, 0.01);
        EXPECT_LE(e, previous + 1e-12);
        previous = e;
    }
}

TEST(Estimation, CalibrationAveragesOuterProducts)
{
    rng_type rng(56);
    std::vector<UserModeChannel> ensemble(120);
    const CMatrix h = test::gaussian_matrix(rng, 4, 2);
    for (auto &u : ensemble)
        u.per_antenna = {h, 2.0 * h};
    const ModeCorrelation c = calibrate_channel_correlation(ensemble);
    ASSERT_EQ(c.per_antenna.size(), 2u);
    EXPECT_LT((c.antenna(0) - h * h.adjoint() / 2.0).norm(), 1e-12);
    EXPECT_LT((c.antenna(1) - 2.0 * h * h.adjoint()).norm(), 1e-12);

    ensemble.resize(99);
    EXPECT_THROW(calibrate_channel_correlation(ensemble), std::invalid_argument);
}

TEST(Estimation, ConditionalCorrelationOfSinglePath)
{
    const PatternSet p = generate_pattern_set(4, AngularGrid::uniform());
    UserPaths u;
    u.paths.push_back({cdouble(1.0, 0.0), 1.0, p.centers_deg[1], 0.0, 0.0});
    const ModeCorrelation c = conditional_channel_correlation(u, p);
    const CMatrix &r = c.antenna(3);
    // Rank one: outer product of the scaled amplitude gains.
    EXPECT_NEAR(r(1, 1).real(), p.gain(1, p.centers_deg[1], 0.0) / p.coverage_mean_gain, 1e-12);
    EXPECT_NEAR(hermitian_eig(r).eigenvalues.head(3).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Estimation, EstimatorReconstructsTrainedAndUntrainedModes)
{
    const CMatrix full = test_correlation(5);
    const ModeCorrelation corr{CorrelationSource::pattern, {full}};
    const ModeEstimator est(corr, {0, 3}, 0.1);
    ASSERT_TRUE(est.shared());
    rng_type rng(57);
    UserModeChannel obs;
    obs.per_antenna = {test::gaussian_matrix(rng, 5, 2), test::gaussian_matrix(rng, 5, 2)};
    const UserModeChannel out = est.reconstruct(obs);

    const std::vector<std::size_t> trained{0, 3};
    const CorrelationSet set = make_correlation_set(full, trained, CorrelationSource::pattern);
    CMatrix picked(2, 2);
    picked.row(0) = obs.per_antenna[1].row(0);
    picked.row(1) = obs.per_antenna[1].row(3);
    const CMatrix trained_est = mmse_estimate(picked, set.r_hh, 0.1);
    const CMatrix predicted = predict_untrained(picked, set, 0.1);
    EXPECT_LT((out.per_antenna[1].row(3) - trained_est.row(1)).norm(), 1e-12);
    EXPECT_LT((out.per_antenna[1].row(4) - predicted.row(2)).norm(), 1e-12);
}

TEST(Estimation, MseBreakdownSplitsErrors)
{
    const ModeCorrelation corr{CorrelationSource::pattern, {CMatrix::Identity(3, 3)}};
    const ModeEstimator est(corr, {1}, 0.0);
    UserModeChannel truth, obs;
    truth.per_antenna = {CMatrix::Ones(3, 1)};
    obs.per_antenna = {CMatrix::Ones(3, 1)};
    const MseBreakdown b = est.error(truth, obs);
    EXPECT_NEAR(b.trained_error, 0.0, 1e-15);
    EXPECT_NEAR(b.predicted_error, 2.0, 1e-15); // uncorrelated modes are predicted as zero
    EXPECT_NEAR(b.combined(), 2.0 / 3.0, 1e-15);
    EXPECT_THROW(MseBreakdown{}.combined(), std::invalid_argument);
    EXPECT_THROW(estimation_mse(CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)), std::invalid_argument);
    EXPECT_NEAR(estimation_mse(CMatrix::Zero(2, 1), CMatrix::Ones(2, 1)), 1.0, 1e-15);
}

TEST(Estimation, MomentsMatchPerSampleError)
{
    rng_type rng(58);
    const CMatrix full = test_correlation(6);
    const auto samples = synthetic_samples(rng, full, 150, 3, 0.05);
    const EnsembleMoments moments = ensemble_moments(samples);
    for (const ModeCorrelation &corr :
         {ModeCorrelation{CorrelationSource::pattern, {full}},
          calibrate_channel_correlation(std::vector<UserModeChannel>(150, samples[0].truth))})
        for (const std::vector<std::size_t> &trained : {std::vector<std::size_t>{2}, {0, 4, 5}})
        {
            const MseBreakdown direct = ensemble_error(samples, corr, trained, 0.05);
            const MseBreakdown fast = ensemble_error(moments, ModeEstimator(corr, trained, 0.05));
            EXPECT_NEAR(fast.trained_error, direct.trained_error, 1e-8 * direct.energy);
            EXPECT_NEAR(fast.predicted_error, direct.predicted_error, 1e-8 * direct.energy);
            EXPECT_DOUBLE_EQ(fast.energy, direct.energy);
        }
}

TEST(Estimation, SubsetEnumerationVisitsEveryCombinationInOrder)
{
    std::vector<std::vector<std::size_t>> seen;
    const SubsetSelection s = select_training_subset(4, 2,
                                                     [&](std::span<const std::size_t> m)
                                                     {
                                                         seen.emplace_back(m.begin(), m.end());
                                                         return 1.0;
                                                     });
    EXPECT_EQ(s.evaluated, 6u);
    EXPECT_EQ(seen, (std::vector<std::vector<std::size_t>>{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}));
    EXPECT_EQ(s.modes, (std::vector<std::size_t>{0, 1})); // all tied

    std::set<std::vector<std::size_t>> distinct;
    const SubsetSelection t = select_training_subset(10, 3,
                                                     [&](std::span<const std::size_t> m)
                                                     {
                                                         distinct.emplace(m.begin(), m.end());
                                                         return double(m[0] + m[1] * m[2] % 7);
                                                     });
    EXPECT_EQ(t.evaluated, 120u);
    EXPECT_EQ(distinct.size(), 120u);
    EXPECT_EQ(binomial(10, 3), 120u);
    EXPECT_EQ(binomial(3, 5), 0u);
}

TEST(Estimation, SubsetSelectionFindsMinimumAndHonoursBudget)
{
    const SubsetCost cost = [](std::span<const std::size_t> m) { return std::abs(double(m[0]) - 2.0) + std::abs(double(m[1]) - 5.0); };
    const SubsetSelection s = select_training_subset(7, 2, cost);
    EXPECT_EQ(s.modes, (std::vector<std::size_t>{2, 5}));
    EXPECT_EQ(s.cost, 0.0);
    EXPECT_THROW(select_training_subset(20, 10, cost), subset_budget_error);
    EXPECT_THROW(select_training_subset(4, 0, cost), std::invalid_argument);
    EXPECT_THROW(select_training_subset(4, 5, cost), std::invalid_argument);
}

TEST(Estimation, ExhaustiveSubsetMatchesBruteForceOracle)
{
    rng_type rng(59);
    const CMatrix full = test_correlation(6);
    const auto samples = synthetic_samples(rng, full, 200, 2, 0.02);
    const ModeCorrelation corr{CorrelationSource::pattern, {full}};
    const SubsetSelection sel = select_training_modes_exhaustive(2, samples, corr, 0.02);

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> arg;
    for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = a + 1; b < 6; ++b)
        {
            const std::vector<std::size_t> t{a, b};
            const double e = ensemble_error(samples, corr, t, 0.02).combined();
            if (e < best - 1e-12)
            {
                best = e;
                arg = t;
            }
        }
    EXPECT_EQ(sel.modes, arg);
    EXPECT_NEAR(sel.cost, best, 1e-9);
    EXPECT_EQ(sel.evaluated, 15u);
}

TEST(Estimation, OfflineSingleSectorEqualsExhaustive)
{
    rng_type rng(60);
    const CMatrix full = test_correlation(5);
    const auto samples = synthetic_samples(rng, full, 150, 2, 0.05);
    const OfflineSelection off = select_training_modes_offline(2, 1, samples, CorrelationSource::empirical, nullptr, 0.05);
    std::vector<UserModeChannel> truths;
    for (const auto &s : samples)
        truths.push_back(s.truth);
    const SubsetSelection direct =
        select_training_modes_exhaustive(2, samples, calibrate_channel_correlation(truths), 0.05);
    ASSERT_EQ(off.plan.sectors.size(), 1u);
    EXPECT_EQ(off.plan.sectors[0].modes, direct.modes);
    EXPECT_NEAR(off.sector_mse[0], direct.cost, 1e-12);
}

TEST(Estimation, OfflineSectorsUseTheirOwnSamples)
{
    rng_type rng(61);
    const PatternSet patterns = generate_pattern_set(5, AngularGrid::uniform());
    // Two sectors with different correlations: low sector uses a diagonal one, high sector the pattern one.
    auto low = synthetic_samples(rng, CMatrix::Identity(5, 5) + CMatrix::Ones(5, 5) * 0.1, 120, 2, 0.05, -60, -1);
    const auto high = synthetic_samples(rng, test_correlation(5), 130, 2, 0.05, 1, 60);
    std::vector<TrainingSample> all = low;
    all.insert(all.end(), high.begin(), high.end());

    const OfflineSelection off = select_training_modes_offline(2, 2, all, CorrelationSource::empirical, nullptr, 0.05);
    ASSERT_EQ(off.plan.sectors.size(), 2u);
    EXPECT_DOUBLE_EQ(off.plan.sectors[0].azimuth_max_deg, 0.0);
    std::vector<UserModeChannel> truths;
    for (const auto &s : high)
        truths.push_back(s.truth);
    const SubsetSelection oracle =
        select_training_modes_exhaustive(2, high, calibrate_channel_correlation(truths), 0.05);
    EXPECT_EQ(off.plan.sectors[1].modes, oracle.modes);
    EXPECT_NEAR(off.sector_mse[1], oracle.cost, 1e-12);

    // Pattern source: one shared correlation, subsets still chosen per sector.
    const OfflineSelection pat = select_training_modes_offline(2, 2, all, CorrelationSource::pattern, &patterns, 0.05);
    EXPECT_TRUE(pat.correlations[0].per_antenna[0].isApprox(pattern_correlation(patterns)));

    // Too few samples in a sector.
    EXPECT_THROW(select_training_modes_offline(2, 4, all, CorrelationSource::empirical, nullptr, 0.05),
                 std::invalid_argument);
    EXPECT_THROW(select_training_modes_offline(2, 2, all, CorrelationSource::pattern, nullptr, 0.05),
                 std::invalid_argument);
}

TEST(Estimation, PlanLookupAndRoundTrip)
{
    TrainingPlan plan;
    plan.mode_count = 10;
    plan.training_count = 3;
    plan.source = CorrelationSource::pattern;
    plan.sectors = {{-60, -30, {0, 1, 2}}, {-30, 0, {2, 3, 4}}, {0, 30, {5, 6, 7}}, {30, 60, {7, 8, 9}}};
    EXPECT_EQ(plan.sector_index(-90.0), 0u);
    EXPECT_EQ(plan.sector_index(-30.0), 1u);
    EXPECT_EQ(plan.sector_index(60.0), 3u);
    EXPECT_EQ(plan.sector_index(75.0), 3u);
    EXPECT_EQ(plan.lookup(10.0), (std::vector<std::size_t>{5, 6, 7}));

    std::stringstream io;
    write_training_plan(io, plan);
    const TrainingPlan back = read_training_plan(io);
    EXPECT_EQ(back.mode_count, 10u);
    EXPECT_EQ(back.source, CorrelationSource::pattern);
    ASSERT_EQ(back.sectors.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i)
    {
        EXPECT_EQ(back.sectors[i].modes, plan.sectors[i].modes);
        EXPECT_EQ(back.sectors[i].azimuth_min_deg, plan.sectors[i].azimuth_min_deg);
    }
}

TEST(Estimation, MalformedPlansAreRejected)
{
    const std::string header = "training_plan v1\nmodes 4\ntraining 2\nsource empirical\n";
    for (const std::string &text : {
             std::string("training_plan v2\n"),
             header + "sectors 1\nsector -60 60 0 4\n",     // mode out of range
             header + "sectors 1\nsector -60 60 1 1\n",     // duplicate
             header + "sectors 1\nsector -60 60 0\n",       // wrong count
             header + "sectors 2\nsector -60 60 0 1\n",     // count mismatch
             header + "sectors 2\nsector -60 0 0 1\nsector 10 60 0 1\n", // gap
             header + "sectors 1\nsector -60 x 0 1\n",
             header + "bogus 1\n",
             std::string("training_plan v1\nmodes 4\nsectors 0\n"),
         })
    {
        std::istringstream is(text);
        EXPECT_THROW(read_training_plan(is), std::invalid_argument) << text;
    }
}
