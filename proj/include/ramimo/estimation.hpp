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

#ifndef RAMIMO_ESTIMATION_H
#define RAMIMO_ESTIMATION_H

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ramimo/channel.hpp"
#include "ramimo/numerics.hpp"
#include "ramimo/patterns.hpp"

namespace ramimo
{
    // ---------- Uplink training ----------

    struct PilotBlock
    {
        CMatrix pilots;                  // (K*N_R) x T_p, X X^H = T_p * pilot_power * I
        std::vector<std::size_t> modes;  // trained modes, in training order
        std::vector<CMatrix> received;   // per trained mode: N_T x T_p
        double pilot_power = 1.0;
    };

    // DFT pilots scaled to the given per-symbol power; square (T_p = links).
    CMatrix orthogonal_pilots(std::size_t links, double pilot_power);

    // Y(nu) = H_c[nu]^T X + Z with Z ~ CN(0, noise_power). The noise of mode nu depends only on
    // (seed, nu), so different training subsets see the same noise on shared modes.
    PilotBlock simulate_uplink_training(const CandidatePool &pool, std::span<const std::size_t> modes,
                                        double noise_power, double pilot_power, std::uint64_t seed);

    // Y X^H / (T_p * pilot_power), returned in the pool layout: one (K*N_R) x N_T matrix per trained mode.
    std::vector<CMatrix> ls_estimate(const PilotBlock &block);

    // LS observation of every mode of the pool.
    CandidatePool observe_pool(const CandidatePool &pool, double noise_power, double pilot_power, std::uint64_t seed);

    // Post-despreading noise-to-pilot ratio noise_power / (T_p * pilot_power).
    double noise_ratio(double noise_power, double pilot_power, std::size_t pilot_length);

    // ---------- Correlations and linear estimators ----------

    enum class CorrelationSource
    {
        empirical,  // sample averages over a calibration ensemble
        pattern,    // radiation-pattern inner products
        conditional // second moments given the path geometry of one user
    };

    const char *to_string(CorrelationSource source);
    CorrelationSource correlation_source_from_string(const std::string &name);

    // Trained / cross blocks of one mode correlation for a given trained set.
    struct CorrelationSet
    {
        CorrelationSource source = CorrelationSource::empirical;
        CMatrix r_hh;  // F x F
        CMatrix r_hch; // (L-F) x F
        std::vector<std::size_t> trained;
        std::vector<std::size_t> untrained;
    };

    CorrelationSet make_correlation_set(const CMatrix &full, std::span<const std::size_t> trained,
                                        CorrelationSource source);

    // Observations are F x n (one column per link). Returns R_hh (R_hh + q I)^{-1} obs;
    // q = 0 returns obs unchanged.
    CMatrix mmse_estimate(const CMatrix &observations, const CMatrix &r_hh, double q);

    // R_hch (R_hh + q I)^{-1} obs, (L-F) x n. With q = 0 the pseudo-inverse of R_hh is used.
    CMatrix predict_untrained(const CMatrix &observations, const CorrelationSet &corr, double q);

    // Expected squared error of the joint estimate/prediction of all L modes from noisy
    // observations of the trained ones: trace(R - R_:S (R_SS + q I)^{-1} R_S:).
    double analytic_mmse_error(const CMatrix &full, std::span<const std::size_t> trained, double q);

    // All-mode channel of one user: per_antenna[n_t](mode, rx).
    struct UserModeChannel
    {
        std::vector<CMatrix> per_antenna;
        double los_azimuth_deg = 0.0;

        std::size_t antennas() const { return per_antenna.size(); }
        std::size_t mode_count() const { return per_antenna.empty() ? 0 : std::size_t(per_antenna.front().rows()); }
        double energy() const;
    };

    UserModeChannel user_mode_channel(const CandidatePool &pool, std::size_t user, const SystemConfig &cfg,
                                      double los_azimuth_deg = 0.0);

    // Writes a user's channel back into the matching row block of every mode of the pool.
    void store_user_mode_channel(CandidatePool &pool, std::size_t user, const SystemConfig &cfg,
                                 const UserModeChannel &channel);

    // L x L mode correlation per transmit antenna, or a single matrix shared by all antennas.
    struct ModeCorrelation
    {
        CorrelationSource source = CorrelationSource::empirical;
        std::vector<CMatrix> per_antenna;

        const CMatrix &antenna(std::size_t n_t) const { return per_antenna.size() == 1 ? per_antenna[0] : per_antenna.at(n_t); }
        std::size_t mode_count() const { return per_antenna.empty() ? 0 : std::size_t(per_antenna.front().rows()); }
    };

    inline constexpr std::size_t min_calibration_samples = 100;

    // Sample correlation per antenna averaged over samples and receive links, Hermitian-symmetrized
    // and projected onto the PSD cone. Throws std::invalid_argument with fewer than 100 samples.
    ModeCorrelation calibrate_channel_correlation(std::span<const UserModeChannel> ensemble);

    ModeCorrelation pattern_mode_correlation(const PatternSet &patterns);

    // sum_p P_p sqrt(g_mu(theta_p) g_nu(theta_p)) / coverage_mean_gain for one user's paths.
    ModeCorrelation conditional_channel_correlation(const UserPaths &paths, const PatternSet &patterns);

    // Squared-error sums, split into trained and predicted modes.
    struct MseBreakdown
    {
        double trained_error = 0.0;
        double predicted_error = 0.0;
        double energy = 0.0;

        MseBreakdown &operator+=(const MseBreakdown &o);
        double combined() const;  // (trained + predicted) / energy
        double trained() const;   // trained / energy
        double predicted() const; // predicted / energy
    };

    // Filters the trained-mode observations of one user into an all-mode estimate.
    class ModeEstimator
    {
    public:
        ModeEstimator(const ModeCorrelation &corr, std::vector<std::size_t> trained, double q);

        UserModeChannel reconstruct(const UserModeChannel &observed) const;
        MseBreakdown error(const UserModeChannel &truth, const UserModeChannel &observed) const;

        const std::vector<std::size_t> &trained() const { return trained_; }
        bool shared() const { return filters_.size() == 1; }

        // L x F filter applied to the trained-mode observations of antenna n_t.
        const CMatrix &filter(std::size_t n_t) const { return filters_[shared() ? 0 : n_t]; }

    private:
        std::vector<std::size_t> trained_;
        std::vector<bool> is_trained_;
        std::vector<CMatrix> filters_; // per antenna (or shared): L x F
    };

    // ||truth - estimate||^2 / ||truth||^2; throws std::invalid_argument on shape mismatch or a zero channel.
    double estimation_mse(const CMatrix &estimate, const CMatrix &truth);
    double estimation_mse(const UserModeChannel &estimate, const UserModeChannel &truth);

    // ---------- Training-subset selection ----------

    struct TrainingSample
    {
        UserModeChannel truth;
        UserModeChannel observed; // LS observation of every mode
    };

    class subset_budget_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    inline constexpr std::uint64_t default_subset_budget = 10'000;

    std::uint64_t binomial(std::size_t n, std::size_t k);

    using SubsetCost = std::function<double(std::span<const std::size_t>)>;

    struct SubsetSelection
    {
        std::vector<std::size_t> modes;
        double cost = 0.0;
        std::uint64_t evaluated = 0;
    };

    // Minimizes cost over all F-subsets of {0..L-1} in lexicographic order; ties keep the
    // lexicographically smallest subset.
    SubsetSelection select_training_subset(std::size_t modes, std::size_t training, const SubsetCost &cost,
                                           std::uint64_t budget = default_subset_budget);

    // Ensemble squared error when every sample is filtered with `corr` and the given trained set.
    MseBreakdown ensemble_error(std::span<const TrainingSample> samples, const ModeCorrelation &corr,
                                std::span<const std::size_t> trained, double q);

    // Per-antenna second moments of (truth, observation) pairs, summed over samples and receive
    // links. They determine the squared error of any linear estimator, so subset selection can
    // score each candidate without revisiting the samples.
    struct EnsembleMoments
    {
        std::vector<CMatrix> truth_truth; // sum h h^H, L x L
        std::vector<CMatrix> obs_truth;   // sum o h^H
        std::vector<CMatrix> obs_obs;     // sum o o^H
        double energy = 0.0;
    };

    EnsembleMoments ensemble_moments(std::span<const TrainingSample> samples);
    MseBreakdown ensemble_error(const EnsembleMoments &moments, const ModeEstimator &estimator);

    SubsetSelection select_training_modes_exhaustive(std::size_t training, std::span<const TrainingSample> ensemble,
                                                     const ModeCorrelation &corr, double q,
                                                     std::uint64_t budget = default_subset_budget);

    struct TrainingSector
    {
        double azimuth_min_deg = -60.0;
        double azimuth_max_deg = 60.0;
        std::vector<std::size_t> modes;
    };

    // Trained modes per azimuth sector. Sector i covers [min, max) except the last, which is closed;
    // lookups outside the covered range are clamped to the nearest sector.
    struct TrainingPlan
    {
        std::size_t mode_count = 0;
        std::size_t training_count = 0;
        CorrelationSource source = CorrelationSource::empirical;
        std::vector<TrainingSector> sectors;

        std::size_t sector_index(double azimuth_deg) const;
        const std::vector<std::size_t> &lookup(double azimuth_deg) const { return sectors[sector_index(azimuth_deg)].modes; }
        void validate() const; // throws std::invalid_argument
    };

    void write_training_plan(std::ostream &os, const TrainingPlan &plan);
    TrainingPlan read_training_plan(std::istream &is);

    struct OfflineSelection
    {
        TrainingPlan plan;
        std::vector<ModeCorrelation> correlations; // one per sector
        std::vector<double> sector_mse;            // calibration MSE of the chosen subset
    };

    // Splits [coverage_min, coverage_max] into equal sectors and runs exhaustive subset selection on the
    // calibration samples whose LOS azimuth falls in each. The empirical source calibrates one
    // correlation per sector; the pattern source uses `patterns` everywhere.
    OfflineSelection select_training_modes_offline(std::size_t training, std::size_t sectors,
                                                   std::span<const TrainingSample> calibration,
                                                   CorrelationSource source, const PatternSet *patterns, double q,
                                                   double coverage_min_deg = -60.0, double coverage_max_deg = 60.0,
                                                   std::uint64_t budget = default_subset_budget);
}

#endif
