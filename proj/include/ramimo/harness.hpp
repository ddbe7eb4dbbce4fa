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

#ifndef RAMIMO_HARNESS_H
#define RAMIMO_HARNESS_H

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ramimo/channel.hpp"
#include "ramimo/estimation.hpp"
#include "ramimo/mode_select.hpp"
#include "ramimo/patterns.hpp"

namespace ramimo
{
    enum class Scenario
    {
        fig2,  // sum rate vs SNR, mode-selection schemes, perfect CSI
        fig3,  // estimation MSE vs number of trained modes
        fig4,  // estimation MSE vs SNR
        fig56  // sum rate vs SNR with estimated CSI
    };

    const char *to_string(Scenario s);
    Scenario scenario_from_string(const std::string &name);

    namespace scheme
    {
        inline constexpr const char *full_digital = "FD";
        inline constexpr const char *exhaustive = "ES";
        inline constexpr const char *alt_rate = "RA-AltMI";
        inline constexpr const char *alt_eig = "RA-AltEig";
        inline constexpr const char *fixed = "fixed";

        inline constexpr const char *optimal = "optimal";
        inline constexpr const char *offline_channel = "offline-chan-corr";
        inline constexpr const char *offline_pattern = "offline-pattern-corr";

        inline constexpr const char *perfect = "perfect";
        inline constexpr const char *estimated_optimal = "estimated-optimal";
        inline constexpr const char *estimated_offline = "estimated-offline";
        inline constexpr const char *estimated_pattern = "estimated-pattern";
    }

    struct ExperimentSpec
    {
        Scenario scenario = Scenario::fig2;
        SystemConfig system;
        std::vector<double> snr_db;         // sweep axis (fig2, fig4, fig56); single point for fig3
        std::vector<std::size_t> training;  // F sweep (fig3); single value for fig4 / fig56
        std::vector<std::string> schemes;
        std::size_t trials = 500;
        std::uint64_t seed = 1;
        std::string output;                 // CSV file name, relative to the CLI output directory
        std::size_t threads = 0;            // 0 = hardware concurrency
        std::size_t sectors = 4;
        std::size_t calibration_realizations = 400;
        std::size_t max_sweeps = 5;
        std::uint64_t exhaustive_budget = default_search_budget;
        double beamwidth_deg = 30.0;
        double pattern_exponent = 2.0;

        void validate() const; // throws std::invalid_argument
    };

    // Paper-scale defaults for a scenario (trials: 500 for rate sweeps, 2000 for MSE sweeps).
    ExperimentSpec default_experiment_spec(Scenario s);

    // JSON spec files. Keys not listed in ExperimentSpec are rejected.
    ExperimentSpec parse_experiment_spec(const std::string &json_text);
    ExperimentSpec load_experiment_spec(const std::string &path);
    std::string experiment_spec_json(const ExperimentSpec &spec);

    // FNV-1a of the canonical JSON without `threads` and `output`.
    std::uint64_t spec_hash(const ExperimentSpec &spec);

    // Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware concurrency).
    // The first exception thrown by any body is rethrown after all workers stop.
    void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)> &body);

    // One propagation realization and its candidate pool.
    struct Realization
    {
        PathSet paths;
        CandidatePool pool;
    };

    Realization make_realization(const SystemConfig &cfg, const PatternSet &patterns, std::uint64_t seed);

    std::uint64_t trial_seed(std::uint64_t seed_base, std::size_t trial);
    std::uint64_t calibration_seed(std::uint64_t seed_base, std::size_t index);

    PatternSet make_patterns(const ExperimentSpec &spec);

    // Calibration realizations (truth only); noisy observations are drawn per SNR.
    std::vector<Realization> calibration_ensemble(const ExperimentSpec &spec, const PatternSet &patterns);

    // One sample per (realization, user) with LS observations at the given noise power.
    std::vector<TrainingSample> training_samples(std::span<const Realization> worlds, const SystemConfig &cfg,
                                                 double noise_power, std::uint64_t seed_base);

    // The estimation schemes at one (SNR, F) point.
    class EstimationSuite
    {
    public:
        EstimationSuite(const PatternSet &patterns, std::span<const TrainingSample> calibration, std::size_t training,
                        std::size_t sectors, double q, bool need_offline);

        // Scheme names are those of the MSE sweeps (optimal, offline-chan-corr, offline-pattern-corr).
        ModeEstimator estimator(const std::string &scheme_name, const UserPaths &paths) const;

        const OfflineSelection &offline_channel() const { return channel_; }
        const OfflineSelection &offline_pattern() const { return pattern_; }
        double noise_ratio() const { return q_; }

    private:
        const PatternSet *patterns_;
        std::size_t training_;
        double q_;
        OfflineSelection channel_;
        OfflineSelection pattern_;
        std::vector<ModeEstimator> channel_estimators_;
        std::vector<ModeEstimator> pattern_estimators_;
    };

    struct SweepPoint
    {
        double axis = 0.0; // SNR in dB, or F for fig3
        std::string scheme;
        double value = 0.0;     // mean sum rate or normalized MSE
        double ci95 = 0.0;      // rate sweeps only
        double trained = 0.0;   // MSE sweeps: trained-mode share of the normalized MSE
        double predicted = 0.0; // MSE sweeps: predicted-mode share
    };

    struct SweepResult
    {
        Scenario scenario = Scenario::fig2;
        std::vector<SweepPoint> points;
        std::vector<std::string> violations; // failed trend/ordering checks
        bool fatal = false;                  // a violation that must fail the run (fig3 monotonicity)

        double value(double axis, const std::string &scheme) const; // throws std::out_of_range
    };

    SweepResult run_fig2_analogue(const ExperimentSpec &spec);
    SweepResult run_fig3_analogue(const ExperimentSpec &spec);
    SweepResult run_fig4_analogue(const ExperimentSpec &spec);
    SweepResult run_fig56_analogue(const ExperimentSpec &spec);
    SweepResult run_sweep(const ExperimentSpec &spec);

    // Metadata comment line, header and one row per point.
    void write_sweep_csv(std::ostream &os, const ExperimentSpec &spec, const SweepResult &result);

    // Trained / predicted MSE shares of the MSE sweeps.
    void write_components_csv(std::ostream &os, const ExperimentSpec &spec, const SweepResult &result);
}

#endif
