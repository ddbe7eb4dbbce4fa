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

#ifndef RAMIMO_CHANNEL_H
#define RAMIMO_CHANNEL_H

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "ramimo/numerics.hpp"
#include "ramimo/patterns.hpp"

namespace ramimo
{
    // Downlink system dimensions and power levels.
    struct SystemConfig
    {
        std::size_t n_tx = 8;             // transmit antennas N_T
        std::size_t n_rx = 2;             // receive antennas per user N_R
        std::size_t users = 2;            // K
        std::size_t n_rf = 4;             // RF chains
        std::size_t streams_per_user = 2; // n_s
        std::size_t modes = 10;           // L
        std::size_t subcarriers = 1;      // N_f (the channel is frequency-flat)
        std::size_t tx_rows = 0;          // planar array layout, 0 = derived from n_tx
        std::size_t tx_cols = 0;
        double snr_db = 20.0;
        double rho = 1.0; // average received power; pilot power equals rho

        std::size_t total_streams() const { return users * streams_per_user; }
        std::size_t total_rx() const { return users * n_rx; }
        double noise_power() const;
        double pilot_power() const { return rho; }

        // (rows, cols) of the transmit planar array; cols is the horizontal extent.
        std::pair<std::size_t, std::size_t> tx_array() const;

        void validate() const; // throws std::invalid_argument
    };

    // User placement ranges.
    struct Geometry
    {
        double min_distance_m = 50.0;
        double max_distance_m = 100.0;
        double azimuth_min_deg = -60.0;
        double azimuth_max_deg = 60.0;
        double elevation_min_deg = -15.0;
        double elevation_max_deg = 15.0;
    };

    // Path statistics of the geometric stand-in channel.
    struct PropagationModel
    {
        std::size_t paths_per_user = 8;
        double los_power_fraction = 0.75;
        double angular_spread_deg = 5.0;
        double wavelength_m = 0.0857; // 3.5 GHz
    };

    struct Path
    {
        cdouble gain;       // complex amplitude alpha_p
        double power;       // E|alpha_p|^2
        double azimuth_deg; // departure azimuth at the base station
        double elevation_deg;
        double arrival_deg; // arrival angle on the user's linear array
    };

    struct UserPaths
    {
        double distance_m = 0.0;
        double los_azimuth_deg = 0.0;
        double los_elevation_deg = 0.0;
        std::vector<Path> paths; // paths[0] is the line-of-sight path
    };

    struct PathSet
    {
        std::vector<UserPaths> users;
    };

    // Full-array channel for every mode: modes[nu] is H_c[nu], (K*N_R) x N_T.
    struct CandidatePool
    {
        std::vector<CMatrix> modes;

        std::size_t mode_count() const { return modes.size(); }
        Eigen::Index rows() const { return modes.empty() ? 0 : modes.front().rows(); }
        Eigen::Index cols() const { return modes.empty() ? 0 : modes.front().cols(); }
        const CMatrix &operator[](std::size_t nu) const { return modes[nu]; }
    };

    // Per-antenna mode vector and its 0/1 selection matrix W (N_T x L, unit row sums).
    // Modes are zero-based.
    class ModeAssignment
    {
    public:
        ModeAssignment() = default;
        ModeAssignment(std::vector<std::size_t> modes, std::size_t mode_count);

        static ModeAssignment uniform(std::size_t n_tx, std::size_t mode, std::size_t mode_count);
        static ModeAssignment from_selection(const Eigen::MatrixXi &w);

        const std::vector<std::size_t> &modes() const { return modes_; }
        std::size_t operator[](std::size_t n_t) const { return modes_[n_t]; }
        std::size_t size() const { return modes_.size(); }
        std::size_t mode_count() const { return mode_count_; }
        void set(std::size_t n_t, std::size_t mode);

        Eigen::MatrixXi selection_matrix() const;

        bool operator==(const ModeAssignment &) const = default;

    private:
        std::vector<std::size_t> modes_;
        std::size_t mode_count_ = 0;
    };

    PathSet sample_propagation(const SystemConfig &cfg, const Geometry &geometry, std::uint64_t seed,
                               const PropagationModel &model = {});

    // Planar-array steering phase of every transmit element for a departure direction.
    CVector tx_steering(const SystemConfig &cfg, double azimuth_deg, double elevation_deg);

    CandidatePool build_candidate_pool(const PathSet &paths, const PatternSet &patterns, const SystemConfig &cfg);

    // Column n_t of the result is column n_t of H_c[mu_{n_t}].
    CMatrix compose_channel(const CandidatePool &pool, const ModeAssignment &assignment);

    // sum_nu H_c[nu] Diag(W_nu); throws std::invalid_argument unless W is a valid selection matrix.
    CMatrix compose_channel(const CandidatePool &pool, const Eigen::MatrixXi &selection);

    // Rows k*N_R .. (k+1)*N_R-1 of a network channel (k zero-based).
    CMatrix user_block(const CMatrix &h, std::size_t k, const SystemConfig &cfg);

    // The same row block for every mode of a pool.
    CandidatePool user_pool(const CandidatePool &pool, std::size_t k, const SystemConfig &cfg);

    // CSV rows "trial,mode,row,col,re,im"; the header is written when requested.
    void write_pool_csv(std::ostream &os, const CandidatePool &pool, std::size_t trial, bool header = true);
}

#endif
