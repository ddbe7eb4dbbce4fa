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

#include "ramimo/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ramimo/random.hpp"

namespace ramimo
{
    static constexpr double deg2rad = std::numbers::pi / 180.0;

    double SystemConfig::noise_power() const
    {
        return rho * std::pow(10.0, -snr_db / 10.0);
    }

    std::pair<std::size_t, std::size_t> SystemConfig::tx_array() const
    {
        if (tx_rows != 0 && tx_cols != 0)
            return {tx_rows, tx_cols};
        if (n_tx >= 4 && n_tx % 2 == 0)
            return {2, n_tx / 2};
        return {1, n_tx};
    }

    void SystemConfig::validate() const
    {
        auto fail = [](const std::string &msg)
        { throw std::invalid_argument("SystemConfig: " + msg); };

        if (n_tx == 0 || n_rx == 0 || users == 0 || n_rf == 0 || streams_per_user == 0 || modes == 0)
            fail("all dimensions must be at least 1");
        if (subcarriers < 1)
            fail("at least one subcarrier required");
        if (total_streams() > n_rf)
            fail("total streams " + std::to_string(total_streams()) + " exceed RF chains " + std::to_string(n_rf));
        if (n_rf > n_tx)
            fail("RF chains " + std::to_string(n_rf) + " exceed transmit antennas " + std::to_string(n_tx));
        if (streams_per_user > n_rx)
            fail("streams per user exceed receive antennas");
        if ((tx_rows == 0) != (tx_cols == 0))
            fail("tx_rows and tx_cols must be given together");
        if (tx_rows != 0 && tx_rows * tx_cols != n_tx)
            fail("tx_rows * tx_cols must equal n_tx");
        if (!std::isfinite(snr_db) || !(rho > 0.0))
            fail("snr_db must be finite and rho positive");
    }

    // ---------- ModeAssignment ----------

    ModeAssignment::ModeAssignment(std::vector<std::size_t> modes, std::size_t mode_count)
        : modes_(std::move(modes)), mode_count_(mode_count)
    {
        if (mode_count_ == 0)
            throw std::invalid_argument("ModeAssignment: mode count must be positive");
        for (auto m : modes_)
            if (m >= mode_count_)
                throw std::invalid_argument("ModeAssignment: mode " + std::to_string(m) + " out of range");
    }

    ModeAssignment ModeAssignment::uniform(std::size_t n_tx, std::size_t mode, std::size_t mode_count)
    {
        return ModeAssignment(std::vector<std::size_t>(n_tx, mode), mode_count);
    }

    ModeAssignment ModeAssignment::from_selection(const Eigen::MatrixXi &w)
    {
        if (w.cols() == 0)
            throw std::invalid_argument("selection matrix has no mode columns");
        std::vector<std::size_t> modes(std::size_t(w.rows()));
        for (Eigen::Index n = 0; n < w.rows(); ++n)
        {
            int ones = 0;
            for (Eigen::Index m = 0; m < w.cols(); ++m)
            {
                if (w(n, m) != 0 && w(n, m) != 1)
                    throw std::invalid_argument("selection matrix entries must be 0 or 1");
                if (w(n, m) == 1)
                {
                    ++ones;
                    modes[std::size_t(n)] = std::size_t(m);
                }
            }
            if (ones != 1)
                throw std::invalid_argument("selection matrix row " + std::to_string(n) + " sums to " +
                                            std::to_string(ones) + ", expected 1");
        }
        return ModeAssignment(std::move(modes), std::size_t(w.cols()));
    }

    void ModeAssignment::set(std::size_t n_t, std::size_t mode)
    {
        if (mode >= mode_count_)
            throw std::invalid_argument("ModeAssignment::set: mode out of range");
        modes_.at(n_t) = mode;
    }

    Eigen::MatrixXi ModeAssignment::selection_matrix() const
    {
        Eigen::MatrixXi w = Eigen::MatrixXi::Zero(Eigen::Index(modes_.size()), Eigen::Index(mode_count_));
        for (std::size_t n = 0; n < modes_.size(); ++n)
            w(Eigen::Index(n), Eigen::Index(modes_[n])) = 1;
        return w;
    }

    // ---------- Propagation ----------

    PathSet sample_propagation(const SystemConfig &cfg, const Geometry &geometry, std::uint64_t seed,
                               const PropagationModel &model)
    {
        if (cfg.users == 0)
            throw std::invalid_argument("sample_propagation: at least one user required");
        if (model.paths_per_user == 0)
            throw std::invalid_argument("sample_propagation: at least one path per user required");

        rng_type rng(seed);
        std::uniform_real_distribution<double> dist(geometry.min_distance_m, geometry.max_distance_m);
        std::uniform_real_distribution<double> az(geometry.azimuth_min_deg, geometry.azimuth_max_deg);
        std::uniform_real_distribution<double> el(geometry.elevation_min_deg, geometry.elevation_max_deg);
        std::uniform_real_distribution<double> arrival(-90.0, 90.0);
        std::normal_distribution<double> spread(0.0, model.angular_spread_deg);

        const std::size_t n_scatter = model.paths_per_user - 1;
        const double los_power = n_scatter == 0 ? 1.0 : model.los_power_fraction;
        const double scatter_power = n_scatter == 0 ? 0.0 : (1.0 - los_power) / double(n_scatter);

        PathSet set;
        set.users.resize(cfg.users);
        for (auto &u : set.users)
        {
            u.distance_m = dist(rng);
            u.los_azimuth_deg = az(rng);
            u.los_elevation_deg = el(rng);

            const double phase = -2.0 * std::numbers::pi * u.distance_m / model.wavelength_m;
            u.paths.push_back({std::sqrt(los_power) * std::polar(1.0, phase), los_power,
                               u.los_azimuth_deg, u.los_elevation_deg, arrival(rng)});

            for (std::size_t p = 0; p < n_scatter; ++p)
            {
                Path s;
                s.power = scatter_power;
                s.gain = complex_gaussian(rng, scatter_power);
                s.azimuth_deg = std::clamp(u.los_azimuth_deg + spread(rng), geometry.azimuth_min_deg, geometry.azimuth_max_deg);
                s.elevation_deg = std::clamp(u.los_elevation_deg + spread(rng), geometry.elevation_min_deg, geometry.elevation_max_deg);
                s.arrival_deg = arrival(rng);
                u.paths.push_back(s);
            }
        }
        return set;
    }

    CVector tx_steering(const SystemConfig &cfg, double azimuth_deg, double elevation_deg)
    {
        const auto [rows, cols] = cfg.tx_array();
        const double az = azimuth_deg * deg2rad, el = elevation_deg * deg2rad;
        const double u = std::numbers::pi * std::sin(az) * std::cos(el); // half-wavelength spacing
        const double v = std::numbers::pi * std::sin(el);
        CVector a(Eigen::Index(rows * cols));
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                a[Eigen::Index(r * cols + c)] = std::polar(1.0, u * double(c) + v * double(r));
        return a;
    }

    CandidatePool build_candidate_pool(const PathSet &paths, const PatternSet &patterns, const SystemConfig &cfg)
    {
        cfg.validate();
        if (paths.users.size() != cfg.users)
            throw std::invalid_argument("build_candidate_pool: path set has " + std::to_string(paths.users.size()) +
                                        " users, config has " + std::to_string(cfg.users));

        const std::size_t L = patterns.mode_count();
        const auto n_rows = Eigen::Index(cfg.total_rx());
        const auto n_cols = Eigen::Index(cfg.n_tx);
        const double scale = 1.0 / patterns.coverage_mean_gain;

        CandidatePool pool;
        pool.modes.assign(L, CMatrix::Zero(n_rows, n_cols));

        for (std::size_t k = 0; k < cfg.users; ++k)
            for (const auto &p : paths.users[k].paths)
            {
                const CVector a_t = tx_steering(cfg, p.azimuth_deg, p.elevation_deg);
                CVector a_r(Eigen::Index(cfg.n_rx));
                const double phase = std::numbers::pi * std::sin(p.arrival_deg * deg2rad);
                for (std::size_t r = 0; r < cfg.n_rx; ++r)
                    a_r[Eigen::Index(r)] = std::polar(1.0, phase * double(r));

                const CMatrix outer = p.gain * a_r * a_t.transpose();
                for (std::size_t nu = 0; nu < L; ++nu)
                {
                    const double g = patterns.gain(nu, p.azimuth_deg, p.elevation_deg);
                    if (g > 0.0)
                        pool.modes[nu].middleRows(Eigen::Index(k * cfg.n_rx), Eigen::Index(cfg.n_rx)) += std::sqrt(g * scale) * outer;
                }
            }
        return pool;
    }

    CMatrix compose_channel(const CandidatePool &pool, const ModeAssignment &assignment)
    {
        if (assignment.size() != std::size_t(pool.cols()))
            throw std::invalid_argument("compose_channel: assignment covers " + std::to_string(assignment.size()) +
                                        " antennas, pool has " + std::to_string(pool.cols()));
        if (assignment.mode_count() != pool.mode_count())
            throw std::invalid_argument("compose_channel: assignment and pool disagree on the number of modes");

        CMatrix h(pool.rows(), pool.cols());
        for (std::size_t n = 0; n < assignment.size(); ++n)
            h.col(Eigen::Index(n)) = pool.modes[assignment[n]].col(Eigen::Index(n));
        return h;
    }

    CMatrix compose_channel(const CandidatePool &pool, const Eigen::MatrixXi &selection)
    {
        // Validates W (0/1 entries, unit row sums).
        const ModeAssignment checked = ModeAssignment::from_selection(selection);
        if (checked.size() != std::size_t(pool.cols()) || checked.mode_count() != pool.mode_count())
            throw std::invalid_argument("compose_channel: selection matrix shape does not match the pool");

        CMatrix h = CMatrix::Zero(pool.rows(), pool.cols());
        for (std::size_t nu = 0; nu < pool.mode_count(); ++nu)
        {
            const Eigen::VectorXcd w_nu = selection.col(Eigen::Index(nu)).cast<double>().cast<cdouble>();
            h += pool.modes[nu] * w_nu.asDiagonal();
        }
        return h;
    }

    CMatrix user_block(const CMatrix &h, std::size_t k, const SystemConfig &cfg)
    {
        if (k >= cfg.users)
            throw std::out_of_range("user_block: user " + std::to_string(k) + " out of range");
        if (std::size_t(h.rows()) != cfg.total_rx())
            throw std::invalid_argument("user_block: channel has " + std::to_string(h.rows()) + " rows, expected " +
                                        std::to_string(cfg.total_rx()));
        return h.middleRows(Eigen::Index(k * cfg.n_rx), Eigen::Index(cfg.n_rx));
    }

    CandidatePool user_pool(const CandidatePool &pool, std::size_t k, const SystemConfig &cfg)
    {
        CandidatePool out;
        out.modes.reserve(pool.mode_count());
        for (const auto &h : pool.modes)
            out.modes.push_back(user_block(h, k, cfg));
        return out;
    }

    void write_pool_csv(std::ostream &os, const CandidatePool &pool, std::size_t trial, bool header)
    {
        if (header)
            os << "trial,mode,row,col,re,im\n";
        char buf[160];
        for (std::size_t nu = 0; nu < pool.mode_count(); ++nu)
            for (Eigen::Index r = 0; r < pool.rows(); ++r)
                for (Eigen::Index c = 0; c < pool.cols(); ++c)
                {
                    const cdouble v = pool.modes[nu](r, c);
                    std::snprintf(buf, sizeof(buf), "%zu,%zu,%td,%td,%.17g,%.17g\n", trial, nu, r, c, v.real(), v.imag());
                    os << buf;
                }
    }
}
