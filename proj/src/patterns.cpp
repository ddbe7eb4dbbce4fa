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

#include "ramimo/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ramimo
{
    static constexpr double deg2rad = std::numbers::pi / 180.0;

    static std::vector<double> linspace(double lo, double hi, std::size_t n)
    {
        std::vector<double> v(n);
        if (n == 1)
        {
            v[0] = 0.5 * (lo + hi);
            return v;
        }
        for (std::size_t i = 0; i < n; ++i)
            v[i] = lo + (hi - lo) * double(i) / double(n - 1);
        return v;
    }

    // Trapezoid weights for (possibly non-uniform) sorted samples, in radians.
    static std::vector<double> trapezoid_weights(const std::vector<double> &x_deg)
    {
        const std::size_t n = x_deg.size();
        std::vector<double> w(n, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i)
        {
            const double h = (x_deg[i + 1] - x_deg[i]) * deg2rad;
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
        return w;
    }

    AngularGrid AngularGrid::uniform(std::size_t n_azimuth, std::size_t n_elevation)
    {
        AngularGrid g;
        g.azimuth_deg = linspace(-90.0, 90.0, n_azimuth);
        g.elevation_deg = linspace(-30.0, 30.0, n_elevation);
        g.validate();
        return g;
    }

    void AngularGrid::validate() const
    {
        if (azimuth_deg.size() < 64)
            throw std::invalid_argument("AngularGrid: at least 64 azimuth samples required");
        if (elevation_deg.size() < 16)
            throw std::invalid_argument("AngularGrid: at least 16 elevation samples required");
        for (std::size_t i = 1; i < azimuth_deg.size(); ++i)
            if (!(azimuth_deg[i] > azimuth_deg[i - 1]))
                throw std::invalid_argument("AngularGrid: azimuth samples must be strictly increasing");
        for (std::size_t i = 1; i < elevation_deg.size(); ++i)
            if (!(elevation_deg[i] > elevation_deg[i - 1]))
                throw std::invalid_argument("AngularGrid: elevation samples must be strictly increasing");
    }

    std::vector<double> AngularGrid::quadrature_weights() const
    {
        const auto wa = trapezoid_weights(azimuth_deg);
        const auto we = trapezoid_weights(elevation_deg);
        std::vector<double> w(size());
        for (std::size_t i = 0; i < wa.size(); ++i)
            for (std::size_t j = 0; j < we.size(); ++j)
                w[index(i, j)] = wa[i] * we[j];
        return w;
    }

    // Unnormalized mainlobe shape.
    static double lobe_shape(const PatternSet &p, std::size_t mode, double azimuth_deg)
    {
        if (p.family == PatternFamily::isotropic)
            return 1.0;
        const double offset = azimuth_deg - p.centers_deg[mode];
        if (std::abs(offset) >= p.beamwidth_deg)
            return 0.0;
        const double c = std::cos(offset * std::numbers::pi / (2.0 * p.beamwidth_deg));
        return std::pow(c, p.exponent);
    }

    double PatternSet::gain(std::size_t mode, double azimuth_deg, double) const
    {
        if (mode >= mode_count())
            throw std::out_of_range("PatternSet::gain: mode " + std::to_string(mode) + " out of range");
        return amplitude[mode] * lobe_shape(*this, mode, azimuth_deg);
    }

    // Samples the patterns on the grid, applies unit-energy normalization and computes the
    // coverage mean gain (fine trapezoid over the coverage azimuths).
    static void finalize_patterns(PatternSet &p)
    {
        const std::size_t L = p.mode_count();
        const auto w = p.grid.quadrature_weights();
        p.amplitude.assign(L, 1.0);
        p.gains.assign(L, std::vector<double>(p.grid.size(), 0.0));

        for (std::size_t m = 0; m < L; ++m)
        {
            double energy = 0.0;
            for (std::size_t i = 0; i < p.grid.azimuth_deg.size(); ++i)
            {
                const double s = lobe_shape(p, m, p.grid.azimuth_deg[i]);
                for (std::size_t j = 0; j < p.grid.elevation_deg.size(); ++j)
                {
                    p.gains[m][p.grid.index(i, j)] = s;
                    energy += w[p.grid.index(i, j)] * s * s;
                }
            }
            if (energy <= 0.0)
                throw std::invalid_argument("generate_pattern_set: mode " + std::to_string(m) +
                                            " has no support on the angular grid");
            p.amplitude[m] = 1.0 / std::sqrt(energy);
            for (auto &g : p.gains[m])
                g *= p.amplitude[m];
        }

        constexpr std::size_t n_fine = 4001;
        const auto az = linspace(p.coverage_min_deg, p.coverage_max_deg, n_fine);
        const auto wf = trapezoid_weights(az);
        const double span = (p.coverage_max_deg - p.coverage_min_deg) * deg2rad;
        double mean = 0.0;
        for (std::size_t m = 0; m < L; ++m)
            for (std::size_t i = 0; i < n_fine; ++i)
                mean += wf[i] * p.gain(m, az[i], 0.0);
        p.coverage_mean_gain = mean / (span * double(L));
        if (!(p.coverage_mean_gain > 0.0))
            throw std::invalid_argument("generate_pattern_set: patterns have no gain inside the coverage range");
    }

    PatternSet generate_pattern_set(std::size_t mode_count, const AngularGrid &grid, double beamwidth_deg,
                                    double exponent, double coverage_min_deg, double coverage_max_deg)
    {
        if (mode_count < 1)
            throw std::invalid_argument("generate_pattern_set: at least one mode required");
        if (!(beamwidth_deg > 0.0))
            throw std::invalid_argument("generate_pattern_set: beamwidth must be positive");
        if (!(exponent > 0.0))
            throw std::invalid_argument("generate_pattern_set: exponent must be positive");
        if (!(coverage_max_deg > coverage_min_deg))
            throw std::invalid_argument("generate_pattern_set: empty coverage range");
        grid.validate();

        const double az_step = (grid.azimuth_deg.back() - grid.azimuth_deg.front()) / double(grid.azimuth_deg.size() - 1);
        if (mode_count > 1)
        {
            const double spacing = (coverage_max_deg - coverage_min_deg) / double(mode_count - 1);
            if (spacing < az_step)
                throw std::invalid_argument("generate_pattern_set: " + std::to_string(mode_count) +
                                            " modes are closer than the azimuth grid resolution");
        }

        PatternSet p;
        p.family = PatternFamily::raised_cosine;
        p.grid = grid;
        p.beamwidth_deg = beamwidth_deg;
        p.exponent = exponent;
        p.coverage_min_deg = coverage_min_deg;
        p.coverage_max_deg = coverage_max_deg;
        p.centers_deg = linspace(coverage_min_deg, coverage_max_deg, mode_count);
        finalize_patterns(p);
        return p;
    }

    PatternSet generate_isotropic_pattern(const AngularGrid &grid, double coverage_min_deg, double coverage_max_deg)
    {
        grid.validate();
        PatternSet p;
        p.family = PatternFamily::isotropic;
        p.grid = grid;
        p.coverage_min_deg = coverage_min_deg;
        p.coverage_max_deg = coverage_max_deg;
        p.centers_deg = {0.0};
        finalize_patterns(p);
        return p;
    }

    CMatrix pattern_correlation(const PatternSet &patterns)
    {
        const std::size_t L = patterns.mode_count();
        const auto w = patterns.grid.quadrature_weights();
        CMatrix r(L, L);
        for (std::size_t a = 0; a < L; ++a)
            for (std::size_t b = a; b < L; ++b)
            {
                double acc = 0.0;
                for (std::size_t k = 0; k < w.size(); ++k)
                    acc += w[k] * patterns.gains[a][k] * patterns.gains[b][k];
                r(a, b) = acc;
                r(b, a) = acc;
            }
        return r;
    }

    CorrelationSplit split_correlations(const CMatrix &full, std::span<const std::size_t> trained)
    {
        if (full.rows() != full.cols())
            throw std::invalid_argument("split_correlations: correlation matrix must be square");
        const std::size_t L = std::size_t(full.rows());
        std::vector<bool> used(L, false);
        for (auto m : trained)
        {
            if (m >= L)
                throw std::invalid_argument("split_correlations: mode index " + std::to_string(m) + " out of range");
            if (used[m])
                throw std::invalid_argument("split_correlations: duplicate mode index " + std::to_string(m));
            used[m] = true;
        }

        CorrelationSplit s;
        for (std::size_t m = 0; m < L; ++m)
            if (!used[m])
                s.untrained.push_back(m);

        const auto F = Eigen::Index(trained.size());
        s.trained.resize(F, F);
        s.cross.resize(Eigen::Index(s.untrained.size()), F);
        for (Eigen::Index j = 0; j < F; ++j)
        {
            for (Eigen::Index i = 0; i < F; ++i)
                s.trained(i, j) = full(Eigen::Index(trained[i]), Eigen::Index(trained[j]));
            for (Eigen::Index i = 0; i < s.cross.rows(); ++i)
                s.cross(i, j) = full(Eigen::Index(s.untrained[i]), Eigen::Index(trained[j]));
        }
        return s;
    }

    void write_patterns_csv(std::ostream &os, const PatternSet &patterns)
    {
        os << "mode,azimuth_deg,elevation_deg,gain\n";
        const auto &g = patterns.grid;
        char buf[128];
        for (std::size_t m = 0; m < patterns.mode_count(); ++m)
            for (std::size_t i = 0; i < g.azimuth_deg.size(); ++i)
                for (std::size_t j = 0; j < g.elevation_deg.size(); ++j)
                {
                    std::snprintf(buf, sizeof(buf), "%zu,%.6g,%.6g,%.12g\n", m, g.azimuth_deg[i],
                                  g.elevation_deg[j], patterns.gains[m][g.index(i, j)]);
                    os << buf;
                }
    }
}
