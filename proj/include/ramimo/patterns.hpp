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

#ifndef RAMIMO_PATTERNS_H
#define RAMIMO_PATTERNS_H

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "ramimo/numerics.hpp"

namespace ramimo
{
    // Uniform sampling of the angular domain of the radiation patterns, in degrees.
    struct AngularGrid
    {
        std::vector<double> azimuth_deg;
        std::vector<double> elevation_deg;

        // Azimuth uniform over [-90, 90], elevation uniform over [-30, 30].
        static AngularGrid uniform(std::size_t n_azimuth = 181, std::size_t n_elevation = 31);

        std::size_t size() const { return azimuth_deg.size() * elevation_deg.size(); }

        // Flat index of grid point (azimuth i, elevation j).
        std::size_t index(std::size_t i, std::size_t j) const { return i * elevation_deg.size() + j; }

        // Trapezoid-rule weights (steradian-free: plain d(az) d(el) in radians) per grid point.
        std::vector<double> quadrature_weights() const;

        void validate() const; // throws std::invalid_argument
    };

    enum class PatternFamily
    {
        raised_cosine,
        isotropic
    };

    // Pool of L switchable radiation patterns.
    //
    // Raised-cosine mode nu has power gain
    //     g_nu(az, el) = a_nu * cos^q((az - c_nu) * pi / (2 * beamwidth))   for |az - c_nu| < beamwidth
    // and zero beyond the first null; it does not depend on elevation. The amplitudes a_nu
    // give every pattern unit energy on the grid: sum_w w * g_nu^2 = 1.
    struct PatternSet
    {
        PatternFamily family = PatternFamily::raised_cosine;
        AngularGrid grid;
        std::vector<double> centers_deg;
        double beamwidth_deg = 30.0;
        double exponent = 2.0;
        double coverage_min_deg = -60.0;
        double coverage_max_deg = 60.0;
        std::vector<double> amplitude;          // per mode
        std::vector<std::vector<double>> gains; // [mode][grid.index(i, j)]

        // Mean gain over modes and over azimuths uniform in the coverage range. Channels are
        // scaled by its inverse so that the mode-averaged channel power is one per entry.
        double coverage_mean_gain = 1.0;

        std::size_t mode_count() const { return centers_deg.size(); }

        // Analytic gain of a mode at an arbitrary direction (same normalization as `gains`).
        double gain(std::size_t mode, double azimuth_deg, double elevation_deg) const;
    };

    PatternSet generate_pattern_set(std::size_t mode_count, const AngularGrid &grid,
                                    double beamwidth_deg = 30.0, double exponent = 2.0,
                                    double coverage_min_deg = -60.0, double coverage_max_deg = 60.0);

    // Single omnidirectional element, used for conventional (non-reconfigurable) arrays.
    PatternSet generate_isotropic_pattern(const AngularGrid &grid,
                                          double coverage_min_deg = -60.0, double coverage_max_deg = 60.0);

    // L x L matrix of discretized integrals of g_mu * g_nu over the grid (real symmetric PSD).
    CMatrix pattern_correlation(const PatternSet &patterns);

    struct CorrelationSplit
    {
        CMatrix trained;                    // F x F: trained rows, trained columns
        CMatrix cross;                      // (L-F) x F: untrained rows, trained columns
        std::vector<std::size_t> untrained; // untrained mode indices, ascending
    };

    // Zero-based mode indices; throws std::invalid_argument on duplicates or out-of-range indices.
    CorrelationSplit split_correlations(const CMatrix &full, std::span<const std::size_t> trained);

    // CSV with header "mode,azimuth_deg,elevation_deg,gain".
    void write_patterns_csv(std::ostream &os, const PatternSet &patterns);
}

#endif
