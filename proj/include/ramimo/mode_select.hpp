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

#ifndef RAMIMO_MODE_SELECT_H
#define RAMIMO_MODE_SELECT_H

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "ramimo/channel.hpp"
#include "ramimo/numerics.hpp"

namespace ramimo
{
    enum class MetricKind
    {
        sum_rate, // RBD precoder + sum rate on the composed channel
        eig_sum   // sum of eigenvalues of H^H H
    };

    enum class PrecoderKind
    {
        rbd,
        bd
    };

    // Scores a mode assignment against a fixed candidate pool.
    struct ModeMetric
    {
        MetricKind kind = MetricKind::sum_rate;
        const CandidatePool *pool = nullptr;
        CMatrix rf;
        double rho = 1.0;
        double noise_power = 1.0;
        SystemConfig cfg;
        PrecoderKind precoder = PrecoderKind::rbd;
    };

    // Returns -inf when a BD precoder is infeasible for the assignment.
    double evaluate_metric(const ModeMetric &metric, const ModeAssignment &assignment);

    using ModeScorer = std::function<double(const ModeAssignment &)>;

    class search_budget_error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    struct TraceEntry
    {
        std::size_t iteration; // sweep index, zero-based
        std::size_t antenna;
        std::size_t mode;
        double score;
    };

    struct SearchResult
    {
        ModeAssignment assignment;
        double score = 0.0;
        std::size_t sweeps_used = 0;   // 0 for exhaustive search
        std::uint64_t evaluations = 0; // L^N_T or sweeps_used * N_T * L
        std::vector<TraceEntry> trace; // one entry per coordinate step (heuristic only)
    };

    struct HeuristicOptions
    {
        std::size_t max_sweeps = 5;
        std::size_t restarts = 0; // extra random initializations beyond the all-zero start
        std::uint64_t seed = 0;   // drives the restart initializations
    };

    inline constexpr std::uint64_t default_search_budget = 1'000'000;

    // Lexicographic enumeration; ties keep the lexicographically smallest assignment.
    SearchResult exhaustive_mode_search(const ModeScorer &score, std::size_t n_tx, std::size_t modes,
                                        std::uint64_t budget = default_search_budget);
    SearchResult exhaustive_mode_search(const ModeMetric &metric, std::uint64_t budget = default_search_budget);

    // In-place coordinate ascent from all antennas in mode 0. A mode replaces the incumbent
    // only on strict improvement.
    SearchResult heuristic_mode_search(const ModeScorer &score, std::size_t n_tx, std::size_t modes,
                                       const HeuristicOptions &options = {});
    SearchResult heuristic_mode_search(const ModeMetric &metric, const HeuristicOptions &options = {});

    // Baseline: every antenna in mode 0.
    SearchResult fixed_mode_baseline(const ModeMetric &metric);

    // L^N_T, saturating at UINT64_MAX.
    std::uint64_t exhaustive_state_count(std::size_t n_tx, std::size_t modes);

    // CSV "iteration,antenna,mode,score" with header.
    void write_trace_csv(std::ostream &os, const SearchResult &result);
}

#endif
