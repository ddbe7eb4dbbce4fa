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

#include "ramimo/mode_select.hpp"

#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "ramimo/precoding.hpp"
#include "ramimo/random.hpp"

namespace ramimo
{
    double evaluate_metric(const ModeMetric &metric, const ModeAssignment &assignment)
    {
        if (metric.pool == nullptr)
            throw std::invalid_argument("evaluate_metric: metric has no candidate pool");
        const CMatrix h = compose_channel(*metric.pool, assignment);

        if (metric.kind == MetricKind::eig_sum)
        {
            const HermitianEig eig = hermitian_eig(hermitian_part(h.adjoint() * h));
            return eig.eigenvalues.sum();
        }

        if (metric.precoder == PrecoderKind::bd)
        {
            try
            {
                const PrecoderPair pre = bd_precoder(h, metric.rf, metric.cfg);
                return sum_rate(h, pre, metric.rho, metric.noise_power, metric.cfg);
            }
            catch (const infeasible_precoder_error &)
            {
                return -std::numeric_limits<double>::infinity();
            }
        }
        const PrecoderPair pre = rbd_precoder(h, metric.rf, metric.noise_power, metric.cfg);
        return sum_rate(h, pre, metric.rho, metric.noise_power, metric.cfg);
    }

    std::uint64_t exhaustive_state_count(std::size_t n_tx, std::size_t modes)
    {
        std::uint64_t count = 1;
        for (std::size_t i = 0; i < n_tx; ++i)
        {
            if (modes != 0 && count > std::numeric_limits<std::uint64_t>::max() / modes)
                return std::numeric_limits<std::uint64_t>::max();
            count *= modes;
        }
        return count;
    }

    static ModeScorer bind_metric(const ModeMetric &metric)
    {
        return [&metric](const ModeAssignment &a) { return evaluate_metric(metric, a); };
    }

    SearchResult exhaustive_mode_search(const ModeScorer &score, std::size_t n_tx, std::size_t modes,
                                        std::uint64_t budget)
    {
        if (n_tx == 0 || modes == 0)
            throw std::invalid_argument("exhaustive_mode_search: antennas and modes must be positive");
        const std::uint64_t states = exhaustive_state_count(n_tx, modes);
        if (states > budget)
            throw search_budget_error("exhaustive_mode_search: " + std::to_string(modes) + "^" + std::to_string(n_tx) +
                                      " states exceed the budget of " + std::to_string(budget) +
                                      "; use heuristic_mode_search instead");

        ModeAssignment current = ModeAssignment::uniform(n_tx, 0, modes);
        SearchResult best{current, -std::numeric_limits<double>::infinity(), 0, states, {}};

        for (std::uint64_t s = 0; s < states; ++s)
        {
            const double value = score(current);
            if (value > best.score)
            {
                best.score = value;
                best.assignment = current;
            }
            // Odometer with antenna 0 most significant, so visits are in lexicographic order.
            for (std::size_t n = n_tx; n-- > 0;)
            {
                if (current[n] + 1 < modes)
                {
                    current.set(n, current[n] + 1);
                    break;
                }
                current.set(n, 0);
            }
        }
        return best;
    }

    SearchResult exhaustive_mode_search(const ModeMetric &metric, std::uint64_t budget)
    {
        return exhaustive_mode_search(bind_metric(metric), metric.cfg.n_tx, metric.pool ? metric.pool->mode_count() : 0,
                                      budget);
    }

    static SearchResult coordinate_ascent(const ModeScorer &score, ModeAssignment start, std::size_t max_sweeps)
    {
        const std::size_t n_tx = start.size();
        const std::size_t modes = start.mode_count();
        SearchResult r{std::move(start), -std::numeric_limits<double>::infinity(), 0, 0, {}};
        std::vector<double> scores(modes);

        for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep)
        {
            ++r.sweeps_used;
            bool changed = false;
            for (std::size_t n = 0; n < n_tx; ++n)
            {
                const std::size_t incumbent = r.assignment[n];
                ModeAssignment trial = r.assignment;
                for (std::size_t m = 0; m < modes; ++m)
                {
                    trial.set(n, m);
                    scores[m] = score(trial);
                }
                r.evaluations += modes;

                std::size_t chosen = incumbent;
                for (std::size_t m = 0; m < modes; ++m)
                    if (scores[m] > scores[chosen])
                        chosen = m;
                if (chosen != incumbent)
                {
                    r.assignment.set(n, chosen);
                    changed = true;
                }
                r.score = scores[chosen];
                r.trace.push_back({sweep, n, chosen, r.score});
            }
            if (!changed)
                break;
        }
        return r;
    }

    SearchResult heuristic_mode_search(const ModeScorer &score, std::size_t n_tx, std::size_t modes,
                                       const HeuristicOptions &options)
    {
        if (n_tx == 0 || modes == 0)
            throw std::invalid_argument("heuristic_mode_search: antennas and modes must be positive");
        if (options.max_sweeps < 1)
            throw std::invalid_argument("heuristic_mode_search: max_sweeps must be at least 1");

        SearchResult best = coordinate_ascent(score, ModeAssignment::uniform(n_tx, 0, modes), options.max_sweeps);
        if (options.restarts == 0)
            return best;

        rng_type rng(derive_seed(options.seed, stream::restarts));
        std::uniform_int_distribution<std::size_t> pick(0, modes - 1);
        std::uint64_t evaluations = best.evaluations;
        std::size_t sweeps = best.sweeps_used;
        for (std::size_t r = 0; r < options.restarts; ++r)
        {
            std::vector<std::size_t> init(n_tx);
            for (auto &m : init)
                m = pick(rng);
            SearchResult run = coordinate_ascent(score, ModeAssignment(std::move(init), modes), options.max_sweeps);
            evaluations += run.evaluations;
            sweeps += run.sweeps_used;
            if (run.score > best.score)
                best = std::move(run);
        }
        best.evaluations = evaluations;
        best.sweeps_used = sweeps;
        return best;
    }

    SearchResult heuristic_mode_search(const ModeMetric &metric, const HeuristicOptions &options)
    {
        return heuristic_mode_search(bind_metric(metric), metric.cfg.n_tx, metric.pool ? metric.pool->mode_count() : 0,
                                     options);
    }

    SearchResult fixed_mode_baseline(const ModeMetric &metric)
    {
        if (metric.pool == nullptr)
            throw std::invalid_argument("fixed_mode_baseline: metric has no candidate pool");
        ModeAssignment a = ModeAssignment::uniform(metric.cfg.n_tx, 0, metric.pool->mode_count());
        const double s = evaluate_metric(metric, a);
        return {std::move(a), s, 0, 1, {}};
    }

    void write_trace_csv(std::ostream &os, const SearchResult &result)
    {
        os << "iteration,antenna,mode,score\n";
        char buf[96];
        for (const auto &e : result.trace)
        {
            std::snprintf(buf, sizeof(buf), "%zu,%zu,%zu,%.17g\n", e.iteration, e.antenna, e.mode, e.score);
            os << buf;
        }
    }
}
