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

#include "ramimo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "ramimo/precoding.hpp"
#include "ramimo/random.hpp"

namespace ramimo
{
    void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)> &body)
    {
        if (threads == 0)
            threads = std::max(1u, std::thread::hardware_concurrency());
        threads = std::min(threads, n);
        if (threads <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                body(i);
            return;
        }

        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&]
        {
            for (std::size_t i; !failed.load() && (i = next.fetch_add(1)) < n;)
            {
                try
                {
                    body(i);
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    failed = true;
                }
            }
        };
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        pool.clear(); // joins
        if (error)
            std::rethrow_exception(error);
    }

    std::uint64_t trial_seed(std::uint64_t seed_base, std::size_t trial)
    {
        return seed_base + trial;
    }

    std::uint64_t calibration_seed(std::uint64_t seed_base, std::size_t index)
    {
        return derive_seed(seed_base, stream::calibration) + index;
    }

    Realization make_realization(const SystemConfig &cfg, const PatternSet &patterns, std::uint64_t seed)
    {
        Realization r;
        r.paths = sample_propagation(cfg, Geometry{}, derive_seed(seed, stream::propagation));
        r.pool = build_candidate_pool(r.paths, patterns, cfg);
        return r;
    }

    PatternSet make_patterns(const ExperimentSpec &spec)
    {
        return generate_pattern_set(spec.system.modes, AngularGrid::uniform(), spec.beamwidth_deg, spec.pattern_exponent);
    }

    static std::vector<Realization> realizations(const SystemConfig &cfg, const PatternSet &patterns, std::size_t count,
                                                 std::size_t threads, const std::function<std::uint64_t(std::size_t)> &seed)
    {
        std::vector<Realization> out(count);
        parallel_for(count, threads, [&](std::size_t i) { out[i] = make_realization(cfg, patterns, seed(i)); });
        return out;
    }

    std::vector<Realization> calibration_ensemble(const ExperimentSpec &spec, const PatternSet &patterns)
    {
        return realizations(spec.system, patterns, spec.calibration_realizations, spec.threads,
                            [&](std::size_t j) { return calibration_seed(spec.seed, j); });
    }

    static void append_user_samples(std::vector<TrainingSample> &out, const Realization &world,
                                    const CandidatePool &observed, const SystemConfig &cfg)
    {
        for (std::size_t k = 0; k < cfg.users; ++k)
        {
            const double los = world.paths.users[k].los_azimuth_deg;
            out.push_back({user_mode_channel(world.pool, k, cfg, los), user_mode_channel(observed, k, cfg, los)});
        }
    }

    std::vector<TrainingSample> training_samples(std::span<const Realization> worlds, const SystemConfig &cfg,
                                                 double noise_power, std::uint64_t seed_base)
    {
        std::vector<TrainingSample> out;
        out.reserve(worlds.size() * cfg.users);
        for (std::size_t j = 0; j < worlds.size(); ++j)
        {
            const std::uint64_t seed = derive_seed(calibration_seed(seed_base, j), stream::training);
            append_user_samples(out, worlds[j], observe_pool(worlds[j].pool, noise_power, cfg.pilot_power(), seed), cfg);
        }
        return out;
    }

    // ---------- Estimation schemes ----------

    EstimationSuite::EstimationSuite(const PatternSet &patterns, std::span<const TrainingSample> calibration,
                                     std::size_t training, std::size_t sectors, double q, bool need_offline)
        : patterns_(&patterns), training_(training), q_(q)
    {
        if (!need_offline)
            return;
        channel_ = select_training_modes_offline(training, sectors, calibration, CorrelationSource::empirical, nullptr, q);
        pattern_ = select_training_modes_offline(training, sectors, calibration, CorrelationSource::pattern, &patterns, q);
        for (std::size_t i = 0; i < sectors; ++i)
        {
            channel_estimators_.emplace_back(channel_.correlations[i], channel_.plan.sectors[i].modes, q);
            pattern_estimators_.emplace_back(pattern_.correlations[i], pattern_.plan.sectors[i].modes, q);
        }
    }

    ModeEstimator EstimationSuite::estimator(const std::string &name, const UserPaths &paths) const
    {
        if (name == scheme::optimal)
        {
            const ModeCorrelation corr = conditional_channel_correlation(paths, *patterns_);
            const CMatrix &full = corr.per_antenna.front();
            const SubsetSelection sel = select_training_subset(
                corr.mode_count(), training_,
                [&](std::span<const std::size_t> subset) { return analytic_mmse_error(full, subset, q_); });
            return ModeEstimator(corr, sel.modes, q_);
        }
        const bool channel = name == scheme::offline_channel;
        if (!channel && name != scheme::offline_pattern)
            throw std::invalid_argument("EstimationSuite: unknown scheme '" + name + "'");
        const auto &estimators = channel ? channel_estimators_ : pattern_estimators_;
        if (estimators.empty())
            throw std::logic_error("EstimationSuite: offline schemes were not calibrated");
        const auto &plan = channel ? channel_.plan : pattern_.plan;
        return estimators[plan.sector_index(paths.los_azimuth_deg)];
    }

    // ---------- Aggregation ----------

    double SweepResult::value(double axis, const std::string &name) const
    {
        for (const auto &p : points)
            if (p.axis == axis && p.scheme == name)
                return p.value;
        throw std::out_of_range("SweepResult: no point for scheme '" + name + "'");
    }

    static bool has_scheme(const ExperimentSpec &spec, const char *name)
    {
        return std::find(spec.schemes.begin(), spec.schemes.end(), name) != spec.schemes.end();
    }

    static std::string format_value(double v)
    {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return buf;
    }

    // Mean and normal-approximation 95% half-width, summed in trial order.
    static std::pair<double, double> mean_ci(const std::vector<double> &v)
    {
        double sum = 0.0;
        for (double x : v)
            sum += x;
        const double n = double(v.size());
        const double mean = sum / n;
        if (v.size() < 2)
            return {mean, 0.0};
        double ss = 0.0;
        for (double x : v)
            ss += (x - mean) * (x - mean);
        return {mean, 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
    }

    // a <= b up to relative rounding slack.
    static bool not_above(double a, double b)
    {
        return a <= b + 1e-9 * std::max(std::abs(a), std::abs(b));
    }

    // ---------- Rate sweeps ----------

    SweepResult run_fig2_analogue(const ExperimentSpec &spec)
    {
        spec.validate();
        if (spec.scenario != Scenario::fig2)
            throw std::invalid_argument("run_fig2_analogue: spec is for " + std::string(to_string(spec.scenario)));
        const SystemConfig &cfg = spec.system;
        if (has_scheme(spec, scheme::exhaustive))
        {
            const auto states = exhaustive_state_count(cfg.n_tx, cfg.modes);
            if (states > spec.exhaustive_budget)
                throw search_budget_error("ES needs " + std::to_string(states) + " evaluations per trial, over the budget of " +
                                          std::to_string(spec.exhaustive_budget) +
                                          "; drop ES or use a smaller configuration");
        }

        const PatternSet patterns = make_patterns(spec);
        const PatternSet isotropic = generate_isotropic_pattern(AngularGrid::uniform());
        SystemConfig fd_cfg = cfg;
        fd_cfg.n_rf = cfg.n_tx;
        fd_cfg.modes = 1;
        const CMatrix rf = fixed_rf_precoder(cfg);
        const CMatrix fd_rf = fixed_rf_precoder(fd_cfg);
        const HeuristicOptions options{spec.max_sweeps, 0, 0};

        const std::size_t n_snr = spec.snr_db.size(), n_scheme = spec.schemes.size();
        std::vector<double> rates(spec.trials * n_snr * n_scheme);
        auto at = [&](std::size_t t, std::size_t s, std::size_t m) -> double & { return rates[(t * n_snr + s) * n_scheme + m]; };

        parallel_for(spec.trials, spec.threads, [&](std::size_t t)
        {
            const Realization world = make_realization(cfg, patterns, trial_seed(spec.seed, t));
            const CMatrix fd_channel = build_candidate_pool(world.paths, isotropic, fd_cfg)[0];

            std::optional<ModeAssignment> eig_choice;
            if (has_scheme(spec, scheme::alt_eig))
            {
                const ModeMetric eig{MetricKind::eig_sum, &world.pool, rf, cfg.rho, 1.0, cfg, PrecoderKind::rbd};
                eig_choice = heuristic_mode_search(eig, options).assignment;
            }

            for (std::size_t s = 0; s < n_snr; ++s)
            {
                SystemConfig c = cfg;
                c.snr_db = spec.snr_db[s];
                const double noise = c.noise_power();
                const ModeMetric rate{MetricKind::sum_rate, &world.pool, rf, c.rho, noise, c, PrecoderKind::rbd};
                for (std::size_t m = 0; m < n_scheme; ++m)
                {
                    const std::string &name = spec.schemes[m];
                    double r;
                    if (name == scheme::full_digital)
                        r = sum_rate(fd_channel, bd_precoder(fd_channel, fd_rf, fd_cfg), c.rho, noise, fd_cfg);
                    else if (name == scheme::exhaustive)
                        r = exhaustive_mode_search(rate, spec.exhaustive_budget).score;
                    else if (name == scheme::alt_rate)
                        r = heuristic_mode_search(rate, options).score;
                    else if (name == scheme::alt_eig)
                        r = evaluate_metric(rate, *eig_choice);
                    else
                        r = fixed_mode_baseline(rate).score;
                    at(t, s, m) = r;
                }
            }
        });

        SweepResult result;
        result.scenario = Scenario::fig2;
        for (std::size_t s = 0; s < n_snr; ++s)
            for (std::size_t m = 0; m < n_scheme; ++m)
            {
                std::vector<double> v(spec.trials);
                for (std::size_t t = 0; t < spec.trials; ++t)
                    v[t] = at(t, s, m);
                const auto [mean, ci] = mean_ci(v);
                result.points.push_back({spec.snr_db[s], spec.schemes[m], mean, ci, 0.0, 0.0});
            }

        const char *chain[] = {scheme::exhaustive, scheme::alt_rate, scheme::fixed};
        for (double snr : spec.snr_db)
            for (std::size_t i = 0; i + 1 < 3; ++i)
                if (has_scheme(spec, chain[i]) && has_scheme(spec, chain[i + 1]) &&
                    !not_above(result.value(snr, chain[i + 1]), result.value(snr, chain[i])))
                    result.violations.push_back(std::string(chain[i]) + " below " + chain[i + 1] + " at " +
                                                format_value(snr) + " dB");
        return result;
    }

    static const char *estimation_scheme(const std::string &csi)
    {
        if (csi == scheme::estimated_optimal)
            return scheme::optimal;
        if (csi == scheme::estimated_offline)
            return scheme::offline_channel;
        return scheme::offline_pattern;
    }

    static bool needs_offline(const ExperimentSpec &spec)
    {
        return has_scheme(spec, scheme::offline_channel) || has_scheme(spec, scheme::offline_pattern) ||
               has_scheme(spec, scheme::estimated_offline) || has_scheme(spec, scheme::estimated_pattern);
    }

    SweepResult run_fig56_analogue(const ExperimentSpec &spec)
    {
        spec.validate();
        if (spec.scenario != Scenario::fig56)
            throw std::invalid_argument("run_fig56_analogue: spec is for " + std::string(to_string(spec.scenario)));
        const SystemConfig &cfg = spec.system;
        const PatternSet patterns = make_patterns(spec);
        const CMatrix rf = fixed_rf_precoder(cfg);
        const HeuristicOptions options{spec.max_sweeps, 0, 0};
        const std::size_t training = spec.training.front();
        const bool offline = needs_offline(spec);

        const auto calibration = offline ? calibration_ensemble(spec, patterns) : std::vector<Realization>{};
        const auto worlds = realizations(cfg, patterns, spec.trials, spec.threads,
                                         [&](std::size_t t) { return trial_seed(spec.seed, t); });

        const std::size_t n_scheme = spec.schemes.size();
        SweepResult result;
        result.scenario = Scenario::fig56;
        for (double snr : spec.snr_db)
        {
            SystemConfig c = cfg;
            c.snr_db = snr;
            const double noise = c.noise_power();
            const double q = noise_ratio(noise, c.pilot_power(), c.total_rx());
            const auto samples = training_samples(calibration, c, noise, spec.seed);
            const EstimationSuite suite(patterns, samples, training, spec.sectors, q, offline);

            std::vector<double> rates(spec.trials * n_scheme);
            parallel_for(spec.trials, spec.threads, [&](std::size_t t)
            {
                const Realization &world = worlds[t];
                const ModeMetric truth{MetricKind::sum_rate, &world.pool, rf, c.rho, noise, c, PrecoderKind::rbd};
                const CandidatePool observed = observe_pool(
                    world.pool, noise, c.pilot_power(), derive_seed(trial_seed(spec.seed, t), stream::training));

                for (std::size_t m = 0; m < n_scheme; ++m)
                {
                    const std::string &name = spec.schemes[m];
                    if (name == scheme::perfect)
                    {
                        rates[t * n_scheme + m] = heuristic_mode_search(truth, options).score;
                        continue;
                    }
                    CandidatePool estimate = observed;
                    for (std::size_t k = 0; k < c.users; ++k)
                    {
                        const UserPaths &up = world.paths.users[k];
                        const ModeEstimator est = suite.estimator(estimation_scheme(name), up);
                        store_user_mode_channel(estimate, k, c,
                                                est.reconstruct(user_mode_channel(observed, k, c, up.los_azimuth_deg)));
                    }
                    // Mode selection and precoder design see only the estimate; the rate uses the true channel.
                    const ModeMetric believed{MetricKind::sum_rate, &estimate, rf, c.rho, noise, c, PrecoderKind::rbd};
                    const ModeAssignment chosen = heuristic_mode_search(believed, options).assignment;
                    const PrecoderPair pre = rbd_precoder(compose_channel(estimate, chosen), rf, noise, c);
                    rates[t * n_scheme + m] = sum_rate(compose_channel(world.pool, chosen), pre, c.rho, noise, c);
                }
            });

            for (std::size_t m = 0; m < n_scheme; ++m)
            {
                std::vector<double> v(spec.trials);
                for (std::size_t t = 0; t < spec.trials; ++t)
                    v[t] = rates[t * n_scheme + m];
                const auto [mean, ci] = mean_ci(v);
                result.points.push_back({snr, spec.schemes[m], mean, ci, 0.0, 0.0});
            }
        }

        if (has_scheme(spec, scheme::perfect))
            for (double snr : spec.snr_db)
                for (const auto &name : spec.schemes)
                    if (name != scheme::perfect && !not_above(result.value(snr, name), result.value(snr, scheme::perfect)))
                        result.violations.push_back(name + " above perfect CSI at " + format_value(snr) + " dB");
        if (has_scheme(spec, scheme::estimated_pattern))
        {
            const double top = spec.snr_db.back();
            for (const auto &name : spec.schemes)
                if (name != scheme::perfect && name != scheme::estimated_pattern &&
                    !not_above(result.value(top, scheme::estimated_pattern), result.value(top, name)))
                    result.violations.push_back(std::string(scheme::estimated_pattern) + " not below " + name + " at " +
                                                format_value(top) + " dB");
        }
        return result;
    }

    // ---------- MSE sweeps ----------

    struct MsePoint
    {
        double snr_db;
        std::size_t training;
        double axis;
    };

    static SweepResult run_mse_sweep(const ExperimentSpec &spec, const std::vector<MsePoint> &grid)
    {
        const SystemConfig &cfg = spec.system;
        const PatternSet patterns = make_patterns(spec);
        const bool offline = needs_offline(spec);
        const auto calibration = offline ? calibration_ensemble(spec, patterns) : std::vector<Realization>{};
        const auto worlds = realizations(cfg, patterns, spec.trials, spec.threads,
                                         [&](std::size_t t) { return trial_seed(spec.seed, t); });

        const std::size_t n_scheme = spec.schemes.size();
        SweepResult result;
        result.scenario = spec.scenario;

        double cached_snr = std::nan("");
        std::vector<TrainingSample> samples;
        for (const auto &point : grid)
        {
            SystemConfig c = cfg;
            c.snr_db = point.snr_db;
            const double noise = c.noise_power();
            const double q = noise_ratio(noise, c.pilot_power(), c.total_rx());
            if (point.snr_db != cached_snr)
            {
                samples = training_samples(calibration, c, noise, spec.seed);
                cached_snr = point.snr_db;
            }
            const EstimationSuite suite(patterns, samples, point.training, spec.sectors, q, offline);

            std::vector<MseBreakdown> errors(spec.trials * n_scheme);
            parallel_for(spec.trials, spec.threads, [&](std::size_t t)
            {
                const Realization &world = worlds[t];
                const CandidatePool observed = observe_pool(
                    world.pool, noise, c.pilot_power(), derive_seed(trial_seed(spec.seed, t), stream::training));
                for (std::size_t k = 0; k < c.users; ++k)
                {
                    const UserPaths &up = world.paths.users[k];
                    const UserModeChannel truth = user_mode_channel(world.pool, k, c, up.los_azimuth_deg);
                    const UserModeChannel obs = user_mode_channel(observed, k, c, up.los_azimuth_deg);
                    for (std::size_t m = 0; m < n_scheme; ++m)
                        errors[t * n_scheme + m] += suite.estimator(spec.schemes[m], up).error(truth, obs);
                }
            });

            for (std::size_t m = 0; m < n_scheme; ++m)
            {
                MseBreakdown total;
                for (std::size_t t = 0; t < spec.trials; ++t)
                    total += errors[t * n_scheme + m];
                result.points.push_back({point.axis, spec.schemes[m], total.combined(), 0.0, total.trained(), total.predicted()});
            }
        }
        return result;
    }

    SweepResult run_fig3_analogue(const ExperimentSpec &spec)
    {
        spec.validate();
        if (spec.scenario != Scenario::fig3)
            throw std::invalid_argument("run_fig3_analogue: spec is for " + std::string(to_string(spec.scenario)));
        std::vector<MsePoint> grid;
        for (auto f : spec.training)
            grid.push_back({spec.snr_db.front(), f, double(f)});
        SweepResult result = run_mse_sweep(spec, grid);

        if (has_scheme(spec, scheme::optimal))
        {
            std::vector<std::size_t> order = spec.training;
            std::sort(order.begin(), order.end());
            for (std::size_t i = 1; i < order.size(); ++i)
            {
                const double prev = result.value(double(order[i - 1]), scheme::optimal);
                const double cur = result.value(double(order[i]), scheme::optimal);
                if (!not_above(cur, prev))
                {
                    result.violations.push_back("optimal MSE rises from F=" + std::to_string(order[i - 1]) + " (" +
                                                format_value(prev) + ") to F=" + std::to_string(order[i]) + " (" +
                                                format_value(cur) + ")");
                    result.fatal = true;
                }
            }
        }
        return result;
    }

    SweepResult run_fig4_analogue(const ExperimentSpec &spec)
    {
        spec.validate();
        if (spec.scenario != Scenario::fig4)
            throw std::invalid_argument("run_fig4_analogue: spec is for " + std::string(to_string(spec.scenario)));
        std::vector<MsePoint> grid;
        for (double snr : spec.snr_db)
            grid.push_back({snr, spec.training.front(), snr});
        SweepResult result = run_mse_sweep(spec, grid);

        const char *chain[] = {scheme::optimal, scheme::offline_channel, scheme::offline_pattern};
        for (double snr : spec.snr_db)
            for (std::size_t i = 0; i + 1 < 3; ++i)
                if (has_scheme(spec, chain[i]) && has_scheme(spec, chain[i + 1]) &&
                    !not_above(result.value(snr, chain[i]), result.value(snr, chain[i + 1])))
                    result.violations.push_back(std::string(chain[i]) + " above " + chain[i + 1] + " at " +
                                                format_value(snr) + " dB");

        std::vector<double> snrs = spec.snr_db;
        std::sort(snrs.begin(), snrs.end());
        for (const auto &name : spec.schemes)
            for (std::size_t i = 1; i < snrs.size(); ++i)
                if (!not_above(result.value(snrs[i], name), result.value(snrs[i - 1], name)))
                    result.violations.push_back(name + " MSE does not decrease from " + format_value(snrs[i - 1]) +
                                                " to " + format_value(snrs[i]) + " dB");
        return result;
    }

    SweepResult run_sweep(const ExperimentSpec &spec)
    {
        switch (spec.scenario)
        {
        case Scenario::fig2:
            return run_fig2_analogue(spec);
        case Scenario::fig3:
            return run_fig3_analogue(spec);
        case Scenario::fig4:
            return run_fig4_analogue(spec);
        case Scenario::fig56:
            return run_fig56_analogue(spec);
        }
        throw std::invalid_argument("run_sweep: unknown scenario");
    }

    // ---------- CSV ----------

    static void write_metadata(std::ostream &os, const ExperimentSpec &spec)
    {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "# scenario=%s spec_hash=%016llx seed=%llu trials=%zu\n", to_string(spec.scenario),
                      static_cast<unsigned long long>(spec_hash(spec)), static_cast<unsigned long long>(spec.seed),
                      spec.trials);
        os << buf;
    }

    static const char *axis_name(Scenario s)
    {
        return s == Scenario::fig3 ? "F" : "snr_db";
    }

    void write_sweep_csv(std::ostream &os, const ExperimentSpec &spec, const SweepResult &result)
    {
        write_metadata(os, spec);
        switch (result.scenario)
        {
        case Scenario::fig2:
            os << "snr_db,scheme,mean_sum_rate,ci95\n";
            break;
        case Scenario::fig3:
            os << "F,scheme,normalized_mse\n";
            break;
        case Scenario::fig4:
            os << "snr_db,scheme,normalized_mse\n";
            break;
        case Scenario::fig56:
            os << "snr_db,csi,mean_sum_rate\n";
            break;
        }
        char buf[200];
        for (const auto &p : result.points)
        {
            if (result.scenario == Scenario::fig2)
                std::snprintf(buf, sizeof(buf), "%.10g,%s,%.17g,%.17g\n", p.axis, p.scheme.c_str(), p.value, p.ci95);
            else
                std::snprintf(buf, sizeof(buf), "%.10g,%s,%.17g\n", p.axis, p.scheme.c_str(), p.value);
            os << buf;
        }
    }

    void write_components_csv(std::ostream &os, const ExperimentSpec &spec, const SweepResult &result)
    {
        if (result.scenario != Scenario::fig3 && result.scenario != Scenario::fig4)
            throw std::invalid_argument("write_components_csv: only MSE sweeps have components");
        write_metadata(os, spec);
        os << axis_name(result.scenario) << ",scheme,trained_mse,predicted_mse,normalized_mse\n";
        char buf[240];
        for (const auto &p : result.points)
        {
            std::snprintf(buf, sizeof(buf), "%.10g,%s,%.17g,%.17g,%.17g\n", p.axis, p.scheme.c_str(), p.trained,
                          p.predicted, p.value);
            os << buf;
        }
    }
}
