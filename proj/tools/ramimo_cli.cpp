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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ramimo/harness.hpp"
#include "ramimo/precoding.hpp"

namespace fs = std::filesystem;
using namespace ramimo;

namespace
{
    struct GlobalOptions
    {
        std::optional<std::uint64_t> seed;
        std::optional<std::size_t> trials;
        std::optional<std::size_t> threads;
        std::string out = ".";
    };

    void apply(const GlobalOptions &g, ExperimentSpec &spec)
    {
        if (g.seed)
            spec.seed = *g.seed;
        if (g.trials)
            spec.trials = *g.trials;
        if (g.threads)
            spec.threads = *g.threads;
        spec.validate();
    }

    std::ofstream open_output(const fs::path &path)
    {
        if (path.has_parent_path())
            fs::create_directories(path.parent_path());
        std::ofstream os(path, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot write '" + path.string() + "'");
        return os;
    }

    int run_sweep_command(const GlobalOptions &g, const std::string &spec_path)
    {
        ExperimentSpec spec = load_experiment_spec(spec_path);
        apply(g, spec);
        const auto start = std::chrono::steady_clock::now();
        const SweepResult result = run_sweep(spec);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        const fs::path csv = fs::path(g.out) / spec.output;
        {
            auto os = open_output(csv);
            write_sweep_csv(os, spec, result);
        }
        if (result.scenario == Scenario::fig3 || result.scenario == Scenario::fig4)
        {
            fs::path side = csv;
            side.replace_filename(csv.stem().string() + "_components.csv");
            auto os = open_output(side);
            write_components_csv(os, spec, result);
        }
        std::fprintf(stderr, "%s: %zu trials in %.1f s -> %s\n", to_string(spec.scenario), spec.trials, seconds,
                     csv.string().c_str());
        for (const auto &v : result.violations)
            std::fprintf(stderr, "%s: %s\n", result.fatal ? "error" : "warning", v.c_str());
        return result.fatal ? 1 : 0;
    }

    void write_correlation_csv(std::ostream &os, const OfflineSelection &sel)
    {
        os << "sector,antenna,row,col,re,im\n";
        char buf[160];
        for (std::size_t s = 0; s < sel.correlations.size(); ++s)
        {
            const auto &corr = sel.correlations[s];
            for (std::size_t n = 0; n < corr.per_antenna.size(); ++n)
            {
                const CMatrix &r = corr.per_antenna[n];
                for (Eigen::Index i = 0; i < r.rows(); ++i)
                    for (Eigen::Index j = 0; j < r.cols(); ++j)
                    {
                        std::snprintf(buf, sizeof(buf), "%zu,%zu,%td,%td,%.17g,%.17g\n", s, n, i, j, r(i, j).real(),
                                      r(i, j).imag());
                        os << buf;
                    }
            }
        }
    }

    int run_calibrate_command(const GlobalOptions &g, const std::string &spec_path, std::optional<double> snr,
                              std::optional<std::size_t> training)
    {
        ExperimentSpec spec = spec_path.empty() ? default_experiment_spec(Scenario::fig4) : load_experiment_spec(spec_path);
        apply(g, spec);
        SystemConfig cfg = spec.system;
        cfg.snr_db = snr.value_or(spec.snr_db.front());
        const std::size_t f = training.value_or(spec.training.empty() ? 3 : spec.training.front());

        const PatternSet patterns = make_patterns(spec);
        const auto worlds = calibration_ensemble(spec, patterns);
        const double noise = cfg.noise_power();
        const auto samples = training_samples(worlds, cfg, noise, spec.seed);
        const EstimationSuite suite(patterns, samples, f, spec.sectors, noise_ratio(noise, cfg.pilot_power(), cfg.total_rx()),
                                    true);

        const fs::path dir(g.out);
        for (const auto &[name, sel] : {std::pair{"empirical", &suite.offline_channel()},
                                        std::pair{"pattern", &suite.offline_pattern()}})
        {
            {
                auto os = open_output(dir / (std::string("plan_") + name + ".txt"));
                write_training_plan(os, sel->plan);
            }
            auto os = open_output(dir / (std::string("correlation_") + name + ".csv"));
            write_correlation_csv(os, *sel);
            for (std::size_t s = 0; s < sel->plan.sectors.size(); ++s)
            {
                const auto &sec = sel->plan.sectors[s];
                std::printf("%-9s sector [%6.1f, %6.1f) modes", name, sec.azimuth_min_deg, sec.azimuth_max_deg);
                for (auto m : sec.modes)
                    std::printf(" %zu", m);
                std::printf("  calibration mse %.4g\n", sel->sector_mse[s]);
            }
        }
        return 0;
    }

    int run_demo_command(const GlobalOptions &g)
    {
        SystemConfig cfg;
        cfg.n_tx = 4;
        cfg.modes = 4;
        cfg.users = 2;
        cfg.n_rx = 1;
        cfg.streams_per_user = 1;
        cfg.n_rf = 2;
        cfg.validate();
        const std::uint64_t seed = g.seed.value_or(1);
        const std::size_t trials = g.trials.value_or(10);

        const PatternSet patterns = generate_pattern_set(cfg.modes, AngularGrid::uniform());
        const CMatrix rf = fixed_rf_precoder(cfg);
        std::printf("trial,exhaustive_rate,heuristic_rate,fixed_rate,exhaustive_evals,heuristic_evals\n");
        double gap = 0.0;
        for (std::size_t t = 0; t < trials; ++t)
        {
            const Realization world = make_realization(cfg, patterns, trial_seed(seed, t));
            const ModeMetric metric{MetricKind::sum_rate, &world.pool, rf, cfg.rho, cfg.noise_power(), cfg, PrecoderKind::rbd};
            const SearchResult es = exhaustive_mode_search(metric);
            const SearchResult heur = heuristic_mode_search(metric);
            const SearchResult fixed = fixed_mode_baseline(metric);
            std::printf("%zu,%.6f,%.6f,%.6f,%llu,%llu\n", t, es.score, heur.score, fixed.score,
                        static_cast<unsigned long long>(es.evaluations), static_cast<unsigned long long>(heur.evaluations));
            gap += heur.score / es.score;
        }
        std::fprintf(stderr, "mean heuristic/exhaustive rate ratio: %.4f\n", gap / double(trials));
        return 0;
    }

    int run_dump_patterns_command(const GlobalOptions &g, std::size_t modes, double beamwidth, double exponent)
    {
        const PatternSet patterns = generate_pattern_set(modes, AngularGrid::uniform(), beamwidth, exponent);
        const fs::path path = fs::path(g.out) / "patterns.csv";
        auto os = open_output(path);
        write_patterns_csv(os, patterns);
        std::fprintf(stderr, "%zu patterns -> %s\n", modes, path.string().c_str());
        return 0;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Multi-user MIMO simulation with pattern-reconfigurable antennas"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Base seed (overrides the spec)");
    app.add_option("--trials", g.trials, "Monte-Carlo trials (overrides the spec)")->check(CLI::PositiveNumber);
    app.add_option("--threads", g.threads, "Worker threads, 0 = all cores (overrides the spec)");
    app.add_option("--out", g.out, "Output directory")->capture_default_str();

    auto *sweep = app.add_subcommand("sweep", "Run a figure analogue from a spec file");
    std::string spec_path;
    sweep->add_option("--spec", spec_path, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);

    auto *calibrate = app.add_subcommand("calibrate", "Build correlation sets and offline training plans");
    std::string calib_spec;
    std::optional<double> calib_snr;
    std::optional<std::size_t> calib_training;
    calibrate->add_option("--spec", calib_spec, "Experiment spec (JSON); defaults to the fig4 configuration")
        ->check(CLI::ExistingFile);
    calibrate->add_option("--snr", calib_snr, "SNR in dB (default: first SNR of the spec)");
    calibrate->add_option("--training", calib_training, "Number of trained modes F");

    auto *demo = app.add_subcommand("demo", "Small exhaustive-vs-heuristic comparison (N_T=4, L=4)");

    auto *dump = app.add_subcommand("dump-patterns", "Write the sampled radiation patterns as CSV");
    std::size_t modes = 10;
    double beamwidth = 30.0, exponent = 2.0;
    dump->add_option("--modes", modes, "Number of modes")->capture_default_str()->check(CLI::PositiveNumber);
    dump->add_option("--beamwidth", beamwidth, "Half-width to the first null, degrees")->capture_default_str();
    dump->add_option("--exponent", exponent, "Raised-cosine exponent")->capture_default_str();

    for (auto *sub : {sweep, calibrate, demo, dump})
        sub->fallthrough();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (*sweep)
            return run_sweep_command(g, spec_path);
        if (*calibrate)
            return run_calibrate_command(g, calib_spec, calib_snr, calib_training);
        if (*demo)
            return run_demo_command(g);
        return run_dump_patterns_command(g, modes, beamwidth, exponent);
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
