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

#include "ramimo/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "ramimo/random.hpp"

namespace ramimo
{
    // ---------- Uplink training ----------

    CMatrix orthogonal_pilots(std::size_t links, double pilot_power)
    {
        if (links == 0 || !(pilot_power > 0.0))
            throw std::invalid_argument("orthogonal_pilots: need at least one link and positive pilot power");
        const double amp = std::sqrt(pilot_power);
        CMatrix x{Eigen::Index(links), Eigen::Index(links)};
        for (std::size_t i = 0; i < links; ++i)
            for (std::size_t t = 0; t < links; ++t)
                x(Eigen::Index(i), Eigen::Index(t)) =
                    std::polar(amp, -2.0 * std::numbers::pi * double(i * t % links) / double(links));
        return x;
    }

    PilotBlock simulate_uplink_training(const CandidatePool &pool, std::span<const std::size_t> modes,
                                        double noise_power, double pilot_power, std::uint64_t seed)
    {
        if (noise_power < 0.0)
            throw std::invalid_argument("simulate_uplink_training: negative noise power");
        PilotBlock block;
        block.pilot_power = pilot_power;
        block.pilots = orthogonal_pilots(std::size_t(pool.rows()), pilot_power);
        block.modes.assign(modes.begin(), modes.end());

        for (auto nu : modes)
        {
            if (nu >= pool.mode_count())
                throw std::invalid_argument("simulate_uplink_training: mode " + std::to_string(nu) + " out of range");
            CMatrix y = pool[nu].transpose() * block.pilots;
            if (noise_power > 0.0)
            {
                rng_type rng(derive_seed(seed, nu));
                for (Eigen::Index c = 0; c < y.cols(); ++c)
                    for (Eigen::Index r = 0; r < y.rows(); ++r)
                        y(r, c) += complex_gaussian(rng, noise_power);
            }
            block.received.push_back(std::move(y));
        }
        return block;
    }

    std::vector<CMatrix> ls_estimate(const PilotBlock &block)
    {
        const double scale = 1.0 / (double(block.pilots.cols()) * block.pilot_power);
        std::vector<CMatrix> out;
        out.reserve(block.received.size());
        for (const auto &y : block.received)
            out.push_back((scale * y * block.pilots.adjoint()).transpose());
        return out;
    }

    CandidatePool observe_pool(const CandidatePool &pool, double noise_power, double pilot_power, std::uint64_t seed)
    {
        std::vector<std::size_t> all(pool.mode_count());
        for (std::size_t nu = 0; nu < all.size(); ++nu)
            all[nu] = nu;
        return {ls_estimate(simulate_uplink_training(pool, all, noise_power, pilot_power, seed))};
    }

    double noise_ratio(double noise_power, double pilot_power, std::size_t pilot_length)
    {
        return noise_power / (double(pilot_length) * pilot_power);
    }

    // ---------- Correlations and linear estimators ----------

    const char *to_string(CorrelationSource source)
    {
        switch (source)
        {
        case CorrelationSource::empirical:
            return "empirical";
        case CorrelationSource::pattern:
            return "pattern";
        case CorrelationSource::conditional:
            return "conditional";
        }
        return "unknown";
    }

    CorrelationSource correlation_source_from_string(const std::string &name)
    {
        if (name == "empirical")
            return CorrelationSource::empirical;
        if (name == "pattern")
            return CorrelationSource::pattern;
        if (name == "conditional")
            return CorrelationSource::conditional;
        throw std::invalid_argument("unknown correlation source '" + name + "'");
    }

    CorrelationSet make_correlation_set(const CMatrix &full, std::span<const std::size_t> trained,
                                        CorrelationSource source)
    {
        CorrelationSplit s = split_correlations(full, trained);
        return {source, std::move(s.trained), std::move(s.cross), {trained.begin(), trained.end()}, std::move(s.untrained)};
    }

    // (R + q I)^{-1} b; the pseudo-inverse of R when q = 0.
    static CMatrix loaded_solve(const CMatrix &r, double q, const CMatrix &b)
    {
        if (q < 0.0 || !std::isfinite(q))
            throw std::invalid_argument("noise ratio must be finite and non-negative");
        if (q == 0.0)
            return Eigen::CompleteOrthogonalDecomposition<CMatrix>(hermitian_part(r)).solve(b);
        return solve_hermitian_psd(hermitian_part(r) + q * CMatrix::Identity(r.rows(), r.cols()), b);
    }

    CMatrix mmse_estimate(const CMatrix &observations, const CMatrix &r_hh, double q)
    {
        if (r_hh.rows() != r_hh.cols() || r_hh.rows() != observations.rows())
            throw std::invalid_argument("mmse_estimate: correlation is " + std::to_string(r_hh.rows()) + "x" +
                                        std::to_string(r_hh.cols()) + ", observations have " +
                                        std::to_string(observations.rows()) + " rows");
        if (q == 0.0)
            return observations;
        return r_hh * loaded_solve(r_hh, q, observations);
    }

    CMatrix predict_untrained(const CMatrix &observations, const CorrelationSet &corr, double q)
    {
        if (corr.r_hh.rows() != corr.r_hh.cols() || corr.r_hh.rows() != observations.rows() ||
            corr.r_hch.cols() != corr.r_hh.cols())
            throw std::invalid_argument("predict_untrained: correlation blocks do not match the observations");
        if (corr.r_hch.rows() == 0)
            return CMatrix(0, observations.cols());
        return corr.r_hch * loaded_solve(corr.r_hh, q, observations);
    }

    double analytic_mmse_error(const CMatrix &full, std::span<const std::size_t> trained, double q)
    {
        const CorrelationSplit s = split_correlations(full, trained);
        CMatrix cols(full.rows(), Eigen::Index(trained.size()));
        for (std::size_t j = 0; j < trained.size(); ++j)
            cols.col(Eigen::Index(j)) = full.col(Eigen::Index(trained[j]));
        const CMatrix explained = cols * loaded_solve(s.trained, q, cols.adjoint());
        return (full.trace() - explained.trace()).real();
    }

    double UserModeChannel::energy() const
    {
        double e = 0.0;
        for (const auto &m : per_antenna)
            e += m.squaredNorm();
        return e;
    }

    UserModeChannel user_mode_channel(const CandidatePool &pool, std::size_t user, const SystemConfig &cfg,
                                      double los_azimuth_deg)
    {
        if (user >= cfg.users || std::size_t(pool.rows()) != cfg.total_rx())
            throw std::invalid_argument("user_mode_channel: user or pool shape does not match the configuration");
        UserModeChannel u;
        u.los_azimuth_deg = los_azimuth_deg;
        const auto L = Eigen::Index(pool.mode_count());
        const auto n_r = Eigen::Index(cfg.n_rx);
        u.per_antenna.assign(std::size_t(pool.cols()), CMatrix(L, n_r));
        for (Eigen::Index nu = 0; nu < L; ++nu)
        {
            const CMatrix &h = pool[std::size_t(nu)];
            for (Eigen::Index n = 0; n < h.cols(); ++n)
                for (Eigen::Index r = 0; r < n_r; ++r)
                    u.per_antenna[std::size_t(n)](nu, r) = h(Eigen::Index(user) * n_r + r, n);
        }
        return u;
    }

    void store_user_mode_channel(CandidatePool &pool, std::size_t user, const SystemConfig &cfg,
                                 const UserModeChannel &channel)
    {
        if (user >= cfg.users || std::size_t(pool.rows()) != cfg.total_rx() ||
            channel.antennas() != std::size_t(pool.cols()) || channel.mode_count() != pool.mode_count())
            throw std::invalid_argument("store_user_mode_channel: shapes do not match");
        const auto n_r = Eigen::Index(cfg.n_rx);
        for (std::size_t nu = 0; nu < pool.mode_count(); ++nu)
            for (std::size_t n = 0; n < channel.antennas(); ++n)
                for (Eigen::Index r = 0; r < n_r; ++r)
                    pool.modes[nu](Eigen::Index(user) * n_r + r, Eigen::Index(n)) = channel.per_antenna[n](Eigen::Index(nu), r);
    }

    static CMatrix project_psd(const CMatrix &a)
    {
        const HermitianEig eig = hermitian_eig(hermitian_part(a));
        const RVector clipped = eig.eigenvalues.cwiseMax(0.0);
        return hermitian_part(eig.eigenvectors * clipped.cast<cdouble>().asDiagonal() * eig.eigenvectors.adjoint());
    }

    ModeCorrelation calibrate_channel_correlation(std::span<const UserModeChannel> ensemble)
    {
        if (ensemble.size() < min_calibration_samples)
            throw std::invalid_argument("calibrate_channel_correlation: " + std::to_string(ensemble.size()) +
                                        " samples, at least " + std::to_string(min_calibration_samples) +
                                        " required; enlarge the calibration ensemble");
        const std::size_t antennas = ensemble.front().antennas();
        const auto L = Eigen::Index(ensemble.front().mode_count());
        const auto links = ensemble.front().per_antenna.front().cols();

        ModeCorrelation c;
        c.source = CorrelationSource::empirical;
        c.per_antenna.assign(antennas, CMatrix::Zero(L, L));
        for (const auto &u : ensemble)
        {
            if (u.antennas() != antennas || Eigen::Index(u.mode_count()) != L)
                throw std::invalid_argument("calibrate_channel_correlation: samples have different shapes");
            for (std::size_t n = 0; n < antennas; ++n)
                c.per_antenna[n].noalias() += u.per_antenna[n] * u.per_antenna[n].adjoint();
        }
        const double norm = 1.0 / (double(ensemble.size()) * double(links));
        for (auto &r : c.per_antenna)
            r = project_psd(norm * r);
        return c;
    }

    ModeCorrelation pattern_mode_correlation(const PatternSet &patterns)
    {
        return {CorrelationSource::pattern, {pattern_correlation(patterns)}};
    }

    ModeCorrelation conditional_channel_correlation(const UserPaths &paths, const PatternSet &patterns)
    {
        const std::size_t L = patterns.mode_count();
        const double scale = 1.0 / patterns.coverage_mean_gain;
        CMatrix r = CMatrix::Zero(Eigen::Index(L), Eigen::Index(L));
        Eigen::VectorXd amp{Eigen::Index(L)};
        for (const auto &p : paths.paths)
        {
            for (std::size_t nu = 0; nu < L; ++nu)
                amp[Eigen::Index(nu)] = std::sqrt(patterns.gain(nu, p.azimuth_deg, p.elevation_deg) * scale);
            r += (p.power * amp * amp.transpose()).cast<cdouble>();
        }
        return {CorrelationSource::conditional, {r}};
    }

    MseBreakdown &MseBreakdown::operator+=(const MseBreakdown &o)
    {
        trained_error += o.trained_error;
        predicted_error += o.predicted_error;
        energy += o.energy;
        return *this;
    }

    static double checked_ratio(double num, double energy)
    {
        if (!(energy > 0.0))
            throw std::invalid_argument("normalized MSE of a zero channel is undefined");
        return num / energy;
    }

    double MseBreakdown::combined() const { return checked_ratio(trained_error + predicted_error, energy); }
    double MseBreakdown::trained() const { return checked_ratio(trained_error, energy); }
    double MseBreakdown::predicted() const { return checked_ratio(predicted_error, energy); }

    ModeEstimator::ModeEstimator(const ModeCorrelation &corr, std::vector<std::size_t> trained, double q)
        : trained_(std::move(trained))
    {
        const std::size_t L = corr.mode_count();
        if (L == 0 || trained_.empty())
            throw std::invalid_argument("ModeEstimator: empty correlation or training set");
        is_trained_.assign(L, false);
        for (auto m : trained_)
            if (m < L)
                is_trained_[m] = true;

        const auto F = Eigen::Index(trained_.size());
        const CMatrix unit = CMatrix::Identity(F, F);
        for (const auto &full : corr.per_antenna)
        {
            // Filter matrix = the estimator applied to the identity observation.
            const CorrelationSet set = make_correlation_set(full, trained_, corr.source);
            const CMatrix est = mmse_estimate(unit, set.r_hh, q);
            const CMatrix pred = predict_untrained(unit, set, q);
            CMatrix g(Eigen::Index(L), F);
            for (Eigen::Index i = 0; i < F; ++i)
                g.row(Eigen::Index(set.trained[std::size_t(i)])) = est.row(i);
            for (Eigen::Index i = 0; i < pred.rows(); ++i)
                g.row(Eigen::Index(set.untrained[std::size_t(i)])) = pred.row(i);
            filters_.push_back(std::move(g));
        }
    }

    UserModeChannel ModeEstimator::reconstruct(const UserModeChannel &observed) const
    {
        if (observed.mode_count() != is_trained_.size())
            throw std::invalid_argument("ModeEstimator: observation mode count does not match the correlation");
        if (filters_.size() != 1 && filters_.size() != observed.antennas())
            throw std::invalid_argument("ModeEstimator: correlation antenna count does not match the observation");

        UserModeChannel out;
        out.los_azimuth_deg = observed.los_azimuth_deg;
        out.per_antenna.reserve(observed.antennas());
        const auto F = Eigen::Index(trained_.size());
        for (std::size_t n = 0; n < observed.antennas(); ++n)
        {
            const CMatrix &obs = observed.per_antenna[n];
            CMatrix picked(F, obs.cols());
            for (Eigen::Index i = 0; i < F; ++i)
                picked.row(i) = obs.row(Eigen::Index(trained_[std::size_t(i)]));
            out.per_antenna.push_back(filters_[filters_.size() == 1 ? 0 : n] * picked);
        }
        return out;
    }

    MseBreakdown ModeEstimator::error(const UserModeChannel &truth, const UserModeChannel &observed) const
    {
        const UserModeChannel est = reconstruct(observed);
        if (truth.antennas() != est.antennas() || truth.mode_count() != est.mode_count())
            throw std::invalid_argument("ModeEstimator::error: truth and observation shapes differ");
        MseBreakdown b;
        for (std::size_t n = 0; n < truth.antennas(); ++n)
        {
            const CMatrix diff = truth.per_antenna[n] - est.per_antenna[n];
            for (Eigen::Index m = 0; m < diff.rows(); ++m)
                (is_trained_[std::size_t(m)] ? b.trained_error : b.predicted_error) += diff.row(m).squaredNorm();
        }
        b.energy = truth.energy();
        return b;
    }

    double estimation_mse(const CMatrix &estimate, const CMatrix &truth)
    {
        if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
            throw std::invalid_argument("estimation_mse: estimate and truth shapes differ");
        return checked_ratio((truth - estimate).squaredNorm(), truth.squaredNorm());
    }

    double estimation_mse(const UserModeChannel &estimate, const UserModeChannel &truth)
    {
        if (estimate.antennas() != truth.antennas())
            throw std::invalid_argument("estimation_mse: estimate and truth shapes differ");
        double err = 0.0;
        for (std::size_t n = 0; n < truth.antennas(); ++n)
        {
            if (estimate.per_antenna[n].rows() != truth.per_antenna[n].rows() ||
                estimate.per_antenna[n].cols() != truth.per_antenna[n].cols())
                throw std::invalid_argument("estimation_mse: estimate and truth shapes differ");
            err += (truth.per_antenna[n] - estimate.per_antenna[n]).squaredNorm();
        }
        return checked_ratio(err, truth.energy());
    }

    // ---------- Training-subset selection ----------

    std::uint64_t binomial(std::size_t n, std::size_t k)
    {
        if (k > n)
            return 0;
        k = std::min(k, n - k);
        std::uint64_t c = 1;
        for (std::size_t i = 1; i <= k; ++i)
        {
            const std::uint64_t num = n - k + i;
            if (c > std::numeric_limits<std::uint64_t>::max() / num)
                return std::numeric_limits<std::uint64_t>::max();
            c = c * num / i; // exact: c * num is divisible by i at every step
        }
        return c;
    }

    SubsetSelection select_training_subset(std::size_t modes, std::size_t training, const SubsetCost &cost,
                                           std::uint64_t budget)
    {
        if (training < 1 || training > modes)
            throw std::invalid_argument("select_training_subset: need 1 <= F <= L, got F=" + std::to_string(training) +
                                        ", L=" + std::to_string(modes));
        const std::uint64_t count = binomial(modes, training);
        if (count > budget)
            throw subset_budget_error("select_training_subset: C(" + std::to_string(modes) + "," +
                                      std::to_string(training) + ") subsets exceed the budget of " +
                                      std::to_string(budget) + "; use the offline sectorized selection");

        std::vector<std::size_t> subset(training);
        for (std::size_t i = 0; i < training; ++i)
            subset[i] = i;

        SubsetSelection best{subset, std::numeric_limits<double>::infinity(), 0};
        while (true)
        {
            const double c = cost(subset);
            ++best.evaluated;
            if (c < best.cost)
            {
                best.cost = c;
                best.modes = subset;
            }
            // Next combination in lexicographic order.
            std::size_t i = training;
            while (i > 0 && subset[i - 1] == modes - training + (i - 1))
                --i;
            if (i == 0)
                break;
            ++subset[i - 1];
            for (std::size_t j = i; j < training; ++j)
                subset[j] = subset[j - 1] + 1;
        }
        return best;
    }

    MseBreakdown ensemble_error(std::span<const TrainingSample> samples, const ModeCorrelation &corr,
                                std::span<const std::size_t> trained, double q)
    {
        const ModeEstimator est(corr, {trained.begin(), trained.end()}, q);
        MseBreakdown total;
        for (const auto &s : samples)
            total += est.error(s.truth, s.observed);
        return total;
    }

    EnsembleMoments ensemble_moments(std::span<const TrainingSample> samples)
    {
        if (samples.empty())
            throw std::invalid_argument("ensemble_moments: empty ensemble");
        const std::size_t antennas = samples.front().truth.antennas();
        const auto L = Eigen::Index(samples.front().truth.mode_count());
        EnsembleMoments m;
        m.truth_truth.assign(antennas, CMatrix::Zero(L, L));
        m.obs_truth.assign(antennas, CMatrix::Zero(L, L));
        m.obs_obs.assign(antennas, CMatrix::Zero(L, L));
        for (const auto &s : samples)
        {
            if (s.truth.antennas() != antennas || s.observed.antennas() != antennas ||
                Eigen::Index(s.truth.mode_count()) != L || Eigen::Index(s.observed.mode_count()) != L)
                throw std::invalid_argument("ensemble_moments: samples have different shapes");
            for (std::size_t n = 0; n < antennas; ++n)
            {
                const CMatrix &h = s.truth.per_antenna[n];
                const CMatrix &o = s.observed.per_antenna[n];
                m.truth_truth[n].noalias() += h * h.adjoint();
                m.obs_truth[n].noalias() += o * h.adjoint();
                m.obs_obs[n].noalias() += o * o.adjoint();
            }
            m.energy += s.truth.energy();
        }
        return m;
    }

    MseBreakdown ensemble_error(const EnsembleMoments &moments, const ModeEstimator &estimator)
    {
        const auto &trained = estimator.trained();
        const auto F = Eigen::Index(trained.size());
        MseBreakdown b;
        b.energy = moments.energy;
        std::vector<bool> is_trained(std::size_t(moments.truth_truth.front().rows()), false);
        for (auto m : trained)
            is_trained[m] = true;

        for (std::size_t n = 0; n < moments.truth_truth.size(); ++n)
        {
            const CMatrix &g = estimator.filter(n);
            const auto L = moments.truth_truth[n].rows();
            CMatrix cross(F, L), auto_obs(F, F);
            for (Eigen::Index i = 0; i < F; ++i)
            {
                const auto ti = Eigen::Index(trained[std::size_t(i)]);
                cross.row(i) = moments.obs_truth[n].row(ti);
                for (Eigen::Index j = 0; j < F; ++j)
                    auto_obs(i, j) = moments.obs_obs[n](ti, Eigen::Index(trained[std::size_t(j)]));
            }
            // diag of sum (h - G o)(h - G o)^H
            const CMatrix gc = g * cross;
            const CMatrix gog = g * auto_obs * g.adjoint();
            for (Eigen::Index m = 0; m < L; ++m)
            {
                const double e = moments.truth_truth[n](m, m).real() - 2.0 * gc(m, m).real() + gog(m, m).real();
                (is_trained[std::size_t(m)] ? b.trained_error : b.predicted_error) += e;
            }
        }
        return b;
    }

    SubsetSelection select_training_modes_exhaustive(std::size_t training, std::span<const TrainingSample> ensemble,
                                                     const ModeCorrelation &corr, double q, std::uint64_t budget)
    {
        if (ensemble.empty())
            throw std::invalid_argument("select_training_modes_exhaustive: empty calibration ensemble");
        const EnsembleMoments moments = ensemble_moments(ensemble);
        return select_training_subset(
            corr.mode_count(), training,
            [&](std::span<const std::size_t> subset)
            { return ensemble_error(moments, ModeEstimator(corr, {subset.begin(), subset.end()}, q)).combined(); },
            budget);
    }

    std::size_t TrainingPlan::sector_index(double azimuth_deg) const
    {
        if (sectors.empty())
            throw std::logic_error("TrainingPlan: no sectors");
        for (std::size_t i = 0; i + 1 < sectors.size(); ++i)
            if (azimuth_deg < sectors[i].azimuth_max_deg)
                return i;
        return sectors.size() - 1;
    }

    void TrainingPlan::validate() const
    {
        auto fail = [](const std::string &msg) { throw std::invalid_argument("TrainingPlan: " + msg); };
        if (mode_count < 1)
            fail("mode count must be positive");
        if (training_count < 1 || training_count > mode_count)
            fail("training count must be within 1..L");
        if (sectors.empty())
            fail("at least one sector required");
        for (std::size_t i = 0; i < sectors.size(); ++i)
        {
            const auto &s = sectors[i];
            if (!(s.azimuth_max_deg > s.azimuth_min_deg))
                fail("sector " + std::to_string(i) + " has an empty azimuth range");
            if (i > 0 && s.azimuth_min_deg != sectors[i - 1].azimuth_max_deg)
                fail("sectors must be contiguous");
            if (s.modes.size() != training_count)
                fail("sector " + std::to_string(i) + " lists " + std::to_string(s.modes.size()) + " modes, expected " +
                     std::to_string(training_count));
            std::vector<bool> seen(mode_count, false);
            for (auto m : s.modes)
            {
                if (m >= mode_count)
                    fail("mode " + std::to_string(m) + " out of range");
                if (seen[m])
                    fail("duplicate mode " + std::to_string(m));
                seen[m] = true;
            }
        }
    }

    void write_training_plan(std::ostream &os, const TrainingPlan &plan)
    {
        plan.validate();
        os << "training_plan v1\n"
           << "modes " << plan.mode_count << "\n"
           << "training " << plan.training_count << "\n"
           << "source " << to_string(plan.source) << "\n"
           << "sectors " << plan.sectors.size() << "\n";
        char buf[64];
        for (const auto &s : plan.sectors)
        {
            std::snprintf(buf, sizeof(buf), "sector %.17g %.17g", s.azimuth_min_deg, s.azimuth_max_deg);
            os << buf;
            for (auto m : s.modes)
                os << ' ' << m;
            os << '\n';
        }
    }

    TrainingPlan read_training_plan(std::istream &is)
    {
        auto fail = [](const std::string &msg) { throw std::invalid_argument("read_training_plan: " + msg); };
        TrainingPlan plan;
        std::string line;
        if (!std::getline(is, line) || line != "training_plan v1")
            fail("missing 'training_plan v1' header");

        std::size_t declared = 0;
        bool have_modes = false, have_training = false, have_sectors = false;
        while (std::getline(is, line))
        {
            if (line.empty() || line[0] == '#')
                continue;
            std::istringstream ls(line);
            std::string key;
            ls >> key;
            if (key == "modes")
                have_modes = bool(ls >> plan.mode_count);
            else if (key == "training")
                have_training = bool(ls >> plan.training_count);
            else if (key == "source")
            {
                std::string name;
                ls >> name;
                plan.source = correlation_source_from_string(name);
            }
            else if (key == "sectors")
                have_sectors = bool(ls >> declared);
            else if (key == "sector")
            {
                TrainingSector s;
                if (!(ls >> s.azimuth_min_deg >> s.azimuth_max_deg))
                    fail("malformed sector line '" + line + "'");
                std::size_t m;
                while (ls >> m)
                    s.modes.push_back(m);
                if (!ls.eof())
                    fail("malformed mode list in '" + line + "'");
                plan.sectors.push_back(std::move(s));
                continue;
            }
            else
                fail("unknown key '" + key + "'");
            std::string rest;
            if (ls.fail() || (ls >> rest))
                fail("malformed line '" + line + "'");
        }
        if (!have_modes || !have_training || !have_sectors)
            fail("modes, training and sectors must all be given");
        if (declared != plan.sectors.size())
            fail("declared " + std::to_string(declared) + " sectors, found " + std::to_string(plan.sectors.size()));
        plan.validate();
        return plan;
    }

    OfflineSelection select_training_modes_offline(std::size_t training, std::size_t sectors,
                                                   std::span<const TrainingSample> calibration,
                                                   CorrelationSource source, const PatternSet *patterns, double q,
                                                   double coverage_min_deg, double coverage_max_deg,
                                                   std::uint64_t budget)
    {
        if (sectors < 1)
            throw std::invalid_argument("select_training_modes_offline: at least one sector required");
        if (!(coverage_max_deg > coverage_min_deg))
            throw std::invalid_argument("select_training_modes_offline: empty coverage range");
        if (source == CorrelationSource::conditional)
            throw std::invalid_argument("select_training_modes_offline: conditional correlation needs per-user geometry");
        if (source == CorrelationSource::pattern && patterns == nullptr)
            throw std::invalid_argument("select_training_modes_offline: pattern source requires a pattern set");
        if (calibration.empty())
            throw std::invalid_argument("select_training_modes_offline: empty calibration ensemble");

        OfflineSelection out;
        out.plan.mode_count = calibration.front().truth.mode_count();
        out.plan.training_count = training;
        out.plan.source = source;
        const double width = (coverage_max_deg - coverage_min_deg) / double(sectors);
        for (std::size_t i = 0; i < sectors; ++i)
        {
            TrainingSector s;
            s.azimuth_min_deg = coverage_min_deg + width * double(i);
            s.azimuth_max_deg = i + 1 == sectors ? coverage_max_deg : coverage_min_deg + width * double(i + 1);
            out.plan.sectors.push_back(s);
        }

        std::vector<std::vector<TrainingSample>> buckets(sectors);
        for (const auto &s : calibration)
            buckets[out.plan.sector_index(s.truth.los_azimuth_deg)].push_back(s);

        for (std::size_t i = 0; i < sectors; ++i)
        {
            const auto &bucket = buckets[i];
            if (bucket.size() < min_calibration_samples)
                throw std::invalid_argument("select_training_modes_offline: sector " + std::to_string(i) + " has " +
                                            std::to_string(bucket.size()) + " calibration samples, at least " +
                                            std::to_string(min_calibration_samples) +
                                            " required; enlarge the calibration ensemble");
            ModeCorrelation corr;
            if (source == CorrelationSource::pattern)
                corr = pattern_mode_correlation(*patterns);
            else
            {
                std::vector<UserModeChannel> truths;
                truths.reserve(bucket.size());
                for (const auto &s : bucket)
                    truths.push_back(s.truth);
                corr = calibrate_channel_correlation(truths);
            }
            const SubsetSelection sel = select_training_modes_exhaustive(training, bucket, corr, q, budget);
            out.plan.sectors[i].modes = sel.modes;
            out.correlations.push_back(std::move(corr));
            out.sector_mse.push_back(sel.cost);
        }
        out.plan.validate();
        return out;
    }
}
