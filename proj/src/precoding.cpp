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

#include "ramimo/precoding.hpp"

#include <algorithm>
#include <cmath>

namespace ramimo
{
    infeasible_precoder_error::infeasible_precoder_error(std::size_t user, std::size_t null_dim, std::size_t required)
        : std::runtime_error("bd_precoder: user " + std::to_string(user) + " has a " + std::to_string(null_dim) +
                             "-dimensional interference null space, " + std::to_string(required) + " streams required"),
          user_(user)
    {
    }

    CMatrix fixed_rf_precoder(const SystemConfig &cfg)
    {
        if (cfg.n_rf == 0 || cfg.n_tx % cfg.n_rf != 0)
            throw std::invalid_argument("fixed_rf_precoder: " + std::to_string(cfg.n_rf) +
                                        " RF chains do not divide " + std::to_string(cfg.n_tx) + " antennas");
        const std::size_t group = cfg.n_tx / cfg.n_rf;
        const double w = 1.0 / std::sqrt(double(group));
        CMatrix rf = CMatrix::Zero(Eigen::Index(cfg.n_tx), Eigen::Index(cfg.n_rf));
        for (std::size_t j = 0; j < cfg.n_rf; ++j)
            for (std::size_t i = 0; i < group; ++i)
                rf(Eigen::Index(j * group + i), Eigen::Index(j)) = w;
        return rf;
    }

    static void check_shapes(const CMatrix &h, const CMatrix &rf, const SystemConfig &cfg, const char *op)
    {
        if (std::size_t(h.rows()) != cfg.total_rx() || h.cols() != rf.rows() || std::size_t(rf.cols()) != cfg.n_rf)
            throw std::invalid_argument(std::string(op) + ": channel/analog precoder shapes do not match the configuration");
        if (cfg.total_streams() > cfg.n_rf)
            throw std::invalid_argument(std::string(op) + ": more streams than RF chains");
    }

    // Effective channels H_k F_RF of the other users, stacked.
    static CMatrix others_stacked(const CMatrix &heff, std::size_t k, const SystemConfig &cfg)
    {
        const auto n_r = Eigen::Index(cfg.n_rx);
        CMatrix stacked(Eigen::Index((cfg.users - 1) * cfg.n_rx), heff.cols());
        Eigen::Index row = 0;
        for (std::size_t j = 0; j < cfg.users; ++j)
        {
            if (j == k)
                continue;
            stacked.middleRows(row, n_r) = heff.middleRows(Eigen::Index(j * cfg.n_rx), n_r);
            row += n_r;
        }
        return stacked;
    }

    // Second stage: the top-n_s right singular directions of the user's channel seen through `basis`.
    static CMatrix strongest_directions(const CMatrix &heff_k, const CMatrix &basis, std::size_t n_s)
    {
        const Svd d = svd(heff_k * basis);
        return basis * d.v.leftCols(Eigen::Index(n_s));
    }

    PrecoderPair bd_precoder(const CMatrix &h, const CMatrix &rf, const SystemConfig &cfg)
    {
        check_shapes(h, rf, cfg, "bd_precoder");
        const CMatrix heff = h * rf;
        const std::size_t n_s = cfg.streams_per_user;

        PrecoderPair pre{rf, CMatrix(rf.cols(), Eigen::Index(cfg.total_streams())), n_s};
        for (std::size_t k = 0; k < cfg.users; ++k)
        {
            const CMatrix basis = null_space(others_stacked(heff, k, cfg));
            if (std::size_t(basis.cols()) < n_s)
                throw infeasible_precoder_error(k, std::size_t(basis.cols()), n_s);
            const CMatrix heff_k = heff.middleRows(Eigen::Index(k * cfg.n_rx), Eigen::Index(cfg.n_rx));
            pre.bb.middleCols(Eigen::Index(k * n_s), Eigen::Index(n_s)) = strongest_directions(heff_k, basis, n_s);
        }
        return normalize_power(pre, cfg);
    }

    PrecoderPair rbd_precoder(const CMatrix &h, const CMatrix &rf, double noise_power, const SystemConfig &cfg)
    {
        check_shapes(h, rf, cfg, "rbd_precoder");
        if (!(noise_power > 0.0) || !std::isfinite(noise_power))
            throw std::invalid_argument("rbd_precoder: noise power must be positive and finite");

        const CMatrix heff = h * rf;
        const std::size_t n_s = cfg.streams_per_user;
        const double alpha = double(cfg.total_streams()) * noise_power;
        const Eigen::Index n_rf = rf.cols();

        PrecoderPair pre{rf, CMatrix(n_rf, Eigen::Index(cfg.total_streams())), n_s};
        for (std::size_t k = 0; k < cfg.users; ++k)
        {
            const Svd d = svd(others_stacked(heff, k, cfg));
            RVector loading = RVector::Constant(n_rf, 1.0 / std::sqrt(alpha));
            for (Eigen::Index i = 0; i < d.singular_values.size(); ++i)
                loading[i] = 1.0 / std::sqrt(d.singular_values[i] * d.singular_values[i] + alpha);
            const CMatrix first_stage = d.v * loading.cast<cdouble>().asDiagonal();

            const CMatrix heff_k = heff.middleRows(Eigen::Index(k * cfg.n_rx), Eigen::Index(cfg.n_rx));
            pre.bb.middleCols(Eigen::Index(k * n_s), Eigen::Index(n_s)) = strongest_directions(heff_k, first_stage, n_s);
        }
        return normalize_power(pre, cfg);
    }

    PrecoderPair normalize_power(const PrecoderPair &pre, const SystemConfig &cfg)
    {
        const double power = (pre.rf * pre.bb).squaredNorm();
        if (!(power > 0.0) || !std::isfinite(power))
            throw std::invalid_argument("normalize_power: digital precoder is zero or non-finite");
        PrecoderPair out = pre;
        out.bb *= std::sqrt(double(cfg.total_streams()) / power);
        return out;
    }

    double sum_rate(const CMatrix &h, const PrecoderPair &pre, double rho, double noise_power, const SystemConfig &cfg)
    {
        if (!(noise_power > 0.0))
            throw std::invalid_argument("sum_rate: noise power must be positive");
        if (std::size_t(h.rows()) != cfg.total_rx() || h.cols() != pre.rf.rows())
            throw std::invalid_argument("sum_rate: channel shape does not match the precoder/configuration");

        const double scale = rho / double(cfg.total_streams());
        const auto n_r = Eigen::Index(cfg.n_rx);
        const CMatrix heff = h * pre.rf;

        double rate = 0.0;
        for (std::size_t k = 0; k < cfg.users; ++k)
        {
            const CMatrix hk = heff.middleRows(Eigen::Index(k * cfg.n_rx), n_r);
            CMatrix signal = CMatrix::Zero(n_r, n_r);
            CMatrix cov = noise_power * CMatrix::Identity(n_r, n_r);
            for (std::size_t j = 0; j < cfg.users; ++j)
            {
                const CMatrix g = hk * pre.user_block(j);
                if (j == k)
                    signal = scale * g * g.adjoint();
                else
                    cov += scale * g * g.adjoint();
            }

            // det(I + C^{-1} S) = det(I + L^{-1} S L^{-H}) with C = L L^H.
            Eigen::LLT<CMatrix> llt(hermitian_part(cov));
            const CMatrix lower = llt.matrixL();
            const CMatrix half = lower.triangularView<Eigen::Lower>().solve(signal);
            const CMatrix whitened = lower.triangularView<Eigen::Lower>().solve(half.adjoint()).adjoint();
            rate += log2_det_psd(CMatrix::Identity(n_r, n_r) + hermitian_part(whitened));
        }
        return rate;
    }

    double interference_leakage(const CMatrix &h, const PrecoderPair &pre, const SystemConfig &cfg)
    {
        const CMatrix heff = h * pre.rf;
        const auto n_r = Eigen::Index(cfg.n_rx);
        double worst = 0.0;
        for (std::size_t j = 0; j < cfg.users; ++j)
        {
            const CMatrix hj = heff.middleRows(Eigen::Index(j * cfg.n_rx), n_r);
            for (std::size_t k = 0; k < cfg.users; ++k)
            {
                if (j == k)
                    continue;
                const CMatrix fk = pre.user_block(k);
                const double denom = hj.norm() * fk.norm();
                if (denom > 0.0)
                    worst = std::max(worst, (hj * fk).norm() / denom);
            }
        }
        return worst;
    }
}
