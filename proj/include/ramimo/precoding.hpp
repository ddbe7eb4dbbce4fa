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

#ifndef RAMIMO_PRECODING_H
#define RAMIMO_PRECODING_H

#include <cstddef>
#include <stdexcept>
#include <string>

#include "ramimo/channel.hpp"
#include "ramimo/numerics.hpp"

namespace ramimo
{
    // Hybrid precoder: fixed analog part rf (N_T x N_RF) and digital part bb (N_RF x N_s),
    // whose column block k (n_s columns) is F_BB,k.
    struct PrecoderPair
    {
        CMatrix rf;
        CMatrix bb;
        std::size_t streams_per_user = 0;

        std::size_t users() const { return streams_per_user == 0 ? 0 : std::size_t(bb.cols()) / streams_per_user; }
        CMatrix user_block(std::size_t k) const
        {
            return bb.middleCols(Eigen::Index(k * streams_per_user), Eigen::Index(streams_per_user));
        }
    };

    // Block diagonalization has no zero-interference solution for this user.
    class infeasible_precoder_error : public std::runtime_error
    {
    public:
        infeasible_precoder_error(std::size_t user, std::size_t null_dim, std::size_t required);
        std::size_t user() const noexcept { return user_; }

    private:
        std::size_t user_;
    };

    // Block connection: RF chain j drives antennas j*N_T/N_RF .. (j+1)*N_T/N_RF - 1 with
    // equal real weights 1/sqrt(N_T/N_RF). Throws std::invalid_argument if N_RF does not divide N_T.
    CMatrix fixed_rf_precoder(const SystemConfig &cfg);

    PrecoderPair bd_precoder(const CMatrix &h, const CMatrix &rf, const SystemConfig &cfg);

    // Regularized BD with first-stage loading alpha = N_s * noise_power.
    PrecoderPair rbd_precoder(const CMatrix &h, const CMatrix &rf, double noise_power, const SystemConfig &cfg);

    // One global scalar on bb so that ||rf * bb||_F^2 = N_s. Throws std::invalid_argument if bb = 0.
    PrecoderPair normalize_power(const PrecoderPair &pre, const SystemConfig &cfg);

    // Sum of per-user log2 det(I + (rho/N_s) C_k^{-1} S_k), treating other users as noise
    // (C_k includes their power at the same rho/N_s scaling plus noise_power * I).
    double sum_rate(const CMatrix &h, const PrecoderPair &pre, double rho, double noise_power, const SystemConfig &cfg);

    // Largest ||H_j F_RF F_BB,k||_F / (||H_j F_RF||_F ||F_BB,k||_F) over user pairs j != k.
    double interference_leakage(const CMatrix &h, const PrecoderPair &pre, const SystemConfig &cfg);
}

#endif
