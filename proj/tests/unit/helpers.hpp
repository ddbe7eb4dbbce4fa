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

#ifndef RAMIMO_TEST_HELPERS_H
#define RAMIMO_TEST_HELPERS_H

#include "ramimo/channel.hpp"
#include "ramimo/numerics.hpp"
#include "ramimo/random.hpp"

namespace ramimo::test
{
    inline CMatrix gaussian_matrix(rng_type &rng, Eigen::Index rows, Eigen::Index cols)
    {
        CMatrix a(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
                a(i, j) = complex_gaussian(rng, 1.0);
        return a;
    }

    inline CandidatePool gaussian_pool(rng_type &rng, std::size_t modes, Eigen::Index rows, Eigen::Index cols)
    {
        CandidatePool pool;
        for (std::size_t m = 0; m < modes; ++m)
            pool.modes.push_back(gaussian_matrix(rng, rows, cols));
        return pool;
    }

    // Hermitian PSD matrix with the given eigenvalues and a random eigenbasis.
    inline CMatrix psd_with_spectrum(rng_type &rng, const RVector &eigenvalues)
    {
        const auto n = eigenvalues.size();
        Eigen::HouseholderQR<CMatrix> qr(gaussian_matrix(rng, n, n));
        const CMatrix q = qr.householderQ();
        return hermitian_part(q * eigenvalues.cast<cdouble>().asDiagonal() * q.adjoint());
    }
}

#endif
