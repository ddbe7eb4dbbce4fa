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

#ifndef RAMIMO_NUMERICS_H
#define RAMIMO_NUMERICS_H

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

// Dense complex linear algebra used by every other module. All matrices in this
// library are small (at most ~32x32), so the decompositions are plain dense
// routines; the Eigen backend can be swapped as long as the contracts below hold.

namespace ramimo
{
    using cdouble = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RVector = Eigen::VectorXd;

    // Raised when an input breaks an operation's precondition (shape, symmetry, finiteness).
    class contract_error : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Raised when a linear system cannot be solved to working precision.
    class singular_matrix_error : public std::runtime_error
    {
    public:
        singular_matrix_error(const std::string &what, double condition_estimate);
        double condition_estimate() const noexcept { return condition_estimate_; }

    private:
        double condition_estimate_;
    };

    struct HermitianEig
    {
        RVector eigenvalues;  // ascending
        CMatrix eigenvectors; // columns, unitary
    };

    struct Svd
    {
        CMatrix u;               // rows x rows, unitary
        RVector singular_values; // min(rows, cols), descending, non-negative
        CMatrix v;               // cols x cols, unitary
    };

    // Relative tolerance used to decide whether a matrix is Hermitian.
    inline constexpr double hermitian_tolerance = 1e-10;

    // Singular values at or below this fraction of the largest one are treated as zero.
    inline constexpr double null_space_tolerance = 1e-10;

    bool all_finite(const CMatrix &a);

    bool is_hermitian(const CMatrix &a, double rel_tol = hermitian_tolerance);

    HermitianEig hermitian_eig(const CMatrix &a);

    // Full SVD. A matrix with zero rows or columns is accepted and yields identity factors.
    Svd svd(const CMatrix &a);

    // Number of singular values above rel_tol * s_max.
    Eigen::Index numerical_rank(const RVector &singular_values, double rel_tol = null_space_tolerance);

    // Orthonormal basis (as columns) of the right null space of a.
    CMatrix null_space(const CMatrix &a, double rel_tol = null_space_tolerance);

    // Solves a x = b for Hermitian positive definite a (callers add their own diagonal loading).
    CMatrix solve_hermitian_psd(const CMatrix &a, const CMatrix &b);

    // log2 det(a) for a = I + PSD. Never negative.
    double log2_det_psd(const CMatrix &a);

    // Hermitian part (a + a^H) / 2, used to remove rounding asymmetry before eigen-solves.
    CMatrix hermitian_part(const CMatrix &a);
}

#endif
