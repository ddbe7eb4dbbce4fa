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

#include "ramimo/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ramimo
{
    singular_matrix_error::singular_matrix_error(const std::string &what, double condition_estimate)
        : std::runtime_error(what + " (condition estimate " + std::to_string(condition_estimate) + ")"),
          condition_estimate_(condition_estimate)
    {
    }

    bool all_finite(const CMatrix &a)
    {
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index i = 0; i < a.rows(); ++i)
                if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag()))
                    return false;
        return true;
    }

    bool is_hermitian(const CMatrix &a, double rel_tol)
    {
        if (a.rows() != a.cols())
            return false;
        const double scale = a.norm();
        if (scale == 0.0)
            return true;
        return (a - a.adjoint()).norm() <= rel_tol * scale;
    }

    CMatrix hermitian_part(const CMatrix &a)
    {
        return 0.5 * (a + a.adjoint());
    }

    static void require_square_hermitian(const CMatrix &a, const char *op)
    {
        if (a.rows() != a.cols())
            throw contract_error(std::string(op) + ": matrix must be square, got " +
                                 std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
        if (!all_finite(a))
            throw contract_error(std::string(op) + ": matrix has non-finite entries");
        if (!is_hermitian(a))
            throw contract_error(std::string(op) + ": matrix is not Hermitian");
    }

    HermitianEig hermitian_eig(const CMatrix &a)
    {
        require_square_hermitian(a, "hermitian_eig");
        if (a.rows() == 0)
            return {RVector(0), CMatrix(0, 0)};

        Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(a));
        if (solver.info() != Eigen::Success)
            throw contract_error("hermitian_eig: eigen-decomposition did not converge");
        return {solver.eigenvalues(), solver.eigenvectors()};
    }

    Svd svd(const CMatrix &a)
    {
        if (!all_finite(a))
            throw contract_error("svd: matrix has non-finite entries");

        const Eigen::Index m = a.rows(), n = a.cols();
        if (m == 0 || n == 0)
            return {CMatrix::Identity(m, m), RVector(0), CMatrix::Identity(n, n)};

        Eigen::JacobiSVD<CMatrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
        return {solver.matrixU(), solver.singularValues(), solver.matrixV()};
    }

    Eigen::Index numerical_rank(const RVector &singular_values, double rel_tol)
    {
        if (singular_values.size() == 0)
            return 0;
        const double s_max = singular_values.maxCoeff();
        if (s_max <= 0.0)
            return 0;
        Eigen::Index rank = 0;
        for (Eigen::Index i = 0; i < singular_values.size(); ++i)
            if (singular_values[i] > rel_tol * s_max)
                ++rank;
        return rank;
    }

    CMatrix null_space(const CMatrix &a, double rel_tol)
    {
        const Svd d = svd(a);
        const Eigen::Index rank = numerical_rank(d.singular_values, rel_tol);
        return d.v.rightCols(a.cols() - rank);
    }

    CMatrix solve_hermitian_psd(const CMatrix &a, const CMatrix &b)
    {
        require_square_hermitian(a, "solve_hermitian_psd");
        if (b.rows() != a.rows())
            throw contract_error("solve_hermitian_psd: right-hand side has " + std::to_string(b.rows()) +
                                 " rows, expected " + std::to_string(a.rows()));
        if (a.rows() == 0)
            return CMatrix(0, b.cols());

        Eigen::LLT<CMatrix> llt(hermitian_part(a));
        const double rcond = llt.info() == Eigen::Success ? llt.rcond() : 0.0;
        if (llt.info() != Eigen::Success || rcond < 4.0 * std::numeric_limits<double>::epsilon())
        {
            const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(hermitian_part(a), Eigen::EigenvaluesOnly).eigenvalues();
            const double lo = ev.cwiseAbs().minCoeff(), hi = ev.cwiseAbs().maxCoeff();
            const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
            throw singular_matrix_error("solve_hermitian_psd: matrix is singular to working precision", cond);
        }
        return llt.solve(b);
    }

    double log2_det_psd(const CMatrix &a)
    {
        require_square_hermitian(a, "log2_det_psd");
        if (a.rows() == 0)
            return 0.0;

        const RVector ev = Eigen::SelfAdjointEigenSolver<CMatrix>(hermitian_part(a), Eigen::EigenvaluesOnly).eigenvalues();
        if (ev.minCoeff() < 1.0 - 1e-9)
            throw contract_error("log2_det_psd: eigenvalue " + std::to_string(ev.minCoeff()) +
                                 " below 1, argument is not I + PSD");

        double sum = 0.0;
        for (Eigen::Index i = 0; i < ev.size(); ++i)
            sum += std::log2(std::max(ev[i], 1.0));
        return sum;
    }
}
