// SPDX-License-Identifier: Apache-2.0
//
// asfcov - parametric channel covariance estimation for large antenna arrays
// Copyright (C) 2026 The asfcov authors
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

#ifndef ASFCOV_LINALG_HPP
#define ASFCOV_LINALG_HPP

#include "asfcov/types.hpp"

namespace asfcov {

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues are sorted in
/// descending order; column k of `vectors` belongs to `values[k]`.
struct HermitianEig {
    RVector values;
    CMatrix vectors;
};

/// Returns (A + A^H)/2 after checking that A is square, finite and
/// Hermitian to within 1e-10 relative asymmetry.
CMatrix hermitian_part(const CMatrix& a);

/// Full spectrum of a Hermitian matrix by cyclic complex Jacobi sweeps.
/// Sweeps stop once the largest off-diagonal magnitude drops below
/// 1e-12 * ||A||_F (at most 64 sweeps).
HermitianEig hermitian_eig(const CMatrix& a);

/// Hermitian Toeplitz matrix whose first column is `first_column`.
/// The imaginary part of the lag-0 entry is discarded.
CMatrix toeplitz_from_first_column(const CVector& first_column);

struct ToeplitzProjection {
    CMatrix matrix;
    CVector first_column;
};

/// Frobenius-orthogonal projection onto Hermitian Toeplitz matrices:
/// lag k of the result is the mean of the k-th sub-diagonal of A.
ToeplitzProjection toeplitz_project(const CMatrix& a);

/// Nearest positive semidefinite matrix (negative eigenvalues set to 0).
CMatrix psd_project(const CMatrix& a);

/// Hermitian square root V diag(sqrt(lambda)) V^H. Eigenvalues above
/// -1e-10 * ||A||_F are clamped to zero (as are positive ones at rounding
/// level); more negative ones are an error.
CMatrix psd_sqrt(const CMatrix& a);

/// tr(G S) for Hermitian G and the Hermitian Toeplitz S with first column s.
cdouble toeplitz_trace_product(const CMatrix& g, const CVector& s);

/// <A, B> = tr(A^H B).
cdouble frobenius_inner(const CMatrix& a, const CMatrix& b);

} // namespace asfcov

#endif
