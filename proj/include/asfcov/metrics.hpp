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

#ifndef ASFCOV_METRICS_HPP
#define ASFCOV_METRICS_HPP

#include "asfcov/types.hpp"

namespace asfcov {

/// ||Sigma - Sigma_hat||_F / ||Sigma||_F
double err_frobenius(const CMatrix& truth, const CMatrix& estimate);

/// Normalised MSE of the linear MMSE channel estimate h_hat = W y built from
/// the estimated covariance, W = Sigma_hat (N0 I + Sigma_hat)^+, in closed form:
/// tr((I - W) Sigma (I - W)^H + N0 W W^H) / tr(Sigma).
/// The pseudo-inverse covers indefinite estimates whose shifted matrix is singular.
double err_nmse(const CMatrix& truth, const CMatrix& estimate, double n0);

/// 1 - tr(U_hat^H Sigma U_hat) / tr(U^H Sigma U) with U, U_hat the p dominant
/// eigenvectors of Sigma and Sigma_hat.
double power_efficiency(const CMatrix& truth, const CMatrix& estimate, int p);

/// p dominant eigenvectors; ties in eigenvalue are ordered by the vectors
/// after making their first non-negligible entry real positive.
CMatrix dominant_eigenvectors(const CMatrix& a, int p);

} // namespace asfcov

#endif
