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

#ifndef ASFCOV_DICTIONARY_HPP
#define ASFCOV_DICTIONARY_HPP

#include "asfcov/types.hpp"

#include <string>
#include <variant>
#include <vector>

namespace asfcov {

// Unit-mass dictionary atoms over the normalised angle xi in [-1, 1].

struct DiracAtom {
    double location = 0.0;
};

/// Gaussian truncated to center +- half_width and clipped to [-1, 1]. When
/// `skewed`, the density is multiplied by J(xi) = 1/sqrt(1 - xi^2) (the
/// Jacobian from angle to xi). Always renormalised to unit mass.
struct TruncGaussAtom {
    double center = 0.0;
    double sigma = 0.1;
    double half_width = 0.3;
    bool skewed = false;
    double normalizer = 1.0; // 1 / integral of the unnormalised density
};

struct RectAtom {
    double alpha = -1.0;
    double beta = 1.0;
};

using Atom = std::variant<DiracAtom, TruncGaussAtom, RectAtom>;

TruncGaussAtom make_trunc_gauss_atom(double center, double sigma, double half_width, bool skewed);

bool is_dirac(const Atom& atom);
std::string atom_kind(const Atom& atom);

/// Support [lo, hi] of a continuous atom; a Dirac returns {xi, xi}.
std::pair<double, double> atom_support(const Atom& atom);

/// Density value of a continuous atom; throws for Dirac atoms.
double atom_density(const Atom& atom, double xi);

/// Integral of the atom over [-1, 1] (1 up to quadrature error).
double atom_mass(const Atom& atom);

/// First column of S_i at scale nu: entry k = int psi(xi) e^{j pi nu k xi} dxi.
/// Gaussian atoms go through quadrature and are cached per (atom, M, nu).
CVector atom_moment_column(const Atom& atom, int m, double nu = 1.0);

/// G Dirac atoms at the cell centres -1 + (2i + 1)/G of [-1, 1).
std::vector<Atom> dirac_grid(int g);

/// G overlapping skewed truncated Gaussians: sigma = 4/(3(G+3)), half-width
/// 4/(G+3), centres -1 + 2(i+1)/(G+3) for i = 1..G.
std::vector<Atom> gaussian_family(int g);

/// Dictionary by name ("dirac" or "gauss").
std::vector<Atom> make_dictionary(const std::string& kind, int g);

/// Everything the coefficient fits need. Atoms are the G continuous atoms
/// followed by one Dirac per detected spike.
struct DesignSystem {
    int m = 0;
    double nu = 1.0;
    std::vector<Atom> atoms;
    int continuous_count = 0;
    CMatrix moments;  // M x (G + r): column i = atom_moment_column(atoms[i], M, nu)
    RVector weights;  // diagonal of W: sqrt(M), sqrt(2(M-1)), ..., sqrt(2)
    CVector target;   // first column of the Toeplitz projection of the sample covariance

    int size() const { return static_cast<int>(atoms.size()); }
    int spike_count() const { return size() - continuous_count; }
    bool all_dirac() const;
};

/// diag(W) for an M-antenna array.
RVector design_weights(int m);

DesignSystem assemble_design(const std::vector<Atom>& continuous_atoms, const std::vector<double>& spike_locations,
                             const CMatrix& sample_cov_h, double nu = 1.0);

/// Lag vector sum_i u_i atom_moment_column(atom_i, M, nu_out).
CVector reconstruct_lags(const DesignSystem& system, const RVector& u, double nu_out);

/// Hermitian Toeplitz covariance sum_i u_i S_i^(nu_out).
CMatrix reconstruct_covariance(const DesignSystem& system, const RVector& u, double nu_out);

/// Psi[j, i] = psi_i(xi_j) at the cell centres xi_j = -1 + (2j + 1)/grid_size
/// (so J(xi) stays finite); Dirac atoms get a zero column.
RMatrix density_matrix(const std::vector<Atom>& atoms, int grid_size);

} // namespace asfcov

#endif
