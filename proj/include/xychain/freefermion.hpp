#pragma once

#include <Eigen/Dense>
#include <vector>

#include "xychain/model.hpp"

namespace xychain {

/// Effective one-body matrix of a chain: the 2n x 2n real symmetric block
/// matrix [[A, B], [-B, -A]] with A symmetric tridiagonal (fields on the
/// diagonal, -mu_j off it) and B antisymmetric tridiagonal (-mu_j g_j above
/// the diagonal).
struct BlockHamiltonian {
  int n = 0;
  Eigen::MatrixXd a_block;  // n x n, symmetric
  Eigen::MatrixXd b_block;  // n x n, antisymmetric
  Eigen::MatrixXd m;        // 2n x 2n, symmetric

  bool pairing_free() const { return b_block.isZero(0.0); }
};

BlockHamiltonian build_block_hamiltonian(const ChainSpec& spec);

/// Conjugates M by the site-interleaving permutation (e_1, e_{n+1}, e_2,
/// e_{n+2}, ...). The result is block tridiagonal with 2x2 blocks: nu_j J on
/// the diagonal and -mu_j S(g_j) above it, J = diag(1,-1), S(g) = [[1, g],
/// [-g, -1]].
Eigen::MatrixXd reorder_tight_binding(const BlockHamiltonian& block);

enum class DiagPath { AnisotropicSvd, IsotropicEigen };

/// Orthogonal diagonalization of the block matrix: W M W^t = diag(L, -L).
///
/// The anisotropic path takes the singular value decomposition of A + B,
/// giving nonnegative mode energies and W = (1/2)[[V+U, V-U], [V-U, V+U]].
/// The isotropic path (requires B = 0) diagonalizes A directly, giving
/// signed mode energies and W = diag(U, U). Rows of U (and V) are the modes;
/// each is sign-fixed so its largest-magnitude entry is positive, which
/// makes W deterministic across solver backends.
struct FermionDiagonalization {
  int n = 0;
  DiagPath path = DiagPath::IsotropicEigen;
  Eigen::VectorXd mode_energies;  // ascending; >= 0 on the SVD path
  Eigen::MatrixXd u_factor;       // n x n orthogonal
  Eigen::MatrixXd v_factor;       // n x n orthogonal (== u_factor on the eigen path)
  Eigen::MatrixXd w;              // 2n x 2n orthogonal
  double energy_sum = 0.0;        // sum of mode energies

  Eigen::MatrixXd mode_diagonal() const;  // diag(L, -L)
};

FermionDiagonalization diagonalize(const BlockHamiltonian& block, DiagPath path);

/// exp(-i M t) computed as W^t diag(exp(-i l t), exp(+i l t)) W.
Eigen::MatrixXcd propagator(const FermionDiagonalization& diag, double t);

/// Selected rows of exp(-i M t) in the upper index block: row j gives the
/// entries (j, 1..n) and (j, n+1..2n), 1-based sites. Cheaper than the full
/// propagator when only a few rows are needed.
Eigen::MatrixXcd propagator_rows(const FermionDiagonalization& diag, double t,
                                 const std::vector<int>& sites);

/// Time-uniform upper bound on |exp(-iMt)_{j,k}|: the eigenvector-modulus
/// sum over modes. Entry (j,k) of |W|^t |W|, restricted to the requested
/// rows; columns run over the full 2n index range.
Eigen::MatrixXd eigencorrelator_rows(const FermionDiagonalization& diag,
                                     const std::vector<int>& sites);

/// Ground-state quantities of the isotropic chain, derived from the signed
/// mode energies: E0 = -sum |l_j|, gap = 2 min |l_j|, the occupied-mode
/// pattern, and the two-point kernel <c_j^* c_k> = (U^t diag(occ) U)_{jk}
/// (the spectral projection of A onto its negative eigenvalues).
struct GroundStateData {
  double energy = 0.0;
  double gap = 0.0;
  bool degenerate = false;
  std::vector<int> occupation;        // 1 where the mode energy is negative
  Eigen::MatrixXd fermi_projection;   // n x n, symmetric idempotent
};

GroundStateData ground_state_data(const FermionDiagonalization& diag);

/// <psi0, c_j^* c_k psi0> for the isotropic chain, 1-based sites.
/// Throws degeneracy_error when the ground state is degenerate.
double two_point_function(const GroundStateData& gs, int j, int k);

}  // namespace xychain
