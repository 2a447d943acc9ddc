#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "xychain/model.hpp"

namespace xychain {

/// Dense many-body operator on the chain's full 2^n-dimensional space.
/// Basis convention: site 1 occupies the most significant bit; bit value 0
/// is spin up (+1 eigenstate of sigma^z).
struct ManyBodyOperator {
  int n = 0;
  Eigen::MatrixXcd matrix;
  int support_lo = 1;  // smallest site acted on nontrivially
  int support_hi = 1;

  long dim() const { return matrix.rows(); }
  bool disjoint_from(const ManyBodyOperator& other) const {
    return support_hi < other.support_lo || other.support_hi < support_lo;
  }
};

ManyBodyOperator pauli(int site, char axis, int n);
ManyBodyOperator lowering(int site, int n);        // a_j
ManyBodyOperator raising(int site, int n);         // a_j^*
ManyBodyOperator jordan_wigner_c(int site, int n);  // c_j = sigma^z string * a_j
ManyBodyOperator matrix_unit(int site, int row, int col, int n);  // e_j(r,s)
ManyBodyOperator identity_op(int n);

/// Builds any ObservableKind at a site.
ManyBodyOperator observable(ObservableKind kind, int site, int n, int unit_row = 1,
                            int unit_col = 1);

/// Full many-body Hamiltonian with its spectral data. The Hamiltonian is
/// real symmetric in the computational basis, so the eigenbasis is stored
/// as a real orthogonal matrix.
class EvolutionContext {
 public:
  EvolutionContext(const ChainSpec& spec, int oracle_cap);

  const ChainSpec& spec() const { return spec_; }
  int n() const { return spec_.n; }
  long dim() const { return hamiltonian_.rows(); }
  const Eigen::MatrixXd& hamiltonian() const { return hamiltonian_; }
  const Eigen::VectorXd& energies() const { return energies_; }    // ascending
  const Eigen::MatrixXd& basis() const { return basis_; }          // columns
  const Eigen::VectorXd& ground_vector() const { return ground_; }
  double ground_energy() const { return energies_[0]; }
  double first_excited() const { return energies_[1]; }
  double energy_gap() const { return energies_[1] - energies_[0]; }
  bool ground_degenerate() const;

  /// Transforms an operator to the eigenbasis: Q^t X Q.
  Eigen::MatrixXcd to_eigenbasis(const Eigen::MatrixXcd& op) const;

 private:
  ChainSpec spec_;
  Eigen::MatrixXd hamiltonian_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd basis_;
  Eigen::VectorXd ground_;
};

EvolutionContext build_hamiltonian(const ChainSpec& spec, int oracle_cap);

/// exp(iHt) A exp(-iHt) through the stored eigendecomposition. t = 0
/// returns the operator unchanged, bit for bit.
ManyBodyOperator heisenberg_evolve(const EvolutionContext& ctx,
                                   const ManyBodyOperator& op, double t);

/// Largest singular value. Dense SVD up to 512 dimensions, then a power
/// iteration with a deterministic start and 1e-11 relative tolerance.
double operator_norm(const Eigen::MatrixXcd& op);

double commutator_norm(const ManyBodyOperator& a, const ManyBodyOperator& b);

/// Gaussian-smeared time average of the Heisenberg orbit of B:
///   (1 / 2 pi i) \int tau_t(B) e^{-alpha t^2} / (t - i eps) dt,
/// evaluated by adaptive quadrature in the eigenbasis.
ManyBodyOperator quasilocal_approx(const EvolutionContext& ctx,
                                   const ManyBodyOperator& b, double alpha,
                                   double eps, double tol = 1e-10);

/// Truncated ground-state correlation <psi0, A B psi0> - <psi0, A psi0>
/// <psi0, B psi0>. Throws degeneracy_error if the ground state is
/// degenerate.
std::complex<double> ground_correlation(const EvolutionContext& ctx,
                                        const ManyBodyOperator& a,
                                        const ManyBodyOperator& b);

/// Coefficients of the expansion X = sum_k alpha_k c_k + sum_k beta_k c_k^*
/// in the Jordan-Wigner basis (valid for operators in the span, e.g. evolved
/// c-operators).
struct FermiExpansion {
  Eigen::VectorXcd on_c;        // alpha_k
  Eigen::VectorXcd on_c_dagger; // beta_k
};

FermiExpansion c_expansion(const std::vector<ManyBodyOperator>& c_ops,
                           const Eigen::MatrixXcd& op);

}  // namespace xychain
