#include "xychain/freefermion.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

namespace xychain {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cd = std::complex<double>;

// Flips rows of `primary` (and the matching rows of `paired`) so that the
// largest-magnitude entry of each primary row is positive. First maximal
// entry wins ties, so the result does not depend on the solver backend.
void sign_fix_rows(MatrixXd& primary, MatrixXd* paired) {
  for (Eigen::Index r = 0; r < primary.rows(); ++r) {
    Eigen::Index pos = 0;
    primary.row(r).cwiseAbs().maxCoeff(&pos);
    if (primary(r, pos) < 0.0) {
      primary.row(r) = -primary.row(r);
      if (paired) paired->row(r) = -paired->row(r);
    }
  }
}

VectorXcd mode_phases(const FermionDiagonalization& diag, double t) {
  const int n = diag.n;
  VectorXcd phases(2 * n);
  for (int l = 0; l < n; ++l) {
    const double angle = diag.mode_energies[l] * t;
    phases[l] = cd(std::cos(angle), -std::sin(angle));
    phases[n + l] = std::conj(phases[l]);
  }
  return phases;
}

}  // namespace

BlockHamiltonian build_block_hamiltonian(const ChainSpec& spec) {
  spec.validate();
  const int n = spec.n;

  BlockHamiltonian block;
  block.n = n;
  block.a_block = MatrixXd::Zero(n, n);
  block.b_block = MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) block.a_block(j, j) = spec.field[j];
  for (int j = 0; j + 1 < n; ++j) {
    block.a_block(j, j + 1) = -spec.coupling[j];
    block.a_block(j + 1, j) = -spec.coupling[j];
    const double pair = spec.coupling[j] * spec.anisotropy[j];
    block.b_block(j, j + 1) = -pair;
    block.b_block(j + 1, j) = pair;
  }

  block.m = MatrixXd::Zero(2 * n, 2 * n);
  block.m.topLeftCorner(n, n) = block.a_block;
  block.m.topRightCorner(n, n) = block.b_block;
  block.m.bottomLeftCorner(n, n) = -block.b_block;
  block.m.bottomRightCorner(n, n) = -block.a_block;
  return block;
}

Eigen::MatrixXd reorder_tight_binding(const BlockHamiltonian& block) {
  const int n = block.n;
  std::vector<int> perm(2 * n);
  for (int j = 0; j < n; ++j) {
    perm[2 * j] = j;
    perm[2 * j + 1] = n + j;
  }
  MatrixXd out(2 * n, 2 * n);
  for (int r = 0; r < 2 * n; ++r)
    for (int c = 0; c < 2 * n; ++c) out(r, c) = block.m(perm[r], perm[c]);
  return out;
}

FermionDiagonalization diagonalize(const BlockHamiltonian& block, DiagPath path) {
  const int n = block.n;
  FermionDiagonalization diag;
  diag.n = n;
  diag.path = path;

  if (path == DiagPath::IsotropicEigen) {
    if (!block.pairing_free())
      throw config_error("isotropic diagonalization requires a zero pairing block");
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(block.a_block);
    if (solver.info() != Eigen::Success)
      throw numerical_error("eigendecomposition of the one-body block failed");
    diag.mode_energies = solver.eigenvalues();
    diag.u_factor = solver.eigenvectors().transpose();
    sign_fix_rows(diag.u_factor, nullptr);
    diag.v_factor = diag.u_factor;

    diag.w = MatrixXd::Zero(2 * n, 2 * n);
    diag.w.topLeftCorner(n, n) = diag.u_factor;
    diag.w.bottomRightCorner(n, n) = diag.u_factor;
  } else {
    const MatrixXd s = block.a_block + block.b_block;
    Eigen::BDCSVD<MatrixXd> svd(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success)
      throw numerical_error("singular value decomposition of A+B failed");

    // Eigen sorts singular values descending; re-index ascending, keeping
    // the original column order within ties.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const VectorXd& sv = svd.singularValues();
    std::stable_sort(order.begin(), order.end(),
                     [&](int l, int r) { return sv[l] < sv[r]; });

    diag.mode_energies.resize(n);
    diag.u_factor.resize(n, n);
    diag.v_factor.resize(n, n);
    for (int i = 0; i < n; ++i) {
      diag.mode_energies[i] = sv[order[i]];
      diag.u_factor.row(i) = svd.matrixU().col(order[i]).transpose();
      diag.v_factor.row(i) = svd.matrixV().col(order[i]).transpose();
    }
    // U row and V row of one mode share a joint sign freedom; fix the V row
    // and flip its partner with it.
    sign_fix_rows(diag.v_factor, &diag.u_factor);

    diag.w.resize(2 * n, 2 * n);
    const MatrixXd sum = 0.5 * (diag.v_factor + diag.u_factor);
    const MatrixXd dif = 0.5 * (diag.v_factor - diag.u_factor);
    diag.w.topLeftCorner(n, n) = sum;
    diag.w.topRightCorner(n, n) = dif;
    diag.w.bottomLeftCorner(n, n) = dif;
    diag.w.bottomRightCorner(n, n) = sum;
  }

  diag.energy_sum = diag.mode_energies.sum();
  return diag;
}

Eigen::MatrixXd FermionDiagonalization::mode_diagonal() const {
  VectorXd d(2 * n);
  d.head(n) = mode_energies;
  d.tail(n) = -mode_energies;
  return d.asDiagonal();
}

Eigen::MatrixXcd propagator(const FermionDiagonalization& diag, double t) {
  const int m = 2 * diag.n;
  const VectorXcd phases = mode_phases(diag, t);

  // exp(-iMt) = W^t diag(phases) W, assembled as two real products.
  MatrixXd scaled_re(m, m), scaled_im(m, m);
  for (int l = 0; l < m; ++l) {
    scaled_re.row(l) = phases[l].real() * diag.w.row(l);
    scaled_im.row(l) = phases[l].imag() * diag.w.row(l);
  }
  MatrixXcd out(m, m);
  out.real() = diag.w.transpose() * scaled_re;
  out.imag() = diag.w.transpose() * scaled_im;
  return out;
}

Eigen::MatrixXcd propagator_rows(const FermionDiagonalization& diag, double t,
                                 const std::vector<int>& sites) {
  const int n = diag.n;
  const int rows = static_cast<int>(sites.size());
  MatrixXcd out = MatrixXcd::Zero(rows, 2 * n);

  if (diag.path == DiagPath::IsotropicEigen) {
    // Block-diagonal M: entries (j, n+k) vanish and the upper block is
    // exp(-iAt) = U^t diag(e^{-i l t}) U.
    const Eigen::ArrayXd angles = diag.mode_energies.array() * t;
    const Eigen::ArrayXd cos_part = angles.cos();
    const Eigen::ArrayXd sin_part = -angles.sin();
    MatrixXd cols_re(n, rows), cols_im(n, rows);
    for (int r = 0; r < rows; ++r) {
      const int j = sites[r];
      if (j < 1 || j > n) throw config_error("propagator_rows: site out of range");
      cols_re.col(r) = (cos_part * diag.u_factor.col(j - 1).array()).matrix();
      cols_im.col(r) = (sin_part * diag.u_factor.col(j - 1).array()).matrix();
    }
    out.leftCols(n).real() = cols_re.transpose() * diag.u_factor;
    out.leftCols(n).imag() = cols_im.transpose() * diag.u_factor;
    return out;
  }

  const VectorXcd phases = mode_phases(diag, t);
  const Eigen::ArrayXd phase_re = phases.real().array();
  const Eigen::ArrayXd phase_im = phases.imag().array();
  MatrixXd cols_re(2 * n, rows), cols_im(2 * n, rows);
  for (int r = 0; r < rows; ++r) {
    const int j = sites[r];
    if (j < 1 || j > n) throw config_error("propagator_rows: site out of range");
    cols_re.col(r) = (phase_re * diag.w.col(j - 1).array()).matrix();
    cols_im.col(r) = (phase_im * diag.w.col(j - 1).array()).matrix();
  }
  out.real() = cols_re.transpose() * diag.w;
  out.imag() = cols_im.transpose() * diag.w;
  return out;
}

Eigen::MatrixXd eigencorrelator_rows(const FermionDiagonalization& diag,
                                     const std::vector<int>& sites) {
  const int n = diag.n;
  const int rows = static_cast<int>(sites.size());
  MatrixXd out = MatrixXd::Zero(rows, 2 * n);

  if (diag.path == DiagPath::IsotropicEigen) {
    const MatrixXd abs_u = diag.u_factor.cwiseAbs();
    for (int r = 0; r < rows; ++r) {
      const int j = sites[r];
      if (j < 1 || j > n) throw config_error("eigencorrelator_rows: site out of range");
      out.row(r).head(n) = abs_u.col(j - 1).transpose() * abs_u;
    }
    return out;
  }

  const MatrixXd abs_w = diag.w.cwiseAbs();
  for (int r = 0; r < rows; ++r) {
    const int j = sites[r];
    if (j < 1 || j > n) throw config_error("eigencorrelator_rows: site out of range");
    out.row(r) = abs_w.col(j - 1).transpose() * abs_w;
  }
  return out;
}

GroundStateData ground_state_data(const FermionDiagonalization& diag) {
  if (diag.path != DiagPath::IsotropicEigen)
    throw config_error("ground-state data is defined on the isotropic path");
  const int n = diag.n;

  GroundStateData gs;
  gs.occupation.assign(n, 0);
  double min_abs = std::abs(diag.mode_energies[0]);
  double max_abs = 0.0;
  double total = 0.0;
  int occupied = 0;
  for (int l = 0; l < n; ++l) {
    const double e = diag.mode_energies[l];
    total += std::abs(e);
    min_abs = std::min(min_abs, std::abs(e));
    max_abs = std::max(max_abs, std::abs(e));
    if (e < 0.0) {
      gs.occupation[l] = 1;
      ++occupied;
    }
  }
  gs.energy = -total;
  gs.gap = 2.0 * min_abs;
  gs.degenerate = min_abs <= 1e-12 * std::max(1.0, max_abs);

  MatrixXd occupied_rows(occupied, n);
  int at = 0;
  for (int l = 0; l < n; ++l)
    if (gs.occupation[l]) occupied_rows.row(at++) = diag.u_factor.row(l);
  gs.fermi_projection = occupied_rows.transpose() * occupied_rows;
  return gs;
}

double two_point_function(const GroundStateData& gs, int j, int k) {
  const auto n = gs.fermi_projection.rows();
  if (j < 1 || j > n || k < 1 || k > n)
    throw config_error("two_point_function: site out of range");
  if (gs.degenerate)
    throw degeneracy_error("two-point function undefined: degenerate ground state (gap " +
                           std::to_string(gs.gap) + ")");
  return gs.fermi_projection(j - 1, k - 1);
}

}  // namespace xychain
