#include "xychain/exact_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <bit>
#include <cmath>
#include <random>

#include "xychain/quadrature.hpp"

namespace xychain {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using cd = std::complex<double>;

long dim_for(int n) { return 1L << n; }

// Bit of the basis index holding site j (1-based); site 1 is the most
// significant bit, bit value 0 is spin up.
long site_mask(int site, int n) { return 1L << (n - site); }

int site_bit(long state, int site, int n) {
  return static_cast<int>((state >> (n - site)) & 1L);
}

// Parity sign of the sigma^z string over sites 1..j-1.
double jw_string_sign(long state, int site, int n) {
  const long prefix = state >> (n - site + 1);
  return (std::popcount(static_cast<unsigned long>(prefix)) & 1) ? -1.0 : 1.0;
}

void check_site(int site, int n) {
  if (site < 1 || site > n) throw config_error("site index out of range");
}

}  // namespace

ManyBodyOperator pauli(int site, char axis, int n) {
  check_site(site, n);
  const long dim = dim_for(n);
  const long mask = site_mask(site, n);
  ManyBodyOperator op{n, MatrixXcd::Zero(dim, dim), site, site};
  switch (axis) {
    case 'x':
      for (long b = 0; b < dim; ++b) op.matrix(b ^ mask, b) = 1.0;
      break;
    case 'y':
      for (long b = 0; b < dim; ++b)
        op.matrix(b ^ mask, b) = (b & mask) ? cd(0.0, -1.0) : cd(0.0, 1.0);
      break;
    case 'z':
      for (long b = 0; b < dim; ++b) op.matrix(b, b) = (b & mask) ? -1.0 : 1.0;
      break;
    default:
      throw config_error("pauli axis must be x, y or z");
  }
  return op;
}

ManyBodyOperator lowering(int site, int n) {
  check_site(site, n);
  const long dim = dim_for(n);
  const long mask = site_mask(site, n);
  ManyBodyOperator op{n, MatrixXcd::Zero(dim, dim), site, site};
  for (long b = 0; b < dim; ++b)
    if (!(b & mask)) op.matrix(b | mask, b) = 1.0;
  return op;
}

ManyBodyOperator raising(int site, int n) {
  check_site(site, n);
  const long dim = dim_for(n);
  const long mask = site_mask(site, n);
  ManyBodyOperator op{n, MatrixXcd::Zero(dim, dim), site, site};
  for (long b = 0; b < dim; ++b)
    if (b & mask) op.matrix(b & ~mask, b) = 1.0;
  return op;
}

ManyBodyOperator jordan_wigner_c(int site, int n) {
  check_site(site, n);
  const long dim = dim_for(n);
  const long mask = site_mask(site, n);
  ManyBodyOperator op{n, MatrixXcd::Zero(dim, dim), 1, site};
  for (long b = 0; b < dim; ++b)
    if (!(b & mask)) op.matrix(b | mask, b) = jw_string_sign(b, site, n);
  return op;
}

ManyBodyOperator matrix_unit(int site, int row, int col, int n) {
  check_site(site, n);
  if (row < 1 || row > 2 || col < 1 || col > 2)
    throw config_error("matrix unit indices must be in {1,2}");
  const long dim = dim_for(n);
  const long mask = site_mask(site, n);
  ManyBodyOperator op{n, MatrixXcd::Zero(dim, dim), site, site};
  for (long b = 0; b < dim; ++b) {
    if (site_bit(b, site, n) != col - 1) continue;
    const long target = (row == col) ? b : (b ^ mask);
    op.matrix(target, b) = 1.0;
  }
  return op;
}

ManyBodyOperator identity_op(int n) {
  const long dim = dim_for(n);
  return ManyBodyOperator{n, MatrixXcd::Identity(dim, dim), 1, 0};
}

ManyBodyOperator observable(ObservableKind kind, int site, int n, int unit_row,
                            int unit_col) {
  switch (kind) {
    case ObservableKind::Lowering: return lowering(site, n);
    case ObservableKind::Raising: return raising(site, n);
    case ObservableKind::NumberOcc: {
      ManyBodyOperator op = raising(site, n);
      op.matrix = op.matrix * lowering(site, n).matrix;
      return op;
    }
    case ObservableKind::NumberHole: {
      ManyBodyOperator op = lowering(site, n);
      op.matrix = op.matrix * raising(site, n).matrix;
      return op;
    }
    case ObservableKind::SigmaX: return pauli(site, 'x', n);
    case ObservableKind::SigmaY: return pauli(site, 'y', n);
    case ObservableKind::SigmaZ: return pauli(site, 'z', n);
    case ObservableKind::FermiC: return jordan_wigner_c(site, n);
    case ObservableKind::FermiCDagger: {
      ManyBodyOperator op = jordan_wigner_c(site, n);
      op.matrix = op.matrix.adjoint().eval();
      return op;
    }
    case ObservableKind::MatrixUnit: return matrix_unit(site, unit_row, unit_col, n);
  }
  throw config_error("unknown observable kind");
}

EvolutionContext::EvolutionContext(const ChainSpec& spec, int oracle_cap)
    : spec_(spec) {
  spec.validate();
  if (oracle_cap < 1 || oracle_cap > kOracleCapHardLimit)
    throw capacity_error("oracle_cap must be in [1, 14]");
  if (spec.n > oracle_cap)
    throw capacity_error("chain of " + std::to_string(spec.n) +
                         " sites exceeds oracle_cap " + std::to_string(oracle_cap));

  const int n = spec.n;
  const long dim = dim_for(n);
  hamiltonian_ = MatrixXd::Zero(dim, dim);

  for (int bond = 0; bond < n - 1; ++bond) {
    const long mj = site_mask(bond + 1, n);
    const long mk = site_mask(bond + 2, n);
    const double xx = spec.coupling[bond] * (1.0 + spec.anisotropy[bond]);
    const double yy = spec.coupling[bond] * (1.0 - spec.anisotropy[bond]);
    for (long b = 0; b < dim; ++b) {
      // sigma^x sigma^x flips both bits; sigma^y sigma^y flips both with a
      // sign depending on whether the bits agree.
      const double ysign = (((b & mj) != 0) == ((b & mk) != 0)) ? -1.0 : 1.0;
      hamiltonian_(b ^ (mj | mk), b) += xx + yy * ysign;
    }
  }
  for (int site = 1; site <= n; ++site) {
    const long mask = site_mask(site, n);
    const double v = spec.field[site - 1];
    for (long b = 0; b < dim; ++b) hamiltonian_(b, b) += (b & mask) ? -v : v;
  }

  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(hamiltonian_);
  if (solver.info() != Eigen::Success)
    throw numerical_error("many-body eigendecomposition failed");
  energies_ = solver.eigenvalues();
  basis_ = solver.eigenvectors();
  ground_ = basis_.col(0);
}

bool EvolutionContext::ground_degenerate() const {
  const double scale = std::max({1.0, std::abs(energies_[0]),
                                 std::abs(energies_[energies_.size() - 1])});
  return energy_gap() <= 1e-10 * scale;
}

Eigen::MatrixXcd EvolutionContext::to_eigenbasis(const Eigen::MatrixXcd& op) const {
  MatrixXcd out(op.rows(), op.cols());
  out.real() = basis_.transpose() * op.real() * basis_;
  out.imag() = basis_.transpose() * op.imag() * basis_;
  return out;
}

EvolutionContext build_hamiltonian(const ChainSpec& spec, int oracle_cap) {
  return EvolutionContext(spec, oracle_cap);
}

ManyBodyOperator heisenberg_evolve(const EvolutionContext& ctx,
                                   const ManyBodyOperator& op, double t) {
  if (op.dim() != ctx.dim())
    throw config_error("heisenberg_evolve: operator dimension mismatch");
  if (t == 0.0) return op;

  const long dim = ctx.dim();
  MatrixXcd tilde = ctx.to_eigenbasis(op.matrix);
  VectorXcd phase(dim);
  for (long r = 0; r < dim; ++r) {
    const double angle = ctx.energies()[r] * t;
    phase[r] = cd(std::cos(angle), std::sin(angle));
  }
  tilde = phase.asDiagonal() * tilde * phase.conjugate().asDiagonal();

  ManyBodyOperator out{op.n, MatrixXcd(dim, dim), 1, op.n};
  out.matrix.real() = ctx.basis() * tilde.real() * ctx.basis().transpose();
  out.matrix.imag() = ctx.basis() * tilde.imag() * ctx.basis().transpose();
  return out;
}

double operator_norm(const Eigen::MatrixXcd& op) {
  const long dim = op.rows();
  if (dim <= 512) {
    Eigen::BDCSVD<MatrixXcd> svd(op);
    return svd.singularValues()[0];
  }

  // Power iteration on op^H op; the start vector is fixed so results are
  // reproducible. Convergence is monitored on the singular value itself.
  std::mt19937_64 rng(0x243f6a8885a308d3ull);
  VectorXcd v(dim);
  for (long i = 0; i < dim; ++i) {
    const double re = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    const double im = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    v[i] = cd(re, im);
  }
  v.normalize();

  double sigma = 0.0;
  for (int iter = 0; iter < 2000; ++iter) {
    VectorXcd w = op * v;
    const double estimate = w.norm();
    if (estimate == 0.0) return 0.0;
    VectorXcd u = op.adjoint() * w;
    v = u / u.norm();
    if (std::abs(estimate - sigma) <= 1e-11 * estimate + 1e-300) return estimate;
    sigma = estimate;
  }
  return sigma;
}

double commutator_norm(const ManyBodyOperator& a, const ManyBodyOperator& b) {
  if (a.dim() != b.dim())
    throw config_error("commutator_norm: operator dimension mismatch");
  return operator_norm(a.matrix * b.matrix - b.matrix * a.matrix);
}

ManyBodyOperator quasilocal_approx(const EvolutionContext& ctx,
                                   const ManyBodyOperator& b, double alpha,
                                   double eps, double tol) {
  if (!(alpha > 0.0) || !(eps > 0.0))
    throw config_error("quasilocal approximation requires alpha > 0 and eps > 0");
  if (b.dim() != ctx.dim())
    throw config_error("quasilocal_approx: operator dimension mismatch");

  const long dim = ctx.dim();
  const MatrixXcd tilde = ctx.to_eigenbasis(b.matrix);

  // Orbit in the eigenbasis and its derivative at t = 0. Subtracting the
  // linear term from the integrand removes the eps-scale structure at the
  // pole; its contribution is restored in closed form.
  MatrixXcd derivative(dim, dim);
  for (long r = 0; r < dim; ++r)
    for (long s = 0; s < dim; ++s)
      derivative(r, s) = cd(0.0, ctx.energies()[r] - ctx.energies()[s]) * tilde(r, s);

  const double t_cut = std::sqrt(36.85 / alpha);
  const auto orbit_minus_linear = [&](double t) -> MatrixXcd {
    VectorXcd phase(dim);
    for (long r = 0; r < dim; ++r) {
      const double angle = ctx.energies()[r] * t;
      phase[r] = cd(std::cos(angle), std::sin(angle));
    }
    MatrixXcd g = phase.asDiagonal() * tilde * phase.conjugate().asDiagonal();
    g -= tilde;
    g *= std::exp(-alpha * t * t);
    g -= t * derivative;
    return MatrixXcd((g / cd(t, -eps)).eval());
  };

  const double scale = 1.0 + tilde.cwiseAbs().maxCoeff();
  const MatrixXcd smooth =
      adaptive_simpson<MatrixXcd>(orbit_minus_linear, -t_cut, 0.0, tol * scale, 44) +
      adaptive_simpson<MatrixXcd>(orbit_minus_linear, 0.0, t_cut, tol * scale, 44);

  const cd log_jump =
      std::log(cd(t_cut, -eps)) - std::log(cd(-t_cut, -eps));
  const cd pole_weight = 2.0 * t_cut + cd(0.0, eps) * log_jump;
  const cd inv_2pii = 1.0 / cd(0.0, 2.0 * M_PI);

  MatrixXcd result_tilde = inv_2pii * (smooth + pole_weight * derivative);

  ManyBodyOperator out{b.n, MatrixXcd(dim, dim), 1, b.n};
  out.matrix.real() = ctx.basis() * result_tilde.real() * ctx.basis().transpose();
  out.matrix.imag() = ctx.basis() * result_tilde.imag() * ctx.basis().transpose();

  // Constant part of the orbit: B itself times the scalar smearing weight,
  // known in closed half-line form.
  const double constant_weight = gaussian_halfline_rhs(0.0, alpha, eps);
  out.matrix += constant_weight * b.matrix;
  return out;
}

std::complex<double> ground_correlation(const EvolutionContext& ctx,
                                        const ManyBodyOperator& a,
                                        const ManyBodyOperator& b) {
  if (a.dim() != ctx.dim() || b.dim() != ctx.dim())
    throw config_error("ground_correlation: operator dimension mismatch");
  if (ctx.ground_degenerate())
    throw degeneracy_error("ground state degeneracy: gap " +
                           std::to_string(ctx.energy_gap()));

  const VectorXcd psi = ctx.ground_vector().cast<cd>();
  const VectorXcd b_psi = b.matrix * psi;
  const cd joint = psi.dot(a.matrix * b_psi);
  const cd mean_a = psi.dot(a.matrix * psi);
  const cd mean_b = psi.dot(b_psi);
  return joint - mean_a * mean_b;
}

FermiExpansion c_expansion(const std::vector<ManyBodyOperator>& c_ops,
                           const Eigen::MatrixXcd& op) {
  const int n = static_cast<int>(c_ops.size());
  FermiExpansion out;
  out.on_c.resize(n);
  out.on_c_dagger.resize(n);
  const double norm = 2.0 / static_cast<double>(op.rows());
  for (int k = 0; k < n; ++k) {
    const MatrixXcd& c = c_ops[k].matrix;
    out.on_c[k] = norm * c.conjugate().cwiseProduct(op).sum();
    out.on_c_dagger[k] = norm * c.transpose().cwiseProduct(op).sum();
  }
  return out;
}

}  // namespace xychain
