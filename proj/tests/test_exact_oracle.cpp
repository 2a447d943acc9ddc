#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/SVD>
#include <complex>
#include <random>

#include "xychain/exact_oracle.hpp"
#include "xychain/freefermion.hpp"
#include "xychain/quadrature.hpp"

using namespace xychain;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using cd = std::complex<double>;

namespace {

ChainSpec random_chain(int n, std::uint64_t seed, bool anisotropic) {
  std::mt19937_64 rng(seed);
  const auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  ChainSpec spec;
  spec.n = n;
  for (int j = 0; j + 1 < n; ++j) {
    spec.coupling.push_back(0.4 + u());
    spec.anisotropy.push_back(anisotropic ? u() - 0.5 : 0.0);
  }
  for (int j = 0; j < n; ++j) spec.field.push_back(4.0 * u());
  spec.validate();
  return spec;
}

MatrixXcd random_operator(long dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5; };
  MatrixXcd m(dim, dim);
  for (long r = 0; r < dim; ++r)
    for (long c = 0; c < dim; ++c) m(r, c) = cd(u(), u());
  return m;
}

// Eq-3.5-style fermionic assembly, used as an independent route to H.
MatrixXcd hamiltonian_from_c_operators(const ChainSpec& spec) {
  const int n = spec.n;
  const long dim = 1L << n;
  std::vector<MatrixXcd> c;
  for (int j = 1; j <= n; ++j) c.push_back(jordan_wigner_c(j, n).matrix);
  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  for (int j = 0; j + 1 < n; ++j) {
    const MatrixXcd hop = c[j].adjoint() * c[j + 1] + c[j + 1].adjoint() * c[j];
    const MatrixXcd pairing =
        c[j] * c[j + 1] + c[j + 1].adjoint() * c[j].adjoint();
    h += 2.0 * spec.coupling[j] * (-hop + spec.anisotropy[j] * pairing);
  }
  for (int j = 0; j < n; ++j)
    h += spec.field[j] * (2.0 * c[j].adjoint() * c[j] -
                          MatrixXcd::Identity(dim, dim));
  return h;
}

// Quadratic form C^* M C with C = (c_1..c_n, c_1^*..c_n^*).
MatrixXcd quadratic_form(const ChainSpec& spec) {
  const int n = spec.n;
  const long dim = 1L << n;
  const BlockHamiltonian block = build_block_hamiltonian(spec);
  std::vector<MatrixXcd> ops;
  for (int j = 1; j <= n; ++j) ops.push_back(jordan_wigner_c(j, n).matrix);
  for (int j = 1; j <= n; ++j) ops.push_back(ops[j - 1].adjoint());
  MatrixXcd h = MatrixXcd::Zero(dim, dim);
  for (int p = 0; p < 2 * n; ++p)
    for (int q = 0; q < 2 * n; ++q) {
      const double w = block.m(p, q);
      if (w != 0.0) h += w * ops[p].adjoint() * ops[q];
    }
  return h;
}

}  // namespace

TEST_CASE("pauli algebra") {
  const int n = 3;
  for (int site = 1; site <= n; ++site)
    for (char axis : {'x', 'y', 'z'}) {
      const ManyBodyOperator op = pauli(site, axis, n);
      const long dim = op.dim();
      CHECK((op.matrix * op.matrix - MatrixXcd::Identity(dim, dim))
                .cwiseAbs()
                .maxCoeff() == 0.0);
      CHECK((op.matrix - op.matrix.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    }

  // disjoint supports commute
  const ManyBodyOperator x1 = pauli(1, 'x', 2);
  const ManyBodyOperator y2 = pauli(2, 'y', 2);
  CHECK(commutator_norm(x1, y2) == 0.0);
  CHECK(x1.disjoint_from(y2));

  // sigma^x sigma^y = i sigma^z at one site
  const ManyBodyOperator x = pauli(1, 'x', 1);
  const ManyBodyOperator y = pauli(1, 'y', 1);
  const ManyBodyOperator z = pauli(1, 'z', 1);
  CHECK((x.matrix * y.matrix - cd(0.0, 1.0) * z.matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK(commutator_norm(x, y) == doctest::Approx(2.0));

  CHECK_THROWS_AS(pauli(4, 'x', 3), config_error);
  CHECK_THROWS_AS(pauli(1, 'w', 3), config_error);
}

TEST_CASE("raising, lowering and matrix units") {
  const int n = 2;
  const ManyBodyOperator a = lowering(1, n);
  const ManyBodyOperator ad = raising(1, n);
  CHECK((ad.matrix - a.matrix.adjoint()).cwiseAbs().maxCoeff() == 0.0);

  // a = (sigma^x - i sigma^y) / 2
  const MatrixXcd built =
      0.5 * (pauli(1, 'x', n).matrix - cd(0, 1) * pauli(1, 'y', n).matrix);
  CHECK((a.matrix - built).cwiseAbs().maxCoeff() == 0.0);

  // sigma^z = 2 a^* a - 1
  const MatrixXcd z = 2.0 * ad.matrix * a.matrix -
                      MatrixXcd::Identity(a.dim(), a.dim());
  CHECK((z - pauli(1, 'z', n).matrix).cwiseAbs().maxCoeff() == 0.0);

  // matrix units span the single-site algebra
  const ManyBodyOperator e11 = matrix_unit(1, 1, 1, n);
  const ManyBodyOperator e12 = matrix_unit(1, 1, 2, n);
  const ManyBodyOperator e21 = matrix_unit(1, 2, 1, n);
  CHECK((e11.matrix - ad.matrix * a.matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK((e12.matrix - ad.matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK((e21.matrix - a.matrix).cwiseAbs().maxCoeff() == 0.0);

  const ManyBodyOperator via_kind = observable(ObservableKind::NumberOcc, 1, n);
  CHECK((via_kind.matrix - e11.matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("jordan-wigner operators") {
  CHECK((jordan_wigner_c(1, 4).matrix - lowering(1, 4).matrix).cwiseAbs().maxCoeff() ==
        0.0);

  const int n = 5;
  std::vector<ManyBodyOperator> cs;
  for (int j = 1; j <= n; ++j) cs.push_back(jordan_wigner_c(j, n));
  const long dim = cs[0].dim();

  double car = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      MatrixXcd mixed = cs[j].matrix * cs[k].matrix.adjoint() +
                        cs[k].matrix.adjoint() * cs[j].matrix;
      if (j == k) mixed -= MatrixXcd::Identity(dim, dim);
      car = std::max(car, operator_norm(mixed));
      car = std::max(car, operator_norm(MatrixXcd(
                              cs[j].matrix * cs[k].matrix +
                              cs[k].matrix * cs[j].matrix)));
    }
  CHECK(car < 1e-12);

  // vectorized form: C_p C_q^* + C_{s(q)} C_{s(p)}^* = delta_{pq}
  std::vector<MatrixXcd> all;
  for (int j = 0; j < n; ++j) all.push_back(cs[j].matrix);
  for (int j = 0; j < n; ++j) all.push_back(cs[j].matrix.adjoint());
  const auto swapped = [&](int p) { return p < n ? p + n : p - n; };
  double vec_residual = 0.0;
  for (int p = 0; p < 2 * n; ++p)
    for (int q = 0; q < 2 * n; ++q) {
      MatrixXcd sum = all[p] * all[q].adjoint() +
                      all[swapped(q)] * all[swapped(p)].adjoint();
      if (p == q) sum -= MatrixXcd::Identity(dim, dim);
      vec_residual = std::max(vec_residual, sum.cwiseAbs().maxCoeff());
    }
  CHECK(vec_residual < 1e-12);

  // c_j^* c_j = a_j^* a_j
  for (int j = 1; j <= n; ++j) {
    const MatrixXcd lhs = cs[j - 1].matrix.adjoint() * cs[j - 1].matrix;
    const MatrixXcd rhs = raising(j, n).matrix * lowering(j, n).matrix;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("hamiltonian assembly and identities") {
  ChainSpec spec = ChainSpec::uniform(1, 1.0, 0.0, 0.0);
  spec.field[0] = 1.3;
  const EvolutionContext tiny(spec, 10);
  CHECK(tiny.energies()[0] == doctest::Approx(-1.3));
  CHECK(tiny.energies()[1] == doctest::Approx(1.3));

  const EvolutionContext two(ChainSpec::uniform(2, 1.0, 0.0, 0.0), 10);
  CHECK(two.energies()[0] == doctest::Approx(-2.0));
  CHECK(two.energies()[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(two.energies()[2] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(two.energies()[3] == doctest::Approx(2.0));

  for (std::uint64_t seed : {31u, 32u}) {
    const ChainSpec random = random_chain(4, seed, true);
    const EvolutionContext ctx(random, 10);
    const MatrixXcd from_c = hamiltonian_from_c_operators(random);
    CHECK((ctx.hamiltonian().cast<cd>() - from_c).cwiseAbs().maxCoeff() < 1e-12);
    const MatrixXcd quad = quadratic_form(random);
    CHECK((ctx.hamiltonian().cast<cd>() - quad).cwiseAbs().maxCoeff() < 1e-12);
  }

  CHECK_THROWS_AS(EvolutionContext(ChainSpec::uniform(7, 1, 0, 0), 6), capacity_error);
}

TEST_CASE("many-body ground energy matches the free-fermion sum") {
  const ChainSpec spec = random_chain(6, 77, true);
  const EvolutionContext ctx(spec, 10);
  const FermionDiagonalization diag =
      diagonalize(build_block_hamiltonian(spec), DiagPath::AnisotropicSvd);
  CHECK(ctx.ground_energy() ==
        doctest::Approx(-diag.mode_energies.sum()).epsilon(1e-8));
}

TEST_CASE("heisenberg evolution basics") {
  const ChainSpec spec = random_chain(4, 5, true);
  const EvolutionContext ctx(spec, 10);
  const ManyBodyOperator op{4, random_operator(16, 9), 1, 4};

  const ManyBodyOperator frozen = heisenberg_evolve(ctx, op, 0.0);
  CHECK((frozen.matrix - op.matrix).cwiseAbs().maxCoeff() == 0.0);

  for (double t : {0.4, 3.0}) {
    const ManyBodyOperator moved = heisenberg_evolve(ctx, op, t);
    CHECK(operator_norm(moved.matrix) ==
          doctest::Approx(operator_norm(op.matrix)).epsilon(1e-9));
  }

  // real Hamiltonian: the commutator norm profile is even in t
  const ManyBodyOperator a = pauli(1, 'z', 4);
  const ManyBodyOperator b = pauli(3, 'z', 4);
  for (double t : {0.3, 1.1}) {
    const double forward = commutator_norm(heisenberg_evolve(ctx, a, t), b);
    const double backward = commutator_norm(heisenberg_evolve(ctx, a, -t), b);
    CHECK(forward == doctest::Approx(backward).epsilon(1e-9));
  }
}

TEST_CASE("evolved c operators follow the one-body propagator") {
  const ChainSpec spec = random_chain(6, 123, true);
  const int n = spec.n;
  const EvolutionContext ctx(spec, 10);
  const FermionDiagonalization diag =
      diagonalize(build_block_hamiltonian(spec), DiagPath::AnisotropicSvd);

  std::vector<ManyBodyOperator> cs;
  for (int j = 1; j <= n; ++j) cs.push_back(jordan_wigner_c(j, n));

  double residual = 0.0;
  double coeff_residual = 0.0;
  for (double t : {0.1, 1.0, 10.0}) {
    // the one-body argument runs twice as fast as the Heisenberg time
    const MatrixXcd rows = propagator_rows(diag, 2.0 * t, {1, 3, 6});
    const int probes[] = {1, 3, 6};
    for (int p = 0; p < 3; ++p) {
      const int j = probes[p];
      const ManyBodyOperator evolved = heisenberg_evolve(ctx, cs[j - 1], t);
      MatrixXcd expansion = MatrixXcd::Zero(evolved.dim(), evolved.dim());
      for (int k = 0; k < n; ++k)
        expansion += rows(p, k) * cs[k].matrix +
                     rows(p, n + k) * cs[k].matrix.adjoint();
      residual = std::max(residual,
                          (evolved.matrix - expansion).cwiseAbs().maxCoeff());

      const FermiExpansion coeffs = c_expansion(cs, evolved.matrix);
      for (int k = 0; k < n; ++k) {
        coeff_residual =
            std::max(coeff_residual, std::abs(coeffs.on_c[k] - rows(p, k)));
        coeff_residual = std::max(coeff_residual,
                                  std::abs(coeffs.on_c_dagger[k] - rows(p, n + k)));
      }
    }
  }
  CHECK(residual < 1e-8);
  CHECK(coeff_residual < 1e-8);
}

TEST_CASE("commutator norm bounds and operator norm backends") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 3; ++trial) {
    const MatrixXcd a = random_operator(16, rng());
    const MatrixXcd b = random_operator(16, rng());
    const ManyBodyOperator oa{4, a, 1, 4};
    const ManyBodyOperator ob{4, b, 1, 4};
    CHECK(commutator_norm(oa, ob) <=
          2.0 * operator_norm(a) * operator_norm(b) + 1e-12);
  }

  // power-iteration branch agrees with dense SVD
  const MatrixXcd wide = random_operator(520, 1234);
  Eigen::BDCSVD<MatrixXcd> svd(wide);
  CHECK(operator_norm(wide) ==
        doctest::Approx(svd.singularValues()[0]).epsilon(1e-8));
  CHECK(operator_norm(MatrixXcd::Zero(8, 8)) == 0.0);
}

TEST_CASE("ground correlations") {
  const EvolutionContext flat(ChainSpec::uniform(2, 1.0, 0.0, 0.0), 10);
  // the flat two-site chain has gap 2: correlations are defined
  const ManyBodyOperator cdag1 = observable(ObservableKind::FermiCDagger, 1, 2);
  const ManyBodyOperator c2 = observable(ObservableKind::FermiC, 2, 2);
  const cd corr = ground_correlation(flat, cdag1, c2);
  CHECK(corr.real() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(corr.imag()) < 1e-12);

  CHECK(std::abs(ground_correlation(flat, cdag1, identity_op(2))) < 1e-14);

  // strong field: product ground state, trivial sigma^z correlations
  std::mt19937_64 rng(2024);
  ChainSpec strong = ChainSpec::uniform(6, 1.0, 0.0, 0.0);
  for (double& v : strong.field)
    v = 2.5 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const EvolutionContext ctx(strong, 10);
  CHECK(std::abs(ground_correlation(ctx, pauli(2, 'z', 6), pauli(5, 'z', 6))) <
        1e-10);

  // zero field on one site: degenerate ground state is refused
  const EvolutionContext degenerate(ChainSpec::uniform(1, 1.0, 0.0, 0.0), 10);
  CHECK_THROWS_AS(
      ground_correlation(degenerate, pauli(1, 'z', 1), pauli(1, 'z', 1)),
      degeneracy_error);
}

TEST_CASE("two-point function agrees with the exact oracle") {
  const ChainSpec spec = random_chain(6, 2718, false);
  const EvolutionContext ctx(spec, 10);
  const GroundStateData gs = ground_state_data(
      diagonalize(build_block_hamiltonian(spec), DiagPath::IsotropicEigen));
  for (int j = 1; j <= 6; ++j)
    for (int k = j; k <= 6; ++k) {
      const cd oracle = ctx.ground_vector().cast<cd>().dot(
          observable(ObservableKind::FermiCDagger, j, 6).matrix *
          (observable(ObservableKind::FermiC, k, 6).matrix *
           ctx.ground_vector().cast<cd>()));
      CHECK(std::abs(oracle - cd(two_point_function(gs, j, k), 0.0)) < 1e-8);
    }
}

TEST_CASE("gaussian half-line identity") {
  // independent quadratures of the two sides of the smearing identity
  for (double energy : {0.5, 1.0, 2.0})
    for (double alpha : {0.5, 1.0})
      for (double eps : {0.1, 0.01}) {
        const cd lhs = gaussian_halfline_lhs(energy, alpha, eps);
        const double rhs = gaussian_halfline_rhs(energy, alpha, eps);
        CHECK(std::abs(lhs - cd(rhs, 0.0)) < 1e-8);
      }
  CHECK_THROWS_AS(gaussian_halfline_lhs(1.0, -1.0, 0.1), config_error);
}

TEST_CASE("quasilocal approximation of the identity is scalar") {
  const EvolutionContext ctx(random_chain(3, 8, false), 10);
  const ManyBodyOperator id = identity_op(3);
  const ManyBodyOperator smeared = quasilocal_approx(ctx, id, 1.0, 0.05);
  const double weight = gaussian_halfline_rhs(0.0, 1.0, 0.05);
  CHECK((smeared.matrix - weight * id.matrix).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("quasilocal three-term split reproduces the correlation") {
  std::mt19937_64 rng(31337);
  ChainSpec spec = ChainSpec::uniform(4, 1.0, 0.0, 0.0);
  for (double& v : spec.field)
    v = 1.5 + 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const EvolutionContext ctx(spec, 10);
  REQUIRE_FALSE(ctx.ground_degenerate());

  const ManyBodyOperator a = pauli(1, 'z', 4);
  ManyBodyOperator b = pauli(4, 'z', 4);
  const VectorXcd psi = ctx.ground_vector().cast<cd>();
  const cd b_mean = psi.dot(b.matrix * psi);
  b.matrix -= b_mean * MatrixXcd::Identity(b.dim(), b.dim());

  const double alpha = 0.8, eps = 1e-3;
  const ManyBodyOperator smeared = quasilocal_approx(ctx, b, alpha, eps);

  const cd direct = psi.dot(a.matrix * (b.matrix * psi));
  const cd term1 = psi.dot(a.matrix * ((b.matrix - smeared.matrix) * psi));
  const cd term2 = psi.dot(smeared.matrix * (a.matrix * psi));
  const cd term3 = psi.dot((a.matrix * smeared.matrix -
                            smeared.matrix * a.matrix) * psi);
  CHECK(std::abs(direct - (term1 + term2 + term3)) < 1e-9);
}

TEST_CASE("quasilocal remainder shrinks with eps under the gap envelope") {
  std::mt19937_64 rng(909);
  ChainSpec spec = ChainSpec::uniform(4, 1.0, 0.0, 0.0);
  for (double& v : spec.field)
    v = 1.5 + 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
  const EvolutionContext ctx(spec, 10);
  const double gap = ctx.energy_gap();
  REQUIRE(gap > 0.1);

  ManyBodyOperator b = pauli(4, 'z', 4);
  const VectorXcd psi = ctx.ground_vector().cast<cd>();
  const cd b_mean = psi.dot(b.matrix * psi);
  b.matrix -= b_mean * MatrixXcd::Identity(b.dim(), b.dim());
  const double b_psi_norm = (b.matrix * psi).norm();

  const double alpha = 0.5;
  const double envelope = 0.5 * std::exp(-gap * gap / (4.0 * alpha)) * b_psi_norm;

  double previous = std::numeric_limits<double>::infinity();
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const ManyBodyOperator smeared = quasilocal_approx(ctx, b, alpha, eps);
    const VectorXcd remainder = (b.matrix - smeared.matrix) * psi;
    const double projected = std::abs(psi.dot(remainder));
    CHECK(projected <= previous * (1.0 + 1e-9));
    previous = projected;
  }
  // by eps = 1e-4 the eps-dependent remainder is negligible against the
  // gaussian gap factor
  CHECK(previous <= envelope * 1.01 + 1e-12);

  // Richardson-style stability at the production eps
  const ManyBodyOperator fine = quasilocal_approx(ctx, b, alpha, 1e-8);
  const ManyBodyOperator finer = quasilocal_approx(ctx, b, alpha, 5e-9);
  CHECK((fine.matrix - finer.matrix).cwiseAbs().maxCoeff() < 1e-7);
}
