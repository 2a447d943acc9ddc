#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>
#include <complex>
#include <random>

#include "xychain/freefermion.hpp"

using namespace xychain;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using cd = std::complex<double>;

namespace {

ChainSpec random_chain(int n, std::uint64_t seed, bool anisotropic) {
  std::mt19937_64 rng(seed);
  const auto u = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  ChainSpec spec;
  spec.n = n;
  for (int j = 0; j + 1 < n; ++j) {
    spec.coupling.push_back(0.3 + u());
    spec.anisotropy.push_back(anisotropic ? u() - 0.5 : 0.0);
  }
  for (int j = 0; j < n; ++j) spec.field.push_back(4.0 * u() - 1.0);
  if (!anisotropic)
    spec.coupling.assign(n - 1, 1.0);
  spec.validate();
  return spec;
}

}  // namespace

TEST_CASE("block assembly: single site") {
  ChainSpec spec = ChainSpec::uniform(1, 1.0, 0.0, 0.0);
  spec.field[0] = 0.7;
  const BlockHamiltonian block = build_block_hamiltonian(spec);
  CHECK(block.a_block(0, 0) == 0.7);
  CHECK(block.b_block(0, 0) == 0.0);
  CHECK(block.m(0, 0) == 0.7);
  CHECK(block.m(1, 1) == -0.7);
  CHECK(block.m(0, 1) == 0.0);
}

TEST_CASE("block assembly: two sites, isotropic and anisotropic") {
  const BlockHamiltonian iso =
      build_block_hamiltonian(ChainSpec::uniform(2, 1.0, 0.0, 0.0));
  MatrixXd expected_a(2, 2);
  expected_a << 0, -1, -1, 0;
  CHECK((iso.a_block - expected_a).cwiseAbs().maxCoeff() == 0.0);
  CHECK(iso.b_block.cwiseAbs().maxCoeff() == 0.0);
  CHECK(iso.m.topRightCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);

  const BlockHamiltonian aniso =
      build_block_hamiltonian(ChainSpec::uniform(2, 1.0, 0.5, 0.0));
  CHECK(aniso.b_block(0, 1) == -0.5);  // -mu_1 gamma_1 above the diagonal
  CHECK(aniso.b_block(1, 0) == 0.5);
}

TEST_CASE("block structure invariants on random chains") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const ChainSpec spec = random_chain(9, seed, true);
    const BlockHamiltonian block = build_block_hamiltonian(spec);
    const int n = spec.n;
    CHECK((block.a_block - block.a_block.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((block.b_block + block.b_block.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((block.m - block.m.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((block.m.topLeftCorner(n, n) - block.a_block).cwiseAbs().maxCoeff() == 0.0);
    CHECK((block.m.bottomRightCorner(n, n) + block.a_block).cwiseAbs().maxCoeff() ==
          0.0);
    // tridiagonal pattern
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        if (std::abs(r - c) > 1) {
          CHECK(block.a_block(r, c) == 0.0);
          CHECK(block.b_block(r, c) == 0.0);
        }
      }
  }
}

TEST_CASE("tight-binding reorder") {
  const BlockHamiltonian single =
      build_block_hamiltonian(ChainSpec::uniform(1, 1.0, 0.0, 0.3));
  CHECK((reorder_tight_binding(single) - single.m).cwiseAbs().maxCoeff() == 0.0);

  const BlockHamiltonian two =
      build_block_hamiltonian(ChainSpec::uniform(2, 1.0, 0.0, 0.0));
  const MatrixXd reordered = reorder_tight_binding(two);
  MatrixXd expected(4, 4);
  // diagonal blocks nu J vanish; the hopping block is -S(0) = -diag(1,-1)
  expected << 0, 0, -1, 0,
              0, 0, 0, 1,
              -1, 0, 0, 0,
              0, 1, 0, 0;
  CHECK((reordered - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reorder is a similarity transform") {
  const ChainSpec spec = random_chain(5, 21, true);
  const BlockHamiltonian block = build_block_hamiltonian(spec);
  const MatrixXd reordered = reorder_tight_binding(block);

  Eigen::SelfAdjointEigenSolver<MatrixXd> original(block.m);
  Eigen::SelfAdjointEigenSolver<MatrixXd> moved(reordered);
  CHECK((original.eigenvalues() - moved.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);

  // 2x2 block content: nu_j J on the diagonal, -mu_j S(gamma_j) above it
  for (int j = 0; j < spec.n; ++j) {
    CHECK(reordered(2 * j, 2 * j) == doctest::Approx(spec.field[j]));
    CHECK(reordered(2 * j + 1, 2 * j + 1) == doctest::Approx(-spec.field[j]));
  }
  for (int j = 0; j + 1 < spec.n; ++j) {
    CHECK(reordered(2 * j, 2 * j + 2) == doctest::Approx(-spec.coupling[j]));
    CHECK(reordered(2 * j, 2 * j + 3) ==
          doctest::Approx(-spec.coupling[j] * spec.anisotropy[j]));
    CHECK(reordered(2 * j + 1, 2 * j + 2) ==
          doctest::Approx(spec.coupling[j] * spec.anisotropy[j]));
    CHECK(reordered(2 * j + 1, 2 * j + 3) == doctest::Approx(spec.coupling[j]));
  }
}

TEST_CASE("diagonalize single site") {
  ChainSpec spec = ChainSpec::uniform(1, 1.0, 0.0, 0.0);
  spec.field[0] = 0.7;
  const BlockHamiltonian block = build_block_hamiltonian(spec);
  for (DiagPath path : {DiagPath::IsotropicEigen, DiagPath::AnisotropicSvd}) {
    const FermionDiagonalization diag = diagonalize(block, path);
    CHECK(diag.mode_energies[0] == doctest::Approx(0.7));
    CHECK((diag.w - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("diagonalize two-site chain on both paths") {
  const BlockHamiltonian block =
      build_block_hamiltonian(ChainSpec::uniform(2, 1.0, 0.0, 0.0));

  const FermionDiagonalization iso = diagonalize(block, DiagPath::IsotropicEigen);
  CHECK(iso.mode_energies[0] == doctest::Approx(-1.0));
  CHECK(iso.mode_energies[1] == doctest::Approx(1.0));

  const FermionDiagonalization aniso = diagonalize(block, DiagPath::AnisotropicSvd);
  CHECK(aniso.mode_energies[0] == doctest::Approx(1.0));
  CHECK(aniso.mode_energies[1] == doctest::Approx(1.0));
  CHECK(aniso.energy_sum == doctest::Approx(2.0));
}

TEST_CASE("isotropic path rejects pairing") {
  const BlockHamiltonian block =
      build_block_hamiltonian(ChainSpec::uniform(3, 1.0, 0.4, 0.0));
  CHECK_THROWS_AS(diagonalize(block, DiagPath::IsotropicEigen), config_error);
}

TEST_CASE("orthogonality and diagonalization residuals") {
  for (int n : {2, 7, 24, 60}) {
    for (bool anisotropic : {false, true}) {
      const ChainSpec spec = random_chain(n, 100 + n, anisotropic);
      const BlockHamiltonian block = build_block_hamiltonian(spec);
      const DiagPath path =
          anisotropic ? DiagPath::AnisotropicSvd : DiagPath::IsotropicEigen;
      const FermionDiagonalization diag = diagonalize(block, path);

      const double orth = (diag.w * diag.w.transpose() -
                           MatrixXd::Identity(2 * n, 2 * n)).cwiseAbs().maxCoeff();
      CHECK(orth < 1e-10);

      const double m_norm = diag.mode_energies.cwiseAbs().maxCoeff();
      const double resid = (diag.w * block.m * diag.w.transpose() -
                            diag.mode_diagonal()).cwiseAbs().maxCoeff();
      CHECK(resid < 1e-8 * m_norm);

      if (anisotropic) {
        for (int l = 0; l < n; ++l) CHECK(diag.mode_energies[l] >= 0.0);
        for (int l = 0; l + 1 < n; ++l)
          CHECK(diag.mode_energies[l] <= diag.mode_energies[l + 1]);
      }
    }
  }
}

TEST_CASE("both paths agree on mode magnitudes") {
  const ChainSpec spec = random_chain(12, 77, false);
  const BlockHamiltonian block = build_block_hamiltonian(spec);
  const FermionDiagonalization iso = diagonalize(block, DiagPath::IsotropicEigen);
  const FermionDiagonalization aniso = diagonalize(block, DiagPath::AnisotropicSvd);
  Eigen::VectorXd iso_abs = iso.mode_energies.cwiseAbs();
  std::sort(iso_abs.data(), iso_abs.data() + iso_abs.size());
  CHECK((iso_abs - aniso.mode_energies).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("diagonalization is deterministic") {
  const ChainSpec spec = random_chain(10, 5, true);
  const BlockHamiltonian block = build_block_hamiltonian(spec);
  const FermionDiagonalization a = diagonalize(block, DiagPath::AnisotropicSvd);
  const FermionDiagonalization b = diagonalize(block, DiagPath::AnisotropicSvd);
  CHECK((a.w - b.w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("propagator at t = 0 and single site") {
  ChainSpec spec = ChainSpec::uniform(1, 1.0, 0.0, 0.0);
  spec.field[0] = 0.9;
  const FermionDiagonalization diag =
      diagonalize(build_block_hamiltonian(spec), DiagPath::IsotropicEigen);

  const MatrixXcd at_zero = propagator(diag, 0.0);
  CHECK((at_zero - MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);

  const double t = 1.37;
  const MatrixXcd prop = propagator(diag, t);
  CHECK(prop(0, 0).real() == doctest::Approx(std::cos(0.9 * t)));
  CHECK(prop(0, 0).imag() == doctest::Approx(-std::sin(0.9 * t)));
  CHECK(std::abs(prop(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("propagator of the flat two-site chain") {
  // A^2 = Id forces exp(-iAt) = cos(t) Id - i sin(t) A, so the hopping entry
  // is +i sin(t).
  const FermionDiagonalization diag = diagonalize(
      build_block_hamiltonian(ChainSpec::uniform(2, 1.0, 0.0, 0.0)),
      DiagPath::IsotropicEigen);
  for (double t : {0.3, 1.0, 2.5}) {
    const MatrixXcd prop = propagator(diag, t);
    CHECK(std::abs(prop(0, 1) - cd(0.0, std::sin(t))) < 1e-12);
    CHECK(std::abs(prop(0, 0) - cd(std::cos(t), 0.0)) < 1e-12);
  }
}

TEST_CASE("propagator unitarity and modulus symmetry") {
  for (bool anisotropic : {false, true}) {
    const ChainSpec spec = random_chain(14, 42, anisotropic);
    const FermionDiagonalization diag = diagonalize(
        build_block_hamiltonian(spec),
        anisotropic ? DiagPath::AnisotropicSvd : DiagPath::IsotropicEigen);
    for (double t : {0.5, 4.0, 33.0}) {
      const MatrixXcd prop = propagator(diag, t);
      for (int c = 0; c < prop.cols(); ++c)
        CHECK(std::abs(prop.col(c).norm() - 1.0) < 1e-10);
      CHECK((prop - prop.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("isotropic block structure: anomalous entries vanish") {
  const ChainSpec spec = random_chain(9, 3, false);
  const FermionDiagonalization diag =
      diagonalize(build_block_hamiltonian(spec), DiagPath::IsotropicEigen);
  const MatrixXcd prop = propagator(diag, 2.3);
  CHECK(prop.topRightCorner(9, 9).cwiseAbs().maxCoeff() == 0.0);

  const MatrixXcd rows = propagator_rows(diag, 2.3, {1, 5, 9});
  CHECK(rows.rightCols(9).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("propagator_rows match the full propagator") {
  for (bool anisotropic : {false, true}) {
    const ChainSpec spec = random_chain(11, 8, anisotropic);
    const FermionDiagonalization diag = diagonalize(
        build_block_hamiltonian(spec),
        anisotropic ? DiagPath::AnisotropicSvd : DiagPath::IsotropicEigen);
    const std::vector<int> sites{1, 4, 11};
    for (double t : {0.7, 12.0}) {
      const MatrixXcd full = propagator(diag, t);
      const MatrixXcd rows = propagator_rows(diag, t, sites);
      for (size_t r = 0; r < sites.size(); ++r)
        CHECK((rows.row(r) - full.row(sites[r] - 1)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("eigencorrelator dominates propagator moduli") {
  for (bool anisotropic : {false, true}) {
    const ChainSpec spec = random_chain(10, 17, anisotropic);
    const FermionDiagonalization diag = diagonalize(
        build_block_hamiltonian(spec),
        anisotropic ? DiagPath::AnisotropicSvd : DiagPath::IsotropicEigen);
    const std::vector<int> sites{2, 6};
    const MatrixXd bound = eigencorrelator_rows(diag, sites);
    for (double t : {0.0, 0.9, 7.7, 140.0}) {
      const MatrixXd moduli = propagator_rows(diag, t, sites).cwiseAbs();
      CHECK((moduli - bound).maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("ground state of the flat two-site chain") {
  const FermionDiagonalization diag = diagonalize(
      build_block_hamiltonian(ChainSpec::uniform(2, 1.0, 0.0, 0.0)),
      DiagPath::IsotropicEigen);
  const GroundStateData gs = ground_state_data(diag);
  CHECK(gs.energy == doctest::Approx(-2.0));
  CHECK(gs.gap == doctest::Approx(2.0));
  CHECK_FALSE(gs.degenerate);
  REQUIRE(gs.occupation.size() == 2);
  CHECK(gs.occupation[0] == 1);
  CHECK(gs.occupation[1] == 0);

  MatrixXd expected(2, 2);
  expected << 0.5, 0.5, 0.5, 0.5;
  CHECK((gs.fermi_projection - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(two_point_function(gs, 1, 2) == doctest::Approx(0.5));
}

TEST_CASE("strong field empties the occupation") {
  std::mt19937_64 rng(404);
  ChainSpec spec = ChainSpec::uniform(8, 1.0, 0.0, 0.0);
  double field_sum = 0.0;
  for (double& v : spec.field) {
    v = 2.5 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
    field_sum += v;
  }
  const GroundStateData gs = ground_state_data(
      diagonalize(build_block_hamiltonian(spec), DiagPath::IsotropicEigen));
  for (int occ : gs.occupation) CHECK(occ == 0);
  CHECK(gs.energy == doctest::Approx(-field_sum).epsilon(1e-12));
  CHECK(gs.fermi_projection.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single strongly negative field") {
  ChainSpec spec = ChainSpec::uniform(1, 1.0, 0.0, 0.0);
  spec.field[0] = -3.0;
  const GroundStateData gs = ground_state_data(
      diagonalize(build_block_hamiltonian(spec), DiagPath::IsotropicEigen));
  CHECK(gs.energy == doctest::Approx(-3.0));
  CHECK(gs.gap == doctest::Approx(6.0));
  CHECK(gs.occupation[0] == 1);
}

TEST_CASE("projection is symmetric and idempotent") {
  const ChainSpec spec = random_chain(20, 9, false);
  const GroundStateData gs = ground_state_data(
      diagonalize(build_block_hamiltonian(spec), DiagPath::IsotropicEigen));
  const MatrixXd& p = gs.fermi_projection;
  CHECK((p - p.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-10);
  for (int j = 1; j <= spec.n; ++j) {
    const double diagval = two_point_function(gs, j, j);
    CHECK(diagval >= -1e-12);
    CHECK(diagval <= 1.0 + 1e-12);
  }
}

TEST_CASE("degenerate ground state is refused") {
  ChainSpec spec = ChainSpec::uniform(1, 1.0, 0.0, 0.0);  // zero field: zero mode
  const GroundStateData gs = ground_state_data(
      diagonalize(build_block_hamiltonian(spec), DiagPath::IsotropicEigen));
  CHECK(gs.degenerate);
  CHECK(gs.gap == doctest::Approx(0.0));
  CHECK_THROWS_AS(two_point_function(gs, 1, 1), degeneracy_error);
}

TEST_CASE("ground state data requires the isotropic path") {
  const FermionDiagonalization diag = diagonalize(
      build_block_hamiltonian(ChainSpec::uniform(3, 1.0, 0.2, 0.4)),
      DiagPath::AnisotropicSvd);
  CHECK_THROWS_AS(ground_state_data(diag), config_error);
}
