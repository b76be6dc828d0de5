#include "doctest.h"

#include "donormag/errors.hpp"
#include "donormag/spincore.hpp"

#include <cmath>
#include <random>

using namespace donormag;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = u(rng);
  return m;
}

void check_decomposition(const Eigen::MatrixXd& H, const EigenSystem& es) {
  const int n = static_cast<int>(H.rows());
  REQUIRE(es.dimension == n);
  const Eigen::MatrixXd& V = es.vectors;
  CHECK((V.transpose() * V - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-10);
  const Eigen::VectorXd E = Eigen::Map<const Eigen::VectorXd>(es.energies.data(), n);
  const double scale = std::max(H.cwiseAbs().maxCoeff(), 1e-300);
  CHECK((V * E.asDiagonal() * V.transpose() - H).cwiseAbs().maxCoeff() / scale <= 1e-8);
  for (int k = 1; k < n; ++k) CHECK(es.energies[k] >= es.energies[k - 1]);
}

}  // namespace

TEST_SUITE("jacobi") {
  TEST_CASE("diagonal input") {
    Eigen::MatrixXd H = Eigen::Vector3d(3.0, 1.0, 2.0).asDiagonal();
    const auto es = eigensystem(H);
    CHECK(es.energies == std::vector<double>{1.0, 2.0, 3.0});
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
    expected(1, 0) = expected(2, 1) = expected(0, 2) = 1.0;
    CHECK((es.vectors - expected).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("identity ordering of diag(1,2,3)") {
    const auto es = eigensystem(Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal().toDenseMatrix());
    CHECK(es.energies == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(es.vectors.isIdentity(0.0));
  }

  TEST_CASE("random symmetric matrices against Eigen's solver") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 1 + trial % 20;
      const auto H = random_symmetric(n, rng);
      const auto es = eigensystem(H);
      check_decomposition(H, es);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(H);
      for (int k = 0; k < n; ++k) CHECK(es.energies[k] == doctest::Approx(ref.eigenvalues()(k)).epsilon(1e-10));
    }
  }

  TEST_CASE("spin Hamiltonians decompose cleanly") {
    for (double B : {0.0, 0.2, 55.0, 1000.0}) {
      const auto H = build_hamiltonian(bismuth(), FieldPoint(B));
      check_decomposition(H, eigensystem(H));
    }
  }

  TEST_CASE("degenerate clusters have a deterministic basis") {
    const auto H = build_hamiltonian(bismuth(), FieldPoint(0.0));
    const auto a = eigensystem(H);
    const auto b = eigensystem(H);
    CHECK((a.vectors - b.vectors).cwiseAbs().maxCoeff() == 0.0);
    // Largest component is positive in every vector.
    for (int k = 0; k < a.dimension; ++k) {
      Eigen::Index idx;
      a.vectors.col(k).cwiseAbs().maxCoeff(&idx);
      CHECK(a.vectors(idx, k) > 0.0);
    }
  }

  TEST_CASE("zero and empty matrices") {
    const auto es = eigensystem(Eigen::MatrixXd::Zero(4, 4));
    CHECK(es.energies == std::vector<double>(4, 0.0));
    CHECK(eigensystem(Eigen::MatrixXd(0, 0)).dimension == 0);
  }

  TEST_CASE("non-symmetric input is rejected") {
    Eigen::MatrixXd H(2, 2);
    H << 1.0, 2.0, 2.1, 1.0;
    CHECK_THROWS_AS(eigensystem(H), std::invalid_argument);
    CHECK_THROWS_AS(eigensystem(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
  }

  TEST_CASE("sweep cap reports the residual") {
    std::mt19937_64 rng(3);
    const auto H = random_symmetric(12, rng);
    try {
      eigensystem(H, JacobiOptions{1e-12, 1});
      FAIL("expected NumericalFailure");
    } catch (const NumericalFailure& e) {
      CHECK(e.residual() > 0.0);
    }
  }
}
