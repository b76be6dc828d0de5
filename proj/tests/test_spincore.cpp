#include "doctest.h"

#include "donormag/constants.hpp"
#include "donormag/errors.hpp"
#include "donormag/spincore.hpp"

#include <algorithm>
#include <cmath>

using namespace donormag;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

// Total angular momentum F^2 = (S + I)^2 built independently of the
// Hamiltonian code path.
Eigen::MatrixXd total_f_squared(const SpinSpecies& sp) {
  const auto s = spin_operators(sp.S);
  const auto n = spin_operators(sp.I);
  const int de = sp.electron_dim(), dn = sp.nuclear_dim();
  const Eigen::MatrixXd Ie = Eigen::MatrixXd::Identity(de, de), In = Eigen::MatrixXd::Identity(dn, dn);
  auto kron = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
      for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
  };
  const Eigen::MatrixXd Fz = kron(s.z, In) + kron(Ie, n.z);
  const Eigen::MatrixXd Fp = kron(s.plus, In) + kron(Ie, n.plus);
  const Eigen::MatrixXd Fm = Fp.transpose();
  return Fz * Fz + 0.5 * (Fp * Fm + Fm * Fp);
}

}  // namespace

TEST_SUITE("spincore") {
  TEST_CASE("spin-1/2 operators are half the Pauli matrices") {
    const auto s = spin_operators(0.5);
    CHECK(s.z(0, 0) == 0.5);
    CHECK(s.z(1, 1) == -0.5);
    CHECK(s.x(0, 1) == doctest::Approx(0.5));
    CHECK(s.x(1, 0) == doctest::Approx(0.5));
    CHECK(s.x(0, 0) == 0.0);
    CHECK(s.y(0, 1).imag() == doctest::Approx(-0.5));
    CHECK(s.y(1, 0).imag() == doctest::Approx(0.5));
  }

  TEST_CASE("ladder coefficient for s = 9/2") {
    // <9/2|S+|7/2> = sqrt(9/2*11/2 - 7/2*9/2) = sqrt(99/4 - 63/4) = 3
    const auto s = spin_operators(4.5);
    CHECK(s.plus(0, 1) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(s.z(0, 0) == 4.5);
    CHECK(s.z(9, 9) == -4.5);
  }

  TEST_CASE("angular momentum algebra holds for several spins") {
    for (double sv : {0.0, 0.5, 1.0, 1.5, 4.5}) {
      const auto s = spin_operators(sv);
      const Eigen::MatrixXcd x = s.x.cast<std::complex<double>>();
      const Eigen::MatrixXcd z = s.z.cast<std::complex<double>>();
      // [S_x, S_y] = i S_z
      const Eigen::MatrixXcd comm = x * s.y - s.y * x;
      CHECK((comm - std::complex<double>(0, 1) * z).cwiseAbs().maxCoeff() < 1e-12);
      // S^2 = s(s+1)
      const Eigen::MatrixXcd s2 = x * x + s.y * s.y + z * z;
      const auto d = s2.rows();
      CHECK((s2 - sv * (sv + 1) * Eigen::MatrixXcd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  TEST_CASE("non-half-integer spin is rejected") {
    CHECK_THROWS_AS(spin_operators(0.3), std::invalid_argument);
    CHECK_THROWS_AS(spin_operators(-0.5), std::invalid_argument);
  }

  TEST_CASE("species validation") {
    CHECK_NOTHROW(bismuth().validate());
    CHECK(bismuth().dimension() == 20);
    CHECK(bare_spin_half().dimension() == 2);
    SpinSpecies bad = bismuth();
    bad.g = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = bismuth();
    bad.A_MHz = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = bismuth();
    bad.S = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = bismuth();
    bad.I = 0.7;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(bundled_species("Xx"), std::invalid_argument);
  }

  TEST_CASE("Hamiltonian is symmetric and traceless") {
    for (double B : {0.0, 0.2, 100.0, 800.0}) {
      const auto H = build_hamiltonian(bismuth(), FieldPoint(B));
      CHECK(H.rows() == 20);
      CHECK(max_abs(H - H.transpose()) == 0.0);
      CHECK(std::abs(H.trace()) < 1e-9);
    }
    CHECK_THROWS_AS(build_hamiltonian(bismuth(), FieldPoint(-1.0)), std::invalid_argument);
  }

  TEST_CASE("zero-field bismuth levels") {
    // E_F = (A/2)[F(F+1) - I(I+1) - S(S+1)]: F=4 -> -11A/4, F=5 -> +9A/4
    const double A = 1475.4;
    const auto es = eigensystem(build_hamiltonian(bismuth(), FieldPoint(0.0)));
    for (int k = 0; k < 9; ++k) CHECK(es.energies[k] == doctest::Approx(-4057.35).epsilon(1e-12));
    for (int k = 9; k < 20; ++k) CHECK(es.energies[k] == doctest::Approx(3319.65).epsilon(1e-12));
    CHECK(es.energies[19] - es.energies[0] == doctest::Approx(5.0 * A).epsilon(1e-12));
    CHECK(degeneracies(es.energies) == std::vector<int>{9, 11});
  }

  TEST_CASE("bare spin is pure Zeeman") {
    SpinSpecies sp{"bare", 0.5, 1.5, 2.0003, 0.0};
    const double B = 37.0;
    const double half = 0.5 * sp.g * constants::kBohrMHzPerMilliTesla * B;
    const auto es = eigensystem(build_hamiltonian(sp, FieldPoint(B)));
    for (int k = 0; k < 4; ++k) CHECK(es.energies[k] == doctest::Approx(-half));
    for (int k = 4; k < 8; ++k) CHECK(es.energies[k] == doctest::Approx(half));
  }

  TEST_CASE("electron Zeeman scale at 0.2 mT") {
    // 2.0003 x 13.996245 MHz/mT x 0.2 mT
    CHECK(bismuth().g * constants::kBohrMHzPerMilliTesla * 0.2 == doctest::Approx(5.599).epsilon(1e-4));
  }

  TEST_CASE("Hamiltonian commutes with F^2 at zero field") {
    const auto sp = bismuth();
    const auto H = build_hamiltonian(sp, FieldPoint(0.0));
    const auto F2 = total_f_squared(sp);
    CHECK(max_abs(H * F2 - F2 * H) <= 1e-9);
  }

  TEST_CASE("Breit-Rabi closed form") {
    SUBCASE("zero field reproduces the two manifolds") {
      const auto levels = breit_rabi_levels(bismuth(), FieldPoint(0.0));
      REQUIRE(levels.size() == 20);
      CHECK(levels.front() == doctest::Approx(-11.0 / 4.0 * 1475.4));
      CHECK(levels.back() == doctest::Approx(9.0 / 4.0 * 1475.4));
    }
    SUBCASE("A -> 0 reduces to Zeeman doublet") {
      SpinSpecies sp{"tiny", 0.5, 4.5, 2.0003, 1e-9};
      const double B = 300.0;
      const double half = 0.5 * sp.g * constants::kBohrMHzPerMilliTesla * B;
      const auto levels = breit_rabi_levels(sp, FieldPoint(B));
      CHECK(levels.front() == doctest::Approx(-half).epsilon(1e-9));
      CHECK(levels.back() == doctest::Approx(half).epsilon(1e-9));
      const auto exact = breit_rabi_levels(bare_spin_half(2.0003), FieldPoint(B));
      CHECK(exact.front() == doctest::Approx(-half));
    }
    SUBCASE("matches exact diagonalization over a field sweep") {
      const auto sp = bismuth();
      for (int k = 0; k <= 50; ++k) {
        const double B = 10.0 * k;
        const auto br = breit_rabi_levels(sp, FieldPoint(B));
        const auto es = eigensystem(build_hamiltonian(sp, FieldPoint(B)));
        double scale = 0.0, err = 0.0;
        for (int i = 0; i < 20; ++i) {
          scale = std::max(scale, std::abs(br[i]));
          err = std::max(err, std::abs(br[i] - es.energies[i]));
        }
        CHECK(err / scale <= 1e-8);
      }
    }
    SUBCASE("other nuclear spins") {
      for (double I : {0.5, 1.0, 1.5, 3.5}) {
        SpinSpecies sp{"x", 0.5, I, 2.0, 117.0};
        const auto br = breit_rabi_levels(sp, FieldPoint(3.7));
        const auto es = eigensystem(build_hamiltonian(sp, FieldPoint(3.7)));
        REQUIRE(br.size() == es.energies.size());
        for (std::size_t i = 0; i < br.size(); ++i) CHECK(br[i] == doctest::Approx(es.energies[i]).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("transition table for a bare spin") {
    const auto sp = bare_spin_half(2.0003);
    const double B = 100.0;
    const auto es = eigensystem(build_hamiltonian(sp, FieldPoint(B)));
    const auto table = transition_table(es, sp);
    REQUIRE(table.size() == 1);
    CHECK(table[0].allowed);
    CHECK(table[0].intensity == doctest::Approx(0.25));
    CHECK(table[0].frequency_MHz == doctest::Approx(sp.g * constants::kBohrMHzPerMilliTesla * B));
  }

  TEST_CASE("transition table rejects mismatched dimensions") {
    const auto es = eigensystem(build_hamiltonian(bare_spin_half(), FieldPoint(1.0)));
    CHECK_THROWS_AS(transition_table(es, bismuth()), std::invalid_argument);
  }

  TEST_CASE("bismuth electron-flip transitions at high field") {
    const auto sp = bismuth();
    for (double B : {600.0, 1000.0}) {
      const auto es = eigensystem(build_hamiltonian(sp, FieldPoint(B)));
      const auto table = transition_table(es, sp);
      double strongest = 0.0;
      for (const auto& t : table) {
        CHECK(t.frequency_MHz >= 0.0);
        CHECK(t.intensity >= 0.0);
        strongest = std::max(strongest, t.intensity);
      }
      const auto strong = std::count_if(table.begin(), table.end(),
                                        [&](const Transition& t) { return t.intensity >= 0.1 * strongest; });
      CHECK(strong == 10);
    }
  }

  TEST_CASE("lowest inter-manifold transition at 0.2 mT") {
    const auto sp = bismuth();
    const auto es = eigensystem(build_hamiltonian(sp, FieldPoint(0.2)));
    double lowest = 1e300;
    for (const auto& t : transition_table(es, sp)) {
      if (t.i < 9 && t.j >= 9) lowest = std::min(lowest, t.frequency_MHz);
    }
    // Zeeman corrections at 0.2 mT are of order g muB B ~ 5.6 MHz
    CHECK(std::abs(lowest - 7377.0) < 10.0);
  }

  TEST_CASE("resonance field of a bare spin") {
    const auto sp = bare_spin_half(2.0003);
    const double expected = 9600.0 / (2.0003 * constants::kBohrMHzPerMilliTesla);  // ~342.9 mT
    const auto lines = resonance_fields(sp, 9.6, {0.0, 1000.0, 2000, 1e-6, 1e-3});
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].B_mT == doctest::Approx(expected).epsilon(1e-6));
    CHECK(lines[0].g_eff == doctest::Approx(2.0003).epsilon(1e-6));
    CHECK(expected == doctest::Approx(342.9).epsilon(1e-3));
  }

  TEST_CASE("bismuth X-band spectrum has ten strong lines") {
    const auto lines = resonance_fields(bismuth(), 9.6);
    const auto strong = strong_lines(lines, 0.1);
    CHECK(strong.size() == 10);
    double lo = 1e300, hi = 0.0;
    for (const auto& l : strong) {
      lo = std::min(lo, l.intensity);
      hi = std::max(hi, l.intensity);
    }
    CHECK(hi / lo <= 2.0);
    for (std::size_t k = 1; k < strong.size(); ++k) CHECK(strong[k].B_mT > strong[k - 1].B_mT);
  }

  TEST_CASE("resonance search edge cases") {
    CHECK(resonance_fields(bare_spin_half(), 100.0, {0.0, 100.0, 200, 1e-6, 1e-3}).empty());
    CHECK_THROWS_AS(resonance_fields(bismuth(), 9.6, {100.0, 10.0, 200, 1e-6, 1e-3}), std::invalid_argument);
    CHECK_THROWS_AS(resonance_fields(bismuth(), -1.0), std::invalid_argument);
  }
}
