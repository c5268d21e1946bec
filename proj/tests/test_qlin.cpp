#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "qdemon/qlin.hpp"
#include "qdemon/rng.hpp"

using namespace qdemon;
using Catch::Matchers::WithinAbs;

namespace {

// Independent 2x2 route: eigenvalues of a Hermitian matrix from trace and
// determinant.
std::pair<double, double> eigenvalues_2x2(const Matrix2& m) {
  const double tr = trace(m).real();
  const double det = (m.at(0, 0) * m.at(1, 1) - m.at(0, 1) * m.at(1, 0)).real();
  const double disc = std::sqrt(tr * tr - 4.0 * det);
  return {(tr - disc) / 2.0, (tr + disc) / 2.0};
}

MeasurementSetting random_unit_setting(RandomStream& rs) {
  // isotropic via normal components from a crude 12-uniform sum
  auto gauss = [&rs] {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += rs.next_uniform();
    return s - 6.0;
  };
  std::array<double, 3> v{gauss(), gauss(), gauss()};
  const double n = bloch_norm(v);
  for (double& c : v) c /= n;
  return MeasurementSetting{v, 0};
}

}  // namespace

TEST_CASE("pauli_observable reproduces the standard matrices", "[qlin]") {
  const Matrix2 z = pauli_observable(setting_from_angle(0.0));
  CHECK(z.at(0, 0) == cplx(1.0, 0.0));
  CHECK(z.at(1, 1) == cplx(-1.0, 0.0));
  CHECK(z.at(0, 1) == cplx(0.0, 0.0));

  const Matrix2 x = pauli_observable(MeasurementSetting{{1.0, 0.0, 0.0}, 0});
  CHECK(x.at(0, 0) == cplx(0.0, 0.0));
  CHECK(x.at(0, 1) == cplx(1.0, 0.0));
  CHECK(x.at(1, 0) == cplx(1.0, 0.0));
}

TEST_CASE("pauli_observable of a diagonal direction has unit eigenvalues", "[qlin]") {
  const double r = 1.0 / std::numbers::sqrt2;
  const Matrix2 m = pauli_observable(MeasurementSetting{{r, 0.0, r}, 0});
  const auto [lo, hi] = eigenvalues_2x2(m);
  CHECK_THAT(lo, WithinAbs(-1.0, 1e-12));
  CHECK_THAT(hi, WithinAbs(1.0, 1e-12));
  const auto evs = hermitian_eigenvalues(m);
  CHECK_THAT(evs[0], WithinAbs(-1.0, 1e-12));
  CHECK_THAT(evs[1], WithinAbs(1.0, 1e-12));
}

TEST_CASE("pauli_observable rejects non-unit Bloch vectors", "[qlin]") {
  CHECK_THROWS_AS(pauli_observable(MeasurementSetting{{0.5, 0.0, 0.5}, 0}), std::invalid_argument);
  CHECK_THROWS_AS(pauli_observable(MeasurementSetting{{0.0, 0.0, 1.0 + 1e-6}, 0}),
                  std::invalid_argument);
}

TEST_CASE("pauli_observable is Hermitian and traceless for random directions", "[qlin]") {
  RandomStream rs(11, 0);
  for (int i = 0; i < 50; ++i) {
    const MeasurementSetting s = random_unit_setting(rs);
    const Matrix2 m = pauli_observable(s);
    CHECK_THAT(std::abs(trace(m)), WithinAbs(0.0, 1e-12));
    CHECK_THAT(std::abs(m.at(0, 1) - std::conj(m.at(1, 0))), WithinAbs(0.0, 1e-12));
    CHECK_THAT(m.at(0, 0).imag(), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("tensor uses first-factor-major ordering", "[qlin]") {
  const Qubit zero{{cplx(1.0, 0.0), cplx(0.0, 0.0)}};
  const Qubit one{{cplx(0.0, 0.0), cplx(1.0, 0.0)}};
  const double r = 1.0 / std::numbers::sqrt2;
  const Qubit plus{{cplx(r, 0.0), cplx(r, 0.0)}};

  const PairState zz = tensor(zero, zero);
  CHECK(zz.amps[0] == cplx(1.0, 0.0));
  CHECK(zz.amps[1] == cplx(0.0, 0.0));

  const PairState oz = tensor(one, zero);
  CHECK(oz.amps[2] == cplx(1.0, 0.0));
  CHECK(oz.amps[0] == cplx(0.0, 0.0));

  const PairState po = tensor(plus, one);
  CHECK_THAT(po.amps[1].real(), WithinAbs(r, 1e-12));
  CHECK_THAT(po.amps[3].real(), WithinAbs(r, 1e-12));
  CHECK_THAT(std::abs(po.amps[0]) + std::abs(po.amps[2]), WithinAbs(0.0, 1e-12));
  CHECK_THAT(po.norm_sq(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("expectation_joint on the shared pair follows cos(a - b)", "[qlin]") {
  const PairState phi = bell_phi_plus();
  CHECK_THAT(expectation_joint(phi, setting_from_angle(0.0), setting_from_angle(0.0)),
             WithinAbs(1.0, 1e-10));
  CHECK_THAT(expectation_joint(phi, setting_from_angle(0.0),
                               setting_from_angle(std::numbers::pi / 4)),
             WithinAbs(0.7071067811865476, 1e-10));
  CHECK_THAT(expectation_joint(phi, setting_from_angle(0.0), setting_from_angle(std::numbers::pi)),
             WithinAbs(-1.0, 1e-10));

  RandomStream rs(17, 0);
  for (int i = 0; i < 100; ++i) {
    const double ta = (rs.next_uniform() - 0.5) * 4.0 * std::numbers::pi;
    const double tb = (rs.next_uniform() - 0.5) * 4.0 * std::numbers::pi;
    CHECK_THAT(expectation_joint(phi, setting_from_angle(ta), setting_from_angle(tb)),
               WithinAbs(std::cos(ta - tb), 1e-10));
  }
}

TEST_CASE("eigenstate constructions and phase convention", "[qlin]") {
  const Qubit z_plus = eigenstate(setting_from_angle(0.0), Outcome::plus);
  CHECK_THAT(std::abs(z_plus.amps[0] - cplx(1.0, 0.0)), WithinAbs(0.0, 1e-12));
  CHECK_THAT(std::abs(z_plus.amps[1]), WithinAbs(0.0, 1e-12));

  const Qubit x_plus = eigenstate(MeasurementSetting{{1.0, 0.0, 0.0}, 0}, Outcome::plus);
  const double r = 1.0 / std::numbers::sqrt2;
  CHECK_THAT(std::abs(x_plus.amps[0] - cplx(r, 0.0)), WithinAbs(0.0, 1e-12));
  CHECK_THAT(std::abs(x_plus.amps[1] - cplx(r, 0.0)), WithinAbs(0.0, 1e-12));

  RandomStream rs(23, 0);
  for (int i = 0; i < 50; ++i) {
    const MeasurementSetting s = random_unit_setting(rs);
    for (Outcome sign : {Outcome::plus, Outcome::minus}) {
      const Qubit v = eigenstate(s, sign);
      CHECK_THAT(v.norm_sq(), WithinAbs(1.0, 1e-12));
      const Qubit hv = apply(pauli_observable(s), v);
      for (int c = 0; c < 2; ++c) {
        CHECK_THAT(std::abs(hv.amps[static_cast<std::size_t>(c)] -
                            static_cast<double>(value(sign)) * v.amps[static_cast<std::size_t>(c)]),
                   WithinAbs(0.0, 1e-12));
      }
      // first nonzero amplitude is real positive
      for (const cplx& a : v.amps) {
        if (std::abs(a) > 1e-12) {
          CHECK(a.real() > 0.0);
          CHECK_THAT(a.imag(), WithinAbs(0.0, 1e-12));
          break;
        }
      }
    }
  }
}

TEST_CASE("eigenstate at 60 degrees satisfies the eigen-equation", "[qlin]") {
  const MeasurementSetting s = setting_from_angle(std::numbers::pi / 3);
  const Qubit v = eigenstate(s, Outcome::minus);
  const Qubit hv = apply(pauli_observable(s), v);
  for (int c = 0; c < 2; ++c) {
    CHECK_THAT(std::abs(hv.amps[static_cast<std::size_t>(c)] + v.amps[static_cast<std::size_t>(c)]),
               WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("born_measure_single is deterministic on eigenstates", "[qlin]") {
  const auto [o, collapsed] = born_measure_single(eigenstate(setting_from_angle(0.0), Outcome::plus),
                                                  setting_from_angle(0.0), 0.999999999);
  CHECK(o == Outcome::plus);
  CHECK_THAT(std::abs(collapsed.amps[0] - cplx(1.0, 0.0)), WithinAbs(0.0, 1e-12));

  RandomStream rs(31, 0);
  for (int i = 0; i < 20; ++i) {
    const MeasurementSetting s = random_unit_setting(rs);
    const Qubit minus_state = eigenstate(s, Outcome::minus);
    // largest representable u still selects the minus branch: P(+1) snapped to 0
    const auto [om, cm] = born_measure_single(minus_state, s, 1.0 - 0x1.0p-53);
    CHECK(om == Outcome::minus);
    for (int c = 0; c < 2; ++c) {
      CHECK_THAT(std::abs(cm.amps[static_cast<std::size_t>(c)] -
                          minus_state.amps[static_cast<std::size_t>(c)]),
                 WithinAbs(0.0, 1e-12));
    }
  }
}

TEST_CASE("born_measure_single matches the analytic frequency", "[qlin][statistical]") {
  const double r = 1.0 / std::numbers::sqrt2;
  const Qubit plus{{cplx(r, 0.0), cplx(r, 0.0)}};
  const MeasurementSetting z = setting_from_angle(0.0);
  RandomStream rs(101, 7);
  long long hits = 0;
  const long long n = 1000000;
  for (long long i = 0; i < n; ++i) {
    if (born_measure_single(plus, z, rs.next_uniform()).first == Outcome::plus) ++hits;
  }
  CHECK_THAT(static_cast<double>(hits) / static_cast<double>(n), WithinAbs(0.5, 0.002));
}

TEST_CASE("born consistency for random states and settings", "[qlin][statistical]") {
  RandomStream setup(211, 0);
  for (int rep = 0; rep < 3; ++rep) {
    Qubit state{{cplx(setup.next_uniform() - 0.5, setup.next_uniform() - 0.5),
                 cplx(setup.next_uniform() - 0.5, setup.next_uniform() - 0.5)}};
    state = normalized(state);
    const MeasurementSetting s = random_unit_setting(setup);
    const double analytic = plus_probability(state, s);
    RandomStream rs(212, static_cast<std::uint64_t>(rep));
    const long long n = 1000000;
    long long hits = 0;
    for (long long i = 0; i < n; ++i) {
      if (born_measure_single(state, s, rs.next_uniform()).first == Outcome::plus) ++hits;
    }
    const double freq = static_cast<double>(hits) / static_cast<double>(n);
    CHECK_THAT(freq, WithinAbs(analytic, 4.0 / std::sqrt(static_cast<double>(n))));
  }
}

TEST_CASE("born_measure_joint yields equal outcomes on the shared pair at equal settings",
          "[qlin]") {
  const PairState phi = bell_phi_plus();
  RandomStream rs(41, 0);
  for (int i = 0; i < 1000; ++i) {
    const MeasurementSetting s = setting_from_angle(rs.next_uniform() * 2.0 * std::numbers::pi);
    const auto [a, b] = born_measure_joint(phi, s, s, rs.next_uniform(), rs.next_uniform());
    CHECK(a == b);
  }
}

TEST_CASE("born_measure_joint empirical correlator matches the expectation", "[qlin][statistical]") {
  const PairState phi = bell_phi_plus();
  const MeasurementSetting a = setting_from_angle(0.0);
  const MeasurementSetting b = setting_from_angle(std::numbers::pi / 4);
  const JointProbs jp = joint_probabilities(phi, a, b);
  RandomStream rs(51, 0);
  const long long n = 1000000;
  long long sum = 0;
  for (long long i = 0; i < n; ++i) {
    const auto [x, y] = sample_joint(jp, rs.next_uniform(), rs.next_uniform());
    sum += value(x) * value(y);
  }
  CHECK_THAT(static_cast<double>(sum) / static_cast<double>(n),
             WithinAbs(expectation_joint(phi, a, b), 0.002));
}

TEST_CASE("born_measure_joint on a product state is deterministic", "[qlin]") {
  const Qubit zero{{cplx(1.0, 0.0), cplx(0.0, 0.0)}};
  const PairState s = tensor(zero, zero);
  const MeasurementSetting z = setting_from_angle(0.0);
  const JointProbs jp = joint_probabilities(s, z, z);
  CHECK(jp.a_plus == 1.0);
  CHECK(jp.b_plus_given[0] == 1.0);
  const auto [a, b] = sample_joint(jp, 1.0 - 0x1.0p-53, 1.0 - 0x1.0p-53);
  CHECK(a == Outcome::plus);
  CHECK(b == Outcome::plus);
}

TEST_CASE("probability snapping", "[qlin]") {
  CHECK(snap_probability(1e-13) == 0.0);
  CHECK(snap_probability(-1e-15) == 0.0);
  CHECK(snap_probability(1.0 - 1e-13) == 1.0);
  CHECK(snap_probability(0.5) == 0.5);
}

TEST_CASE("states returned by operations stay normalized", "[qlin]") {
  RandomStream rs(61, 0);
  for (int i = 0; i < 30; ++i) {
    const MeasurementSetting s = random_unit_setting(rs);
    CHECK_THAT(eigenstate(s, Outcome::plus).norm_sq(), WithinAbs(1.0, 1e-12));
    const auto [o, collapsed] =
        born_measure_single(eigenstate(s, Outcome::plus), random_unit_setting(rs), rs.next_uniform());
    (void)o;
    CHECK_THAT(collapsed.norm_sq(), WithinAbs(1.0, 1e-12));
  }
  CHECK_THROWS_AS(require_normalized(Qubit{{cplx(1.0, 0.0), cplx(1.0, 0.0)}}),
                  std::invalid_argument);
}

TEST_CASE("hermitian_eigenvalues matches power-sum moments", "[qlin]") {
  // H = 0.3 σz⊗σz + 0.5 σx⊗σz - 0.2 σz⊗σx + 0.15 I
  const Matrix2 sz = pauli_observable(setting_from_angle(0.0));
  const Matrix2 sx = pauli_observable(MeasurementSetting{{1.0, 0.0, 0.0}, 0});
  Matrix4 h;
  const Matrix4 zz = tensor_op(sz, sz), xz = tensor_op(sx, sz), zx = tensor_op(sz, sx);
  const Matrix4 id = Matrix4::identity();
  for (std::size_t i = 0; i < h.e.size(); ++i) {
    h.e[i] = 0.3 * zz.e[i] + 0.5 * xz.e[i] - 0.2 * zx.e[i] + 0.15 * id.e[i];
  }
  const auto evs = hermitian_eigenvalues(h);
  Matrix4 power = Matrix4::identity();
  for (int j = 1; j <= 4; ++j) {
    power = matmul(power, h);
    double moment = 0.0;
    for (double ev : evs) moment += std::pow(ev, j);
    CHECK_THAT(moment, WithinAbs(trace(power).real(), 1e-9));
  }
}

TEST_CASE("density operators validate their invariants", "[qlin]") {
  const DensityOp<2> pure = DensityOp<2>::from_pure(eigenstate(setting_from_angle(1.0), Outcome::plus));
  CHECK_NOTHROW(pure.validate());
  CHECK_THAT(pure.expectation(pauli_observable(setting_from_angle(1.0))), WithinAbs(1.0, 1e-10));

  const DensityOp<4> pair = DensityOp<4>::from_pure(bell_phi_plus());
  CHECK_NOTHROW(pair.validate());

  DensityOp<2> skewed = pure;
  skewed.rho.at(0, 1) += cplx(0.0, 1e-3);
  CHECK_THROWS_AS(skewed.validate(), std::invalid_argument);

  DensityOp<2> traceless;
  traceless.rho.at(0, 0) = 0.6;
  traceless.rho.at(1, 1) = 0.6;
  CHECK_THROWS_AS(traceless.validate(), std::invalid_argument);

  DensityOp<2> negative;
  negative.rho.at(0, 0) = 1.5;
  negative.rho.at(1, 1) = -0.5;
  CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
}

TEST_CASE("outcome signs are validated", "[qlin]") {
  CHECK(value(outcome_from_sign(1)) == 1);
  CHECK(value(outcome_from_sign(-1)) == -1);
  CHECK_THROWS_AS(outcome_from_sign(0), std::invalid_argument);
  CHECK_THROWS_AS(outcome_from_sign(2), std::invalid_argument);
}
