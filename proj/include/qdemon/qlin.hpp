#pragma once

// Minimal dense complex linear algebra for one- and two-qubit states: Pauli
// observables from Bloch vectors, tensor products, Born-rule sampling and
// eigenstate construction. Everything is a value type; operations are pure
// given an explicit uniform sample, so they are safe to call from any thread.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "qdemon/common.hpp"

namespace qdemon {

using cplx = std::complex<double>;

// Dichotomic measurement result.
enum class Outcome : int { plus = +1, minus = -1 };

constexpr int value(Outcome o) { return static_cast<int>(o); }

inline Outcome outcome_from_sign(int sign) {
  if (sign != 1 && sign != -1) {
    throw std::invalid_argument("outcome sign must be +1 or -1, got " + std::to_string(sign));
  }
  return sign == 1 ? Outcome::plus : Outcome::minus;
}

// A dichotomic qubit observable n·σ, named by a unit Bloch vector. `label` is
// the setting index k the protocols announce.
struct MeasurementSetting {
  std::array<double, 3> bloch{0.0, 0.0, 1.0};
  int label = 0;
};

inline double bloch_norm(const std::array<double, 3>& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

// Angle measured from +z towards +x; all protocol settings live in this plane.
inline MeasurementSetting setting_from_angle(double theta_xz, int label = 0) {
  return MeasurementSetting{{std::sin(theta_xz), 0.0, std::cos(theta_xz)}, label};
}

inline void require_unit_bloch(const MeasurementSetting& s) {
  const double n = bloch_norm(s.bloch);
  if (!(std::abs(n - 1.0) <= kAlgebraTol)) {
    throw std::invalid_argument("measurement setting needs a unit Bloch vector, |n| = " +
                                std::to_string(n));
  }
}

template <int Dim>
struct StateVec {
  static_assert(Dim == 2 || Dim == 4, "only single qubits and qubit pairs are supported");

  std::array<cplx, Dim> amps{};

  double norm_sq() const {
    double s = 0.0;
    for (const cplx& a : amps) s += std::norm(a);
    return s;
  }
};

using Qubit = StateVec<2>;
using PairState = StateVec<4>;

template <int Dim>
void require_normalized(const StateVec<Dim>& s) {
  const double n2 = s.norm_sq();  // NaN/Inf amplitudes fail this check too
  if (!(std::abs(n2 - 1.0) <= kAlgebraTol)) {
    throw std::invalid_argument("state vector is not normalized, |psi|^2 = " + std::to_string(n2));
  }
}

template <int Dim>
StateVec<Dim> normalized(StateVec<Dim> s) {
  const double n = std::sqrt(s.norm_sq());
  if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero state vector");
  for (cplx& a : s.amps) a /= n;
  return s;
}

template <int Dim>
struct Matrix {
  std::array<cplx, Dim * Dim> e{};

  cplx& at(int r, int c) { return e[static_cast<std::size_t>(r) * Dim + c]; }
  const cplx& at(int r, int c) const { return e[static_cast<std::size_t>(r) * Dim + c]; }

  static Matrix identity() {
    Matrix m;
    for (int i = 0; i < Dim; ++i) m.at(i, i) = 1.0;
    return m;
  }
};

using Matrix2 = Matrix<2>;
using Matrix4 = Matrix<4>;

template <int Dim>
StateVec<Dim> apply(const Matrix<Dim>& m, const StateVec<Dim>& s) {
  StateVec<Dim> out;
  for (int r = 0; r < Dim; ++r) {
    cplx acc = 0.0;
    for (int c = 0; c < Dim; ++c) acc += m.at(r, c) * s.amps[static_cast<std::size_t>(c)];
    out.amps[static_cast<std::size_t>(r)] = acc;
  }
  return out;
}

template <int Dim>
Matrix<Dim> matmul(const Matrix<Dim>& a, const Matrix<Dim>& b) {
  Matrix<Dim> out;
  for (int r = 0; r < Dim; ++r) {
    for (int c = 0; c < Dim; ++c) {
      cplx acc = 0.0;
      for (int k = 0; k < Dim; ++k) acc += a.at(r, k) * b.at(k, c);
      out.at(r, c) = acc;
    }
  }
  return out;
}

template <int Dim>
cplx trace(const Matrix<Dim>& m) {
  cplx t = 0.0;
  for (int i = 0; i < Dim; ++i) t += m.at(i, i);
  return t;
}

// n·σ for a unit Bloch vector n: Hermitian, traceless, eigenvalues ±1.
inline Matrix2 pauli_observable(const MeasurementSetting& s) {
  require_unit_bloch(s);
  const auto [nx, ny, nz] = s.bloch;
  Matrix2 m;
  m.at(0, 0) = nz;
  m.at(0, 1) = cplx(nx, -ny);
  m.at(1, 0) = cplx(nx, ny);
  m.at(1, 1) = -nz;
  return m;
}

// Composite index is row-major with the first factor major: amps[2*i + j].
inline PairState tensor(const Qubit& a, const Qubit& b) {
  require_normalized(a);
  require_normalized(b);
  PairState out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      out.amps[static_cast<std::size_t>(2 * i + j)] =
          a.amps[static_cast<std::size_t>(i)] * b.amps[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

inline Matrix4 tensor_op(const Matrix2& a, const Matrix2& b) {
  Matrix4 out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
          out.at(2 * i + k, 2 * j + l) = a.at(i, j) * b.at(k, l);
        }
      }
    }
  }
  return out;
}

template <int Dim>
double expectation(const StateVec<Dim>& s, const Matrix<Dim>& op) {
  cplx acc = 0.0;
  for (int r = 0; r < Dim; ++r) {
    for (int c = 0; c < Dim; ++c) {
      acc += std::conj(s.amps[static_cast<std::size_t>(r)]) * op.at(r, c) *
             s.amps[static_cast<std::size_t>(c)];
    }
  }
  return acc.real();
}

// <σ_a ⊗ σ_b> on a two-qubit state.
inline double expectation_joint(const PairState& s, const MeasurementSetting& a,
                                const MeasurementSetting& b) {
  require_normalized(s);
  return expectation(s, tensor_op(pauli_observable(a), pauli_observable(b)));
}

inline PairState bell_phi_plus() {
  PairState s;
  s.amps[0] = 1.0 / std::numbers::sqrt2;
  s.amps[3] = 1.0 / std::numbers::sqrt2;
  return s;
}

// Eigenstate of n·σ with the requested eigenvalue sign. Global phase is fixed
// by making the first amplitude of modulus > kAlgebraTol real and positive.
inline Qubit eigenstate(const MeasurementSetting& s, Outcome sign) {
  require_unit_bloch(s);
  double nx = s.bloch[0], ny = s.bloch[1], nz = s.bloch[2];
  if (sign == Outcome::minus) {
    nx = -nx;
    ny = -ny;
    nz = -nz;
  }
  // Columns of I + n·σ are unnormalized +1 eigenvectors; pick the better
  // conditioned one.
  Qubit v;
  if (nz >= 0.0) {
    v.amps = {cplx(1.0 + nz, 0.0), cplx(nx, ny)};
  } else {
    v.amps = {cplx(nx, -ny), cplx(1.0 - nz, 0.0)};
  }
  v = normalized(v);
  for (cplx& a : v.amps) {
    const double mod = std::abs(a);
    if (mod > kAlgebraTol) {
      const cplx phase = std::conj(a) / mod;
      for (cplx& b : v.amps) b *= phase;
      break;
    }
  }
  return v;
}

// Probabilities within kProbSnapTol of an endpoint are the endpoint; this also
// clears tiny negative values produced by roundoff.
inline double snap_probability(double p) {
  if (p <= kProbSnapTol) return 0.0;
  if (p >= 1.0 - kProbSnapTol) return 1.0;
  return p;
}

inline double plus_probability(const Qubit& s, const MeasurementSetting& n) {
  require_normalized(s);
  return snap_probability(0.5 * (1.0 + expectation(s, pauli_observable(n))));
}

// Decision rule: outcome is +1 iff u < P(+1). The collapsed state is the
// corresponding eigenstate of the measured observable.
inline std::pair<Outcome, Qubit> born_measure_single(const Qubit& s, const MeasurementSetting& n,
                                                     double u) {
  const double p_plus = plus_probability(s, n);
  const Outcome o = u < p_plus ? Outcome::plus : Outcome::minus;
  return {o, eigenstate(n, o)};
}

// Cached sampling data for one (state, setting_a, setting_b) combination:
// Alice's marginal and Bob's conditionals. b_plus_given[0] conditions on
// Alice = +1, b_plus_given[1] on Alice = -1.
struct JointProbs {
  double a_plus = 0.5;
  std::array<double, 2> b_plus_given{0.5, 0.5};
};

namespace detail {

// Applies (I + sign·n·σ)/2 ⊗ I without building the 4x4 matrix.
inline PairState project_first(const PairState& s, const Matrix2& obs, int sign) {
  PairState out;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      cplx acc = 0.0;
      for (int k = 0; k < 2; ++k) {
        const cplx p = 0.5 * ((i == k ? 1.0 : 0.0) + static_cast<double>(sign) * obs.at(i, k));
        acc += p * s.amps[static_cast<std::size_t>(2 * k + j)];
      }
      out.amps[static_cast<std::size_t>(2 * i + j)] = acc;
    }
  }
  return out;
}

inline double second_plus_probability(const PairState& s, const Matrix2& obs) {
  cplx acc = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int l = 0; l < 2; ++l) {
        acc += std::conj(s.amps[static_cast<std::size_t>(2 * i + j)]) * obs.at(j, l) *
               s.amps[static_cast<std::size_t>(2 * i + l)];
      }
    }
  }
  return snap_probability(0.5 * (1.0 + acc.real()));
}

}  // namespace detail

inline JointProbs joint_probabilities(const PairState& s, const MeasurementSetting& a,
                                      const MeasurementSetting& b) {
  require_normalized(s);
  const Matrix2 oa = pauli_observable(a);
  const Matrix2 ob = pauli_observable(b);
  JointProbs jp;
  jp.a_plus = snap_probability(0.5 * (1.0 + expectation(s, tensor_op(oa, Matrix2::identity()))));
  const int signs[2] = {+1, -1};
  for (int idx = 0; idx < 2; ++idx) {
    PairState branch = detail::project_first(s, oa, signs[idx]);
    const double w = branch.norm_sq();
    if (w > kProbSnapTol) {
      for (cplx& amp : branch.amps) amp /= std::sqrt(w);
      jp.b_plus_given[static_cast<std::size_t>(idx)] = detail::second_plus_probability(branch, ob);
    } else {
      jp.b_plus_given[static_cast<std::size_t>(idx)] = 0.5;  // branch never sampled
    }
  }
  return jp;
}

inline std::pair<Outcome, Outcome> sample_joint(const JointProbs& jp, double u1, double u2) {
  const Outcome a = u1 < jp.a_plus ? Outcome::plus : Outcome::minus;
  const double pb = jp.b_plus_given[a == Outcome::plus ? 0 : 1];
  const Outcome b = u2 < pb ? Outcome::plus : Outcome::minus;
  return {a, b};
}

// Marginal-then-conditional sampling of local measurements on a shared pair.
inline std::pair<Outcome, Outcome> born_measure_joint(const PairState& s,
                                                      const MeasurementSetting& a,
                                                      const MeasurementSetting& b, double u1,
                                                      double u2) {
  return sample_joint(joint_probabilities(s, a, b), u1, u2);
}

// Eigenvalues of a Hermitian matrix via cyclic Jacobi on the real symmetric
// embedding [[Re, -Im], [Im, Re]]; each eigenvalue appears twice there.
template <int Dim>
std::array<double, Dim> hermitian_eigenvalues(const Matrix<Dim>& h) {
  constexpr int n = 2 * Dim;
  std::array<std::array<double, n>, n> a{};
  for (int r = 0; r < Dim; ++r) {
    for (int c = 0; c < Dim; ++c) {
      const cplx z = h.at(r, c);
      a[r][c] = z.real();
      a[r][c + Dim] = -z.imag();
      a[r + Dim][c] = z.imag();
      a[r + Dim][c + Dim] = z.real();
    }
  }
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                              : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::array<double, n> diag{};
  for (int i = 0; i < n; ++i) diag[static_cast<std::size_t>(i)] = a[i][i];
  std::sort(diag.begin(), diag.end());
  std::array<double, Dim> out{};
  for (int i = 0; i < Dim; ++i) {
    out[static_cast<std::size_t>(i)] =
        0.5 * (diag[static_cast<std::size_t>(2 * i)] + diag[static_cast<std::size_t>(2 * i + 1)]);
  }
  return out;
}

// Mixed-state counterpart of StateVec; validated on demand.
template <int Dim>
struct DensityOp {
  Matrix<Dim> rho;

  static DensityOp from_pure(const StateVec<Dim>& s) {
    require_normalized(s);
    DensityOp d;
    for (int r = 0; r < Dim; ++r) {
      for (int c = 0; c < Dim; ++c) {
        d.rho.at(r, c) = s.amps[static_cast<std::size_t>(r)] *
                         std::conj(s.amps[static_cast<std::size_t>(c)]);
      }
    }
    return d;
  }

  // Hermitian and unit trace within kAlgebraTol, eigenvalues >= kPsdTol.
  void validate() const {
    for (int r = 0; r < Dim; ++r) {
      for (int c = 0; c < Dim; ++c) {
        const cplx d = rho.at(r, c) - std::conj(rho.at(c, r));
        if (!(std::abs(d) <= kAlgebraTol)) {
          throw std::invalid_argument("density operator is not Hermitian");
        }
        if (!std::isfinite(rho.at(r, c).real()) || !std::isfinite(rho.at(r, c).imag())) {
          throw std::invalid_argument("density operator has a non-finite entry");
        }
      }
    }
    const cplx tr = trace(rho);
    if (!(std::abs(tr - cplx(1.0, 0.0)) <= kAlgebraTol)) {
      throw std::invalid_argument("density operator trace differs from 1");
    }
    for (double ev : hermitian_eigenvalues(rho)) {
      if (ev < kPsdTol) {
        throw std::invalid_argument("density operator is not positive semidefinite");
      }
    }
  }

  double expectation(const Matrix<Dim>& op) const { return trace(matmul(rho, op)).real(); }
};

}  // namespace qdemon
