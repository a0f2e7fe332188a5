// Copyright 2026 The b92-keyrate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "b92/channel.hpp"

#include <cmath>

namespace b92 {

namespace {

void check_finite(const BlochAffineChannel& ch) {
  if (!ch.r.allFinite() || !ch.t.allFinite()) {
    throw std::invalid_argument("channel parameters must be finite");
  }
}

ComplexMatrix from_bloch(const Eigen::Vector3d& w) {
  // (I + w.sigma)/2 with the (1,1) entry completing the trace to exactly 1.
  ComplexMatrix out(2, 2);
  out(0, 0) = (1.0 + w(0)) / 2.0;
  out(1, 1) = 1.0 - out(0, 0).real();
  out(0, 1) = Complex(w(1), -w(2)) / 2.0;
  out(1, 0) = Complex(w(1), w(2)) / 2.0;
  return out;
}

}  // namespace

ComplexMatrix apply_channel(const BlochAffineChannel& ch, const ComplexMatrix& rho) {
  check_finite(ch);
  if (rho.rows() != 2 || rho.cols() != 2 || !is_density_matrix(rho)) {
    throw std::invalid_argument("apply_channel: input is not a qubit density matrix");
  }
  Eigen::Vector3d b;
  for (int k = 0; k < 3; ++k) {
    b(k) = (rho * pauli(k)).trace().real();
  }
  return from_bloch(ch.r * b + ch.t);
}

ComplexMatrix apply_linear(const BlochAffineChannel& ch, const ComplexMatrix& m) {
  check_finite(ch);
  if (m.rows() != 2 || m.cols() != 2) {
    throw std::invalid_argument("apply_linear: input must be 2x2");
  }
  const Complex c_id = m.trace() / 2.0;
  Eigen::Vector3cd c;
  for (int k = 0; k < 3; ++k) {
    c(k) = (m * pauli(k)).trace() / 2.0;
  }
  const Eigen::Vector3cd w = ch.r.cast<Complex>() * c + c_id * ch.t.cast<Complex>();
  ComplexMatrix out = c_id * identity2();
  for (int k = 0; k < 3; ++k) {
    out += w(k) * pauli(k);
  }
  return out;
}

ComplexMatrix choi_matrix(const BlochAffineChannel& ch) {
  check_finite(ch);
  ComplexMatrix out = ComplexMatrix::Zero(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      ComplexMatrix unit = ComplexMatrix::Zero(2, 2);
      unit(i, j) = 1;
      out += kron(unit, apply_linear(ch, unit));
    }
  }
  return out;
}

double min_choi_eigenvalue(const BlochAffineChannel& ch) {
  const ComplexMatrix choi = choi_matrix(ch);
  const ComplexMatrix sym = (choi + choi.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

BlochAffineChannel depolarizing(double q) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("depolarizing: rate must lie in [0, 1]");
  }
  BlochAffineChannel ch;
  ch.r = (1.0 - 4.0 * q / 3.0) * Eigen::Matrix3d::Identity();
  ch.t.setZero();
  ch.symmetry_reduced = true;
  return ch;
}

BlochAffineChannel symmetrize(const BlochAffineChannel& ch) {
  BlochAffineChannel out = ch;
  out.r(0, 2) = 0;  // r(z,y)
  out.r(2, 0) = 0;  // r(y,z)
  out.r(1, 2) = 0;  // r(x,y)
  out.r(2, 1) = 0;  // r(y,x)
  out.t(2) = 0;     // t(y)
  out.symmetry_reduced = true;
  return out;
}

BlochAffineChannel lerp(const BlochAffineChannel& a, const BlochAffineChannel& b,
                        double weight_b) {
  BlochAffineChannel out;
  out.r = (1.0 - weight_b) * a.r + weight_b * b.r;
  out.t = (1.0 - weight_b) * a.t + weight_b * b.t;
  out.symmetry_reduced = a.symmetry_reduced && b.symmetry_reduced;
  return out;
}

}  // namespace b92
