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

#include "b92/linalg.hpp"

#include <cmath>
#include <cstdint>
#include <string>

namespace b92 {

namespace {

ComplexMatrix make_pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix make_pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix make_pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

}  // namespace

const ComplexMatrix& pauli(int zxy_index) {
  static const ComplexMatrix sz = make_pauli_z();
  static const ComplexMatrix sx = make_pauli_x();
  static const ComplexMatrix sy = make_pauli_y();
  switch (zxy_index) {
    case 0:
      return sz;
    case 1:
      return sx;
    case 2:
      return sy;
    default:
      throw std::invalid_argument("pauli: index must be 0 (z), 1 (x) or 2 (y)");
  }
}

const ComplexMatrix& identity2() {
  static const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  return id;
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) {
    return false;
  }
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_density_matrix(const ComplexMatrix& m, double trace_tol, double eig_floor) {
  if (!is_hermitian(m)) {
    return false;
  }
  if (std::abs(m.trace().real() - 1.0) > trace_tol || std::abs(m.trace().imag()) > trace_tol) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff() >= -eig_floor;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

ComplexMatrix partial_trace(const ComplexMatrix& m, const std::vector<int>& dims,
                            const std::vector<int>& keep) {
  const int n = static_cast<int>(dims.size());
  Eigen::Index total = 1;
  for (int d : dims) {
    if (d <= 0) {
      throw std::invalid_argument("partial_trace: subsystem dimensions must be positive");
    }
    total *= d;
  }
  if (m.rows() != m.cols() || m.rows() != total) {
    throw std::invalid_argument("partial_trace: matrix dimension does not match product of dims");
  }
  std::vector<bool> kept(n, false);
  for (int k : keep) {
    if (k < 0 || k >= n || kept[k]) {
      throw std::invalid_argument("partial_trace: bad subsystem index in keep");
    }
    kept[k] = true;
  }

  Eigen::Index kept_dim = 1;
  Eigen::Index traced_dim = 1;
  for (int i = 0; i < n; ++i) {
    (kept[i] ? kept_dim : traced_dim) *= dims[i];
  }

  // Row-major strides of each subsystem in the flattened index.
  std::vector<Eigen::Index> stride(n, 1);
  for (int i = n - 2; i >= 0; --i) {
    stride[i] = stride[i + 1] * dims[i + 1];
  }

  // Flat index of a kept (resp. traced) multi-index within the full index.
  const auto expand = [&](Eigen::Index packed, bool want_kept) {
    Eigen::Index full = 0;
    for (int i = n - 1; i >= 0; --i) {
      if (kept[i] == want_kept) {
        full += (packed % dims[i]) * stride[i];
        packed /= dims[i];
      }
    }
    return full;
  };

  ComplexMatrix out = ComplexMatrix::Zero(kept_dim, kept_dim);
  for (Eigen::Index r = 0; r < kept_dim; ++r) {
    const Eigen::Index row_base = expand(r, true);
    for (Eigen::Index c = 0; c < kept_dim; ++c) {
      const Eigen::Index col_base = expand(c, true);
      Complex acc = 0;
      for (Eigen::Index s = 0; s < traced_dim; ++s) {
        const Eigen::Index off = expand(s, false);
        acc += m(row_base + off, col_base + off);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

HermitianEig hermitian_eig(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("hermitian_eig: matrix must be square");
  }
  if (!is_hermitian(m)) {
    throw std::invalid_argument("hermitian_eig: matrix is not Hermitian within 1e-12");
  }
  const ComplexMatrix sym = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eig: eigensolver failed to converge");
  }

  const Eigen::Index n = m.rows();
  HermitianEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = n - 1 - i;  // ascending -> descending
    out.values(i) = solver.eigenvalues()(src);
    ComplexVector v = solver.eigenvectors().col(src);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    const Complex z = v(pivot);
    if (std::abs(z) > 0) {
      v *= std::conj(z) / std::abs(z);
    }
    out.vectors.col(i) = v;
  }
  return out;
}

double von_neumann_entropy(const ComplexMatrix& m, double eig_floor) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("von_neumann_entropy: matrix must be square");
  }
  if (!is_hermitian(m)) {
    throw std::invalid_argument("von_neumann_entropy: matrix is not Hermitian within 1e-12");
  }
  const ComplexMatrix sym = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym, Eigen::EigenvaluesOnly);
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double lambda = solver.eigenvalues()(i);
    if (lambda < -eig_floor) {
      throw NotPositiveError("von_neumann_entropy: eigenvalue " + std::to_string(lambda) +
                             " below -" + std::to_string(eig_floor));
    }
    if (lambda > 0) {
      entropy -= lambda * std::log2(lambda);
    }
  }
  return entropy;
}

double shannon_conditional_entropy(const Eigen::Matrix2d& joint) {
  double sum = 0.0;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      if (joint(j, k) < 0) {
        throw std::invalid_argument("shannon_conditional_entropy: negative table entry");
      }
      sum += joint(j, k);
    }
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("shannon_conditional_entropy: table entries must sum to 1");
  }

  const auto plogp = [](double p) { return p > 0 ? -p * std::log2(p) : 0.0; };
  double h_joint = 0.0;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      h_joint += plogp(joint(j, k));
    }
  }
  double h_cols = 0.0;
  for (int k = 0; k < 2; ++k) {
    h_cols += plogp(joint(0, k) + joint(1, k));
  }
  return h_joint - h_cols;
}

}  // namespace b92
