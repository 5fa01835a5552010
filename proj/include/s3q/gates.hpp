// Local matrices: Paulis, clock/shift, charge conjugation and controlled gates.
#pragma once

#include "s3q/sim.hpp"

namespace s3q::gates {

inline Mat eye(int d) { return Mat::Identity(d, d); }

inline Mat X() {
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1;
  return m;
}
inline Mat Z() {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = 1;
  m(1, 1) = -1;
  return m;
}
inline Mat H() { return (X() + Z()) / std::sqrt(2.0); }

// shift |n> -> |n+1 mod d>
inline Mat shift(int d, int power = 1) {
  Mat m = Mat::Zero(d, d);
  for (int n = 0; n < d; ++n) m(((n + power) % d + d) % d, n) = 1;
  return m;
}
// clock |n> -> w^n |n>
inline Mat clock(int d, int power = 1) {
  Mat m = Mat::Zero(d, d);
  for (int n = 0; n < d; ++n) m(n, n) = root_of_unity(d, power * n);
  return m;
}
inline Mat Xq(int power = 1) { return shift(3, power); }
inline Mat Zq(int power = 1) { return clock(3, power); }

// charge conjugation |n> -> |-n>
inline Mat Cq() {
  Mat m = Mat::Zero(3, 3);
  for (int n = 0; n < 3; ++n) m((3 - n) % 3, n) = 1;
  return m;
}

inline Mat swap2() {
  Mat m = Mat::Zero(4, 4);
  m(0, 0) = m(3, 3) = 1;
  m(1, 2) = m(2, 1) = 1;
  return m;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat r(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return r;
}

// control qubit first: |0><0| x 1 + |1><1| x u
inline Mat controlled(const Mat& u) {
  int d = static_cast<int>(u.rows());
  Mat m = Mat::Zero(2 * d, 2 * d);
  m.topLeftCorner(d, d) = eye(d);
  m.bottomRightCorner(d, d) = u;
  return m;
}

inline Mat CX() { return controlled(X()); }
inline Mat CC() { return controlled(Cq()); }

inline Mat power(const Mat& m, int k) {
  Mat r = eye(static_cast<int>(m.rows()));
  if (k >= 0) {
    for (int i = 0; i < k; ++i) r = r * m;
  } else {
    Mat a = m.adjoint();
    for (int i = 0; i < -k; ++i) r = r * a;
  }
  return r;
}

inline bool is_unitary(const Mat& m, double tol = 1e-12) {
  return (m.adjoint() * m - eye(static_cast<int>(m.rows()))).cwiseAbs().maxCoeff() < tol;
}

}  // namespace s3q::gates
