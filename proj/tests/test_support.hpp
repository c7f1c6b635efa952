#pragma once

#include <cmath>
#include <random>

#include "hessiansys/sh_structure.hpp"

namespace test_support {

using hessiansys::Matrix;
using hessiansys::SHDecomposition;
using hessiansys::Vector;

inline Matrix random_rotation(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix M(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) M(r, c) = g(rng);
  Eigen::HouseholderQR<Matrix> qr(M);
  return qr.householderQ();
}

/// Random decomposition with K = N terms of rank one each: orthogonal B^g
/// ranges, A^g sharing a random smallest-eigenvalue direction but with
/// different smallest eigenvalues (so the rescaling step matters).
inline SHDecomposition random_sh(int n, int N, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.3, 3.0);
  const Matrix Q = random_rotation(N, rng);
  const Matrix O = random_rotation(n, rng);
  SHDecomposition d;
  d.dims = {n, N};
  for (int g = 0; g < N; ++g) {
    d.B.push_back(u(rng) * Q.col(g) * Q.col(g).transpose());
    Vector lam(n);
    lam[0] = u(rng);
    for (int k = 1; k < n; ++k) lam[k] = lam[0] + u(rng);
    d.A.push_back(O * lam.asDiagonal() * O.transpose());
  }
  return d;
}

}  // namespace test_support
