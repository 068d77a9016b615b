// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "maisac/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <span>
#include <vector>

namespace maisac {

inline CMat hermitian_part(const CMat& x) { return 0.5 * (x + x.adjoint()); }

/// Re Tr(X^H Y), the real inner product on complex matrices.
inline double inner(const CMat& x, const CMat& y) { return (x.conjugate().cwiseProduct(y)).sum().real(); }

/// Tr(X C) for Hermitian X and C, returned as a real number.
inline double trace_product(const CMat& x, const CMat& c) { return inner(c, x); }

struct EigenPair {
  double value = 0.0;
  CVec vector;
};

/// Largest eigenpair of a Hermitian matrix.
inline EigenPair principal_eigenpair(const CMat& x) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(x));
  const Eigen::Index last = x.rows() - 1;
  return {es.eigenvalues()(last), es.eigenvectors().col(last)};
}

inline double min_eigenvalue(const CMat& x) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// Euclidean projection of a set of Hermitian blocks onto
/// { X_b PSD, sum_b tr(X_b) <= budget }.
///
/// The set is unitarily invariant per block, so the projection keeps each
/// block's eigenvectors and projects the pooled eigenvalues onto the capped
/// simplex { mu >= 0, sum mu <= budget }: mu = max(lambda - tau, 0) with a
/// single shift tau >= 0 shared by every block.
inline void project_psd_budget(std::span<CMat> blocks, double budget) {
  if (blocks.empty()) return;
  std::vector<Eigen::SelfAdjointEigenSolver<CMat>> solvers;
  solvers.reserve(blocks.size());
  std::vector<double> pooled;
  for (auto& b : blocks) {
    solvers.emplace_back(hermitian_part(b));
    for (Eigen::Index i = 0; i < b.rows(); ++i) pooled.push_back(solvers.back().eigenvalues()(i));
  }
  double positive = 0.0;
  for (double v : pooled) positive += std::max(v, 0.0);
  double tau = 0.0;
  if (positive > budget) {
    std::sort(pooled.begin(), pooled.end(), std::greater<>());
    double cumsum = 0.0;
    for (std::size_t i = 0; i < pooled.size(); ++i) {
      cumsum += pooled[i];
      const double cand = (cumsum - budget) / static_cast<double>(i + 1);
      if (i + 1 == pooled.size() || pooled[i + 1] <= cand) {
        tau = cand;
        break;
      }
    }
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& es = solvers[b];
    const RVec mu = (es.eigenvalues().array() - tau).max(0.0).matrix();
    blocks[b] = es.eigenvectors() * mu.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
  }
}

}  // namespace maisac
