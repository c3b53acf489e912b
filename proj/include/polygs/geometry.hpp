// This file is part of polygs.
//
// Copyright (c) 2026 polygs authors
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POLYGS_GEOMETRY_HPP
#define POLYGS_GEOMETRY_HPP

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "polygs/model.hpp"

namespace polygs {

/// Extreme points of the mismatch polytope
///   { d in R^r : sum_i d_i = 0, -1 <= d_i <= 1 },
/// stored column-wise in H. For even r every vertex has r/2 entries at +1 and
/// r/2 at -1; for odd r exactly one entry is 0 and the rest split evenly.
struct DeltaVertexSet {
  int r = 0;
  int dq = 0;
  Eigen::MatrixXd H;
};

/// Number of extreme points of the mismatch polytope (central-binomial count).
inline std::int64_t delta_vertex_count(int r) {
  detail::require(r >= 2, "delta_vertex_count: r must be >= 2");
  detail::require(r <= 20, "delta_vertex_count: r too large for exact count");
  auto binom = [](int n, int k) {
    std::int64_t v = 1;
    for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
    return v;
  };
  if (r % 2 == 0) return binom(r, r / 2);
  return static_cast<std::int64_t>(r) * binom(r - 1, (r - 1) / 2);
}

/// Enumerates the sign patterns of the mismatch-polytope vertices, columns in
/// descending lexicographic order (deterministic golden-file ordering).
inline DeltaVertexSet enumerate_delta_vertices(int r) {
  detail::require(r >= 2, "enumerate_delta_vertices: r must be >= 2");
  const std::int64_t expected = delta_vertex_count(r);

  std::vector<int> pattern(r);
  const int pos = r / 2;
  for (int i = 0; i < r; ++i) {
    if (i < pos) {
      pattern[i] = 1;
    } else if (r % 2 == 1 && i == pos) {
      pattern[i] = 0;
    } else {
      pattern[i] = -1;
    }
  }
  // Descending start + prev_permutation emits descending lexicographic order.
  std::sort(pattern.begin(), pattern.end(), std::greater<int>());

  DeltaVertexSet vs;
  vs.r = r;
  vs.dq = static_cast<int>(expected);
  vs.H.resize(r, vs.dq);
  int col = 0;
  do {
    for (int i = 0; i < r; ++i) vs.H(i, col) = static_cast<double>(pattern[i]);
    ++col;
  } while (std::prev_permutation(pattern.begin(), pattern.end()));
  detail::require(col == vs.dq, "enumerate_delta_vertices: count mismatch");
  return vs;
}

/// Structural matrix M with M (theta kron I_b) = 0 for a fixed theta.
struct Annihilator {
  Eigen::MatrixXd M;
  int r = 0;
  int block = 0;
};

/// Pairwise annihilator: one block row per index pair (i, j), i < j, carrying
/// theta_j I_b at block column i and -theta_i I_b at block column j. The
/// identity theta_j theta_i - theta_i theta_j = 0 holds exactly per row.
inline Annihilator pair_annihilator(const Eigen::VectorXd& theta, int b) {
  detail::require(b >= 1, "pair_annihilator: block size must be >= 1");
  const int r = static_cast<int>(theta.size());
  detail::require(r >= 1, "pair_annihilator: empty theta");
  const int pairs = r * (r - 1) / 2;
  Annihilator an;
  an.r = r;
  an.block = b;
  an.M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(pairs) * b,
                               static_cast<Eigen::Index>(r) * b);
  int row_block = 0;
  for (int i = 0; i < r; ++i) {
    for (int j = i + 1; j < r; ++j) {
      for (int t = 0; t < b; ++t) {
        an.M(row_block * b + t, i * b + t) = theta[j];
        an.M(row_block * b + t, j * b + t) = -theta[i];
      }
      ++row_block;
    }
  }
  return an;
}

/// The b x (r b) block row [I_b I_b ... I_b]; annihilates (d kron I_b) for
/// every sum-zero d.
inline Annihilator sum_zero_block_row(int r, int b) {
  detail::require(r >= 1 && b >= 1, "sum_zero_block_row: bad dimensions");
  Annihilator an;
  an.r = r;
  an.block = b;
  an.M = Eigen::MatrixXd::Zero(b, static_cast<Eigen::Index>(r) * b);
  for (int i = 0; i < r; ++i)
    an.M.block(0, i * b, b, b) = Eigen::MatrixXd::Identity(b, b);
  return an;
}

/// Annihilator for the mismatch direction: pairwise rows stacked on the
/// sum-zero block row (the mismatch always sums to zero).
inline Eigen::MatrixXd delta_annihilator(const Eigen::VectorXd& d, int b) {
  const Annihilator pairs = pair_annihilator(d, b);
  const Annihilator sum = sum_zero_block_row(static_cast<int>(d.size()), b);
  Eigen::MatrixXd m(pairs.M.rows() + sum.M.rows(), pairs.M.cols());
  m << pairs.M, sum.M;
  return m;
}

/// Vertex-indexed combined annihilator diag(Btilde_m, Bhat_l) with block size
/// 2 n_x: the alpha part built from the m-th simplex vertex, the mismatch part
/// from the l-th column of H. Indices are zero-based. Output is
/// (2 n_x r (r-1) + 2 n_x) x (4 n_x r).
inline Eigen::MatrixXd combined_annihilator(int m, int l,
                                            const DeltaVertexSet& vertices,
                                            int n_x) {
  detail::require(m >= 0 && m < vertices.r,
                  "combined_annihilator: simplex vertex index out of range");
  detail::require(l >= 0 && l < vertices.dq,
                  "combined_annihilator: mismatch vertex index out of range");
  detail::require(n_x >= 1, "combined_annihilator: bad state dimension");
  const int r = vertices.r;
  const int b = 2 * n_x;
  Eigen::VectorXd em = Eigen::VectorXd::Zero(r);
  em[m] = 1.0;
  const Eigen::MatrixXd top = pair_annihilator(em, b).M;
  const Eigen::MatrixXd bot = delta_annihilator(vertices.H.col(l), b);
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(top.rows() + bot.rows(), top.cols() + bot.cols());
  out.topLeftCorner(top.rows(), top.cols()) = top;
  out.bottomRightCorner(bot.rows(), bot.cols()) = bot;
  return out;
}

/// Value-level combined annihilator diag(Btilde(alpha), Bhat(delta)), used by
/// the certificate sampling path.
inline Eigen::MatrixXd combined_annihilator_at(const Eigen::VectorXd& alpha,
                                               const Eigen::VectorXd& delta,
                                               int n_x) {
  detail::require(alpha.size() == delta.size(),
                  "combined_annihilator_at: length mismatch");
  const int b = 2 * n_x;
  const Eigen::MatrixXd top = pair_annihilator(alpha, b).M;
  const Eigen::MatrixXd bot = delta_annihilator(delta, b);
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(top.rows() + bot.rows(), top.cols() + bot.cols());
  out.topLeftCorner(top.rows(), top.cols()) = top;
  out.bottomRightCorner(bot.rows(), bot.cols()) = bot;
  return out;
}

/// Number of coupling column indices used by coupled_annihilator: one for
/// even r (mismatch vertices have full support), two for odd r (exactly one
/// zero entry, so at least one of the first two indices is active).
inline int coupling_width(int r) { return (r % 2 == 0) ? 1 : 2; }

/// Cross rows tying the two lifted halves together: block row (i, j) carries
/// delta_j I_b on alpha-block i and -alpha_i I_b on mismatch-block j, for all
/// i and j in the first coupling_width(r) columns. Annihilates the joint
/// stacked vector [alpha kron w; delta kron w] for a shared w.
inline Eigen::MatrixXd coupling_rows(const Eigen::VectorXd& alpha,
                                     const Eigen::VectorXd& delta, int b) {
  const int r = static_cast<int>(alpha.size());
  detail::require(delta.size() == r, "coupling_rows: length mismatch");
  const int nj = coupling_width(r);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(
      static_cast<Eigen::Index>(r) * nj * b, static_cast<Eigen::Index>(2 * r) * b);
  int row_block = 0;
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < nj; ++j) {
      for (int t = 0; t < b; ++t) {
        m(row_block * b + t, i * b + t) = delta[j];
        m(row_block * b + t, (r + j) * b + t) = -alpha[i];
      }
      ++row_block;
    }
  }
  return m;
}

/// Structural matrix actually used by the finite LMI family: the
/// block-diagonal pair annihilators plus the coupling rows. Without the
/// coupling the diagonal structure annihilates the two half-lifts
/// independently, its kernel strictly contains the joint lift, and the
/// relaxed inequality becomes degenerate (a structurally zero quadratic-form
/// direction); with it the kernel at every vertex pair is exactly
/// [alpha kron w; delta kron w].
inline Eigen::MatrixXd coupled_annihilator_at(const Eigen::VectorXd& alpha,
                                              const Eigen::VectorXd& delta,
                                              int n_x) {
  const Eigen::MatrixXd diag = combined_annihilator_at(alpha, delta, n_x);
  const Eigen::MatrixXd cross = coupling_rows(alpha, delta, 2 * n_x);
  Eigen::MatrixXd out(diag.rows() + cross.rows(), diag.cols());
  out << diag, cross;
  return out;
}

/// Vertex-indexed coupled annihilator (zero-based m over simplex vertices,
/// l over mismatch vertices). Row count: 2 n_x r (r-1) + 2 n_x +
/// 2 n_x r coupling_width(r).
inline Eigen::MatrixXd coupled_annihilator(int m, int l,
                                           const DeltaVertexSet& vertices,
                                           int n_x) {
  detail::require(m >= 0 && m < vertices.r,
                  "coupled_annihilator: simplex vertex index out of range");
  detail::require(l >= 0 && l < vertices.dq,
                  "coupled_annihilator: mismatch vertex index out of range");
  Eigen::VectorXd em = Eigen::VectorXd::Zero(vertices.r);
  em[m] = 1.0;
  return coupled_annihilator_at(em, vertices.H.col(l), n_x);
}

inline void to_json(nlohmann::json& j, const DeltaVertexSet& vs) {
  std::vector<std::vector<double>> rows(vs.r);
  for (int i = 0; i < vs.r; ++i) {
    rows[i].assign(vs.H.row(i).begin(), vs.H.row(i).end());
  }
  j = nlohmann::json{{"r", vs.r}, {"dq", vs.dq}, {"H", rows}};
}

}  // namespace polygs

#endif  // POLYGS_GEOMETRY_HPP
