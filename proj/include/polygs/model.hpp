// This file is part of polygs.
//
// Copyright (c) 2026 polygs authors
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POLYGS_MODEL_HPP
#define POLYGS_MODEL_HPP

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace polygs {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Absolute tolerance for simplex / mismatch membership checks. Inputs outside
/// this tolerance are rejected, never renormalized.
inline constexpr double kSimplexTol = 1e-12;

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline bool all_finite(const MatrixXd& m) { return m.allFinite(); }

}  // namespace detail

/// Continuous-time uncertain linear system whose matrices live in the convex
/// hull of r vertex pairs (A_i, B_i).
struct PolytopicSystem {
  int r = 0;
  int n_x = 0;
  int n_u = 0;
  std::vector<MatrixXd> A;
  std::vector<MatrixXd> B;

  PolytopicSystem() = default;

  PolytopicSystem(std::vector<MatrixXd> a, std::vector<MatrixXd> b)
      : A(std::move(a)), B(std::move(b)) {
    detail::require(!A.empty() && A.size() == B.size(),
                    "PolytopicSystem: need matching, nonempty vertex lists");
    r = static_cast<int>(A.size());
    n_x = static_cast<int>(A[0].rows());
    n_u = static_cast<int>(B[0].cols());
    for (int i = 0; i < r; ++i) {
      detail::require(A[i].rows() == n_x && A[i].cols() == n_x,
                      "PolytopicSystem: A vertex shape mismatch");
      detail::require(B[i].rows() == n_x && B[i].cols() == n_u,
                      "PolytopicSystem: B vertex shape mismatch");
      detail::require(detail::all_finite(A[i]) && detail::all_finite(B[i]),
                      "PolytopicSystem: non-finite vertex entry");
    }
  }
};

/// Point of the unit simplex Omega_r (nonnegative weights summing to one).
struct SimplexPoint {
  VectorXd w;

  explicit SimplexPoint(VectorXd weights) : w(std::move(weights)) {
    detail::require(w.size() >= 1, "SimplexPoint: empty weight vector");
    detail::require(w.allFinite(), "SimplexPoint: non-finite weight");
    detail::require(std::abs(w.sum() - 1.0) <= kSimplexTol,
                    "SimplexPoint: weights must sum to 1");
    detail::require((w.array() >= -kSimplexTol).all(),
                    "SimplexPoint: negative weight");
  }

  int size() const { return static_cast<int>(w.size()); }
};

/// Mismatch vector between scheduling estimate and true parameter: entries in
/// [-1, 1] and summing to zero.
struct DeltaPoint {
  VectorXd d;

  explicit DeltaPoint(VectorXd mismatch) : d(std::move(mismatch)) {
    detail::require(d.size() >= 1, "DeltaPoint: empty vector");
    detail::require(d.allFinite(), "DeltaPoint: non-finite entry");
    detail::require(std::abs(d.sum()) <= kSimplexTol,
                    "DeltaPoint: entries must sum to 0");
    detail::require((d.array().abs() <= 1.0 + kSimplexTol).all(),
                    "DeltaPoint: entry outside [-1, 1]");
  }

  int size() const { return static_cast<int>(d.size()); }
};

/// Evaluates (A(alpha), B(alpha)) as the convex combination of the vertices.
inline std::pair<MatrixXd, MatrixXd> evaluate_combination(
    const PolytopicSystem& sys, const SimplexPoint& alpha) {
  detail::require(alpha.size() == sys.r,
                  "evaluate_combination: weight count != vertex count");
  MatrixXd a = MatrixXd::Zero(sys.n_x, sys.n_x);
  MatrixXd b = MatrixXd::Zero(sys.n_x, sys.n_u);
  for (int i = 0; i < sys.r; ++i) {
    a += alpha.w[i] * sys.A[i];
    b += alpha.w[i] * sys.B[i];
  }
  return {a, b};
}

/// Closed-loop matrix sum_i sum_j alpha_i alphahat_j (A_i + B_i K_j).
/// The estimate only needs to sum to one; negative entries are allowed here
/// because the adaptation law preserves the sum, not the sign.
inline MatrixXd closed_loop_matrix(const PolytopicSystem& sys,
                                   const std::vector<MatrixXd>& gains,
                                   const SimplexPoint& alpha,
                                   const VectorXd& alpha_hat) {
  detail::require(static_cast<int>(gains.size()) == sys.r,
                  "closed_loop_matrix: gain count != vertex count");
  detail::require(alpha.size() == sys.r && alpha_hat.size() == sys.r,
                  "closed_loop_matrix: weight length mismatch");
  detail::require(std::abs(alpha_hat.sum() - 1.0) <= 1e-9,
                  "closed_loop_matrix: estimate weights must sum to 1");
  MatrixXd acl = MatrixXd::Zero(sys.n_x, sys.n_x);
  for (int i = 0; i < sys.r; ++i) {
    for (int j = 0; j < sys.r; ++j) {
      acl += alpha.w[i] * alpha_hat[j] * (sys.A[i] + sys.B[i] * gains[j]);
    }
  }
  return acl;
}

/// Four-vertex benchmark family with one scalar parameter k > 0. Vertices 1
/// and 2 are constant; vertices 3 and 4 depend on k through the printed
/// closed forms.
inline PolytopicSystem example_system(double k) {
  detail::require(std::isfinite(k) && k > 0.0, "example_system: k must be > 0");
  std::vector<MatrixXd> A(4, MatrixXd(2, 2));
  std::vector<MatrixXd> B(4, MatrixXd(2, 1));
  A[0] << -8.1818, 0.0, 0.0909, 0.0;
  A[1] << -1.6364, 0.0, 0.0909, 0.0;
  A[2] << 10.0 * (k - 1.0) / (k + 1.0), 0.0, k / (k + 1.0), 0.0;
  A[3] << 2.0 * (k - 1.0) / (k + 1.0), 0.0, k / (k + 1.0), 0.0;
  B[0] << -18.1818, 0.0909;
  B[1] << -3.6364, 0.0909;
  B[2] << -20.0 / (k + 1.0), k / (k + 1.0);
  B[3] << -4.0 / (k + 1.0), k / (k + 1.0);
  return PolytopicSystem(std::move(A), std::move(B));
}

/// Deterministic uniform draw from the unit simplex (normalized exponentials).
inline SimplexPoint random_simplex_point(int r, std::uint64_t seed) {
  detail::require(r >= 1, "random_simplex_point: r must be >= 1");
  if (r == 1) return SimplexPoint(VectorXd::Ones(1));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  VectorXd w(r);
  double total = 0.0;
  for (int i = 0; i < r; ++i) {
    double u = unif(rng);
    while (u <= 0.0) u = unif(rng);
    w[i] = -std::log(u);
    total += w[i];
  }
  w /= total;
  // Squash the residual of the float sum so the invariant holds exactly.
  w[r - 1] += 1.0 - w.sum();
  return SimplexPoint(w);
}

/// Deterministic mismatch draw: the difference of two independent simplex
/// points, which lands inside the mismatch polytope by construction.
inline DeltaPoint random_delta_point(int r, std::uint64_t seed) {
  detail::require(r >= 1, "random_delta_point: r must be >= 1");
  if (r == 1) return DeltaPoint(VectorXd::Zero(1));
  SimplexPoint a = random_simplex_point(r, seed * 2654435761u + 1);
  SimplexPoint b = random_simplex_point(r, seed * 2654435761u + 2);
  VectorXd d = b.w - a.w;
  d[r - 1] -= d.sum();
  return DeltaPoint(d);
}

/// Mismatch draw paired with a concrete alpha so that alpha + delta stays in
/// the unit simplex (the estimate target is itself a simplex point).
inline DeltaPoint random_delta_point_for(const SimplexPoint& alpha,
                                         std::uint64_t seed) {
  const int r = alpha.size();
  if (r == 1) return DeltaPoint(VectorXd::Zero(1));
  SimplexPoint target = random_simplex_point(r, seed);
  VectorXd d = target.w - alpha.w;
  d[r - 1] -= d.sum();
  return DeltaPoint(d);
}

inline void to_json(nlohmann::json& j, const PolytopicSystem& sys) {
  auto mat_to_rows = [](const MatrixXd& m) {
    std::vector<std::vector<double>> rows(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      rows[i].assign(m.row(i).begin(), m.row(i).end());
    }
    return rows;
  };
  std::vector<std::vector<std::vector<double>>> a, b;
  for (const auto& m : sys.A) a.push_back(mat_to_rows(m));
  for (const auto& m : sys.B) b.push_back(mat_to_rows(m));
  j = nlohmann::json{
      {"r", sys.r}, {"n_x", sys.n_x}, {"n_u", sys.n_u}, {"A", a}, {"B", b}};
}

inline void from_json(const nlohmann::json& j, PolytopicSystem& sys) {
  auto rows_to_mat = [](const nlohmann::json& rows) {
    const auto nr = rows.size();
    detail::require(nr > 0, "system json: empty matrix");
    const auto nc = rows[0].size();
    MatrixXd m(nr, nc);
    for (std::size_t i = 0; i < nr; ++i) {
      detail::require(rows[i].size() == nc, "system json: ragged matrix");
      for (std::size_t c = 0; c < nc; ++c) m(i, c) = rows[i][c].get<double>();
    }
    return m;
  };
  std::vector<MatrixXd> a, b;
  for (const auto& m : j.at("A")) a.push_back(rows_to_mat(m));
  for (const auto& m : j.at("B")) b.push_back(rows_to_mat(m));
  sys = PolytopicSystem(std::move(a), std::move(b));
  if (j.contains("r")) {
    detail::require(j.at("r").get<int>() == sys.r, "system json: r mismatch");
  }
  if (j.contains("n_x")) {
    detail::require(j.at("n_x").get<int>() == sys.n_x,
                    "system json: n_x mismatch");
  }
  if (j.contains("n_u")) {
    detail::require(j.at("n_u").get<int>() == sys.n_u,
                    "system json: n_u mismatch");
  }
}

}  // namespace polygs

#endif  // POLYGS_MODEL_HPP
