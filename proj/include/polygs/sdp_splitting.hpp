// This file is part of polygs.
//
// Copyright (c) 2026 polygs authors
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POLYGS_SDP_SPLITTING_HPP
#define POLYGS_SDP_SPLITTING_HPP

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "polygs/sdp.hpp"

namespace polygs {

/// Warm-start handle for the splitting backend. Stores the decision vector in
/// original (unscaled) units so it transfers between neighboring problem
/// instances with the same layout.
struct SplittingState {
  bool valid = false;
  Eigen::VectorXd y;
  double t = 0.0;
  double rho = 1.0;
};

namespace sdp_detail {

/// Phase-I operator-splitting solver (ADMM on the consensus form): minimize
/// the common shift t subject to every cone shifted by t I being PSD. One
/// factorization of the (constant) normal matrix is cached, so iterations
/// cost one back-substitution plus one eigendecomposition per cone. Suited to
/// sweeping many related instances on a single core.
class SplittingSolver {
 public:
  SplittingSolver(const SdpProblem& problem, const SdpOptions& options)
      : original_(problem), options_(options) {
    scaled_ = equilibrate(problem);
    const int m = problem.num_vars;
    n_rows_ = 0;
    cone_offsets_.clear();
    for (const auto& cone : scaled_.scaled.cones) {
      cone_offsets_.push_back(n_rows_);
      n_rows_ += cone.dim * (cone.dim + 1) / 2;
    }
    // Assemble the svec-space constraint map A (rows: stacked cones, cols:
    // decision scalars plus the shift variable t in the last column).
    std::vector<Eigen::Triplet<double>> trips;
    b_.resize(n_rows_);
    const double rt2 = std::sqrt(2.0);
    for (std::size_t c = 0; c < scaled_.scaled.cones.size(); ++c) {
      const SdpCone& cone = scaled_.scaled.cones[c];
      const int off = cone_offsets_[c];
      b_.segment(off, cone.dim * (cone.dim + 1) / 2) = svec(cone.constant);
      for (const auto& term : cone.terms) {
        for (const auto& e : term.entries) {
          const int idx = off + svec_index(e.row, e.col, cone.dim);
          // Off-diagonal full-matrix entries come in mirrored pairs; each
          // contributes value/sqrt(2) to the shared svec slot.
          const double v = (e.row == e.col) ? e.value : e.value / rt2;
          trips.emplace_back(idx, term.var, v);
        }
      }
      // Shift column: + t I on every cone, in the scaled metric so the shift
      // participates uniformly in the normal matrix.
      for (int i = 0; i < cone.dim; ++i) {
        trips.emplace_back(off + svec_index(i, i, cone.dim), m, 1.0);
      }
    }
    A_.resize(n_rows_, m + 1);
    A_.setFromTriplets(trips.begin(), trips.end());
    A_.makeCompressed();

    Eigen::MatrixXd normal = Eigen::MatrixXd(A_.transpose() * A_);
    const double reg = 1e-10 * std::max(1.0, normal.diagonal().mean());
    normal.diagonal().array() += reg;
    llt_.compute(normal);
    at_b_ = A_.transpose() * b_;
  }

  SdpSolution solve(SplittingState* state) {
    const auto t_start = std::chrono::steady_clock::now();
    const int m = original_.num_vars;
    SdpSolution sol;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(m + 1);
    double rho = 1.0;
    if (state != nullptr && state->valid &&
        state->y.size() == scaled_.var_scale.size()) {
      x.head(m) = state->y.cwiseQuotient(scaled_.var_scale);
      x[m] = state->t;
      rho = state->rho;
    } else {
      double t0 = 0.0;
      for (const auto& cone : scaled_.scaled.cones) {
        t0 = std::max(t0, -min_eigenvalue(cone.constant));
      }
      x[m] = t0 + 0.1;
    }

    Eigen::VectorXd w = A_ * x + b_;
    Eigen::VectorXd z = project(w);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n_rows_);
    Eigen::VectorXd z_prev = z;

    const double tol = options_.tol;
    const int max_iter = std::max(options_.splitting_max_iter, 10);
    int it = 0;
    std::string reason = "iteration cap reached";
    for (it = 1; it <= max_iter; ++it) {
      Eigen::VectorXd rhs = A_.transpose() * (z - u) - at_b_;
      rhs[m] -= 1.0 / rho;
      x = llt_.solve(rhs);
      w = A_ * x + b_;
      z_prev.swap(z);
      z = project(w + u);
      u += w - z;

      if (it % 25 == 0 || it == max_iter) {
        const double rp = (w - z).norm();
        const double rd = rho * (A_.transpose() * (z - z_prev)).norm();
        const double pscale =
            std::max({w.norm(), z.norm(), 1.0});
        const double dscale = std::max(rho * (A_.transpose() * u).norm(), 1.0);
        const double t = x[m];

        // A strictly interior candidate ends the solve regardless of the
        // splitting residuals; the re-check is the authority.
        if (t < -tol && try_accept(x, &sol)) {
          finish(sol, it, t_start, "interior candidate accepted");
          save_state(state, x, rho);
          return sol;
        }

        if (rp <= 1e-10 * pscale && rd <= 1e-9 * dscale) {
          if (t > tol) {
            sol.status = SolveStatus::kInfeasible;
            finish(sol, it, t_start,
                   "phase-I optimum t* = " + std::to_string(t) +
                       " bounded away from zero");
            save_state(state, x, rho);
            auto [ok, eigs] = recheck_cones(original_, unscale(x), 1e30);
            sol.cone_min_eig = eigs;
            sol.y = unscale(x);
            return sol;
          }
          if (t < -tol && try_accept(x, &sol)) {
            finish(sol, it, t_start, "converged feasible");
            save_state(state, x, rho);
            return sol;
          }
          sol.status = SolveStatus::kInconclusive;
          sol.y = unscale(x);
          finish(sol, it, t_start,
                 "converged near boundary, t* = " + std::to_string(t));
          save_state(state, x, rho);
          return sol;
        }

        // Residual balancing; the scaled dual tracks the penalty change.
        if (it % 100 == 0) {
          if (rp > 10.0 * rd * pscale / dscale && rho < 1e6) {
            rho *= 2.0;
            u *= 0.5;
          } else if (rd * pscale / dscale > 10.0 * rp && rho > 1e-6) {
            rho *= 0.5;
            u *= 2.0;
          }
        }
      }
    }

    sol.status = SolveStatus::kInconclusive;
    sol.y = unscale(x);
    // Last-chance acceptance at the cap.
    if (x[m] < -tol && try_accept(x, &sol)) {
      finish(sol, it - 1, t_start, "interior candidate accepted at cap");
      save_state(state, x, rho);
      return sol;
    }
    finish(sol, it - 1, t_start, reason + ", t = " + std::to_string(x[m]));
    save_state(state, x, rho);
    return sol;
  }

 private:
  Eigen::VectorXd unscale(const Eigen::VectorXd& x) const {
    return scaled_.unscale(x.head(original_.num_vars));
  }

  void save_state(SplittingState* state, const Eigen::VectorXd& x,
                  double rho) const {
    if (state == nullptr) return;
    state->valid = true;
    state->y = unscale(x);
    state->t = x[original_.num_vars];
    state->rho = rho;
  }

  bool try_accept(const Eigen::VectorXd& x, SdpSolution* sol) const {
    const Eigen::VectorXd y = unscale(x);
    auto [ok, eigs] = recheck_cones(original_, y, 0.0);
    if (!ok) return false;
    sol->status = SolveStatus::kFeasible;
    sol->y = y;
    sol->cone_min_eig = eigs;
    return true;
  }

  void finish(SdpSolution& sol, int iters,
              std::chrono::steady_clock::time_point t_start,
              const std::string& reason) const {
    sol.iterations = iters;
    sol.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t_start)
                      .count();
    sol.diagnostics = "splitting: " + reason;
  }

  Eigen::VectorXd project(const Eigen::VectorXd& stacked) const {
    Eigen::VectorXd out(stacked.size());
    for (std::size_t c = 0; c < scaled_.scaled.cones.size(); ++c) {
      const int dim = scaled_.scaled.cones[c].dim;
      const int off = cone_offsets_[c];
      const int len = dim * (dim + 1) / 2;
      const Eigen::MatrixXd mat = smat(stacked.segment(off, len), dim);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat);
      const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
      out.segment(off, len) =
          svec(es.eigenvectors() * lam.asDiagonal() *
               es.eigenvectors().transpose());
    }
    return out;
  }

  SdpProblem original_;
  SdpOptions options_;
  ScaledProblem scaled_;
  Eigen::SparseMatrix<double> A_;
  Eigen::VectorXd b_;
  Eigen::VectorXd at_b_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  std::vector<int> cone_offsets_;
  int n_rows_ = 0;
};

}  // namespace sdp_detail

inline SdpSolution solve_splitting(const SdpProblem& problem,
                                   const SdpOptions& options,
                                   SplittingState* state = nullptr) {
  sdp_detail::SplittingSolver solver(problem, options);
  return solver.solve(state);
}

}  // namespace polygs

#endif  // POLYGS_SDP_SPLITTING_HPP
