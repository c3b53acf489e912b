// This file is part of polygs.
//
// Copyright (c) 2026 polygs authors
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POLYGS_SDP_BARRIER_HPP
#define POLYGS_SDP_BARRIER_HPP

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polygs/sdp.hpp"

namespace polygs {
namespace sdp_detail {

/// Phase-I barrier path-following solver: minimize the common shift t with
/// every (equilibrated) cone shifted by t I, following the central path of
/// the log-det barrier with damped Newton steps. Feasible exits as soon as an
/// iterate passes the independent re-check on the original cones; Infeasible
/// requires the certified central-path lower bound on the phase-I optimum to
/// clear the tolerance. Second-order steps make this the reliable choice on
/// thin feasible sets (small tuning scalars spread the cone spectra over many
/// decades).
class BarrierSolver {
 public:
  BarrierSolver(const SdpProblem& problem, const SdpOptions& options)
      : original_(problem), options_(options) {
    scaled_ = equilibrate(problem);
    m_ = problem.num_vars;
    // Flatten cone coefficient data for tight Hessian assembly loops.
    for (const auto& cone : scaled_.scaled.cones) {
      ConeData cd;
      cd.dim = cone.dim;
      cd.constant = cone.constant;
      for (const auto& term : cone.terms) {
        cd.var.push_back(term.var);
        cd.start.push_back(static_cast<int>(cd.rows.size()));
        for (const auto& e : term.entries) {
          cd.rows.push_back(e.row);
          cd.cols.push_back(e.col);
          cd.vals.push_back(e.value);
        }
      }
      cd.start.push_back(static_cast<int>(cd.rows.size()));
      nu_ += cone.dim;
      cones_.push_back(std::move(cd));
    }
    nu_ += 1.0;  // shift lower-bound cone
  }

  SdpSolution solve() {
    const auto t_start = std::chrono::steady_clock::now();
    SdpSolution sol;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m_ + 1);
    {
      double t0 = 0.0;
      for (const auto& cd : cones_) {
        t0 = std::max(t0, -min_eigenvalue(cd.constant));
      }
      x[m_] = t0 + 1.0;
    }

    const double tol = options_.tol;
    double eta = 1.0;
    const double eta_max = 1e14;
    int newton_total = 0;
    std::string reason;

    Eigen::VectorXd grad(m_ + 1);
    Eigen::MatrixXd hess(m_ + 1, m_ + 1);

    while (newton_total < options_.max_iter) {
      // Centering for the current path parameter.
      bool centered = false;
      for (int inner = 0; inner < 60 && newton_total < options_.max_iter;
           ++inner) {
        ++newton_total;
        if (!assemble(x, eta, grad, hess)) {
          finish(sol, newton_total, t_start, "barrier: lost cone interior");
          sol.y = scaled_.unscale(x.head(m_));
          return sol;
        }
        Eigen::VectorXd step = solve_newton(hess, grad);
        const double decrement2 = -grad.dot(step);
        if (!(decrement2 > 0.0) || !step.allFinite()) {
          // Descent failed even with regularization; report what we have.
          break;
        }
        const double a = line_search(x, step, grad, eta);
        if (options_.verbose) {
          std::printf("  eta=%.1e newton=%d t=%.6e dec2=%.3e a=%.3f\n", eta,
                      newton_total, x[m_], decrement2, a);
        }
        if (a <= 1e-14) break;
        x += a * step;

        // Opportunistic feasibility exit: the re-check is the authority.
        if (x[m_] < -tol && try_accept(x, &sol)) {
          finish(sol, newton_total, t_start, "barrier: interior accepted");
          return sol;
        }
        if (decrement2 <= 0.25 * 0.25 && a > 0.9) {
          centered = true;
          break;
        }
      }

      if (centered) {
        // Central-path suboptimality bound: t - t* <= (nu + 2 sqrt(nu)) / eta
        // at an approximately centered iterate.
        const double gap = (nu_ + 2.0 * std::sqrt(nu_)) / eta;
        const double t_lower = x[m_] - gap;
        if (t_lower > tol) {
          sol.status = SolveStatus::kInfeasible;
          sol.y = scaled_.unscale(x.head(m_));
          auto [ok, eigs] = recheck_cones(original_, sol.y, 1e30);
          sol.cone_min_eig = eigs;
          finish(sol, newton_total, t_start,
                 "barrier: phase-I optimum certified > " +
                     std::to_string(t_lower));
          return sol;
        }
        if (eta > eta_max) {
          reason = "barrier: path parameter cap reached, t = " +
                   std::to_string(x[m_]);
          break;
        }
        eta *= 10.0;
      } else if (newton_total < options_.max_iter) {
        reason = "barrier: centering stalled, t = " + std::to_string(x[m_]);
        break;
      }
    }

    if (reason.empty()) {
      reason = "barrier: iteration cap reached, t = " + std::to_string(x[m_]);
    }
    // Last chance before reporting Inconclusive.
    if (x[m_] < -tol && try_accept(x, &sol)) {
      finish(sol, newton_total, t_start, "barrier: interior accepted at cap");
      return sol;
    }
    sol.status = SolveStatus::kInconclusive;
    sol.y = scaled_.unscale(x.head(m_));
    finish(sol, newton_total, t_start, reason);
    return sol;
  }

 private:
  struct ConeData {
    int dim = 0;
    Eigen::MatrixXd constant;
    std::vector<int> var;
    std::vector<int> start;  // var-major offsets into rows/cols/vals
    std::vector<int> rows;
    std::vector<int> cols;
    std::vector<double> vals;
  };

  static constexpr double kShiftCap = 2.0;  // barrier floor at t = -kShiftCap

  Eigen::MatrixXd cone_value(const ConeData& cd, const Eigen::VectorXd& x) const {
    Eigen::MatrixXd s = cd.constant;
    s.diagonal().array() += x[m_];
    for (std::size_t v = 0; v < cd.var.size(); ++v) {
      const double y = x[cd.var[v]];
      if (y == 0.0) continue;
      for (int e = cd.start[v]; e < cd.start[v + 1]; ++e) {
        s(cd.rows[e], cd.cols[e]) += y * cd.vals[e];
      }
    }
    return 0.5 * (s + s.transpose());
  }

  bool positive_definite(const Eigen::MatrixXd& s) const {
    Eigen::LLT<Eigen::MatrixXd> llt(s);
    return llt.info() == Eigen::Success;
  }

  /// Barrier value, or +inf when outside the domain.
  double barrier(const Eigen::VectorXd& x, double eta) const {
    if (x[m_] <= -kShiftCap) return std::numeric_limits<double>::infinity();
    double f = eta * x[m_] - std::log(x[m_] + kShiftCap);
    for (const auto& cd : cones_) {
      Eigen::LLT<Eigen::MatrixXd> llt(cone_value(cd, x));
      if (llt.info() != Eigen::Success) {
        return std::numeric_limits<double>::infinity();
      }
      f -= 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    }
    return f;
  }

  bool assemble(const Eigen::VectorXd& x, double eta, Eigen::VectorXd& grad,
                Eigen::MatrixXd& hess) {
    grad.setZero();
    hess.setZero();
    grad[m_] = eta - 1.0 / (x[m_] + kShiftCap);
    hess(m_, m_) = 1.0 / ((x[m_] + kShiftCap) * (x[m_] + kShiftCap));

    Eigen::MatrixXd sinv, w;
    for (const auto& cd : cones_) {
      const Eigen::MatrixXd s = cone_value(cd, x);
      Eigen::LLT<Eigen::MatrixXd> llt(s);
      if (llt.info() != Eigen::Success) return false;
      sinv = llt.solve(Eigen::MatrixXd::Identity(cd.dim, cd.dim));

      // Gradient: -tr(S^-1 F_k); shift column gets -tr(S^-1).
      const int nvars = static_cast<int>(cd.var.size());
      for (int v = 0; v < nvars; ++v) {
        double acc = 0.0;
        for (int e = cd.start[v]; e < cd.start[v + 1]; ++e) {
          acc += cd.vals[e] * sinv(cd.cols[e], cd.rows[e]);
        }
        grad[cd.var[v]] -= acc;
      }
      grad[m_] -= sinv.trace();

      // Hessian: stream W_v = S^-1 F_v S^-1 and take sparse inner products
      // against F_u for u <= v plus the shift column.
      hess(m_, m_) += sinv.squaredNorm();
      for (int v = 0; v < nvars; ++v) {
        w.setZero(cd.dim, cd.dim);
        for (int e = cd.start[v]; e < cd.start[v + 1]; ++e) {
          w.noalias() +=
              cd.vals[e] * (sinv.col(cd.rows[e]) * sinv.row(cd.cols[e]));
        }
        const int gv = cd.var[v];
        for (int u = 0; u <= v; ++u) {
          double acc = 0.0;
          for (int e = cd.start[u]; e < cd.start[u + 1]; ++e) {
            acc += cd.vals[e] * w(cd.rows[e], cd.cols[e]);
          }
          const int gu = cd.var[u];
          hess(std::max(gv, gu), std::min(gv, gu)) += acc;
        }
        hess(m_, gv) += w.trace();
      }
    }
    hess = hess.selfadjointView<Eigen::Lower>();
    return true;
  }

  Eigen::VectorXd solve_newton(Eigen::MatrixXd& hess,
                               const Eigen::VectorXd& grad) const {
    double reg = 1e-12 * (1.0 + hess.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd h = hess;
      h.diagonal().array() += reg;
      Eigen::LLT<Eigen::MatrixXd> llt(h);
      if (llt.info() == Eigen::Success) {
        return llt.solve(-grad);
      }
      reg *= 100.0;
    }
    return Eigen::VectorXd::Zero(grad.size());
  }

  double line_search(const Eigen::VectorXd& x, const Eigen::VectorXd& step,
                     const Eigen::VectorXd& grad, double eta) const {
    const double f0 = barrier(x, eta);
    const double slope = grad.dot(step);
    double a = 1.0;
    for (int i = 0; i < 40; ++i) {
      const double f = barrier(x + a * step, eta);
      if (std::isfinite(f) && f <= f0 + 1e-4 * a * slope) return a;
      a *= 0.6;
    }
    return 0.0;
  }

  bool try_accept(const Eigen::VectorXd& x, SdpSolution* sol) const {
    const Eigen::VectorXd y = scaled_.unscale(x.head(m_));
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
    sol.diagnostics = reason;
  }

  SdpProblem original_;
  SdpOptions options_;
  ScaledProblem scaled_;
  std::vector<ConeData> cones_;
  int m_ = 0;
  double nu_ = 0.0;
};

}  // namespace sdp_detail

inline SdpSolution solve_barrier(const SdpProblem& problem,
                                 const SdpOptions& options) {
  sdp_detail::BarrierSolver solver(problem, options);
  return solver.solve();
}

}  // namespace polygs

#endif  // POLYGS_SDP_BARRIER_HPP
