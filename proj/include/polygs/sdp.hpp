// This file is part of polygs.
//
// Copyright (c) 2026 polygs authors
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POLYGS_SDP_HPP
#define POLYGS_SDP_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "polygs/model.hpp"

namespace polygs {

struct SdpTriplet {
  int row;
  int col;
  double value;
};

/// Sparse coefficient block of one variable inside one cone (full-matrix
/// entries; symmetric content carries both triangles).
struct SdpConeTerm {
  int var;
  std::vector<SdpTriplet> entries;
};

/// One positive-semidefinite constraint: constant + sum_k y_k F_k >= 0.
struct SdpCone {
  int dim = 0;
  Eigen::MatrixXd constant;
  std::vector<SdpConeTerm> terms;
  std::string label;
};

/// Conic feasibility problem over a flat decision vector.
struct SdpProblem {
  int num_vars = 0;
  std::vector<SdpCone> cones;
};

enum class SolveStatus { kFeasible, kInfeasible, kInconclusive };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kFeasible:
      return "feasible";
    case SolveStatus::kInfeasible:
      return "infeasible";
    default:
      return "inconclusive";
  }
}

inline SolveStatus solve_status_from_string(const std::string& s) {
  if (s == "feasible") return SolveStatus::kFeasible;
  if (s == "infeasible") return SolveStatus::kInfeasible;
  if (s == "inconclusive") return SolveStatus::kInconclusive;
  throw std::invalid_argument("unknown solve status: " + s);
}

struct SdpOptions {
  int max_iter = 500;             // barrier Newton cap
  int splitting_max_iter = 25000; // splitting sweep cap
  double tol = 1e-8;              // feasibility tolerance on the phase-I shift
  double recheck_slack = 1e-7;    // allowed eigenvalue slack in the re-check
  std::string backend = "auto";   // auto | splitting | barrier
  bool verbose = false;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::kInconclusive;
  Eigen::VectorXd y;
  std::vector<double> cone_min_eig;
  int iterations = 0;
  double seconds = 0.0;
  std::string diagnostics;
};

/// Smallest eigenvalue of a symmetric matrix (symmetrized internally).
inline double min_eigenvalue(const Eigen::MatrixXd& m) {
  detail::require(m.rows() == m.cols(), "min_eigenvalue: matrix not square");
  detail::require(m.allFinite(), "min_eigenvalue: non-finite entries");
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Symmetric vectorization with sqrt(2)-scaled off-diagonals so that
/// svec(S1) . svec(S2) = trace(S1 S2). Lower triangle, column-major.
inline Eigen::VectorXd svec(const Eigen::MatrixXd& s) {
  const int n = static_cast<int>(s.rows());
  Eigen::VectorXd v(n * (n + 1) / 2);
  const double rt2 = std::sqrt(2.0);
  int k = 0;
  for (int c = 0; c < n; ++c) {
    v[k++] = s(c, c);
    for (int r = c + 1; r < n; ++r) v[k++] = rt2 * 0.5 * (s(r, c) + s(c, r));
  }
  return v;
}

/// Inverse of svec.
inline Eigen::MatrixXd smat(const Eigen::VectorXd& v, int n) {
  detail::require(v.size() == n * (n + 1) / 2, "smat: length mismatch");
  Eigen::MatrixXd s(n, n);
  const double inv_rt2 = 1.0 / std::sqrt(2.0);
  int k = 0;
  for (int c = 0; c < n; ++c) {
    s(c, c) = v[k++];
    for (int r = c + 1; r < n; ++r) {
      s(r, c) = v[k] * inv_rt2;
      s(c, r) = v[k] * inv_rt2;
      ++k;
    }
  }
  return s;
}

/// Index of entry (r, c), r >= c, inside svec ordering.
inline int svec_index(int r, int c, int n) {
  if (r < c) std::swap(r, c);
  return c * n - c * (c - 1) / 2 + (r - c);
}

inline Eigen::MatrixXd evaluate_cone(const SdpCone& cone,
                                     const Eigen::VectorXd& y) {
  Eigen::MatrixXd m = cone.constant;
  for (const auto& term : cone.terms) {
    const double v = y[term.var];
    if (v == 0.0) continue;
    for (const auto& e : term.entries) m(e.row, e.col) += v * e.value;
  }
  return m;
}

/// Independent feasibility re-check: every cone evaluated at y must have
/// minimum eigenvalue >= -slack. This is the authority on the Feasible label,
/// never the solver's own report.
inline std::pair<bool, std::vector<double>> recheck_cones(
    const SdpProblem& problem, const Eigen::VectorXd& y, double slack) {
  std::vector<double> eigs;
  eigs.reserve(problem.cones.size());
  bool ok = true;
  for (const auto& cone : problem.cones) {
    const double ev = min_eigenvalue(evaluate_cone(cone, y));
    eigs.push_back(ev);
    if (!(ev >= -slack)) ok = false;
  }
  return {ok, eigs};
}

namespace sdp_detail {

/// Diagonally equilibrated copy of a problem. Cone c is replaced by
/// D_c G_c(y) D_c with diagonal D_c, and variable k is replaced by
/// y_k = sigma_k yt_k; both transformations preserve the feasibility verdict
/// exactly. Needed because the synthesis conditions mix O(1) and O(mu)
/// coefficient blocks that otherwise destroy the solvers' centering.
struct ScaledProblem {
  SdpProblem scaled;
  std::vector<Eigen::VectorXd> cone_scale;
  Eigen::VectorXd var_scale;

  Eigen::VectorXd unscale(const Eigen::VectorXd& yt) const {
    return var_scale.cwiseProduct(yt);
  }
};

inline ScaledProblem equilibrate(const SdpProblem& problem, int passes = 3) {
  ScaledProblem sp;
  sp.scaled = problem;
  sp.var_scale = Eigen::VectorXd::Ones(problem.num_vars);
  sp.cone_scale.reserve(problem.cones.size());
  for (const auto& cone : problem.cones) {
    sp.cone_scale.push_back(Eigen::VectorXd::Ones(cone.dim));
  }

  auto clamp = [](double v, double lo, double hi) {
    return std::min(std::max(v, lo), hi);
  };

  for (int pass = 0; pass < passes; ++pass) {
    // Row equilibration per cone on the aggregate magnitude stencil.
    for (std::size_t c = 0; c < sp.scaled.cones.size(); ++c) {
      SdpCone& cone = sp.scaled.cones[c];
      Eigen::VectorXd rownorm = cone.constant.cwiseAbs().rowwise().maxCoeff();
      for (const auto& term : cone.terms) {
        for (const auto& e : term.entries) {
          rownorm[e.row] = std::max(rownorm[e.row], std::abs(e.value));
        }
      }
      Eigen::VectorXd d(cone.dim);
      for (int i = 0; i < cone.dim; ++i) {
        d[i] = rownorm[i] > 0.0 ? 1.0 / std::sqrt(rownorm[i]) : 1.0;
        d[i] = clamp(d[i], 1e-8, 1e8);
      }
      cone.constant = d.asDiagonal() * cone.constant * d.asDiagonal();
      for (auto& term : cone.terms) {
        for (auto& e : term.entries) e.value *= d[e.row] * d[e.col];
      }
      sp.cone_scale[c] = sp.cone_scale[c].cwiseProduct(d);
    }
    // Column equilibration across cones per variable.
    Eigen::VectorXd colnorm = Eigen::VectorXd::Zero(problem.num_vars);
    for (const auto& cone : sp.scaled.cones) {
      for (const auto& term : cone.terms) {
        for (const auto& e : term.entries) {
          colnorm[term.var] = std::max(colnorm[term.var], std::abs(e.value));
        }
      }
    }
    for (auto& cone : sp.scaled.cones) {
      for (auto& term : cone.terms) {
        if (colnorm[term.var] <= 0.0) continue;
        for (auto& e : term.entries) e.value /= colnorm[term.var];
      }
    }
    for (int k = 0; k < problem.num_vars; ++k) {
      if (colnorm[k] > 0.0) sp.var_scale[k] /= colnorm[k];
    }
  }
  return sp;
}

}  // namespace sdp_detail

inline nlohmann::json sdp_problem_to_json(const SdpProblem& problem) {
  nlohmann::json cones = nlohmann::json::array();
  for (const auto& cone : problem.cones) {
    nlohmann::json constant = nlohmann::json::array();
    for (int r = 0; r < cone.dim; ++r) {
      for (int c = 0; c <= r; ++c) {
        if (cone.constant(r, c) != 0.0) {
          constant.push_back({r, c, cone.constant(r, c)});
        }
      }
    }
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& term : cone.terms) {
      nlohmann::json entries = nlohmann::json::array();
      for (const auto& e : term.entries) {
        entries.push_back({e.row, e.col, e.value});
      }
      terms.push_back({{"var", term.var}, {"entries", entries}});
    }
    cones.push_back({{"dim", cone.dim},
                     {"label", cone.label},
                     {"constant", constant},
                     {"terms", terms}});
  }
  return nlohmann::json{{"num_vars", problem.num_vars}, {"cones", cones}};
}

inline SdpProblem sdp_problem_from_json(const nlohmann::json& j) {
  SdpProblem problem;
  problem.num_vars = j.at("num_vars").get<int>();
  for (const auto& jc : j.at("cones")) {
    SdpCone cone;
    cone.dim = jc.at("dim").get<int>();
    cone.label = jc.value("label", "");
    cone.constant = Eigen::MatrixXd::Zero(cone.dim, cone.dim);
    for (const auto& t : jc.at("constant")) {
      const int r = t[0].get<int>();
      const int c = t[1].get<int>();
      const double v = t[2].get<double>();
      cone.constant(r, c) = v;
      cone.constant(c, r) = v;
    }
    for (const auto& jt : jc.at("terms")) {
      SdpConeTerm term;
      term.var = jt.at("var").get<int>();
      detail::require(term.var >= 0 && term.var < problem.num_vars,
                      "sdp json: variable index out of range");
      for (const auto& e : jt.at("entries")) {
        term.entries.push_back(
            {e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
      }
      cone.terms.push_back(std::move(term));
    }
    problem.cones.push_back(std::move(cone));
  }
  return problem;
}

}  // namespace polygs

#endif  // POLYGS_SDP_HPP
