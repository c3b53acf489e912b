// This file is part of polygs.
//
// Copyright (c) 2026 polygs authors
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#ifndef POLYGS_ASSEMBLY_HPP
#define POLYGS_ASSEMBLY_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "polygs/geometry.hpp"
#include "polygs/model.hpp"
#include "polygs/sdp.hpp"

namespace polygs {

/// Handle to one matrix decision variable inside the flat decision vector.
struct VarRef {
  int offset = 0;
  int rows = 0;
  int cols = 0;
  bool symmetric = false;

  int count() const {
    return symmetric ? rows * (rows + 1) / 2 : rows * cols;
  }
  /// Flat index of the scalar controlling entry (a, b); for symmetric
  /// variables only the upper triangle (a <= b) carries scalars.
  int scalar(int a, int b) const {
    if (symmetric) {
      if (a > b) std::swap(a, b);
      return offset + a * cols - a * (a + 1) / 2 + b;
    }
    return offset + a * cols + b;
  }
};

/// Registry of the decision variables of the synthesis condition: Lyapunov
/// blocks P_i, coupling blocks L_ij, the common transform N, gain images X_i,
/// and the free multiplier on the annihilator rows.
struct DecisionLayout {
  int r = 0;
  int n_x = 0;
  int n_u = 0;
  std::vector<VarRef> P;   // r symmetric n_x x n_x
  std::vector<VarRef> L;   // r*r full n_x x n_x, row-major over (i, j)
  VarRef N;                // full n_x x n_x
  std::vector<VarRef> X;   // r full n_u x n_x
  // Free multiplier on the structural-matrix rows: 4 n_x r rows by one column
  // per annihilator row (pairwise + sum-zero + coupling).
  VarRef slack;
  int total = 0;

  static DecisionLayout create(int r, int n_x, int n_u) {
    detail::require(r >= 2, "DecisionLayout: r must be >= 2");
    detail::require(n_x >= 1 && n_u >= 1, "DecisionLayout: bad dimensions");
    DecisionLayout lay;
    lay.r = r;
    lay.n_x = n_x;
    lay.n_u = n_u;
    int at = 0;
    auto push = [&at](VarRef& ref, int rows, int cols, bool sym) {
      ref.offset = at;
      ref.rows = rows;
      ref.cols = cols;
      ref.symmetric = sym;
      at += ref.count();
    };
    lay.P.resize(r);
    for (int i = 0; i < r; ++i) push(lay.P[i], n_x, n_x, true);
    lay.L.resize(r * r);
    for (int i = 0; i < r * r; ++i) push(lay.L[i], n_x, n_x, false);
    push(lay.N, n_x, n_x, false);
    lay.X.resize(r);
    for (int i = 0; i < r; ++i) push(lay.X[i], n_u, n_x, false);
    const int annihilator_rows = 2 * n_x * r * (r - 1) + 2 * n_x +
                                 2 * n_x * r * coupling_width(r);
    push(lay.slack, 4 * n_x * r, annihilator_rows, false);
    lay.total = at;
    return lay;
  }

  const VarRef& Lij(int i, int j) const { return L[i * r + j]; }

  /// Reconstructs the matrix value of one variable from a decision vector.
  Eigen::MatrixXd extract(const Eigen::VectorXd& y, const VarRef& ref) const {
    Eigen::MatrixXd m(ref.rows, ref.cols);
    for (int a = 0; a < ref.rows; ++a) {
      for (int b = 0; b < ref.cols; ++b) m(a, b) = y[ref.scalar(a, b)];
    }
    return m;
  }

  /// Writes a matrix value into the decision vector (upper triangle only for
  /// symmetric variables).
  void pack(const Eigen::MatrixXd& m, const VarRef& ref,
            Eigen::VectorXd& y) const {
    detail::require(m.rows() == ref.rows && m.cols() == ref.cols,
                    "DecisionLayout::pack: shape mismatch");
    for (int a = 0; a < ref.rows; ++a) {
      const int b0 = ref.symmetric ? a : 0;
      for (int b = b0; b < ref.cols; ++b) y[ref.scalar(a, b)] = m(a, b);
    }
  }
};

/// Matrix-valued expression affine in the decision scalars: a constant plus a
/// sparse coefficient pattern per scalar variable.
class AffineMatrixExpr {
 public:
  struct Entry {
    int row;
    int col;
    double value;
  };

  AffineMatrixExpr() = default;
  explicit AffineMatrixExpr(int dim, bool symmetric = false)
      : dim_(dim),
        symmetric_(symmetric),
        constant_(Eigen::MatrixXd::Zero(dim, dim)) {}

  int dim() const { return dim_; }
  bool symmetric_tag() const { return symmetric_; }
  void set_symmetric(bool s) { symmetric_ = s; }
  const Eigen::MatrixXd& constant() const { return constant_; }
  Eigen::MatrixXd& constant() { return constant_; }
  const std::map<int, std::map<std::pair<int, int>, double>>& terms() const {
    return terms_;
  }

  void add_entry(int var, int row, int col, double value) {
    if (value == 0.0) return;
    terms_[var][{row, col}] += value;
  }

  Eigen::MatrixXd evaluate(const Eigen::VectorXd& y) const {
    Eigen::MatrixXd m = constant_;
    for (const auto& [var, entries] : terms_) {
      const double v = y[var];
      if (v == 0.0) continue;
      for (const auto& [rc, coef] : entries) m(rc.first, rc.second) += v * coef;
    }
    return m;
  }

  /// Adds scale * (left * VAR * right), placed with its top-left corner at
  /// (r0, c0). With var_transposed the variable enters as VAR^T. With mirror
  /// the transpose of the placed block is also added at (c0, r0), which on a
  /// diagonal block realizes He(.) and off the diagonal fills the symmetric
  /// counterpart.
  void add_product(const VarRef& var, int r0, int c0,
                   const Eigen::MatrixXd& left, const Eigen::MatrixXd& right,
                   double scale, bool var_transposed, bool mirror) {
    const int vr = var.rows;
    const int vc = var.cols;
    for (int a = 0; a < vr; ++a) {
      const int b0 = var.symmetric ? a : 0;
      for (int b = b0; b < vc; ++b) {
        const int idx = var.scalar(a, b);
        // The scalar (a, b) switches on e_a e_b^T (plus e_b e_a^T when the
        // variable is symmetric and a != b; swapped when transposed).
        place_outer(idx, r0, c0, left, right, scale,
                    var_transposed ? b : a, var_transposed ? a : b, mirror);
        if (var.symmetric && a != b) {
          place_outer(idx, r0, c0, left, right, scale,
                      var_transposed ? a : b, var_transposed ? b : a, mirror);
        }
      }
    }
  }

  /// Adds scale * src (optionally transposed) as a sub-block at (r0, c0).
  void add_block(const AffineMatrixExpr& src, int r0, int c0, double scale,
                 bool transposed) {
    if (transposed) {
      constant_.block(r0, c0, src.dim_, src.dim_) +=
          scale * src.constant_.transpose();
    } else {
      constant_.block(r0, c0, src.dim_, src.dim_) += scale * src.constant_;
    }
    for (const auto& [var, entries] : src.terms_) {
      for (const auto& [rc, coef] : entries) {
        const int rr = transposed ? rc.second : rc.first;
        const int cc = transposed ? rc.first : rc.second;
        add_entry(var, r0 + rr, c0 + cc, scale * coef);
      }
    }
  }

 private:
  void place_outer(int idx, int r0, int c0, const Eigen::MatrixXd& left,
                   const Eigen::MatrixXd& right, double scale, int lcol,
                   int rrow, bool mirror) {
    for (int p = 0; p < left.rows(); ++p) {
      const double lv = left(p, lcol);
      if (lv == 0.0) continue;
      for (int q = 0; q < right.cols(); ++q) {
        const double rv = right(rrow, q);
        if (rv == 0.0) continue;
        const double v = scale * lv * rv;
        add_entry(idx, r0 + p, c0 + q, v);
        if (mirror) add_entry(idx, c0 + q, r0 + p, v);
      }
    }
  }

  int dim_ = 0;
  bool symmetric_ = false;
  Eigen::MatrixXd constant_;
  std::map<int, std::map<std::pair<int, int>, double>> terms_;
};

enum class ConstraintSense { kNegDef, kPosDef };

struct LmiConstraint {
  AffineMatrixExpr expr;
  ConstraintSense sense = ConstraintSense::kNegDef;
  std::string label;
};

/// A finite family of strict matrix inequalities over one decision layout,
/// with the strictness realized as an explicit margin eps.
struct LmiProgram {
  DecisionLayout layout;
  double eps = 1e-8;
  std::vector<LmiConstraint> constraints;
};

/// Certificate block (2 n_x square): closed-loop quadratic-form block for the
/// vertex pair (i, j), affine in N, X_j and P_i. mu is the fixed tuning
/// scalar, not a decision variable (it multiplies N and X and would make the
/// condition bilinear).
inline AffineMatrixExpr build_qhat(const PolytopicSystem& sys,
                                   const DecisionLayout& lay, double mu, int i,
                                   int j) {
  detail::require(mu > 0.0, "build_qhat: mu must be > 0");
  detail::require(i >= 0 && i < lay.r && j >= 0 && j < lay.r,
                  "build_qhat: vertex index out of range");
  const int n = lay.n_x;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  AffineMatrixExpr e(2 * n, true);
  // (1,1): He(A_i N + B_i X_j)
  e.add_product(lay.N, 0, 0, sys.A[i], id, 1.0, false, true);
  e.add_product(lay.X[j], 0, 0, sys.B[i], id, 1.0, false, true);
  // (2,1): P_i - N^T + mu (A_i N + B_i X_j), mirrored into (1,2)
  e.add_product(lay.P[i], n, 0, id, id, 1.0, false, true);
  e.add_product(lay.N, n, 0, id, id, -1.0, true, true);
  e.add_product(lay.N, n, 0, sys.A[i], id, mu, false, true);
  e.add_product(lay.X[j], n, 0, sys.B[i], id, mu, false, true);
  // (2,2): -mu (N + N^T)
  e.add_product(lay.N, n, n, id, id, -mu, false, true);
  return e;
}

/// Mismatch blocks for the vertex pair (i, j):
///   Psi_ij = [[He(B_i X_j) + L_ij, *], [0, 0]]
///   Phi_ij = [[L_ij, *], [-mu B_i X_j, 0]]
/// Neither is symmetric on its own; only their weighted sums enter quadratic
/// forms.
inline std::pair<AffineMatrixExpr, AffineMatrixExpr> build_psi_phi(
    const PolytopicSystem& sys, const DecisionLayout& lay, double mu, int i,
    int j) {
  detail::require(mu > 0.0, "build_psi_phi: mu must be > 0");
  detail::require(i >= 0 && i < lay.r && j >= 0 && j < lay.r,
                  "build_psi_phi: vertex index out of range");
  const int n = lay.n_x;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  AffineMatrixExpr psi(2 * n);
  psi.add_product(lay.X[j], 0, 0, sys.B[i], id, 1.0, false, true);
  psi.add_product(lay.Lij(i, j), 0, 0, id, id, 1.0, false, false);
  AffineMatrixExpr phi(2 * n);
  phi.add_product(lay.Lij(i, j), 0, 0, id, id, 1.0, false, false);
  phi.add_product(lay.X[j], n, 0, sys.B[i], id, -mu, false, true);
  return {std::move(psi), std::move(phi)};
}

/// Lifted certificate matrix (4 n_x r square). Grid block (i, j) of the
/// alpha-alpha quadrant carries 1/2 He over the qhat grid; the mismatch
/// quadrant carries -1/2 He over the psi grid; cross block (p, q) carries
/// -1/2 Phi_{qp}. With zeta = [alpha kron I; delta kron I], the quadratic
/// form (zeta z)^T Theta (zeta z) reproduces the closed-loop derivative
/// expansion
///   sum_ij alpha_i alpha_j z'Qhat_ij z - delta_i delta_j z'Psi_ij z
///          - alpha_i delta_j z'Phi_ij z.
inline AffineMatrixExpr build_theta(const PolytopicSystem& sys,
                                    const DecisionLayout& lay, double mu) {
  const int r = lay.r;
  const int w = 2 * lay.n_x;  // per-grid block size
  const int half = r * w;
  AffineMatrixExpr theta(2 * half, true);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      const AffineMatrixExpr q = build_qhat(sys, lay, mu, i, j);
      theta.add_block(q, i * w, j * w, 0.5, false);
      theta.add_block(q, j * w, i * w, 0.5, true);
      const auto [psi, phi] = build_psi_phi(sys, lay, mu, i, j);
      theta.add_block(psi, half + i * w, half + j * w, -0.5, false);
      theta.add_block(psi, half + j * w, half + i * w, -0.5, true);
      theta.add_block(phi, half + j * w, i * w, -0.5, false);
      theta.add_block(phi, i * w, half + j * w, -0.5, true);
    }
  }
  return theta;
}

/// Finite LMI family: Lyapunov positivity for each vertex plus the relaxed
/// lifted inequality at every simplex-vertex / mismatch-vertex pair. Yields
/// exactly r + r * dq constraints.
inline LmiProgram build_corollary_program(const PolytopicSystem& sys,
                                          const DecisionLayout& lay, double mu,
                                          double eps) {
  detail::require(eps > 0.0, "build_corollary_program: eps must be > 0");
  detail::require(sys.r == lay.r && sys.n_x == lay.n_x && sys.n_u == lay.n_u,
                  "build_corollary_program: layout does not match system");
  LmiProgram prog;
  prog.layout = lay;
  prog.eps = eps;

  const int n = lay.n_x;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < lay.r; ++i) {
    LmiConstraint c;
    c.expr = AffineMatrixExpr(n, true);
    c.expr.add_product(lay.P[i], 0, 0, id, id, 1.0, false, false);
    c.sense = ConstraintSense::kPosDef;
    c.label = "P" + std::to_string(i + 1);
    prog.constraints.push_back(std::move(c));
  }

  const DeltaVertexSet vertices = enumerate_delta_vertices(lay.r);
  const AffineMatrixExpr theta = build_theta(sys, lay, mu);
  const Eigen::MatrixXd big_id =
      Eigen::MatrixXd::Identity(4 * n * lay.r, 4 * n * lay.r);
  for (int m = 0; m < lay.r; ++m) {
    for (int l = 0; l < vertices.dq; ++l) {
      const Eigen::MatrixXd bml = coupled_annihilator(m, l, vertices, n);
      LmiConstraint c;
      c.expr = theta;
      c.expr.add_product(lay.slack, 0, 0, big_id, bml, 1.0, false, true);
      c.sense = ConstraintSense::kNegDef;
      c.label =
          "theta_m" + std::to_string(m + 1) + "_l" + std::to_string(l + 1);
      prog.constraints.push_back(std::move(c));
    }
  }
  return prog;
}

/// Lowers the program to conic standard form: one positive-semidefinite cone
/// per constraint, negative-definite senses negated, and the strictness
/// margin folded into the constant block.
inline SdpProblem compile_standard_form(const LmiProgram& prog) {
  detail::require(!prog.constraints.empty(),
                  "compile_standard_form: empty program");
  SdpProblem problem;
  problem.num_vars = prog.layout.total;
  problem.cones.reserve(prog.constraints.size());
  for (const auto& c : prog.constraints) {
    const double sign = (c.sense == ConstraintSense::kNegDef) ? -1.0 : 1.0;
    SdpCone cone;
    cone.dim = c.expr.dim();
    cone.label = c.label;
    cone.constant =
        sign * c.expr.constant() -
        prog.eps * Eigen::MatrixXd::Identity(c.expr.dim(), c.expr.dim());
    for (const auto& [var, entries] : c.expr.terms()) {
      SdpConeTerm term;
      term.var = var;
      term.entries.reserve(entries.size());
      for (const auto& [rc, coef] : entries) {
        term.entries.push_back({rc.first, rc.second, sign * coef});
      }
      cone.terms.push_back(std::move(term));
    }
    problem.cones.push_back(std::move(cone));
  }
  return problem;
}

/// Debug dump: variable table plus per-constraint sparse triplets, for
/// cross-checking against other tools.
inline nlohmann::json lmi_program_to_json(const LmiProgram& prog) {
  nlohmann::json vars = nlohmann::json::array();
  auto add_var = [&vars](const std::string& name, const VarRef& ref) {
    vars.push_back({{"name", name},
                    {"offset", ref.offset},
                    {"rows", ref.rows},
                    {"cols", ref.cols},
                    {"symmetric", ref.symmetric},
                    {"scalars", ref.count()}});
  };
  const auto& lay = prog.layout;
  for (int i = 0; i < lay.r; ++i) add_var("P" + std::to_string(i + 1), lay.P[i]);
  for (int i = 0; i < lay.r; ++i) {
    for (int j = 0; j < lay.r; ++j) {
      add_var("L" + std::to_string(i + 1) + std::to_string(j + 1),
              lay.Lij(i, j));
    }
  }
  add_var("N", lay.N);
  for (int i = 0; i < lay.r; ++i) add_var("X" + std::to_string(i + 1), lay.X[i]);
  add_var("slack", lay.slack);

  nlohmann::json cons = nlohmann::json::array();
  for (const auto& c : prog.constraints) {
    nlohmann::json triplets = nlohmann::json::array();
    for (const auto& [var, entries] : c.expr.terms()) {
      for (const auto& [rc, coef] : entries) {
        triplets.push_back({var, rc.first, rc.second, coef});
      }
    }
    nlohmann::json constant = nlohmann::json::array();
    for (int a = 0; a < c.expr.dim(); ++a) {
      for (int b = 0; b < c.expr.dim(); ++b) {
        if (c.expr.constant()(a, b) != 0.0) {
          constant.push_back({a, b, c.expr.constant()(a, b)});
        }
      }
    }
    cons.push_back(
        {{"label", c.label},
         {"dim", c.expr.dim()},
         {"sense",
          c.sense == ConstraintSense::kNegDef ? "negdef" : "posdef"},
         {"triplets", triplets},
         {"constant", constant}});
  }
  return nlohmann::json{{"num_vars", lay.total},
                        {"eps", prog.eps},
                        {"variables", vars},
                        {"constraints", cons}};
}

}  // namespace polygs

#endif  // POLYGS_ASSEMBLY_HPP
