// Temporary de-risk driver; removed before final assembly of the project.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <random>

#include "polygs/assembly.hpp"
#include "polygs/sdp_barrier.hpp"
#include "polygs/sdp_splitting.hpp"

using namespace polygs;

static void append_normalization(SdpProblem& problem,
                                 const DecisionLayout& lay) {
  SdpCone cone;
  cone.dim = 1;
  cone.constant = Eigen::MatrixXd::Constant(1, 1, -double(lay.n_x * lay.r));
  for (int i = 0; i < lay.r; ++i) {
    for (int a = 0; a < lay.n_x; ++a) {
      SdpConeTerm t2;
      t2.var = lay.P[i].scalar(a, a);
      t2.entries.push_back({0, 0, 1.0});
      cone.terms.push_back(t2);
    }
  }
  cone.label = "normalization";
  problem.cones.push_back(cone);
}

// Quadratic-form oracle: (zeta z)' Theta (zeta z) vs the signed double sum.
static void oracle_check(int r, int n_x, int n_u, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<Eigen::MatrixXd> A(r), B(r);
  for (int i = 0; i < r; ++i) {
    A[i] = Eigen::MatrixXd::NullaryExpr(n_x, n_x, [&] { return gauss(rng); });
    B[i] = Eigen::MatrixXd::NullaryExpr(n_x, n_u, [&] { return gauss(rng); });
  }
  PolytopicSystem sys(A, B);
  DecisionLayout lay = DecisionLayout::create(r, n_x, n_u);
  const double mu = 0.37;
  AffineMatrixExpr theta = build_theta(sys, lay, mu);

  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd y = Eigen::VectorXd::NullaryExpr(
        lay.total, [&] { return gauss(rng); });
    Eigen::VectorXd z = Eigen::VectorXd::NullaryExpr(
        2 * n_x, [&] { return gauss(rng); });
    SimplexPoint alpha = random_simplex_point(r, seed + trial);
    DeltaPoint delta = random_delta_point_for(alpha, seed + 100 + trial);

    Eigen::VectorXd zeta_z(4 * n_x * r);
    for (int i = 0; i < r; ++i) {
      zeta_z.segment(i * 2 * n_x, 2 * n_x) = alpha.w[i] * z;
      zeta_z.segment((r + i) * 2 * n_x, 2 * n_x) = delta.d[i] * z;
    }
    const double lhs = zeta_z.dot(theta.evaluate(y) * zeta_z);

    double rhs = 0.0;
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        const Eigen::MatrixXd q = build_qhat(sys, lay, mu, i, j).evaluate(y);
        const auto [psie, phie] = build_psi_phi(sys, lay, mu, i, j);
        const Eigen::MatrixXd psi = psie.evaluate(y);
        const Eigen::MatrixXd phi = phie.evaluate(y);
        rhs += alpha.w[i] * alpha.w[j] * z.dot(q * z);
        rhs -= delta.d[i] * delta.d[j] * z.dot(psi * z);
        rhs -= alpha.w[i] * delta.d[j] * z.dot(phi * z);
      }
    }
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  std::printf("oracle r=%d: worst rel err %.3e\n", r, worst);
}

// Trivially feasible synthesis: both vertices open-loop stable.
static void easy_case(double mu) {
  std::vector<Eigen::MatrixXd> A(2), B(2);
  A[0] = -Eigen::MatrixXd::Identity(2, 2);
  A[1] = -2.0 * Eigen::MatrixXd::Identity(2, 2);
  B[0] = Eigen::MatrixXd::Zero(2, 1);
  B[0] << 1.0, 0.5;
  B[1] = B[0];
  PolytopicSystem sys(A, B);
  DecisionLayout lay = DecisionLayout::create(2, 2, 1);
  LmiProgram prog = build_corollary_program(sys, lay, mu, 1e-8);
  SdpProblem problem = compile_standard_form(prog);
  append_normalization(problem, lay);
  SdpOptions opts;
  SdpSolution sol = solve_splitting(problem, opts);
  std::printf("easy mu=%g: %s iters=%d secs=%.2f [%s]\n", mu,
              to_string(sol.status), sol.iterations, sol.seconds,
              sol.diagnostics.c_str());
}

int main(int argc, char** argv) {
  if (argc > 1 && std::string(argv[1]) == "oracle") {
    oracle_check(2, 2, 1, 11);
    oracle_check(3, 2, 2, 22);
    oracle_check(4, 2, 1, 33);
    return 0;
  }
  if (argc > 1 && std::string(argv[1]) == "easy") {
    easy_case(1.0);
    easy_case(1e-2);
    return 0;
  }

  const double k = argc > 1 ? std::atof(argv[1]) : 1.0;
  const double mu = argc > 2 ? std::atof(argv[2]) : 1e-11;
  const std::string backend = argc > 3 ? argv[3] : "barrier";
  PolytopicSystem sys = example_system(k);
  DecisionLayout lay = DecisionLayout::create(sys.r, sys.n_x, sys.n_u);
  LmiProgram prog = build_corollary_program(sys, lay, mu, 1e-8);
  SdpProblem problem = compile_standard_form(prog);
  append_normalization(problem, lay);
  SdpOptions opts;
  opts.splitting_max_iter = 20000;
  opts.verbose = std::getenv("POLYGS_VERBOSE") != nullptr;
  SdpSolution sol = backend == "barrier" ? solve_barrier(problem, opts)
                                         : solve_splitting(problem, opts);
  std::printf("k=%g mu=%g %s: %s iters=%d secs=%.2f [%s]\n", k, mu,
              backend.c_str(), to_string(sol.status), sol.iterations,
              sol.seconds, sol.diagnostics.c_str());
  return 0;
}
