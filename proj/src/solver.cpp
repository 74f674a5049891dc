#include "gse/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>

#include "gse/assembly.hpp"

namespace gse {

SolveResult solve_spd(const SpMat& A, const Vec& b, double tol, int maxit, int dense_threshold) {
  SolveResult out;
  if (b.size() == 0) {
    out.converged = true;
    return out;
  }
  if (A.rows() < dense_threshold) {
    Eigen::SimplicialLLT<SpMat> llt(A);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("solve_spd: Cholesky factorization failed (matrix not SPD?)");
    out.x = llt.solve(b);
    const double bn = b.norm();
    out.relative_residual = bn > 0.0 ? (A * out.x - b).norm() / bn : 0.0;
    out.converged = true;
    return out;
  }
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg(A);
  cg.setTolerance(tol);
  cg.setMaxIterations(maxit);
  out.x = cg.solve(b);
  out.iterations = static_cast<int>(cg.iterations());
  out.relative_residual = cg.error();
  out.converged = cg.info() == Eigen::Success;
  if (!out.converged)
    throw std::runtime_error("solve_spd: CG did not converge (relative residual " +
                             std::to_string(out.relative_residual) + ")");
  return out;
}

NonlinearResult solve_nonlinear(const GradientDiscretisation& gd, const GramSet& gs,
                                const StressLaw& law, const Vec& b, double tol, int maxit,
                                double relaxation) {
  if (!(relaxation > 0.0 && relaxation <= 1.0))
    throw std::invalid_argument("solve_nonlinear: relaxation must be in (0, 1]");
  NonlinearResult out;
  out.u = Vec::Zero(gd.dof_count);
  if (gd.dof_count == 0) {
    out.converged = true;
    return out;
  }

  Eigen::SimplicialLLT<SpMat> gllt(gs.G);
  if (gllt.info() != Eigen::Success)
    throw std::runtime_error("solve_nonlinear: G factorization failed");
  auto dual_norm = [&](const Vec& r) { return std::sqrt(std::max(0.0, r.dot(gllt.solve(r)))); };
  const double stop = tol * (1.0 + dual_norm(b));

  for (int it = 1; it <= maxit; ++it) {
    const SpMat A = assemble_frozen_stiffness(gd, law, out.u);
    const Vec next = solve_spd(A, b).x;
    out.u = (1.0 - relaxation) * out.u + relaxation * next;
    out.iterations = it;
    out.iterate_norms.push_back(std::sqrt(std::max(0.0, out.u.dot(gs.G * out.u))));
    const double res = dual_norm(assemble_residual(gd, law, out.u, b));
    out.residual_trace.push_back(res);
    if (res <= stop) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace gse
