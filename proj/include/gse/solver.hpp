#pragma once

#include "gse/gd.hpp"
#include "gse/tensor.hpp"

namespace gse {

struct SolveResult {
  Vec x;
  int iterations = 0;          // 0 for the direct path
  double relative_residual = 0.0;
  bool converged = false;
};

/// Solve the SPD system A x = b: sparse Cholesky below `dense_threshold`
/// unknowns, Jacobi-preconditioned conjugate gradients above it. Throws
/// std::runtime_error on failure to converge.
SolveResult solve_spd(const SpMat& A, const Vec& b, double tol = 1e-10, int maxit = 20000,
                      int dense_threshold = 600);

struct NonlinearResult {
  Vec u;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_trace;  // dual-norm residual after each iterate
  std::vector<double> iterate_norms;   // ||u^k||_D = ||grad_D u^k||_{L2}
};

/// Picard (frozen-coefficient) iteration for the gradient scheme with a
/// nonlinear stress law: at each step the coefficients are frozen at the
/// current iterate and the resulting linear gradient scheme is solved.
/// Convergence: dual residual sqrt(r^T G^-1 r) <= tol * (1 + dual norm of b).
/// `relaxation` in (0, 1] damps the update.
NonlinearResult solve_nonlinear(const GradientDiscretisation& gd, const GramSet& gs,
                                const StressLaw& law, const Vec& b, double tol = 1e-8,
                                int maxit = 50, double relaxation = 1.0);

}  // namespace gse
