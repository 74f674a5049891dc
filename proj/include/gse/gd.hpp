#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gse/mesh.hpp"
#include "gse/tensor.hpp"

namespace gse {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// Scalar coefficient row: a linear functional of the dof vector.
using Row = std::vector<std::pair<int, double>>;

inline double row_eval(const Row& r, const Vec& u) {
  double s = 0.0;
  for (const auto& [d, c] : r) s += c * u[d];
  return s;
}

/// Accumulates symmetric rank-1 contributions w * r r^T into a sparse matrix.
/// Uses a dense buffer for moderate dof counts (rows with many entries, as in
/// the nodal scheme, would otherwise produce enormous triplet lists).
class SymAccumulator {
 public:
  explicit SymAccumulator(int n, int dense_threshold = 3000)
      : n_(n), dense_(n <= dense_threshold) {
    if (dense_) buf_ = Eigen::MatrixXd::Zero(n, n);
  }

  void add_outer(double w, const Row& r) {
    if (dense_) {
      for (const auto& [di, ci] : r)
        for (const auto& [dj, cj] : r) buf_(di, dj) += w * ci * cj;
    } else {
      for (const auto& [di, ci] : r)
        for (const auto& [dj, cj] : r) trips_.emplace_back(di, dj, w * ci * cj);
    }
  }

  /// Cross contributions w * (a b^T + b a^T) (kept symmetric).
  void add_cross(double w, const Row& a, const Row& b) {
    if (dense_) {
      for (const auto& [di, ci] : a)
        for (const auto& [dj, cj] : b) {
          buf_(di, dj) += w * ci * cj;
          buf_(dj, di) += w * ci * cj;
        }
    } else {
      for (const auto& [di, ci] : a)
        for (const auto& [dj, cj] : b) {
          trips_.emplace_back(di, dj, w * ci * cj);
          trips_.emplace_back(dj, di, w * ci * cj);
        }
    }
  }

  Eigen::SparseMatrix<double> finish() {
    Eigen::SparseMatrix<double> m(n_, n_);
    if (dense_) {
      m = buf_.sparseView();
    } else {
      m.setFromTriplets(trips_.begin(), trips_.end());
      Eigen::SparseMatrix<double> mt(m.transpose());
      m = 0.5 * (m + mt);  // enforce symmetry to machine precision
    }
    m.makeCompressed();
    return m;
  }

 private:
  int n_;
  bool dense_;
  Eigen::MatrixXd buf_;
  std::vector<Eigen::Triplet<double>> trips_;
};

struct QuadPoint {
  Eigen::Vector2d x;
  double w = 0.0;
  int cell = -1;
};

struct EdgeQuadPoint {
  Eigen::Vector2d x;
  double w = 0.0;
  int edge = -1;  // index into mesh.boundary_edges (always a Neumann edge)
};

/// A Gradient Discretisation as concrete data: a finite dof space (after
/// Dirichlet elimination) together with quadrature-point evaluation tables
/// for the reconstruction Pi, the discrete gradient and the Neumann trace.
/// All tables are linear in the dof vector.
struct GradientDiscretisation {
  int dof_count = 0;
  std::shared_ptr<const Mesh> mesh;
  std::string descriptor;

  std::vector<QuadPoint> vol_qp;
  std::vector<EdgeQuadPoint> neu_qp;

  // Optional region id per volume quadrature point for piecewise-constant
  // coefficient fields (the dual volume for the nodal strain scheme). Empty
  // means "use the owning cell".
  std::vector<int> qp_region;

  // per volume quadrature point: 2 rows for Pi, 4 rows for the gradient
  // (ordering g11, g12, g21, g22 with g_ij = d_j u_i)
  std::vector<std::array<Row, 2>> Pi;
  std::vector<std::array<Row, 4>> Grad;
  // per Neumann quadrature point: 2 rows
  std::vector<std::array<Row, 2>> Trace;

  Eigen::Vector2d eval_Pi(int q, const Vec& u) const {
    return {row_eval(Pi[q][0], u), row_eval(Pi[q][1], u)};
  }
  Eigen::Matrix2d eval_Grad(int q, const Vec& u) const {
    Eigen::Matrix2d g;
    g << row_eval(Grad[q][0], u), row_eval(Grad[q][1], u), row_eval(Grad[q][2], u),
        row_eval(Grad[q][3], u);
    return g;
  }
  SymTensor2 eval_strain(int q, const Vec& u) const {
    return SymTensor2::sym(eval_Grad(q, u));
  }
  Eigen::Vector2d eval_Trace(int q, const Vec& u) const {
    return {row_eval(Trace[q][0], u), row_eval(Trace[q][1], u)};
  }

  /// Strain rows (e11, e22, sqrt2*e12) at quadrature point q, merged from the
  /// gradient rows; the Euclidean product of these Voigt rows realises the
  /// Frobenius product of strains.
  std::array<Row, 3> strain_rows(int q) const;
};

/// Gram matrices of the discrete operators, assembled by quadrature:
///   G = int grad u : grad v     E = int eps(u) : eps(v)
///   M = int Pi u . Pi v         B = int_GammaN  T u . T v
struct GramSet {
  SpMat G, E, M, B;
};

GramSet gram_set(const GradientDiscretisation& gd);

/// Largest generalized eigenvalue of (A, G) with G SPD. Dense solver below
/// `dense_threshold` dofs, G-orthogonal Lanczos iteration above it. Stops at
/// eigenpair residual `tol`, or at residual sqrt(tol) when the top of the
/// spectrum is clustered and only the Ritz value converges. Throws on
/// non-convergence.
double max_generalized_eigenvalue(const SpMat& A, const SpMat& G, uint64_t seed = 12345,
                                  double tol = 1e-10, int dense_threshold = 600);

/// Discrete Poincare / trace constant C_D: the larger of the operator norms of
/// Pi and T with respect to the ||grad .|| norm.
double coercivity_C(const GradientDiscretisation& gd, const GramSet& gs, uint64_t seed = 12345);

/// Discrete Korn constant K_D = max ||v||_D / ||eps(v)||. Throws
/// std::runtime_error("eps_D has nontrivial kernel") when E is singular.
double korn_K(const GradientDiscretisation& gd, const GramSet& gs, uint64_t seed = 12345);

using VectorField = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;
using MatrixField = std::function<Eigen::Matrix2d(const Eigen::Vector2d&)>;

/// A tensor field with enough structure for the limit-conformity defect:
/// value, (row-wise) divergence and normal trace value(x) * n.
struct TensorField {
  MatrixField value;
  VectorField divergence;
};

/// Minimizer of ||Pi w - phi||^2 + ||grad_D w - grad phi||^2, i.e. the
/// solution of (M + G) w = rhs(phi, grad phi).
Vec interpolate_PD(const GradientDiscretisation& gd, const GramSet& gs, const VectorField& phi,
                   const MatrixField& grad_phi);

/// ||Pi w - phi|| + ||grad_D w - grad phi|| at w = interpolate_PD; an upper
/// bound of the consistency indicator within a factor sqrt(2).
double consistency_S(const GradientDiscretisation& gd, const GramSet& gs, const VectorField& phi,
                     const MatrixField& grad_phi);

/// Limit-conformity defect, computed exactly (up to quadrature) as the G-dual
/// norm sqrt(b^T G^-1 b) of the integration-by-parts functional.
double limitconformity_W(const GradientDiscretisation& gd, const GramSet& gs,
                         const TensorField& tau);

}  // namespace gse
