#pragma once

#include <memory>

#include "gse/gd.hpp"
#include "gse/mesh.hpp"
#include "gse/tensor.hpp"

namespace gse {

enum class ConformingOrder { P1Tri, Q1Quad };

/// Conforming Lagrange discretisation: Pi = nodal interpolation, grad = exact
/// basis gradient, trace = boundary restriction; Dirichlet dofs eliminated.
GradientDiscretisation build_conforming(std::shared_ptr<const Mesh> mesh, ConformingOrder order);

/// Crouzeix-Raviart on triangles: edge-midpoint dofs, cellwise ("broken")
/// gradients, edge-midpoint Neumann trace. With a mixed boundary the discrete
/// Korn inequality can fail, so Gamma_D != boundary is refused unless
/// allow_mixed_boundary is set.
GradientDiscretisation build_crouzeix_raviart(std::shared_ptr<const Mesh> mesh,
                                              bool allow_mixed_boundary = false);

/// Parameters of the stabilised nodal strain scheme: stiffness C and SPD
/// stabilisation tensor D, piecewise constant per dual volume (a single value
/// broadcasts to every dual volume).
struct NodalStrainParams {
  GeneralTensor4 C;
  GeneralTensor4 D;
  std::vector<GeneralTensor4> C_field;  // optional, size = num vertices
  std::vector<GeneralTensor4> D_field;

  const GeneralTensor4& c_at(int vol) const {
    return C_field.empty() ? C : C_field.at(static_cast<size_t>(vol));
  }
  const GeneralTensor4& d_at(int vol) const {
    return D_field.empty() ? D : D_field.at(static_cast<size_t>(vol));
  }
};

/// Nodal strain gradient discretisation on a conforming P1/Q1 base:
///   grad_D v = Pi* grad v + C^{-1/2} D^{1/2} (grad v - Pi* grad v)
/// with Pi* the dual-volume-average projection. Quadrature runs over the
/// dual fragments; qp_region gives the owning dual volume of each point.
GradientDiscretisation build_nodal_strain(std::shared_ptr<const Mesh> mesh,
                                          const NodalStrainParams& params);

/// Direct assembly of the projection + stabilisation bilinear form
///   int C Pi* eps(u) : Pi* eps(v) + int D (eps(u) - Pi* eps(u)) : (eps(v) - Pi* eps(v)),
/// bypassing the gradient-scheme route; used as the equivalence oracle.
SpMat assemble_nodal_strain_reference(std::shared_ptr<const Mesh> mesh,
                                      const NodalStrainParams& params);

/// Per-quadrature-point Voigt stiffness of the nodal scheme (the dual-volume
/// value of C at each fragment point), for assembling the gradient-scheme
/// stiffness of the same bilinear form.
std::function<Eigen::Matrix3d(int)> nodal_qp_stiffness(const GradientDiscretisation& gd,
                                                       const NodalStrainParams& params);

// ---------------------------------------------------------------------------
// Hu-Washizu (statically condensed) on parallelogram quadrilaterals.

struct HuWashizuParams {
  int space_choice = 1;  // 1, 2 or 3
  double theta = 2.0;    // > 0; default set to 2*mu by callers that know mu
  double lambda = 1.0;
  double mu = 1.0;
};

/// Orthonormal bases (reference L2 inner product on (-1,1)^2) of the
/// constant-trace part S^c and its orthogonal complement S^t of the symmetric
/// stress space S_box^i. Each element is a 3x3 coefficient matrix: rows are
/// the components (11, 22, 12), columns the monomials (1, xhat, yhat).
struct SBoxDecomposition {
  std::vector<Eigen::Matrix3d> c_basis;
  std::vector<Eigen::Matrix3d> t_basis;
  /// Skew elements [[0, c], [-c, 0]] of the full tensor space, c expanded in
  /// the monomials (1, xhat, yhat).
  std::vector<Eigen::Vector3d> skew_basis;
};

SBoxDecomposition decompose_Sh(int space_choice, double lambda, double mu);

/// Reference L2 inner product of two symmetric coefficient matrices.
double sbox_inner(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

/// Hu-Washizu gradient discretisation:
///   grad_D v = P_{S^c} grad v + sqrt(theta) C^{-1/2} P_{S^t} grad v
/// realised per element in the reference inner product (exact for
/// parallelograms, where the Jacobian is constant). The symmetric part of the
/// gradient is projected onto the symmetric S-basis and the skew part onto the
/// skew elements of S, so that grad_D v -> grad v under refinement.
GradientDiscretisation build_huwashizu(std::shared_ptr<const Mesh> mesh,
                                       const HuWashizuParams& params);

/// Direct assembly of int P_S eps(v) : C_h P_S eps(u) with
/// C_h d = C P_{S^c} d + theta P_{S^t} d; the equivalence oracle.
SpMat assemble_huwashizu_reference(std::shared_ptr<const Mesh> mesh,
                                   const HuWashizuParams& params);

}  // namespace gse
