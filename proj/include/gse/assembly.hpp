#pragma once

#include <functional>

#include "gse/gd.hpp"
#include "gse/tensor.hpp"

namespace gse {

/// Stiffness matrix  A_ij = sum_q w_q  C(q) eps_D(phi_j) : eps_D(phi_i)
/// with a Voigt stiffness per quadrature point (the Picard building block:
/// nonlinear laws freeze their coefficients into such a field).
SpMat assemble_stiffness(const GradientDiscretisation& gd,
                         const std::function<Eigen::Matrix3d(int qp)>& voigt_at_qp);

/// Constant-stiffness convenience overload.
SpMat assemble_stiffness(const GradientDiscretisation& gd, const GeneralTensor4& C);

/// Stiffness with the coefficients of a (possibly nonlinear) law frozen at the
/// strain of the current iterate u.
SpMat assemble_frozen_stiffness(const GradientDiscretisation& gd, const StressLaw& law,
                                const Vec& u);

/// Load vector  b_i = int F . Pi(phi_i) + int_GammaN g . T(phi_i).
Vec assemble_rhs(const GradientDiscretisation& gd, const VectorField& F, const VectorField& g);

/// Nonlinear residual  r_i = int sigma(eps_D u) : eps_D(phi_i) - b_i.
Vec assemble_residual(const GradientDiscretisation& gd, const StressLaw& law, const Vec& u,
                      const Vec& b);

/// L2 norms of the data, ||F||_{L2(Omega)} and ||g||_{L2(Gamma_N)}, evaluated
/// on the discretisation's quadrature (used in the a priori bound).
double data_norm_F(const GradientDiscretisation& gd, const VectorField& F);
double data_norm_g(const GradientDiscretisation& gd, const VectorField& g);

}  // namespace gse
