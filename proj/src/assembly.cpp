#include "gse/assembly.hpp"

#include <cmath>

namespace gse {

SpMat assemble_stiffness(const GradientDiscretisation& gd,
                         const std::function<Eigen::Matrix3d(int)>& voigt_at_qp) {
  SymAccumulator acc(gd.dof_count);
  for (size_t q = 0; q < gd.vol_qp.size(); ++q) {
    const double w = gd.vol_qp[q].w;
    const Eigen::Matrix3d V = voigt_at_qp(static_cast<int>(q));
    const auto eps = gd.strain_rows(static_cast<int>(q));
    for (int a = 0; a < 3; ++a) {
      if (V(a, a) != 0.0) acc.add_outer(w * V(a, a), eps[a]);
      for (int b = a + 1; b < 3; ++b) {
        const double c = 0.5 * (V(a, b) + V(b, a));  // symmetrised off-diagonal
        if (c != 0.0) acc.add_cross(w * c, eps[a], eps[b]);
      }
    }
  }
  return acc.finish();
}

SpMat assemble_stiffness(const GradientDiscretisation& gd, const GeneralTensor4& C) {
  return assemble_stiffness(gd, [&C](int) { return C.V; });
}

SpMat assemble_frozen_stiffness(const GradientDiscretisation& gd, const StressLaw& law,
                                const Vec& u) {
  return assemble_stiffness(gd, [&gd, &law, &u](int q) -> Eigen::Matrix3d {
    const int cell = gd.vol_qp[q].cell;
    switch (law.kind()) {
      case LawKind::Linear:
        return law.stiffness(cell).V;
      case LawKind::HenckyVonMises: {
        const double rho = dev2(gd.eval_strain(q, u));
        return IsoTensor4::from_lame(law.hvm().lambda(rho), law.hvm().mu(rho)).voigt();
      }
      case LawKind::Damage: {
        const double s = gd.eval_strain(q, u).norm();
        return (law.dmg().f(s) * law.stiffness(cell).V).eval();
      }
    }
    return Eigen::Matrix3d::Identity();
  });
}

Vec assemble_rhs(const GradientDiscretisation& gd, const VectorField& F, const VectorField& g) {
  Vec b = Vec::Zero(gd.dof_count);
  for (size_t q = 0; q < gd.vol_qp.size(); ++q) {
    const double w = gd.vol_qp[q].w;
    const Eigen::Vector2d f = F(gd.vol_qp[q].x);
    for (int k = 0; k < 2; ++k)
      for (const auto& [d, c] : gd.Pi[q][k]) b[d] += w * c * f[k];
  }
  if (g) {
    for (size_t q = 0; q < gd.neu_qp.size(); ++q) {
      const double w = gd.neu_qp[q].w;
      const Eigen::Vector2d gv = g(gd.neu_qp[q].x);
      for (int k = 0; k < 2; ++k)
        for (const auto& [d, c] : gd.Trace[q][k]) b[d] += w * c * gv[k];
    }
  }
  return b;
}

Vec assemble_residual(const GradientDiscretisation& gd, const StressLaw& law, const Vec& u,
                      const Vec& b) {
  Vec r = -b;
  for (size_t q = 0; q < gd.vol_qp.size(); ++q) {
    const double w = gd.vol_qp[q].w;
    const int qi = static_cast<int>(q);
    const Eigen::Vector3d sv = law.eval(gd.vol_qp[q].cell, gd.eval_strain(qi, u)).voigt();
    const auto eps = gd.strain_rows(qi);
    for (int a = 0; a < 3; ++a)
      for (const auto& [d, c] : eps[a]) r[d] += w * c * sv[a];
  }
  return r;
}

double data_norm_F(const GradientDiscretisation& gd, const VectorField& F) {
  double s = 0.0;
  for (const auto& q : gd.vol_qp) s += q.w * F(q.x).squaredNorm();
  return std::sqrt(s);
}

double data_norm_g(const GradientDiscretisation& gd, const VectorField& g) {
  if (!g) return 0.0;
  double s = 0.0;
  for (const auto& q : gd.neu_qp) s += q.w * g(q.x).squaredNorm();
  return std::sqrt(s);
}

}  // namespace gse
