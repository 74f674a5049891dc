#include "gse/tensor.hpp"

#include <random>

namespace gse {

double dev2(const SymTensor2& tau) {
  const double m = 0.5 * tau.trace();
  const SymTensor2 d{tau.t11 - m, tau.t12, tau.t22 - m};
  return d.norm2();
}

IsoTensor4 IsoTensor4::compose(const IsoTensor4& o) const {
  // (a1 tr + b1)(a2 tr + b2) with tr(I) = d = 2:
  // trace coefficient a1 a2 d + a1 b2 + a2 b1, shear coefficient b1 b2.
  return {a * o.a * 2.0 + a * o.b + o.a * b, b * o.b};
}

IsoTensor4 IsoTensor4::sqrt() const {
  if (!positive_definite())
    throw std::domain_error("IsoTensor4::sqrt: tensor is not positive definite");
  const double sb = std::sqrt(b);
  // solve (alpha, beta): beta^2 = b, alpha^2 d + 2 alpha beta = a  (d = 2)
  return {(std::sqrt(b + 2.0 * a) - sb) / 2.0, sb};
}

IsoTensor4 IsoTensor4::inverse() const {
  if (b == 0.0 || 2.0 * a + b == 0.0)
    throw std::domain_error("IsoTensor4::inverse: singular tensor");
  return {-a / (b * (2.0 * a + b)), 1.0 / b};
}

Eigen::Matrix3d IsoTensor4::voigt() const {
  Eigen::Matrix3d m;
  m << a + b, a, 0.0, a, a + b, 0.0, 0.0, 0.0, b;
  return m;
}

Eigen::Matrix2d GeneralTensor4::apply_general(const Eigen::Matrix2d& tau) const {
  const SymTensor2 s = SymTensor2::sym(tau);
  const double skew = 0.5 * (tau(0, 1) - tau(1, 0));
  Eigen::Matrix2d out = apply(s).matrix();
  out(0, 1) += V(2, 2) * skew;
  out(1, 0) -= V(2, 2) * skew;
  return out;
}

bool GeneralTensor4::spd(double tol) const {
  if ((V - V.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + V.cwiseAbs().maxCoeff()))
    return false;
  return min_eig() > tol;
}

double GeneralTensor4::min_eig() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (V + V.transpose()));
  return es.eigenvalues().minCoeff();
}

double GeneralTensor4::max_eig() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (V + V.transpose()));
  return es.eigenvalues().maxCoeff();
}

GeneralTensor4 GeneralTensor4::sqrt() const { return general_sqrt(*this); }

GeneralTensor4 general_sqrt(const GeneralTensor4& e) {
  if (!e.spd())
    throw std::domain_error("general_sqrt: Voigt matrix is not symmetric positive definite");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (e.V + e.V.transpose()));
  const Eigen::Vector3d r = es.eigenvalues().cwiseSqrt();
  return {es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose()};
}

// ---------------------------------------------------------------------------

StressLaw StressLaw::linear(const GeneralTensor4& c) {
  return linear_field({c});
}

StressLaw StressLaw::linear_field(std::vector<GeneralTensor4> per_cell) {
  if (per_cell.empty()) throw std::invalid_argument("StressLaw: empty stiffness field");
  StressLaw law;
  law.kind_ = LawKind::Linear;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& c : per_cell) {
    if (!c.spd()) throw std::domain_error("StressLaw: stiffness tensor is not SPD");
    lo = std::min(lo, c.min_eig());
    hi = std::max(hi, c.max_eig());
  }
  law.cells_ = std::move(per_cell);
  law.sigma_star_ = hi;
  law.sigma_lower_ = lo;
  return law;
}

StressLaw StressLaw::hencky_von_mises(const HenckyVonMisesCoeffs& c) {
  StressLaw law;
  law.kind_ = LawKind::HenckyVonMises;
  law.hvm_ = c;
  // |sigma| <= lam0 |tr| |I| + 2 mu0 |tau| <= (2 lam0 + 2 mu0)|tau|;
  // sigma:tau >= 2 mu_inf |tau|^2 since lam0 tr^2 >= 0.
  law.sigma_star_ = 2.0 * c.lambda0 + 2.0 * c.mu0;
  law.sigma_lower_ = 2.0 * c.mu_inf;
  return law;
}

StressLaw StressLaw::damage(const GeneralTensor4& c, const DamageCoeffs& d) {
  if (!c.spd()) throw std::domain_error("StressLaw: stiffness tensor is not SPD");
  StressLaw law;
  law.kind_ = LawKind::Damage;
  law.cells_ = {c};
  law.dmg_ = d;
  law.sigma_star_ = d.d_hi * c.max_eig();
  law.sigma_lower_ = d.d_lo * c.min_eig();
  return law;
}

SymTensor2 StressLaw::eval(int cell, const SymTensor2& tau) const {
  switch (kind_) {
    case LawKind::Linear:
      return stiffness(cell).apply(tau);
    case LawKind::HenckyVonMises: {
      const double rho = dev2(tau);
      const double lt = hvm_.lambda(rho) * tau.trace();
      const double mt = 2.0 * hvm_.mu(rho);
      return {lt + mt * tau.t11, mt * tau.t12, lt + mt * tau.t22};
    }
    case LawKind::Damage:
      return stiffness(cell).apply(tau) * dmg_.f(tau.norm());
  }
  throw std::logic_error("StressLaw::eval: unknown kind");
}

HypothesisReport check_hypotheses(const StressLaw& law, int samples, uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("check_hypotheses: samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ent(-10.0, 10.0);
  auto draw = [&] { return SymTensor2{ent(rng), ent(rng), ent(rng)}; };

  HypothesisReport rep;
  rep.samples = samples;
  const double tol = 1e-10;
  for (int k = 0; k < samples; ++k) {
    const SymTensor2 tau = draw();
    const SymTensor2 omega = draw();
    const SymTensor2 st = law.eval(0, tau);
    const SymTensor2 so = law.eval(0, omega);

    const double growth = law.sigma_star() * tau.norm() + law.sigma_star() - st.norm();
    rep.worst_growth_margin = std::min(rep.worst_growth_margin, growth);
    if (growth < -tol) ++rep.growth_violations;

    const double coer = st.dot(tau) - law.sigma_lower() * tau.norm2();
    rep.worst_coercivity_margin = std::min(rep.worst_coercivity_margin, coer);
    if (coer < -tol) ++rep.coercivity_violations;

    const SymTensor2 dtau = tau - omega;
    const double mono = (st - so).dot(dtau);
    rep.worst_monotonicity_margin = std::min(rep.worst_monotonicity_margin, mono);
    if (mono < -tol) ++rep.monotonicity_violations;
    if (dtau.norm2() > 0.0)
      rep.strict_monotonicity_margin =
          std::min(rep.strict_monotonicity_margin, mono / dtau.norm2());
  }
  return rep;
}

}  // namespace gse
