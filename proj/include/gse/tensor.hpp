#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace gse {

/// Symmetric 2x2 tensor value (strain or stress at a point). Only the upper
/// triangle is stored, so symmetry holds by construction.
struct SymTensor2 {
  double t11 = 0.0;
  double t12 = 0.0;
  double t22 = 0.0;

  static SymTensor2 identity() { return {1.0, 0.0, 1.0}; }

  /// Symmetric part of a general 2x2 matrix.
  static SymTensor2 sym(const Eigen::Matrix2d& m) {
    return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)};
  }

  double trace() const { return t11 + t22; }

  /// Frobenius inner product tau:omega (counts the off-diagonal twice).
  double dot(const SymTensor2& o) const {
    return t11 * o.t11 + 2.0 * t12 * o.t12 + t22 * o.t22;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }

  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << t11, t12, t12, t22;
    return m;
  }

  /// Voigt coordinates (t11, t22, sqrt(2) t12); the Euclidean inner product of
  /// Voigt vectors equals the Frobenius tensor product.
  Eigen::Vector3d voigt() const {
    return {t11, t22, std::numbers::sqrt2 * t12};
  }
  static SymTensor2 from_voigt(const Eigen::Vector3d& v) {
    return {v[0], v[2] / std::numbers::sqrt2, v[1]};
  }

  SymTensor2 operator+(const SymTensor2& o) const {
    return {t11 + o.t11, t12 + o.t12, t22 + o.t22};
  }
  SymTensor2 operator-(const SymTensor2& o) const {
    return {t11 - o.t11, t12 - o.t12, t22 - o.t22};
  }
  SymTensor2 operator*(double c) const { return {c * t11, c * t12, c * t22}; }
};

inline SymTensor2 operator*(double c, const SymTensor2& t) { return t * c; }

/// Scalar squared norm of the 2D deviator, (tau - tr(tau)/2 I):(tau - tr(tau)/2 I).
double dev2(const SymTensor2& tau);

/// Isotropic 4th-order tensor acting as tau -> a tr(tau) I + b tau.
/// The Lame pair (lambda, mu) corresponds to (a, b) = (lambda, 2 mu).
struct IsoTensor4 {
  double a = 0.0;
  double b = 1.0;

  static IsoTensor4 from_lame(double lambda, double mu) { return {lambda, 2.0 * mu}; }
  static IsoTensor4 identity() { return {0.0, 1.0}; }

  double lambda() const { return a; }
  double mu() const { return 0.5 * b; }

  bool positive_definite() const { return b > 0.0 && 2.0 * a + b > 0.0; }

  SymTensor2 apply(const SymTensor2& tau) const {
    const double t = a * tau.trace();
    return {t + b * tau.t11, b * tau.t12, t + b * tau.t22};
  }

  /// Action extended to general 2x2 matrices; transpose-compatible.
  Eigen::Matrix2d apply_general(const Eigen::Matrix2d& tau) const {
    return a * tau.trace() * Eigen::Matrix2d::Identity() + b * tau;
  }

  /// Composition C1 C2, again isotropic (closed under composition).
  IsoTensor4 compose(const IsoTensor4& o) const;

  /// The SPD square root, itself isotropic. Throws std::domain_error if the
  /// tensor is not positive definite.
  IsoTensor4 sqrt() const;

  IsoTensor4 inverse() const;

  /// Voigt 3x3 matrix [[a+b, a, 0], [a, a+b, 0], [0, 0, b]].
  Eigen::Matrix3d voigt() const;
};

/// General 4th-order tensor on symmetric 2x2 tensors, stored as a 3x3 matrix
/// acting on Voigt coordinates (t11, t22, sqrt(2) t12).
struct GeneralTensor4 {
  Eigen::Matrix3d V = Eigen::Matrix3d::Identity();

  static GeneralTensor4 from_iso(const IsoTensor4& c) { return {c.voigt()}; }
  static GeneralTensor4 from_lame(double lambda, double mu) {
    return from_iso(IsoTensor4::from_lame(lambda, mu));
  }

  SymTensor2 apply(const SymTensor2& tau) const {
    return SymTensor2::from_voigt(V * tau.voigt());
  }

  /// Extension to general 2x2 matrices: the symmetric part goes through the
  /// Voigt matrix, the antisymmetric part is scaled by the shear entry V(2,2).
  /// For isotropic tensors this reproduces a tr(tau) I + b tau exactly.
  Eigen::Matrix2d apply_general(const Eigen::Matrix2d& tau) const;

  bool spd(double tol = 0.0) const;

  /// Smallest / largest eigenvalue of the Voigt matrix (coercivity / growth
  /// constants of the induced quadratic form).
  double min_eig() const;
  double max_eig() const;

  /// SPD square root via eigendecomposition. Throws std::domain_error on
  /// non-SPD input.
  GeneralTensor4 sqrt() const;
  GeneralTensor4 inverse() const { return {V.inverse().eval()}; }

  GeneralTensor4 compose(const GeneralTensor4& o) const { return {(V * o.V).eval()}; }
};

/// Independent eigendecomposition-based square root of an SPD Voigt matrix.
GeneralTensor4 general_sqrt(const GeneralTensor4& e);

// ---------------------------------------------------------------------------
// Stress laws

/// Hencky-von Mises coefficient functions of rho = dev2(strain):
///   mu~(rho)  = mu_inf + (mu0 - mu_inf)/sqrt(1+rho),   0 < mu_inf < mu0
///   lam~(rho) = lambda0 (constant)
struct HenckyVonMisesCoeffs {
  double lambda0 = 1.0;
  double mu0 = 1.0;
  double mu_inf = 0.5;

  double mu(double rho) const { return mu_inf + (mu0 - mu_inf) / std::sqrt(1.0 + rho); }
  double dmu(double rho) const {
    return -0.5 * (mu0 - mu_inf) / std::pow(1.0 + rho, 1.5);
  }
  double lambda(double) const { return lambda0; }
  double dlambda(double) const { return 0.0; }
};

/// Damage residual-stiffness factor f(s); default f(s) = d_lo + (d_hi-d_lo)/(1+s),
/// for which s f(s) is strictly increasing.
struct DamageCoeffs {
  double d_lo = 0.2;
  double d_hi = 1.0;
  // Overrides the default formula when set (used e.g. to build deliberately
  // non-monotone laws).
  std::function<double(double)> f_override;

  double f(double s) const {
    if (f_override) return f_override(s);
    return d_lo + (d_hi - d_lo) / (1.0 + s);
  }
  double df(double s) const {
    if (f_override) {  // central difference; override laws are test-only
      const double h = 1e-6 * (1.0 + s);
      return (f_override(s + h) - f_override(s - h)) / (2.0 * h);
    }
    return -(d_hi - d_lo) / ((1.0 + s) * (1.0 + s));
  }
};

enum class LawKind { Linear, HenckyVonMises, Damage };

/// A stress response sigma(x, tau) with declared growth/coercivity constants.
/// The stiffness field is piecewise constant per mesh cell; a single-entry
/// field broadcasts to every cell.
class StressLaw {
 public:
  static StressLaw linear(const GeneralTensor4& c);
  static StressLaw linear_field(std::vector<GeneralTensor4> per_cell);
  static StressLaw hencky_von_mises(const HenckyVonMisesCoeffs& c);
  static StressLaw damage(const GeneralTensor4& c, const DamageCoeffs& d);

  LawKind kind() const { return kind_; }
  const GeneralTensor4& stiffness(int cell) const {
    return cells_.size() == 1 ? cells_[0] : cells_.at(static_cast<size_t>(cell));
  }
  const HenckyVonMisesCoeffs& hvm() const { return hvm_; }
  const DamageCoeffs& dmg() const { return dmg_; }

  double sigma_star() const { return sigma_star_; }
  double sigma_lower() const { return sigma_lower_; }
  void set_constants(double star, double lower) {
    sigma_star_ = star;
    sigma_lower_ = lower;
  }

  SymTensor2 eval(int cell, const SymTensor2& tau) const;

 private:
  LawKind kind_ = LawKind::Linear;
  std::vector<GeneralTensor4> cells_{GeneralTensor4{}};
  HenckyVonMisesCoeffs hvm_;
  DamageCoeffs dmg_;
  double sigma_star_ = 1.0;
  double sigma_lower_ = 1.0;
};

/// Report of the growth/coercivity/monotonicity spot checks on seeded random
/// tensor pairs. Violations are counted, not thrown.
struct HypothesisReport {
  int samples = 0;
  int growth_violations = 0;
  int coercivity_violations = 0;
  int monotonicity_violations = 0;
  double worst_growth_margin = std::numeric_limits<double>::infinity();
  double worst_coercivity_margin = std::numeric_limits<double>::infinity();
  double worst_monotonicity_margin = std::numeric_limits<double>::infinity();
  // min of (sigma(tau)-sigma(omega)):(tau-omega)/|tau-omega|^2 over the pairs
  double strict_monotonicity_margin = std::numeric_limits<double>::infinity();

  bool ok() const {
    return growth_violations == 0 && coercivity_violations == 0 &&
           monotonicity_violations == 0;
  }
};

HypothesisReport check_hypotheses(const StressLaw& law, int samples, uint64_t seed);

}  // namespace gse
