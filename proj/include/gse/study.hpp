#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gse/backends.hpp"
#include "gse/gd.hpp"
#include "gse/solver.hpp"
#include "gse/tensor.hpp"

namespace gse {

/// Hessians of the two displacement components.
using HessianField = std::function<std::array<Eigen::Matrix2d, 2>(const Eigen::Vector2d&)>;

/// A manufactured problem: closed-form displacement with derivatives, a stress
/// law, and the derived data F = -div sigma(eps(u)) and g = sigma(eps(u)) n
/// (all hand-differentiated; spot-verified against finite differences).
struct ManufacturedCase {
  std::string name;
  StressLaw law;
  TagRule tagging;
  bool linear = true;
  double lambda = 1.0, mu = 1.0;  // material parameters seen by the back-ends

  VectorField u;
  MatrixField grad_u;
  HessianField hess_u;
  VectorField F;
  VectorField g;        // traction; null when Gamma_D is the whole boundary
  MatrixField stress;   // sigma(eps(u))(x)
};

/// Builtin cases: lin-smooth-dirichlet, lin-mixed, hvm-smooth, damage-smooth,
/// lin-incompressible. Lame parameters apply to the linear/damage stiffness.
ManufacturedCase builtin_case(const std::string& name, double lambda = 1.0, double mu = 1.0);

/// Forcing field -div sigma(eps(u)) for a law and analytic displacement,
/// by the exact chain rule.
VectorField manufactured_forcing(const StressLaw& law, const MatrixField& grad_u,
                                 const HessianField& hess_u);

// ---------------------------------------------------------------------------

/// Back-end selection by name + parameters (the CLI-facing descriptor).
struct BackendSpec {
  std::string name = "p1";  // p1 | q1 | cr | nodal | huw
  int huw_space = 1;
  double theta = -1.0;      // <= 0 means the default 2*mu
  bool cr_allow_mixed = false;
  double D_lambda = 0.0, D_mu = 0.5;  // nodal stabilisation tensor
  std::optional<CellKind> mesh_kind;  // nodal runs on either; others are fixed
};

/// Mesh kind the back-end runs on (honours BackendSpec::mesh_kind for nodal).
CellKind backend_mesh_kind(const BackendSpec& spec);

/// Build the discretisation for the given material parameters. Throws
/// std::invalid_argument for unknown names and propagates back-end errors.
GradientDiscretisation build_backend(std::shared_ptr<const Mesh> mesh, const BackendSpec& spec,
                                     double lambda, double mu);

// ---------------------------------------------------------------------------

struct ConvergenceRow {
  std::string backend, case_name;
  int n = 0;
  double h = 0.0;
  int dofs = 0;
  double errH1 = 0.0, errL2 = 0.0;
  double S = 0.0, W = 0.0, C = 0.0, K = 0.0;
  double eocH1 = 0.0, eocL2 = 0.0;
  bool has_eoc = false;
  int bound_ok = -1;  // 1 true, 0 false, -1 not applicable (nonlinear case)
};

struct SolveOptions {
  double tol = 1e-10;            // linear relative residual
  double nonlinear_tol = 1e-8;   // Picard dual-residual factor
  int maxit = 50;
  double relaxation = 1.0;
};

std::pair<double, double> error_norms(const GradientDiscretisation& gd, const Vec& u,
                                      const ManufacturedCase& mc);

/// Rows per n, with eoc over consecutive doublings and the Theorem 3.1 bound
/// check (errH1 <= (K^2/sigma_*) W + (K^2 sigma^*/sigma_* + 1) sqrt2 S, with
/// 5% quadrature slack) for linear cases.
std::vector<ConvergenceRow> convergence_study(const BackendSpec& spec, const ManufacturedCase& mc,
                                              const std::vector<int>& n_list,
                                              const SolveOptions& opts = {},
                                              uint64_t seed = 12345);

struct LockingRow {
  std::string backend;
  double lambda = 0.0;
  int n = 0;
  int dofs = 0;
  double errH1 = 0.0;
};

/// errH1 of the divergence-free case across lambda values at fixed n.
std::vector<LockingRow> locking_experiment(const std::vector<BackendSpec>& backends,
                                           const std::vector<double>& lambda_list, int n,
                                           double mu = 1.0, const SolveOptions& opts = {});

// ---------------------------------------------------------------------------
// Deterministic text emission (fixed formatting; identical inputs give
// byte-identical output).

std::string study_csv(const std::vector<ConvergenceRow>& rows);
std::string locking_csv(const std::vector<LockingRow>& rows);
/// Log-log SVG plot of errH1 versus h, one polyline per back-end.
std::string study_svg(const std::vector<ConvergenceRow>& rows);

/// Fixed-format floating-point rendering used in all CSV output.
std::string format_number(double v);

}  // namespace gse
