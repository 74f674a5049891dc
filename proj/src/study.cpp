#include "gse/study.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <stdexcept>

#include "gse/assembly.hpp"

namespace gse {

namespace {

constexpr double kPi = std::numbers::pi;

struct Analytic {
  VectorField u;
  MatrixField grad;
  HessianField hess;
};

// u = (s, s) with s = sin(pi x) sin(pi y); vanishes on the whole boundary.
Analytic sine_field() {
  Analytic a;
  a.u = [](const Eigen::Vector2d& p) {
    const double s = std::sin(kPi * p.x()) * std::sin(kPi * p.y());
    return Eigen::Vector2d(s, s);
  };
  a.grad = [](const Eigen::Vector2d& p) {
    const double sx = kPi * std::cos(kPi * p.x()) * std::sin(kPi * p.y());
    const double sy = kPi * std::sin(kPi * p.x()) * std::cos(kPi * p.y());
    Eigen::Matrix2d g;
    g << sx, sy, sx, sy;
    return g;
  };
  a.hess = [](const Eigen::Vector2d& p) {
    const double s = std::sin(kPi * p.x()) * std::sin(kPi * p.y());
    const double sxy = kPi * kPi * std::cos(kPi * p.x()) * std::cos(kPi * p.y());
    Eigen::Matrix2d H;
    H << -kPi * kPi * s, sxy, sxy, -kPi * kPi * s;
    return std::array<Eigen::Matrix2d, 2>{H, H};
  };
  return a;
}

// Divergence-free field u = (sin^2(pi x) sin(2 pi y), -sin(2 pi x) sin^2(pi y)),
// zero on the whole boundary.
Analytic incompressible_field() {
  Analytic a;
  a.u = [](const Eigen::Vector2d& p) {
    const double sx = std::sin(kPi * p.x()), sy = std::sin(kPi * p.y());
    return Eigen::Vector2d(sx * sx * std::sin(2.0 * kPi * p.y()),
                           -std::sin(2.0 * kPi * p.x()) * sy * sy);
  };
  a.grad = [](const Eigen::Vector2d& p) {
    const double s2x = std::sin(2.0 * kPi * p.x()), c2x = std::cos(2.0 * kPi * p.x());
    const double s2y = std::sin(2.0 * kPi * p.y()), c2y = std::cos(2.0 * kPi * p.y());
    const double sx2 = std::pow(std::sin(kPi * p.x()), 2);
    const double sy2 = std::pow(std::sin(kPi * p.y()), 2);
    Eigen::Matrix2d g;
    g(0, 0) = kPi * s2x * s2y;
    g(0, 1) = 2.0 * kPi * sx2 * c2y;
    g(1, 0) = -2.0 * kPi * c2x * sy2;
    g(1, 1) = -kPi * s2x * s2y;
    return g;
  };
  a.hess = [](const Eigen::Vector2d& p) {
    const double s2x = std::sin(2.0 * kPi * p.x()), c2x = std::cos(2.0 * kPi * p.x());
    const double s2y = std::sin(2.0 * kPi * p.y()), c2y = std::cos(2.0 * kPi * p.y());
    const double sx2 = std::pow(std::sin(kPi * p.x()), 2);
    const double sy2 = std::pow(std::sin(kPi * p.y()), 2);
    const double pp = kPi * kPi;
    Eigen::Matrix2d H0, H1;
    H0(0, 0) = 2.0 * pp * c2x * s2y;
    H0(0, 1) = H0(1, 0) = 2.0 * pp * s2x * c2y;
    H0(1, 1) = -4.0 * pp * sx2 * s2y;
    H1(0, 0) = 4.0 * pp * s2x * sy2;
    H1(0, 1) = H1(1, 0) = -2.0 * pp * c2x * s2y;
    H1(1, 1) = -2.0 * pp * s2x * c2y;
    return std::array<Eigen::Matrix2d, 2>{H0, H1};
  };
  return a;
}

SymTensor2 deviator(const SymTensor2& t) {
  const double m = 0.5 * t.trace();
  return {t.t11 - m, t.t12, t.t22 - m};
}

MatrixField stress_field(const StressLaw& law, const MatrixField& grad_u) {
  return [law, grad_u](const Eigen::Vector2d& x) {
    return law.eval(0, SymTensor2::sym(grad_u(x))).matrix();
  };
}

}  // namespace

VectorField manufactured_forcing(const StressLaw& law, const MatrixField& grad_u,
                                 const HessianField& hess_u) {
  return [law, grad_u, hess_u](const Eigen::Vector2d& x) {
    const Eigen::Matrix2d g = grad_u(x);
    const auto H = hess_u(x);
    const SymTensor2 eps = SymTensor2::sym(g);
    std::array<SymTensor2, 2> de, ds;  // d_j eps, d_j sigma
    for (int j = 0; j < 2; ++j)
      de[j] = {H[0](0, j), 0.5 * (H[0](1, j) + H[1](0, j)), H[1](1, j)};

    switch (law.kind()) {
      case LawKind::Linear:
        for (int j = 0; j < 2; ++j) ds[j] = law.stiffness(0).apply(de[j]);
        break;
      case LawKind::HenckyVonMises: {
        const auto& c = law.hvm();
        const double rho = dev2(eps);
        const SymTensor2 dv = deviator(eps);
        for (int j = 0; j < 2; ++j) {
          const double drho = 2.0 * dv.dot(de[j]);
          // sigma = lam0 tr(eps) I + 2 mu~(rho) eps
          const double tr_term = c.lambda0 * de[j].trace();
          ds[j] = SymTensor2{tr_term, 0.0, tr_term} + 2.0 * c.dmu(rho) * drho * eps +
                  2.0 * c.mu(rho) * de[j];
        }
        break;
      }
      case LawKind::Damage: {
        const auto& c = law.dmg();
        const double s = eps.norm();
        const SymTensor2 Ce = law.stiffness(0).apply(eps);
        for (int j = 0; j < 2; ++j) {
          const double dsn = s > 1e-14 ? eps.dot(de[j]) / s : 0.0;
          ds[j] = c.df(s) * dsn * Ce + c.f(s) * law.stiffness(0).apply(de[j]);
        }
        break;
      }
    }
    // F_i = -(d_1 sigma_i1 + d_2 sigma_i2)
    return Eigen::Vector2d(-(ds[0].t11 + ds[1].t12), -(ds[0].t12 + ds[1].t22));
  };
}

ManufacturedCase builtin_case(const std::string& name, double lambda, double mu) {
  ManufacturedCase mc;
  mc.name = name;
  mc.lambda = lambda;
  mc.mu = mu;
  mc.tagging = all_dirichlet();

  Analytic a;
  if (name == "lin-smooth-dirichlet" || name == "lin-mixed" || name == "hvm-smooth" ||
      name == "damage-smooth") {
    a = sine_field();
  } else if (name == "lin-incompressible") {
    a = incompressible_field();
  } else {
    throw std::invalid_argument("unknown manufactured case '" + name + "'");
  }

  if (name == "hvm-smooth") {
    HenckyVonMisesCoeffs c;
    c.lambda0 = lambda;
    c.mu0 = mu;
    c.mu_inf = 0.5 * mu;
    mc.law = StressLaw::hencky_von_mises(c);
    mc.linear = false;
  } else if (name == "damage-smooth") {
    mc.law = StressLaw::damage(GeneralTensor4::from_lame(lambda, mu), DamageCoeffs{});
    mc.linear = false;
  } else {
    mc.law = StressLaw::linear(GeneralTensor4::from_lame(lambda, mu));
    mc.linear = true;
  }

  mc.u = a.u;
  mc.grad_u = a.grad;
  mc.hess_u = a.hess;
  mc.F = manufactured_forcing(mc.law, a.grad, a.hess);
  mc.stress = stress_field(mc.law, a.grad);
  if (name == "lin-mixed") {
    mc.tagging = top_neumann();
    const MatrixField stress = mc.stress;
    mc.g = [stress](const Eigen::Vector2d& x) {
      return Eigen::Vector2d(stress(x) * Eigen::Vector2d(0.0, 1.0));  // outward normal on y=1
    };
  }
  return mc;
}

// ---------------------------------------------------------------------------

CellKind backend_mesh_kind(const BackendSpec& spec) {
  if (spec.name == "p1" || spec.name == "cr") return CellKind::Tri;
  if (spec.name == "q1" || spec.name == "huw") return CellKind::Quad;
  if (spec.name == "nodal") return spec.mesh_kind.value_or(CellKind::Tri);
  throw std::invalid_argument("unknown backend '" + spec.name + "'");
}

GradientDiscretisation build_backend(std::shared_ptr<const Mesh> mesh, const BackendSpec& spec,
                                     double lambda, double mu) {
  if (spec.name == "p1") return build_conforming(mesh, ConformingOrder::P1Tri);
  if (spec.name == "q1") return build_conforming(mesh, ConformingOrder::Q1Quad);
  if (spec.name == "cr") return build_crouzeix_raviart(mesh, spec.cr_allow_mixed);
  if (spec.name == "nodal") {
    NodalStrainParams p;
    p.C = GeneralTensor4::from_lame(lambda, mu);
    p.D = GeneralTensor4::from_lame(spec.D_lambda, spec.D_mu);
    return build_nodal_strain(mesh, p);
  }
  if (spec.name == "huw") {
    HuWashizuParams p;
    p.space_choice = spec.huw_space;
    p.theta = spec.theta > 0.0 ? spec.theta : 2.0 * mu;
    p.lambda = lambda;
    p.mu = mu;
    return build_huwashizu(mesh, p);
  }
  throw std::invalid_argument("unknown backend '" + spec.name + "'");
}

// ---------------------------------------------------------------------------

std::pair<double, double> error_norms(const GradientDiscretisation& gd, const Vec& u,
                                      const ManufacturedCase& mc) {
  double h1 = 0.0, l2 = 0.0;
  const bool have = gd.dof_count > 0;
  for (size_t q = 0; q < gd.vol_qp.size(); ++q) {
    const double w = gd.vol_qp[q].w;
    const Eigen::Vector2d dp =
        (have ? gd.eval_Pi(static_cast<int>(q), u) : Eigen::Vector2d::Zero()) -
        mc.u(gd.vol_qp[q].x);
    const Eigen::Matrix2d dg =
        (have ? gd.eval_Grad(static_cast<int>(q), u) : Eigen::Matrix2d::Zero()) -
        mc.grad_u(gd.vol_qp[q].x);
    l2 += w * dp.squaredNorm();
    h1 += w * dg.squaredNorm();
  }
  return {std::sqrt(h1), std::sqrt(l2)};
}

std::vector<ConvergenceRow> convergence_study(const BackendSpec& spec, const ManufacturedCase& mc,
                                              const std::vector<int>& n_list,
                                              const SolveOptions& opts, uint64_t seed) {
  if (n_list.empty()) throw std::invalid_argument("convergence_study: empty n list");
  std::vector<ConvergenceRow> rows;
  for (const int n : n_list) {
    auto mesh = std::make_shared<const Mesh>(
        generate_unit_square(n, backend_mesh_kind(spec), mc.tagging));
    const GradientDiscretisation gd = build_backend(mesh, spec, mc.lambda, mc.mu);
    const GramSet gs = gram_set(gd);
    const Vec b = assemble_rhs(gd, mc.F, mc.g);

    Vec u;
    if (mc.linear) {
      const SpMat A = assemble_stiffness(gd, mc.law.stiffness(0));
      u = solve_spd(A, b, opts.tol).x;
    } else {
      const NonlinearResult nr =
          solve_nonlinear(gd, gs, mc.law, b, opts.nonlinear_tol, opts.maxit, opts.relaxation);
      if (!nr.converged)
        throw std::runtime_error("convergence_study: Picard iteration did not converge at n=" +
                                 std::to_string(n));
      u = nr.u;
    }

    ConvergenceRow r;
    r.backend = gd.descriptor;
    r.case_name = mc.name;
    r.n = n;
    r.h = mesh->mesh_size();
    r.dofs = gd.dof_count;
    std::tie(r.errH1, r.errL2) = error_norms(gd, u, mc);
    r.S = consistency_S(gd, gs, mc.u, mc.grad_u);
    const VectorField F = mc.F;
    r.W = limitconformity_W(gd, gs,
                            {mc.stress, [F](const Eigen::Vector2d& x) {
                               return Eigen::Vector2d(-F(x));
                             }});
    r.C = coercivity_C(gd, gs, seed);
    r.K = korn_K(gd, gs, seed);

    if (mc.linear) {
      const double ss = mc.law.sigma_star(), sl = mc.law.sigma_lower();
      const double rhs =
          (r.K * r.K / sl) * r.W + (r.K * r.K * ss / sl + 1.0) * std::numbers::sqrt2 * r.S;
      r.bound_ok = r.errH1 <= 1.05 * rhs ? 1 : 0;  // 5% quadrature slack
    }
    rows.push_back(std::move(r));
  }

  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].n != 2 * rows[i - 1].n) continue;
    if (rows[i - 1].errH1 > 0.0 && rows[i].errH1 > 0.0 && rows[i].errL2 > 0.0) {
      rows[i].eocH1 = std::log2(rows[i - 1].errH1 / rows[i].errH1);
      rows[i].eocL2 = std::log2(rows[i - 1].errL2 / rows[i].errL2);
      rows[i].has_eoc = true;
    }
  }
  return rows;
}

std::vector<LockingRow> locking_experiment(const std::vector<BackendSpec>& backends,
                                           const std::vector<double>& lambda_list, int n,
                                           double mu, const SolveOptions& opts) {
  std::vector<LockingRow> rows;
  for (const auto& spec : backends) {
    for (const double lambda : lambda_list) {
      const ManufacturedCase mc = builtin_case("lin-incompressible", lambda, mu);
      auto mesh = std::make_shared<const Mesh>(
          generate_unit_square(n, backend_mesh_kind(spec), mc.tagging));
      const GradientDiscretisation gd = build_backend(mesh, spec, lambda, mu);
      const SpMat A = assemble_stiffness(gd, mc.law.stiffness(0));
      const Vec b = assemble_rhs(gd, mc.F, mc.g);
      const Vec u = solve_spd(A, b, opts.tol).x;
      LockingRow r;
      r.backend = gd.descriptor;
      r.lambda = lambda;
      r.n = n;
      r.dofs = gd.dof_count;
      r.errH1 = error_norms(gd, u, mc).first;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string study_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "backend,case,n,h,dofs,errH1,errL2,S,W,C,K,eocH1,eocL2,bound_ok\n";
  for (const auto& r : rows) {
    out += r.backend + ',' + r.case_name + ',' + std::to_string(r.n) + ',' + format_number(r.h) +
           ',' + std::to_string(r.dofs) + ',' + format_number(r.errH1) + ',' +
           format_number(r.errL2) + ',' + format_number(r.S) + ',' + format_number(r.W) + ',' +
           format_number(r.C) + ',' + format_number(r.K) + ',';
    if (r.has_eoc) out += format_number(r.eocH1);
    out += ',';
    if (r.has_eoc) out += format_number(r.eocL2);
    out += ',';
    if (r.bound_ok >= 0) out += r.bound_ok ? "true" : "false";
    out += '\n';
  }
  return out;
}

std::string locking_csv(const std::vector<LockingRow>& rows) {
  std::string out = "backend,lambda,n,dofs,errH1\n";
  for (const auto& r : rows)
    out += r.backend + ',' + format_number(r.lambda) + ',' + std::to_string(r.n) + ',' +
           std::to_string(r.dofs) + ',' + format_number(r.errH1) + '\n';
  return out;
}

std::string study_svg(const std::vector<ConvergenceRow>& rows) {
  // group by backend, keep encounter order
  std::vector<std::string> names;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double hmin = 1e300, hmax = -1e300, emin = 1e300, emax = -1e300;
  for (const auto& r : rows) {
    if (r.h <= 0.0 || r.errH1 <= 0.0) continue;
    if (!series.count(r.backend)) names.push_back(r.backend);
    series[r.backend].emplace_back(r.h, r.errH1);
    hmin = std::min(hmin, r.h);
    hmax = std::max(hmax, r.h);
    emin = std::min(emin, r.errH1);
    emax = std::max(emax, r.errH1);
  }
  const double W = 640, H = 480, ml = 70, mr = 160, mt = 30, mb = 50;
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
      "viewBox=\"0 0 640 480\">\n"
      "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  if (names.empty()) return svg + "</svg>\n";

  auto pad = [](double lo, double hi) {
    const double d = (hi > lo ? hi - lo : 1.0) * 0.05;
    return std::pair<double, double>(lo - d, hi + d);
  };
  const auto [lx0, lx1] = pad(std::log10(hmin), std::log10(hmax));
  const auto [ly0, ly1] = pad(std::log10(emin), std::log10(emax));
  auto X = [&](double h) { return ml + (std::log10(h) - lx0) / (lx1 - lx0) * (W - ml - mr); };
  auto Y = [&](double e) { return H - mb - (std::log10(e) - ly0) / (ly1 - ly0) * (H - mt - mb); };

  svg += "<line x1=\"" + format_number(ml) + "\" y1=\"" + format_number(H - mb) + "\" x2=\"" +
         format_number(W - mr) + "\" y2=\"" + format_number(H - mb) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_number(ml) + "\" y1=\"" + format_number(mt) + "\" x2=\"" +
         format_number(ml) + "\" y2=\"" + format_number(H - mb) + "\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + format_number(0.5 * (ml + W - mr)) + "\" y=\"" + format_number(H - 12) +
         "\" text-anchor=\"middle\" font-size=\"14\">h (log)</text>\n";
  svg += "<text x=\"18\" y=\"" + format_number(0.5 * (mt + H - mb)) +
         "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 18 " +
         format_number(0.5 * (mt + H - mb)) + ")\">errH1 (log)</text>\n";

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                 "#8c564b"};
  int ci = 0;
  for (const auto& name : names) {
    const auto& pts = series[name];
    const std::string color = colors[ci % 6];
    std::string poly = "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [h, e] : pts)
      poly += format_number(X(h)) + ',' + format_number(Y(e)) + ' ';
    poly += "\"/>\n";
    svg += poly;
    for (const auto& [h, e] : pts)
      svg += "<circle cx=\"" + format_number(X(h)) + "\" cy=\"" + format_number(Y(e)) +
             "\" r=\"3\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + format_number(W - mr + 12) + "\" y=\"" +
           format_number(mt + 18.0 * (ci + 1)) + "\" font-size=\"13\" fill=\"" + color + "\">" +
           name + "</text>\n";
    ++ci;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace gse
