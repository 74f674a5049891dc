// gse: gradient-scheme elasticity CLI.
//
// Subcommands:
//   solve       solve one configuration, write solution/sample/summary files
//   indicators  S/W/C/K indicator sweep over a refinement list
//   study       convergence study (CSV + SVG) or locking experiment
//   check-law   stress-law hypothesis spot checks
//
// Exit codes: 0 success, 1 configuration/usage error, 2 solver failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gse/assembly.hpp"
#include "gse/config.hpp"
#include "gse/solver.hpp"
#include "gse/study.hpp"

namespace fs = std::filesystem;
using namespace gse;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Setup {
  uint64_t seed = 12345;
  int n = 8;
  BackendSpec spec;
  ManufacturedCase mc;
  SolveOptions opts;
  std::vector<int> n_list;
  std::vector<double> lambda_list;
  std::vector<std::string> locking_backends;
  bool zero_forcing = false;
  int samples = 10000;
};

Setup parse_setup(const Config& cfg) {
  Setup s;
  s.seed = static_cast<uint64_t>(cfg.get_int("seed", 12345));
  s.n = cfg.get_int("mesh.n", 8);

  s.spec.name = cfg.get("backend.name", "p1");
  s.spec.theta = cfg.get_double("backend.theta", -1.0);
  const std::string space = cfg.get("backend.space", "S1");
  if (space == "S1")
    s.spec.huw_space = 1;
  else if (space == "S2")
    s.spec.huw_space = 2;
  else if (space == "S3")
    s.spec.huw_space = 3;
  else
    throw ConfigError("unknown backend.space '" + space + "' (expected S1, S2 or S3)");
  s.spec.cr_allow_mixed = cfg.get_bool("backend.allow_mixed", false);
  s.spec.D_lambda = cfg.get_double("law.D_lambda", 0.0);
  s.spec.D_mu = cfg.get_double("law.D_mu", 0.5);
  const std::string kind = cfg.get("mesh.kind", "");
  if (kind == "tri")
    s.spec.mesh_kind = CellKind::Tri;
  else if (kind == "quad")
    s.spec.mesh_kind = CellKind::Quad;
  else if (!kind.empty())
    throw ConfigError("unknown mesh.kind '" + kind + "' (expected tri or quad)");

  const double lambda = cfg.get_double("law.lambda", 1.0);
  const double mu = cfg.get_double("law.mu", 1.0);
  const std::string case_name = cfg.get("case.name", "lin-smooth-dirichlet");
  try {
    s.mc = builtin_case(case_name, lambda, mu);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  const std::string lk = cfg.get("law.kind", "");
  if (!lk.empty()) {
    const LawKind want = lk == "linear"   ? LawKind::Linear
                         : lk == "hvm"    ? LawKind::HenckyVonMises
                         : lk == "damage" ? LawKind::Damage
                                          : throw ConfigError("unknown law.kind '" + lk + "'");
    if (want != s.mc.law.kind())
      throw ConfigError("law.kind '" + lk + "' conflicts with case '" + case_name + "'");
  }

  s.opts.tol = cfg.get_double("solve.tol", 1e-10);
  s.opts.nonlinear_tol = cfg.get_double("solve.tol", 1e-8);
  s.opts.maxit = cfg.get_int("solve.maxit", 50);
  s.opts.relaxation = cfg.get_double("solve.relaxation", 1.0);
  s.n_list = cfg.get_int_list("study.n_list");
  s.lambda_list = cfg.get_list("study.lambda_list");
  s.zero_forcing = cfg.get("case.forcing", "manufactured") == "zero";
  s.samples = cfg.get_int("law.samples", 10000);

  {  // locking back-end list
    const std::string names = cfg.get("study.backends", "q1,huw");
    std::string cur;
    for (const char c : names + ",") {
      if (c == ',' || c == ' ') {
        if (!cur.empty()) s.locking_backends.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
  }

  if (s.zero_forcing) {
    s.mc.F = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero(); };
    if (s.mc.g) s.mc.g = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero(); };
  }
  return s;
}

GradientDiscretisation build_with_warning(std::shared_ptr<const Mesh> mesh, const Setup& s) {
  bool mixed = false;
  for (const auto& be : mesh->boundary_edges)
    if (be.tag == BoundaryTag::Neumann) mixed = true;
  if (s.spec.name == "cr" && mixed && s.spec.cr_allow_mixed)
    std::cout << "warning: Crouzeix-Raviart with Gamma_D != boundary -- the discrete Korn "
                 "inequality may fail and K_D can blow up under refinement\n";
  return build_backend(mesh, s.spec, s.mc.lambda, s.mc.mu);
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

int cmd_solve(const Setup& s, const fs::path& out) {
  auto mesh = std::make_shared<const Mesh>(
      generate_unit_square(s.n, backend_mesh_kind(s.spec), s.mc.tagging));
  const GradientDiscretisation gd = build_with_warning(mesh, s);
  const GramSet gs = gram_set(gd);
  const Vec b = assemble_rhs(gd, s.mc.F, s.mc.g);

  Vec u;
  double residual = 0.0;
  int iterations = 0;
  try {
    if (s.mc.linear) {
      const SolveResult sr = solve_spd(assemble_stiffness(gd, s.mc.law.stiffness(0)), b, s.opts.tol);
      u = sr.x;
      residual = sr.relative_residual;
      iterations = sr.iterations;
    } else {
      const NonlinearResult nr =
          solve_nonlinear(gd, gs, s.mc.law, b, s.opts.nonlinear_tol, s.opts.maxit, s.opts.relaxation);
      if (!nr.converged) throw SolverError("Picard iteration did not converge");
      u = nr.u;
      residual = nr.residual_trace.empty() ? 0.0 : nr.residual_trace.back();
      iterations = nr.iterations;
    }
  } catch (const SolverError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw SolverError(e.what());
  }

  std::string sol = "dof,value\n";
  for (int i = 0; i < u.size(); ++i)
    sol += std::to_string(i) + ',' + format_number(u[i]) + '\n';
  write_file(out / "solution.csv", sol);

  std::string samples = "x,y,cell,Pi_x,Pi_y,g11,g12,g21,g22\n";
  for (size_t q = 0; q < gd.vol_qp.size(); ++q) {
    const int qi = static_cast<int>(q);
    const Eigen::Vector2d p = gd.dof_count ? gd.eval_Pi(qi, u) : Eigen::Vector2d::Zero();
    const Eigen::Matrix2d g =
        gd.dof_count ? gd.eval_Grad(qi, u) : Eigen::Matrix2d::Zero();
    samples += format_number(gd.vol_qp[q].x.x()) + ',' + format_number(gd.vol_qp[q].x.y()) + ',' +
               std::to_string(gd.vol_qp[q].cell) + ',' + format_number(p.x()) + ',' +
               format_number(p.y()) + ',' + format_number(g(0, 0)) + ',' +
               format_number(g(0, 1)) + ',' + format_number(g(1, 0)) + ',' +
               format_number(g(1, 1)) + '\n';
  }
  write_file(out / "samples.csv", samples);

  const double norm_D = gd.dof_count ? std::sqrt(std::max(0.0, u.dot(gs.G * u))) : 0.0;
  const auto [errH1, errL2] = error_norms(gd, u, s.mc);
  std::string summary;
  summary += "backend = " + gd.descriptor + "\n";
  summary += "case = " + s.mc.name + "\n";
  summary += "n = " + std::to_string(s.n) + "\n";
  summary += "dofs = " + std::to_string(gd.dof_count) + "\n";
  summary += "iterations = " + std::to_string(iterations) + "\n";
  summary += "residual = " + format_number(residual) + "\n";
  summary += "norm_D = " + format_number(norm_D) + "\n";
  summary += "C_D = " + format_number(coercivity_C(gd, gs, s.seed)) + "\n";
  summary += "K_D = " + format_number(korn_K(gd, gs, s.seed)) + "\n";
  summary += "errH1 = " + format_number(errH1) + "\n";
  summary += "errL2 = " + format_number(errL2) + "\n";
  write_file(out / "summary.txt", summary);
  std::cout << "wrote " << (out / "summary.txt").string() << "\n";
  return 0;
}

int cmd_indicators(const Setup& s, const fs::path& out) {
  std::vector<int> ns = s.n_list.empty() ? std::vector<int>{4, 8, 16} : s.n_list;
  std::string csv = "backend,case,n,h,dofs,S,W,C,K\n";
  for (const int n : ns) {
    auto mesh = std::make_shared<const Mesh>(
        generate_unit_square(n, backend_mesh_kind(s.spec), s.mc.tagging));
    const GradientDiscretisation gd = build_with_warning(mesh, s);
    const GramSet gs = gram_set(gd);
    const double S = consistency_S(gd, gs, s.mc.u, s.mc.grad_u);
    const VectorField F = s.mc.F;
    const double W = limitconformity_W(
        gd, gs, {s.mc.stress, [F](const Eigen::Vector2d& x) { return Eigen::Vector2d(-F(x)); }});
    csv += gd.descriptor + ',' + s.mc.name + ',' + std::to_string(n) + ',' +
           format_number(mesh->mesh_size()) + ',' + std::to_string(gd.dof_count) + ',' +
           format_number(S) + ',' + format_number(W) + ',' +
           format_number(coercivity_C(gd, gs, s.seed)) + ',' +
           format_number(korn_K(gd, gs, s.seed)) + '\n';
  }
  write_file(out / "indicators.csv", csv);
  std::cout << "wrote " << (out / "indicators.csv").string() << "\n";
  return 0;
}

int cmd_study(const Setup& s, const fs::path& out) {
  if (!s.lambda_list.empty()) {
    std::vector<BackendSpec> specs;
    for (const auto& name : s.locking_backends) {
      BackendSpec b = s.spec;
      b.name = name;
      specs.push_back(b);
    }
    const auto rows = locking_experiment(specs, s.lambda_list, s.n, s.mc.mu, s.opts);
    write_file(out / "locking.csv", locking_csv(rows));
    std::cout << "wrote " << (out / "locking.csv").string() << "\n";
    return 0;
  }
  if (s.n_list.empty()) throw ConfigError("study.n_list is empty");
  std::vector<ConvergenceRow> rows;
  try {
    rows = convergence_study(s.spec, s.mc, s.n_list, s.opts, s.seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::runtime_error& e) {
    throw SolverError(e.what());
  }
  write_file(out / "study.csv", study_csv(rows));
  write_file(out / "study.svg", study_svg(rows));
  std::cout << "wrote " << (out / "study.csv").string() << " and study.svg\n";
  return 0;
}

int cmd_check_law(const Setup& s, const fs::path& out) {
  const HypothesisReport rep = check_hypotheses(s.mc.law, s.samples, s.seed);
  std::string txt;
  txt += "law = " + s.mc.name + "\n";
  txt += "samples = " + std::to_string(rep.samples) + "\n";
  txt += "growth_violations = " + std::to_string(rep.growth_violations) + "\n";
  txt += "coercivity_violations = " + std::to_string(rep.coercivity_violations) + "\n";
  txt += "monotonicity_violations = " + std::to_string(rep.monotonicity_violations) + "\n";
  txt += "worst_growth_margin = " + format_number(rep.worst_growth_margin) + "\n";
  txt += "worst_coercivity_margin = " + format_number(rep.worst_coercivity_margin) + "\n";
  txt += "worst_monotonicity_margin = " + format_number(rep.worst_monotonicity_margin) + "\n";
  txt += "strict_monotonicity_margin = " + format_number(rep.strict_monotonicity_margin) + "\n";
  txt += std::string("hypotheses = ") + (rep.ok() ? "pass" : "violated") + "\n";
  std::cout << txt;
  write_file(out / "check-law.txt", txt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient-scheme elasticity toolkit"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";

  auto add = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (default: current)");
    return sub;
  };
  CLI::App* solve = add("solve", "solve one configuration");
  CLI::App* indicators = add("indicators", "indicator sweep (S, W, C, K)");
  CLI::App* study = add("study", "convergence study or locking experiment");
  CLI::App* checklaw = add("check-law", "stress-law hypothesis checks");

  CLI11_PARSE(app, argc, argv);

  try {
    const Config cfg = Config::parse_file(config_path);
    Setup s = parse_setup(cfg);
    const fs::path out(out_dir);
    fs::create_directories(out);
    if (solve->parsed()) return cmd_solve(s, out);
    if (indicators->parsed()) return cmd_indicators(s, out);
    if (study->parsed()) return cmd_study(s, out);
    if (checklaw->parsed()) return cmd_check_law(s, out);
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
