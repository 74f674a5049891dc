// Acceptance gate: one line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gse/assembly.hpp"
#include "gse/backends.hpp"
#include "gse/solver.hpp"
#include "gse/study.hpp"
#include "gse/tensor.hpp"

using namespace gse;

namespace {

int failures = 0;
std::string detail;

void report(int criterion, bool pass) {
  const std::string note = pass || detail.empty() ? "" : "  (" + detail + ")";
  std::printf("criterion %d: %s%s\n", criterion, pass ? "PASS" : "FAIL", note.c_str());
  if (!pass) ++failures;
  detail.clear();
}

void run(int criterion, const std::function<bool()>& body) {
  bool pass = false;
  try {
    pass = body();
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  report(criterion, pass);
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * (1.0 + std::abs(b)); }

double rel_diff(const SpMat& a, const SpMat& b) {
  const Eigen::MatrixXd da(a), db(b);
  return (da - db).cwiseAbs().maxCoeff() / db.cwiseAbs().maxCoeff();
}

// criterion 1: isotropic tensor algebra identities over random Lame pairs
bool c1_tensor_identities() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.1, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const IsoTensor4 c = IsoTensor4::from_lame(d(rng), d(rng));
    const IsoTensor4 r = c.sqrt();
    const IsoTensor4 rr = r.compose(r);
    if (!close(rr.a, c.a, 1e-12) || !close(rr.b, c.b, 1e-12)) {
      detail = "sqrt(C)^2 != C";
      return false;
    }
    const IsoTensor4 inv = c.inverse();
    const IsoTensor4 id = c.compose(inv);
    if (!close(id.a, 0.0, 1e-12) || !close(id.b, 1.0, 1e-12)) {
      detail = "C C^-1 != Id";
      return false;
    }
    // the Voigt route agrees with the closed form
    const GeneralTensor4 g = GeneralTensor4::from_iso(c);
    const GeneralTensor4 gr = general_sqrt(g);
    if ((gr.V - GeneralTensor4::from_iso(r).V).cwiseAbs().maxCoeff() > 1e-10) {
      detail = "general sqrt disagrees with the isotropic sqrt";
      return false;
    }
    // action identity on a random symmetric tensor
    std::uniform_real_distribution<double> t(-2.0, 2.0);
    const SymTensor2 tau{t(rng), t(rng), t(rng)};
    const SymTensor2 via_voigt = g.apply(tau);
    const SymTensor2 direct = c.apply(tau);
    if ((via_voigt - direct).norm() > 1e-12 * (1.0 + direct.norm())) {
      detail = "Voigt action disagrees with the closed form";
      return false;
    }
  }
  return true;
}

// criterion 2: stress-law hypothesis checks pass for valid laws, flag broken ones
bool c2_hypotheses() {
  const int samples = 10000;
  const StressLaw lin = StressLaw::linear(GeneralTensor4::from_lame(2.0, 1.5));
  if (!check_hypotheses(lin, samples, 7).ok()) {
    detail = "linear law flagged";
    return false;
  }
  HenckyVonMisesCoeffs hc;
  if (!check_hypotheses(StressLaw::hencky_von_mises(hc), samples, 7).ok()) {
    detail = "Hencky-von Mises law flagged";
    return false;
  }
  DamageCoeffs dc;
  if (!check_hypotheses(StressLaw::damage(GeneralTensor4::from_lame(1.0, 1.0), dc), samples, 7)
           .ok()) {
    detail = "damage law flagged";
    return false;
  }
  // deliberately broken law: f(s) = 1/(1+s)^2 makes s f(s) non-monotone
  DamageCoeffs bad;
  bad.f_override = [](double s) { return 1.0 / ((1.0 + s) * (1.0 + s)); };
  StressLaw broken = StressLaw::damage(GeneralTensor4::from_lame(1.0, 1.0), bad);
  broken.set_constants(4.0, 1e-6);
  if (check_hypotheses(broken, samples, 7).monotonicity_violations == 0) {
    detail = "broken damage law not flagged";
    return false;
  }
  return true;
}

// criterion 3: gradient-scheme stiffness equals the direct reference assembly
bool c3_equivalences() {
  for (const int n : {2, 4}) {
    NodalStrainParams np;
    np.C = GeneralTensor4::from_lame(1.0, 1.0);
    np.D = GeneralTensor4::from_lame(0.0, 0.5);
    for (const CellKind kind : {CellKind::Tri, CellKind::Quad}) {
      auto mesh = std::make_shared<const Mesh>(generate_unit_square(n, kind));
      const GradientDiscretisation gd = build_nodal_strain(mesh, np);
      const SpMat a = assemble_stiffness(gd, nodal_qp_stiffness(gd, np));
      const SpMat ref = assemble_nodal_strain_reference(mesh, np);
      if (rel_diff(a, ref) > 1e-10) {
        detail = "nodal scheme differs from its reference at n=" + std::to_string(n);
        return false;
      }
    }
    for (const int space : {1, 2, 3}) {
      HuWashizuParams hp;
      hp.space_choice = space;
      hp.lambda = 2.0;
      hp.mu = 0.7;
      hp.theta = 2.0 * hp.mu;
      auto mesh = std::make_shared<const Mesh>(generate_unit_square(n, CellKind::Quad));
      const GradientDiscretisation gd = build_huwashizu(mesh, hp);
      const SpMat a = assemble_stiffness(gd, GeneralTensor4::from_lame(hp.lambda, hp.mu));
      const SpMat ref = assemble_huwashizu_reference(mesh, hp);
      if (rel_diff(a, ref) > 1e-10) {
        detail = "Hu-Washizu S" + std::to_string(space) + " differs from its reference";
        return false;
      }
    }
  }
  return true;
}

// criterion 4: conforming schemes are limit-conforming to quadrature precision
bool c4_conforming_W() {
  const std::vector<TensorField> fields = {
      {[](const Eigen::Vector2d&) {
         Eigen::Matrix2d m;
         m << 1.0, 2.0, 2.0, 3.0;
         return m;
       },
       [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); }},
      {[](const Eigen::Vector2d& x) {
         Eigen::Matrix2d m;
         m << x.x(), x.y(), x.y(), x.x();
         return m;
       },
       [](const Eigen::Vector2d&) { return Eigen::Vector2d(2.0, 0.0).eval(); }},
      {[](const Eigen::Vector2d& x) {
         Eigen::Matrix2d m;
         m << x.x() * x.x(), x.x() * x.y(), x.x() * x.y(), x.y() * x.y();
         return m;
       },
       [](const Eigen::Vector2d& x) { return Eigen::Vector2d(3.0 * x.x(), 3.0 * x.y()).eval(); }}};
  for (const int n : {2, 4, 8})
    for (const CellKind kind : {CellKind::Tri, CellKind::Quad}) {
      auto mesh = std::make_shared<const Mesh>(generate_unit_square(n, kind, top_neumann()));
      const GradientDiscretisation gd = build_conforming(
          mesh, kind == CellKind::Tri ? ConformingOrder::P1Tri : ConformingOrder::Q1Quad);
      const GramSet gs = gram_set(gd);
      for (const auto& tau : fields) {
        const double w = limitconformity_W(gd, gs, tau);
        if (w > 1e-10) {
          detail = "W = " + format_number(w) + " at n=" + std::to_string(n);
          return false;
        }
      }
    }
  return true;
}

std::vector<std::vector<ConvergenceRow>> linear_studies;  // shared by criteria 5 and 6

// criterion 5: first-order H1 convergence on the smooth linear case
bool c5_convergence() {
  const ManufacturedCase mc = builtin_case("lin-smooth-dirichlet");
  const std::vector<int> ns = {8, 16, 32};
  for (const char* name : {"p1", "cr", "nodal", "huw"}) {
    BackendSpec spec;
    spec.name = name;
    linear_studies.push_back(convergence_study(spec, mc, ns));
  }
  for (const auto& rows : linear_studies)
    for (const auto& r : rows) {
      if (!r.has_eoc) continue;
      if (r.eocH1 < 0.9) {
        detail = rows[0].backend + " eocH1 = " + format_number(r.eocH1);
        return false;
      }
    }
  // the conforming scheme additionally shows the expected sharp orders
  for (const auto& r : linear_studies[0]) {
    if (!r.has_eoc) continue;
    if (r.eocH1 > 1.1 || r.eocL2 < 1.7 || r.eocL2 > 2.3) {
      detail = "p1 eocH1 = " + format_number(r.eocH1) + ", eocL2 = " + format_number(r.eocL2);
      return false;
    }
  }
  return true;
}

// criterion 6: the error bound holds on every row of the linear studies
bool c6_error_bound() {
  if (linear_studies.empty()) {
    detail = "criterion 5 did not run";
    return false;
  }
  for (const auto& rows : linear_studies)
    for (const auto& r : rows)
      if (r.bound_ok != 1) {
        detail = rows[0].backend + " n=" + std::to_string(r.n) + " violates the bound";
        return false;
      }
  return true;
}

// criterion 7: C_D and K_D stay flat under refinement for every back-end
bool c7_indicator_stability() {
  const ManufacturedCase mc = builtin_case("lin-smooth-dirichlet");
  for (const char* name : {"p1", "q1", "cr", "nodal", "huw"}) {
    BackendSpec spec;
    spec.name = name;
    std::vector<double> Cs, Ks;
    for (const int n : {4, 8, 16}) {
      auto mesh = std::make_shared<const Mesh>(
          generate_unit_square(n, backend_mesh_kind(spec), mc.tagging));
      const GradientDiscretisation gd = build_backend(mesh, spec, 1.0, 1.0);
      const GramSet gs = gram_set(gd);
      Cs.push_back(coercivity_C(gd, gs));
      Ks.push_back(korn_K(gd, gs));
    }
    const auto band = [](const std::vector<double>& v) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      return (*hi - *lo) / *lo;
    };
    if (band(Cs) > 0.10 || band(Ks) > 0.10) {
      detail = std::string(name) + " C band " + format_number(band(Cs)) + ", K band " +
               format_number(band(Ks));
      return false;
    }
    for (const double k : Ks)
      if (k < 1.0) {
        detail = std::string(name) + " K < 1";
        return false;
      }
  }
  return true;
}

// criterion 8: the Picard iteration for the nonlinear law converges with the
// a priori bound holding at every iterate, and the error decreases under
// refinement
bool c8_nonlinear() {
  const ManufacturedCase mc = builtin_case("hvm-smooth");
  double prev = 1e300;
  for (const int n : {4, 8, 16}) {
    auto mesh = std::make_shared<const Mesh>(generate_unit_square(n, CellKind::Tri, mc.tagging));
    const GradientDiscretisation gd = build_conforming(mesh, ConformingOrder::P1Tri);
    const GramSet gs = gram_set(gd);
    const Vec b = assemble_rhs(gd, mc.F, mc.g);
    const NonlinearResult nr = solve_nonlinear(gd, gs, mc.law, b, 1e-8, 50);
    if (!nr.converged) {
      detail = "no convergence at n=" + std::to_string(n);
      return false;
    }
    const double C = coercivity_C(gd, gs), K = korn_K(gd, gs);
    const double data = data_norm_F(gd, mc.F) + (mc.g ? data_norm_g(gd, mc.g) : 0.0);
    const double cap = 1.05 * (C * K * K / mc.law.sigma_lower()) * data;
    for (const double nk : nr.iterate_norms)
      if (nk > cap) {
        detail = "iterate norm " + format_number(nk) + " exceeds the cap " + format_number(cap);
        return false;
      }
    const double err = error_norms(gd, nr.u, mc).first;
    if (err >= prev) {
      detail = "errH1 did not decrease at n=" + std::to_string(n);
      return false;
    }
    prev = err;
  }
  return true;
}

// criterion 9: the condensed Hu-Washizu scheme is locking-free, Q1 is not
bool c9_locking() {
  std::vector<BackendSpec> specs;
  BackendSpec q1;
  q1.name = "q1";
  specs.push_back(q1);
  for (const int space : {1, 2, 3}) {
    BackendSpec hw;
    hw.name = "huw";
    hw.huw_space = space;
    specs.push_back(hw);
  }
  const auto rows = locking_experiment(specs, {1.0, 1e3, 1e6}, 16);
  if (rows.size() != 12) {
    detail = "unexpected row count";
    return false;
  }
  const double q1_ratio = rows[2].errH1 / rows[0].errH1;
  if (q1_ratio < 5.0) {
    detail = "q1 shows no locking (ratio " + format_number(q1_ratio) + ")";
    return false;
  }
  for (int s = 0; s < 3; ++s) {
    double lo = 1e300, hi = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double e = rows[3 + 3 * s + j].errH1;
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    if (hi / lo > 2.0) {
      detail = rows[3 + 3 * s].backend + " errH1 varies by " + format_number(hi / lo);
      return false;
    }
  }
  return true;
}

// criterion 10: the CLI produces byte-identical output across repeated runs
bool c10_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gse-acceptance";
  fs::create_directories(dir / "a");
  fs::create_directories(dir / "b");
  const fs::path cfg = dir / "study.cfg";
  {
    std::ofstream out(cfg);
    out << "[backend]\nname = p1\n[case]\nname = lin-smooth-dirichlet\n[study]\nn_list = 4 8\n";
  }
  const std::string cli = GSE_CLI_PATH;
  for (const char* sub : {"a", "b"}) {
    const std::string cmd = cli + " study " + cfg.string() + " --out " + (dir / sub).string() +
                            " > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      detail = "CLI run failed";
      return false;
    }
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(dir / "a" / "study.csv");
  const std::string b = slurp(dir / "b" / "study.csv");
  if (a.empty()) {
    detail = "empty CSV";
    return false;
  }
  if (a != b) {
    detail = "outputs differ between runs";
    return false;
  }
  return true;
}

}  // namespace

int main() {
  run(1, c1_tensor_identities);
  run(2, c2_hypotheses);
  run(3, c3_equivalences);
  run(4, c4_conforming_W);
  run(5, c5_convergence);
  run(6, c6_error_bound);
  run(7, c7_indicator_stability);
  run(8, c8_nonlinear);
  run(9, c9_locking);
  run(10, c10_determinism);
  return failures == 0 ? 0 : 1;
}
