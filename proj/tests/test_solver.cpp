#include <random>

#include "doctest.h"
#include "gse/assembly.hpp"
#include "gse/backends.hpp"
#include "gse/solver.hpp"
#include "gse/study.hpp"

using namespace gse;

namespace {

SpMat diag2(double a, double b) {
  SpMat m(2, 2);
  m.insert(0, 0) = a;
  m.insert(1, 1) = b;
  m.makeCompressed();
  return m;
}

}  // namespace

TEST_CASE("solve_spd basics") {
  Vec b(2);
  b << 2.0, 3.0;
  const SolveResult r = solve_spd(diag2(2.0, 3.0), b);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(1.0));

  const SolveResult z = solve_spd(diag2(2.0, 3.0), Vec::Zero(2));
  CHECK(z.x.norm() == doctest::Approx(0.0));
}

TEST_CASE("iterative path matches the dense oracle") {
  auto mesh = std::make_shared<const Mesh>(generate_unit_square(8, CellKind::Tri));
  const GradientDiscretisation gd = build_conforming(mesh, ConformingOrder::P1Tri);
  const SpMat a = assemble_stiffness(gd, GeneralTensor4::from_lame(1.0, 1.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Vec b(gd.dof_count);
  for (int i = 0; i < b.size(); ++i) b[i] = d(rng);

  const Vec dense = Eigen::MatrixXd(a).ldlt().solve(b);
  // force the conjugate-gradient path with a tiny dense threshold
  const SolveResult it = solve_spd(a, b, 1e-12, 20000, 1);
  CHECK(it.converged);
  CHECK(it.iterations > 0);
  CHECK((it.x - dense).norm() <= 1e-8 * dense.norm());
}

TEST_CASE("nonlinear solve: linear law converges in one iteration") {
  const ManufacturedCase mc = builtin_case("lin-smooth-dirichlet");
  auto mesh = std::make_shared<const Mesh>(generate_unit_square(4, CellKind::Tri, mc.tagging));
  const GradientDiscretisation gd = build_conforming(mesh, ConformingOrder::P1Tri);
  const GramSet gs = gram_set(gd);
  const Vec b = assemble_rhs(gd, mc.F, mc.g);
  const NonlinearResult nr = solve_nonlinear(gd, gs, mc.law, b);
  CHECK(nr.converged);
  CHECK(nr.iterations == 1);
  const Vec direct = solve_spd(assemble_stiffness(gd, mc.law.stiffness(0)), b).x;
  CHECK((nr.u - direct).norm() <= 1e-9 * (1.0 + direct.norm()));

  // F = 0 gives u = 0 immediately
  const VectorField zero = [](const Eigen::Vector2d&) { return Eigen::Vector2d::Zero().eval(); };
  const NonlinearResult z = solve_nonlinear(gd, gs, mc.law, assemble_rhs(gd, zero, nullptr));
  CHECK(z.converged);
  CHECK(z.u.norm() <= 1e-12);
}

TEST_CASE("nonlinear solve: HVM residual trace decreases below tolerance") {
  const ManufacturedCase mc = builtin_case("hvm-smooth");
  auto mesh = std::make_shared<const Mesh>(generate_unit_square(4, CellKind::Tri, mc.tagging));
  const GradientDiscretisation gd = build_conforming(mesh, ConformingOrder::P1Tri);
  const GramSet gs = gram_set(gd);
  const Vec b = assemble_rhs(gd, mc.F, mc.g);
  const NonlinearResult nr = solve_nonlinear(gd, gs, mc.law, b, 1e-10, 50);
  CHECK(nr.converged);
  CHECK(nr.iterations <= 50);
  REQUIRE(nr.residual_trace.size() >= 2);
  for (size_t k = 1; k < nr.residual_trace.size(); ++k)
    CHECK(nr.residual_trace[k] < nr.residual_trace[k - 1]);

  // final residual really is small in the dual norm
  const Vec r = assemble_residual(gd, mc.law, nr.u, b);
  const Vec gi = solve_spd(gs.G, r, 1e-12).x;
  CHECK(std::sqrt(r.dot(gi)) <= 1e-8 * (1.0 + b.norm()));

  // a priori bound at every iterate, with 5% slack
  const double C = coercivity_C(gd, gs), K = korn_K(gd, gs);
  const double data = data_norm_F(gd, mc.F) + (mc.g ? data_norm_g(gd, mc.g) : 0.0);
  const double cap = 1.05 * (C * K * K / mc.law.sigma_lower()) * data;
  for (double nk : nr.iterate_norms) CHECK(nk <= cap);
}

TEST_CASE("uniqueness: perturbed relaxation reaches the same solution") {
  const ManufacturedCase mc = builtin_case("lin-smooth-dirichlet");
  auto mesh = std::make_shared<const Mesh>(generate_unit_square(4, CellKind::Tri, mc.tagging));
  const GradientDiscretisation gd = build_conforming(mesh, ConformingOrder::P1Tri);
  const GramSet gs = gram_set(gd);
  const Vec b = assemble_rhs(gd, mc.F, mc.g);
  const NonlinearResult a = solve_nonlinear(gd, gs, mc.law, b, 1e-10, 50, 1.0);
  const NonlinearResult c = solve_nonlinear(gd, gs, mc.law, b, 1e-10, 50, 0.7);
  CHECK(a.converged);
  CHECK(c.converged);
  CHECK((a.u - c.u).norm() <= 1e-7 * (1.0 + a.u.norm()));
}
