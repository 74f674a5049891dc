#include <random>

#include "doctest.h"
#include "gse/tensor.hpp"

using namespace gse;

namespace {

SymTensor2 random_sym(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  return {d(rng), d(rng), d(rng)};
}

}  // namespace

TEST_CASE("iso_apply matches the defining formula") {
  // identity case
  const IsoTensor4 id = IsoTensor4::identity();
  const SymTensor2 t{1.5, -0.25, 2.0};
  const SymTensor2 r = id.apply(t);
  CHECK(r.t11 == doctest::Approx(t.t11));
  CHECK(r.t12 == doctest::Approx(t.t12));
  CHECK(r.t22 == doctest::Approx(t.t22));

  // (lambda=1, mu=1) on tau=I: 2I + 2I = 4I
  const SymTensor2 four_i = IsoTensor4::from_lame(1.0, 1.0).apply(SymTensor2::identity());
  CHECK(four_i.t11 == doctest::Approx(4.0));
  CHECK(four_i.t22 == doctest::Approx(4.0));
  CHECK(four_i.t12 == doctest::Approx(0.0));

  // (a=2, b=6) on [[1,2],[2,0]] -> [[8,12],[12,2]]
  const SymTensor2 r2 = IsoTensor4{2.0, 6.0}.apply({1.0, 2.0, 0.0});
  CHECK(r2.t11 == doctest::Approx(8.0));
  CHECK(r2.t12 == doctest::Approx(12.0));
  CHECK(r2.t22 == doctest::Approx(2.0));
}

TEST_CASE("iso_compose coefficients and sequential-application oracle") {
  // identity composes neutrally
  const IsoTensor4 c{0.7, 2.3};
  const IsoTensor4 ci = IsoTensor4::identity().compose(c);
  CHECK(ci.a == doctest::Approx(c.a));
  CHECK(ci.b == doctest::Approx(c.b));

  // (lambda, mu) = (1,1) twice: trace coeff 6, shear coeff 4
  const IsoTensor4 one = IsoTensor4::from_lame(1.0, 1.0);
  const IsoTensor4 sq = one.compose(one);
  CHECK(sq.a == doctest::Approx(6.0));
  CHECK(sq.b == doctest::Approx(4.0));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lm(0.1, 10.0);
  for (int i = 0; i < 50; ++i) {
    const IsoTensor4 c1 = IsoTensor4::from_lame(lm(rng), lm(rng));
    const IsoTensor4 c2 = IsoTensor4::from_lame(lm(rng), lm(rng));
    const SymTensor2 tau = random_sym(rng);
    const SymTensor2 a = c1.compose(c2).apply(tau);
    const SymTensor2 b = c1.apply(c2.apply(tau));
    CHECK((a - b).norm() <= 1e-13 * (1.0 + b.norm()));
    // commutativity of isotropic composition
    const IsoTensor4 rev = c2.compose(c1);
    CHECK(rev.a == doctest::Approx(c1.compose(c2).a));
    CHECK(rev.b == doctest::Approx(c1.compose(c2).b));
  }
}

TEST_CASE("iso_sqrt closed form and squaring") {
  const IsoTensor4 r0 = IsoTensor4::from_lame(0.0, 0.5).sqrt();
  CHECK(r0.a == doctest::Approx(0.0));
  CHECK(r0.b == doctest::Approx(1.0));

  const IsoTensor4 r1 = IsoTensor4::from_lame(1.0, 1.0).sqrt();
  CHECK(r1.a == doctest::Approx(0.5 * (2.0 - std::numbers::sqrt2)));
  CHECK(r1.b == doctest::Approx(std::numbers::sqrt2));

  // trace-free input only sees the b coefficient: C^{1/2}C^{1/2} tau = 2 mu tau
  const IsoTensor4 c = IsoTensor4::from_lame(3.0, 2.0);
  const SymTensor2 tf{1.0, 0.0, -1.0};
  const SymTensor2 twice = c.sqrt().apply(c.sqrt().apply(tf));
  CHECK(twice.t11 == doctest::Approx(4.0));
  CHECK(twice.t22 == doctest::Approx(-4.0));

  CHECK_THROWS_AS(((void)IsoTensor4{0.0, -1.0}.sqrt()), std::domain_error);
}

TEST_CASE("general_sqrt matches iso_sqrt and squares back") {
  const GeneralTensor4 e = GeneralTensor4::from_lame(1.0, 1.0);
  const GeneralTensor4 r = general_sqrt(e);
  const Eigen::Matrix3d want = IsoTensor4::from_lame(1.0, 1.0).sqrt().voigt();
  CHECK((r.V - want).norm() <= 1e-12 * want.norm());

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < 25; ++i) {
    Eigen::Matrix3d m;
    m << d(rng), d(rng), d(rng), d(rng), d(rng), d(rng), d(rng), d(rng), d(rng);
    const Eigen::Matrix3d spd =
        (m * m.transpose() + 0.1 * Eigen::Matrix3d::Identity()).eval();
    const GeneralTensor4 s = general_sqrt(GeneralTensor4{spd});
    CHECK((s.V * s.V - spd).norm() <= 1e-12 * spd.norm());
  }

  Eigen::Matrix3d neg = -Eigen::Matrix3d::Identity();
  CHECK_THROWS_AS((void)general_sqrt(GeneralTensor4{neg}), std::domain_error);
}

TEST_CASE("transpose compatibility of the general action") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < 25; ++i) {
    const IsoTensor4 c = IsoTensor4::from_lame(0.1 + std::abs(d(rng)), 0.1 + std::abs(d(rng)));
    const GeneralTensor4 g = GeneralTensor4::from_iso(c);
    Eigen::Matrix2d tau;
    tau << d(rng), d(rng), d(rng), d(rng);
    const Eigen::Matrix2d lhs = g.apply_general(tau).transpose();
    const Eigen::Matrix2d rhs = g.apply_general(tau.transpose());
    CHECK((lhs - rhs).norm() <= 1e-13 * (1.0 + rhs.norm()));
    // and the Voigt extension reproduces the isotropic action exactly
    const Eigen::Matrix2d iso = c.apply_general(tau);
    CHECK((g.apply_general(tau) - iso).norm() <= 1e-13 * (1.0 + iso.norm()));
  }
}

TEST_CASE("dev2 examples") {
  CHECK(dev2({3.0, 0.0, 3.0}) == doctest::Approx(0.0));
  CHECK(dev2({1.0, 0.0, -1.0}) == doctest::Approx(2.0));
  CHECK(dev2({2.0, 1.0, 0.0}) == doctest::Approx(4.0));
}

TEST_CASE("stress_eval per law") {
  // linear reduces to iso_apply
  const StressLaw lin = StressLaw::linear(GeneralTensor4::from_lame(1.0, 1.0));
  const SymTensor2 s = lin.eval(0, SymTensor2::identity());
  CHECK(s.t11 == doctest::Approx(4.0));
  CHECK(s.t12 == doctest::Approx(0.0));

  // HVM on a spherical tensor: dev2 = 0
  HenckyVonMisesCoeffs hc;  // lambda0=1, mu0=1, mu_inf=0.5
  const StressLaw hvm = StressLaw::hencky_von_mises(hc);
  const double c = 0.3;
  const SymTensor2 sh = hvm.eval(0, SymTensor2::identity() * c);
  const double want = hc.lambda(0.0) * 2.0 * c + 2.0 * hc.mu(0.0) * c;
  CHECK(sh.t11 == doctest::Approx(want));
  CHECK(sh.t22 == doctest::Approx(want));
  CHECK(sh.t12 == doctest::Approx(0.0));

  // damage at zero strain
  const StressLaw dmg = StressLaw::damage(GeneralTensor4::from_lame(1.0, 1.0), DamageCoeffs{});
  CHECK(dmg.eval(0, SymTensor2{}).norm() == doctest::Approx(0.0));
}

TEST_CASE("hypothesis checks: good laws pass, broken damage is flagged") {
  const StressLaw lin = StressLaw::linear(GeneralTensor4::from_lame(1.0, 1.0));
  CHECK(check_hypotheses(lin, 2000, 42).ok());

  const StressLaw hvm = StressLaw::hencky_von_mises(HenckyVonMisesCoeffs{});
  const HypothesisReport hr = check_hypotheses(hvm, 10000, 42);
  CHECK(hr.ok());
  CHECK(hr.samples == 10000);

  DamageCoeffs broken;
  broken.f_override = [](double s) { return 1.0 / ((1.0 + s) * (1.0 + s)); };
  StressLaw bad = StressLaw::damage(GeneralTensor4::from_lame(1.0, 1.0), broken);
  bad.set_constants(4.0, 1e-6);
  CHECK(check_hypotheses(bad, 10000, 42).monotonicity_violations > 0);

  // determinism of the sampler
  const HypothesisReport a = check_hypotheses(hvm, 500, 7);
  const HypothesisReport b = check_hypotheses(hvm, 500, 7);
  CHECK(a.strict_monotonicity_margin == b.strict_monotonicity_margin);
}

TEST_CASE("sqrt identity on random admissible tensors") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> lm(0.1, 100.0);
  for (int i = 0; i < 200; ++i) {
    const IsoTensor4 c = IsoTensor4::from_lame(lm(rng), lm(rng));
    const SymTensor2 tau = random_sym(rng);
    const SymTensor2 via_root = c.sqrt().apply(c.sqrt().apply(tau));
    const SymTensor2 direct = c.apply(tau);
    CHECK((via_root - direct).norm() <= 1e-12 * (1.0 + direct.norm()));
  }
}
