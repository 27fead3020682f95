#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hypf/stored_energy.hpp"
#include "support.hpp"

using namespace hypf;
using hypf::test::mat;
using hypf::test::rotation;
using hypf::test::scalar;

namespace {

Mat2 fd_gradient(const StoredEnergy& w, const Mat2& f, const PhaseVec& z, double step) {
  Mat2 g;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Mat2 fp = f, fm = f;
      fp(i, j) += step;
      fm(i, j) -= step;
      g(i, j) = (w.eval(fp, z) - w.eval(fm, z)) / (2 * step);
    }
  }
  return g;
}

// Both phases unstrained; c4 cancels the gradient of the other terms at F = I.
StoredEnergySpec stationary_at_identity() {
  StoredEnergySpec s;
  s.wells = {WellMaterial{1.0, Mat2::Identity()}, WellMaterial{1.0, Mat2::Identity()}};
  s.c4 = 2.0 * 1.0 + s.p * s.c1 * std::pow(2.0, 0.5 * s.p - 1.0) + s.r * s.c2;
  return s;
}

}  // namespace

TEST(StoredEnergy, InvertedGradientIsInfinite) {
  const StoredEnergy w(StoredEnergySpec::two_variant_default());
  EXPECT_EQ(w.eval(mat(-1, 0, 0, 1), scalar(0.5)), kInfinity);
  EXPECT_THROW(w.dW_dF(mat(-1, 0, 0, 1), scalar(0.5)), DomainError);
}

TEST(StoredEnergy, RejectsNonFiniteInput) {
  const StoredEnergy w(StoredEnergySpec::two_variant_default());
  EXPECT_THROW(w.eval(mat(NAN, 0, 0, 1), scalar(0.5)), DomainError);
  EXPECT_THROW(w.eval(Mat2::Identity(), scalar(INFINITY)), DomainError);
}

TEST(StoredEnergy, SpecValidation) {
  auto s = StoredEnergySpec::two_variant_default();
  s.p = 1.5;
  EXPECT_THROW(StoredEnergy{s}, InvalidArgument);
  s = StoredEnergySpec::two_variant_default();
  s.wells[1].prestrain = mat(1, 0.3, 0, 1);
  EXPECT_THROW(StoredEnergy{s}, InvalidArgument);
}

TEST(StoredEnergy, MixtureCollapsesOnWells) {
  const StoredEnergy w(StoredEnergySpec::two_variant_default());
  const Mat2 f = mat(1.1, 0.2, -0.1, 0.95);
  EXPECT_EQ(w.eval(f, scalar(1.0)), w.well_energy(0, f));
  EXPECT_EQ(w.eval(f, scalar(0.0)), w.well_energy(1, f));
  EXPECT_NEAR(w.eval(f, scalar(0.25)), 0.25 * w.well_energy(0, f) + 0.75 * w.well_energy(1, f), 1e-13);
}

TEST(StoredEnergy, WellValueOnRotatedPrestrain) {
  const StoredEnergy w(StoredEnergySpec::two_variant_default());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  for (int a = 0; a < 2; ++a) {
    for (int k = 0; k < 20; ++k) {
      const Mat2 f = rotation(angle(rng)) * w.spec().wells[a].prestrain;
      EXPECT_NEAR(w.well_energy(a, f), w.reference_energy(a), 1e-12);
    }
  }
}

TEST(StoredEnergy, ContinuousPiecewiseLinearInZ) {
  const StoredEnergy w(StoredEnergySpec::two_variant_default());
  const Mat2 f = mat(1.05, 0.1, 0.0, 0.9);
  for (double z = -0.5; z < 1.5; z += 0.01) {
    const double mid = w.eval(f, scalar(z + 0.005));
    EXPECT_NEAR(mid, 0.5 * (w.eval(f, scalar(z)) + w.eval(f, scalar(z + 0.01))), 1e-12 + 0.5 * std::abs(mid) * 0.01);
  }
}

TEST(StoredEnergy, GradientMatchesFiniteDifferences) {
  const StoredEnergy w(StoredEnergySpec::two_variant_default());
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Mat2 s = mat(0.75 + 0.65 * u(rng), 0, 0, 0.75 + 0.65 * u(rng));
    const Mat2 f = rotation(6 * u(rng)) * s * rotation(6 * u(rng));
    const PhaseVec z = scalar(0.05 + 0.9 * u(rng));
    const Mat2 g = w.dW_dF(f, z);
    worst = std::max(worst, (fd_gradient(w, f, z, 1e-5) - g).cwiseAbs().maxCoeff() / g.cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(StoredEnergy, PhaseDerivativeIsTheWellDifference) {
  const StoredEnergy w(StoredEnergySpec::two_variant_default());
  const Mat2 f = mat(1.1, 0.05, 0.0, 0.85);
  EXPECT_NEAR(w.dW_dz(f, scalar(0.3))(0), w.well_energy(0, f) - w.well_energy(1, f), 1e-13);
}

TEST(StoredEnergy, StationaryAtConstructedMinimum) {
  const StoredEnergy w(stationary_at_identity());
  for (double z : {0.0, 1.0}) EXPECT_LT(w.dW_dF(Mat2::Identity(), scalar(z)).norm(), 1e-8);
  EXPECT_LT(w.dW_dF(rotation(0.7), scalar(1.0)).norm(), 1e-8);
}

TEST(StoredEnergy, GradientIsLinearInShearModulus) {
  auto with_mu = [](double mu) {
    StoredEnergySpec s = StoredEnergySpec::two_variant_default();
    for (auto& m : s.wells) m.shear_modulus = mu;
    return StoredEnergy(s);
  };
  const Mat2 f = mat(1.2, 0.3, -0.1, 0.9);
  const Mat2 g1 = with_mu(1.0).dW_dF(f, scalar(0.4));
  const Mat2 g2 = with_mu(2.0).dW_dF(f, scalar(0.4));
  const Mat2 g3 = with_mu(3.0).dW_dF(f, scalar(0.4));
  EXPECT_LT((g3 - g2 - (g2 - g1)).norm(), 1e-13);
  EXPECT_GT((g2 - g1).norm(), 0.1);
}

TEST(StoredEnergy, FrameIndifference) {
  const StoredEnergy w(StoredEnergySpec::two_variant_default());
  EXPECT_LT(frame_indifference_check(w, 1000, 4, 1.5), 1e-10);
  for (int a = 0; a < 2; ++a) {
    const Mat2 u = w.spec().wells[a].prestrain;
    const PhaseVec z = scalar(a == 0 ? 1.0 : 0.0);
    EXPECT_NEAR(w.eval(rotation(M_PI / 2) * u, z), w.eval(u, z), 1e-12);
  }
}

TEST(StoredEnergy, Coercivity) {
  const StoredEnergy w(StoredEnergySpec::two_variant_default());
  EXPECT_GE(coercivity_margin(w, Mat2::Identity(), scalar(1.0), 1.5), 0.0);
  EXPECT_GE(coercivity_margin(w, mat(1e-3, 0, 0, 1e-3), scalar(1.0), 1.5), 0.0);
  EXPECT_GE(coercivity_check(w, 10000, 9, 1.5), 0.0);
}

TEST(StoredEnergy, MidpointConvexityOfTheCoreTerms) {
  // Each term is convex in (F, det F); along segments with det linear (rank-one
  // directions) W_a itself is convex.
  const StoredEnergy w(StoredEnergySpec::two_variant_default());
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  for (int k = 0; k < 1000; ++k) {
    const Mat2 f = Mat2::Identity() + mat(u(rng), u(rng), u(rng), u(rng)) * 0.5;
    const Eigen::Vector2d a(u(rng), u(rng)), b(u(rng), u(rng));
    const Mat2 d = a * b.transpose();
    const Mat2 f0 = f - d, f1 = f + d;
    if (f0.determinant() <= 0.0 || f1.determinant() <= 0.0) continue;
    for (int p = 0; p < 2; ++p) {
      EXPECT_LE(w.well_energy(p, f), 0.5 * (w.well_energy(p, f0) + w.well_energy(p, f1)) + 1e-12);
    }
  }
}
