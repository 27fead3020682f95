#pragma once

#include <vector>

#include "hypf/types.hpp"

namespace hypf {

/// Phase-specific elastic parameters of W_a.
struct WellMaterial {
  double shear_modulus = 1.0;
  /// Symmetric positive-definite prestrain U_a.
  Mat2 prestrain = Mat2::Identity();
};

/// Parameters of the polyconvex mixture
///   W(F, z) = sum_{i<h} z_i^+ W_i(F) + (1 - sum_i z_i)^+ W_h(F)
/// with, for det F > 0,
///   W_a(F) = mu_a |F U_a^{-1}|^2 + c1 |F|^p + c2 (det F)^r
///            + c3 |F|^{2q} / (det F)^q - c4 log det F - w0_a
/// and W = +inf when det F <= 0. The offset w0_a is the value of the
/// non-mu terms at F = U_a, so W_a(R U_a) = 2 mu_a for every rotation R.
struct StoredEnergySpec {
  /// h + 1 entries; entry a is the material of the well p_a (the a-th basis
  /// vector for a < h, the origin for a = h).
  std::vector<WellMaterial> wells;
  double c1 = 0.05;
  double c2 = 0.05;
  double c3 = 0.05;
  double c4 = 0.0;
  double p = 4.0;
  double r = 2.0;
  double q = 2.0;

  int components() const { return static_cast<int>(wells.size()) - 1; }
  void validate() const;

  /// Two phases (h = 1): U_1 = I and U_2 = diag(1.2, 1/1.2), unit moduli.
  static StoredEnergySpec two_variant_default();
};

class StoredEnergy {
 public:
  explicit StoredEnergy(StoredEnergySpec spec);

  const StoredEnergySpec& spec() const { return spec_; }
  int components() const { return spec_.components(); }
  int phase_count() const { return static_cast<int>(spec_.wells.size()); }

  /// W_a(F); +inf when det F <= 0.
  double well_energy(int a, const Mat2& f) const;
  Mat2 well_energy_gradient(int a, const Mat2& f) const;
  /// W_a(R U_a) = 2 mu_a.
  double reference_energy(int a) const { return 2.0 * spec_.wells.at(a).shear_modulus; }
  double offset(int a) const { return offsets_.at(a); }

  /// Mixture weights (z_1^+, ..., z_h^+, (1 - sum z)^+).
  PhaseVec mixture_weights(const PhaseVec& z) const;

  /// W(F, z); +inf sentinel when det F <= 0. Throws DomainError on
  /// non-finite input.
  double eval(const Mat2& f, const PhaseVec& z) const;
  /// dW/dF. Throws DomainError when det F <= 0.
  Mat2 dW_dF(const Mat2& f, const PhaseVec& z) const;
  /// dW/dz using the one-sided convention d(x^+)/dx = 1 for x >= 0.
  PhaseVec dW_dz(const Mat2& f, const PhaseVec& z) const;

  /// C such that W(F, z) >= C (|F|^p + det^r + |F|^{2q}/det^q) - 1/C for all
  /// F with det F > 0 and |z| <= z_radius.
  double coercivity_constant(double z_radius) const;

 private:
  double core(const Mat2& f, double det) const;
  void check_finite(const Mat2& f, const PhaseVec& z) const;

  StoredEnergySpec spec_;
  std::vector<Mat2> metrics_;
  std::vector<double> offsets_;
};

/// max |W(RF, z) - W(F, z)| over random F with singular values in [0.5, 2],
/// z with |z| <= z_radius and R in SO(2).
double frame_indifference_check(const StoredEnergy& w, int samples, unsigned seed,
                                double z_radius);

/// min over random samples of W(F, z) - [C (|F|^p + det^r + |F|^{2q}/det^q) - 1/C]
/// with C = coercivity_constant(z_radius). Non-negative when the bound holds.
double coercivity_check(const StoredEnergy& w, int samples, unsigned seed, double z_radius);

/// Margin of the same bound at one point.
double coercivity_margin(const StoredEnergy& w, const Mat2& f, const PhaseVec& z,
                         double z_radius);

}  // namespace hypf
