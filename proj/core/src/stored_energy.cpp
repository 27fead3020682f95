#include "hypf/stored_energy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/LU>

namespace hypf {

void StoredEnergySpec::validate() const {
  if (wells.size() < 2) throw InvalidArgument("stored energy needs at least two phases");
  if (components() > kMaxComponents) throw InvalidArgument("too many phase components");
  for (const auto& w : wells) {
    if (!(w.shear_modulus >= 0.0)) throw InvalidArgument("shear moduli must be non-negative");
    const Mat2& u = w.prestrain;
    if (!u.allFinite() || std::abs(u(0, 1) - u(1, 0)) > 1e-12 * u.norm()) {
      throw InvalidArgument("prestrain U must be finite and symmetric");
    }
    if (!(u.determinant() > 0.0) || !(u(0, 0) > 0.0)) {
      throw InvalidArgument("prestrain U must be positive definite");
    }
  }
  if (!(c1 > 0.0 && c2 > 0.0 && c3 > 0.0)) throw InvalidArgument("c1, c2, c3 must be positive");
  if (!(c4 >= 0.0)) throw InvalidArgument("c4 must be non-negative");
  if (!(p >= 2.0)) throw InvalidArgument("exponent p must satisfy p >= n = 2");
  if (!(r > 1.0)) throw InvalidArgument("exponent r must exceed 1");
  if (!(q > 1.0)) throw InvalidArgument("exponent q must exceed n - 1 = 1");
}

StoredEnergySpec StoredEnergySpec::two_variant_default() {
  StoredEnergySpec spec;
  constexpr double lambda = 1.2;
  WellMaterial austenite;
  WellMaterial variant;
  variant.prestrain = Eigen::Vector2d(lambda, 1.0 / lambda).asDiagonal();
  spec.wells = {austenite, variant};
  return spec;
}

StoredEnergy::StoredEnergy(StoredEnergySpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  for (const auto& w : spec_.wells) {
    const Mat2 inv = w.prestrain.inverse();
    metrics_.push_back(inv * inv.transpose());
    offsets_.push_back(core(w.prestrain, w.prestrain.determinant()));
  }
}

double StoredEnergy::core(const Mat2& f, double det) const {
  const double n2 = f.squaredNorm();
  double v = spec_.c1 * std::pow(n2, 0.5 * spec_.p) + spec_.c2 * std::pow(det, spec_.r) +
             spec_.c3 * std::pow(n2 / det, spec_.q);
  if (spec_.c4 > 0.0) v -= spec_.c4 * std::log(det);
  return v;
}

void StoredEnergy::check_finite(const Mat2& f, const PhaseVec& z) const {
  if (!f.allFinite()) throw DomainError("stored energy: non-finite deformation gradient");
  if (z.size() != components() || !z.allFinite()) {
    throw DomainError("stored energy: phase value must be finite with dimension h");
  }
}

double StoredEnergy::well_energy(int a, const Mat2& f) const {
  const double det = f.determinant();
  if (!(det > 0.0)) return kInfinity;
  const double mu = spec_.wells.at(a).shear_modulus;
  return mu * (f * metrics_[a] * f.transpose()).trace() + core(f, det) - offsets_[a];
}

Mat2 StoredEnergy::well_energy_gradient(int a, const Mat2& f) const {
  const double det = f.determinant();
  if (!(det > 0.0)) throw DomainError("dW/dF requires det F > 0");
  const double n2 = f.squaredNorm();
  const Mat2 cof = cofactor(f);
  const auto& s = spec_;
  Mat2 g = 2.0 * s.wells.at(a).shear_modulus * f * metrics_[a];
  g += s.c1 * s.p * std::pow(n2, 0.5 * s.p - 1.0) * f;
  g += s.c2 * s.r * std::pow(det, s.r - 1.0) * cof;
  const double ratio = n2 / det;
  g += s.c3 * s.q * std::pow(ratio, s.q - 1.0) * (2.0 * f / det - n2 / (det * det) * cof);
  if (s.c4 > 0.0) g -= s.c4 / det * cof;
  return g;
}

PhaseVec StoredEnergy::mixture_weights(const PhaseVec& z) const {
  const int h = components();
  PhaseVec w(h + 1);
  for (int i = 0; i < h; ++i) w(i) = std::max(z(i), 0.0);
  w(h) = std::max(1.0 - z.sum(), 0.0);
  return w;
}

double StoredEnergy::eval(const Mat2& f, const PhaseVec& z) const {
  check_finite(f, z);
  if (!(f.determinant() > 0.0)) return kInfinity;
  const PhaseVec w = mixture_weights(z);
  double v = 0.0;
  for (int a = 0; a < w.size(); ++a) {
    if (w(a) != 0.0) v += w(a) * well_energy(a, f);
  }
  return v;
}

Mat2 StoredEnergy::dW_dF(const Mat2& f, const PhaseVec& z) const {
  check_finite(f, z);
  if (!(f.determinant() > 0.0)) throw DomainError("dW/dF requires det F > 0");
  const PhaseVec w = mixture_weights(z);
  Mat2 g = Mat2::Zero();
  for (int a = 0; a < w.size(); ++a) {
    if (w(a) != 0.0) g += w(a) * well_energy_gradient(a, f);
  }
  return g;
}

PhaseVec StoredEnergy::dW_dz(const Mat2& f, const PhaseVec& z) const {
  check_finite(f, z);
  if (!(f.determinant() > 0.0)) throw DomainError("dW/dz requires det F > 0");
  const int h = components();
  const double last = 1.0 - z.sum() >= 0.0 ? well_energy(h, f) : 0.0;
  PhaseVec g(h);
  for (int i = 0; i < h; ++i) g(i) = (z(i) >= 0.0 ? well_energy(i, f) : 0.0) - last;
  return g;
}

double StoredEnergy::coercivity_constant(double z_radius) const {
  const auto& s = spec_;
  const double weight_bound = 1.0 + 2.0 * std::sqrt(double(components())) * z_radius;
  double c2_eff = s.c2;
  double log_bound = 0.0;
  if (s.c4 > 0.0) {
    // c2 t^r - c4 log t >= (c2 / 2) t^r - sup_t (c4 log t - (c2 / 2) t^r)
    c2_eff = 0.5 * s.c2;
    const double t_star = std::pow(2.0 * s.c4 / (s.c2 * s.r), 1.0 / s.r);
    log_bound = std::max(0.0, s.c4 * std::log(t_star) - s.c4 / s.r);
  }
  double shift = 0.0;
  for (double w0 : offsets_) shift = std::max(shift, w0 + log_bound);
  const double offset = std::max(weight_bound * shift, 1e-12);
  return std::min({s.c1, c2_eff, s.c3, 1.0 / offset});
}

double coercivity_margin(const StoredEnergy& w, const Mat2& f, const PhaseVec& z,
                         double z_radius) {
  const auto& s = w.spec();
  const double c = w.coercivity_constant(z_radius);
  const double det = f.determinant();
  const double n2 = f.squaredNorm();
  const double bound =
      c * (std::pow(n2, 0.5 * s.p) + std::pow(det, s.r) + std::pow(n2 / det, s.q)) - 1.0 / c;
  return w.eval(f, z) - bound;
}

namespace {

Mat2 random_positive_matrix(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  for (;;) {
    Mat2 f;
    f << entry(rng), entry(rng), entry(rng), entry(rng);
    if (f.determinant() < 0.0) f.row(0) *= -1.0;
    if (f.determinant() > 1e-3) return f;
  }
}

PhaseVec random_phase(std::mt19937_64& rng, int h, double radius) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  PhaseVec z(h);
  for (int i = 0; i < h; ++i) z(i) = normal(rng);
  const double n = z.norm();
  if (n > 0.0) z *= radius * std::pow(unit(rng), 1.0 / h) / n;
  return z;
}

}  // namespace

double frame_indifference_check(const StoredEnergy& w, int samples, unsigned seed,
                                double z_radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::uniform_real_distribution<double> singular(0.5, 2.0);
    const double a = angle(rng), b = angle(rng);
    Mat2 r1, r2;
    r1 << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    r2 << std::cos(b), -std::sin(b), std::sin(b), std::cos(b);
    const Mat2 f = r1 * Eigen::Vector2d(singular(rng), singular(rng)).asDiagonal() * r2;
    const PhaseVec z = random_phase(rng, w.components(), z_radius);
    const double t = angle(rng);
    Mat2 rot;
    rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    worst = std::max(worst, std::abs(w.eval(rot * f, z) - w.eval(f, z)));
  }
  return worst;
}

double coercivity_check(const StoredEnergy& w, int samples, unsigned seed, double z_radius) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> log_scale(-3.0, 1.5);
  double worst = kInfinity;
  for (int s = 0; s < samples; ++s) {
    // Random shapes across scales, including near-degenerate determinants.
    Mat2 f = random_positive_matrix(rng) * std::pow(10.0, log_scale(rng) / 3.0);
    const PhaseVec z = random_phase(rng, w.components(), z_radius);
    worst = std::min(worst, coercivity_margin(w, f, z, z_radius));
  }
  return worst;
}

}  // namespace hypf
