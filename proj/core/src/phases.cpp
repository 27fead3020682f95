#include "hypf/phases.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hypf {

std::string_view to_string(PotentialFamily f) {
  switch (f) {
    case PotentialFamily::DoubleWell:
      return "double-well";
    case PotentialFamily::ProductOfSquares:
      return "product-of-squares";
    case PotentialFamily::PerturbedQuadraticWells:
      return "perturbed-quadratic-wells";
  }
  return "unknown";
}

PotentialFamily potential_family_from_string(std::string_view name) {
  if (name == "double-well") return PotentialFamily::DoubleWell;
  if (name == "product-of-squares") return PotentialFamily::ProductOfSquares;
  if (name == "perturbed-quadratic-wells") return PotentialFamily::PerturbedQuadraticWells;
  throw InvalidArgument("unknown potential family '" + std::string(name) + "'");
}

PhaseSystem::PhaseSystem(PotentialFamily family, std::vector<PhaseVec> wells, double box_radius,
                         PerturbedQuadraticParams perturbed)
    : family_(family),
      wells_(std::move(wells)),
      box_radius_(box_radius),
      components_(0),
      perturbed_(std::move(perturbed)) {
  if (wells_.size() < 2) {
    throw InvalidArgument("a phase system needs at least two wells");
  }
  components_ = static_cast<int>(wells_.front().size());
  if (components_ < 1 || components_ > kMaxComponents) {
    throw InvalidArgument("component dimension h must lie in [1, " +
                          std::to_string(kMaxComponents) + "]");
  }
  double max_norm = 0.0;
  for (std::size_t a = 0; a < wells_.size(); ++a) {
    if (wells_[a].size() != components_) {
      throw InvalidArgument("all wells must have the same dimension");
    }
    if (!wells_[a].allFinite()) {
      throw InvalidArgument("well coordinates must be finite");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if ((wells_[a] - wells_[b]).norm() == 0.0) {
        throw InvalidArgument("wells must be distinct");
      }
    }
    max_norm = std::max(max_norm, wells_[a].norm());
  }
  if (!(box_radius_ > max_norm)) {
    throw InvalidArgument("box radius R must exceed the largest well norm");
  }
  if (family_ == PotentialFamily::DoubleWell && wells_.size() != 2) {
    throw InvalidArgument("the double-well family takes exactly two wells");
  }
  if (family_ == PotentialFamily::PerturbedQuadraticWells) {
    if (!(std::abs(perturbed_.amplitude) < 1.0)) {
      throw InvalidArgument("perturbation amplitude must satisfy |delta| < 1");
    }
    if (perturbed_.stiffness.empty()) {
      perturbed_.stiffness.assign(wells_.size(), 1.0);
    }
    if (perturbed_.stiffness.size() != wells_.size()) {
      throw InvalidArgument("one stiffness per well is required");
    }
    for (double k : perturbed_.stiffness) {
      if (!(k > 0.0)) throw InvalidArgument("well stiffness must be positive");
    }
  }
}

double PhaseSystem::potential(const PhaseVec& z) const {
  if (z.size() != components_ || !z.allFinite()) {
    throw DomainError("potential: argument must be a finite vector of dimension h");
  }
  return potential_unchecked(z);
}

double PhaseSystem::potential_unchecked(const PhaseVec& z) const {
  switch (family_) {
    case PotentialFamily::DoubleWell:
    case PotentialFamily::ProductOfSquares: {
      double v = 1.0;
      for (const auto& p : wells_) {
        v *= (z - p).squaredNorm();
      }
      return v;
    }
    case PotentialFamily::PerturbedQuadraticWells: {
      double q = kInfinity;
      for (std::size_t a = 0; a < wells_.size(); ++a) {
        q = std::min(q, perturbed_.stiffness[a] * (z - wells_[a]).squaredNorm());
      }
      const double mod = 1.0 + perturbed_.amplitude * std::sin(perturbed_.frequency * z.sum());
      return 0.5 * q * mod;
    }
  }
  return 0.0;
}

PhaseVec PhaseSystem::potential_gradient(const PhaseVec& z) const {
  if (z.size() != components_ || !z.allFinite()) {
    throw DomainError("potential_gradient: argument must be a finite vector of dimension h");
  }
  PhaseVec g = PhaseVec::Zero(components_);
  switch (family_) {
    case PotentialFamily::DoubleWell:
    case PotentialFamily::ProductOfSquares: {
      // d/dz prod_a s_a = sum_a (prod_{b != a} s_b) 2 (z - p_a)
      const int m = well_count();
      for (int a = 0; a < m; ++a) {
        double others = 1.0;
        for (int b = 0; b < m; ++b) {
          if (b != a) others *= (z - wells_[b]).squaredNorm();
        }
        g += 2.0 * others * (z - wells_[a]);
      }
      return g;
    }
    case PotentialFamily::PerturbedQuadraticWells: {
      int best = 0;
      double q = kInfinity;
      for (int a = 0; a < well_count(); ++a) {
        const double v = perturbed_.stiffness[a] * (z - wells_[a]).squaredNorm();
        if (v < q) {
          q = v;
          best = a;
        }
      }
      const double phase = perturbed_.frequency * z.sum();
      const double mod = 1.0 + perturbed_.amplitude * std::sin(phase);
      g = perturbed_.stiffness[best] * (z - wells_[best]) * mod;
      g.array() += 0.5 * q * perturbed_.amplitude * perturbed_.frequency * std::cos(phase);
      return g;
    }
  }
  return g;
}

double PhaseSystem::metric_density(const PhaseVec& z) const {
  return std::sqrt(2.0 * potential(z));
}

int PhaseSystem::nearest_well_euclidean(const PhaseVec& z) const {
  int best = 0;
  double dist = kInfinity;
  for (int a = 0; a < well_count(); ++a) {
    const double d = (z - wells_[a]).squaredNorm();
    if (d < dist) {
      dist = d;
      best = a;
    }
  }
  return best;
}

double min_potential_away_from_wells(const PhaseSystem& sys, double exclusion, int samples,
                                     unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-sys.box_radius(), sys.box_radius());
  double lowest = kInfinity;
  PhaseVec z(sys.components());
  for (int s = 0; s < samples; ++s) {
    for (int i = 0; i < sys.components(); ++i) z(i) = coord(rng);
    bool near = false;
    for (const auto& p : sys.wells()) {
      near = near || (z - p).norm() < exclusion;
    }
    if (!near) lowest = std::min(lowest, sys.potential(z));
  }
  return lowest;
}

}  // namespace hypf
