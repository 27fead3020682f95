#include "hypf/mm1d.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <utility>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "hypf/reduce.hpp"

namespace hypf {

namespace {

// 5-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 5> kGaussT = {0.04691007703066800, 0.23076534494715845, 0.5,
                                          0.76923465505284155, 0.95308992296933200};
constexpr std::array<double, 5> kGaussW = {0.11846344252809454, 0.23931433524968324,
                                          0.28444444444444444, 0.23931433524968324,
                                          0.11846344252809454};

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxComponents,
                             kMaxComponents>;

Matrix potential_hessian(const PhaseSystem& sys, const PhaseVec& x) {
  const int h = sys.components();
  Matrix hess(h, h);
  for (int j = 0; j < h; ++j) {
    const double delta = 1e-5 * std::max(1.0, std::abs(x[j]));
    PhaseVec xp = x;
    PhaseVec xm = x;
    xp[j] += delta;
    xm[j] -= delta;
    hess.col(j) = (sys.potential_gradient(xp) - sys.potential_gradient(xm)) / (2.0 * delta);
  }
  return 0.5 * (hess + hess.transpose());
}

struct Functional {
  const PhaseSystem& sys;
  double eps;
  double ds;
  int h;
  std::size_t segments;

  double energy(const std::vector<PhaseVec>& g, double* grad_part, double* pot_part) const {
    double ge = 0.0;
    double pe = 0.0;
    for (std::size_t k = 0; k < segments; ++k) {
      const PhaseVec d = g[k + 1] - g[k];
      ge += 0.5 * eps * d.squaredNorm() / ds;
      double avg = 0.0;
      for (int q = 0; q < 5; ++q) avg += kGaussW[q] * sys.potential(g[k] + kGaussT[q] * d);
      pe += ds / eps * avg;
    }
    if (grad_part) *grad_part = ge;
    if (pot_part) *pot_part = pe;
    return ge + pe;
  }

  // Gradient and Hessian with respect to the interior nodes 1..segments-1.
  void derivatives(const std::vector<PhaseVec>& g, Eigen::VectorXd& grad,
                   Eigen::SparseMatrix<double>& hess) const {
    const std::size_t unknowns = (segments - 1) * std::size_t(h);
    grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(unknowns));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(segments * 4 * std::size_t(h * h));
    const double stiff = eps / ds;
    const double weight = ds / eps;
    auto offset = [&](std::size_t node) { return static_cast<Eigen::Index>((node - 1) * h); };
    for (std::size_t k = 0; k < segments; ++k) {
      const PhaseVec d = g[k + 1] - g[k];
      PhaseVec ga = -stiff * d;
      PhaseVec gb = stiff * d;
      Matrix haa = stiff * Matrix::Identity(h, h);
      Matrix hab = -stiff * Matrix::Identity(h, h);
      Matrix hbb = stiff * Matrix::Identity(h, h);
      for (int q = 0; q < 5; ++q) {
        const double t = kGaussT[q];
        const PhaseVec x = g[k] + t * d;
        const PhaseVec dphi = sys.potential_gradient(x);
        const Matrix hq = potential_hessian(sys, x);
        ga += weight * kGaussW[q] * (1.0 - t) * dphi;
        gb += weight * kGaussW[q] * t * dphi;
        haa += weight * kGaussW[q] * (1.0 - t) * (1.0 - t) * hq;
        hab += weight * kGaussW[q] * t * (1.0 - t) * hq;
        hbb += weight * kGaussW[q] * t * t * hq;
      }
      const bool a_free = k >= 1;
      const bool b_free = k + 1 <= segments - 1;
      for (int i = 0; i < h; ++i) {
        if (a_free) grad[offset(k) + i] += ga[i];
        if (b_free) grad[offset(k + 1) + i] += gb[i];
        for (int j = 0; j < h; ++j) {
          if (a_free) trip.emplace_back(offset(k) + i, offset(k) + j, haa(i, j));
          if (b_free) trip.emplace_back(offset(k + 1) + i, offset(k + 1) + j, hbb(i, j));
          if (a_free && b_free) {
            trip.emplace_back(offset(k) + i, offset(k + 1) + j, hab(i, j));
            trip.emplace_back(offset(k + 1) + i, offset(k) + j, hab(j, i));
          }
        }
      }
    }
    hess.resize(static_cast<Eigen::Index>(unknowns), static_cast<Eigen::Index>(unknowns));
    hess.setFromTriplets(trip.begin(), trip.end());
  }
};

// Geodesic polyline reparametrized so that |g'| = sqrt(2 Phi) / eps, the
// equipartition relation of the optimal profile, centered at half the
// weighted length and sampled on the uniform grid over [-L, L].
std::vector<PhaseVec> equipartition_initial_guess(const PhaseSystem& sys,
                                                  const std::vector<PhaseVec>& path, double eps,
                                                  double half_width, int n_samples) {
  const std::size_t segs = path.size() - 1;
  std::vector<double> len(segs);
  std::vector<double> rho(segs);
  double rho_max = 0.0;
  for (std::size_t j = 0; j < segs; ++j) {
    len[j] = (path[j + 1] - path[j]).norm();
    rho[j] = sys.metric_density(0.5 * (path[j] + path[j + 1]));
    rho_max = std::max(rho_max, rho[j]);
  }
  const double floor = 1e-2 * std::max(rho_max, 1e-300);
  std::vector<double> s(path.size(), 0.0);
  std::vector<double> weighted(path.size(), 0.0);
  for (std::size_t j = 0; j < segs; ++j) {
    s[j + 1] = s[j] + eps * len[j] / std::max(rho[j], floor);
    weighted[j + 1] = weighted[j] + rho[j] * len[j];
  }
  // Shift so that s = 0 sits at half of the weighted length.
  const double half = 0.5 * weighted.back();
  double center = 0.0;
  for (std::size_t j = 0; j < segs; ++j) {
    if (weighted[j + 1] >= half) {
      const double span = weighted[j + 1] - weighted[j];
      const double t = span > 0.0 ? (half - weighted[j]) / span : 0.0;
      center = s[j] + t * (s[j + 1] - s[j]);
      break;
    }
  }
  std::vector<PhaseVec> out(static_cast<std::size_t>(n_samples));
  const double ds = 2.0 * half_width / (n_samples - 1);
  std::size_t j = 0;
  for (int k = 0; k < n_samples; ++k) {
    const double target = -half_width + k * ds + center;
    if (target <= s.front()) {
      out[k] = path.front();
      continue;
    }
    if (target >= s.back()) {
      out[k] = path.back();
      continue;
    }
    while (j + 1 < s.size() && s[j + 1] < target) ++j;
    const double span = s[j + 1] - s[j];
    const double t = span > 0.0 ? (target - s[j]) / span : 0.0;
    out[k] = path[j] + t * (path[j + 1] - path[j]);
  }
  out.front() = path.front();
  out.back() = path.back();
  return out;
}

}  // namespace

PhaseVec Profile1D::at(double s) const {
  if (s <= -half_width) return samples.front();
  if (s >= half_width) return samples.back();
  const double u = (s + half_width) / spacing();
  const auto k = std::min(static_cast<std::size_t>(u), samples.size() - 2);
  const double t = u - static_cast<double>(k);
  return (1.0 - t) * samples[k] + t * samples[k + 1];
}

int default_profile_samples(double eps, double half_width) {
  return static_cast<int>(std::ceil(40.0 * half_width / eps)) + 1;
}

double profile_functional(const PhaseSystem& sys, const std::vector<PhaseVec>& samples, double eps,
                          double ds, double* gradient_part, double* potential_part) {
  if (samples.size() < 2) throw InvalidArgument("profile needs at least two samples");
  const Functional fn{sys, eps, ds, sys.components(), samples.size() - 1};
  return fn.energy(samples, gradient_part, potential_part);
}

Profile1D optimal_profile(const GeodesicSolver& solver, int alpha, int beta, double eps,
                          double half_width, int n_samples) {
  const PhaseSystem& sys = solver.system();
  if (alpha == beta) throw InvalidArgument("optimal_profile: degenerate pair (alpha == beta)");
  if (alpha < 0 || beta < 0 || alpha >= sys.well_count() || beta >= sys.well_count()) {
    throw InvalidArgument("optimal_profile: well index out of range");
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidArgument("epsilon must be positive");
  if (!(half_width >= 10.0 * eps)) throw InvalidArgument("half-width must be at least 10 eps");
  if (n_samples == 0) n_samples = default_profile_samples(eps, half_width);
  if (n_samples < 3) throw InvalidArgument("profile needs at least three samples");

  const auto path = solver.solve(sys.well(alpha), sys.well(beta)).nodes;
  Profile1D prof;
  prof.alpha = alpha;
  prof.beta = beta;
  prof.epsilon = eps;
  prof.half_width = half_width;
  prof.samples = equipartition_initial_guess(sys, path, eps, half_width, n_samples);

  const int h = sys.components();
  const Functional fn{sys, eps, prof.spacing(), h, prof.samples.size() - 1};
  double energy = fn.energy(prof.samples, nullptr, nullptr);
  const double scale = eps / prof.spacing();
  double lambda = 0.0;
  Eigen::VectorXd grad;
  Eigen::SparseMatrix<double> hess;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  Eigen::SparseMatrix<double> identity(0, 0);
  for (int iter = 0; iter < 400; ++iter) {
    fn.derivatives(prof.samples, grad, hess);
    if (grad.lpNorm<Eigen::Infinity>() < 1e-13 * scale) break;
    if (identity.rows() != hess.rows()) {
      identity.resize(hess.rows(), hess.cols());
      identity.setIdentity();
    }
    bool stepped = false;
    while (lambda < 1e12 * scale) {
      llt.compute(hess + lambda * identity);
      if (llt.info() == Eigen::Success) {
        const Eigen::VectorXd step = llt.solve(-grad);
        std::vector<PhaseVec> trial = prof.samples;
        for (std::size_t k = 1; k + 1 < trial.size(); ++k) {
          for (int i = 0; i < h; ++i) trial[k][i] += step[static_cast<Eigen::Index>((k - 1) * h + i)];
        }
        const double e = fn.energy(trial, nullptr, nullptr);
        if (e < energy) {
          prof.samples = std::move(trial);
          energy = e;
          lambda = lambda > 0.0 ? lambda * 0.1 : 0.0;
          if (lambda < 1e-12 * scale) lambda = 0.0;
          stepped = true;
          break;
        }
      }
      lambda = lambda > 0.0 ? lambda * 10.0 : 1e-8 * scale;
    }
    if (!stepped) break;
  }
  prof.energy = fn.energy(prof.samples, &prof.gradient_energy, &prof.potential_energy);
  return prof;
}

double recovery_radius_bound(const GeodesicSolver& solver) {
  const PhaseSystem& sys = solver.system();
  double r = 0.0;
  for (const auto& p : sys.wells()) r = std::max(r, p.norm());
  for (int a = 0; a < sys.well_count(); ++a) {
    for (int b = a + 1; b < sys.well_count(); ++b) {
      for (const auto& g : solver.solve(sys.well(a), sys.well(b)).nodes) r = std::max(r, g.norm());
    }
  }
  return r;
}

namespace {

struct InterfaceEdge {
  Vec2 a;
  Vec2 b;
  int l0;
  int l1;
};

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const double len2 = d.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * d)).norm();
}

}  // namespace

PhaseField recovery_sequence_2d(const DeformationField& def, const PhasePartition& part, double eps,
                                const GeodesicSolver& solver) {
  const PhaseSystem& sys = solver.system();
  const Grid& grid = def.grid();
  if (!(part.grid == grid)) throw InvalidArgument("partition and deformation grids differ");
  part.validate();
  if (part.phase_count > sys.well_count()) throw InvalidArgument("partition has too many phases");
  if (!(eps > 0.0)) throw InvalidArgument("epsilon must be positive");

  std::vector<InterfaceEdge> edges;
  std::vector<std::vector<std::size_t>> node_edges(grid.node_count());
  auto add_edge = [&](std::size_t c0, std::size_t c1, std::size_t na, std::size_t nb) {
    const int l0 = part.labels[c0];
    const int l1 = part.labels[c1];
    if (l0 == l1) return;
    node_edges[na].push_back(edges.size());
    node_edges[nb].push_back(edges.size());
    edges.push_back({def[na], def[nb], l0, l1});
  };
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i + 1 < grid.nx(); ++i) {
      add_edge(grid.cell(i, j), grid.cell(i + 1, j), grid.node(i + 1, j), grid.node(i + 1, j + 1));
    }
  }
  for (int j = 0; j + 1 < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      add_edge(grid.cell(i, j), grid.cell(i, j + 1), grid.node(i, j + 1), grid.node(i + 1, j + 1));
    }
  }

  std::map<std::pair<int, int>, Profile1D> profiles;
  for (const auto& e : edges) {
    const auto key = std::minmax(e.l0, e.l1);
    if (!profiles.count(key)) {
      profiles.emplace(key, optimal_profile(solver, key.first, key.second, eps, 10.0 * eps));
    }
  }

  const double cutoff = 5.0 * eps;
  // Value for a node of phase `a` at deformed distance `dist` from an a|b edge.
  auto profile_value = [&](int a, int b, double dist) -> PhaseVec {
    if (dist >= cutoff) return sys.well(a);
    const auto& prof = profiles.at(std::minmax(a, b));
    return a < b ? prof.at(-dist) : prof.at(dist);
  };

  PhaseField z(grid, sys.components());
  parallel_for(grid.node_count(), [&](std::size_t n) {
    const int i = grid.node_i(n);
    const int j = grid.node_j(n);
    int label = -1;
    for (int dj = -1; dj <= 0; ++dj) {
      for (int di = -1; di <= 0; ++di) {
        const int ci = i + di;
        const int cj = j + dj;
        if (ci < 0 || cj < 0 || ci >= grid.nx() || cj >= grid.ny()) continue;
        label = part.labels[grid.cell(ci, cj)];
        if (label >= 0) break;
      }
      if (label >= 0) break;
    }
    if (!node_edges[n].empty()) {
      // The node lies on an interface.
      const auto& e = edges[node_edges[n].front()];
      z.set(n, profile_value(e.l0, e.l1, 0.0));
      return;
    }
    double best = kInfinity;
    int other = -1;
    const Vec2 p = def[n];
    for (const auto& e : edges) {
      if (e.l0 != label && e.l1 != label) continue;
      const double d = segment_distance(p, e.a, e.b);
      if (d < best) {
        best = d;
        other = e.l0 == label ? e.l1 : e.l0;
      }
    }
    z.set(n, other < 0 ? sys.well(label) : profile_value(label, other, best));
  });
  return z;
}

std::vector<SweepRow> gamma_sweep(const SweepScenario& scenario, const GeodesicSolver& solver,
                                  const StoredEnergy& w, const IterateObserver& observer) {
  const PhaseSystem& sys = solver.system();
  const DistanceMatrix dist = phase_distance_matrix(solver);
  std::optional<WellDistanceTable> table;
  std::vector<SweepRow> rows;
  for (double eps : scenario.epsilons) {
    const auto start = std::chrono::steady_clock::now();
    SweepRow row;
    row.epsilon = eps;
    row.f_eps_min = std::numeric_limits<double>::quiet_NaN();
    try {
      MinimizeConfig cfg = scenario.minimize_cfg;
      cfg.epsilon = eps;
      std::optional<MinimizerState> best;
      auto keep_best = [&](MinimizerState s) {
        if (!best || s.history.back().objective < best->history.back().objective) best = std::move(s);
      };
      if (scenario.minimize) {
        for (int k = 0; k < scenario.restarts; ++k) {
          MinimizeConfig run = cfg;
          run.seed = cfg.seed + static_cast<std::uint64_t>(k);
          try {
            const PhaseField z0 =
                initial_phase(scenario.def.grid(), sys, scenario.pattern, run.seed);
            keep_best(minimize_eps(run, sys, w, scenario.def, z0, observer));
            ++row.restarts_used;
          } catch (const std::exception& ex) {
            row.status = std::string("restart failed: ") + ex.what();
          }
        }
      }

      PhasePartition part = [&] {
        if (scenario.partition) return *scenario.partition;
        if (!best) throw DomainError("no minimizer available for the sharp projection");
        if (!table) table.emplace(solver);
        return sharp_projection(best->z, *table);
      }();
      const DeformationField& geom = (scenario.partition || !best) ? scenario.def : best->def;
      const PhaseField z_rec = recovery_sequence_2d(geom, part, eps, solver);
      const EnergyReport rec = diffuse_energy_report(geom, z_rec, eps, sys, w);
      row.f_eps_recovery = rec.total;
      row.f0_sharp = sharp_energy_report(geom, part, sys, w, dist).total;
      row.mass_error = (mass_vector(geom, z_rec) - mass_vector(geom, part, sys)).norm();
      row.bulk = rec.bulk;
      row.interface = rec.interface;

      if (scenario.minimize) {
        keep_best(minimize_eps(cfg, sys, w, geom, z_rec, observer));
        const auto& final_report = best->history.back().report;
        row.f_eps_min = final_report.total;
        row.bulk = final_report.bulk;
        row.interface = final_report.interface;
      }
      if (!std::isfinite(row.f_eps_recovery) || !std::isfinite(row.f0_sharp)) {
        row.failed = true;
        row.status = "non-finite energy";
      }
    } catch (const std::exception& ex) {
      row.failed = true;
      row.status = ex.what();
    }
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  const auto old = out.precision(12);
  out << "epsilon,F_eps_min,F_eps_recovery,F0_sharp,bulk,interface,mass_error,restarts_used,"
         "wall_time_s,status\n";
  for (const auto& r : rows) {
    out << r.epsilon << ',' << r.f_eps_min << ',' << r.f_eps_recovery << ',' << r.f0_sharp << ','
        << r.bulk << ',' << r.interface << ',' << r.mass_error << ',' << r.restarts_used << ','
        << r.wall_time_s << ',' << (r.failed ? "failed: " : "") << r.status << '\n';
  }
  out.precision(old);
}

}  // namespace hypf
