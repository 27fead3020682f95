#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "checks.hpp"
#include "config.hpp"
#include "hypf/energy.hpp"
#include "hypf/field_io.hpp"
#include "hypf/geodesic.hpp"
#include "hypf/mm1d.hpp"
#include "hypf/optimize.hpp"
#include "hypf/reduce.hpp"
#include "scenarios.hpp"

namespace fs = std::filesystem;
using hypf::cli::json;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kNumerical = 2 };

/// Reported as exit 2 with the offending stage named.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool quiet = false;
  std::string state_path;
  bool sharp = false;
};

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, data.data(), data.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw hypf::cli::ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Everything a run needs: resolved config, its JSON echo and the input hash.
struct Run {
  hypf::cli::ExperimentConfig cfg;
  json resolved;
  std::string input_hash;
  fs::path out;
  bool quiet = false;

  void log(const std::string& msg) const {
    if (!quiet) std::cerr << msg << '\n';
  }

  fs::path file(const std::string& name) const { return out / name; }

  json envelope(const std::string& command) const {
    return json{{"command", command}, {"config", resolved}, {"input_sha256", input_hash}};
  }

  void write_json(const std::string& name, const json& j) const {
    std::ofstream f(file(name));
    f << j.dump(2) << '\n';
  }

  // CSV with the provenance header as comment lines.
  std::ofstream open_csv(const std::string& name) const {
    std::ofstream f(file(name));
    f << "# input_sha256: " << input_hash << '\n' << "# config: " << resolved.dump() << '\n';
    return f;
  }
};

Run prepare(const Options& opt, const std::vector<fs::path>& extra_inputs) {
  Run run;
  std::string config_bytes;
  if (opt.config_path.empty()) {
    run.cfg = hypf::cli::parse_config(json::object());
  } else {
    run.cfg = hypf::cli::load_config(opt.config_path);
  }
  if (opt.seed) run.cfg.minimize.cfg.seed = *opt.seed;
  run.resolved = hypf::cli::to_json(run.cfg);
  std::string hashed = run.resolved.dump();
  for (const auto& p : extra_inputs) hashed += read_bytes(p);
  run.input_hash = sha256_hex(hashed);
  run.out = opt.out_dir.empty() ? fs::path(run.cfg.output.directory) : fs::path(opt.out_dir);
  fs::create_directories(run.out);
  run.quiet = opt.quiet;
  return run;
}

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+infinity" : "-infinity";
  return v;
}

json report_json(const hypf::EnergyReport& r) {
  json diag = json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = number(v);
  json areas = json::array();
  for (Eigen::Index i = 0; i < r.pair_areas.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < r.pair_areas.cols(); ++j) row.push_back(r.pair_areas(i, j));
    areas.push_back(row);
  }
  json j{{"bulk", number(r.bulk)},
         {"interface", number(r.interface)},
         {"total", number(r.total)},
         {"epsilon", r.epsilon ? json(*r.epsilon) : json("sharp")},
         {"pair_areas", areas},
         {"diagnostics", diag}};
  if (r.inverted_cell) j["inverted_cell"] = *r.inverted_cell;
  return j;
}

void require_finite(double v, const std::string& stage) {
  if (std::isnan(v)) throw NumericalFailure("NaN detected in " + stage);
}

void require_report(const hypf::EnergyReport& r, const std::string& stage) {
  if (r.infinite) {
    throw NumericalFailure(stage + ": cell " + std::to_string(r.inverted_cell.value_or(0)) +
                           " has det <= 0, energy is +infinity");
  }
  require_finite(r.bulk, stage + " (bulk)");
  require_finite(r.interface, stage + " (interface)");
  for (const auto& [k, v] : r.diagnostics) require_finite(v, stage + " (" + k + ")");
}

int cmd_distance(const Options& opt) {
  const Run run = prepare(opt, {});
  const auto solver = run.cfg.solver();
  run.log("computing phase distance matrix");
  const auto d = hypf::phase_distance_matrix(solver);
  for (Eigen::Index i = 0; i < d.d.size(); ++i) require_finite(d.d.data()[i], "distance matrix");
  const auto violations = hypf::check_triangle(d, 1e-6);
  if (run.cfg.wants("csv")) {
    auto f = run.open_csv("distance_matrix.csv");
    hypf::write_matrix_csv(f, d.d, 9);
  }
  json triples = json::array();
  for (const auto& t : violations) triples.push_back(t);
  json out = run.envelope("distance");
  json rows = json::array();
  for (int a = 0; a < d.size(); ++a) {
    json row = json::array();
    for (int b = 0; b < d.size(); ++b) row.push_back(d(a, b));
    rows.push_back(row);
  }
  out["distance_matrix"] = rows;
  out["triangle_violations"] = triples;
  out["recovery_radius_bound"] = hypf::recovery_radius_bound(solver);
  if (run.cfg.wants("json")) run.write_json("distance.json", out);
  if (!opt.quiet) std::cout << rows.dump() << '\n';
  return kOk;
}

int cmd_profile(const Options& opt) {
  const Run run = prepare(opt, {});
  const auto solver = run.cfg.solver();
  const auto& sys = solver.system();
  const auto d = hypf::phase_distance_matrix(solver);
  json entries = json::array();
  std::optional<std::ofstream> csv;
  if (run.cfg.wants("csv")) {
    csv.emplace(run.open_csv("profiles.csv"));
    *csv << "alpha,beta,epsilon,half_width,samples,energy,gradient_energy,potential_energy,"
            "equipartition_ratio,d_alpha_beta\n";
    csv->precision(12);
  }
  for (int a = 0; a < sys.well_count(); ++a) {
    for (int b = a + 1; b < sys.well_count(); ++b) {
      for (double eps : run.cfg.sweep.epsilons) {
        const double half = std::max(run.cfg.sweep.profile_half_width, 10.0 * eps);
        run.log("profile " + std::to_string(a) + "-" + std::to_string(b) + " eps " + std::to_string(eps));
        const auto p = hypf::optimal_profile(solver, a, b, eps, half);
        require_finite(p.energy, "optimal_profile");
        const double ratio = std::abs(p.gradient_energy - p.potential_energy) / p.energy;
        if (csv) {
          *csv << a << ',' << b << ',' << eps << ',' << half << ',' << p.samples.size() << ','
               << p.energy << ',' << p.gradient_energy << ',' << p.potential_energy << ',' << ratio
               << ',' << d(a, b) << '\n';
        }
        entries.push_back({{"alpha", a},
                           {"beta", b},
                           {"epsilon", eps},
                           {"half_width", half},
                           {"energy", p.energy},
                           {"gradient_energy", p.gradient_energy},
                           {"potential_energy", p.potential_energy},
                           {"equipartition_ratio", ratio},
                           {"d_alpha_beta", d(a, b)}});
      }
    }
  }
  json out = run.envelope("profile");
  out["profiles"] = entries;
  if (run.cfg.wants("json")) run.write_json("profiles.json", out);
  return kOk;
}

int cmd_energy(const Options& opt) {
  if (opt.state_path.empty()) throw hypf::cli::ConfigError("energy: --state is required");
  const Run run = prepare(opt, {opt.state_path});
  const auto rec = hypf::read_field(fs::path(opt.state_path));
  const auto def = hypf::unpack_deformation(rec);
  const auto z = hypf::unpack_phase(rec);
  const auto solver = run.cfg.solver();
  const auto& sys = solver.system();
  if (z.components() != sys.components()) {
    throw hypf::cli::ConfigError("state file phase components do not match phases.wells");
  }
  const auto w = run.cfg.stored_energy();
  const hypf::WellDistanceTable table(solver);
  hypf::EnergyReport report;
  if (opt.sharp) {
    const auto part = hypf::sharp_projection(z, table);
    report = hypf::sharp_energy_report(def, part, sys, w, hypf::phase_distance_matrix(solver));
  } else {
    report = hypf::diffuse_energy_report(def, z, run.cfg.minimize.cfg.epsilon, sys, w, &table);
  }
  json out = run.envelope("energy");
  out["report"] = report_json(report);
  if (run.cfg.wants("json")) run.write_json("energy.json", out);
  if (!opt.quiet) std::cout << out["report"].dump() << '\n';
  require_report(report, "energy evaluation");
  return kOk;
}

hypf::PhaseField initial_z(const Run& run, const hypf::PhaseSystem& sys, const hypf::Grid& grid) {
  const auto& m = run.cfg.minimize;
  if (m.init == "file") {
    auto z = hypf::unpack_phase(hypf::read_field(fs::path(m.init_file)));
    if (!(z.grid() == grid) || z.components() != sys.components()) {
      throw hypf::cli::ConfigError("minimize.init_file: grid or component count mismatch");
    }
    return hypf::project_phase(z, sys.box_radius());
  }
  return hypf::initial_phase(grid, sys, hypf::init_pattern_from_string(m.init), m.cfg.seed, m.noise,
                             m.stripes);
}

void write_history(std::ostream& f, const std::vector<hypf::HistoryRow>& hist) {
  f.precision(17);
  f << "iter,bulk,interface,total,objective,step_y,step_z,min_det\n";
  for (const auto& h : hist) {
    f << h.iter << ',' << h.report.bulk << ',' << h.report.interface << ',' << h.report.total << ','
      << h.objective << ',' << h.step_y << ',' << h.step_z << ',' << h.min_det << '\n';
  }
}

int cmd_minimize(const Options& opt) {
  std::vector<fs::path> inputs;
  if (!opt.config_path.empty()) {
    const auto cfg = hypf::cli::load_config(opt.config_path);
    if (cfg.minimize.init == "file") inputs.emplace_back(cfg.minimize.init_file);
  }
  const Run run = prepare(opt, inputs);
  const auto sys = run.cfg.phase_system();
  const auto w = run.cfg.stored_energy();
  const auto def = run.cfg.boundary_deformation();
  const auto z0 = initial_z(run, sys, def.grid());
  const int every = run.cfg.output.checkpoint_every;
  int iterate = 0;
  const auto state = hypf::minimize_eps(
      run.cfg.minimize.cfg, sys, w, def, z0, [&](const hypf::DeformationField& y, const hypf::PhaseField& z) {
        if (every > 0 && iterate > 0 && iterate % every == 0) {
          hypf::write_field(run.file("checkpoint_" + std::to_string(iterate) + ".hypf"), hypf::pack_state(y, z));
        }
        ++iterate;
      });
  for (const auto& h : state.history) require_report(h.report, "minimize iteration " + std::to_string(h.iter));
  hypf::write_field(run.file("final_state.hypf"), hypf::pack_state(state.def, state.z));
  if (run.cfg.wants("csv")) {
    auto f = run.open_csv("history.csv");
    write_history(f, state.history);
  }
  json out = run.envelope("minimize");
  out["termination"] = std::string(hypf::to_string(state.reason));
  out["iterations"] = state.history.size() - 1;
  out["initial"] = report_json(state.history.front().report);
  out["final"] = report_json(state.history.back().report);
  if (run.cfg.wants("json")) run.write_json("minimize.json", out);
  run.log("termination: " + std::string(hypf::to_string(state.reason)));
  if (!opt.quiet) std::cout << out["final"].dump() << '\n';
  return kOk;
}

int cmd_gamma_sweep(const Options& opt) {
  const Run run = prepare(opt, {});
  const auto solver = run.cfg.solver();
  const auto w = run.cfg.stored_energy();
  const auto def = run.cfg.boundary_deformation();
  const auto& grid = def.grid();
  const auto& sw = run.cfg.sweep;
  hypf::SweepScenario sc{sw.scenario, def, std::nullopt, sw.epsilons, sw.restarts, sw.minimize,
                         hypf::InitPattern::Stripes, run.cfg.minimize.cfg};
  if (run.cfg.minimize.init != "file") sc.pattern = hypf::init_pattern_from_string(run.cfg.minimize.init);
  if (solver.system().well_count() < 2) throw hypf::cli::ConfigError("sweep needs two wells");
  if (sw.scenario == "checkerboard") sc.partition = hypf::cli::quadrant_checkerboard(grid);
  if (sw.scenario == "stripe") sc.partition = hypf::cli::vertical_stripe(grid, 0.5 * grid.lx());
  if (sw.scenario == "minimized" && !sw.minimize) {
    throw hypf::cli::ConfigError("sweep.scenario: 'minimized' requires sweep.minimize = true");
  }
  const auto rows = hypf::gamma_sweep(sc, solver, w);
  if (run.cfg.wants("csv")) {
    auto f = run.open_csv("sweep.csv");
    hypf::write_sweep_csv(f, rows);
  }
  json jrows = json::array();
  bool failed = false;
  for (const auto& r : rows) {
    failed = failed || r.failed;
    jrows.push_back({{"epsilon", r.epsilon},
                     {"F_eps_min", number(r.f_eps_min)},
                     {"F_eps_recovery", number(r.f_eps_recovery)},
                     {"F0_sharp", number(r.f0_sharp)},
                     {"bulk", number(r.bulk)},
                     {"interface", number(r.interface)},
                     {"mass_error", number(r.mass_error)},
                     {"restarts_used", r.restarts_used},
                     {"status", r.status}});
  }
  json out = run.envelope("gamma-sweep");
  out["rows"] = jrows;
  if (run.cfg.wants("json")) run.write_json("sweep.json", out);
  if (!opt.quiet) hypf::write_sweep_csv(std::cout, rows);
  if (failed) throw NumericalFailure("gamma-sweep: at least one row failed (see sweep output)");
  return kOk;
}

int cmd_verify(const Options& opt, bool acceptance_only) {
  const Run run = prepare(opt, {});
  std::vector<hypf::cli::Check> checks = hypf::cli::acceptance_checks();
  if (!acceptance_only) {
    for (auto& c : hypf::cli::invariant_checks()) checks.push_back(std::move(c));
  }
  json results = json::array();
  bool all = true;
  for (const auto& c : checks) {
    const auto r = hypf::cli::run_check(c);
    all = all && r.passed;
    if (!opt.quiet) std::cout << hypf::cli::format_result_line(r) << std::endl;
    results.push_back({{"id", r.id},
                       {"name", r.name},
                       {"passed", r.passed},
                       {"detail", r.detail},
                       {"seconds", r.seconds}});
  }
  json out = run.envelope("verify");
  out["results"] = results;
  out["passed"] = all;
  run.write_json("verify.json", out);
  return all ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypf: diffuse and sharp interface energies for hyperelastic multiphase materials"};
  app.require_subcommand(1);
  Options opt;
  bool acceptance_only = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory (overrides output.directory)");
    sub->add_option("--seed", opt.seed, "random seed (overrides minimize.seed)");
    sub->add_option("--threads", opt.threads, "worker threads (default: HYPF_THREADS or 1)")
        ->check(CLI::Range(1, 1024));
    sub->add_flag("--quiet", opt.quiet, "suppress progress and summary output");
  };
  auto* distance = app.add_subcommand("distance", "phase distance matrix and triangle report");
  auto* profile = app.add_subcommand("profile", "1-D optimal profiles over the sweep epsilons");
  auto* energy = app.add_subcommand("energy", "evaluate F_eps or F_0 for a state file");
  auto* minimize = app.add_subcommand("minimize", "single minimization run");
  auto* sweep = app.add_subcommand("gamma-sweep", "epsilon sweep with recovery sequences");
  auto* verify = app.add_subcommand("verify", "run the acceptance and invariant suites");
  for (auto* sub : {distance, profile, energy, minimize, sweep, verify}) add_common(sub);
  energy->add_option("--state", opt.state_path, "state file written by minimize")->check(CLI::ExistingFile);
  energy->add_flag("--sharp", opt.sharp, "evaluate F_0 of the nearest-well projection");
  verify->add_flag("--acceptance-only", acceptance_only, "skip the per-module invariant checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  if (opt.threads) hypf::set_thread_count(*opt.threads);

  try {
    if (*distance) return cmd_distance(opt);
    if (*profile) return cmd_profile(opt);
    if (*energy) return cmd_energy(opt);
    if (*minimize) return cmd_minimize(opt);
    if (*sweep) return cmd_gamma_sweep(opt);
    if (*verify) return cmd_verify(opt, acceptance_only);
  } catch (const hypf::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kValidation;
  } catch (const hypf::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const hypf::DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kValidation;
}
