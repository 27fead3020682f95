#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hypf::cli {

namespace {

// Reads one JSON object, tracking which keys were consumed so that unknown
// keys can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(field(key) + ": " + what);
  }

  std::string field(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double number(const std::string& key, double def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number()) fail(key, "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) fail(key, "expected a finite number");
    return x;
  }

  double positive(const std::string& key, double def) {
    const double x = number(key, def);
    if (!(x > 0.0)) fail(key, "must be positive");
    return x;
  }

  int integer(const std::string& key, int def, int lo) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_number_integer()) fail(key, "expected an integer");
    const auto x = v->get<long long>();
    if (x < lo || x > 1'000'000'000) fail(key, "integer out of range");
    return static_cast<int>(x);
  }

  bool boolean(const std::string& key, bool def) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) fail(key, "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, std::string def,
                     const std::vector<std::string>& allowed = {}) {
    const json* v = find(key);
    if (!v) return def;
    if (!v->is_string()) fail(key, "expected a string");
    auto s = v->get<std::string>();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(key, "'" + s + "' is not one of: " + list);
    }
    return s;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    const json* v = find(key);
    if (!v) return def;
    return number_array(*v, field(key));
  }

  static std::vector<double> number_array(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        throw ConfigError(where + "[" + std::to_string(i) + "]: expected a finite number");
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  static Mat2 matrix(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(where + ": expected a 2x2 array");
    Mat2 m;
    for (int r = 0; r < 2; ++r) {
      const auto row = number_array(v[r], where + "[" + std::to_string(r) + "]");
      if (row.size() != 2) throw ConfigError(where + "[" + std::to_string(r) + "]: expected 2 entries");
      m(r, 0) = row[0];
      m(r, 1) = row[1];
    }
    return m;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(key, "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Converts library validation errors into field diagnostics.
template <typename Fn>
auto guarded(const std::string& where, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(where + ": " + ex.what());
  }
}

PhasesConfig parse_phases(const json* j) {
  PhasesConfig out;
  if (!j) return out;
  Section s(*j, "phases");
  out.family = guarded("phases.family", [&] {
    return potential_family_from_string(
        s.string("family", std::string(to_string(out.family)),
                 {"double-well", "product-of-squares", "perturbed-quadratic-wells"}));
  });
  if (const json* w = s.find("wells")) {
    if (!w->is_array() || w->size() < 2) throw ConfigError("phases.wells: expected at least two wells");
    out.wells.clear();
    for (std::size_t i = 0; i < w->size(); ++i) {
      out.wells.push_back(Section::number_array((*w)[i], "phases.wells[" + std::to_string(i) + "]"));
    }
  }
  out.box_radius = s.positive("R", out.box_radius);
  out.lattice = s.integer("lattice", out.lattice, 3);
  out.perturbed.amplitude = s.number("amplitude", out.perturbed.amplitude);
  out.perturbed.frequency = s.number("frequency", out.perturbed.frequency);
  out.perturbed.stiffness = s.numbers("stiffness", out.perturbed.stiffness);
  s.finish();
  return out;
}

StoredEnergySpec parse_stored(const json* j, int h) {
  StoredEnergySpec out = h == 1 ? StoredEnergySpec::two_variant_default() : StoredEnergySpec{};
  if (h != 1) out.wells.assign(std::size_t(h) + 1, WellMaterial{});
  if (j) {
    Section s(*j, "stored_energy");
    out.c1 = s.number("c1", out.c1);
    out.c2 = s.number("c2", out.c2);
    out.c3 = s.number("c3", out.c3);
    out.c4 = s.number("c4", out.c4);
    out.p = s.number("p", out.p);
    out.r = s.number("r", out.r);
    out.q = s.number("q", out.q);
    if (const json* w = s.find("wells")) {
      if (!w->is_array()) throw ConfigError("stored_energy.wells: expected an array");
      out.wells.clear();
      for (std::size_t i = 0; i < w->size(); ++i) {
        const std::string where = "stored_energy.wells[" + std::to_string(i) + "]";
        Section ws((*w)[i], where);
        WellMaterial m;
        m.shear_modulus = ws.number("mu", m.shear_modulus);
        if (const json* u = ws.find("U")) m.prestrain = Section::matrix(*u, where + ".U");
        ws.finish();
        out.wells.push_back(m);
      }
    }
    s.finish();
  }
  if (out.components() != h) {
    throw ConfigError("stored_energy.wells: expected " + std::to_string(h + 1) +
                      " entries (phase components + 1)");
  }
  guarded("stored_energy", [&] {
    out.validate();
    return 0;
  });
  return out;
}

GridConfig parse_grid(const json* j) {
  GridConfig out;
  if (!j) return out;
  Section s(*j, "grid");
  out.nx = s.integer("nx", out.nx, 2);
  out.ny = s.integer("ny", out.ny, 2);
  out.lx = s.positive("lx", out.lx);
  out.ly = s.positive("ly", out.ly);
  s.finish();
  return out;
}

BoundaryConfig parse_boundary(const json* j) {
  BoundaryConfig out;
  if (!j) return out;
  Section s(*j, "boundary");
  out.type = s.string("type", out.type, {"identity", "affine", "shear"});
  if (const json* m = s.find("matrix")) out.matrix = Section::matrix(*m, "boundary.matrix");
  if (const json* o = s.find("offset")) {
    const auto v = Section::number_array(*o, "boundary.offset");
    if (v.size() != 2) throw ConfigError("boundary.offset: expected 2 entries");
    out.offset = Vec2(v[0], v[1]);
  }
  out.amount = s.number("amount", out.amount);
  if (out.type == "affine" && !(out.matrix.determinant() > 0.0)) {
    throw ConfigError("boundary.matrix: determinant must be positive");
  }
  s.finish();
  return out;
}

MinimizeSection parse_minimize(const json* j) {
  MinimizeSection out;
  if (!j) return out;
  Section s(*j, "minimize");
  auto& c = out.cfg;
  c.epsilon = s.positive("epsilon", c.epsilon);
  c.max_outer_iters = s.integer("max_outer_iters", c.max_outer_iters, 1);
  c.inner_iters_y = s.integer("inner_iters_y", c.inner_iters_y, 0);
  c.inner_iters_z = s.integer("inner_iters_z", c.inner_iters_z, 0);
  c.initial_step = s.positive("initial_step", c.initial_step);
  c.rule.backtracking = s.positive("backtracking", c.rule.backtracking);
  c.rule.sufficient_decrease = s.positive("sufficient_decrease", c.rule.sufficient_decrease);
  c.rule.det_floor = s.positive("det_floor", c.rule.det_floor);
  c.rule.max_backtracks = s.integer("max_backtracks", c.rule.max_backtracks, 1);
  c.tol = s.positive("tol", c.tol);
  c.mass_penalty_weight = s.number("mass_penalty_weight", c.mass_penalty_weight);
  c.target_mass = s.numbers("target_mass", c.target_mass);
  c.seed = static_cast<std::uint64_t>(s.integer("seed", 0, 0));
  c.stagnation_limit = s.integer("stagnation_limit", c.stagnation_limit, 1);
  c.freeze_y = s.boolean("freeze_y", c.freeze_y);
  out.init = s.string("init", out.init, {"stripes", "random", "file"});
  out.init_file = s.string("init_file", out.init_file);
  out.stripes = s.integer("stripes", out.stripes, 1);
  out.noise = s.number("noise", out.noise);
  if (out.noise < 0.0) s.fail("noise", "must be non-negative");
  if (out.init == "file" && out.init_file.empty()) s.fail("init_file", "required when init is 'file'");
  s.finish();
  return out;
}

SweepConfig parse_sweep(const json* j) {
  SweepConfig out;
  if (!j) return out;
  Section s(*j, "sweep");
  out.epsilons = s.numbers("epsilons", out.epsilons);
  if (out.epsilons.empty()) s.fail("epsilons", "must not be empty");
  for (std::size_t i = 0; i < out.epsilons.size(); ++i) {
    if (!(out.epsilons[i] > 0.0)) s.fail("epsilons", "entries must be positive");
    if (i > 0 && !(out.epsilons[i] < out.epsilons[i - 1])) s.fail("epsilons", "must be decreasing");
  }
  out.scenario = s.string("scenario", out.scenario, {"checkerboard", "stripe", "minimized"});
  out.restarts = s.integer("restarts", out.restarts, 1);
  out.minimize = s.boolean("minimize", out.minimize);
  out.profile_half_width = s.positive("profile_half_width", out.profile_half_width);
  s.finish();
  return out;
}

OutputConfig parse_output(const json* j) {
  OutputConfig out;
  if (!j) return out;
  Section s(*j, "output");
  out.directory = s.string("directory", out.directory);
  if (const json* f = s.find("formats")) {
    if (!f->is_array()) throw ConfigError("output.formats: expected an array");
    out.formats.clear();
    for (const auto& v : *f) {
      if (!v.is_string() || (v != "csv" && v != "json")) {
        throw ConfigError("output.formats: entries must be \"csv\" or \"json\"");
      }
      out.formats.push_back(v.get<std::string>());
    }
  }
  out.checkpoint_every = s.integer("checkpoint_every", out.checkpoint_every, 0);
  s.finish();
  return out;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  Section root(doc, "");
  ExperimentConfig cfg;
  cfg.phases = parse_phases(root.find("phases"));
  const auto h = cfg.phases.wells.front().size();
  for (std::size_t i = 0; i < cfg.phases.wells.size(); ++i) {
    if (cfg.phases.wells[i].size() != h || h == 0 || h > std::size_t(kMaxComponents)) {
      throw ConfigError("phases.wells[" + std::to_string(i) + "]: inconsistent dimension");
    }
  }
  // Construct once so that potential-level invariants are reported here.
  guarded("phases", [&] { return cfg.phase_system().components(); });
  cfg.stored = parse_stored(root.find("stored_energy"), static_cast<int>(h));
  cfg.grid = parse_grid(root.find("grid"));
  cfg.boundary = parse_boundary(root.find("boundary"));
  cfg.minimize = parse_minimize(root.find("minimize"));
  cfg.sweep = parse_sweep(root.find("sweep"));
  cfg.output = parse_output(root.find("output"));
  root.finish();
  guarded("minimize", [&] {
    cfg.minimize.cfg.validate(static_cast<int>(h));
    return 0;
  });
  guarded("grid", [&] { return cfg.make_grid().nx(); });
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  }
  return parse_config(doc);
}

PhaseSystem ExperimentConfig::phase_system() const {
  std::vector<PhaseVec> wells;
  for (const auto& w : phases.wells) {
    wells.push_back(Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())));
  }
  return PhaseSystem(phases.family, std::move(wells), phases.box_radius, phases.perturbed);
}

GeodesicSolver ExperimentConfig::solver() const {
  GeodesicOptions opts;
  opts.lattice_points = phases.lattice;
  return GeodesicSolver(phase_system(), opts);
}

DeformationField ExperimentConfig::boundary_deformation() const {
  const Grid g = make_grid();
  if (boundary.type == "identity") {
    return DeformationField::interpolate_boundary(g, [](const Vec2& x) { return x; });
  }
  if (boundary.type == "shear") {
    const double a = boundary.amount;
    return DeformationField::interpolate_boundary(
        g, [a](const Vec2& x) { return Vec2(x.x() + a * x.y(), x.y()); });
  }
  const Mat2 m = boundary.matrix;
  const Vec2 o = boundary.offset;
  return DeformationField::interpolate_boundary(g, [m, o](const Vec2& x) -> Vec2 { return m * x + o; });
}

bool ExperimentConfig::wants(const std::string& format) const {
  return std::find(output.formats.begin(), output.formats.end(), format) != output.formats.end();
}

json to_json(const ExperimentConfig& cfg) {
  auto mat = [](const Mat2& m) {
    return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})});
  };
  json wells = json::array();
  for (const auto& w : cfg.stored.wells) wells.push_back({{"mu", w.shear_modulus}, {"U", mat(w.prestrain)}});
  const auto& m = cfg.minimize.cfg;
  return json{
      {"phases",
       {{"family", std::string(to_string(cfg.phases.family))},
        {"wells", cfg.phases.wells},
        {"R", cfg.phases.box_radius},
        {"lattice", cfg.phases.lattice},
        {"amplitude", cfg.phases.perturbed.amplitude},
        {"frequency", cfg.phases.perturbed.frequency},
        {"stiffness", cfg.phases.perturbed.stiffness}}},
      {"stored_energy",
       {{"c1", cfg.stored.c1}, {"c2", cfg.stored.c2}, {"c3", cfg.stored.c3}, {"c4", cfg.stored.c4},
        {"p", cfg.stored.p}, {"r", cfg.stored.r}, {"q", cfg.stored.q}, {"wells", wells}}},
      {"grid", {{"nx", cfg.grid.nx}, {"ny", cfg.grid.ny}, {"lx", cfg.grid.lx}, {"ly", cfg.grid.ly}}},
      {"boundary",
       {{"type", cfg.boundary.type},
        {"matrix", mat(cfg.boundary.matrix)},
        {"offset", {cfg.boundary.offset.x(), cfg.boundary.offset.y()}},
        {"amount", cfg.boundary.amount}}},
      {"minimize",
       {{"epsilon", m.epsilon},
        {"max_outer_iters", m.max_outer_iters},
        {"inner_iters_y", m.inner_iters_y},
        {"inner_iters_z", m.inner_iters_z},
        {"initial_step", m.initial_step},
        {"backtracking", m.rule.backtracking},
        {"sufficient_decrease", m.rule.sufficient_decrease},
        {"det_floor", m.rule.det_floor},
        {"max_backtracks", m.rule.max_backtracks},
        {"tol", m.tol},
        {"mass_penalty_weight", m.mass_penalty_weight},
        {"target_mass", m.target_mass},
        {"seed", m.seed},
        {"stagnation_limit", m.stagnation_limit},
        {"freeze_y", m.freeze_y},
        {"init", cfg.minimize.init},
        {"init_file", cfg.minimize.init_file},
        {"stripes", cfg.minimize.stripes},
        {"noise", cfg.minimize.noise}}},
      {"sweep",
       {{"epsilons", cfg.sweep.epsilons},
        {"scenario", cfg.sweep.scenario},
        {"restarts", cfg.sweep.restarts},
        {"minimize", cfg.sweep.minimize},
        {"profile_half_width", cfg.sweep.profile_half_width}}},
      {"output",
       {{"directory", cfg.output.directory},
        {"formats", cfg.output.formats},
        {"checkpoint_every", cfg.output.checkpoint_every}}},
  };
}

}  // namespace hypf::cli
