#include "fwlab/cli_io.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

namespace fwlab {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kExperiments{"peakon", "conservation", "taylor", "nonuniform", "continuity",
                                            "lipschitz", "lemma41", "ch-contrast", "inequality"};
const std::vector<std::string> kCommands{"solve", "besov-norm", "decompose"};
const std::vector<std::string> kFieldKinds{"zero", "constant", "peakon", "peakon-reflected", "peakon-smoothed",
                                           "phi", "fn", "gn", "fn+gn", "random"};

bool contains(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string g17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- value parsers; each throws std::invalid_argument with a short reason

double to_double(std::string_view s) {
  s = trim(s);
  if (s == "inf" || s == "infinity") return kInf;
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
  return v;
}

template <class I>
I to_integer(std::string_view s) {
  s = trim(s);
  I v{};
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  s = trim(s);
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> to_doubles(std::string_view s) {
  std::vector<double> out;
  for (auto item : split_list(s)) out.push_back(to_double(item));
  return out;
}

// Integers, with "a..b" expanding to the inclusive range.
std::vector<int> to_ints(std::string_view s) {
  std::vector<int> out;
  for (auto item : split_list(s)) {
    const auto dots = item.find("..");
    if (dots == std::string_view::npos) {
      out.push_back(to_integer<int>(item));
      continue;
    }
    const int a = to_integer<int>(item.substr(0, dots));
    const int b = to_integer<int>(item.substr(dots + 2));
    if (b < a) throw std::invalid_argument("empty range '" + std::string(item) + "'");
    for (int v = a; v <= b; ++v) out.push_back(v);
  }
  return out;
}

std::string doubles_text(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + g17(v[i]);
  return out;
}

std::string ints_text(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

// --- key registry

struct Key {
  std::string name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> k{
      {"grid.L", [](RunConfig& c, std::string_view v) { c.grid.L = to_double(v); },
       [](const RunConfig& c) { return g17(c.grid.L); }},
      {"grid.N", [](RunConfig& c, std::string_view v) { c.grid.N = to_integer<std::size_t>(v); },
       [](const RunConfig& c) { return std::to_string(c.grid.N); }},
      {"solver.model", [](RunConfig& c, std::string_view v) { c.solver.model = parse_model(trim(v)); },
       [](const RunConfig& c) { return std::string(to_string(c.solver.model)); }},
      {"solver.dt", [](RunConfig& c, std::string_view v) { c.solver.dt = trim(v) == "auto" ? 0.0 : to_double(v); },
       [](const RunConfig& c) { return c.solver.dt > 0.0 ? g17(c.solver.dt) : std::string("auto"); }},
      {"solver.T", [](RunConfig& c, std::string_view v) { c.solver.T = to_double(v); },
       [](const RunConfig& c) { return g17(c.solver.T); }},
      {"solver.cfl_safety", [](RunConfig& c, std::string_view v) { c.solver.cfl_safety = to_double(v); },
       [](const RunConfig& c) { return g17(c.solver.cfl_safety); }},
      {"solver.blowup_factor", [](RunConfig& c, std::string_view v) { c.solver.blowup_factor = to_double(v); },
       [](const RunConfig& c) { return g17(c.solver.blowup_factor); }},
      {"solver.blowup_threshold",
       [](RunConfig& c, std::string_view v) { c.solver.blowup_threshold = trim(v) == "auto" ? 0.0 : to_double(v); },
       [](const RunConfig& c) {
         return c.solver.blowup_threshold > 0.0 ? g17(c.solver.blowup_threshold) : std::string("auto");
       }},
      {"field.kind", [](RunConfig& c, std::string_view v) { c.field.kind = std::string(trim(v)); },
       [](const RunConfig& c) { return c.field.kind; }},
      {"field.n", [](RunConfig& c, std::string_view v) { c.field.n = to_integer<int>(v); },
       [](const RunConfig& c) { return std::to_string(c.field.n); }},
      {"field.seed", [](RunConfig& c, std::string_view v) { c.field.seed = to_integer<std::uint64_t>(v); },
       [](const RunConfig& c) { return std::to_string(c.field.seed); }},
      {"field.value", [](RunConfig& c, std::string_view v) { c.field.value = to_double(v); },
       [](const RunConfig& c) { return g17(c.field.value); }},
      {"field.smoothing", [](RunConfig& c, std::string_view v) { c.field.smoothing = to_integer<int>(v); },
       [](const RunConfig& c) { return std::to_string(c.field.smoothing); }},
      {"experiment.name", [](RunConfig& c, std::string_view v) { c.experiment.name = std::string(trim(v)); },
       [](const RunConfig& c) { return c.experiment.name; }},
      {"experiment.n_range", [](RunConfig& c, std::string_view v) { c.experiment.n_range = to_ints(v); },
       [](const RunConfig& c) { return ints_text(c.experiment.n_range); }},
      {"experiment.t_list", [](RunConfig& c, std::string_view v) { c.experiment.t_list = to_doubles(v); },
       [](const RunConfig& c) { return doubles_text(c.experiment.t_list); }},
      {"experiment.N_list", [](RunConfig& c, std::string_view v) { c.experiment.N_list = to_ints(v); },
       [](const RunConfig& c) { return ints_text(c.experiment.N_list); }},
      {"experiment.sigma_list", [](RunConfig& c, std::string_view v) { c.experiment.sigma_list = to_doubles(v); },
       [](const RunConfig& c) { return doubles_text(c.experiment.sigma_list); }},
      {"experiment.seed", [](RunConfig& c, std::string_view v) { c.experiment.seed = to_integer<std::uint64_t>(v); },
       [](const RunConfig& c) { return std::to_string(c.experiment.seed); }},
      {"experiment.pair_count", [](RunConfig& c, std::string_view v) { c.experiment.pair_count = to_integer<int>(v); },
       [](const RunConfig& c) { return std::to_string(c.experiment.pair_count); }},
      {"experiment.perturbation_scales",
       [](RunConfig& c, std::string_view v) { c.experiment.perturbation_scales = to_doubles(v); },
       [](const RunConfig& c) { return doubles_text(c.experiment.perturbation_scales); }},
      {"experiment.t_eval", [](RunConfig& c, std::string_view v) { c.experiment.t_eval = to_double(v); },
       [](const RunConfig& c) { return g17(c.experiment.t_eval); }},
      {"experiment.snapshots", [](RunConfig& c, std::string_view v) { c.experiment.snapshots = to_integer<int>(v); },
       [](const RunConfig& c) { return std::to_string(c.experiment.snapshots); }},
      {"experiment.corpus_size",
       [](RunConfig& c, std::string_view v) { c.experiment.corpus_size = to_integer<int>(v); },
       [](const RunConfig& c) { return std::to_string(c.experiment.corpus_size); }},
      {"experiment.bound", [](RunConfig& c, std::string_view v) { c.experiment.bound = to_double(v); },
       [](const RunConfig& c) { return g17(c.experiment.bound); }},
      {"norm.s", [](RunConfig& c, std::string_view v) { c.norm.s = to_double(v); },
       [](const RunConfig& c) { return g17(c.norm.s); }},
      {"norm.p", [](RunConfig& c, std::string_view v) { c.norm.p = to_double(v); },
       [](const RunConfig& c) { return g17(c.norm.p); }},
      {"norm.r", [](RunConfig& c, std::string_view v) { c.norm.r = to_double(v); },
       [](const RunConfig& c) { return g17(c.norm.r); }},
      {"output.dir", [](RunConfig& c, std::string_view v) { c.output_dir = std::string(trim(v)); },
       [](const RunConfig& c) { return c.output_dir; }},
      {"run.threads", [](RunConfig& c, std::string_view v) { c.threads = to_integer<unsigned>(v); },
       [](const RunConfig& c) { return std::to_string(c.threads); }},
  };
  return k;
}

const Key* find_key(std::string_view name) {
  for (const auto& k : keys())
    if (k.name == name) return &k;
  return nullptr;
}

bool is_sequence_kind(std::string_view kind) { return kind == "fn" || kind == "gn" || kind == "fn+gn"; }

void resolve_defaults(RunConfig& c) {
  auto& e = c.experiment;
  const std::string& name = e.name;
  if (e.n_range.empty()) e.n_range = {5, 6, 7, 8, 9};
  if (e.sigma_list.empty()) e.sigma_list = {1.0, 2.0, 3.0};
  if (e.N_list.empty()) e.N_list = {0, 2, 4, 6, 7, 8};
  if (e.perturbation_scales.empty()) e.perturbation_scales = {1e-2, 1e-3, 1e-4};
  if (e.t_list.empty()) {
    if (name == "taylor")
      e.t_list = log_spaced(1e-3, 1e-1, 8);
    else if (name == "ch-contrast")
      e.t_list = {0.02, 0.04, 0.06, 0.08, 0.1};
    else
      e.t_list = {0.01, 0.02, 0.05, 0.1};
  }
  const int default_n = (name == "continuity" || name == "ch-contrast") ? 6 : 5;
  if (c.field.kind.empty()) c.field.kind = name == "conservation" ? "gn" : "fn+gn";
  if (c.field.n < 0) c.field.n = default_n;
}

void validate(const RunConfig& c, std::vector<std::string>& errors) {
  auto fail = [&](const std::string& key, const std::string& why) { errors.push_back(key + ": " + why); };
  bool grid_ok = true;
  if (!(c.grid.L > 0.0) || !std::isfinite(c.grid.L)) {
    fail("grid.L", "L must be positive and finite (got " + g17(c.grid.L) + ")");
    grid_ok = false;
  }
  if (c.grid.N < 16 || (c.grid.N & (c.grid.N - 1)) != 0) {
    fail("grid.N", "N must be a power of two >= 16 (got " + std::to_string(c.grid.N) + ")");
    grid_ok = false;
  }

  if (c.solver.dt < 0.0) fail("solver.dt", "dt must be >= 0 or auto");
  if (!(c.solver.T >= 0.0)) fail("solver.T", "T must be >= 0");
  if (!(c.solver.cfl_safety > 0.0 && c.solver.cfl_safety <= 1.0)) fail("solver.cfl_safety", "must lie in (0, 1]");
  if (!(c.solver.blowup_factor > 0.0) || !std::isfinite(c.solver.blowup_factor))
    fail("solver.blowup_factor", "must be positive and finite");
  if (c.solver.blowup_threshold < 0.0) fail("solver.blowup_threshold", "must be >= 0 or auto");

  const auto& e = c.experiment;
  if (!e.name.empty() && !contains(kExperiments, e.name) && !contains(kCommands, e.name))
    fail("experiment.name", "unknown experiment '" + e.name + "'");
  if (!contains(kFieldKinds, c.field.kind)) fail("field.kind", "unknown field kind '" + c.field.kind + "'");
  if (c.field.smoothing < 0) fail("field.smoothing", "must be >= 0");

  if (grid_ok) {
    const GridSpec grid = c.grid_spec();
    const int nmax = max_resolvable_n(grid);
    const bool uses_range = e.name == "nonuniform" || e.name == "lemma41";
    if (uses_range)
      for (int n : e.n_range)
        if (n < 0 || n > nmax) fail("experiment.n_range", ResolvabilityError(n, nmax).what());
    // An empty name is a bare parse; check everything the field could need.
    static const std::vector<std::string> field_users{"",           "solve",  "besov-norm",  "decompose",
                                                      "conservation", "taylor", "continuity", "ch-contrast"};
    const bool uses_field = contains(field_users, e.name);
    const bool uses_field_n = uses_field && (is_sequence_kind(c.field.kind) || e.name == "ch-contrast");
    if (uses_field_n && (c.field.n < 0 || c.field.n > nmax)) fail("field.n", ResolvabilityError(c.field.n, nmax).what());

    const int jmax = partition_for(grid)->j_max();
    for (std::size_t i = 0; e.name == "continuity" && i < e.N_list.size(); ++i) {
      if (e.N_list[i] < 0 || e.N_list[i] > jmax + 1)
        fail("experiment.N_list", "truncation index " + std::to_string(e.N_list[i]) + " outside [0, " +
                                      std::to_string(jmax + 1) + "]");
      if (i > 0 && e.N_list[i] <= e.N_list[i - 1]) fail("experiment.N_list", "must be strictly increasing");
    }
    if (e.name == "peakon" && !(kPeakonSpeed * c.solver.T < 0.5 * c.grid.L))
      fail("solver.T", "peakon crest must stay within L/2 of the origin: need (4/3) T < " + g17(0.5 * c.grid.L));
    if (uses_field && c.field.kind == "random" && !(32.0 < grid.dealias_cutoff()))
      fail("field.kind", "random fields need a dealias cutoff above 32");
  }

  for (std::size_t i = 0; i < e.t_list.size(); ++i)
    if (!(e.t_list[i] > 0.0) || (i > 0 && !(e.t_list[i] > e.t_list[i - 1]))) {
      fail("experiment.t_list", "times must be positive and strictly increasing");
      break;
    }
  if (e.name == "taylor" && e.t_list.size() < 4) fail("experiment.t_list", "taylor needs at least 4 times");
  for (double s : e.sigma_list)
    if (!std::isfinite(s)) fail("experiment.sigma_list", "sigma must be finite");
  if (e.pair_count < 1) fail("experiment.pair_count", "must be >= 1");
  for (double s : e.perturbation_scales)
    if (!(s > 0.0)) fail("experiment.perturbation_scales", "scales must be positive");
  if (!(e.t_eval >= 0.0)) fail("experiment.t_eval", "must be >= 0");
  if (e.snapshots < (e.name == "peakon" ? 3 : 2))
    fail("experiment.snapshots", std::string("must be >= ") + (e.name == "peakon" ? "3" : "2"));
  if (e.corpus_size < 2) fail("experiment.corpus_size", "must be >= 2");
  if (!(e.bound > 0.0)) fail("experiment.bound", "must be positive");

  if (!std::isfinite(c.norm.s)) fail("norm.s", "must be finite");
  if (!(c.norm.p == 2.0 || c.norm.p == kInf)) fail("norm.p", "p must be 2 or inf");
  if (!(c.norm.r == 1.0 || c.norm.r == kInf)) fail("norm.r", "r must be 1 or inf");
  if (c.output_dir.empty()) fail("output.dir", "must not be empty");
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument([&] {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

SolverConfig RunConfig::solver_config() const {
  SolverConfig s;
  s.dt = solver.dt;
  s.final_time = solver.T;
  s.cfl_safety = solver.cfl_safety;
  s.blowup_factor = solver.blowup_factor;
  s.blowup_threshold = solver.blowup_threshold;
  return s;
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : keys()) out.emplace_back(k.name, k.get(*this));
  return out;
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : echo()) out += k + " = " + v + "\n";
  return out;
}

RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides,
                       std::string_view experiment_name) {
  RunConfig cfg;
  std::vector<std::string> errors;
  std::string section;

  auto assign = [&](std::string_view key, std::string_view value, const std::string& where) {
    std::string full(key);
    if (full.find('.') == std::string::npos) {
      if (section.empty()) {
        errors.push_back(where + ": key '" + full + "' needs a [section] or a dotted name");
        return;
      }
      full = section + "." + full;
    }
    const Key* k = find_key(full);
    if (!k) {
      errors.push_back(where + ": unknown key '" + full + "'");
      return;
    }
    try {
      k->set(cfg, value);
    } catch (const std::exception& e) {
      errors.push_back(where + ": " + full + ": " + e.what());
    }
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        errors.push_back(where + ": malformed section header '" + std::string(line) + "'");
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      static const std::vector<std::string> sections{"grid", "solver", "field", "experiment", "norm", "output", "run"};
      if (!contains(sections, section)) {
        errors.push_back(where + ": unknown section [" + section + "]");
        section.clear();
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back(where + ": expected key = value, got '" + std::string(line) + "'");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) {
      errors.push_back(where + ": missing key before '='");
      continue;
    }
    assign(key, line.substr(eq + 1), where);
  }

  section.clear();
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || trim(std::string_view(o).substr(0, eq)).empty()) {
      errors.push_back("--set: expected key=value, got '" + o + "'");
      continue;
    }
    const auto key = trim(std::string_view(o).substr(0, eq));
    if (key.find('.') == std::string_view::npos) {
      errors.push_back("--set: override keys must be dotted, got '" + std::string(key) + "'");
      continue;
    }
    assign(key, std::string_view(o).substr(eq + 1), "--set");
  }

  if (!experiment_name.empty()) cfg.experiment.name = std::string(experiment_name);
  try {
    resolve_defaults(cfg);
  } catch (const std::exception& e) {
    errors.push_back(std::string("defaults: ") + e.what());
  }
  validate(cfg, errors);
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return cfg;
}

std::string describe_field(const RunConfig& cfg) {
  const auto& f = cfg.field;
  if (is_sequence_kind(f.kind) || f.kind == "phi") return f.kind + (f.kind == "phi" ? "" : "(n=" + std::to_string(f.n) + ")");
  if (f.kind == "constant") return "constant(" + g17(f.value) + ")";
  if (f.kind == "peakon-smoothed") return "peakon-smoothed(S_" + std::to_string(f.smoothing) + ")";
  if (f.kind == "random") return "random(seed=" + std::to_string(f.seed) + ")";
  return f.kind;
}

Field build_field(const RunConfig& cfg) {
  const GridSpec grid = cfg.grid_spec();
  const auto& f = cfg.field;
  if (f.kind == "zero") return Field(grid);
  if (f.kind == "constant") return Field::from_function(grid, [&](double) { return f.value; });
  if (f.kind == "peakon") return peakon_exact(0.0, grid, PeakonOrientation::stated);
  if (f.kind == "peakon-reflected") return peakon_exact(0.0, grid, PeakonOrientation::reflected);
  if (f.kind == "peakon-smoothed") return low_pass(*partition_for(grid), peakon_exact(0.0, grid), f.smoothing);
  if (f.kind == "phi") return make_phi_profile(grid);
  if (f.kind == "fn") return make_fn(f.n, grid);
  if (f.kind == "gn") return make_gn(f.n, grid);
  if (f.kind == "fn+gn") return make_fn(f.n, grid) + make_gn(f.n, grid);
  if (f.kind == "random") return random_band_limited(*partition_for(grid), f.seed, 0);
  throw UnsupportedParameter("unknown field kind '" + f.kind + "'");
}

// ---------------------------------------------------------------------------
// Command line

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError({"--config: cannot read '" + path + "'"});
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void add_trajectory(ExperimentReport& r, const Trajectory& traj, const std::string& label) {
  for (const auto& s : traj.snapshots) {
    r.measure(label, s.t, std::nullopt, "L2", s.l2);
    r.measure(label, s.t, std::nullopt, "B1_inf1", s.b1);
    r.measure(label, s.t, std::nullopt, "sup", lp_norm(s.u, kInf));
  }
}

SolverConfig snapshot_config(const RunConfig& cfg) {
  SolverConfig s = cfg.solver_config();
  const int count = cfg.experiment.snapshots;
  for (int i = 1; i < count; ++i) s.snapshot_times.push_back(s.final_time * i / (count - 1));
  return s;
}

void write_field_csv(const Field& u0, const Field& uT, double T, const std::filesystem::path& path) {
  std::ostringstream os;
  os << "# x, u(0,x), u(" << g17(T) << ",x)\n";
  for (std::size_t m = 0; m < u0.size(); ++m)
    os << g17(u0.grid().x(m)) << ',' << g17(u0[m]) << ',' << g17(uT[m]) << '\n';
  std::ofstream out(path, std::ios::trunc);
  if (!(out << os.str())) throw std::runtime_error("write failed for '" + path.string() + "'");
}

ExperimentReport run_solve(const RunConfig& cfg, const std::filesystem::path& dir) {
  const Field u0 = build_field(cfg);
  ExperimentReport r;
  r.experiment = "solve";
  r.param("u0", describe_field(cfg));
  const auto traj = solve(u0, cfg.solver.model, snapshot_config(cfg));
  add_trajectory(r, traj, std::string(to_string(cfg.solver.model)));
  r.param("resolved_dt", g17(traj.config.dt));
  r.param("resolved_blowup_threshold", g17(traj.config.blowup_threshold));
  r.param("steps", std::to_string(traj.steps));
  write_field_csv(u0, traj.back().u, traj.back().t, dir / "solve_field.csv");
  return r;
}

ExperimentReport run_besov(const RunConfig& cfg) {
  const Field f = build_field(cfg);
  const auto part = partition_for(f.grid());
  ExperimentReport r;
  r.experiment = "besov-norm";
  r.param("u0", describe_field(cfg));
  const auto norms = block_norms(*part, f, cfg.norm.p);
  for (std::size_t i = 0; i < norms.size(); ++i)
    r.measure("Delta_j", kNaN, static_cast<int>(i) - 1, "block_Lp_norm", norms[i]);
  const double value = besov_from_blocks(norms, cfg.norm.s, cfg.norm.r);
  const std::string label = "B^" + g17(cfg.norm.s) + "_{" + g17(cfg.norm.p) + "," + g17(cfg.norm.r) + "}";
  r.measure(label, kNaN, std::nullopt, "besov_norm", value);
  r.constants.push_back({label, value, "computed"});
  return r;
}

ExperimentReport run_decompose(const RunConfig& cfg) {
  const Field f = build_field(cfg);
  const auto part = partition_for(f.grid());
  ExperimentReport r;
  r.experiment = "decompose";
  r.param("u0", describe_field(cfg));
  r.param("j_max", std::to_string(part->j_max()));
  const BlockSpectrum blocks = decompose(*part, f);
  for (const auto& [j, b] : blocks.blocks) {
    r.measure("Delta_j", kNaN, j, "L2", lp_norm(b, 2.0));
    r.measure("Delta_j", kNaN, j, "Linf", lp_norm(b, kInf));
  }
  // Blocks never carry the unpaired Nyquist mode, so compare against f without it.
  std::vector<Complex> half(f.half_spectrum().begin(), f.half_spectrum().end());
  half.back() = 0.0;
  const Field target = Field::from_half_spectrum(f.grid(), std::move(half));
  const Field defect = blocks.sum() - target;
  double worst = 0.0;
  for (double v : defect.samples()) worst = std::max(worst, std::abs(v));
  const double scale = std::max(1.0, lp_norm(target, kInf));
  r.measure("sum_j Delta_j - f", kNaN, std::nullopt, "max_abs", worst);
  r.verdicts.push_back(Verdict::at_most("reconstruction from blocks", worst / scale, 1e-12,
                                        "partition of unity; relative to max(1, sup|f|)"));
  return r;
}

ExperimentReport run_experiment(const RunConfig& cfg) {
  const GridSpec grid = cfg.grid_spec();
  const auto part = partition_for(grid);
  const auto& e = cfg.experiment;
  const SolverConfig solver = cfg.solver_config();
  if (e.name == "peakon") return run_peakon(grid, solver, {cfg.solver.T, e.snapshots, true});
  if (e.name == "conservation") return run_conservation(build_field(cfg), solver, describe_field(cfg), e.snapshots);
  if (e.name == "taylor") return run_taylor(build_field(cfg), e.t_list, solver, describe_field(cfg));
  if (e.name == "nonuniform") return run_nonuniform(*part, solver, {e.n_range, e.t_list, std::nullopt});
  if (e.name == "continuity")
    return run_continuity(*part, build_field(cfg), e.N_list, e.t_eval, solver, describe_field(cfg));
  if (e.name == "lipschitz")
    return run_lipschitz_linf(*part, solver, {e.pair_count, e.perturbation_scales, e.t_eval, e.seed});
  if (e.name == "lemma41") return run_lemma41_scalings(*part, {e.n_range, e.sigma_list});
  if (e.name == "ch-contrast") return run_ch_contrast(*part, cfg.field.n, e.t_list, solver);
  if (e.name == "inequality")
    return run_inequality_probes(*part, {e.corpus_size, e.seed, cfg.norm.s, e.bound});
  throw UnsupportedParameter("unknown experiment '" + e.name + "'");
}

void print_summary(const ExperimentReport& r, std::ostream& out) {
  for (const auto& c : r.constants) out << "  constant " << c.name << " = " << g17(c.value) << "\n";
  for (const auto& v : r.verdicts)
    out << "  " << (v.passed ? "PASS " : "FAIL ") << v.name << ": " << g17(v.measured) << " " << v.describe_bound()
        << "\n";
  for (const auto& n : r.notes) out << "  note: " << n << "\n";
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fornberg-Whitham numerical lab: spectral solver, Littlewood-Paley/Besov norms and experiments", "fwlab"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> sets;
  int threads = -1;
  app.add_option("--config", config_path, "config file (key = value lines, [section] headers)");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--set", sets, "override one key, e.g. --set grid.N=4096 (repeatable)")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--threads", threads, "worker threads for experiments (0 = all cores)");

  app.add_subcommand("solve", "integrate the configured field and write snapshot diagnostics");
  app.add_subcommand("besov-norm", "Besov norm B^s_{p,r} of the configured field");
  app.add_subcommand("decompose", "dyadic block norms of the configured field");
  auto* exp = app.add_subcommand("experiment", "run a named experiment");
  exp->require_subcommand(1);
  for (const auto& name : kExperiments) exp->add_subcommand(name, "experiment " + name);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "fwlab: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  std::string name;
  for (auto* sub : app.get_subcommands()) {
    name = sub->get_name();
    if (sub == exp) name = exp->get_subcommands().front()->get_name();
  }

  RunConfig cfg;
  try {
    std::vector<std::string> overrides = sets;
    if (!out_dir.empty()) overrides.push_back("output.dir=" + out_dir);
    if (threads >= 0) overrides.push_back("run.threads=" + std::to_string(threads));
    cfg = parse_config(config_path.empty() ? std::string() : read_file(config_path), overrides, name);
  } catch (const ConfigError& e) {
    err << "fwlab: " << e.what() << "\n";
    return kExitUsage;
  }
  set_experiment_threads(cfg.threads);

  const std::filesystem::path dir(cfg.output_dir);
  auto persist = [&](const ExperimentReport& report) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    ReportRecord rec{kReportSchema, cfg.echo(), report};
    write_csv(rec, dir / (name + ".csv"));
    write_json(rec, dir / (name + ".json"));
    out << name << ": " << (report.passed() ? "PASS" : "FAIL") << " -> " << (dir / (name + ".csv")).string() << ", "
        << (dir / (name + ".json")).string() << "\n";
    print_summary(report, out);
  };

  try {
    ExperimentReport report;
    if (name == "solve") {
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      report = run_solve(cfg, dir);
    } else if (name == "besov-norm") {
      report = run_besov(cfg);
    } else if (name == "decompose") {
      report = run_decompose(cfg);
    } else {
      report = run_experiment(cfg);
    }
    persist(report);
    return report.passed() ? kExitPass : kExitVerdictFail;
  } catch (const BlowUpError& e) {
    err << "fwlab: " << e.what() << "\n";
    try {
      ExperimentReport partial;
      partial.experiment = name;
      add_trajectory(partial, e.partial(), std::string(to_string(e.partial().model)));
      partial.notes.push_back(e.what());
      persist(partial);
    } catch (const std::exception& io) {
      err << "fwlab: " << io.what() << "\n";
    }
    return kExitBlowUp;
  } catch (const std::exception& e) {
    err << "fwlab: " << e.what() << "\n";
    return kExitUsage;
  }
}

int run_command(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(args, std::cout, std::cerr);
}

}  // namespace fwlab
