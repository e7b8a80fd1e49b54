#include "twistshock/cli.hpp"

#include "twistshock/characteristics.hpp"
#include "twistshock/estimator.hpp"
#include "twistshock/parallel.hpp"
#include "twistshock/solver.hpp"
#include "twistshock/verification.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <list>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistshock::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

/// Invalid configuration; `key` names the offending parameter.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& msg)
      : std::runtime_error(key + ": " + msg), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class NumericalFailure : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw ConfigError(key, msg);
}

// ---------------------------------------------------------------------------
// Parameters

enum class Kind { Real, Int, Text };

struct Param {
  std::string key;  // lower_snake_case, also the JSON key
  Kind kind = Kind::Real;
  double real = 0.0;
  long long integer = 0;
  std::string text;
  std::string help;
  CLI::Option* option = nullptr;

  std::string flag() const {
    std::string f = "--" + key;
    for (auto& c : f) c = c == '_' ? '-' : c;
    return f;
  }
};

class Params {
 public:
  Param& add_real(const std::string& key, double def, std::string help) {
    auto& p = add(key, Kind::Real);
    p.real = def;
    p.help = std::move(help);
    return p;
  }
  Param& add_int(const std::string& key, long long def, std::string help) {
    auto& p = add(key, Kind::Int);
    p.integer = def;
    p.help = std::move(help);
    return p;
  }
  Param& add_text(const std::string& key, std::string def, std::string help) {
    auto& p = add(key, Kind::Text);
    p.text = std::move(def);
    p.help = std::move(help);
    return p;
  }

  void bind(CLI::App& app) {
    for (auto& p : items_) {
      switch (p.kind) {
        case Kind::Real: p.option = app.add_option(p.flag(), p.real, p.help); break;
        case Kind::Int: p.option = app.add_option(p.flag(), p.integer, p.help); break;
        case Kind::Text: p.option = app.add_option(p.flag(), p.text, p.help); break;
      }
      p.option->capture_default_str();
    }
  }

  bool has(const std::string& key) const { return find(key) != nullptr; }

  /// Fills parameters not given on the command line from the config object.
  void merge(const json& cfg) {
    for (auto& p : items_) {
      if (p.option && p.option->count() > 0) continue;
      const auto it = cfg.find(p.key);
      if (it == cfg.end()) continue;
      switch (p.kind) {
        case Kind::Real:
          require(it->is_number(), p.key, "expected a number in config");
          p.real = it->get<double>();
          break;
        case Kind::Int:
          require(it->is_number_integer(), p.key, "expected an integer in config");
          p.integer = it->get<long long>();
          break;
        case Kind::Text:
          if (it->is_array()) {
            // Origins may be given as a JSON array of numbers.
            std::string joined;
            for (const auto& v : *it) {
              require(v.is_number(), p.key, "expected an array of numbers in config");
              char buf[40];
              std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
              joined += (joined.empty() ? "" : ",") + std::string(buf);
            }
            p.text = joined;
          } else {
            require(it->is_string(), p.key, "expected a string in config");
            p.text = it->get<std::string>();
          }
          break;
      }
    }
  }

  double real(const std::string& key) const { return get(key).real; }
  long long integer(const std::string& key) const { return get(key).integer; }
  const std::string& text(const std::string& key) const { return get(key).text; }

  void write(json& out) const {
    for (const auto& p : items_) {
      switch (p.kind) {
        case Kind::Real: out[p.key] = p.real; break;
        case Kind::Int: out[p.key] = p.integer; break;
        case Kind::Text: out[p.key] = p.text; break;
      }
    }
  }

 private:
  Param& add(const std::string& key, Kind kind) {
    auto& p = items_.emplace_back();
    p.key = key;
    p.kind = kind;
    return p;
  }
  const Param* find(const std::string& key) const {
    for (const auto& p : items_) {
      if (p.key == key) return &p;
    }
    return nullptr;
  }
  const Param& get(const std::string& key) const {
    const auto* p = find(key);
    if (!p) throw std::logic_error("unknown parameter " + key);
    return *p;
  }

  std::list<Param> items_;  // stable addresses for CLI11 bindings
};

// ---------------------------------------------------------------------------
// Output

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);  // no "-0"
  return buf;
}
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

/// 9 significant digits, null for non-finite values.
json jnum(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(num(v));
}
json jnum(const std::optional<double>& v) { return v ? jnum(*v) : json(nullptr); }

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) { row(header); }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) buf_ << ',';
      buf_ << cells[i];
    }
    buf_ << '\n';
  }
  std::string str() const { return buf_.str(); }

 private:
  std::ostringstream buf_;
};

class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    require(!ec && fs::is_directory(dir_), "output_dir",
            "cannot create directory '" + dir_.string() + "'");
  }

  void write(const std::string& name, const std::string& content) const {
    const auto path = dir_ / name;
    std::ofstream f(path, std::ios::binary);
    f << content;
    f.close();
    require(static_cast<bool>(f), "output_dir", "cannot write '" + path.string() + "'");
  }
  void write(const std::string& name, const json& j) const { write(name, j.dump(2) + "\n"); }

 private:
  fs::path dir_;
};

// ---------------------------------------------------------------------------
// Shared parameter groups

void add_kink(Params& p) {
  p.add_real("kappa", M_PI / 4, "kink amplitude (radians), > 0");
  p.add_real("zeta", 0.5, "kink width, > 0");
}

KinkProfile make_kink(const Params& p) {
  require(std::isfinite(p.real("kappa")) && p.real("kappa") > 0, "kappa", "must be > 0");
  require(std::isfinite(p.real("zeta")) && p.real("zeta") > 0, "zeta", "must be > 0");
  return KinkProfile(p.real("kappa"), p.real("zeta"));
}

void add_alpha_grid(Params& p) {
  p.add_real("alpha_min", 1e-3, "smallest forward origin (log spacing when > 0)");
  p.add_real("alpha_max", 0.0, "largest forward origin; 0 picks it from the profile tail");
  p.add_int("alpha_steps", 400, "number of origins");
  p.add_real("t_scan_max", 200.0, "root scan horizon");
}

std::vector<double> make_alpha_grid(const Profile& prof, const Params& p) {
  const double lo = p.real("alpha_min"), hi = p.real("alpha_max");
  const long long n = p.integer("alpha_steps");
  require(n >= 2 && n <= 1000000, "alpha_steps", "must be in [2, 1e6]");
  require(std::isfinite(lo), "alpha_min", "must be finite");
  require(std::isfinite(hi) && hi >= 0, "alpha_max", "must be >= 0");
  require(std::isfinite(p.real("t_scan_max")) && p.real("t_scan_max") > 0, "t_scan_max",
          "must be > 0");
  if (hi == 0.0) {
    require(lo > 0, "alpha_min", "must be > 0 when alpha_max is chosen automatically");
    return default_alpha_grid(prof, static_cast<int>(n), lo, 0.0);
  }
  require(hi > lo, "alpha_max", "must exceed alpha_min");
  return make_origin_grid(lo, hi, static_cast<int>(n));
}

EstimateOptions estimate_options(const Params& p, int threads) {
  EstimateOptions o;
  o.scan.t_scan_max = p.real("t_scan_max");
  o.threads = threads;
  return o;
}

void add_simulation(Params& p, double t_end) {
  add_kink(p);
  p.add_real("lambda", 0.18, "damping, >= 0");
  p.add_real("xmax", 0.0, "domain half-width; 0 derives it from the causal reach");
  p.add_int("nx", 0, "grid nodes; 0 gives spacing 0.02");
  p.add_real("cfl", 0.5, "time step as a fraction of dx / delta");
  p.add_real("t_end", t_end, "final time");
  p.add_real("blow_k", 0.1, "shock when max |r_x| > blow_k / dx");
  p.add_real("tail_tolerance", 1e-3, "far-field slope tolerance for the domain size");
}

struct SimSetup {
  KinkProfile profile;
  Damping damping;
  Grid1D grid;
  SimulationConfig cfg;
};

/// Profile, grid and run settings for a simulation to `t_end`, which sizes
/// the domain when xmax is 0.
SimSetup make_simulation(const Params& p, double t_end) {
  const auto prof = make_kink(p);
  const double lambda = p.real("lambda");
  require(std::isfinite(lambda) && lambda >= 0, "lambda", "must be >= 0");
  SimulationConfig cfg;
  cfg.cfl = p.real("cfl");
  require(std::isfinite(cfg.cfl) && cfg.cfl > 0 && cfg.cfl <= 1, "cfl", "must be in (0, 1]");
  cfg.t_end = t_end;
  cfg.blow_k = p.real("blow_k");
  require(std::isfinite(cfg.blow_k) && cfg.blow_k > 0, "blow_k", "must be > 0");
  cfg.tail_tolerance = p.real("tail_tolerance");
  require(cfg.tail_tolerance > 0 && cfg.tail_tolerance < 1, "tail_tolerance", "must be in (0, 1)");

  const double need = required_half_width(prof, {cfg.t_end, cfg.tail_tolerance});
  double X = p.real("xmax");
  require(std::isfinite(X) && X >= 0, "xmax", "must be >= 0");
  if (X == 0.0) X = need + 0.5;
  require(X >= need, "xmax",
          "boundary reaches the core before t_end; need at least " + num(need));
  const long long nx = p.integer("nx");
  require(nx == 0 || (nx >= 16 && nx <= 10000000), "nx", "must be 0 or in [16, 1e7]");
  const Grid1D grid = nx == 0 ? Grid1D::symmetric(X, 0.02) : Grid1D::make(-X, X, static_cast<int>(nx));
  return {prof, Damping(lambda), grid, cfg};
}

SimulationResult run_simulation(const SimSetup& s, const Grid1D& grid, const SimulationConfig& cfg) {
  auto res = simulate(s.profile, s.damping, grid, cfg);
  if (res.numerical_failure) {
    throw NumericalFailure("non-finite values without a detected shock at t = " +
                           num(res.final_state.t) + " (nx = " + std::to_string(grid.n) + ")");
  }
  return res;
}

// ---------------------------------------------------------------------------
// Commands

struct Context {
  const Params& params;
  const OutputDir& out;
  int threads;
  std::ostream& log;
};

int cmd_kernels(const Context& c) {
  const auto& p = c.params;
  const double lo = p.real("eta_min"), hi = p.real("eta_max");
  const long long n = p.integer("eta_steps");
  require(std::isfinite(lo), "eta_min", "must be finite");
  require(std::isfinite(hi) && hi > lo, "eta_max", "must exceed eta_min");
  require(n >= 2 && n <= 10000000, "eta_steps", "must be in [2, 1e7]");

  std::vector<std::array<double, 5>> rows(static_cast<std::size_t>(n));
  parallel_for(rows.size(), c.threads, [&](std::size_t i) {
    const double eta = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    rows[i] = {eta, u1_of_eta(eta), k_of_eta(eta), f_of_eta(eta), selection_weight_H(eta)};
  });
  CsvWriter csv({"eta", "u1", "k", "f", "H"});
  for (const auto& r : rows) csv.row({num(r[0]), num(r[1]), num(r[2]), num(r[3]), num(r[4])});
  c.out.write("kernels.csv", csv.str());

  const auto ext = f_extremum();
  c.out.write("kernels.json", json{{"eta0", jnum(ext.eta0)}, {"f0", jnum(ext.f0)},
                                   {"k_at_zero", jnum(k_of_eta(0.0))}});
  c.log << "kernels: " << n << " rows, |f| peaks at eta0 = " << num(ext.eta0) << "\n";
  return kOk;
}

int cmd_profile(const Context& c) {
  const auto& p = c.params;
  const auto prof = make_kink(p);
  const double lo = p.real("x_min"), hi = p.real("x_max");
  const long long n = p.integer("x_steps");
  require(std::isfinite(lo), "x_min", "must be finite");
  require(std::isfinite(hi) && hi > lo, "x_max", "must exceed x_min");
  require(n >= 2 && n <= 10000000, "x_steps", "must be in [2, 1e7]");
  const double origin = p.real("origin");
  require(std::isfinite(origin), "origin", "must be finite");

  CsvWriter csv({"x", "w0", "w0p", "r0", "r0p"});
  for (long long i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    csv.row({num(x), num(prof.w0(x)), num(prof.w0_prime(x)), num(prof.r0(x)), num(prof.r0_prime(x))});
  }
  c.out.write("profile.csv", csv.str());

  const auto fwd = check_admissible(prof, origin, Family::Forward);
  const auto bwd = check_admissible(prof, origin, Family::Backward);
  c.out.write("profile.json",
              json{{"kappa", jnum(prof.kappa())},
                   {"zeta", jnum(prof.zeta())},
                   {"sup_norm_r0", jnum(prof.sup_norm_r0())},
                   {"delta", jnum(delta_bound(prof))},
                   {"origin", jnum(origin)},
                   {"admissible_forward", fwd.admissible},
                   {"admissible_backward", bwd.admissible},
                   {"admissibility_path", std::string(to_string(fwd.path))}});
  c.log << "profile: delta = " << num(delta_bound(prof)) << ", origin " << num(origin)
        << " forward-admissible: " << (fwd.admissible ? "yes" : "no") << " ("
        << to_string(fwd.path) << ")\n";
  return kOk;
}

void append_origins(CsvWriter& csv, const FamilyEstimate& fam) {
  for (const auto& r : fam.per_origin) {
    csv.row({num(r.origin), num(r.t_c), num(r.selection_residual_at_tc),
             std::string(to_string(r.status))});
  }
}

int cmd_estimate(const Context& c) {
  const auto& p = c.params;
  const auto prof = make_kink(p);
  const double lambda = p.real("lambda");
  require(std::isfinite(lambda), "lambda", "must be finite");
  require(lambda > 0, "lambda",
          "must be > 0 for estimate; the lambda -> 0 limit is the inviscid closed form, "
          "available through `sweep --lambda-min 0`");
  const auto grid = make_alpha_grid(prof, p);
  const auto e = CriticalTimeEstimator(prof, Damping(lambda)).estimate(grid, estimate_options(p, c.threads));

  CsvWriter csv({"alpha", "t_c", "selection_residual", "status"});
  append_origins(csv, e.forward);
  if (e.backward) append_origins(csv, *e.backward);
  c.out.write("estimate.csv", csv.str());
  c.out.write("estimate.json", json{{"lambda", jnum(lambda)},
                                    {"t_hat_c", jnum(e.t_hat_c)},
                                    {"alpha_star", jnum(e.alpha_star)},
                                    {"family", std::string(to_string(e.family))},
                                    {"accepted", e.accepted},
                                    {"t_c_final", jnum(e.t_c_final)},
                                    {"selection_residual", jnum(e.selection_residual)},
                                    {"note", e.note}});
  c.log << "estimate: t_hat_c = " << num(e.t_hat_c) << " at alpha = " << num(e.alpha_star)
        << ", accepted: " << (e.accepted ? "true" : "false") << "\n";
  return kOk;
}

int cmd_sweep(const Context& c) {
  const auto& p = c.params;
  const auto prof = make_kink(p);
  const double lo = p.real("lambda_min"), hi = p.real("lambda_max");
  const long long n = p.integer("lambda_steps");
  require(std::isfinite(lo) && lo >= 0, "lambda_min", "must be >= 0");
  require(std::isfinite(hi) && hi > lo, "lambda_max", "must exceed lambda_min");
  require(n >= 2 && n <= 100000, "lambda_steps", "must be in [2, 1e5]");
  const auto grid = make_alpha_grid(prof, p);
  const auto opts = estimate_options(p, 1);

  std::vector<LambdaEstimate> rows(static_cast<std::size_t>(n));
  parallel_for(rows.size(), c.threads, [&](std::size_t i) {
    const double lambda = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    rows[i] = CriticalTimeEstimator(prof, Damping(lambda)).estimate(grid, opts);
  });

  CsvWriter csv({"lambda", "t_hat_c", "alpha_star", "selection_residual", "accepted"});
  std::optional<double> last_accepted;
  bool contiguous = true;
  for (const auto& e : rows) {
    csv.row({num(e.lambda), num(e.t_hat_c), num(e.alpha_star), num(e.selection_residual),
             e.accepted ? "true" : "false"});
    if (!e.accepted) contiguous = false;
    if (e.accepted && contiguous) last_accepted = e.lambda;
  }
  c.out.write("sweep.csv", csv.str());
  c.out.write("sweep.json", json{{"lambda_min", jnum(lo)},
                                 {"lambda_max", jnum(hi)},
                                 {"lambda_steps", n},
                                 {"last_accepted_lambda", jnum(last_accepted)}});
  c.log << "sweep: " << n << " values, accepted up to lambda = "
        << (last_accepted ? num(*last_accepted) : std::string("none")) << "\n";
  return kOk;
}

int cmd_simulate(const Context& c) {
  const auto& p = c.params;
  require(std::isfinite(p.real("t_end")) && p.real("t_end") > 0, "t_end", "must be > 0");
  auto setup = make_simulation(p, p.real("t_end"));
  const long long snap = p.integer("snap_every");
  const long long diag = p.integer("diag_every");
  const long long levels = p.integer("refinements");
  require(snap >= 0 && snap <= 1000000000, "snap_every", "must be >= 0");
  require(diag >= 1 && diag <= 1000000000, "diag_every", "must be >= 1");
  require(levels >= 2 && levels <= 6, "refinements", "must be in [2, 6]");

  // Halving dx keeps every coarse node on the finer grids.
  std::vector<Grid1D> grids;
  for (long long k = 0; k < levels; ++k) {
    grids.push_back(Grid1D::make(setup.grid.x_min, setup.grid.x_max,
                                 static_cast<int>((setup.grid.n - 1) * (1LL << k) + 1)));
  }
  std::vector<std::optional<SimulationResult>> results(grids.size());
  std::vector<std::string> failures(grids.size());
  parallel_for(grids.size(), c.threads, [&](std::size_t i) {
    auto cfg = setup.cfg;
    if (i == 0) {
      cfg.snap_every = static_cast<int>(snap);
      cfg.diag_every = static_cast<int>(diag);
    } else {
      cfg.diag_every = 1 << 30;
    }
    try {
      results[i] = run_simulation(setup, grids[i], cfg);
    } catch (const NumericalFailure& e) {
      failures[i] = e.what();
    }
  });
  for (const auto& f : failures) {
    if (!f.empty()) throw NumericalFailure(f);
  }

  const auto& base = *results[0];
  CsvWriter snaps({"t", "x", "w", "wx", "wxx", "r", "l"});
  std::vector<double> wx, wxx;
  for (const auto& s : base.snapshots) {
    spatial_derivatives(s, wx, wxx);
    const auto rl = riemann_fields(s);
    for (int i = 0; i < s.grid.n; ++i) {
      snaps.row({num(s.t), num(s.grid.x(i)), num(s.w[i]), num(wx[i]), num(wxx[i]), num(rl.r[i]),
                 num(rl.l[i])});
    }
  }
  c.out.write("snapshots.csv", snaps.str());

  CsvWriter diags({"t", "E", "M", "max_wx", "max_wxx", "boundary_err"});
  for (const auto& d : base.diagnostics) {
    diags.row({num(d.t), num(d.E), num(d.M), num(d.max_abs_wx), num(d.max_abs_wxx),
               num(d.boundary_slope_error)});
  }
  c.out.write("diagnostics.csv", diags.str());

  std::vector<GridShock> shocks;
  for (const auto& r : results) shocks.push_back(r->shock);
  const auto rep = detect_shock(shocks, setup.cfg.blow_k, setup.cfg.t_end);
  json nx = json::array(), dx = json::array(), ts = json::array();
  for (const auto& g : rep.grids_used) {
    nx.push_back(g.n);
    dx.push_back(jnum(g.dx));
    ts.push_back(jnum(g.t_star));
  }
  json xs = json::array(), xw = json::array();
  for (double x : rep.x_star_positions) xs.push_back(jnum(x));
  for (double x : base.shock.x_star_wxx) xw.push_back(jnum(x));
  c.out.write("shock.json", json{{"detected", rep.detected},
                                 {"t_star", jnum(rep.t_star)},
                                 {"x_star_positions", xs},
                                 {"x_star_wxx", xw},
                                 {"criterion", rep.criterion},
                                 {"richardson_t_star", jnum(rep.richardson_t_star)},
                                 {"observed_order", jnum(rep.observed_order)},
                                 {"confirmed", rep.confirmed},
                                 {"horizon", jnum(rep.horizon)},
                                 {"grid_nx", nx},
                                 {"grid_dx", dx},
                                 {"grid_t_star", ts},
                                 {"max_wx_initial", jnum(base.shock.max_wx_initial)},
                                 {"max_wx_at_shock", jnum(base.shock.max_wx_at_shock)},
                                 {"dt", jnum(base.dt)}});
  c.log << "simulate: " << (rep.detected ? "shock at t_star = " + num(rep.t_star) : "no shock")
        << " over " << grids.size() << " grids (base nx = " << setup.grid.n << ")\n";
  return kOk;
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = NAN;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    require(used > 0 && used == item.size() && std::isfinite(v), key,
            "'" + item + "' is not a number");
    out.push_back(v);
  }
  require(!out.empty(), key, "needs at least one value");
  return out;
}

int cmd_characteristics(const Context& c) {
  const auto& p = c.params;
  // t_end = 0 traces up to 0.95 t_star of a run that stops at the shock.
  const double t_end = p.real("t_end");
  require(std::isfinite(t_end) && t_end >= 0, "t_end", "must be >= 0");
  const double horizon = p.real("horizon");
  require(std::isfinite(horizon) && horizon > 0, "horizon", "must be > 0");
  const bool to_shock = t_end == 0.0;
  auto setup = make_simulation(p, to_shock ? horizon : t_end);
  setup.cfg.stop_at_shock = to_shock;
  setup.cfg.record_history = true;
  setup.cfg.diag_every = 1 << 30;

  const std::string& fam = p.text("family");
  require(fam == "forward" || fam == "backward" || fam == "both", "family",
          "must be forward, backward or both");
  const auto origins = parse_list(p.text("origins"), "origins");
  for (double o : origins) {
    if (fam != "backward") {
      require(admissible_forward(setup.profile, o), "origins",
              num(o) + " is not an admissible forward origin");
    }
    if (fam != "forward") {
      require(admissible_backward(setup.profile, -o), "origins",
              num(-o) + " (mirror of " + num(o) + ") is not an admissible backward origin");
    }
  }

  const auto sim = run_simulation(setup, setup.grid, setup.cfg);
  const auto& h = *sim.history;
  const double t_star = sim.shock.t_star.value_or(INFINITY);
  const double t_last = h.frames.back().t;
  const double t_trace = to_shock ? std::min(0.95 * t_star, t_last) : t_last;
  const double t_cut = std::min(t_trace, 0.95 * t_star);

  CsvWriter csv({"family", "origin", "t", "x", "eta", "pq", "c", "phi"});
  json rep_origin = json::array(), env = json::array(), sign = json::array(),
       intq = json::array(), conf = json::array(), mono = json::array(), margin = json::array(),
       c_pos = json::array(), p_phi = json::array(), blow = json::array(), exit = json::array();

  std::vector<std::pair<Family, double>> jobs;
  for (double o : origins) {
    if (fam != "backward") jobs.emplace_back(Family::Forward, o);
    if (fam != "forward") jobs.emplace_back(Family::Backward, -o);
  }
  std::vector<CharTrace> traces(jobs.size());
  std::vector<std::optional<EnvelopeReport>> envs(jobs.size());
  std::vector<std::optional<PhiBound>> phis(jobs.size());
  parallel_for(jobs.size(), c.threads, [&](std::size_t i) {
    traces[i] = trace(h, jobs[i].first, jobs[i].second, t_trace);
    compression_ratio(traces[i], setup.profile, setup.damping);
    if (jobs[i].first == Family::Forward) {
      if (traces[i].samples.front().pq < 0) phis[i] = phi_lower_bound(traces[i], setup.damping);
      envs[i] = check_envelopes(h, traces[i], setup.profile, setup.damping, t_cut);
    }
  });

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& tr = traces[i];
    const std::string name(to_string(tr.family));
    for (const auto& s : tr.samples) {
      csv.row({name, num(tr.origin), num(s.t), num(s.x), num(s.eta), num(s.pq), num(s.c),
               std::isfinite(s.phi) && phis[i] ? num(s.phi) : std::string()});
    }
    if (!envs[i]) continue;
    const auto& e = *envs[i];
    bool c_ok = true, phi_ok = true;
    for (const auto& s : tr.samples) {
      if (s.t > t_cut) break;
      c_ok = c_ok && s.c > 0;
      if (phis[i] && std::isfinite(s.phi)) phi_ok = phi_ok && s.pq_ode <= s.phi;
    }
    rep_origin.push_back(jnum(tr.origin));
    env.push_back(e.envelope.pass);
    sign.push_back(e.sign.pass);
    intq.push_back(e.integral_q.pass);
    conf.push_back(e.beta_confined.pass);
    mono.push_back(e.beta_monotone.pass);
    margin.push_back(jnum(e.envelope.worst_margin));
    c_pos.push_back(c_ok);
    p_phi.push_back(phis[i] ? json(phi_ok) : json(nullptr));
    blow.push_back(phis[i] ? jnum(phis[i]->blowup_time) : json(nullptr));
    exit.push_back(jnum(tr.exit_time));
  }
  c.out.write("characteristics.csv", csv.str());
  c.out.write("characteristics.json", json{{"t_star", jnum(t_star)},
                                           {"t_cut", jnum(t_cut)},
                                           {"t_trace", jnum(t_trace)},
                                           {"origin", rep_origin},
                                           {"envelope_pass", env},
                                           {"sign_pass", sign},
                                           {"integral_q_pass", intq},
                                           {"beta_confined_pass", conf},
                                           {"beta_monotone_pass", mono},
                                           {"envelope_worst_margin", margin},
                                           {"c_positive", c_pos},
                                           {"p_le_phi", p_phi},
                                           {"phi_blowup_time", blow},
                                           {"exit_time", exit}});
  c.log << "characteristics: " << jobs.size() << " curves traced to t = " << num(t_trace)
        << ", lemma checks to t = " << num(t_cut) << "\n";
  return kOk;
}

int cmd_verify(const Context& c) {
  VerifyOptions opts;
  opts.threads = c.threads;
  const auto& only = c.params.text("criteria");
  if (!only.empty()) {
    for (double item : parse_list(only, "criteria")) {
      const int id = static_cast<int>(item);
      require(item == id && id >= 1 && id <= 9, "criteria", "ids must be integers in [1, 9]");
      opts.only.push_back(id);
    }
  }
  json ids = json::array(), titles = json::array(), pass = json::array(), details = json::array();
  int failed = 0;
  run_acceptance(opts, [&](const CriterionResult& r) {
    c.log << format_result(r) << "\n" << std::flush;
    ids.push_back(r.id);
    titles.push_back(r.title);
    pass.push_back(r.pass);
    details.push_back(r.detail);
    failed += r.pass ? 0 : 1;
  });
  c.out.write("verify.json", json{{"id", ids},
                                  {"title", titles},
                                  {"pass", pass},
                                  {"detail", details},
                                  {"failed", failed}});
  c.log << failed << " criteria failed\n";
  return failed == 0 ? kOk : kChecksFailed;
}

// ---------------------------------------------------------------------------

struct Command {
  std::string name;
  std::string help;
  int (*run)(const Context&);
  Params params;
  CLI::App* app = nullptr;
};

std::vector<std::unique_ptr<Command>> make_commands() {
  std::vector<std::unique_ptr<Command>> cmds;
  auto add = [&](std::string name, std::string help, int (*fn)(const Context&)) -> Params& {
    cmds.push_back(std::make_unique<Command>(Command{std::move(name), std::move(help), fn, {}}));
    return cmds.back()->params;
  };

  auto& k = add("kernels", "tabulate eta, u1, k, f, H", cmd_kernels);
  k.add_real("eta_min", -6.0, "first eta");
  k.add_real("eta_max", 6.0, "last eta");
  k.add_int("eta_steps", 241, "number of samples");

  auto& pr = add("profile", "tabulate the kink and its Riemann data", cmd_profile);
  add_kink(pr);
  pr.add_real("x_min", -10.0, "first x");
  pr.add_real("x_max", 10.0, "last x");
  pr.add_int("x_steps", 401, "number of samples");
  pr.add_real("origin", 0.21, "origin whose admissibility is reported");

  auto& e = add("estimate", "pre-critical time estimate for one damping value", cmd_estimate);
  add_kink(e);
  e.add_real("lambda", 0.18, "damping, > 0");
  add_alpha_grid(e);

  auto& sw = add("sweep", "estimate over a range of damping values", cmd_sweep);
  add_kink(sw);
  sw.add_real("lambda_min", 0.0, "first damping value (0 uses the inviscid closed form)");
  sw.add_real("lambda_max", 0.25, "last damping value");
  sw.add_int("lambda_steps", 26, "number of damping values");
  add_alpha_grid(sw);

  auto& si = add("simulate", "direct simulation with shock detection on refined grids", cmd_simulate);
  add_simulation(si, 6.0);
  si.add_int("snap_every", 200, "snapshot cadence in steps on the base grid; 0 disables");
  si.add_int("diag_every", 10, "diagnostics cadence in steps on the base grid");
  si.add_int("refinements", 3, "grids in the refinement study, dx halving each time");

  auto& ch = add("characteristics", "trace characteristics and check the pre-breakdown lemmas",
                 cmd_characteristics);
  add_simulation(ch, 0.0);
  ch.add_real("horizon", 6.0, "simulation horizon when t_end is 0");
  ch.add_text("family", "forward", "forward, backward or both");
  ch.add_text("origins", "0.21", "comma-separated forward origins (backward curves use -origin)");

  auto& v = add("verify", "run the acceptance criteria", cmd_verify);
  v.add_text("criteria", "", "comma-separated criterion ids; empty runs all");
  return cmds;
}

json load_config(const std::string& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), "config", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  require(j.is_object(), "config", "top level must be an object");
  return j;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shock formation in damped twist waves"};
  app.fallthrough();
  app.require_subcommand(0, 1);
  std::string output_dir = ".";
  std::string config_path;
  long long threads = 1;
  auto* o_dir = app.add_option("--output-dir", output_dir, "directory for all artifacts");
  app.add_option("--config", config_path, "JSON file with parameter defaults");
  auto* o_threads = app.add_option("--threads", threads, "worker threads");

  auto cmds = make_commands();
  for (auto& c : cmds) {
    c->app = app.add_subcommand(c->name, c->help);
    c->params.bind(*c->app);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kOk : kInvalidConfig;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kOk : kInvalidConfig;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidConfig;
  }

  try {
    json cfg = config_path.empty() ? json::object() : load_config(config_path);

    Command* cmd = nullptr;
    for (auto& c : cmds) {
      if (c->app->parsed()) cmd = c.get();
    }
    if (const auto it = cfg.find("command"); it != cfg.end()) {
      require(it->is_string(), "command", "expected a string in config");
      const auto name = it->get<std::string>();
      if (cmd == nullptr) {
        for (auto& c : cmds) {
          if (c->name == name) cmd = c.get();
        }
        require(cmd != nullptr, "command", "unknown command '" + name + "'");
      }
      require(cmd->name == name, "command",
              "config is for '" + name + "' but '" + cmd->name + "' was requested");
    }
    if (cmd == nullptr) {
      err << app.help();
      return kInvalidConfig;
    }

    for (const auto& [key, value] : cfg.items()) {
      const bool global = key == "command" || key == "output_dir" || key == "threads";
      require(global || cmd->params.has(key), key, "unknown parameter for '" + cmd->name + "'");
    }
    if (o_dir->count() == 0 && cfg.contains("output_dir")) {
      require(cfg["output_dir"].is_string(), "output_dir", "expected a string in config");
      output_dir = cfg["output_dir"].get<std::string>();
    }
    if (o_threads->count() == 0 && cfg.contains("threads")) {
      require(cfg["threads"].is_number_integer(), "threads", "expected an integer in config");
      threads = cfg["threads"].get<long long>();
    }
    require(threads >= 1 && threads <= 1024, "threads", "must be in [1, 1024]");
    cmd->params.merge(cfg);

    const OutputDir dir(output_dir);
    json resolved{{"command", cmd->name}, {"output_dir", output_dir}, {"threads", threads}};
    cmd->params.write(resolved);
    dir.write("resolved_config.json", resolved);
    return cmd->run({cmd->params, dir, static_cast<int>(threads), out});
  } catch (const ConfigError& e) {
    err << "invalid config: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const CausalityError& e) {
    err << "invalid config: xmax: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid config: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace twistshock::cli
