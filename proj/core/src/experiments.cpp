#include "nls/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nls/analysis.hpp"
#include "nls/audit.hpp"
#include "nls/rearrange.hpp"
#include "nls/variational.hpp"

namespace nls {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// ---------------------------------------------------------------- config --

double require_number(const json& j, const std::string& key) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ConfigError("config: missing or non-numeric field '" + key + "'");
  }
  return j[key].get<double>();
}

std::vector<double> require_vector(const json& j, const std::string& key,
                                   std::size_t size = 0) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw ConfigError("config: missing array field '" + key + "'");
  }
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw ConfigError("config: non-numeric entry in '" + key + "'");
    out.push_back(v.get<double>());
  }
  if (size != 0 && out.size() != size) {
    throw ConfigError("config: '" + key + "' must have " + std::to_string(size) +
                      " entries");
  }
  return out;
}

// components are 1-based in the file format
int component_index(const json& j, int k) {
  const int c = static_cast<int>(require_number(j, "component"));
  if (c < 1 || c > k) throw ConfigError("config: term component out of range");
  return c - 1;
}

NonlinearityTerm parse_term(const json& j, int k) {
  if (!j.contains("type") || !j["type"].is_string()) {
    throw ConfigError("config: term without a string 'type'");
  }
  const std::string type = j["type"].get<std::string>();
  if (type == "separable_power") {
    return SeparablePower{component_index(j, k), require_number(j, "mu"),
                          require_number(j, "exponent")};
  }
  if (type == "log_power") {
    return LogPower{component_index(j, k), require_number(j, "mu"),
                    require_number(j, "exponent")};
  }
  if (type == "coupling_product") {
    return CouplingProduct{require_number(j, "beta"),
                           require_vector(j, "exponents", k)};
  }
  if (type == "sobolev_critical") {
    return SobolevCritical{require_vector(j, "theta", k)};
  }
  throw ConfigError("config: unknown term type '" + type + "'");
}

const std::vector<std::string> kScenarios = {
    "solve", "sweep-rho", "sweep-beta", "audit", "gn", "threshold", "bubbles",
    "refine"};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }

  ExperimentConfig cfg;
  if (!j.contains("version") || !j["version"].is_number_integer()) {
    throw ConfigError("config: missing integer 'version'");
  }
  cfg.version = j["version"].get<int>();
  if (cfg.version != 1) throw ConfigError("config: unsupported version");

  if (!j.contains("scenario") || !j["scenario"].is_string()) {
    throw ConfigError("config: missing string 'scenario'");
  }
  cfg.scenario = j["scenario"].get<std::string>();
  if (std::find(kScenarios.begin(), kScenarios.end(), cfg.scenario) ==
      kScenarios.end()) {
    throw ConfigError("config: unknown scenario '" + cfg.scenario + "'");
  }

  cfg.components = static_cast<int>(require_number(j, "components"));
  if (cfg.components < 1) throw ConfigError("config: components must be >= 1");

  if (!j.contains("grid")) throw ConfigError("config: missing 'grid'");
  const auto& grid = j["grid"];
  cfg.dimension = static_cast<int>(require_number(grid, "dimension"));
  cfg.r_max = require_number(grid, "r_max");
  cfg.nodes = static_cast<std::size_t>(require_number(grid, "nodes"));
  if (cfg.dimension < 3) throw ConfigError("config: grid.dimension must be >= 3");
  if (!(cfg.r_max > 0.0)) throw ConfigError("config: grid.r_max must be positive");
  if (cfg.nodes < 16) throw ConfigError("config: grid.nodes must be >= 16");

  if (j.contains("nonlinearity")) {
    const auto& nl = j["nonlinearity"];
    if (!nl.contains("terms") || !nl["terms"].is_array()) {
      throw ConfigError("config: nonlinearity.terms must be an array");
    }
    for (const auto& t : nl["terms"]) cfg.terms.push_back(parse_term(t, cfg.components));
  }

  if (j.contains("solve")) {
    const auto& s = j["solve"];
    cfg.solve.rho = require_vector(s, "rho", cfg.components);
    if (s.contains("max_iters")) cfg.solve.max_iters = static_cast<int>(require_number(s, "max_iters"));
    if (s.contains("initial_step")) cfg.solve.initial_step = require_number(s, "initial_step");
    if (s.contains("backtrack_factor")) cfg.solve.backtrack_factor = require_number(s, "backtrack_factor");
    if (s.contains("projected_grad_tol")) cfg.solve.projected_grad_tol = require_number(s, "projected_grad_tol");
    if (s.contains("rearrangement_every")) cfg.solve.rearrangement_every = static_cast<int>(require_number(s, "rearrangement_every"));
    if (s.contains("multi_start")) cfg.solve.multi_start = static_cast<int>(require_number(s, "multi_start"));
    if (s.contains("init_widths")) cfg.solve.init_widths = require_vector(s, "init_widths");
    if (s.contains("init_amplitudes")) cfg.solve.init_amplitudes = require_vector(s, "init_amplitudes");
    if (s.contains("seed")) cfg.solve.seed = static_cast<std::uint64_t>(require_number(s, "seed"));
  } else if (cfg.scenario != "gn" && cfg.scenario != "audit" && cfg.scenario != "refine") {
    throw ConfigError("config: scenario '" + cfg.scenario + "' needs a 'solve' block");
  } else {
    cfg.solve.rho.assign(cfg.components, 1.0);
  }
  if (cfg.solve.init_widths.empty() || cfg.solve.init_amplitudes.empty()) {
    throw ConfigError("config: initial-state family must be nonempty");
  }

  if (j.contains("sweep")) {
    const auto& s = j["sweep"];
    if (s.contains("rho_values")) {
      if (!s["rho_values"].is_array()) throw ConfigError("config: sweep.rho_values must be an array");
      for (const auto& row : s["rho_values"]) {
        std::vector<double> rv;
        for (const auto& v : row) rv.push_back(v.get<double>());
        if (rv.size() != static_cast<std::size_t>(cfg.components)) {
          throw ConfigError("config: each sweep.rho_values entry must have K entries");
        }
        for (double r : rv) {
          if (!(r > 0.0)) throw ConfigError("config: sweep rho entries must be positive");
        }
        cfg.rho_values.push_back(std::move(rv));
      }
    }
    if (s.contains("beta_values")) cfg.beta_values = require_vector(s, "beta_values");
  }
  if (j.contains("bubbles")) {
    cfg.epsilons = require_vector(j["bubbles"], "epsilons");
  }
  if (j.contains("gn")) {
    cfg.gn_exponents = require_vector(j["gn"], "exponents");
  }
  if (j.contains("refine") && j["refine"].contains("levels")) {
    cfg.refine_levels = static_cast<int>(require_number(j["refine"], "levels"));
    if (cfg.refine_levels < 2 || cfg.refine_levels > 8) {
      throw ConfigError("config: refine.levels must lie in [2, 8]");
    }
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) throw ConfigError("config: output_dir must be a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }

  if (cfg.scenario == "sweep-rho" && cfg.rho_values.empty()) {
    throw ConfigError("config: sweep-rho needs nonempty sweep.rho_values");
  }
  if (cfg.scenario == "sweep-beta" && cfg.beta_values.empty()) {
    throw ConfigError("config: sweep-beta needs nonempty sweep.beta_values");
  }
  if (cfg.scenario == "bubbles" && cfg.epsilons.empty()) {
    throw ConfigError("config: bubbles needs nonempty bubbles.epsilons");
  }
  if (cfg.scenario == "gn" && cfg.gn_exponents.empty()) {
    throw ConfigError("config: gn needs nonempty gn.exponents");
  }
  if (cfg.scenario != "gn" && cfg.scenario != "refine" && cfg.terms.empty()) {
    throw ConfigError("config: scenario '" + cfg.scenario + "' needs nonlinearity terms");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

namespace {

// ------------------------------------------------------------- artifacts --

namespace fs = std::filesystem;

class ArtifactWriter {
 public:
  explicit ArtifactWriter(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "'");
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = fs::path(dir_) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
  }

 private:
  std::string dir_;
};

std::string csv_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  row += '\n';
  return row;
}

// minimal polyline plot, well-formed XML
std::string svg_line_plot(const std::vector<double>& xs,
                          const std::vector<double>& ys,
                          const std::string& title, bool log_x = false,
                          bool log_y = false) {
  const int width = 640, height = 420, pad = 56;
  auto tx = [&](double v) { return log_x ? std::log10(std::max(v, 1e-300)) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(std::max(v, 1e-300)) : v; };
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x_lo = std::min(x_lo, tx(xs[i]));
    x_hi = std::max(x_hi, tx(xs[i]));
    y_lo = std::min(y_lo, ty(ys[i]));
    y_hi = std::max(y_hi, ty(ys[i]));
  }
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
     << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
     << "\" fill=\"white\"/>\n"
     << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-family=\"monospace\" font-size=\"14\">"
     << title << "</text>\n"
     << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << width - 2 * pad
     << "\" height=\"" << height - 2 * pad
     << "\" fill=\"none\" stroke=\"black\"/>\n<polyline fill=\"none\" "
        "stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double px =
        pad + (tx(xs[i]) - x_lo) / (x_hi - x_lo) * (width - 2 * pad);
    const double py =
        height - pad - (ty(ys[i]) - y_lo) / (y_hi - y_lo) * (height - 2 * pad);
    os << fmt6(px) << "," << fmt6(py) << " ";
  }
  os << "\"/>\n"
     << "<text x=\"" << pad << "\" y=\"" << height - 12
     << "\" font-family=\"monospace\" font-size=\"11\">x: [" << fmt6(x_lo) << ", "
     << fmt6(x_hi) << "]" << (log_x ? " (log10)" : "") << "  y: [" << fmt6(y_lo)
     << ", " << fmt6(y_hi) << "]" << (log_y ? " (log10)" : "") << "</text>\n"
     << "</svg>\n";
  return os.str();
}

std::string saturation_word(Saturation s) {
  switch (s) {
    case Saturation::saturated: return "saturated";
    case Saturation::interior: return "interior";
    default: return "zero";
  }
}

int saturation_flag(Saturation s) {
  switch (s) {
    case Saturation::saturated: return 1;
    case Saturation::interior: return 0;
    default: return -1;
  }
}

std::string fiber_scan_csv(const FiberScan& scan) {
  std::string csv = "s,phi,M\n";
  for (std::size_t i = 0; i < scan.s.size(); ++i) {
    csv += csv_row({fmt(scan.s[i]), fmt(scan.phi[i]), fmt(scan.constraint[i])});
  }
  return csv;
}

std::string report_summary(const SolutionReport& rep, const SolveConfig& cfg) {
  std::ostringstream os;
  os << "status: " << rep.status << "\n"
     << "converged: " << (rep.converged ? "yes" : "no") << "\n"
     << "energy c = J(u): " << fmt(rep.energy) << "\n"
     << "iterations: " << rep.iterations << " (winning start " << rep.winning_start
     << ")\n"
     << "projected gradient norm: " << fmt6(rep.projected_grad_norm) << "\n"
     << "manifold residual |M|/|grad u|^2: " << fmt6(std::abs(rep.identity.M_value))
     << "\n"
     << "nehari residual: " << fmt6(rep.identity.nehari_res)
     << ", pohozaev residual: " << fmt6(rep.identity.pohozaev_res) << "\n"
     << "sigma_M: " << fmt6(rep.sigma_m) << "\n"
     << "KKT: min lambda " << fmt6(rep.kkt.min_lambda) << ", max slack "
     << fmt6(rep.kkt.max_slack) << ", verdict " << (rep.kkt.ok() ? "ok" : "violated")
     << "\n"
     << "audit: " << rep.audit_summary << "\n";
  for (std::size_t i = 0; i < rep.masses.size(); ++i) {
    os << "component " << (i + 1) << ": mass " << fmt(rep.masses[i]) << " (budget "
       << fmt(cfg.rho[i] * cfg.rho[i]) << ", " << saturation_word(rep.saturation[i])
       << "), lambda "
       << (std::isnan(rep.lambda[i]) ? std::string("n/a") : fmt(rep.lambda[i]))
       << "\n";
  }
  if (rep.threshold) {
    os << "sobolev threshold: " << fmt(rep.threshold->threshold) << ", margin "
       << fmt(rep.threshold->margin) << "\n";
  }
  return os.str();
}

std::uint64_t hash_rho(std::uint64_t seed, const std::vector<double>& rho) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
  for (double r : rho) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof r);
    std::memcpy(&bits, &r, sizeof bits);
    h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

GroundEnergyMap sweep_rho(const NonlinearitySpec& spec, const GridPtr& grid,
                          const SolveConfig& base,
                          const std::vector<std::vector<double>>& rho_grid,
                          int threads) {
  GroundEnergyMap map;
  map.rows.resize(rho_grid.size());
  std::atomic<std::size_t> next{0};
  const int workers = std::min<std::size_t>(resolve_threads(threads), rho_grid.size());

  auto work = [&] {
    for (;;) {
      const std::size_t row = next.fetch_add(1);
      if (row >= rho_grid.size()) break;
      GroundEnergyRow out;
      out.rho = rho_grid[row];
      SolveConfig cfg = base;
      cfg.rho = rho_grid[row];
      cfg.seed = hash_rho(base.seed, rho_grid[row]);
      cfg.keep_iteration_log = false;
      try {
        auto rep = minimize(spec, grid, cfg);
        out.converged = rep.converged;
        out.status = rep.status;
        out.c = rep.energy;
        out.lambda = rep.lambda;
        for (auto s : rep.saturation) out.saturation.push_back(saturation_flag(s));
      } catch (const std::exception& e) {
        out.converged = false;
        out.status = e.what();
        out.lambda.assign(spec.num_components(),
                          std::numeric_limits<double>::quiet_NaN());
        out.saturation.assign(spec.num_components(), -1);
      }
      map.rows[row] = std::move(out);
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return map;
}

std::string rearrangement_certificate_csv(const RearrangementCertificate& cert) {
  std::string csv = "row,index,before,after\n";
  for (std::size_t i = 0; i < cert.mass_before.size(); ++i) {
    csv += csv_row({"mass", std::to_string(i + 1), fmt(cert.mass_before[i]),
                    fmt(cert.mass_after[i])});
    csv += csv_row({"grad", std::to_string(i + 1), fmt(cert.grad_before[i]),
                    fmt(cert.grad_after[i])});
    for (std::size_t p = 0; p < cert.lp_exponents.size(); ++p) {
      csv += csv_row({"lp_" + fmt6(cert.lp_exponents[p]), std::to_string(i + 1),
                      fmt(cert.lp_before[i][p]), fmt(cert.lp_after[i][p])});
    }
  }
  for (std::size_t j = 0; j < cert.coupling_before.size(); ++j) {
    csv += csv_row({"coupling", std::to_string(j + 1), fmt(cert.coupling_before[j]),
                    fmt(cert.coupling_after[j])});
  }
  csv += csv_row({"manifold", "0", fmt(cert.m_before), fmt(cert.m_after)});
  csv += csv_row({"energy", "0", fmt(cert.j_before), fmt(cert.j_after_projected)});
  csv += csv_row({"fiber_root", "0", fmt(1.0), fmt(cert.a)});
  return csv;
}

namespace {

std::string energy_map_csv(const GroundEnergyMap& map, int k) {
  std::vector<std::string> header;
  for (int i = 1; i <= k; ++i) header.push_back("rho_" + std::to_string(i));
  header.push_back("c");
  for (int i = 1; i <= k; ++i) header.push_back("lambda_" + std::to_string(i));
  for (int i = 1; i <= k; ++i) header.push_back("sat_" + std::to_string(i));
  std::string csv = csv_row(header);
  for (const auto& row : map.rows) {
    std::vector<std::string> cells;
    for (double r : row.rho) cells.push_back(fmt(r));
    cells.push_back(fmt(row.c));
    for (double l : row.lambda) cells.push_back(fmt(l));
    for (int s : row.saturation) cells.push_back(std::to_string(s));
    csv += csv_row(cells);
  }
  return csv;
}

// ------------------------------------------------------------- scenarios --

struct ScenarioContext {
  const ExperimentConfig& cfg;
  ArtifactWriter& out;
  GridPtr grid;
};

int gate_audit(const NonlinearitySpec& spec, const ExperimentConfig& cfg,
               ArtifactWriter& out) {
  const auto audit = audit_assumptions(spec);
  if (!audit.passes_a1_to_a5() && !cfg.force) {
    out.write("audit_gate.txt", audit.summary() + "\nrefusing to run (use --force to override)\n");
    return kExitAuditFailure;
  }
  return kExitOk;
}

int scenario_solve(const ScenarioContext& ctx, bool with_threshold) {
  NonlinearitySpec spec(ctx.cfg.dimension, ctx.cfg.components, ctx.cfg.terms);
  if (int rc = gate_audit(spec, ctx.cfg, ctx.out); rc != kExitOk) return rc;

  SolveConfig solve_cfg = ctx.cfg.solve;
  solve_cfg.skip_audit = ctx.cfg.force;
  auto rep = minimize(spec, ctx.grid, solve_cfg);

  ctx.out.write("summary.txt", report_summary(rep, solve_cfg));

  std::string report_csv = "component,mass,lambda,saturation\n";
  for (std::size_t i = 0; i < rep.masses.size(); ++i) {
    report_csv += csv_row({std::to_string(i + 1), fmt(rep.masses[i]),
                           fmt(rep.lambda[i]),
                           std::to_string(saturation_flag(rep.saturation[i]))});
  }
  ctx.out.write("solution_report.csv", report_csv);

  std::string profile = "r";
  for (int i = 1; i <= ctx.cfg.components; ++i) profile += ",u_" + std::to_string(i);
  profile += "\n";
  const auto& grid = *ctx.grid;
  for (std::size_t node = 0; node < grid.size(); ++node) {
    std::vector<std::string> cells{fmt(grid.nodes[node])};
    for (const auto& c : rep.state.components) cells.push_back(fmt(c.values[node]));
    profile += csv_row(cells);
  }
  ctx.out.write("profile.csv", profile);

  if (rep.converged) {
    auto scan = fiber_scan(rep.state, spec, 0.25, 4.0, 97);
    ctx.out.write("fiber_scan.csv", fiber_scan_csv(scan));
    ctx.out.write("fiber_scan.svg",
                  svg_line_plot(scan.s, scan.phi, "fiber map phi(s)", true, false));
    std::vector<double> rs(grid.nodes.begin(), grid.nodes.end());
    ctx.out.write("profile.svg",
                  svg_line_plot(rs, rep.state.components[0].values,
                                "ground state profile u_1(r)", false, false));
  }

  if (with_threshold) {
    if (!spec.has_critical_part()) {
      ctx.out.write("threshold.txt", "not applicable: theta = 0\n");
    } else {
      const auto thr = threshold_check(spec, solve_cfg.rho, rep.energy);
      std::ostringstream os;
      os << "threshold (1/N) S^{N/2} sum theta^{1-N/2}: " << fmt(thr.threshold) << "\n"
         << "computed c: " << fmt(thr.c_computed) << "\n"
         << "margin: " << fmt(thr.margin) << "\n"
         << "routes: high-dimension " << (thr.route_high_dimension ? "yes" : "no")
         << ", exponent-window " << (thr.route_pq ? "yes" : "no");
      if (thr.route_pq) os << " (p=" << fmt6(thr.p) << ", q=" << fmt6(thr.q) << ")";
      os << ", large-rho " << (thr.route_large_rho ? "yes" : "no")
         << ", small-theta " << (thr.route_small_theta ? "yes" : "no") << "\n";
      ctx.out.write("threshold.txt", os.str());
      ctx.out.write("threshold.csv",
                    "threshold,c,margin\n" +
                        csv_row({fmt(thr.threshold), fmt(thr.c_computed),
                                 fmt(thr.margin)}));
    }
  }
  return rep.converged ? kExitOk : kExitNoConvergence;
}

int scenario_sweep_rho(const ScenarioContext& ctx) {
  NonlinearitySpec spec(ctx.cfg.dimension, ctx.cfg.components, ctx.cfg.terms);
  if (int rc = gate_audit(spec, ctx.cfg, ctx.out); rc != kExitOk) return rc;

  SolveConfig base = ctx.cfg.solve;
  base.skip_audit = true;  // gate ran once above
  auto map = sweep_rho(spec, ctx.grid, base, ctx.cfg.rho_values, ctx.cfg.threads);
  ctx.out.write("energy_map.csv", energy_map_csv(map, ctx.cfg.components));

  std::vector<double> xs, ys;
  std::size_t converged = 0;
  for (const auto& row : map.rows) {
    double norm = 0.0;
    for (double r : row.rho) norm += r * r;
    if (row.converged) {
      xs.push_back(std::sqrt(norm));
      ys.push_back(row.c);
      ++converged;
    }
  }
  if (!xs.empty()) {
    ctx.out.write("energy_map.svg",
                  svg_line_plot(xs, ys, "ground energy c(|rho|)", true, true));
  }

  // monotonicity under componentwise dominance
  std::size_t violations = 0;
  for (std::size_t a = 0; a < map.rows.size(); ++a) {
    for (std::size_t b = 0; b < map.rows.size(); ++b) {
      if (a == b || !map.rows[a].converged || !map.rows[b].converged) continue;
      bool dominates = true, strict = false;
      for (int i = 0; i < ctx.cfg.components; ++i) {
        if (map.rows[a].rho[i] < map.rows[b].rho[i]) dominates = false;
        if (map.rows[a].rho[i] > map.rows[b].rho[i]) strict = true;
      }
      if (dominates && strict && map.rows[a].c > map.rows[b].c + 1e-6) ++violations;
    }
  }
  std::ostringstream os;
  os << "rows: " << map.rows.size() << ", converged: " << converged << "\n"
     << "componentwise-dominance monotonicity violations (slack 1e-6): "
     << violations << "\n";
  ctx.out.write("summary.txt", os.str());
  return converged == 0 ? kExitNoConvergence : kExitOk;
}

int scenario_sweep_beta(const ScenarioContext& ctx) {
  NonlinearitySpec spec(ctx.cfg.dimension, ctx.cfg.components, ctx.cfg.terms);
  if (int rc = gate_audit(spec, ctx.cfg, ctx.out); rc != kExitOk) return rc;

  SolveConfig base = ctx.cfg.solve;
  base.skip_audit = true;
  base.keep_iteration_log = false;
  auto rows = beta_sweep(spec, ctx.cfg.beta_values, ctx.grid, base);

  std::string csv =
      "beta,c,mass_1,mass_2,sat_1,sat_2,lambda_1,lambda_2,a_beta,bounded_product,"
      "converged\n";
  std::vector<double> xs, ys;
  std::size_t converged = 0;
  for (const auto& row : rows) {
    const auto& r = row.report;
    auto cell = [&](const std::vector<double>& v, std::size_t i) {
      return i < v.size() ? fmt(v[i]) : std::string("nan");
    };
    std::vector<std::string> cells{fmt(row.beta), fmt(r.energy)};
    cells.push_back(cell(r.masses, 0));
    cells.push_back(cell(r.masses, 1));
    cells.push_back(std::to_string(r.saturation.size() > 0 ? saturation_flag(r.saturation[0]) : -1));
    cells.push_back(std::to_string(r.saturation.size() > 1 ? saturation_flag(r.saturation[1]) : -1));
    cells.push_back(cell(r.lambda, 0));
    cells.push_back(cell(r.lambda, 1));
    cells.push_back(fmt(row.a_beta));
    cells.push_back(fmt(row.bounded_product));
    cells.push_back(r.converged ? "1" : "0");
    csv += csv_row(cells);
    if (r.converged) {
      xs.push_back(row.beta);
      ys.push_back(r.energy);
      ++converged;
    }
  }
  ctx.out.write("beta_sweep.csv", csv);
  if (!xs.empty()) {
    ctx.out.write("beta_sweep.svg", svg_line_plot(xs, ys, "c(beta)", false, false));
  }
  std::ostringstream os;
  os << "rows: " << rows.size() << ", converged: " << converged << "\n";
  ctx.out.write("summary.txt", os.str());
  return converged == 0 ? kExitNoConvergence : kExitOk;
}

int scenario_audit(const ScenarioContext& ctx) {
  NonlinearitySpec spec(ctx.cfg.dimension, ctx.cfg.components, ctx.cfg.terms);
  const auto audit = audit_assumptions(spec);
  auto word = [](const AssumptionVerdict& v) {
    switch (v.status) {
      case AuditStatus::pass: return "pass";
      case AuditStatus::fail: return "fail";
      default: return "inconclusive";
    }
  };
  std::string csv = "assumption,status,margin,note\n";
  auto row = [&](const char* name, const AssumptionVerdict& v) {
    csv += csv_row({name, word(v), fmt(v.margin), "\"" + v.note + "\""});
  };
  row("A0", audit.a0);
  row("A1", audit.a1);
  row("A2", audit.a2);
  row("A3", audit.a3);
  row("A4", audit.a4);
  row("A4_strict", audit.a4_strict);
  row("A5", audit.a5);
  ctx.out.write("audit.csv", csv);
  std::ostringstream os;
  os << audit.summary() << "\n"
     << "eta estimate: " << fmt(audit.eta) << "\n"
     << "observed growth constant c~: " << fmt(audit.c_tilde) << "\n";
  if (!ctx.cfg.solve.rho.empty()) {
    const auto e2 = check_eta2(spec, ctx.cfg.solve.rho,
                               gn_constant(spec.dimension(), spec.l2_critical_exponent()),
                               audit.eta);
    os << "smallness (eq:eta2) lhs: " << fmt(e2.lhs) << " -> "
       << (e2.satisfied ? "satisfied" : "violated") << "\n";
  }
  ctx.out.write("summary.txt", os.str());
  return audit.passes_a1_to_a5() ? kExitOk : kExitAuditFailure;
}

int scenario_gn(const ScenarioContext& ctx) {
  std::string csv = "dimension,p,delta_p,C_Np\n";
  std::ostringstream os;
  for (double p : ctx.cfg.gn_exponents) {
    const double c = gn_constant(ctx.cfg.dimension, p);
    csv += csv_row({std::to_string(ctx.cfg.dimension), fmt(p),
                    fmt(gn_delta(ctx.cfg.dimension, p)), fmt(c)});
    os << "C_{" << ctx.cfg.dimension << "," << fmt6(p) << "} = " << fmt(c) << "\n";
  }
  ctx.out.write("gn_constants.csv", csv);
  ctx.out.write("summary.txt", os.str());
  return kExitOk;
}

int scenario_bubbles(const ScenarioContext& ctx) {
  NonlinearitySpec spec(ctx.cfg.dimension, ctx.cfg.components, ctx.cfg.terms);
  if (int rc = gate_audit(spec, ctx.cfg, ctx.out); rc != kExitOk) return rc;
  const auto diag = bubble_diagnostics(spec, ctx.cfg.epsilons, ctx.cfg.solve.rho);

  std::string csv =
      "epsilon,grad_sq,mass,crit_pow,trunc_p,trunc_q,s_eps,j_at_max\n";
  std::vector<double> xs, ys;
  for (const auto& row : diag.rows) {
    csv += csv_row({fmt(row.epsilon), fmt(row.grad_sq), fmt(row.mass),
                    fmt(row.crit_pow), fmt(row.truncated_p), fmt(row.truncated_q),
                    fmt(row.s_eps), fmt(row.j_at_max)});
    xs.push_back(row.epsilon);
    ys.push_back(row.mass);
  }
  ctx.out.write("bubbles.csv", csv);
  ctx.out.write("bubbles.svg",
                svg_line_plot(xs, ys, "truncated bubble mass vs eps", true, true));
  std::ostringstream os;
  os << "mass fit exponent: " << fmt6(diag.mass_fit.exponent)
     << " (r^2 " << fmt6(diag.mass_fit.r_squared) << ")\n"
     << "gradient excess fit exponent: " << fmt6(diag.grad_excess_fit.exponent)
     << " (r^2 " << fmt6(diag.grad_excess_fit.r_squared) << ")\n"
     << "S^{N/2}: " << fmt(diag.sobolev_half_power) << "\n"
     << "sobolev level: " << fmt(diag.level) << "\n"
     << "truncated-integral exponents p=" << fmt6(diag.p) << " q=" << fmt6(diag.q)
     << "\n";
  ctx.out.write("summary.txt", os.str());
  return kExitOk;
}

int scenario_refine(const ScenarioContext& ctx) {
  // J of a smooth reference state under grid refinement; doubling the node
  // count should divide the error by about 4
  std::vector<std::size_t> sizes;
  std::size_t m = ctx.cfg.nodes;
  for (int l = 0; l < ctx.cfg.refine_levels; ++l, m *= 2) sizes.push_back(m);
  std::vector<double> js;
  const bool have_terms = !ctx.cfg.terms.empty();
  for (std::size_t nodes : sizes) {
    auto grid = make_grid(ctx.cfg.dimension, ctx.cfg.r_max, nodes);
    StateVector u(grid, ctx.cfg.components);
    for (int i = 0; i < ctx.cfg.components; ++i) {
      const double width = ctx.cfg.solve.init_widths[i % ctx.cfg.solve.init_widths.size()];
      for (std::size_t node = 0; node + 1 < grid->size(); ++node) {
        const double r = grid->nodes[node];
        u.components[i].values[node] = std::exp(-r * r / (2.0 * width * width));
      }
    }
    if (have_terms) {
      NonlinearitySpec spec(ctx.cfg.dimension, ctx.cfg.components, ctx.cfg.terms);
      js.push_back(energy_J(u, spec));
    } else {
      js.push_back(0.5 * grad_norm_sq(u));
    }
  }
  // Richardson reference from the two finest levels assuming order 2
  const double ref = js.back() + (js.back() - js[js.size() - 2]) / 3.0;
  std::string csv = "nodes,J,error,order\n";
  std::ostringstream os;
  double prev_err = 0.0;
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    const double err = std::abs(js[l] - ref);
    double order = 0.0;
    if (l > 0 && err > 0.0) order = std::log2(prev_err / err);
    csv += csv_row({std::to_string(sizes[l]), fmt(js[l]), fmt(err),
                    l > 0 ? fmt6(order) : "n/a"});
    if (l > 0) os << "level " << l << ": observed order " << fmt6(order) << "\n";
    prev_err = err;
  }
  ctx.out.write("refine.csv", csv);
  os << "reference J (Richardson): " << fmt(ref) << "\n";
  ctx.out.write("summary.txt", os.str());
  return kExitOk;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg) {
  try {
    ArtifactWriter out(cfg.output_dir);
    ScenarioContext ctx{cfg, out, make_grid(cfg.dimension, cfg.r_max, cfg.nodes)};
    if (cfg.scenario == "solve") return scenario_solve(ctx, false);
    if (cfg.scenario == "threshold") return scenario_solve(ctx, true);
    if (cfg.scenario == "sweep-rho") return scenario_sweep_rho(ctx);
    if (cfg.scenario == "sweep-beta") return scenario_sweep_beta(ctx);
    if (cfg.scenario == "audit") return scenario_audit(ctx);
    if (cfg.scenario == "gn") return scenario_gn(ctx);
    if (cfg.scenario == "bubbles") return scenario_bubbles(ctx);
    if (cfg.scenario == "refine") return scenario_refine(ctx);
    throw ConfigError("unknown scenario '" + cfg.scenario + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const IoError&) {
    return kExitIoFailure;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

}  // namespace nls
