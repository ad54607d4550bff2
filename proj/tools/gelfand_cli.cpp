// Command-line front end: reproducible experiment runs driven by a JSON
// config, with JSON reports (schema_version 1) and CSV field/sweep exports.
//
// Subcommands
//   greens   regular-part tables, derivative table, mesh convergence study
//   reduced  reduced-functional jets, leading polynomial, eta0, admissibility
//   degree   finite-dimensional equation: nodal lines, degree, solutions
//   verify   correction/residual/kernel diagnostics over a rho sweep
//   solve    multiplicity experiment: K seeded Newton branches per rho
//
// Exit codes: 0 ok, 1 internal assertion failed, 2 config error, 3 numerical
// failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gelfand/ansatz.hpp"
#include "gelfand/solver.hpp"

using json = nlohmann::ordered_json;
using namespace gelfand;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AssertionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunContext {
  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  double p = 1.2;
  bool p_given = false;

  json cfg;          // parsed config
  std::string raw;   // config file bytes, echoed verbatim into out_dir
};

void load_config(RunContext& ctx, bool required) {
  if (ctx.config_path.empty()) {
    if (required) throw ConfigError("missing --config");
    ctx.cfg = json::object();
    return;
  }
  std::ifstream in(ctx.config_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config: " + ctx.config_path);
  std::stringstream ss;
  ss << in.rdbuf();
  ctx.raw = ss.str();
  try {
    ctx.cfg = json::parse(ctx.raw);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!ctx.cfg.is_object()) throw ConfigError("config must be a JSON object");
}

double num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
  return j[key].get<double>();
}

Vec2 vec2(const json& j, const char* key, Vec2 fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw ConfigError(std::string(key) + " must be [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

Domain build_domain(const json& cfg) {
  json d = cfg.value("domain", json::object());
  if (!d.is_object()) throw ConfigError("domain must be an object");
  std::string kind = d.value("kind", std::string("disk"));
  double h = num(d, "h", 1.0 / 128);
  if (!(h > 0 && h < 0.5)) throw ConfigError("domain.h out of range");
  if (kind == "disk") return Domain::unit_disk(h);
  if (kind == "disk_numeric") return Domain::unit_disk(h, false);
  if (kind == "square") return Domain::unit_square(h);
  if (kind == "square_with_hole")
    return Domain::square_with_hole(h, vec2(d, "origin", {0.0, 0.0}),
                                    num(d, "hole_half_width", 0.3));
  if (kind == "annulus") return Domain::annulus(num(d, "inner_radius", 0.4), h);
  throw ConfigError("unknown domain.kind: " + kind);
}

HomogeneousPoly target_poly(const json& t) {
  if (!t.is_array() || t.size() < 2) throw ConfigError("target must be a coefficient array");
  Eigen::VectorXd c(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    if (!t[i].is_number()) throw ConfigError("target entries must be numbers");
    c[i] = t[i].get<double>();
  }
  return HomogeneousPoly(static_cast<int>(t.size()) - 1, c);
}

Potential build_potential(const json& cfg, const Domain& d, int N) {
  json p = cfg.value("potential", json::object());
  if (!p.is_object()) throw ConfigError("potential must be an object");
  if (p.contains("constant")) return Potential::constant(num(p, "constant", 8.0));
  if (p.contains("log_coef")) {
    const json& m = p["log_coef"];
    if (!m.is_array() || m.empty() || !m[0].is_array())
      throw ConfigError("potential.log_coef must be a matrix (array of rows)");
    Eigen::MatrixXd c(m.size(), m[0].size());
    for (size_t i = 0; i < m.size(); ++i) {
      if (!m[i].is_array() || m[i].size() != m[0].size())
        throw ConfigError("potential.log_coef rows must have equal length");
      for (size_t j = 0; j < m[i].size(); ++j) c(i, j) = m[i][j].get<double>();
    }
    Potential pot;
    pot.log_coef = c;
    return pot;
  }
  if (p.contains("target"))
    return build_admissible_potential(d, target_poly(p["target"]), N,
                                      num(p, "offset", 0.0));
  throw ConfigError("potential needs one of: constant, log_coef, target");
}

std::vector<double> rho_sweep(const json& cfg) {
  if (!cfg.contains("rho")) throw ConfigError("missing rho sweep");
  const json& r = cfg["rho"];
  std::vector<double> out;
  if (r.is_number()) {
    out.push_back(r.get<double>());
  } else if (r.is_array()) {
    for (const auto& v : r) {
      if (!v.is_number()) throw ConfigError("rho entries must be numbers");
      out.push_back(v.get<double>());
    }
  } else {
    throw ConfigError("rho must be a number or an array");
  }
  for (double v : out)
    if (!(v > 0 && v < 0.2)) throw ConfigError("rho values must lie in (0, 0.2)");
  if (out.empty()) throw ConfigError("rho sweep is empty");
  return out;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

void emit(const RunContext& ctx, const std::string& command, json& report,
          const std::vector<std::pair<std::string, std::string>>& csvs) {
  std::filesystem::create_directories(ctx.out_dir);
  if (!ctx.raw.empty())
    write_text(std::filesystem::path(ctx.out_dir) / "config.json", ctx.raw);
  json full;
  full["schema_version"] = 1;
  full["command"] = command;
  full["threads"] = ctx.threads;
  full["seed"] = ctx.cfg.value("seed", 0);
  full["report"] = report;
  write_text(std::filesystem::path(ctx.out_dir) / "report.json",
             full.dump(2) + "\n");
  for (const auto& [name, text] : csvs)
    write_text(std::filesystem::path(ctx.out_dir) / name, text);
}

std::string field_csv(const Domain& d, const GridFunction& g) {
  std::string out = "x,y,value\n";
  char line[96];
  for (int k = 0; k < d.n_interior(); ++k) {
    Vec2 p = d.interior_pos(k);
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.x, p.y,
                  g.interior[k]);
    out += line;
  }
  return out;
}

// Run f(i) for i in [0, n) on up to `threads` workers; results must be slotted
// by index inside f so the output does not depend on the schedule.
void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errs(threads);
  for (int t = 0; t < std::min(threads, n); ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = next++; i < n; i = next++) f(i);
      } catch (...) {
        errs[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

// Well-separated interior probe points: the deepest node plus up to three
// more, greedily maximizing (boundary distance) * (spread from points already
// chosen). Deterministic for a fixed mesh.
std::vector<Vec2> probe_points(const Domain& d, int want = 4) {
  std::vector<Vec2> pts;
  std::vector<double> depth(d.n_interior());
  for (int k = 0; k < d.n_interior(); ++k)
    depth[k] = d.dist_to_boundary(d.interior_pos(k));
  while (static_cast<int>(pts.size()) < want) {
    int best = -1;
    double best_score = 0.0;
    for (int k = 0; k < d.n_interior(); ++k) {
      double score = depth[k];
      for (const Vec2& q : pts)
        score = std::min(score, 0.5 * (d.interior_pos(k) - q).norm());
      if (score > best_score) {
        best_score = score;
        best = k;
      }
    }
    if (best < 0) break;
    pts.push_back(d.interior_pos(best));
  }
  return pts;
}

json vec2_json(Vec2 v) { return json::array({v.x, v.y}); }

// ---------------------------------------------------------------- greens ---

int cmd_greens(RunContext& ctx) {
  Domain d = build_domain(ctx.cfg);
  std::vector<Vec2> pts;
  if (ctx.cfg.contains("points")) {
    for (const auto& p : ctx.cfg["points"])
      pts.push_back({p[0].get<double>(), p[1].get<double>()});
  } else {
    pts = probe_points(d);
  }
  if (pts.empty()) throw ConfigError("no probe points inside the domain");

  // table of H(x, y) over diagonal pairs and neighbouring off-diagonal pairs
  json table = json::array();
  auto add_pair = [&](Vec2 x, Vec2 y) {
    json row;
    row["x"] = vec2_json(x);
    row["y"] = vec2_json(y);
    row["H"] = regular_part(d, x, y);
    table.push_back(row);
  };
  for (size_t i = 0; i < pts.size(); ++i) {
    add_pair(pts[i], pts[i]);
    Vec2 q = pts[(i + 1) % pts.size()];
    add_pair({0.5 * (pts[i].x + q.x), 0.5 * (pts[i].y + q.y)}, pts[i]);
  }

  RegularPartDerivatives der = regular_part_derivatives(d, 2, pts[0]);
  json dj;
  dj["at"] = vec2_json(pts[0]);
  dj["grad"] = vec2_json(der.grad_x);
  dj["mixed"] = {{der.mixed[0][0], der.mixed[0][1]},
                 {der.mixed[1][0], der.mixed[1][1]}};
  dj["mixed_trace"] = der.mixed_trace;
  dj["grad_mixed_trace"] = vec2_json(der.grad_mixed_trace);

  json report;
  report["domain_nodes"] = d.n_interior();
  report["h"] = d.h;
  report["table"] = table;
  report["derivatives"] = dj;

  double worst = 0.0;
  std::string check_name;
  if (d.analytic_regular_part) {
    // numeric Dirichlet path against the image-charge closed form
    check_name = "closed_form_error";
    for (const Vec2& y : pts) {
      GridFunction Hy = regular_part_field(d, y);
      for (const Vec2& x : pts)
        worst = std::max(worst, std::abs(Hy.eval(x) - regular_part_disk(x, y)));
    }
  } else {
    // self-consistency of the table under mesh refinement h -> h/2
    check_name = "refinement_error";
    json dh = ctx.cfg.value("domain", json::object());
    dh["h"] = d.h / 2;
    json cfg2 = ctx.cfg;
    cfg2["domain"] = dh;
    Domain d2 = build_domain(cfg2);
    for (const Vec2& y : pts)
      for (const Vec2& x : pts)
        worst = std::max(worst, std::abs(regular_part(d, x, y) -
                                         regular_part(d2, x, y)));
  }
  report[check_name] = worst;
  double tol = num(ctx.cfg, "tolerance", d.analytic_regular_part ? 1e-4 : 2e-3);
  report["tolerance"] = tol;
  report["pass"] = worst <= tol;

  std::vector<std::pair<std::string, std::string>> csvs;
  csvs.emplace_back("regular_part_field.csv",
                    field_csv(d, regular_part_field(d, pts[0])));
  emit(ctx, "greens", report, csvs);
  if (worst > tol) throw AssertionFailure(check_name + " above tolerance");
  return 0;
}

// --------------------------------------------------------------- reduced ---

int cmd_reduced(RunContext& ctx) {
  Domain d = build_domain(ctx.cfg);
  int N = static_cast<int>(num(ctx.cfg, "order", 2));
  Potential pot = build_potential(ctx.cfg, d, N);
  ReducedFunctional rf = make_reduced_functional(d, pot, N);

  json report;
  report["order"] = N;
  report["fd_noise"] = rf.fd_noise;
  json jets = json::array();
  for (int k = 1; k <= N + 1; ++k) {
    json row = json::array();
    for (int j = 0; j < rf.deriv[k].size(); ++j) row.push_back(rf.deriv[k][j]);
    jets.push_back(row);
  }
  report["derivatives"] = jets;

  HomogeneousPoly P = build_P(rf);
  json pc = json::array();
  for (int j = 0; j <= P.degree; ++j) pc.push_back(P.coef[j]);
  report["P"] = pc;

  AdmissibilityReport adm = admissibility_check(rf);
  json aj;
  aj["admissible"] = adm.admissible;
  aj["max_low_order"] = adm.max_low_order;
  aj["tolerance"] = adm.tolerance;
  aj["polar_min"] = adm.polar_min;
  if (!adm.failure.empty()) aj["failure"] = adm.failure;
  report["admissibility"] = aj;
  report["eta0"] = vec2_json(ctx.cfg.contains("eta0") ? vec2(ctx.cfg, "eta0", {})
                                                      : compute_eta0(rf));

  bool pass = std::isfinite(rf.fd_noise);
  if (ctx.cfg.contains("expect_admissible"))
    pass = pass && (adm.admissible == ctx.cfg["expect_admissible"].get<bool>());
  report["pass"] = pass;
  emit(ctx, "reduced", report, {});
  if (!pass) throw AssertionFailure("admissibility did not match expectation");
  return 0;
}

// ---------------------------------------------------------------- degree ---

int cmd_degree(RunContext& ctx, double alpha, bool alpha_given, int order,
               std::string eta0_arg) {
  HomogeneousPoly P;
  if (ctx.cfg.contains("P")) {
    P = target_poly(ctx.cfg["P"]);
  } else if (alpha_given || ctx.cfg.contains("alpha")) {
    // the cubic family 8 pi^2 (alpha x^3 - x y^2)
    double a = alpha_given ? alpha : num(ctx.cfg, "alpha", 1.0);
    Eigen::VectorXd c(4);
    double s = 8 * M_PI * M_PI;
    c << s * a, 0.0, -s, 0.0;
    P = HomogeneousPoly(3, c);
  } else {
    // pure harmonic mode of the requested degree
    int M = order > 0 ? order : static_cast<int>(num(ctx.cfg, "order", 3));
    P = HomogeneousPoly::harmonic_mode(M);
  }
  Vec2 eta0 = vec2(ctx.cfg, "eta0", {0.0, 0.0});
  if (!eta0_arg.empty()) {
    double ex, ey;
    if (std::sscanf(eta0_arg.c_str(), "%lf,%lf", &ex, &ey) != 2)
      throw ConfigError("--eta0 expects x,y");
    eta0 = {ex, ey};
  }
  if (!is_admissible(P))
    throw ConfigError("polynomial is not admissible; degree theory does not apply");

  CriticalPointReport rep = solve_reduced_equation(P, eta0);
  json report;
  json pc = json::array();
  for (int j = 0; j <= P.degree; ++j) pc.push_back(P.coef[j]);
  report["P"] = pc;
  report["eta0"] = vec2_json(eta0);
  report["nodal_lines"] = rep.M;
  report["degree_formula"] = rep.degree_formula;
  report["degree_winding"] = rep.degree_winding;
  report["containment_radius"] = rep.containment_radius;
  report["residual_max"] = rep.residual_max;
  json sols = json::array();
  for (const CriticalPoint& s : rep.solutions) {
    json row;
    row["xi"] = vec2_json(s.xi);
    row["r"] = s.r;
    row["t"] = s.t;
    row["hess_det"] = s.hess_det;
    row["stable"] = s.stable;
    row["degenerate"] = s.degenerate;
    sols.push_back(row);
  }
  report["solutions"] = sols;
  bool pass = rep.degree_formula == rep.degree_winding;
  report["pass"] = pass;
  emit(ctx, "degree", report, {});
  if (!pass) throw AssertionFailure("degree formula and winding oracle disagree");
  return 0;
}

// ---------------------------------------------------------------- verify ---

int cmd_verify(RunContext& ctx) {
  Domain d = build_domain(ctx.cfg);
  int N = static_cast<int>(num(ctx.cfg, "order", 2));
  Potential pot = build_potential(ctx.cfg, d, N);
  ReducedFunctional rf = make_reduced_functional(d, pot, N);
  RadialProfile profile = solve_w1();
  std::vector<double> rhos = rho_sweep(ctx.cfg);
  Vec2 xi0 = vec2(ctx.cfg, "xi", {0.0, 0.0});
  bool scale_xi = ctx.cfg.value("scale_xi", true);
  bool corrections = ctx.cfg.value("corrections", true);
  bool linearized = ctx.cfg.value("linearized", false);
  double p = ctx.p;
  d.solver();  // warm the shared factorization before any parallel section

  struct Row {
    double rho, lp, sigma_min;
    Eigen::Matrix2d moments;
    Vec2 log_moments, pair, target;
    double rel_error, tau;
    LinearizedDiagnostic lin;
    bool has_lin = false;
  };
  std::vector<Row> rows(rhos.size());
  parallel_for(static_cast<int>(rhos.size()), ctx.threads, [&](int i) {
    Ansatz a = assemble_ansatz(rf, profile, rhos[i], xi0, corrections, scale_xi);
    Row& r = rows[i];
    r.rho = rhos[i];
    r.tau = a.tau;
    r.lp = residual(a, p).lp;
    KernelIntegralReport ki = kernel_integrals(a);
    r.moments = ki.moments;
    r.log_moments = ki.log_moments;
    KernelPair kp = make_kernel_pair(a);
    ReducedEquationCheck rc = reduced_equation_check(a, kp);
    r.pair = rc.pair;
    r.target = rc.target;
    r.rel_error = rc.rel_error;
    if (linearized) {
      r.lin = linearized_diagnostic(a, kp);
      r.has_lin = true;
    }
  });

  json report;
  report["p"] = p;
  report["order"] = N;
  report["xi"] = vec2_json(xi0);
  report["scale_xi"] = scale_xi;
  report["corrections"] = corrections;
  {
    // one-off correction-bundle summary at the largest rho
    Ansatz a = assemble_ansatz(rf, profile, rhos[0], xi0, corrections, scale_xi);
    json bj;
    bj["tau"] = a.bundle.tau;
    bj["tau_iterations"] = a.bundle.tau_iterations;
    bj["L1"] = a.bundle.fam.L1;
    bj["L2"] = a.bundle.fam.L2;
    bj["L3"] = a.bundle.fam.L3;
    bj["I"] = a.bundle.fam.I;
    bj["W_tilde_at_xi"] = a.bundle.wtilde_xi;
    bj["H_at_xi"] = a.bundle.H_xi;
    report["bundle"] = bj;
  }
  json sweep = json::array();
  for (const Row& r : rows) {
    json row;
    row["rho"] = r.rho;
    row["tau"] = r.tau;
    row["residual_lp"] = r.lp;
    row["moments"] = {{r.moments(0, 0), r.moments(0, 1)},
                      {r.moments(1, 0), r.moments(1, 1)}};
    row["log_moments"] = vec2_json(r.log_moments);
    row["reduced_pair"] = vec2_json(r.pair);
    row["reduced_target"] = vec2_json(r.target);
    row["reduced_rel_error"] = r.rel_error;
    if (r.has_lin) {
      row["singular_values"] = {r.lin.smallest[0], r.lin.smallest[1],
                                r.lin.smallest[2]};
      row["sigma_restricted"] = r.lin.sigma_restricted;
      row["projection_defect"] = r.lin.projection_defect;
    }
    sweep.push_back(row);
  }
  report["sweep"] = sweep;

  double slope = 0.0;
  if (rhos.size() >= 2) {
    // least-squares slope of log ||R||_p against log rho
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const Row& r : rows) {
      double x = std::log(r.rho), y = std::log(r.lp);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double n = static_cast<double>(rows.size());
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    report["residual_slope"] = slope;
  }
  bool pass = true;
  if (ctx.cfg.contains("expect_slope")) {
    double want = num(ctx.cfg, "expect_slope", 0.0);
    double tol = num(ctx.cfg, "slope_tolerance", 0.25);
    pass = std::abs(slope - want) <= tol;
    report["expect_slope"] = want;
    report["slope_tolerance"] = tol;
  }
  report["pass"] = pass;

  std::string csv =
      "rho,residual_lp,sigma_min,m11,m12,m21,m22,pair1,pair2\n";
  char line[256];
  for (const Row& r : rows) {
    std::snprintf(line, sizeof line,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.rho, r.lp, r.has_lin ? r.lin.smallest[0] : 0.0,
                  r.moments(0, 0), r.moments(0, 1), r.moments(1, 0),
                  r.moments(1, 1), r.pair.x, r.pair.y);
    csv += line;
  }
  std::string prof_csv = "r,w1,dw1\n";
  for (size_t k = 0; k < profile.grid.size(); ++k) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", profile.grid[k],
                  profile.w[k], profile.dw[k]);
    prof_csv += line;
  }
  emit(ctx, "verify", report,
       {{"sweep.csv", csv}, {"radial_profile.csv", prof_csv}});
  if (!pass) throw AssertionFailure("residual slope outside the expected band");
  return 0;
}

// ----------------------------------------------------------------- solve ---

int cmd_solve(RunContext& ctx) {
  Domain d = build_domain(ctx.cfg);
  int N = static_cast<int>(num(ctx.cfg, "order", 2));
  Potential pot = build_potential(ctx.cfg, d, N);
  ReducedFunctional rf = make_reduced_functional(d, pot, N);
  RadialProfile profile = solve_w1();
  std::vector<double> rhos = rho_sweep(ctx.cfg);
  bool expect_same = ctx.cfg.value("expect_same", false);
  bool emit_fields = ctx.cfg.value("emit_fields", false);
  double ppm = num(ctx.cfg, "points_per_mu", 4.5);

  // branch seed points: explicit absolute seeds, or the stable solutions of
  // the reduced equation scaled into the domain per rho
  std::vector<Vec2> xi0s;    // unscaled solutions (empty when seeds explicit)
  std::vector<Vec2> seeds;   // absolute positions (filled per rho when scaled)
  json setup;
  if (ctx.cfg.contains("seeds")) {
    for (const auto& s : ctx.cfg["seeds"])
      seeds.push_back({s[0].get<double>(), s[1].get<double>()});
    if (seeds.size() < 2) throw ConfigError("seeds needs at least two points");
  } else {
    HomogeneousPoly P = build_P(rf);
    Vec2 eta0 =
        ctx.cfg.contains("eta0") ? vec2(ctx.cfg, "eta0", {}) : compute_eta0(rf);
    CriticalPointReport rep = solve_reduced_equation(P, eta0);
    for (const CriticalPoint& s : rep.solutions)
      if (s.stable) xi0s.push_back(s.xi);
    setup["eta0"] = vec2_json(eta0);
    setup["stable_solutions"] = static_cast<int>(xi0s.size());
    if (xi0s.size() < 2)
      throw AssertionFailure("fewer than two stable reduced solutions");
  }
  int K = static_cast<int>(xi0s.empty() ? seeds.size() : xi0s.size());

  json per_rho = json::array();
  std::vector<std::pair<std::string, std::string>> csvs;
  bool certificate = true;
  double prev_gap = -1.0, prev_height = -1.0;
  std::vector<std::string> failures;
  std::vector<Vec2> prev_xi;  // settled positions at the previous rho
  double prev_s = 0.0;

  for (double rho : rhos) {
    // per-rho fine mesh sized from the concentration scale mu = rho tau
    std::vector<Vec2> starts = seeds;
    double s = std::pow(rho, 2.0 / N) * std::pow(std::log(1.0 / rho), 1.0 / N);
    if (!xi0s.empty()) {
      starts.clear();
      if (prev_xi.empty()) {
        for (Vec2 x : xi0s) starts.push_back(x * s);
      } else {
        // continuation: carry the relative displacement found at the last rho
        for (Vec2 x : prev_xi) starts.push_back(x * (s / prev_s));
      }
    }
    double tau;
    {
      CorrectionBundle b = make_correction_bundle(rf, profile, rho, starts[0]);
      tau = b.tau;
    }
    double hf = rho * tau / ppm;
    Domain fine = Domain::unit_disk(hf);
    if (fine.n_interior() > 4000000)
      throw std::runtime_error("fine mesh exceeds the 4M node budget");

    BranchOptions bo;
    bo.newton.tolerance = num(ctx.cfg, "tolerance", 1e-9);
    std::vector<BranchResult> brs(K);
    std::vector<BlowupDiagnostics> diag(K);
    parallel_for(K, ctx.threads, [&](int i) {
      brs[i] = solve_branch(rf, profile, rho, starts[i], fine, bo);
      diag[i] = blowup_diagnostics(fine, pot, rho, brs[i].newton.u);
    });

    json rj;
    rj["rho"] = rho;
    rj["tau"] = tau;
    rj["h_fine"] = hf;
    rj["nodes"] = fine.n_interior();
    json branches = json::array();
    for (int i = 0; i < K; ++i) {
      json bj;
      bj["seed_xi"] = vec2_json(brs[i].xi_seed);
      bj["xi"] = vec2_json(brs[i].xi);
      bj["position_updates"] = brs[i].outer;
      bj["multiplier_evals"] = brs[i].multiplier_evals;
      bj["multiplier_norm"] = brs[i].multiplier_norm;
      bj["converged"] = brs[i].newton.converged;
      bj["iterations"] = brs[i].newton.iterations;
      bj["initial_residual"] = brs[i].newton.initial_residual;
      bj["final_residual"] = brs[i].newton.final_residual;
      bj["peak"] = vec2_json(diag[i].peak);
      bj["height"] = diag[i].height;
      bj["mass_over_8pi"] = diag[i].mass / (8 * M_PI);
      bj["sup_far"] = diag[i].sup_far;
      branches.push_back(bj);
      if (!brs[i].newton.converged) {
        certificate = false;
        failures.push_back("branch did not converge");
      }
    }
    rj["branches"] = branches;

    // pairwise distinctness and separation
    double sep_scale = rho * std::sqrt(std::log(1.0 / rho));
    json pairs = json::array();
    for (int i = 0; i < K; ++i)
      for (int j = i + 1; j < K; ++j) {
        double dmax = (brs[i].newton.u.interior - brs[j].newton.u.interior)
                          .cwiseAbs()
                          .maxCoeff();
        double sep = (diag[i].peak - diag[j].peak).norm();
        json pj;
        pj["i"] = i;
        pj["j"] = j;
        pj["sup_difference"] = dmax;
        pj["peak_separation"] = sep;
        if (!xi0s.empty()) {
          double pred = sep_scale * (xi0s[i] - xi0s[j]).norm();
          pj["predicted_separation"] = pred;
          pj["separation_ratio"] = sep / pred;
          if (!(dmax >= 1.0 && sep >= 0.5 * pred)) {
            certificate = false;
            failures.push_back("branches not distinct");
          }
        } else if (expect_same) {
          if (!(dmax < 0.1)) {
            certificate = false;
            failures.push_back("control branches did not coincide");
          }
        }
        pairs.push_back(pj);
      }
    rj["pairs"] = pairs;
    if (K >= 2) {
      double gap =
          std::abs(brs[0].newton.u.eval(diag[0].peak) -
                   brs[1].newton.u.eval(diag[0].peak));
      rj["value_gap_at_first_peak"] = gap;
      if (!expect_same) {
        if (prev_gap >= 0 && gap <= prev_gap) {
          certificate = false;
          failures.push_back("value gap not increasing along the sweep");
        }
        prev_gap = gap;
      }
    }
    if (prev_height >= 0 && diag[0].height <= prev_height && !expect_same) {
      certificate = false;
      failures.push_back("peak height not increasing along the sweep");
    }
    prev_height = diag[0].height;

    if (emit_fields)
      for (int i = 0; i < K; ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "u_rho%.0e_branch%d.csv", rho, i);
        csvs.emplace_back(name, field_csv(fine, brs[i].newton.u));
      }
    per_rho.push_back(rj);
  }

  json report = setup;
  report["branches"] = K;
  report["expect_same"] = expect_same;
  report["sweep"] = per_rho;
  report["certificate"] = certificate;
  if (!certificate) report["failures"] = failures;
  emit(ctx, "solve", report, csvs);
  if (!certificate) throw AssertionFailure("multiplicity certificate failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for planar blow-up multiplicity"};
  app.require_subcommand(1);
  RunContext ctx;
  app.add_option("--config", ctx.config_path, "JSON config path")
      ->capture_default_str();
  app.add_option("--out", ctx.out_dir, "output directory")
      ->capture_default_str();
  app.add_option("--threads", ctx.threads, "worker threads for sweep points")
      ->capture_default_str();
  auto* popt = app.add_option("--p", ctx.p, "Lebesgue exponent for residual norms");

  auto* greens = app.add_subcommand("greens", "Green regular-part tables");
  auto* reduced = app.add_subcommand("reduced", "reduced-functional report");
  auto* degree = app.add_subcommand("degree", "finite-dimensional equation");
  auto* verify = app.add_subcommand("verify", "expansion diagnostics sweep");
  auto* solve = app.add_subcommand("solve", "multiplicity experiment");
  for (auto* sub : {greens, reduced, degree, verify, solve}) sub->fallthrough();

  double alpha = 1.0;
  int order = 0;
  std::string eta0_arg;
  auto* aopt = degree->add_option("--alpha", alpha, "cubic family parameter");
  degree->add_option("--order", order, "harmonic-mode degree");
  degree->add_option("--eta0", eta0_arg, "forcing vector x,y");

  CLI11_PARSE(app, argc, argv);
  ctx.p_given = popt->count() > 0;

  try {
    bool config_required = !degree->parsed();
    load_config(ctx, config_required);
    if (!ctx.p_given && ctx.cfg.contains("p")) ctx.p = num(ctx.cfg, "p", 1.2);
    if (ctx.cfg.contains("out_dir") && ctx.out_dir == ".")
      ctx.out_dir = ctx.cfg["out_dir"].get<std::string>();
    if (greens->parsed()) return cmd_greens(ctx);
    if (reduced->parsed()) return cmd_reduced(ctx);
    if (degree->parsed())
      return cmd_degree(ctx, alpha, aopt->count() > 0, order, eta0_arg);
    if (verify->parsed()) return cmd_verify(ctx);
    if (solve->parsed()) return cmd_solve(ctx);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const AssertionFailure& e) {
    std::fprintf(stderr, "assertion failed: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
