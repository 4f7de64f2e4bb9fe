#include "obstacle/run.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include <json.hpp>

#include "obstacle/parallel.hpp"
#include "obstacle/vtk.hpp"

namespace obstacle {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const json& require_type(const json& j, const char* key, bool ok, const char* expected) {
  if (!ok) throw ConfigError(key, std::string("expected ") + expected + ", got " + j.dump());
  return j;
}

double number_field(const json& obj, const char* key) {
  const json& j = obj.at(key);
  return require_type(j, key, j.is_number(), "a number").get<double>();
}

int integer_field(const json& obj, const char* key) {
  const json& j = obj.at(key);
  require_type(j, key, j.is_number_integer(), "an integer");
  const auto v = j.get<std::int64_t>();
  if (v < INT32_MIN || v > INT32_MAX) throw ConfigError(key, "integer out of range");
  return static_cast<int>(v);
}

std::string string_field(const json& obj, const char* key) {
  const json& j = obj.at(key);
  return require_type(j, key, j.is_string(), "a string").get<std::string>();
}

void ensure(bool condition, const char* field, const std::string& message) {
  if (!condition) throw ConfigError(field, message);
}

MethodSpec method_spec(const RunConfig& config) {
  return {config.method, config.degree, config.method == MethodKind::mixed ? 0.0 : config.alpha, config.solver};
}

AssemblyOptions assembly_options() {
  AssemblyOptions options;
  options.threads = default_thread_count();
  return options;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// One CSV row; columns that do not apply stay empty.
struct CsvRow {
  LevelRow row;
  std::optional<double> rate_u, rate_lambda, slope_u_n;
  std::optional<int> total_dofs, marked;
};

std::string format_csv(const std::vector<CsvRow>& rows) {
  std::string out = csv_header() + "\n";
  auto opt = [](const auto& v) {
    if (!v) return std::string();
    if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, int>) return std::to_string(*v);
    else return fmt(*v);
  };
  for (const CsvRow& r : rows) {
    const LevelRow& l = r.row;
    out += std::to_string(l.level) + "," + fmt(l.h) + "," + std::to_string(l.ndof_u) + "," +
           std::to_string(l.ndof_lambda) + "," + fmt(l.err_u) + "," + fmt(l.err_lambda) + "," + fmt(l.eta) + "," +
           fmt(l.s) + "," + opt(r.rate_u) + "," + opt(r.rate_lambda) + "," + std::to_string(l.iterations) + "," +
           opt(r.total_dofs) + "," + opt(r.slope_u_n) + "," + std::to_string(l.circle_vertices) + "," +
           opt(r.marked) + "\n";
  }
  return out;
}

void write_level_vtk(const fs::path& path, const Mesh& mesh, const LevelSolve& s, const Vector& indicator,
                     bool point_fields, bool cell_fields) {
  const int nt = static_cast<int>(mesh.num_triangles());
  const Vector u = s.v.expand(s.sol.u);
  Vector u_vertex(mesh.num_vertices(), 0.0), u_cell(nt), lambda(nt);
  for (int k = 0; k < nt; ++k) {
    const ElementGeometry geom = ElementGeometry::of(mesh, k);
    for (int i = 0; i < 3; ++i) {
      Barycentric b{0.0, 0.0, 0.0};
      b[i] = 1.0;
      u_vertex[mesh.triangles()[k][i]] = eval_field(s.v, u, geom, k, b).value;
    }
    u_cell[k] = eval_field(s.v, u, geom, k, {1.0 / 3, 1.0 / 3, 1.0 / 3}).value;
    lambda[k] = s.sol.lambda[s.q.dofs(k)[0]];
  }
  std::vector<VtkField> points, cells;
  if (point_fields) {
    points.push_back({"u", u_vertex});
    cells.push_back({"u_centroid", u_cell});
  }
  if (cell_fields) {
    cells.push_back({"lambda", lambda});
    cells.push_back({"E_K", indicator});
  }
  write_vtk(path.string(), mesh, points, cells);
}

std::string describe(const RunConfig& c) {
  std::string out = "method " + to_string(c.method) + "\ndegree " + std::to_string(c.degree) + "\n";
  if (c.method != MethodKind::mixed) out += "alpha " + fmt(c.alpha) + "\n";
  out += "family " + to_string(c.family) + "\ninitial_h " + fmt(c.initial_h) + "\n";
  return out;
}

std::string report_block(int level, const SolverReport& r) {
  std::string out = "level " + std::to_string(level) + ": iterations " + std::to_string(r.iterations) +
                    (r.converged ? ", converged" : ", NOT converged") + (r.oscillation ? ", oscillation" : "") + "\n";
  out += "  update norms:";
  for (double x : r.lambda_update_norms) out += " " + fmt(x);
  out += "\n";
  if (!r.message.empty()) out += "  " + r.message + "\n";
  return out;
}

std::string plot_script(bool versus_dofs) {
  std::string s =
      "set datafile separator ','\n"
      "set key autotitle columnhead\n"
      "set logscale xy\n"
      "set grid\n";
  if (versus_dofs) {
    s += "set xlabel 'N (total dofs)'\nset ylabel 'error'\n"
         "plot 'table.csv' using 12:5 with linespoints title 'H1 error of u', \\\n"
         "     'table.csv' using 12:6 with linespoints title 'lambda error', \\\n"
         "     'table.csv' using 12:7 with linespoints title 'eta'\n";
  } else {
    s += "set xlabel 'h'\nset ylabel 'error'\n"
         "plot 'table.csv' using 2:5 with linespoints title 'H1 error of u', \\\n"
         "     'table.csv' using 2:6 with linespoints title 'lambda error', \\\n"
         "     'table.csv' using 2:7 with linespoints title 'eta'\n";
  }
  s += "pause mouse close\n";
  return s;
}

class CheckLog {
 public:
  explicit CheckLog(std::ostream& log) : log_(log) {}
  void pass(const std::string& name, const std::string& detail) { line("PASS", name, detail); }
  void fail(const std::string& name, const std::string& detail) {
    ++failures_;
    line("FAIL", name, detail);
  }
  void warn(const std::string& name, const std::string& detail) { line("WARN", name, detail); }
  void info(const std::string& name, const std::string& detail) { line("INFO", name, detail); }
  void expect(bool ok, const std::string& name, const std::string& detail) {
    ok ? pass(name, detail) : fail(name, detail);
  }
  int failures() const { return failures_; }
  const std::string& text() const { return text_; }

 private:
  void line(const char* tag, const std::string& name, const std::string& detail) {
    const std::string s = std::string(tag) + " " + name + ": " + detail + "\n";
    text_ += s;
    log_ << s;
  }
  std::ostream& log_;
  std::string text_;
  int failures_ = 0;
};

double max_abs_difference(const SparseMatrix& a, const SparseMatrix& b) {
  return norm_inf(add(a, b, -1.0).values());
}

double relative_difference(const SparseMatrix& a, const SparseMatrix& b) {
  return max_abs_difference(a, b) / std::max(1.0, norm_inf(a.values()));
}

// Dense diagnostics need a small mesh; fall back to a coarse disk of the same family.
Mesh diagnostic_mesh(const RunConfig& config, const ExactSolution& exact) {
  return initial_mesh(config.family, std::max(config.initial_h, 0.8), exact);
}

void check_exact(CheckLog& log, const ExactSolution& exact) {
  log.expect(std::abs(exact.a - 0.829) <= 1e-3, "contact radius", "a = " + fmt(exact.a));
  const double jump_u = std::abs(exact.u(exact.a) - exact.obstacle(exact.a));
  const double jump_du = std::abs(exact.u_dr(exact.a) - exact.obstacle_dr(exact.a));
  log.expect(jump_u <= 1e-12 && jump_du <= 1e-10, "exact solution C1 contact",
             "|u - g| = " + fmt(jump_u) + ", |u' - g'| = " + fmt(jump_du));
  log.expect(std::abs(exact.u(2.0)) <= 1e-12, "exact solution boundary value", "u(2) = " + fmt(exact.u(2.0)));
  double min_gap = INFINITY, min_lambda = INFINITY;
  for (int i = 0; i <= 200; ++i) {
    const double r = 2.0 * i / 200;
    min_gap = std::min(min_gap, exact.u(r) - exact.obstacle(r));
    min_lambda = std::min(min_lambda, exact.lambda(r));
  }
  log.expect(min_gap >= -1e-12 && min_lambda >= 0.0, "exact solution sign conditions",
             "min(u - g) = " + fmt(min_gap) + ", min lambda = " + fmt(min_lambda));
}

void check_discrete(CheckLog& log, const RunConfig& config, const Mesh& mesh, const ExactSolution& exact) {
  const MethodSpec spec = method_spec(config);
  const DofMap v = build_dofmap(mesh, {displacement_family(spec), Constraint::dirichlet});
  const DofMap q = build_dofmap(mesh, {Family::P0_disc, Constraint::none});
  const ProblemData data = exact.problem(config.degree, spec.alpha);
  AssemblyOptions serial;
  AssemblyOptions parallel;
  parallel.threads = 2;
  AssemblyOptions high;
  high.quadrature_order = 6;

  if (config.method == MethodKind::mixed) {
    const MixedSystem sys = assemble_mixed(mesh, v, q, data, serial);
    const MixedSystem hi = assemble_mixed(mesh, v, q, data, high);
    const double dq = std::max(relative_difference(sys.A, hi.A), relative_difference(sys.B, hi.B));
    log.expect(dq <= 1e-12, "quadrature audit (order 4 vs 6)", "max relative entry difference " + fmt(dq));
    const MixedSystem par = assemble_mixed(mesh, v, q, data, parallel);
    log.expect(sys.A == par.A && sys.B == par.B && sys.f == par.f && sys.g == par.g, "assembly determinism",
               "1 vs 2 threads");
    const DiscreteSolution sol = pdas_mixed(sys, config.solver);
    const KktResiduals kkt = kkt_check(sol, sys);
    log.expect(sol.report.converged && kkt.ok(), "KKT residuals",
               "primal " + fmt(kkt.primal) + ", dual " + fmt(kkt.dual) + ", complementarity " +
                   fmt(kkt.complementarity) + ", scale " + fmt(kkt.scale) + ", iterations " +
                   std::to_string(sol.report.iterations));
    return;
  }

  const StabilizedSystem sys = assemble_stabilized(mesh, v, q, data, serial);
  const StabilizedSystem hi = assemble_stabilized(mesh, v, q, data, high);
  const double dq = std::max({relative_difference(sys.A, hi.A), relative_difference(sys.B, hi.B),
                              relative_difference(sys.C, hi.C)});
  log.expect(dq <= 1e-12, "quadrature audit (order 4 vs 6)", "max relative entry difference " + fmt(dq));
  const StabilizedSystem par = assemble_stabilized(mesh, v, q, data, parallel);
  log.expect(sys.A == par.A && sys.B == par.B && sys.C == par.C && sys.f == par.f && sys.g == par.g,
             "assembly determinism", "1 vs 2 threads");
  if (config.method == MethodKind::nitsche) {
    const DiscreteSolution sol = nitsche_solve(mesh, v, q, data, config.solver, serial);
    log.expect(sol.report.converged, "Nitsche fixed point",
               "iterations " + std::to_string(sol.report.iterations) + (sol.report.oscillation ? ", oscillation" : ""));
    return;
  }
  const DiscreteSolution sol = pdas_stabilized(sys, config.solver);
  const KktResiduals kkt = kkt_check(sol, sys);
  log.expect(sol.report.converged && kkt.ok(), "KKT residuals",
             "primal " + fmt(kkt.primal) + ", dual " + fmt(kkt.dual) + ", complementarity " +
                 fmt(kkt.complementarity) + ", scale " + fmt(kkt.scale) + ", iterations " +
                 std::to_string(sol.report.iterations));
}

}  // namespace

const std::string& csv_header() {
  static const std::string header =
      "level,h,ndof_u,ndof_lambda,err_u_h1,err_lambda_neg,eta,S,rate_u,rate_lambda,pdas_iters,N,slope_u_N,"
      "circle_vertices,marked";
  return header;
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "top level must be a JSON object");

  // Grouped "mesh" and "solver" objects are accepted and merged into the flat form.
  static const std::vector<std::pair<std::string, std::vector<std::string>>> groups{
      {"mesh", {"family", "initial_h", "levels"}}, {"solver", {"c", "tol", "max_iter"}}};
  for (const auto& [group, members] : groups) {
    if (!doc.contains(group)) continue;
    const json sub = doc[group];
    if (!sub.is_object()) throw ConfigError(group, "must be an object");
    doc.erase(group);
    for (const auto& [key, value] : sub.items()) {
      const std::string name = group + "." + key;
      if (std::find(members.begin(), members.end(), key) == members.end()) throw ConfigError(name, "unknown field");
      if (doc.contains(key)) throw ConfigError(name, "also given at top level");
      doc[key] = value;
    }
  }

  static const char* const known[] = {"method", "degree",   "alpha", "family",     "initial_h",  "levels",
                                      "c",      "tol",      "max_iter", "theta", "output_dir", "dof_budget"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      throw ConfigError(key, "unknown field");
  }

  RunConfig c;
  if (doc.contains("method")) {
    const std::string name = string_field(doc, "method");
    try {
      c.method = parse_method(name);
    } catch (const std::invalid_argument&) {
      throw ConfigError("method", "must be one of mixed, stabilized, nitsche (got '" + name + "')");
    }
  }
  if (doc.contains("degree")) {
    c.degree = integer_field(doc, "degree");
    ensure(c.degree == 1 || c.degree == 2, "degree", "must be 1 or 2");
  }
  c.alpha = c.degree == 2 ? 0.1 : 0.01;
  if (doc.contains("alpha")) c.alpha = number_field(doc, "alpha");
  if (c.method != MethodKind::mixed) ensure(std::isfinite(c.alpha) && c.alpha > 0.0, "alpha", "must be positive");
  if (doc.contains("family")) {
    const std::string name = string_field(doc, "family");
    try {
      c.family = parse_family(name);
    } catch (const std::invalid_argument&) {
      throw ConfigError("family", "must be conforming or nonconforming (got '" + name + "')");
    }
  }
  if (doc.contains("initial_h")) {
    c.initial_h = number_field(doc, "initial_h");
    ensure(std::isfinite(c.initial_h) && c.initial_h > 0.0, "initial_h", "must be positive");
  }
  if (doc.contains("levels")) {
    c.levels = integer_field(doc, "levels");
    ensure(c.levels >= 1, "levels", "must be at least 1");
  }
  if (doc.contains("c")) {
    c.solver.c = number_field(doc, "c");
    ensure(std::isfinite(c.solver.c) && c.solver.c > 0.0, "c", "must be positive");
  }
  if (doc.contains("tol")) {
    c.solver.tol = number_field(doc, "tol");
    ensure(std::isfinite(c.solver.tol) && c.solver.tol > 0.0, "tol", "must be positive");
  }
  if (doc.contains("max_iter")) {
    c.solver.max_iter = integer_field(doc, "max_iter");
    ensure(c.solver.max_iter >= 1, "max_iter", "must be at least 1");
  }
  if (doc.contains("theta")) {
    c.theta = number_field(doc, "theta");
    ensure(c.theta > 0.0 && c.theta <= 1.0, "theta", "must lie in (0, 1]");
  }
  if (doc.contains("dof_budget")) {
    c.dof_budget = integer_field(doc, "dof_budget");
    ensure(c.dof_budget >= 1, "dof_budget", "must be at least 1");
  }
  if (doc.contains("output_dir")) c.output_dir = string_field(doc, "output_dir");
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string canonical_config(const RunConfig& c) {
  json j;
  j["method"] = to_string(c.method);
  j["degree"] = c.degree;
  j["alpha"] = c.method == MethodKind::mixed ? 0.0 : c.alpha;
  j["family"] = to_string(c.family);
  j["initial_h"] = c.initial_h;
  j["levels"] = c.levels;
  j["c"] = c.solver.c;
  j["tol"] = c.solver.tol;
  j["max_iter"] = c.solver.max_iter;
  j["theta"] = c.theta;
  j["dof_budget"] = c.dof_budget;
  return j.dump();  // std::map ordering: keys sorted
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_config(config)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

fs::path resolve_output_dir(const RunConfig& config, const std::optional<fs::path>& cli_out) {
  if (cli_out && !cli_out->empty()) return *cli_out;
  if (!config.output_dir.empty()) return config.output_dir;
  return fs::path("out") / config_hash(config);
}

int run_solve(const RunConfig& config, const fs::path& out, std::ostream& log) {
  fs::create_directories(out);
  const ExactSolution exact = build_exact_solution();
  const AssemblyOptions options = assembly_options();
  const Mesh mesh = initial_mesh(config.family, config.initial_h, exact);
  const LevelSolve s = solve_benchmark(mesh, method_spec(config), exact, options);
  const Vector indicator = local_indicator(mesh, s.v, s.q, s.sol, s.data, options);

  write_level_vtk(out / "u.vtk", mesh, s, indicator, true, false);
  write_level_vtk(out / "lambda.vtk", mesh, s, indicator, false, true);
  CsvRow row;
  row.row.level = 0;
  row.row.h = mesh.max_diameter();
  row.row.ndof_u = s.v.num_free();
  row.row.ndof_lambda = s.q.num_dofs;
  row.row.err_u = s.err_u;
  row.row.err_lambda = s.err_lambda;
  row.row.eta = s.estimate.eta;
  row.row.s = s.estimate.s_term;
  row.row.iterations = s.sol.report.iterations;
  row.row.converged = s.sol.report.converged;
  row.row.circle_vertices = count_vertices_on_circle(mesh, exact.a);
  write_text(out / "table.csv", format_csv({row}));
  write_text(out / "report.txt", describe(config) + report_block(0, s.sol.report));
  write_text(out / "plot.gp", plot_script(false));
  log << "solve: err_u " << fmt(s.err_u) << ", iterations " << s.sol.report.iterations << " -> " << out.string()
      << "\n";
  return s.sol.report.converged ? exit_code::ok : exit_code::not_converged;
}

int run_converge(const RunConfig& config, const fs::path& out, std::ostream& log) {
  fs::create_directories(out);
  std::string report = describe(config);
  bool converged = true;
  const ConvergenceTable table = convergence_study(
      method_spec(config), config.family, config.initial_h, config.levels, assembly_options(),
      [&](int level, const Mesh& mesh, const LevelSolve& s, const Vector& indicator) {
        write_level_vtk(out / ("level_" + std::to_string(level) + ".vtk"), mesh, s, indicator, true, true);
        report += report_block(level, s.sol.report);
        converged = converged && s.sol.report.converged;
      });
  std::vector<CsvRow> rows;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CsvRow r{table.rows[i], {}, {}, {}, {}, {}};
    if (i > 0) {
      r.rate_u = table.rate_u[i - 1];
      r.rate_lambda = table.rate_lambda[i - 1];
    }
    rows.push_back(r);
    log << "level " << i << ": h " << fmt(r.row.h) << ", err_u " << fmt(r.row.err_u) << "\n";
  }
  write_text(out / "table.csv", format_csv(rows));
  write_text(out / "report.txt", report);
  write_text(out / "plot.gp", plot_script(false));
  return converged ? exit_code::ok : exit_code::not_converged;
}

int run_adapt(const RunConfig& config, const fs::path& out, std::ostream& log) {
  if (config.method != MethodKind::stabilized) throw ConfigError("method", "adapt requires the stabilized method");
  fs::create_directories(out);
  std::string report = describe(config);
  bool converged = true;
  const AdaptiveTable table = adaptive_study(
      method_spec(config), config.family, config.initial_h, config.theta, config.dof_budget, assembly_options(),
      [&](int level, const Mesh& mesh, const LevelSolve& s, const Vector& indicator) {
        write_level_vtk(out / ("level_" + std::to_string(level) + ".vtk"), mesh, s, indicator, true, true);
        report += report_block(level, s.sol.report);
        converged = converged && s.sol.report.converged;
      });
  std::vector<CsvRow> rows;
  std::vector<double> n, e;
  for (const AdaptiveStep& step : table.steps) {
    CsvRow r{step.row, {}, {}, {}, step.total_dofs, static_cast<int>(step.marked.size())};
    n.push_back(step.total_dofs);
    e.push_back(step.row.err_u);
    if (n.size() >= 3) r.slope_u_n = loglog_slope(std::span(n).last(3), std::span(e).last(3));
    rows.push_back(r);
    log << "step " << step.row.level << ": N " << step.total_dofs << ", err_u " << fmt(step.row.err_u) << "\n";
  }
  if (rows.back().slope_u_n) report += "slope of err_u vs N (last three): " + fmt(*rows.back().slope_u_n) + "\n";
  write_text(out / "table.csv", format_csv(rows));
  write_text(out / "report.txt", report);
  write_text(out / "plot.gp", plot_script(true));
  return converged ? exit_code::ok : exit_code::not_converged;
}

int run_check(const RunConfig& config, const fs::path& out, std::ostream& log) {
  fs::create_directories(out);
  CheckLog checks(log);
  const ExactSolution exact = build_exact_solution();
  check_exact(checks, exact);

  const Mesh mesh = initial_mesh(config.family, config.initial_h, exact);
  const ConformityReport audit = audit_conformity(mesh);
  checks.expect(audit.ok(), "mesh conformity",
                std::to_string(mesh.num_triangles()) + " triangles, " + std::to_string(audit.hanging_vertices) +
                    " hanging vertices");
  if (config.family == MeshFamily::conforming) {
    const int on_circle = count_vertices_on_circle(mesh, exact.a);
    checks.expect(on_circle > 0, "contact circle resolved", std::to_string(on_circle) + " vertices on r = a");
  }

  const Mesh coarse = diagnostic_mesh(config, exact);
  const int k = config.degree;
  const Family plain = k == 1 ? Family::P1 : Family::P2;
  const Family enriched = k == 1 ? Family::P1_bubble : Family::P2_bubble;
  const SpaceSpec q_spec{Family::P0_disc, Constraint::none};
  const double beta_bubble = infsup_diagnostic(coarse, {enriched, Constraint::dirichlet}, q_spec);
  checks.expect(beta_bubble > 1e-6, "inf-sup " + to_string(enriched) + "/P0", "beta_h = " + fmt(beta_bubble));
  const double beta_plain = infsup_diagnostic(coarse, {plain, Constraint::dirichlet}, q_spec);
  checks.info("inf-sup " + to_string(plain) + "/P0", "beta_h = " + fmt(beta_plain));

  bool solve = true;
  if (config.method != MethodKind::mixed) {
    const double ci = inverse_constant_estimate(coarse, {plain, Constraint::dirichlet});
    if (config.alpha >= ci) {
      checks.warn("alpha range", "alpha = " + fmt(config.alpha) + " >= C_I estimate " + fmt(ci) +
                                     "; the stabilized operator is not coercive, discrete solve skipped");
      solve = false;
    } else {
      checks.pass("alpha range", "alpha = " + fmt(config.alpha) + " < C_I estimate " + fmt(ci));
    }
  }
  if (solve) {
    try {
      check_discrete(checks, config, mesh, exact);
    } catch (const std::exception& e) {
      checks.fail("discrete solve", e.what());
    }
  }

  write_text(out / "check.txt", describe(config) + checks.text());
  return checks.failures() == 0 ? exit_code::ok : exit_code::check_failed;
}

int run_command(const std::string& command, const RunConfig& config, const fs::path& out, std::ostream& log) {
  try {
    if (command == "solve") return run_solve(config, out, log);
    if (command == "converge") return run_converge(config, out, log);
    if (command == "adapt") return run_adapt(config, out, log);
    if (command == "check") return run_check(config, out, log);
    throw ConfigError("", "unknown subcommand '" + command + "'");
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return exit_code::config_error;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_code::not_converged;
  }
}

}  // namespace obstacle
