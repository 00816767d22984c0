#include "relhop/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "relhop/dynamics.hpp"
#include "relhop/error.hpp"
#include "relhop/interpolation.hpp"
#include "relhop/meanfield.hpp"
#include "relhop/model.hpp"

#ifndef RELHOP_VERSION
#define RELHOP_VERSION "0.0.0"
#endif

namespace relhop::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 1;

struct Options {
  std::string model = "relativistic";
  std::size_t n = 400;
  std::size_t p = 3;
  double beta = 1.0;
  std::string beta_grid;
  std::string inv_beta_grid;
  std::size_t runs = 50;
  std::size_t sweeps = 1000;
  std::size_t equil = 1000;
  std::uint64_t seed = kDefaultSeed;
  double threshold = 0.9;
  double damping = 0.5;
  double tol = 1e-12;
  std::string init = "pattern:1";
  std::string rule = "glauber";
  std::string observable = "retrieved";
  unsigned workers = 0;
  std::string out;
  std::string format = "csv";

  std::string check;
  std::size_t resolution = 50;
  std::size_t samples = 50;
  std::size_t n1 = 0;
  double t_step = 0.05;
  std::vector<std::string> inputs;
};

struct Header {
  std::string command;
  std::uint64_t seed = 0;

  std::string comment() const {
    return "# relhop " + version() + "; command: " + command + "; seed: " + std::to_string(seed);
  }
  json as_json() const { return json{{"command", command}, {"seed", seed}, {"version", version()}}; }
};

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

// JSON has no infinity; such values are written as null.
json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double inverse(double beta) { return beta == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / beta; }

// Opens the destination before any computation so an unwritable path fails fast.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path), os_(&fallback) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw InputError("cannot open output file '" + path + "' for writing");
    os_ = file_.get();
  }
  std::ostream& stream() { return *os_; }
  const std::string& path() const { return path_; }
  void finish() {
    os_->flush();
    if (!*os_) throw InputError("writing output failed" + (path_.empty() ? std::string() : " for '" + path_ + "'"));
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_;
};

void check_format(const Options& o) {
  if (o.format != "csv" && o.format != "json") throw InputError("--format must be csv or json");
}

std::vector<double> beta_values(const Options& o, const std::string& default_beta_grid) {
  if (!o.beta_grid.empty() && !o.inv_beta_grid.empty())
    throw InputError("give either --beta-grid or --inv-beta-grid, not both");
  if (!o.inv_beta_grid.empty()) {
    auto inv = parse_grid(o.inv_beta_grid);
    for (double v : inv)
      if (!(v > 0.0)) throw InputError("--inv-beta-grid values must be positive");
    std::vector<double> betas;
    betas.reserve(inv.size());
    for (double v : inv) betas.push_back(1.0 / v);
    return betas;
  }
  return parse_grid(o.beta_grid.empty() ? default_beta_grid : o.beta_grid);
}

DynamicsConfig dynamics_config(const Options& o) {
  DynamicsConfig c;
  c.rule = parse_update_rule(o.rule);
  c.equilibration_sweeps = o.equil;
  c.measurement_sweeps = o.sweeps;
  c.seed = o.seed;
  c.init = parse_initial_condition(o.init);
  c.validate();
  return c;
}

SolverOptions solver_options(const Options& o) {
  SolverOptions s;
  s.damping = o.damping;
  s.tolerance = o.tol;
  s.validate();
  return s;
}

OverlapVector pure_start(std::size_t p) {
  std::vector<double> m(p, 0.0);
  m[0] = 0.9;
  return OverlapVector(std::move(m));
}

bool has_mean_field(const ModelKind& kind) { return kind.family() != ModelKind::Family::Truncated; }

// Pure-state branch of the self-consistency equation, |M_1|.
double mean_field_overlap(const ModelKind& kind, std::size_t p, double beta, const SolverOptions& s) {
  if (!has_mean_field(kind) || p > kMaxEnumeratedPatterns) return std::numeric_limits<double>::quiet_NaN();
  const auto r = solve_fixed_point(SelfConsistencyProblem(kind, p, beta), pure_start(p), s);
  return std::abs(r.m[0]);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Options& o, const Header& h, std::ostream& out) {
  check_format(o);
  const auto kind = ModelKind::parse(o.model);
  const auto betas = beta_values(o, "1.0:5.0:0.25");
  const auto config = dynamics_config(o);
  const auto observable = parse_curve_observable(o.observable);
  const auto solver = solver_options(o);
  Sink sink(o.out, out);

  const auto points = measure_overlap_curve(kind, o.n, o.p, betas, o.runs, config, o.workers, observable);
  auto& os = sink.stream();
  if (o.format == "csv") {
    os << h.comment() << '\n';
    os << "model,N,P,beta,inv_beta,mean_m1,stderr_m1,runs,meanfield_m1\n";
    for (const auto& pt : points)
      os << kind.name() << ',' << o.n << ',' << o.p << ',' << num(pt.beta) << ',' << num(inverse(pt.beta)) << ','
         << num(pt.mean) << ',' << num(pt.standard_error) << ',' << pt.runs << ','
         << num(mean_field_overlap(kind, o.p, pt.beta, solver)) << '\n';
  } else {
    json rows = json::array();
    for (const auto& pt : points)
      rows.push_back({{"beta", pt.beta},
                      {"inv_beta", jnum(inverse(pt.beta))},
                      {"mean_m1", pt.mean},
                      {"stderr_m1", pt.standard_error},
                      {"runs", pt.runs},
                      {"meanfield_m1", jnum(mean_field_overlap(kind, o.p, pt.beta, solver))}});
    os << json{{"header", h.as_json()},
               {"model", kind.name()},
               {"N", o.n},
               {"P", o.p},
               {"observable", to_string(observable)},
               {"rows", rows}}
              .dump(2)
       << '\n';
  }
  sink.finish();
  return kSuccess;
}

int cmd_retrieval(const Options& o, const Header& h, std::ostream& out) {
  check_format(o);
  const auto kind = ModelKind::parse(o.model);
  const auto betas = beta_values(o, "0.5:5.0:0.5");
  const auto config = dynamics_config(o);
  Sink sink(o.out, out);

  const auto points = retrieval_frequency(kind, o.n, o.p, betas, o.runs, o.threshold, config, o.workers);
  auto& os = sink.stream();
  if (o.format == "csv") {
    os << h.comment() << '\n';
    os << "model,N,P,beta,frequency,runs,threshold\n";
    for (const auto& pt : points)
      os << kind.name() << ',' << o.n << ',' << o.p << ',' << num(pt.beta) << ',' << num(pt.frequency) << ','
         << pt.runs << ',' << num(pt.threshold) << '\n';
  } else {
    json rows = json::array();
    for (const auto& pt : points)
      rows.push_back({{"beta", pt.beta},
                      {"inv_beta", jnum(inverse(pt.beta))},
                      {"frequency", pt.frequency},
                      {"stderr", pt.standard_error},
                      {"runs", pt.runs},
                      {"threshold", pt.threshold}});
    os << json{{"header", h.as_json()}, {"model", kind.name()}, {"N", o.n}, {"P", o.p}, {"rows", rows}}.dump(2)
       << '\n';
  }
  sink.finish();
  return kSuccess;
}

int cmd_solve(const Options& o, const Header& h, std::ostream& out) {
  check_format(o);
  const auto kind = ModelKind::parse(o.model);
  const SelfConsistencyProblem problem(kind, o.p, o.beta);
  const auto solver = solver_options(o);
  Sink sink(o.out, out);

  const auto r = solve_fixed_point(problem, pure_start(o.p), solver);
  const double f = free_energy(kind, r.m, o.beta);
  auto& os = sink.stream();
  if (o.format == "json") {
    os << json{{"header", h.as_json()},
               {"model", kind.name()},
               {"P", o.p},
               {"beta", o.beta},
               {"M", std::vector<double>(r.m.begin(), r.m.end())},
               {"residual", r.residual},
               {"iterations", r.iterations},
               {"converged", r.converged},
               {"free_energy", f}}
              .dump(2)
       << '\n';
  } else {
    os << h.comment() << '\n';
    os << "model,P,beta,M,residual,iterations,converged,free_energy\n";
    std::string m;
    for (std::size_t mu = 0; mu < r.m.size(); ++mu) m += (mu ? " " : "") + num(r.m[mu]);
    os << kind.name() << ',' << o.p << ',' << num(o.beta) << ',' << m << ',' << num(r.residual) << ','
       << r.iterations << ',' << (r.converged ? "true" : "false") << ',' << num(f) << '\n';
  }
  sink.finish();
  return kSuccess;
}

int cmd_scan(const Options& o, const Header& h, std::ostream& out) {
  check_format(o);
  const auto kind = ModelKind::parse(o.model);
  const auto betas = beta_values(o, "0.90:1.10:0.005");
  const auto solver = solver_options(o);
  Sink sink(o.out, out);

  const auto scan = critical_scan(kind, betas, o.p, solver);
  auto& os = sink.stream();
  if (o.format == "csv") {
    os << h.comment() << '\n';
    os << "# beta_c: " << (scan.beta_c ? num(*scan.beta_c) : "none") << '\n';
    os << "model,P,beta,norm,iterations,converged,ordered\n";
    for (const auto& row : scan.rows)
      os << kind.name() << ',' << o.p << ',' << num(row.beta) << ',' << num(row.norm) << ',' << row.iterations << ','
         << (row.converged ? "true" : "false") << ',' << (row.ordered ? "true" : "false") << '\n';
  } else {
    json rows = json::array();
    for (const auto& row : scan.rows)
      rows.push_back({{"beta", row.beta},
                      {"norm", row.norm},
                      {"iterations", row.iterations},
                      {"converged", row.converged},
                      {"ordered", row.ordered}});
    os << json{{"header", h.as_json()},
               {"model", kind.name()},
               {"P", o.p},
               {"beta_c", scan.beta_c ? json(*scan.beta_c) : json(nullptr)},
               {"rows", rows}}
              .dump(2)
       << '\n';
  }
  sink.finish();
  return kSuccess;
}

int cmd_fluctuations(const Options& o, bool single_beta, const Header& h, std::ostream& out) {
  check_format(o);
  const auto kind = ModelKind::parse(o.model);
  const auto betas = single_beta ? std::vector<double>{o.beta} : beta_values(o, "0:0.75:0.25");
  for (double b : betas) fluctuation_theory(b);
  const auto config = dynamics_config(o);
  Sink sink(o.out, out);

  std::vector<RescaledFluctuation> values;
  for (double b : betas) values.push_back(overlap_fluctuations(kind, o.n, o.p, b, o.runs, config, o.workers));
  auto& os = sink.stream();
  if (o.format == "csv") {
    os << h.comment() << '\n';
    os << "model,N,P,beta,value,stderr,theory,runs\n";
    for (std::size_t k = 0; k < betas.size(); ++k)
      os << kind.name() << ',' << o.n << ',' << o.p << ',' << num(betas[k]) << ',' << num(values[k].value) << ','
         << num(values[k].standard_error) << ',' << num(fluctuation_theory(betas[k])) << ',' << o.runs << '\n';
  } else {
    json rows = json::array();
    for (std::size_t k = 0; k < betas.size(); ++k)
      rows.push_back({{"beta", betas[k]},
                      {"value", values[k].value},
                      {"stderr", values[k].standard_error},
                      {"theory", fluctuation_theory(betas[k])},
                      {"runs", o.runs}});
    os << json{{"header", h.as_json()}, {"model", kind.name()}, {"N", o.n}, {"P", o.p}, {"rows", rows}}.dump(2)
       << '\n';
  }
  sink.finish();
  return kSuccess;
}

// ---------------------------------------------------------------------------
// verify

struct Verdict {
  json report;
  bool passed = false;
  std::string summary;
};

std::vector<double> unit_grid(double step) {
  if (!(step > 0.0 && step <= 0.5)) throw InputError("--t-step must lie in (0, 0.5]");
  const auto intervals = static_cast<std::size_t>(std::llround(1.0 / step));
  if (std::abs(static_cast<double>(intervals) * step - 1.0) > 1e-9)
    throw InputError("--t-step must divide 1 evenly");
  std::vector<double> grid(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) grid[k] = static_cast<double>(k) / static_cast<double>(intervals);
  return grid;
}

Verdict verify_convexity(const Options& o) {
  const auto r = check_sqrt_convexity(o.resolution, o.p, o.workers);
  Verdict v;
  v.passed = r.max_violation <= kConvexitySlack;
  v.report = {{"check", "convexity"},
              {"parameters", {{"resolution", o.resolution}, {"P", o.p}, {"tolerance", kConvexitySlack}}},
              {"samples", r.evaluations},
              {"max_violation", r.max_violation},
              {"passed", v.passed},
              {"worst_case", {{"m1", r.worst_m1}, {"m2", r.worst_m2}, {"rho", r.worst_rho}}}};
  v.summary = "max_violation " + num(r.max_violation);
  return v;
}

Verdict verify_subadditivity(const Options& o) {
  const auto kind = ModelKind::parse(o.model);
  const auto r = check_subadditivity(kind, o.n, o.p, o.beta, o.samples, o.seed, o.workers);
  Verdict v;
  v.passed = r.all_nonpositive;
  v.report = {{"check", "subadditivity"},
              {"parameters",
               {{"model", kind.name()}, {"N", o.n}, {"P", o.p}, {"beta", o.beta}, {"tolerance", kSubadditivitySlack}}},
              {"samples", r.samples},
              {"max_margin", r.max_margin},
              {"passed", v.passed},
              {"worst_case", {{"seed", r.worst_seed}, {"sample", r.worst_sample}, {"split", r.worst_split}}}};
  v.summary = "max_margin " + num(r.max_margin);
  return v;
}

Verdict verify_monotonicity(const Options& o) {
  const std::size_t n1 = o.n1 == 0 ? o.n / 2 : o.n1;
  const auto grid = unit_grid(o.t_step);
  const auto r = check_t_monotonicity(o.n, n1, o.p, grid, o.samples, o.seed, o.beta, o.workers);
  Verdict v;
  v.passed = r.monotone;
  v.report = {{"check", "monotonicity"},
              {"parameters",
               {{"N", o.n},
                {"N1", n1},
                {"P", o.p},
                {"beta", o.beta},
                {"beta_extrapolated", o.beta != 1.0},
                {"t_step", o.t_step},
                {"slack", r.slack}}},
              {"samples", r.samples},
              {"max_derivative", r.max_derivative},
              {"passed", v.passed},
              {"alpha_t", r.alpha_t},
              {"worst_case", {{"seed", r.worst_seed}, {"sample", r.worst_sample}}}};
  v.summary = "max_derivative " + num(r.max_derivative) + " (slack " + num(r.slack) + ")";
  return v;
}

// alpha_N for N = 2..n; passes when the running infimum sits in the last five sizes.
Verdict verify_fekete(const Options& o) {
  const auto kind = ModelKind::parse(o.model);
  if (o.n < 7) throw InputError("fekete: --n must be at least 7");
  const std::size_t first = std::max<std::size_t>(2, o.p);
  json rows = json::array();
  std::vector<Estimate> alpha;
  std::vector<std::size_t> sizes;
  for (std::size_t n = first; n <= o.n; ++n) {
    sizes.push_back(n);
    alpha.push_back(quenched_free_energy(kind, n, o.p, o.beta, o.samples, o.seed, o.workers));
    rows.push_back({{"N", n}, {"alpha", alpha.back().value}, {"stderr", alpha.back().standard_error}});
  }
  const auto global = std::min_element(alpha.begin(), alpha.end(),
                                       [](const Estimate& a, const Estimate& b) { return a.value < b.value; });
  const auto tail_begin = alpha.end() - 5;
  const auto tail = std::min_element(tail_begin, alpha.end(),
                                     [](const Estimate& a, const Estimate& b) { return a.value < b.value; });
  Verdict v;
  v.passed = tail->value <= global->value + tail->standard_error;
  json limit = nullptr;
  if (has_mean_field(kind) && o.p <= kMaxEnumeratedPatterns) {
    const auto r = solve_fixed_point(SelfConsistencyProblem(kind, o.p, o.beta), pure_start(o.p));
    limit = free_energy(kind, r.m, o.beta);
  }
  v.report = {{"check", "fekete"},
              {"parameters", {{"model", kind.name()}, {"N_max", o.n}, {"P", o.p}, {"beta", o.beta}}},
              {"samples", o.samples},
              {"min_alpha", global->value},
              {"tail_min_alpha", tail->value},
              {"alpha_infinity", limit},
              {"passed", v.passed},
              {"rows", rows},
              {"worst_case", {{"seed", o.seed}, {"N", sizes[static_cast<std::size_t>(global - alpha.begin())]}}}};
  v.summary = "min alpha " + num(global->value) + ", tail min " + num(tail->value);
  return v;
}

Verdict verify_fluctuation_interpolation(const Options& o) {
  constexpr double kRelativeTolerance = 0.15;
  const auto grid = unit_grid(o.t_step);
  auto config = dynamics_config(o);
  const auto rows = check_fluctuation_interpolation(o.n, o.p, o.beta, grid, o.runs, config, o.workers);
  json out = json::array();
  double worst = 0.0;
  double worst_t = 0.0;
  for (const auto& r : rows) {
    const double rel = std::abs(r.value - r.theory) / r.theory;
    if (rel >= worst) {
      worst = rel;
      worst_t = r.t;
    }
    out.push_back({{"t", r.t}, {"value", r.value}, {"stderr", r.standard_error}, {"theory", r.theory}, {"exact", r.exact}});
  }
  Verdict v;
  v.passed = worst <= kRelativeTolerance;
  v.report = {{"check", "fluctuation-interpolation"},
              {"parameters",
               {{"N", o.n}, {"P", o.p}, {"beta", o.beta}, {"t_step", o.t_step}, {"tolerance", kRelativeTolerance}}},
              {"samples", o.runs},
              {"max_relative_error", worst},
              {"passed", v.passed},
              {"rows", out},
              {"worst_case", {{"seed", o.seed}, {"t", worst_t}}}};
  v.summary = "max relative error " + num(worst);
  return v;
}

int cmd_verify(Options o, const Header& h, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, std::function<Verdict(const Options&)>> checks = {
      {"convexity", verify_convexity},
      {"subadditivity", verify_subadditivity},
      {"monotonicity", verify_monotonicity},
      {"fekete", verify_fekete},
      {"fluctuation-interpolation", verify_fluctuation_interpolation},
  };
  const auto it = checks.find(o.check);
  if (it == checks.end()) throw InputError("unknown check '" + o.check + "'");
  if (o.out.empty()) o.out = "relhop-verify-" + o.check + ".json";
  Sink sink(o.out, out);

  Verdict v = it->second(o);
  json report = {{"header", h.as_json()}};
  report.update(v.report);
  sink.stream() << report.dump(2) << '\n';
  sink.finish();
  out << o.check << ": " << (v.passed ? "passed" : "FAILED") << " (" << v.summary << ")\n";
  if (!v.passed) {
    err << "verification failed: " << o.check << "; report: " << o.out << '\n';
    return kVerificationFailed;
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// plot

struct Table {
  std::string path;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InputError(path + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }
  bool has(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
  }
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

Table read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  Table t{path, {}, {}};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_csv(line);
    if (t.columns.empty()) {
      t.columns = std::move(fields);
      continue;
    }
    if (fields.size() != t.columns.size()) throw InputError(path + ": ragged row '" + line + "'");
    t.rows.push_back(std::move(fields));
  }
  if (t.rows.empty()) throw InputError(path + ": no data rows");
  return t;
}

double to_double(const std::string& s, const std::string& path) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw InputError(path + ": not a number '" + s + "'");
  return v;
}

struct PlotRow {
  double classical = std::numeric_limits<double>::quiet_NaN();
  double relativistic = std::numeric_limits<double>::quiet_NaN();
  double theory = std::numeric_limits<double>::quiet_NaN();
  bool relativistic_theory = false;
};

int cmd_plot(const Options& o, const Header& h, std::ostream& out) {
  if (o.inputs.empty()) throw InputError("plot: no input files");
  const std::string prefix = o.out.empty() ? "relhop-plot" : o.out;
  const std::string data_path = prefix + ".dat";
  const std::string script_path = prefix + ".gp";
  std::vector<Table> tables;
  for (const auto& path : o.inputs) tables.push_back(read_table(path));
  const bool curves = tables.front().has("mean_m1");
  const std::string value_column = curves ? "mean_m1" : "frequency";

  // Keyed by 1/beta rounded to 1e-6 so both model files join on the same grid.
  std::map<long long, std::pair<double, PlotRow>> joined;
  for (const auto& t : tables) {
    const std::size_t model_col = t.column("model");
    const std::size_t beta_col = t.column("beta");
    const std::size_t value_col = t.column(value_column);
    const std::optional<std::size_t> theory_col =
        curves ? std::optional<std::size_t>(t.column("meanfield_m1")) : std::nullopt;
    for (const auto& row : t.rows) {
      const double inv = inverse(to_double(row[beta_col], t.path));
      if (!std::isfinite(inv)) continue;
      const auto key = std::llround(inv * 1e6);
      auto& [x, cell] = joined[key];
      x = static_cast<double>(key) * 1e-6;
      const double value = to_double(row[value_col], t.path);
      const auto kind = ModelKind::parse(row[model_col]);
      const bool relativistic = kind.family() == ModelKind::Family::Relativistic;
      (relativistic ? cell.relativistic : cell.classical) = value;
      if (theory_col) {
        const double th = to_double(row[*theory_col], t.path);
        if (!std::isnan(th) && (relativistic || !cell.relativistic_theory)) {
          cell.theory = th;
          cell.relativistic_theory = relativistic;
        }
      }
    }
  }

  Sink data(data_path, out);
  Sink script(script_path, out);
  auto cell_text = [](double v) { return std::isnan(v) ? std::string("NaN") : num(v); };
  auto& d = data.stream();
  d << h.comment() << '\n';
  d << "# inv_beta classical relativistic theory\n";
  for (const auto& [key, entry] : joined)
    d << cell_text(entry.first) << ' ' << cell_text(entry.second.classical) << ' '
      << cell_text(entry.second.relativistic) << ' ' << cell_text(entry.second.theory) << '\n';
  data.finish();

  auto& s = script.stream();
  s << h.comment() << '\n';
  s << "set terminal pngcairo size 800,600\n";
  s << "set output '" << prefix << ".png'\n";
  s << "set datafile missing 'NaN'\n";
  s << "set xlabel '1/beta'\n";
  s << "set ylabel '" << (curves ? "overlap with the retrieved pattern" : "retrieval frequency") << "'\n";
  s << "set yrange [0:1.05]\n";
  s << "set key top right\n";
  s << "plot '" << data_path << "' using 1:2 with points pt 4 title 'classical', \\\n";
  s << "     '' using 1:3 with points pt 6 title 'relativistic'";
  if (curves) s << ", \\\n     '' using 1:4 with lines lw 2 title 'mean field'";
  s << '\n';
  script.finish();

  out << "wrote " << data_path << " and " << script_path << '\n';
  return kSuccess;
}

// ---------------------------------------------------------------------------

std::uint64_t default_seed() {
  const char* env = std::getenv("RELHOP_SEED");
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  const std::string text(env);
  std::uint64_t value = 0;
  std::size_t used = 0;
  try {
    if (text.front() == '-') throw std::invalid_argument("negative");
    value = std::stoull(text, &used, 10);
  } catch (const std::exception&) {
    throw InputError("RELHOP_SEED is not a 64-bit unsigned integer: '" + text + "'");
  }
  if (used != text.size()) throw InputError("RELHOP_SEED is not a 64-bit unsigned integer: '" + text + "'");
  return value;
}

void add_model(CLI::App* app, Options& o) {
  app->add_option("--model", o.model, "classical, relativistic or truncated:K")->capture_default_str();
}
void add_size(CLI::App* app, Options& o) {
  app->add_option("--n", o.n, "number of neurons N")->capture_default_str();
  app->add_option("--p", o.p, "number of patterns P")->capture_default_str();
}
void add_grid(CLI::App* app, Options& o) {
  app->add_option("--beta-grid", o.beta_grid, "START:STOP:STEP in beta");
  app->add_option("--inv-beta-grid", o.inv_beta_grid, "START:STOP:STEP in noise 1/beta");
}
void add_dynamics(CLI::App* app, Options& o) {
  app->add_option("--runs", o.runs, "independent runs per grid point")->capture_default_str();
  app->add_option("--sweeps", o.sweeps, "measurement sweeps")->capture_default_str();
  app->add_option("--equil", o.equil, "equilibration sweeps")->capture_default_str();
  app->add_option("--init", o.init, "random, pattern:K or corrupted:K:F")->capture_default_str();
  app->add_option("--rule", o.rule, "glauber or metropolis")->capture_default_str();
}
void add_seed(CLI::App* app, Options& o) {
  app->add_option("--seed", o.seed, "master seed (default from RELHOP_SEED)")->capture_default_str();
  app->add_option("--workers", o.workers, "worker threads (0 = all hardware threads)")->capture_default_str();
}
void add_solver(CLI::App* app, Options& o) {
  app->add_option("--damping", o.damping, "fixed-point damping in (0, 1]")->capture_default_str();
  app->add_option("--tol", o.tol, "fixed-point tolerance")->capture_default_str();
}
void add_output(CLI::App* app, Options& o) {
  app->add_option("--out", o.out, "output file (default: standard output)");
  app->add_option("--format", o.format, "csv or json")->capture_default_str();
}

}  // namespace

std::string version() { return RELHOP_VERSION; }

std::vector<double> parse_grid(std::string_view text) {
  const std::string s(text);
  const auto first = s.find(':');
  const auto second = first == std::string::npos ? std::string::npos : s.find(':', first + 1);
  if (second == std::string::npos || s.find(':', second + 1) != std::string::npos)
    throw InputError("grid '" + s + "' is not of the form START:STOP:STEP");
  auto parse = [&](const std::string& part) {
    char* end = nullptr;
    const double v = std::strtod(part.c_str(), &end);
    if (part.empty() || end != part.c_str() + part.size() || !std::isfinite(v))
      throw InputError("grid '" + s + "': '" + part + "' is not a number");
    return v;
  };
  const double start = parse(s.substr(0, first));
  const double stop = parse(s.substr(first + 1, second - first - 1));
  const double step = parse(s.substr(second + 1));
  if (!(step > 0.0)) throw InputError("grid '" + s + "': step must be positive");
  if (!(start < stop)) throw InputError("grid '" + s + "': start must be below stop");
  const double span = (stop - start) / step;
  if (span > 1e6) throw InputError("grid '" + s + "' has too many points");
  const auto intervals = static_cast<std::size_t>(std::floor(span + 1e-9));
  std::vector<double> grid(intervals + 1);
  for (std::size_t k = 0; k <= intervals; ++k) grid[k] = start + static_cast<double>(k) * step;
  return grid;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::string command = "relhop";
  for (const auto& a : args) command += " " + a;

  try {
    const std::uint64_t seed = default_seed();

    CLI::App app{"Classical and relativistic Hopfield networks: simulation, mean-field theory and checks", "relhop"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version());

    Options sim;
    sim.seed = seed;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo overlap curve joined with the mean-field solution");
    add_model(simulate, sim);
    add_size(simulate, sim);
    add_grid(simulate, sim);
    add_dynamics(simulate, sim);
    add_seed(simulate, sim);
    add_solver(simulate, sim);
    add_output(simulate, sim);
    simulate->add_option("--observable", sim.observable, "retrieved (max_mu |m_mu|) or m1 (signed)")
        ->capture_default_str();

    Options ret;
    ret.seed = seed;
    ret.init = "random";
    ret.runs = 200;
    auto* retrieval = app.add_subcommand("retrieval", "fraction of runs ending in a pure-state attractor");
    add_model(retrieval, ret);
    add_size(retrieval, ret);
    add_grid(retrieval, ret);
    add_dynamics(retrieval, ret);
    add_seed(retrieval, ret);
    add_output(retrieval, ret);
    retrieval->add_option("--threshold", ret.threshold, "pure-state threshold in (0.5, 1]")->capture_default_str();

    Options sol;
    sol.seed = seed;
    sol.p = 1;
    sol.format = "json";
    auto* solve = app.add_subcommand("solve", "solve the mean-field self-consistency equation");
    add_model(solve, sol);
    solve->add_option("--p", sol.p, "number of patterns P")->capture_default_str();
    solve->add_option("--beta", sol.beta, "inverse noise level")->capture_default_str();
    add_solver(solve, sol);
    add_output(solve, sol);

    Options scn;
    scn.seed = seed;
    scn.p = 1;
    auto* scan = app.add_subcommand("scan", "locate the critical point on a beta grid");
    add_model(scan, scn);
    scan->add_option("--p", scn.p, "number of patterns P")->capture_default_str();
    add_grid(scan, scn);
    add_solver(scan, scn);
    add_output(scan, scn);

    Options flu;
    flu.seed = seed;
    flu.n = 1000;
    flu.p = 1;
    flu.init = "random";
    flu.runs = 20;
    flu.equil = 200;
    flu.sweeps = 2000;
    auto* fluct = app.add_subcommand("fluctuations", "rescaled overlap fluctuations N<m_1^2> in the ergodic phase");
    add_model(fluct, flu);
    add_size(fluct, flu);
    auto* fluct_beta = fluct->add_option("--beta", flu.beta, "single inverse noise level");
    add_grid(fluct, flu);
    add_dynamics(fluct, flu);
    add_seed(fluct, flu);
    add_output(fluct, flu);

    Options ver;
    ver.seed = seed;
    ver.n = 12;
    ver.p = 1;
    ver.samples = 50;
    ver.init = "random";
    ver.runs = 20;
    ver.equil = 200;
    ver.sweeps = 2000;
    ver.t_step = 0.05;
    auto* verify = app.add_subcommand("verify", "numerical checks; exit status 2 when a check fails");
    verify
        ->add_option("check", ver.check,
                     "convexity, subadditivity, monotonicity, fekete or fluctuation-interpolation")
        ->required();
    add_model(verify, ver);
    add_size(verify, ver);
    verify->add_option("--beta", ver.beta, "inverse noise level")->capture_default_str();
    verify->add_option("--n1", ver.n1, "size of the first subsystem (default N/2)");
    verify->add_option("--samples", ver.samples, "pattern samples")->capture_default_str();
    verify->add_option("--resolution", ver.resolution, "grid points per axis (convexity)")->capture_default_str();
    verify->add_option("--t-step", ver.t_step, "spacing of the t grid")->capture_default_str();
    add_dynamics(verify, ver);
    add_seed(verify, ver);
    verify->add_option("--out", ver.out, "report file (default relhop-verify-<check>.json)");

    Options plt;
    auto* plot = app.add_subcommand("plot", "join curve or retrieval CSVs into gnuplot data and script");
    plot->add_option("inputs", plt.inputs, "CSV files written by simulate or retrieval");
    plot->add_option("--out", plt.out, "output prefix for .dat and .gp (default relhop-plot)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kSuccess : kInputError;
    }

    if (simulate->parsed()) return cmd_simulate(sim, {command, sim.seed}, out);
    if (retrieval->parsed()) return cmd_retrieval(ret, {command, ret.seed}, out);
    if (solve->parsed()) return cmd_solve(sol, {command, sol.seed}, out);
    if (scan->parsed()) return cmd_scan(scn, {command, scn.seed}, out);
    if (fluct->parsed()) {
      const bool single = fluct_beta->count() > 0;
      if (single && (!flu.beta_grid.empty() || !flu.inv_beta_grid.empty()))
        throw InputError("give either --beta or a grid, not both");
      return cmd_fluctuations(flu, single, {command, flu.seed}, out);
    }
    if (verify->parsed()) return cmd_verify(ver, {command, ver.seed}, out, err);
    if (plot->parsed()) return cmd_plot(plt, {command, seed}, out);
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kInputError;
}

}  // namespace relhop::cli
