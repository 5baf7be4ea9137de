#include "segrex/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "segrex/boundary.hpp"
#include "segrex/classify.hpp"
#include "segrex/conformal.hpp"
#include "segrex/errors.hpp"
#include "segrex/harmonic.hpp"
#include "segrex/io.hpp"
#include "segrex/mesh.hpp"
#include "segrex/pde.hpp"
#include "segrex/render.hpp"

namespace segrex::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string datum;
  std::string perturbation;
  std::string field;
  std::string mesh;
  std::string out = ".";
  std::string p = "0,0";
  std::string scheme = "jacobi";
  std::string sweep_kind;
  std::vector<double> values;
  double mu = 100.0;
  double tol = 1e-8;
  int rings = 60;
  int sectors = 256;
  int sweeps = 20;
  int jobs = 1;
  int levels = 10;
  std::size_t grid_m = 0;
  bool extended = false;
};

// Collects what a run read, wrote and how it was configured.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv)
      : command_(std::move(command)), argv_(std::move(argv)), start_(std::chrono::steady_clock::now()) {}

  void input(const std::string& path) { inputs_.push_back(path); }
  void output(const std::string& path) { outputs_.push_back(path); }
  json& config() { return config_; }

  void write(const std::string& dir) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json j;
    j["command"] = command_;
    j["argv"] = argv_;
    j["inputs"] = inputs_;
    j["config"] = config_;
    j["outputs"] = outputs_;
    j["wall_time_s"] = wall;
    j["version"] = SEGREX_VERSION;
    write_text_file((fs::path(dir) / ("manifest-" + command_ + ".json")).string(), j.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  json config_ = json::object();
  std::chrono::steady_clock::time_point start_;
};

std::optional<std::size_t> grid_override(const Options& o) {
  if (o.grid_m == 0) return std::nullopt;
  return o.grid_m;
}

BoundaryDatum load_datum(const Options& o, Manifest& man) {
  if (o.datum.empty()) throw std::invalid_argument("--datum is required");
  man.input(o.datum);
  return read_datum(o.datum, grid_override(o));
}

SolverConfig solver_config(const Options& o) {
  SolverConfig c;
  c.mu = o.mu;
  c.outer_sweeps = o.sweeps;
  c.tol = o.tol;
  c.rings = o.rings;
  c.sectors = o.sectors;
  c.scheme = o.scheme == "gauss-seidel" ? SweepScheme::GaussSeidel : SweepScheme::Jacobi;
  return c;
}

json solver_json(const SolverConfig& c) {
  return {{"mu", c.mu},
          {"sweeps", c.outer_sweeps},
          {"tol", c.tol},
          {"rings", c.rings},
          {"sectors", c.sectors},
          {"scheme", c.scheme == SweepScheme::GaussSeidel ? "gauss-seidel" : "jacobi"}};
}

CriticalPointOptions critical_options(const Options& o) {
  CriticalPointOptions c;
  if (const char* env = std::getenv("SEGREX_SEED_GRID")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 2 || n > 4096) {
      throw std::invalid_argument(std::string("SEGREX_SEED_GRID must be an integer in [2, 4096], got \"") + env + "\"");
    }
    c.radial_seeds = static_cast<int>(n);
    c.angular_seeds = static_cast<int>(n);
  }
  c.extended = o.extended;
  return c;
}

std::string out_path(const Options& o, const std::string& name) {
  fs::create_directories(o.out);
  return (fs::path(o.out) / name).string();
}

void write_state(const Options& o, const SystemState& s, Manifest& man, const std::string& prefix = "") {
  std::ostringstream csv, mesh;
  write_field_csv(csv, *s.mesh, s.u);
  write_mesh(mesh, *s.mesh);
  const auto fpath = out_path(o, prefix + "field.csv");
  const auto mpath = out_path(o, prefix + "mesh.txt");
  write_text_file(fpath, csv.str());
  write_text_file(mpath, mesh.str());
  man.output(fpath);
  man.output(mpath);
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

Vec2 parse_point(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("point must be x,y");
  std::size_t used = 0;
  const std::string xs = s.substr(0, comma), ys = s.substr(comma + 1);
  const double x = std::stod(xs, &used);
  if (used != xs.size()) throw std::invalid_argument("point must be x,y");
  const double y = std::stod(ys, &used);
  if (used != ys.size()) throw std::invalid_argument("point must be x,y");
  return {x, y};
}

// ---- subcommands ----------------------------------------------------------

int cmd_validate(const Options& o, Manifest& man, std::ostream& out) {
  const auto d = load_datum(o, man);
  const auto rep = validate(d);
  man.config()["m"] = d.m();
  if (rep.admissible) {
    out << "admissible\n";
    const auto e = endpoints(d);
    out << "endpoints:";
    for (double a : e) out << ' ' << num(a);
    out << '\n';
    return kExitOk;
  }
  out << "inadmissible\n";
  for (const auto& v : rep.violations) out << v.rule << " at " << num(v.angle) << ": " << v.detail << '\n';
  return kExitDomain;
}

int cmd_harmonic(const Options& o, Manifest& man, std::ostream& out) {
  const auto d = load_datum(o, man);
  require_admissible(d);
  const auto psi = alternating_trace(d);
  auto copts = critical_options(o);
  man.config()["seeds"] = copts.radial_seeds;
  man.config()["extended"] = copts.extended;
  const auto cps = critical_points(psi, copts);
  out << "critical_points " << cps.size() << '\n';
  for (const auto& c : cps) {
    out << "  " << num(c.location.x) << ' ' << num(c.location.y) << " value=" << num(c.value)
        << " kind=" << (c.kind == CriticalKind::saddle ? "saddle" : "degenerate") << '\n';
  }
  FourPointOptions fo;
  fo.critical = critical_options(o);
  fo.critical.extended = false;
  const auto fp = find_fourpoint(d, fo);
  if (fp) {
    out << "four_point " << num(fp->location.x) << ' ' << num(fp->location.y) << '\n';
  } else {
    out << "four_point none\n";
  }
  const DiskMesh mesh = build_mesh(o.rings, o.sectors);
  SystemState s;
  s.mesh = std::make_shared<DiskMesh>(mesh);
  s.u = split_harmonic_state(mesh, d, kAlternatingSigns);
  write_state(o, s, man, "harmonic-");
  return kExitOk;
}

int cmd_conditions(const Options& o, Manifest& man, std::ostream& out) {
  const auto d = load_datum(o, man);
  const Vec2 p = parse_point(o.p);
  man.config()["p"] = {p.x, p.y};
  const auto mv = moment_conditions(d, p);
  char buf[128];
  std::snprintf(buf, sizeof buf, "c1=%.12f\nc2=%.12f,%.12f\n", mv.c1, mv.c2.x, mv.c2.y);
  out << buf;
  return kExitOk;
}

void report_state(const SystemState& s, std::ostream& out) {
  out << "sweeps " << s.sweeps << " converged " << (s.converged ? "yes" : "no") << " last_change "
      << num(s.residual_history.back()) << '\n';
  out << "max_overlap " << num(max_off_diagonal(overlap(s))) << " energy " << num(energy(s)) << '\n';
  for (const auto& w : s.warnings) out << "warning: " << w << '\n';
}

int cmd_solve(const Options& o, Manifest& man, std::ostream& out) {
  const auto d = load_datum(o, man);
  const auto cfg = solver_config(o);
  man.config()["solver"] = solver_json(cfg);
  const auto s = solve_system(d, cfg);
  report_state(s, out);
  man.config()["residual_history"] = s.residual_history;
  write_state(o, s, man);
  return kExitOk;
}

int cmd_classify(const Options& o, Manifest& man, std::ostream& out) {
  const auto d = load_datum(o, man);
  SystemState s;
  if (!o.field.empty() || !o.mesh.empty()) {
    if (o.field.empty() || o.mesh.empty()) throw std::invalid_argument("--field and --mesh go together");
    man.input(o.field);
    man.input(o.mesh);
    std::istringstream ms(read_text_file(o.mesh)), fsx(read_text_file(o.field));
    auto mesh = std::make_shared<DiskMesh>(read_mesh(ms));
    s.u = densities_on_mesh(*mesh, read_field_csv(fsx));
    s.mesh = mesh;
  } else {
    const auto cfg = solver_config(o);
    man.config()["solver"] = solver_json(cfg);
    s = solve_system(d, cfg);
    write_state(o, s, man);
  }
  const auto c = classify(s, d);
  const auto text = classification_to_json(c);
  out << text << '\n';
  const auto path = out_path(o, "classification.json");
  write_text_file(path, text + "\n");
  man.output(path);
  return kExitOk;
}

struct SweepRow {
  double value = 0.0;
  int sign = 1;
  std::string kind;
  std::vector<Vec2> points;
  double overlap = 0.0;
  double energy = 0.0;
  double gap_l2 = 0.0;
  std::optional<double> l2_to_base;
  int sweeps = 0;
  bool converged = false;
  std::string status = "ok";
  Densities u;
  std::shared_ptr<const DiskMesh> mesh;
};

BoundaryDatum perturbed(const BoundaryDatum& base, const BoundaryDatum& pert, double eps, int sign) {
  std::array<TraceFunction, kSpecies> t{base.trace(0), base.trace(1), base.trace(2), base.trace(3)};
  for (int i = 0; i < kSpecies; ++i) t[static_cast<std::size_t>(i)] += (sign * eps) * pert.trace(i);
  return BoundaryDatum(std::move(t));
}

double l2_distance(const DiskMesh& mesh, const Densities& a, const Densities& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < kSpecies; ++i) {
    Field d(mesh.vertex_count());
    for (std::size_t v = 0; v < d.size(); ++v) d[v] = a[i][v] - b[i][v];
    const double n = l2_norm(mesh, d);
    s += n * n;
  }
  return std::sqrt(s);
}

void run_one(SweepRow& row, const BoundaryDatum& d, const SolverConfig& cfg,
             std::shared_ptr<const DiskMesh> mesh) {
  try {
    auto s = solve_system(mesh, d, cfg);
    row.sweeps = s.sweeps;
    row.converged = s.converged;
    row.overlap = max_off_diagonal(overlap(s));
    row.energy = energy(s);
    Field diff = s.total();
    const Field psi = field_on_grid(alternating_trace(d), *mesh);
    for (std::size_t v = 0; v < diff.size(); ++v) diff[v] -= std::abs(psi[v]);
    row.gap_l2 = l2_norm(*mesh, diff);
    row.u = s.u;
    row.mesh = mesh;
    try {
      const auto c = classify(s, d);
      row.kind = to_string(c.kind);
      row.points = c.points;
    } catch (const ClassificationError& e) {
      row.kind = "unclassified";
      for (const auto& p : e.found()) row.points.push_back(p.location);
      row.status = e.what();
    }
  } catch (const std::exception& e) {
    row.kind = "failed";
    row.status = e.what();
  }
}

int cmd_sweep(const Options& o, Manifest& man, std::ostream& out, std::ostream& err) {
  const bool eps = o.sweep_kind == "epsilon";
  const auto base = load_datum(o, man);
  std::optional<BoundaryDatum> pert;
  if (eps) {
    if (o.perturbation.empty()) throw std::invalid_argument("epsilon sweeps need --perturbation");
    man.input(o.perturbation);
    pert = read_datum(o.perturbation, base.m());
  }
  const auto cfg0 = solver_config(o);
  man.config()["solver"] = solver_json(cfg0);
  man.config()["kind"] = o.sweep_kind;
  man.config()["values"] = o.values;

  std::vector<SweepRow> rows(o.values.size());
  std::vector<std::optional<BoundaryDatum>> data(o.values.size());
  for (std::size_t i = 0; i < o.values.size(); ++i) {
    rows[i].value = o.values[i];
    if (!eps) {
      data[i] = base;
      continue;
    }
    // One of base +- eps * perturbation is admissible for small eps.
    for (int sign : {+1, -1}) {
      auto d = perturbed(base, *pert, o.values[i], sign);
      if (validate(d).admissible) {
        rows[i].sign = sign;
        data[i] = std::move(d);
        break;
      }
    }
    if (!data[i]) {
      throw DomainError("neither base + eps * perturbation nor base - eps * perturbation is admissible for eps = " +
                        num(o.values[i]));
    }
  }

  auto mesh = std::make_shared<const DiskMesh>(build_mesh(cfg0.rings, cfg0.sectors));
  std::optional<SweepRow> zero;
  if (eps && !o.values.empty()) {
    zero.emplace();
    require_admissible(base);
    run_one(*zero, base, cfg0, mesh);
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      SolverConfig cfg = cfg0;
      if (!eps) cfg.mu = rows[i].value;
      run_one(rows[i], *data[i], cfg, mesh);
    }
  };
  const int jobs = std::max(1, std::min<int>(o.jobs, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "value,sign,kind,p1x,p1y,p2x,p2y,separation,overlap,energy,gap_l2,l2_to_base,sweeps,converged,status\n";
  int code = kExitOk;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    if (zero && zero->mesh && r.mesh) r.l2_to_base = l2_distance(*mesh, r.u, zero->u);
    std::array<std::string, 4> pc{"", "", "", ""};
    for (std::size_t k = 0; k < std::min<std::size_t>(2, r.points.size()); ++k) {
      pc[2 * k] = num(r.points[k].x);
      pc[2 * k + 1] = num(r.points[k].y);
    }
    const std::string sep = r.points.size() == 2 ? num(distance(r.points[0], r.points[1])) : "";
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    csv << num(r.value) << ',' << r.sign << ',' << r.kind << ',' << pc[0] << ',' << pc[1] << ',' << pc[2] << ','
        << pc[3] << ',' << sep << ',' << num(r.overlap) << ',' << num(r.energy) << ',' << num(r.gap_l2) << ','
        << (r.l2_to_base ? num(*r.l2_to_base) : "") << ',' << r.sweeps << ',' << (r.converged ? 1 : 0) << ','
        << status << '\n';
    if (r.kind == "failed" || r.kind == "unclassified") code = kExitNumerical;
    if (eps && r.value > 0.0 && r.kind != "two_triple_points") {
      err << "epsilon sweep: eps=" << num(r.value) << " gave " << r.kind << " instead of two_triple_points\n";
      code = kExitNumerical;
    }
    if (r.mesh) {
      std::ostringstream f;
      write_field_csv(f, *mesh, r.u);
      const auto path = out_path(o, "sweep-" + std::to_string(i) + "-field.csv");
      write_text_file(path, f.str());
      man.output(path);
    }
  }
  if (std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.mesh != nullptr; })) {
    std::ostringstream m;
    write_mesh(m, *mesh);
    const auto path = out_path(o, "sweep-mesh.txt");
    write_text_file(path, m.str());
    man.output(path);
  }
  const auto path = out_path(o, "sweep.csv");
  write_text_file(path, csv.str());
  man.output(path);
  out << csv.str();
  return code;
}

int cmd_render(const Options& o, Manifest& man, std::ostream& out) {
  if (o.field.empty() || o.mesh.empty()) throw std::invalid_argument("render needs --field and --mesh");
  man.input(o.field);
  man.input(o.mesh);
  std::istringstream ms(read_text_file(o.mesh)), fsx(read_text_file(o.field));
  const auto mesh = read_mesh(ms);
  const auto u = densities_on_mesh(mesh, read_field_csv(fsx));
  RenderOptions ro;
  ro.levels = o.levels;
  man.config()["levels"] = o.levels;
  const auto svg = render_svg(mesh, u, ro);
  const auto path = out_path(o, "render.svg");
  write_text_file(path, svg);
  man.output(path);
  out << path << '\n';
  return kExitOk;
}

void add_solver_flags(CLI::App* sub, Options& o) {
  sub->add_option("--mu", o.mu, "interaction strength")->check(CLI::PositiveNumber);
  sub->add_option("--rings", o.rings, "mesh rings")->check(CLI::Range(1, 100000));
  sub->add_option("--sectors", o.sectors, "mesh sectors (multiple of 4)")->check(CLI::Range(8, 1000000));
  sub->add_option("--sweeps", o.sweeps, "fixed-point sweeps")->check(CLI::Range(1, 1000000));
  sub->add_option("--tol", o.tol, "early stop on the max nodal change")->check(CLI::NonNegativeNumber);
  sub->add_option("--scheme", o.scheme, "species update order")
      ->check(CLI::IsMember({"jacobi", "gauss-seidel"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"segrex: segregation limits of four competing species on the disk", "segrex"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SEGREX_VERSION);

  auto datum_flags = [&](CLI::App* sub) {
    sub->add_option("--datum", o.datum, "datum JSON")->required();
    sub->add_option("--grid-m", o.grid_m, "resample traces to this many samples")->check(CLI::Range(16, 1 << 24));
    sub->add_option("--out", o.out, "output directory");
  };
  auto* validate_cmd = app.add_subcommand("validate", "check admissibility of a datum");
  datum_flags(validate_cmd);
  auto* harmonic_cmd = app.add_subcommand("harmonic", "critical points and 4-point of psi_a");
  datum_flags(harmonic_cmd);
  harmonic_cmd->add_flag("--extended", o.extended, "follow critical points beyond the disk");
  harmonic_cmd->add_option("--rings", o.rings, "mesh rings for the exported field")->check(CLI::Range(1, 100000));
  harmonic_cmd->add_option("--sectors", o.sectors, "mesh sectors for the exported field")->check(CLI::Range(8, 1000000));
  auto* conditions_cmd = app.add_subcommand("conditions", "moment conditions at a point");
  datum_flags(conditions_cmd);
  conditions_cmd->add_option("--p", o.p, "point x,y in the disk");
  auto* solve_cmd = app.add_subcommand("solve", "solve the competition system");
  datum_flags(solve_cmd);
  add_solver_flags(solve_cmd, o);
  auto* classify_cmd = app.add_subcommand("classify", "classify a solved or given state");
  datum_flags(classify_cmd);
  add_solver_flags(classify_cmd, o);
  classify_cmd->add_option("--field", o.field, "field CSV instead of solving");
  classify_cmd->add_option("--mesh", o.mesh, "mesh file for --field");
  auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep over mu or epsilon");
  sweep_cmd->add_option("kind", o.sweep_kind, "mu | epsilon")->required()->check(CLI::IsMember({"mu", "epsilon"}));
  datum_flags(sweep_cmd);
  add_solver_flags(sweep_cmd, o);
  sweep_cmd->add_option("--values", o.values, "comma separated parameter values")->delimiter(',');
  sweep_cmd->add_option("--perturbation", o.perturbation, "perturbation datum for epsilon sweeps");
  sweep_cmd->add_option("--jobs", o.jobs, "parallel runs")->check(CLI::Range(1, 1024));
  auto* render_cmd = app.add_subcommand("render", "SVG contours of a field");
  render_cmd->add_option("--field", o.field, "field CSV")->required();
  render_cmd->add_option("--mesh", o.mesh, "mesh file")->required();
  render_cmd->add_option("--levels", o.levels, "contour levels")->check(CLI::Range(0, 10000));
  render_cmd->add_option("--out", o.out, "output directory");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  CLI::App* sub = app.get_subcommands().front();
  Manifest man(sub->get_name(), args);
  int code = kExitOk;
  try {
    const auto& name = sub->get_name();
    if (name == "validate") code = cmd_validate(o, man, out);
    else if (name == "harmonic") code = cmd_harmonic(o, man, out);
    else if (name == "conditions") code = cmd_conditions(o, man, out);
    else if (name == "solve") code = cmd_solve(o, man, out);
    else if (name == "classify") code = cmd_classify(o, man, out);
    else if (name == "sweep") code = cmd_sweep(o, man, out, err);
    else code = cmd_render(o, man, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    code = kExitNumerical;
  } catch (const DomainError& e) {
    err << "rejected: " << e.what() << '\n';
    code = kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = kExitDomain;
  }
  man.config()["exit_code"] = code;
  try {
    fs::create_directories(o.out);
    man.write(o.out);
  } catch (const std::exception& e) {
    err << "cannot write manifest: " << e.what() << '\n';
  }
  return code;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace segrex::cli
