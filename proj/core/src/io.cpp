#include "segrex/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace segrex {

namespace {

using nlohmann::json;

std::size_t sample_count(const json& j, std::optional<std::size_t> grid_m) {
  if (grid_m) return *grid_m;
  if (!j.contains("m") || !j["m"].is_number_integer()) throw std::invalid_argument("datum: missing integer field \"m\"");
  const auto m = j["m"].get<long long>();
  if (m <= 0) throw std::invalid_argument("datum: \"m\" must be positive");
  return static_cast<std::size_t>(m);
}

std::vector<double> numbers(const json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string("datum: ") + what + " must be an array");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw std::invalid_argument(std::string("datum: ") + what + " must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

const json& section(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_object()) throw std::invalid_argument(std::string("datum: missing object \"") + key + "\"");
  return j[key];
}

std::string fmt17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && *b == ' ') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) throw std::invalid_argument("not a number: \"" + s + "\"");
  return v;
}

json point(Vec2 p) { return json::array({p.x, p.y}); }

}  // namespace

BoundaryDatum parse_datum(const std::string& json_text, std::optional<std::size_t> grid_m) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("datum: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw std::invalid_argument("datum: missing string field \"kind\"");
  }
  const std::string kind = j["kind"].get<std::string>();
  const std::size_t m = sample_count(j, grid_m);
  if (kind == "samples") {
    const auto& phi = section(j, "samples");
    if (!phi.contains("phi") || !phi["phi"].is_array() || phi["phi"].size() != kSpecies) {
      throw std::invalid_argument("datum: samples.phi must hold four arrays");
    }
    std::array<TraceFunction, kSpecies> traces{TraceFunction::zeros(16), TraceFunction::zeros(16),
                                               TraceFunction::zeros(16), TraceFunction::zeros(16)};
    for (std::size_t i = 0; i < kSpecies; ++i) {
      auto v = numbers(phi["phi"][i], "samples.phi[i]");
      if (!grid_m && v.size() != m) throw std::invalid_argument("datum: samples.phi[i] length differs from m");
      TraceFunction t(std::move(v));
      if (t.size() != m) t = TraceFunction::sample(m, [&](double th) { return t.at(th); });
      traces[i] = std::move(t);
    }
    return BoundaryDatum(std::move(traces));
  }
  if (kind == "quadrant") {
    const auto c = numbers(section(j, "quadrant").value("coeffs", json()), "quadrant.coeffs");
    if (c.size() != kSpecies) throw std::invalid_argument("datum: quadrant.coeffs must hold four numbers");
    return BoundaryDatum(quadrant_traces({c[0], c[1], c[2], c[3]}, m));
  }
  if (kind == "trig_poly") {
    const auto& tp = section(j, "trig_poly");
    TrigPolynomial poly;
    poly.a = numbers(tp.value("a", json::array()), "trig_poly.a");
    poly.b = numbers(tp.value("b", json::array()), "trig_poly.b");
    return make_polynomial_datum(poly, m).datum;
  }
  throw std::invalid_argument("datum: unknown kind \"" + kind + "\"");
}

BoundaryDatum read_datum(const std::string& path, std::optional<std::size_t> grid_m) {
  return parse_datum(read_text_file(path), grid_m);
}

std::string datum_to_json(const BoundaryDatum& datum) {
  json phi = json::array();
  for (int i = 0; i < kSpecies; ++i) {
    const auto v = datum.trace(i).values();
    phi.push_back(std::vector<double>(v.begin(), v.end()));
  }
  json j;
  j["m"] = datum.m();
  j["kind"] = "samples";
  j["samples"] = {{"phi", phi}};
  return j.dump();
}

void write_field_csv(std::ostream& os, const DiskMesh& mesh, const Densities& u) {
  for (const auto& f : u) {
    if (f.size() != mesh.vertex_count()) throw std::invalid_argument("field size does not match the mesh");
  }
  os << "x,y,u1,u2,u3,u4\n";
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    os << fmt17(mesh.vertices[v].x) << ',' << fmt17(mesh.vertices[v].y);
    for (const auto& f : u) os << ',' << fmt17(f[v]);
    os << '\n';
  }
}

FieldTable read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("field CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,u1,u2,u3,u4") throw std::invalid_argument("field CSV header must be x,y,u1,u2,u3,u4");
  FieldTable t;
  std::array<std::vector<double>, kSpecies> cols;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(parse_double(cell));
    if (v.size() != 6) throw std::invalid_argument("field CSV row " + std::to_string(row) + " needs 6 values");
    t.points.push_back({v[0], v[1]});
    for (std::size_t i = 0; i < kSpecies; ++i) cols[i].push_back(v[i + 2]);
  }
  for (std::size_t i = 0; i < kSpecies; ++i) t.u[i] = Field(std::move(cols[i]));
  return t;
}

void write_mesh(std::ostream& os, const DiskMesh& mesh) {
  os << "vertices " << mesh.vertex_count() << '\n';
  for (const auto& p : mesh.vertices) os << fmt17(p.x) << ' ' << fmt17(p.y) << '\n';
  os << "triangles " << mesh.triangle_count() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

DiskMesh read_mesh(std::istream& is) {
  std::string word;
  std::size_t n = 0;
  if (!(is >> word >> n) || word != "vertices") throw std::invalid_argument("mesh file must start with \"vertices N\"");
  std::vector<Vec2> verts(n);
  for (auto& p : verts) {
    if (!(is >> p.x >> p.y)) throw std::invalid_argument("mesh file: truncated vertex list");
  }
  std::size_t nt = 0;
  if (!(is >> word >> nt) || word != "triangles") throw std::invalid_argument("mesh file: missing \"triangles T\" section");
  std::vector<std::array<int, 3>> tris(nt);
  for (auto& t : tris) {
    if (!(is >> t[0] >> t[1] >> t[2])) throw std::invalid_argument("mesh file: truncated triangle list");
  }
  return make_mesh(std::move(verts), std::move(tris));
}

Densities densities_on_mesh(const DiskMesh& mesh, const FieldTable& table) {
  if (table.points.size() != mesh.vertex_count()) {
    throw std::invalid_argument("field has " + std::to_string(table.points.size()) + " rows but the mesh has " +
                                std::to_string(mesh.vertex_count()) + " vertices");
  }
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    if (distance(table.points[v], mesh.vertices[v]) > 1e-9) {
      throw std::invalid_argument("field row " + std::to_string(v) + " does not sit on mesh vertex " + std::to_string(v));
    }
  }
  return table.u;
}

std::string classification_to_json(const Classification& c) {
  const auto& d = c.diagnostics;
  json diag;
  diag["delta"] = d.delta;
  diag["rho"] = d.rho;
  diag["gap"] = d.gap ? json(*d.gap) : json();
  diag["gap_reference"] = d.gap_reference;
  if (d.moments) diag["moments"] = {{"c1", d.moments->c1}, {"c2", point(d.moments->c2)}};
  if (d.xi_signs) diag["xi_signs"] = std::vector<int>(d.xi_signs->begin(), d.xi_signs->end());
  diag["fit_residuals"] = d.fit_residuals;
  json found = json::array();
  for (const auto& p : d.found) {
    found.push_back({{"location", point(p.location)}, {"multiplicity", p.multiplicity}, {"on_boundary", p.on_boundary}});
  }
  diag["found"] = found;
  diag["notes"] = d.notes;
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back(point(p));
  json j;
  j["kind"] = to_string(c.kind);
  j["points"] = pts;
  j["on_boundary"] = c.on_boundary;
  j["diagnostics"] = diag;
  return j.dump(2);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace segrex
