#include <doctest.h>

#include <filesystem>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "segrex/boundary.hpp"
#include "segrex/cli.hpp"
#include "segrex/io.hpp"
#include "support.hpp"

using namespace segrex;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Fresh scratch directory per test case.
class Scratch {
 public:
  explicit Scratch(const std::string& name) : dir_(fs::temp_directory_path() / ("segrex-cli-test-" + name)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    write_text_file(path(name), text);
    return path(name);
  }

 private:
  fs::path dir_;
};

std::string quadrant_json(const std::string& coeffs, int m = 2048) {
  return R"({"m": )" + std::to_string(m) + R"(, "kind": "quadrant", "quadrant": {"coeffs": [)" + coeffs + "]}}";
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

double c1_of(const std::string& out) {
  const auto p = out.find("c1=");
  REQUIRE(p != std::string::npos);
  return std::stod(out.substr(p + 3));
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("validate") {
    Scratch s("validate");
    const auto d = s.write("d.json", quadrant_json("15, 15, 15, 15"));
    const auto r = run({"validate", "--datum", d, "--out", s.path("o")});
    CHECK(r.code == 0);
    CHECK(r.out.find("admissible") != std::string::npos);
    CHECK(fs::exists(s.path("o/manifest-validate.json")));
    const auto bad = s.write("bad.json", quadrant_json("0, 15, 15, 15"));
    CHECK(run({"validate", "--datum", bad, "--out", s.path("o")}).code == cli::kExitDomain);
  }

  TEST_CASE("conditions at the origin") {
    Scratch s("conditions");
    const auto d = s.write("d.json", quadrant_json("7, 15, 7, 15"));
    const auto r = run({"conditions", "--datum", d, "--p", "0,0", "--grid-m", "16384", "--out", s.path("o")});
    CHECK(r.code == 0);
    CHECK(std::abs(c1_of(r.out) - 8.0) <= 1e-6);
    const auto sym = s.write("s.json", quadrant_json("15, 15, 15, 15"));
    const auto z = run({"conditions", "--datum", sym, "--p", "0,0", "--out", s.path("o")});
    CHECK(z.code == 0);
    CHECK(std::abs(c1_of(z.out)) <= 1e-8);
    CHECK(run({"conditions", "--datum", d, "--p", "1.5,0", "--out", s.path("o")}).code != 0);
  }

  TEST_CASE("overlapping supports are a domain rejection") {
    Scratch s("solve-bad");
    auto t = test::traces_of(make_quadrant_datum({1, 1, 1, 1}, 64));
    t[1] = test::with_sample(t[1], 3, 0.2);
    const auto bad = s.write("bad.json", datum_to_json(BoundaryDatum(t)));
    const auto r = run({"solve", "--datum", bad, "--rings", "6", "--sectors", "16", "--out", s.path("o")});
    CHECK(r.code == cli::kExitDomain);
    CHECK(r.err.find("disjoint-supports") != std::string::npos);
  }

  TEST_CASE("usage errors") {
    CHECK(run({"bogus"}).code == cli::kExitUsage);
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"validate", "--frob"}).code == cli::kExitUsage);
    CHECK(run({"validate"}).code == cli::kExitUsage);
    CHECK(run({"solve", "--datum", "x.json", "--mu", "-1"}).code == cli::kExitUsage);
    CHECK(run({"--help"}).code == 0);
  }

  TEST_CASE("solve then render is reproducible") {
    Scratch s("render");
    const auto d = s.write("d.json", quadrant_json("15, 15, 15, 15"));
    for (const char* dir : {"a", "b"}) {
      REQUIRE(run({"solve", "--datum", d, "--rings", "20", "--sectors", "64", "--out", s.path(dir)}).code == 0);
      REQUIRE(run({"render", "--field", s.path(std::string(dir) + "/field.csv"), "--mesh",
                   s.path(std::string(dir) + "/mesh.txt"), "--levels", "8", "--out", s.path(dir)})
                  .code == 0);
    }
    for (const char* f : {"field.csv", "mesh.txt", "render.svg"}) {
      CHECK(read_text_file(s.path(std::string("a/") + f)) == read_text_file(s.path(std::string("b/") + f)));
    }
    const auto man = nlohmann::json::parse(read_text_file(s.path("a/manifest-solve.json")));
    CHECK(man.at("command") == "solve");
    CHECK(man.at("inputs").size() == 1);
    CHECK(man.at("outputs").size() == 2);
    CHECK(man.at("config").at("solver").is_object());
    CHECK(man.contains("wall_time_s"));
    CHECK(man.contains("version"));
    CHECK(run({"render", "--field", s.path("a/field.csv"), "--mesh", s.path("missing.txt"), "--out", s.path("a")}).code ==
          cli::kExitDomain);
  }

  TEST_CASE("classify from a solve or from files") {
    Scratch s("classify");
    const auto d = s.write("d.json", quadrant_json("7, 15, 7, 15"));
    const auto a = run({"classify", "--datum", d, "--rings", "30", "--sectors", "128", "--out", s.path("a")});
    REQUIRE(a.code == 0);
    const auto j = nlohmann::json::parse(read_text_file(s.path("a/classification.json")));
    CHECK(j.at("kind") == "two_triple_points");
    CHECK(j.at("points").size() == 2);
    const auto b = run({"classify", "--datum", d, "--field", s.path("a/field.csv"), "--mesh", s.path("a/mesh.txt"),
                        "--out", s.path("b")});
    REQUIRE(b.code == 0);
    // Solver notes only exist when the state comes from a solve.
    auto ja = nlohmann::json::parse(read_text_file(s.path("a/classification.json")));
    auto jb = nlohmann::json::parse(read_text_file(s.path("b/classification.json")));
    ja["diagnostics"].erase("notes");
    jb["diagnostics"].erase("notes");
    CHECK(ja == jb);
    CHECK(run({"classify", "--datum", d, "--field", s.path("a/field.csv"), "--out", s.path("c")}).code ==
          cli::kExitDomain);
  }

  TEST_CASE("unclassifiable states are numerical failures") {
    Scratch s("unclassified");
    const auto mesh = build_mesh(8, 32);
    Densities u;
    for (auto& f : u) f = Field(mesh.vertex_count());
    u[0] = Field(mesh.vertex_count(), 1.0);
    std::ostringstream fcsv, mtxt;
    write_field_csv(fcsv, mesh, u);
    write_mesh(mtxt, mesh);
    const auto f = s.write("f.csv", fcsv.str());
    const auto m = s.write("m.txt", mtxt.str());
    const auto d = s.write("d.json", quadrant_json("15, 15, 15, 15"));
    CHECK(run({"classify", "--datum", d, "--field", f, "--mesh", m, "--out", s.path("o")}).code == cli::kExitNumerical);
  }

  TEST_CASE("harmonic reports the 4-point") {
    Scratch s("harmonic");
    const auto d = s.write("d.json", quadrant_json("15, 15, 15, 15"));
    const auto r = run({"harmonic", "--datum", d, "--rings", "10", "--sectors", "32", "--out", s.path("o")});
    CHECK(r.code == 0);
    CHECK(r.out.find("four_point") != std::string::npos);
    CHECK(fs::exists(s.path("o/harmonic-field.csv")));
  }

  TEST_CASE("empty sweep") {
    Scratch s("sweep-empty");
    const auto d = s.write("d.json", quadrant_json("15, 15, 15, 15"));
    const auto r = run({"sweep", "mu", "--datum", d, "--out", s.path("o")});
    CHECK(r.code == 0);
    const auto rows = csv_rows(read_text_file(s.path("o/sweep.csv")));
    CHECK(rows.size() == 1);
  }

  TEST_CASE("mu sweep reduces the overlap") {
    Scratch s("sweep-mu");
    const auto d = s.write("d.json", quadrant_json("15, 15, 15, 15"));
    const auto r = run({"sweep", "mu", "--datum", d, "--values", "10,100,1000", "--rings", "30", "--sectors", "128",
                        "--jobs", "2", "--out", s.path("o")});
    CHECK(r.code == 0);
    const auto rows = csv_rows(read_text_file(s.path("o/sweep.csv")));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0][8] == "overlap");
    for (std::size_t i = 1; i <= 3; ++i) CHECK(rows[i][2] == "four_point");
    CHECK(std::stod(rows[2][8]) < std::stod(rows[1][8]));
    CHECK(std::stod(rows[3][8]) < std::stod(rows[2][8]));
  }

  TEST_CASE("epsilon sweep splits the 4-point into two 3-points") {
    Scratch s("sweep-eps");
    const auto base = s.write("base.json", quadrant_json("15, 15, 15, 15"));
    const auto pert = s.write("pert.json", quadrant_json("-8, 0, -8, 0"));
    const auto r = run({"sweep", "epsilon", "--datum", base, "--perturbation", pert, "--values", "0.25,0.5,1.0",
                        "--rings", "60", "--sectors", "384", "--jobs", "3", "--out", s.path("o")});
    CHECK(r.code == 0);
    const auto rows = csv_rows(read_text_file(s.path("o/sweep.csv")));
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i <= 3; ++i) {
      CHECK(rows[i][1] == "1");
      CHECK(rows[i][2] == "two_triple_points");
    }
    // Separation (column 7) and distance to the eps = 0 state (column 11)
    // shrink as eps decreases.
    CHECK(std::stod(rows[1][7]) < std::stod(rows[2][7]));
    CHECK(std::stod(rows[2][7]) < std::stod(rows[3][7]));
    CHECK(std::stod(rows[1][11]) < std::stod(rows[2][11]));
    CHECK(std::stod(rows[2][11]) < std::stod(rows[3][11]));
    CHECK(fs::exists(s.path("o/sweep-0-field.csv")));
    CHECK(fs::exists(s.path("o/sweep-mesh.txt")));
  }

  TEST_CASE("epsilon sweep needs an admissible sign") {
    Scratch s("sweep-eps-bad");
    const auto base = s.write("base.json", quadrant_json("15, 15, 15, 15"));
    const auto pert = s.write("pert.json", quadrant_json("-30, 30, -30, 30"));
    const auto r = run({"sweep", "epsilon", "--datum", base, "--perturbation", pert, "--values", "1", "--rings", "6",
                        "--sectors", "16", "--out", s.path("o")});
    CHECK(r.code == cli::kExitDomain);
  }
}
