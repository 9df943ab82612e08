#include "poissonkit/cli.hpp"
#include "poissonkit/spec_io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace poissonkit;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

/// Fresh scratch directory per test case, removed on scope exit.
class Scratch {
 public:
  Scratch() {
    static int counter = 0;
    dir_ = fs::temp_directory_path() / ("poissonkit_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir_);
  }
  ~Scratch() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<double> csv_row(const std::string& line) {
  std::vector<double> out;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

std::string export_entry(const Scratch& s, const std::string& name) {
  const std::string path = s.path(name + ".json");
  REQUIRE(run({"catalog", "--export", name, path}).code == 0);
  return path;
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

class EnvSeed {
 public:
  explicit EnvSeed(const char* value) { ::setenv("POISSONKIT_SEED", value, 1); }
  ~EnvSeed() { ::unsetenv("POISSONKIT_SEED"); }
};

}  // namespace

TEST_CASE("usage and parse errors") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"--version"}).code == 0);
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"verify"}).code == 1);
  CHECK(run({"check-map", "a.json", "--map", "b.json", "--pattern", "diagonal"}).code == 1);
}

TEST_CASE("catalog listing and export") {
  Scratch s;
  const Run list = run({"catalog", "--list"});
  CHECK(list.code == 0);
  CHECK(list.out.find("kepler2_neg:") != std::string::npos);
  CHECK(run({"catalog", "--export", "nope", s.path("x.json")}).code == 1);
  CHECK(run({"catalog", "--export-map", "so3_rigid", s.path("m.json")}).code == 1);
  CHECK(run({"catalog", "--export-companion", "bi20_model", s.path("c.json")}).code == 0);
  CHECK(fs::exists(s.path("c.json")));
}

TEST_CASE("verify exit codes") {
  Scratch s;
  const Run kepler = run({"verify", export_entry(s, "kepler2_neg")});
  CHECK(kepler.code == 0);
  CHECK(kepler.out.find("corank m = 1") != std::string::npos);
  CHECK(kepler.out.find("declared verdict: Pass") != std::string::npos);

  write(s.path("qp.json"), R"({
    "dimension": 4, "coordinates": ["q1", "q2", "p1", "p2"],
    "box": [[-1, 1], [-1, 1], [-1, 1], [-1, 1]],
    "poisson": {"type": "canonical", "pairs": 2, "extra": 0},
    "functions": {"Q": "q1", "P": "p1"},
    "system": {"kind": "completely_integrable", "generators": ["Q", "P"]}
  })");
  CHECK(run({"verify", s.path("qp.json")}).code == 2);

  write(s.path("one.json"), R"({
    "dimension": 4, "coordinates": ["q1", "q2", "p1", "p2"],
    "box": [[-1, 1], [-1, 1], [-1, 1], [-1, 1]],
    "poisson": {"type": "canonical", "pairs": 2, "extra": 0},
    "functions": {"Q": "q1"},
    "system": {"kind": "completely_integrable", "generators": ["Q"]}
  })");
  CHECK(run({"verify", s.path("one.json")}).code == 2);

  write(s.path("bad.json"), "{\"dimension\": 4,");
  const Run bad = run({"verify", s.path("bad.json")});
  CHECK(bad.code == 1);
  CHECK_FALSE(bad.err.empty());
  CHECK(run({"verify", s.path("missing.json")}).code == 1);
}

TEST_CASE("verify reports are deterministic") {
  Scratch s;
  const std::string spec = export_entry(s, "kepler2_pos");
  REQUIRE(run({"verify", spec, "--seed", "5", "--json", s.path("a.json"), "--no-meta"}).code == 0);
  REQUIRE(run({"verify", spec, "--seed", "5", "--json", s.path("b.json"), "--no-meta"}).code == 0);
  CHECK(slurp(s.path("a.json")) == slurp(s.path("b.json")));
  const Json report = read_json_file(s.path("a.json"));
  CHECK(report["config"]["seed"] == 5);
  CHECK(report["report"]["declared_verdict"]["status"] == "Pass");
  CHECK_FALSE(report.contains("meta"));

  REQUIRE(run({"verify", spec, "--json", s.path("c.json")}).code == 0);
  CHECK(read_json_file(s.path("c.json"))["meta"].contains("generated_at"));
}

TEST_CASE("seed from the environment") {
  Scratch s;
  const std::string spec = export_entry(s, "oscillator2");
  {
    EnvSeed env("7");
    REQUIRE(run({"verify", spec, "--json", s.path("env.json"), "--no-meta"}).code == 0);
    CHECK(read_json_file(s.path("env.json"))["config"]["seed"] == 7);
    REQUIRE(run({"verify", spec, "--seed", "9", "--json", s.path("flag.json"), "--no-meta"}).code == 0);
    CHECK(read_json_file(s.path("flag.json"))["config"]["seed"] == 9);
  }
  {
    EnvSeed env("seven");
    CHECK(run({"verify", spec}).code == 1);
  }
  REQUIRE(run({"verify", spec, "--json", s.path("default.json"), "--no-meta"}).code == 0);
  CHECK(read_json_file(s.path("default.json"))["config"]["seed"] == 42);
}

TEST_CASE("flow command") {
  Scratch s;
  const std::string osc = export_entry(s, "oscillator2");
  Run r = run({"flow", osc, "--hamiltonian", "I1", "--from", "1,0,0,0", "--t-end", "6.283185307179586", "--monitor",
               "I1,I2", "--csv", s.path("osc.csv")});
  REQUIRE(r.code == 0);
  const auto rows = lines(slurp(s.path("osc.csv")));
  CHECK(rows.front() == "t,q1,q2,p1,p2,I1,I2");
  const std::vector<double> last = csv_row(rows.back());
  CHECK(std::abs(last[1] - 1.0) <= 1e-6);
  CHECK(std::abs(last[3]) <= 1e-6);

  r = run({"flow", osc, "--hamiltonian", "I1", "--from", "1,0,0,0", "--t-end", "0"});
  REQUIRE(r.code == 0);
  CHECK(lines(r.out).size() == 2);

  CHECK(run({"flow", osc, "--hamiltonian", "H", "--from", "1,0,0,0", "--t-end", "1"}).code == 1);
  CHECK(run({"flow", osc, "--hamiltonian", "I1", "--from", "1,0,0", "--t-end", "1"}).code == 1);
  CHECK(run({"flow", osc, "--hamiltonian", "I1", "--from", "1,0,0,0", "--t-end", "1", "--monitor", "X"}).code == 1);

  const std::string kep = export_entry(s, "kepler2_neg");
  write(s.path("kep_h.json"), [&] {
    Json doc = read_json_file(kep);
    doc["functions"]["H"] = "(p1^2 + p2^2)/2 - 1/sqrt(q1^2 + q2^2)";
    return doc.dump();
  }());
  // Nearly radial fall towards the origin.
  CHECK(run({"flow", s.path("kep_h.json"), "--hamiltonian", "H", "--from", "1,0,0,0.05", "--t-end", "3",
             "--record-every", "100", "--csv", s.path("kep.csv")})
            .code == 4);
  const auto kep_rows = lines(slurp(s.path("kep.csv")));
  CHECK(kep_rows.size() > 2);
  CHECK(kep_rows.back().rfind("# aborted: GuardExit at t=", 0) == 0);
}

TEST_CASE("fit command") {
  Scratch s;
  const Run r = run({"fit", export_entry(s, "kepler2_pos")});
  CHECK(r.code == 0);
  CHECK(r.out.find("constant structure constants: yes") != std::string::npos);
  CHECK(r.out.find("c^3_12 = -1") != std::string::npos);
}

TEST_CASE("recursion command") {
  Scratch s;
  const std::string a = export_entry(s, "bi20_model");
  REQUIRE(run({"catalog", "--export-companion", "bi20_model", s.path("b.json")}).code == 0);
  Run r = run({"recursion", a, s.path("b.json"), "--at", "0.3,0.1,-0.2,0.5,0.7"});
  CHECK(r.code == 0);
  CHECK(r.out.find("characteristic rank: 4") != std::string::npos);

  write(s.path("canon.json"), R"({"dimension": 2, "coordinates": ["q", "p"], "box": [[-1, 1], [-1, 1]],
                                  "poisson": {"type": "canonical", "pairs": 1}})");
  write(s.path("zero.json"), R"({"dimension": 2, "coordinates": ["q", "p"], "box": [[-1, 1], [-1, 1]],
                                 "poisson": {"type": "matrix", "upper_entries": {}}})");
  r = run({"recursion", s.path("canon.json"), s.path("zero.json"), "--at", "0.1,0.2"});
  CHECK(r.code == 2);
  CHECK(r.out.find("distributions differ") != std::string::npos);
  CHECK(run({"recursion", s.path("canon.json"), a, "--at", "0.1,0.2"}).code == 1);
}

TEST_CASE("check-map command") {
  Scratch s;
  const std::string spec = export_entry(s, "oscillator2");
  REQUIRE(run({"catalog", "--export-map", "oscillator2", s.path("map.json")}).code == 0);
  Run r = run({"check-map", spec, "--map", s.path("map.json"), "--pattern", "symplectic-aa", "--actions", "I1,I2",
               "--angles", "phi1,phi2"});
  CHECK(r.code == 0);
  r = run({"check-map", spec, "--map", s.path("map.json"), "--pattern", "symplectic-aa", "--actions", "0,1",
           "--angles", "2,3"});
  CHECK(r.code == 0);
  r = run({"check-map", spec, "--map", s.path("map.json"), "--pattern", "symplectic-aa", "--actions", "I1,I2",
           "--angles", "phi2,phi1"});
  CHECK(r.code == 2);

  write(s.path("scale.json"), R"({"target_coordinates": ["u1", "u2", "v1", "v2"],
                                  "forward": ["2*q1", "q2", "p1", "p2"]})");
  r = run({"check-map", spec, "--map", s.path("scale.json"), "--pattern", "symplectic-aa", "--actions", "v1,v2",
           "--angles", "u1,u2"});
  CHECK(r.code == 2);
  CHECK(run({"check-map", spec, "--map", s.path("scale.json"), "--pattern", "symplectic-aa", "--actions", "w",
             "--angles", "u1"})
            .code == 1);
}

TEST_CASE("every catalog entry verifies after export") {
  Scratch s;
  const Run list = run({"catalog", "--list"});
  for (const auto& line : lines(list.out)) {
    const std::string name = line.substr(0, line.find(':'));
    CHECK_MESSAGE(run({"verify", export_entry(s, name)}).code == 0, name);
  }
}
