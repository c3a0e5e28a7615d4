#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "dilaflow/io.hpp"
#include "schema_check.hpp"

using dilaflow::Json;

namespace {

struct Run {
  int status{-1};
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(DILAFLOW_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

// Pipelines go through the shell with the binary named by the build.
Run pipe(const std::string& left, const std::string& right) {
  return run(left + " | " + std::string(DILAFLOW_CLI) + " " + right);
}

std::filesystem::path scratch() {
  auto dir = std::filesystem::temp_directory_path() / ("dilaflow_cli_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("make torus piped into info") {
  const Run r = pipe("make torus", "info - --json");
  REQUIRE(r.status == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["genus"] == 1);
  CHECK(j["singularities"].size() == 1);
  CHECK(j["singularities"][0]["kind"] == "marked_point");
  CHECK(j["gauss_bonnet"]["index_sum"] == 0);
  CHECK(schema::errors(j, "info").empty());
}

TEST_CASE("cylinder geodesics through the pipe") {
  const Run r = pipe("make cylinder --rho 0.5 --alpha 1.0471975", "geodesics - --dir 0.5235987 --json");
  REQUIRE(r.status == 0);
  const Json j = Json::parse(r.out);
  REQUIRE(j["hyperbolic"].size() == 1);
  CHECK(std::abs(j["hyperbolic"][0]["holonomy"].get<double>() - 0.5) < 1e-9);
  CHECK(schema::errors(j, "geodesics").empty());
}

TEST_CASE("exit codes") {
  CHECK(run("--help").status == 0);
  CHECK(run("").status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("trace " DILAFLOW_TEST_DATA "/torus.json --dir notanumber --start 0,0.5,0.5").status == 2);
  CHECK(run("trace " DILAFLOW_TEST_DATA "/torus.json --dir 0.3 --start 0,0.5").status == 2);
  CHECK(run("make sphere").status == 2);
  CHECK(run("info /nonexistent.json").status == 1);
  CHECK(run("trace " DILAFLOW_TEST_DATA "/torus.json --dir 0.3 --start 7,0.5,0.5").status == 1);
  CHECK(run("make cylinder --rho 2").status == 1);
  CHECK(run("horizon " DILAFLOW_TEST_DATA "/torus.json --sc sc-0000000000000000").status == 1);
  const auto dir = scratch();
  std::ofstream(dir / "bad.json") << R"({"polygons":[{"id":0,"vertices":[[0,0],[1,0],[1,1],[0,1]]}],"pairings":[[[0,0],[0,1]]]})";
  CHECK(run("validate " + (dir / "bad.json").string()).status == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("make writes canonical files") {
  const Run a = run("make two-chamber");
  REQUIRE(a.status == 0);
  CHECK(a.out == dilaflow::read_text(DILAFLOW_TEST_DATA "/two_chamber.json"));
  CHECK(dilaflow::write_surface(dilaflow::parse_surface(a.out)) == a.out);
  CHECK(pipe("make two-chamber", "validate -").status == 0);
}

TEST_CASE("trace output is JSON lines") {
  const Run r = run("trace " DILAFLOW_TEST_DATA "/two_chamber.json --start 0,0.3,0.3 --dir 0.7 --json");
  REQUIRE(r.status == 0);
  std::size_t lines = 0, at = 0;
  Json last;
  while (at < r.out.size()) {
    const std::size_t nl = r.out.find('\n', at);
    last = Json::parse(r.out.substr(at, nl - at));
    CHECK(schema::errors(last, "trace-line").empty());
    at = nl + 1;
    ++lines;
  }
  CHECK(last["outcome"] == "LimitCycle");
  CHECK(last["crossings"].get<std::size_t>() == lines - 1);
}

TEST_CASE("horizon by edge id and by listed id agree") {
  const std::string file = DILAFLOW_TEST_DATA "/two_chamber.json";
  const Run a = run("horizon " + file + " --sc edge:0:4 --grid 8 --budget 500 --json");
  REQUIRE(a.status == 0);
  const Json ja = Json::parse(a.out);
  CHECK(schema::errors(ja, "horizon").empty());
  CHECK(ja["disconnecting"] == true);
  CHECK(ja["components"] == 2);
  CHECK(ja["estimate"]["global_max"] == 1);
  const std::string id = ja["connection"]["id"];
  const Run b = run("horizon " + file + " --sc " + id + " --grid 8 --budget 500 --json");
  REQUIRE(b.status == 0);
  CHECK(Json::parse(b.out)["connection"]["id"] == id);
}

TEST_CASE("sweep and render are reproducible") {
  const auto dir = scratch();
  const std::string file = DILAFLOW_TEST_DATA "/two_chamber.json";
  const std::string args = "sweep " + file + " --n 60 --budget 100 --seed 5 --threads 2 --json --svg ";
  const Run a = run(args + (dir / "a.svg").string());
  const Run b = run(args + (dir / "b.svg").string());
  REQUIRE(a.status == 0);
  CHECK(a.out == b.out);
  CHECK(slurp(dir / "a.svg") == slurp(dir / "b.svg"));
  CHECK(schema::errors(Json::parse(a.out), "sweep-report").empty());
  const std::string r = "render " + file + " --trace 0,0.3,0.3 --dir 0.7 --geodesics 0.7 --sc edge:0:4 -o ";
  REQUIRE(run(r + (dir / "a.svg").string()).status == 0);
  REQUIRE(run(r + (dir / "b.svg").string()).status == 0);
  CHECK(slurp(dir / "a.svg") == slurp(dir / "b.svg"));
  CHECK(slurp(dir / "a.svg").find("</svg>") != std::string::npos);
  std::filesystem::remove_all(dir);
}
