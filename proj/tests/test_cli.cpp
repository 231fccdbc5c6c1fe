#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lds/io.hpp"
#include "lds/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path work_dir() {
  static fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "lds_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_cli(const std::string& args, const std::string& log_name = "run") {
  fs::path log = work_dir() / (log_name + ".log");
  std::string cmd = std::string(LDS_CLI_PATH) + " " + args + " > " + log.string() +
                    " 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const std::string& name, const json& j) {
  fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << j.dump(2);
  return p;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  return json::parse(in);
}

}  // namespace

TEST_CASE("spectral command solves and exports the ground state") {
  std::string out = (work_dir() / "eig").string();
  json cfg = {{"command", "spectral"},
              {"dim", 1},
              {"grid", {{"A", 1.0}, {"N", 256}}},
              {"potential", {{"kind", "zero"}}},
              {"output", out}};
  CHECK(run_cli("spectral --config " + write_config("eig.json", cfg).string()) == 0);
  json summary = read_json(out + ".json");
  double lambda = summary.at("lambda").get<double>();
  CHECK(std::fabs(lambda - 4.9348022) < 0.01);
  CHECK(fs::exists(out + ".density.csv"));
  CHECK(fs::exists(out + ".svg"));
  CHECK(summary.at("config").at("grid").at("N").get<int>() == 256);
}

TEST_CASE("ratefn command: curve file with a zero row and an svg") {
  std::string out = (work_dir() / "jcurve").string();
  json cfg = {{"command", "ratefn"},
              {"curve", "quenched_J"},
              {"dim", 1},
              {"grid", {{"A", 4.0}, {"N", 64}}},
              {"y_grid", {{"values", {-0.5, 0.0, 0.5, 0.7}}}},
              {"seed", 2},
              {"output", out}};
  CHECK(run_cli("ratefn --config " + write_config("jcurve.json", cfg).string()) == 0);
  json summary = read_json(out + ".json");
  auto& points = summary.at("points");
  REQUIRE(points.size() == 4);
  CHECK(points[1].at("x").get<double>() == 0.0);
  CHECK(points[1].at("value").get<double>() == 0.0);
  // convex and symmetric-ish for the symmetric law
  CHECK(points[3].at("value").get<double>() >= points[2].at("value").get<double>());
  CHECK(fs::exists(out + ".svg"));
  CHECK(fs::exists(out + ".csv"));
}

TEST_CASE("echoed config reproduces byte-identical csv output") {
  std::string out = (work_dir() / "det").string();
  json cfg = {{"command", "simulate"}, {"experiment", "ks"},
              {"dim", 1},           {"n_ladder", {256, 512, 1024}},
              {"samples", 1200},    {"seed", 9},
              {"threads", 2},       {"output", out}};
  REQUIRE(run_cli("simulate --config " + write_config("det.json", cfg).string()) == 0);
  std::string first = slurp(out + ".csv");
  REQUIRE(!first.empty());
  // rerun straight from the echoed effective config
  REQUIRE(run_cli("simulate --config " + out + ".config.json") == 0);
  CHECK(slurp(out + ".csv") == first);
  // and the echo contains the fully materialized config
  json echoed = read_json(out + ".config.json");
  CHECK(echoed.at("seed").get<int>() == 9);
  CHECK(echoed.contains("dt"));
  CHECK(echoed.at("command").get<std::string>() == "simulate");
}

TEST_CASE("invalid configs exit with the schema error code") {
  json bad_law = {{"command", "ratefn"},
                  {"curve", "quenched_l"},
                  {"law", {{"kind", "lognormal"}}},
                  {"output", (work_dir() / "x").string()}};
  CHECK(run_cli("ratefn --config " + write_config("badlaw.json", bad_law).string(),
                "badlaw") == 2);

  json unknown = {{"command", "ratefn"},
                  {"curve", "quenched_l"},
                  {"output", (work_dir() / "x").string()},
                  {"typo_key", 1}};
  CHECK(run_cli("ratefn --config " + write_config("unknown.json", unknown).string(),
                "unknown") == 2);

  CHECK(run_cli("ratefn --config " + (work_dir() / "missing.json").string(),
                "missing") == 2);
}

TEST_CASE("dry run validates without computing") {
  std::string out = (work_dir() / "dry").string();
  json cfg = {{"command", "simulate"}, {"experiment", "speed"},
              {"dim", 1},           {"n", 1000000000},  // would take forever
              {"output", out}};
  CHECK(run_cli("simulate --dry-run --config " +
                write_config("dry.json", cfg).string()) == 0);
  CHECK(!fs::exists(out + ".csv"));
}

TEST_CASE("inline JSON configs work like config files") {
  CHECK(run_cli("verify --config "
                "'{\"command\":\"verify\",\"filter\":\"scaling\"}'",
                "inline") == 0);
}

TEST_CASE("verify command: filters and controlled failure") {
  CHECK(run_cli("verify --config " +
                write_config("vok.json", json{{"command", "verify"},
                                              {"filter", "scaling"}})
                    .string(),
                "verify_ok") == 0);
  // corrupt a tolerance: the report must fail in a controlled way
  json corrupted = {{"command", "verify"},
                    {"filter", "eigen"},
                    {"tolerances", {{"eigen_d1", 1e-30}}}};
  CHECK(run_cli("verify --config " + write_config("vbad.json", corrupted).string(),
                "verify_bad") == 1);
}

TEST_CASE("plot command replots a curve csv") {
  std::string out = (work_dir() / "replot").string();
  json curve = {{"command", "ratefn"},
                {"curve", "quenched_l"},
                {"dim", 1},
                {"grid", {{"A", 2.0}, {"N", 32}}},
                {"alpha_grid", {{"values", {-1.0, 0.0, 1.0}}}},
                {"output", out}};
  REQUIRE(run_cli("ratefn --config " + write_config("replot.json", curve).string()) ==
          0);
  json plot = {{"command", "plot"},
               {"input", out + ".csv"},
               {"output", out + "_replot.svg"}};
  CHECK(run_cli("plot --config " + write_config("plotcfg.json", plot).string()) == 0);
  std::string svg = slurp(out + "_replot.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") == std::string::npos);  // path-based
}

TEST_CASE("scenery and grid-field files round-trip bit-exactly") {
  using namespace lds;
  Scenery sc = sample_scenery(FieldLaw::uniform_symmetric(), 2, 12, 314);
  fs::path base = work_dir() / "scenery_rt";
  write_scenery(base, sc);
  Scenery back = read_scenery(base);
  CHECK(back.values == sc.values);
  CHECK(back.dim == sc.dim);
  CHECK(back.halfwidth == sc.halfwidth);
  CHECK(back.law.kind_name() == sc.law.kind_name());

  Grid g(1, 2.0, 32);
  auto eig = principal_eigenvalue(std::vector<double>(g.cells(), 0.0), g, 1e-9);
  Density rho = ground_state_density(eig, g);
  fs::path fbase = work_dir() / "density_rt";
  write_grid_field(fbase, g, rho.values, "density");
  std::string kind;
  auto [g2, values] = read_grid_field(fbase, &kind);
  CHECK(kind == "density");
  CHECK(g2.same_as(g));
  CHECK(values == rho.values);
}

TEST_CASE("scenery files round-trip through the spectral command") {
  // write a scenery via the library format by sampling through spectral
  std::string out = (work_dir() / "sc_eig").string();
  json cfg = {{"command", "spectral"},
              {"dim", 1},
              {"grid", {{"A", 2.0}, {"N", 64}}},
              {"law", {{"kind", "uniform_symmetric"}}},
              {"potential",
               {{"kind", "scenery"}, {"seed", 77}, {"halfwidth", 6},
                {"alpha", 0.8}, {"delta", 0.25}, {"r", 2.0}}},
              {"output", out}};
  REQUIRE(run_cli("spectral --config " + write_config("sc.json", cfg).string()) == 0);
  json summary = read_json(out + ".json");
  CHECK(summary.at("lambda").get<double>() < 4.9348022 + 0.8);  // shifted by at most |alpha|
}
