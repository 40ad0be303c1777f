#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "homogenize/cli.hpp"
#include "homogenize/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    static int counter = 0;
    dir = fs::temp_directory_path() / ("homogenize-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }

  fs::path write_config(json doc, const std::string& name = "config.json") const {
    doc["output"] = {{"root", dir.string()}, {"directory", "out"}};
    const auto path = dir / name;
    std::ofstream(path) << doc.dump(2);
    return path;
  }
  fs::path out() const { return dir / "out"; }
};

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "homogenize");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = homog::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<fs::path> artifacts(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::exists(dir)) return files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

json only_json(const fs::path& dir) {
  for (const auto& f : artifacts(dir))
    if (f.extension() == ".json") return json::parse(slurp(f));
  return {};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
}

const json constant_plane{{"geometry", {{"dimension", 2}, {"half_period", 4}}},
                          {"law", {{"kind", "constant"}, {"a", 1.0}}},
                          {"seed", 3}};

}  // namespace

TEST_CASE("diffusivity on a constant medium") {
  Scratch s;
  const auto r = invoke({"diffusivity", "-c", s.write_config(constant_plane).string()});
  REQUIRE(r.code == homog::exit_ok);
  const auto status = json::parse(r.out);
  CHECK(status.at("status") == "ok");
  const auto files = artifacts(s.out());
  REQUIRE(files.size() == 1);
  CHECK(files[0].filename().string().rfind("diffusivity_seed3_", 0) == 0);

  const auto doc = only_json(s.out());
  CHECK(doc.at("version") == homog::toolkit_version);
  CHECK(doc.at("config_hash").get<std::string>().size() == 16);
  const auto entries = doc.at("effective_matrix").at("entries");
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(entries[i][j].get<double>() == doctest::Approx(i == j ? 2.0 : 0.0));
  for (const auto& col : doc.at("effective_matrix").at("column_diagnostics")) {
    CHECK(col.at("orthogonality_residual").get<double>() < 1e-10);
    CHECK(col.at("flux_divergence_residual").get<double>() < 1e-10);
    CHECK(col.at("curl_residual").get<double>() < 1e-10);
  }
}

TEST_CASE("converge on the two-point line") {
  Scratch s;
  const json cfg{{"geometry", {{"dimension", 1}}},
                 {"law", {{"kind", "two_point"}, {"a", 0.5}, {"b", 2.0}, {"p", 0.5}}},
                 {"seed", 1},
                 {"campaign", {{"n_list", {8, 16, 32, 64}}, {"replicas", 200}}}};
  const auto r = invoke({"converge", "-c", s.write_config(cfg).string()});
  REQUIRE(r.code == homog::exit_ok);
  fs::path table;
  for (const auto& f : artifacts(s.out()))
    if (f.string().ends_with("_table.csv")) table = f;
  REQUIRE(!table.empty());
  const auto rows = read_csv(table);
  REQUIRE(rows.size() == 5);
  const auto& header = rows[0];
  const auto& last = rows.back();
  CHECK(last[column(header, "N")] == "64");
  const double mean = std::stod(last[column(header, "mean_D11")]);
  const double ci = std::stod(last[column(header, "ci_D11")]);
  CHECK(std::abs(mean - 1.6) <= ci);
  CHECK(last[column(header, "version")] == homog::toolkit_version);
  CHECK(last[column(header, "successive_difference")].empty());
  CHECK(!rows[1][column(header, "successive_difference")].empty());
  CHECK(only_json(s.out()).at("one_d_limit").get<double>() == doctest::Approx(1.6));
}

TEST_CASE("error contract") {
  Scratch s;
  fs::current_path(s.dir);
  auto r = invoke({"diffusivity", "-c", (s.dir / "missing.json").string()});
  CHECK(r.code == homog::exit_config);
  CHECK(json::parse(r.err).at("exit_code") == 2);
  CHECK(artifacts(s.dir).empty());

  json unknown = constant_plane;
  unknown["geometry"]["radius"] = 3;
  r = invoke({"diffusivity", "-c", s.write_config(unknown).string()});
  CHECK(r.code == homog::exit_config);
  CHECK(json::parse(r.err).at("error") == "config");
  unknown = constant_plane;
  unknown["colour"] = "blue";
  CHECK(invoke({"diffusivity", "-c", s.write_config(unknown).string()}).code == homog::exit_config);

  const auto path = s.write_config(constant_plane);
  CHECK(invoke({"bogus", "-c", path.string()}).code == homog::exit_config);
  CHECK(invoke({"diffusivity"}).code == homog::exit_config);
  CHECK(invoke({"diffusivity", "-c", path.string(), "-s", "solver.tol=-1"}).code == homog::exit_config);
  CHECK(!fs::exists(s.out()));

  // Dense guard.
  r = invoke({"spectral", "-c", path.string(), "-s", "geometry.half_period=33"});
  CHECK(r.code == homog::exit_guard);
  CHECK(json::parse(r.err).at("error") == "guard");

  // Starved solver.
  const json rough{{"geometry", {{"dimension", 2}, {"half_period", 4}}},
                   {"law", {{"kind", "uniform"}, {"a", 0.5}, {"b", 2.0}}},
                   {"solver", {{"max_iterations", 2}}}};
  r = invoke({"diffusivity", "-c", s.write_config(rough).string()});
  CHECK(r.code == homog::exit_convergence);
  const auto e = json::parse(r.err);
  CHECK(e.at("error") == "convergence");
  CHECK(e.contains("last_residual"));
  CHECK(!fs::exists(s.out()));
  fs::current_path(fs::temp_directory_path());
}

TEST_CASE("reruns are byte identical and overrides apply") {
  Scratch s;
  const json cfg{{"geometry", {{"dimension", 2}, {"half_period", 3}}},
                 {"law", {{"kind", "two_point"}, {"a", 0.5}, {"b", 2.0}, {"p", 0.5}}},
                 {"seed", 11},
                 {"threads", 1}};
  const auto path = s.write_config(cfg);
  REQUIRE(invoke({"diffusivity", "-c", path.string()}).code == 0);
  const auto first = artifacts(s.out());
  REQUIRE(first.size() == 1);
  const std::string bytes = slurp(first[0]);
  REQUIRE(invoke({"diffusivity", "-c", path.string()}).code == 0);
  CHECK(artifacts(s.out()) == first);
  CHECK(slurp(first[0]) == bytes);

  // Thread count changes neither the name nor the content.
  REQUIRE(invoke({"diffusivity", "-c", path.string(), "-s", "threads=3"}).code == 0);
  CHECK(artifacts(s.out()) == first);
  CHECK(slurp(first[0]) == bytes);

  REQUIRE(invoke({"diffusivity", "-c", path.string(), "--set", "geometry.half_period=2"}).code == 0);
  const auto files = artifacts(s.out());
  REQUIRE(files.size() == 2);
  for (const auto& f : files) {
    if (f == first[0]) continue;
    CHECK(only_json(s.out()).is_object());
    CHECK(json::parse(slurp(f)).at("effective_matrix").at("half_period") == 2);
  }
}

TEST_CASE("every subcommand writes tagged artifacts") {
  Scratch s;
  const json cfg{{"geometry", {{"dimension", 1}, {"half_period", 4}}},
                 {"law", {{"kind", "uniform"}, {"a", 0.5}, {"b", 2.0}}},
                 {"seed", 5},
                 {"direction", {1.0}},
                 {"campaign", {{"n_list", {2, 4}}, {"replicas", 5}}},
                 {"walk", {{"horizon", 20.0}, {"walkers", 200}, {"jump_log", true}, {"replicas", 2}}},
                 {"spectral", {{"moments", {0.0, 0.5}}, {"mc_walkers", 100}}},
                 {"hamming", {{"counts", {1, 2}}, {"trials", 3}}}};
  const auto path = s.write_config(cfg);
  for (const char* sub : {"diffusivity", "converge", "concentrate", "hamming", "walk", "spectral", "surface-tension",
                          "resolvent"}) {
    CAPTURE(sub);
    const auto r = invoke({sub, "-c", path.string()});
    CHECK(r.code == 0);
    CHECK(r.err.empty());
  }
  const auto files = artifacts(s.out());
  CHECK(files.size() >= 11);
  std::string hash;
  for (const auto& f : files) {
    CAPTURE(f.string());
    const std::string text = slurp(f);
    CHECK(text.find(homog::toolkit_version) != std::string::npos);
    const auto name = f.filename().string();
    const auto at = name.find("_seed5_");
    REQUIRE(at != std::string::npos);
    const auto h = name.substr(at + 7, 16);
    if (hash.empty()) hash = h;
    CHECK(h == hash);
    CHECK(text.find(hash) != std::string::npos);
  }
}

TEST_CASE("configuration parsing") {
  const auto cfg = homog::RunConfig::parse(constant_plane, {"solver.tol=1e-8", "output.directory=elsewhere"});
  CHECK(cfg.document["solver"]["tol"].get<double>() == 1e-8);
  CHECK(cfg.document["solver"]["max_iterations"] == 0);
  CHECK(cfg.output_directory().filename() == "elsewhere");
  CHECK(cfg.hash() == homog::RunConfig::parse(constant_plane, {"solver.tol=1e-8"}).hash());
  CHECK(cfg.hash() != homog::RunConfig::parse(constant_plane).hash());

  json doc = json::object();
  homog::apply_override(doc, "law.kind=constant");
  homog::apply_override(doc, "law.a=2");
  CHECK(doc["law"]["kind"] == "constant");
  CHECK(doc["law"]["a"] == 2);
  CHECK_THROWS_AS(homog::apply_override(doc, "noequals"), homog::Error);
  CHECK_THROWS_AS(homog::apply_override(doc, "law..a=1"), homog::Error);
  CHECK_THROWS_AS(homog::RunConfig::parse(json{{"law", {{"kind", "constant"}, {"a", 1.0}, {"x", 1}}}}), homog::Error);
}

TEST_CASE("binary") {
  const char* exe = std::getenv("HOMOGENIZE_CLI");
  if (exe == nullptr) return;
  Scratch s;
  const auto path = s.write_config(constant_plane);
  const std::string ok = std::string("\"") + exe + "\" diffusivity -c \"" + path.string() + "\" > \"" +
                         (s.dir / "stdout.txt").string() + "\" 2>&1";
  CHECK(std::system(ok.c_str()) == 0);
  CHECK(json::parse(slurp(s.dir / "stdout.txt")).at("status") == "ok");
  const std::string bad = std::string("\"") + exe + "\" diffusivity -c \"" + (s.dir / "nope.json").string() +
                          "\" > /dev/null 2>&1";
  const int status = std::system(bad.c_str());
  CHECK(WEXITSTATUS(status) == 2);
  const std::string version = std::string("\"") + exe + "\" --version > \"" + (s.dir / "v.txt").string() + "\"";
  CHECK(std::system(version.c_str()) == 0);
  CHECK(slurp(s.dir / "v.txt").find(homog::toolkit_version) != std::string::npos);
}

TEST_CASE("published schema matches the validator") {
  const auto schema = json::parse(slurp(HOMOGENIZE_SCHEMA));
  const auto defaults = homog::RunConfig::parse(json::object()).document;
  const auto& props = schema.at("properties");
  for (const auto& [section, entry] : props.items()) {
    CAPTURE(section);
    json probe = json::object();
    if (entry.contains("properties") && section != "environment") {
      probe[section] = json::object();
      CHECK_NOTHROW(homog::RunConfig::parse(probe));
      for (const auto& [key, field] : entry.at("properties").items()) {
        CAPTURE(key);
        if (field.contains("default")) CHECK(defaults.at(section).at(key) == field.at("default"));
      }
      probe[section]["not_a_key"] = 1;
      CHECK_THROWS_AS(homog::RunConfig::parse(probe), homog::Error);
    }
  }
  for (const auto& [key, value] : defaults.items()) CHECK(props.contains(key));
  CHECK_THROWS_AS(homog::RunConfig::parse(json{{"descent", {{"max_steps", 0}}}}), homog::Error);
}
