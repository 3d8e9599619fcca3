#include <doctest.h>

#include <set>
#include <sstream>

#include <json.hpp>

#include "srpanova/cli.hpp"
#include "support.hpp"

using namespace srp;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "srp-anova");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(testing::read_file(p)); }

std::string lattice_geojson(int rows, int cols) {
  nlohmann::json features = nlohmann::json::array();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      nlohmann::json ring = {{c, r}, {c + 1, r}, {c + 1, r + 1}, {c, r + 1}, {c, r}};
      features.push_back({{"type", "Feature"},
                          {"properties", {{"region_id", testing::cell_id(r, c)}}},
                          {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}}});
    }
  }
  return nlohmann::json{{"type", "FeatureCollection"}, {"features", features}}.dump();
}

std::vector<std::string> with_short(std::vector<std::string> a, const std::string& workers = "1") {
  a.insert(a.end(), {"--chains", "2", "--warmup", "200", "--keep", "200", "--workers", workers});
  return a;
}

/// Lattice adjacency, a covid-style design config and a simulated counts file.
struct Workspace {
  testing::TempDir dir;
  fs::path adjacency = dir / "adj.csv";
  fs::path config = dir / "config.json";
  fs::path truth = dir / "truth.json";
  fs::path counts;

  explicit Workspace(int rows = 4, int cols = 4, const std::string& sim = "") {
    testing::write_file(adjacency, testing::adjacency_csv(testing::rook_lattice(rows, cols)));
    testing::write_file(dir / "geo.geojson", lattice_geojson(rows, cols));
    testing::write_file(config, R"({"paths":{"adjacency":"adj.csv","geometry":"geo.geojson"},
      "design":{"factor_names":["period","sex"],"levels":[["preCOVID-19","COVID-19"],["Male","Female"]]}})");
    testing::write_file(truth, sim.empty() ? R"({"family":"M2","orientation":"","alpha":[0,0.1,0.2,0.3],
      "sigma_structured":{"phi11":0.4},"sigma_unstructured":[0.05,0.05,0.05,0.05],"seed":5,"expected_count":40})"
                                            : sim);
    auto r = run_cli({"simulate", "--config", config.string(), "--truth", truth.string(), "--out",
                      (dir / "sim").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    counts = dir / "sim" / "counts.csv";
  }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate") {
  testing::TempDir dir;
  testing::write_file(dir / "path.csv", "region_id,neighbor_id\nA,B\nB,C\n");
  auto r = run_cli({"validate", "--adjacency", (dir / "path.csv").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("3 regions, 2 edges, 1 component") != std::string::npos);

  testing::write_file(dir / "island.csv", "region_id,neighbor_id\nA,B\nB,C\nLONELY,\n");
  r = run_cli({"validate", "--adjacency", (dir / "island.csv").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("LONELY") != std::string::npos);
  r = run_cli({"validate", "--adjacency", (dir / "island.csv").string(), "--drop-islands"});
  CHECK(r.code == 0);

  testing::write_file(dir / "bad.csv", "from,to\nA,B\n");
  r = run_cli({"validate", "--adjacency", (dir / "bad.csv").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find(":1") != std::string::npos);

  testing::write_file(dir / "geo.geojson", lattice_geojson(2, 2));
  r = run_cli({"validate", "--geometry", (dir / "geo.geojson").string(), "--rule", "rook"});
  CHECK(r.code == 0);
  CHECK(r.out.find("4 regions, 4 edges") != std::string::npos);
}

TEST_CASE("simulate is deterministic and refuses to overwrite") {
  testing::TempDir dir;
  testing::write_file(dir / "adj.csv", testing::adjacency_csv(testing::rook_lattice(10, 10)));
  testing::write_file(dir / "null.json", R"({"family":"M0","alpha":[0,0,0,0],"sigma_structured":{},
    "sigma_unstructured":[0,0,0,0],"seed":1,"expected_count":20})");
  auto sim = [&](const std::string& out, const std::string& truth) {
    return run_cli({"simulate", "--adjacency", (dir / "adj.csv").string(), "--truth", (dir / truth).string(),
                    "--seed", "42", "--out", (dir / out).string()});
  };
  REQUIRE(sim("a", "null.json").code == 0);
  REQUIRE(sim("b", "null.json").code == 0);
  CHECK(testing::read_file(dir / "a" / "counts.csv") == testing::read_file(dir / "b" / "counts.csv"));
  CHECK(testing::read_file(dir / "a" / "truth.json") == testing::read_file(dir / "b" / "truth.json"));
  CHECK(read_json(dir / "a" / "manifest.json")["checksums"] == read_json(dir / "b" / "manifest.json")["checksums"]);
  CHECK(read_json(dir / "a" / "truth.json")["seed"] == 42);

  auto again = sim("a", "null.json");
  CHECK(again.code == 1);
  CHECK(again.err.find("--force") != std::string::npos);

  testing::write_file(dir / "phi.json", R"({"family":"M2","alpha":[0,0,0,0],"sigma_structured":{"phi11":0.5},
    "sigma_unstructured":[0,0,0,0],"seed":1,"expected_count":20})");
  REQUIRE(sim("c", "phi.json").code == 0);
  const auto text = testing::read_file(dir / "c" / "counts.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 100 * 4);

  testing::write_file(dir / "broken.json", R"({"family":"M2","alpha":[0,0,0,0],"sigma_unstructured":[0,0,0,0],
    "seed":1,"expected_count":20})");
  auto r = sim("d", "broken.json");
  CHECK(r.code == 1);
  CHECK(r.err.find("sigma_structured") != std::string::npos);
}

TEST_CASE("fit") {
  Workspace ws;
  const auto out = (ws.dir / "fit").string();
  auto r = run_cli({"fit", "--config", ws.config.string(), "--counts", ws.counts.string(), "--model", "M2",
                    "--out", out, "--save-draws", "--workers", "1"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  auto summary = read_json(fs::path(out) / "fit_summary.json");
  CHECK(std::isfinite(summary["dic"]["dic"].get<double>()));
  CHECK(summary["converged"] == true);
  CHECK(fs::exists(fs::path(out) / "risk.csv"));
  CHECK(fs::exists(fs::path(out) / "effects.csv"));
  CHECK(fs::exists(fs::path(out) / "draws.csv"));

  const auto out5 = (ws.dir / "fit5").string();
  r = run_cli(with_short({"fit", "--config", ws.config.string(), "--counts", ws.counts.string(), "--model", "M5",
                          "--orientation", "f1_base=preCOVID-19,f2_base=Male", "--out", out5}));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(read_json(fs::path(out5) / "fit_summary.json")["label"] == "M5: preCOVID-19 + Male");

  r = run_cli(with_short({"fit", "--config", ws.config.string(), "--counts", ws.counts.string(), "--model", "M5",
                          "--orientation", "f1_base=Tuesday", "--out", (ws.dir / "x").string()}));
  CHECK(r.code == 1);
  CHECK(r.err.find("f2_base=") != std::string::npos);

  r = run_cli(with_short({"fit", "--config", ws.config.string(), "--counts", ws.counts.string(), "--model", "M9",
                          "--out", (ws.dir / "y").string()}));
  CHECK(r.code == 1);
  CHECK(r.err.find("M6: preCOVID-19 * Male") != std::string::npos);

  // the full label works too
  r = run_cli(with_short({"fit", "--config", ws.config.string(), "--counts", ws.counts.string(), "--model",
                          "M3: COVID-19", "--out", (ws.dir / "z").string()}));
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(read_json(ws.dir / "z" / "fit_summary.json")["label"] == "M3: COVID-19");
}

TEST_CASE("ladder, replay and report") {
  Workspace ws;
  auto ladder = [&](const std::string& out, std::vector<std::string> extra = {}, const std::string& workers = "1") {
    std::vector<std::string> a{"ladder", "--config", ws.config.string(), "--counts", ws.counts.string(),
                               "--out", (ws.dir / out).string(), "--seed", "11"};
    a.insert(a.end(), extra.begin(), extra.end());
    return run_cli(with_short(a, workers));
  };
  auto r = ladder("L1", {"--timings"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const fs::path l1 = ws.dir / "L1";
  auto csv = testing::read_file(l1 / "comparison.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 23);
  // cpu_seconds is shared inside a structural class
  std::set<std::string> cpu;
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  while (std::getline(lines, line)) {
    const auto f = line.find_last_of(',');
    const auto e = line.find_last_of(',', f - 1);
    cpu.insert(line.substr(e + 1, f - e - 1));
  }
  CHECK(cpu.size() <= 19);
  CHECK(fs::exists(l1 / "comparison.txt"));
  CHECK(fs::exists(l1 / "risk.csv"));
  CHECK(fs::exists(l1 / "manifest.json"));

  REQUIRE(ladder("L2").code == 0);
  REQUIRE(ladder("L3", {}, "3").code == 0);
  for (const char* f : {"comparison.csv", "comparison.txt", "risk.csv", "effects.csv"}) {
    CHECK(testing::read_file(ws.dir / "L2" / f) == testing::read_file(ws.dir / "L3" / f));
  }

  r = ladder("L4", {"--families", "M0,M2"});
  REQUIRE(r.code == 0);
  csv = testing::read_file(ws.dir / "L4" / "comparison.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

  // replaying the manifest reproduces the outputs
  r = run_cli({"ladder", "--config", (ws.dir / "L2" / "manifest.json").string(), "--out",
               (ws.dir / "L5").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(testing::read_file(ws.dir / "L2" / "comparison.csv") == testing::read_file(ws.dir / "L5" / "comparison.csv"));
  CHECK(testing::read_file(ws.dir / "L2" / "risk.csv") == testing::read_file(ws.dir / "L5" / "risk.csv"));

  // report on an M5 fit: 4 risk maps and 3 effect maps
  const auto fit5 = (ws.dir / "F5").string();
  r = run_cli(with_short({"fit", "--config", ws.config.string(), "--counts", ws.counts.string(), "--model", "M5",
                          "--out", fit5}));
  REQUIRE(r.code == 0);
  r = run_cli({"report", "--config", ws.config.string(), "--counts", ws.counts.string(), "--fit-dir", fit5,
               "--out", (ws.dir / "R").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(ws.dir / "R" / "geojson")) {
    ++files;
    auto j = read_json(e.path());
    const auto& props = j["features"][0]["properties"];
    if (e.path().filename().string().rfind("risk_", 0) == 0) {
      CHECK(props.contains("rr_mean"));
      CHECK(props.contains("p_exceed"));
    }
  }
  CHECK(files == 7);

  // a region missing from the geometry is named
  auto geo = read_json(ws.dir / "geo.geojson");
  geo["features"].erase(geo["features"].begin() + 5);
  testing::write_file(ws.dir / "geo_missing.geojson", geo.dump());
  r = run_cli({"report", "--config", ws.config.string(), "--counts", ws.counts.string(), "--fit-dir", fit5,
               "--geometry", (ws.dir / "geo_missing.geojson").string(), "--out", (ws.dir / "R2").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find(testing::cell_id(1, 1)) != std::string::npos);
}

TEST_CASE("config errors") {
  testing::TempDir dir;
  testing::write_file(dir / "c.json", R"({"mcmc":{"chains":2,"bogus":1}})");
  auto r = run_cli({"validate", "--config", (dir / "c.json").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("bogus") != std::string::npos);
  testing::write_file(dir / "d.json", "{not json");
  CHECK(run_cli({"validate", "--config", (dir / "d.json").string()}).code == 1);
  CHECK(run_cli({"validate", "--adjacency", (dir / "missing.csv").string()}).code == 1);
}

TEST_CASE("config round trip") {
  testing::TempDir dir;
  testing::write_file(dir / "c.json", R"({"paths":{"adjacency":"a.csv","output":"o"},
    "mcmc":{"chains":3,"warmup":10,"keep":500,"thin":2,"master_seed":99},"ladder":{"families":["M0","M3"],"dedup":false}})");
  auto c = cli::load_run_config(dir / "c.json");
  CHECK(c.adjacency == dir / "a.csv");
  CHECK(c.mcmc.n_chains == 3);
  CHECK(c.mcmc.master_seed == 99);
  CHECK_FALSE(c.dedup);
  REQUIRE(c.families.size() == 2);
  auto back = cli::parse_run_config(cli::to_json(c), dir.path());
  CHECK(back.adjacency == c.adjacency);
  CHECK(back.mcmc.thin == 2);
  CHECK(back.families == c.families);
}

}  // TEST_SUITE
