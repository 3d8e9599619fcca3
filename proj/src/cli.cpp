#include "srpanova/cli.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "srpanova/csv.hpp"
#include "srpanova/error.hpp"
#include "srpanova/fit.hpp"
#include "srpanova/icar.hpp"
#include "srpanova/ladder.hpp"
#include "srpanova/region_graph.hpp"
#include "srpanova/simulate.hpp"

namespace srp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::string path_string(const fs::path& p) { return p.empty() ? std::string() : fs::absolute(p).string(); }

std::vector<Family> parse_families(const std::string& text) {
  std::vector<Family> out;
  for (const auto& item : csv::split(text)) {
    if (!item.empty()) out.push_back(parse_family(item));
  }
  return out;
}

template <class T>
void read_key(const json& obj, const char* key, T& target, const std::string& section) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw InputError("config: '" + section + "." + key + "' has the wrong type");
  }
}

void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw InputError("config: '" + section + "' must be an object");
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw InputError("config: unknown key '" + section + "." + k + "'");
  }
}

std::string slug(const std::string& s) {
  std::string out;
  for (char c : s) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.';
    if (keep) {
      out += c;
    } else if (out.empty() || out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

std::string checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

struct Manifest {
  std::string command;
  fs::path dir;
  fs::path file;
  json seeds = json::object();
  json timings = json::object();
  std::vector<fs::path> outputs;

  void write(const RunConfig& cfg, const std::vector<std::string>& argv) const {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["argv"] = argv;
    j["config"] = to_json(cfg);
    j["seeds"] = seeds;
    j["timings"] = timings;
    json sums = json::object();
    for (const auto& p : outputs) sums[fs::relative(p, dir).generic_string()] = checksum(p);
    j["checksums"] = {{"algorithm", "fnv1a64"}, {"files", sums}};
    write_json(file, j);
  }
};

Manifest prepare_output(const RunConfig& cfg, const std::string& command,
                        const std::string& name = "manifest.json") {
  Manifest m;
  m.command = command;
  m.dir = cfg.output;
  m.file = cfg.output / name;
  if (fs::exists(m.file) && !cfg.force) {
    throw InputError(m.file.string() + " already exists; use --force to overwrite");
  }
  fs::create_directories(cfg.output);
  return m;
}

RegionGraph load_graph(const RunConfig& cfg) {
  if (!cfg.adjacency.empty()) {
    const auto file = read_adjacency_csv(cfg.adjacency);
    return load_adjacency(file.edges, file.region_ids, cfg.drop_islands);
  }
  if (!cfg.geometry.empty()) {
    const auto geoms = read_geojson_geometries(cfg.geometry);
    std::vector<std::string> ids;
    for (const auto& g : geoms) ids.push_back(g.region_id);
    const auto edges = contiguity_from_polygons(geoms, parse_contiguity_rule(cfg.rule));
    return load_adjacency(edges, ids, cfg.drop_islands);
  }
  throw InputError("no graph given: set paths.adjacency or paths.geometry (--adjacency / --geometry)");
}

// Levels in first-appearance order from the counts file.
FactorDesign infer_design(const fs::path& counts) {
  const auto t = csv::read(counts);
  csv::expect_header(t, counts, {"region_id", "factor1", "factor2", "count"}, {"population"});
  FactorDesign d;
  for (int f = 0; f < 2; ++f) {
    std::vector<std::string> levels;
    for (const auto& row : t.rows) {
      const auto& v = row.fields[static_cast<std::size_t>(1 + f)];
      if (std::find(levels.begin(), levels.end(), v) == levels.end()) levels.push_back(v);
    }
    if (levels.size() != 2) {
      throw InputError(counts.string() + ": factor" + std::to_string(f + 1) + " has " +
                       std::to_string(levels.size()) + " levels, expected 2");
    }
    d.level_names[static_cast<std::size_t>(f)] = {levels[0], levels[1]};
  }
  d.validate();
  return d;
}

FactorDesign design_for(RunConfig& cfg) {
  if (!cfg.design) {
    cfg.design = cfg.counts.empty() ? FactorDesign{} : infer_design(cfg.counts);
  }
  cfg.design->validate();
  return *cfg.design;
}

Dataset load_counts(const RunConfig& cfg, const FactorDesign& design, const RegionGraph& graph,
                    std::ostream& err) {
  if (cfg.counts.empty()) throw InputError("no counts file given (paths.counts / --counts)");
  auto file = read_counts_csv(cfg.counts, design, graph, cfg.expected_mode);
  for (const auto& w : file.warnings) err << "warning: " << w << '\n';
  return std::move(file.dataset);
}

ModelSpec resolve_model(const std::string& model, const std::string& orientation,
                        const FactorDesign& design) {
  static const std::set<std::string> families{"M0", "M1", "M2", "M3", "M4", "M5", "M6"};
  if (families.count(model)) return resolve_spec(model, orientation, design);
  const auto ladder = enumerate_ladder(design);
  for (const auto& s : ladder) {
    if (s.label == model) return s;
  }
  std::string valid;
  for (const auto& s : ladder) valid += "\n  " + s.label;
  throw InputError("unknown model '" + model + "'; give a family (M0..M6) with --orientation, or a label:" +
                   valid);
}

// ---------------------------------------------------------------------------

int cmd_validate(RunConfig& cfg, std::ostream& out) {
  const RegionGraph g = load_graph(cfg);
  g.check_invariants();
  const int nc = g.n_components();
  out << g.size() << (g.size() == 1 ? " region, " : " regions, ") << g.n_edges()
      << (g.n_edges() == 1 ? " edge, " : " edges, ") << nc << (nc == 1 ? " component" : " components")
      << '\n';
  out << "degree histogram:\n";
  for (const auto& [d, n] : g.degree_histogram()) out << "  degree " << d << ": " << n << '\n';
  return 0;
}

int cmd_simulate(RunConfig& cfg, const std::vector<std::string>& argv, bool seed_given,
                 std::ostream& out) {
  if (cfg.truth.empty()) throw InputError("simulate needs a truth file (paths.truth / --truth)");
  TruthDocument doc = read_truth_json(cfg.truth);
  if (seed_given) doc.truth.seed = cfg.mcmc.master_seed;
  const FactorDesign design = design_for(cfg);
  const RegionGraph graph = load_graph(cfg);
  const ModelSpec spec = resolve_spec(doc.family, doc.orientation, design);
  auto manifest = prepare_output(cfg, "simulate");
  const auto t0 = std::chrono::steady_clock::now();

  const std::vector<double> expected(graph.size() * kGroups, doc.expected_count);
  const SimResult sim = simulate_dataset(doc.truth, spec, graph, expected);
  const fs::path counts = cfg.output / "counts.csv";
  const fs::path truth = cfg.output / "truth.json";
  write_counts_csv(counts, sim.dataset, design);
  write_truth_json(truth, doc, spec.label);

  manifest.seeds["truth"] = doc.truth.seed;
  manifest.timings["simulate_seconds"] = seconds_since(t0);
  manifest.outputs = {counts, truth};
  manifest.write(cfg, argv);
  out << "simulated " << spec.label << ": " << graph.size() << " regions x " << kGroups
      << " groups, seed " << doc.truth.seed << " -> " << counts.string() << '\n';
  return 0;
}

void write_best_outputs(const RunConfig& cfg, const FitResult& f, const PosteriorSummary& s,
                        Manifest& m, json summary) {
  const fs::path risk = cfg.output / "risk.csv";
  const fs::path effects = cfg.output / "effects.csv";
  write_risk_csv(risk, s);
  write_effects_csv(effects, s);
  m.outputs.push_back(risk);
  m.outputs.push_back(effects);
  if (cfg.save_draws) {
    const fs::path draws = cfg.output / "draws.csv";
    write_draws_csv(draws, f);
    m.outputs.push_back(draws);
  }
  const fs::path sp = cfg.output / "fit_summary.json";
  write_json(sp, summary);
}

int cmd_report(RunConfig& cfg, const std::vector<std::string>& argv, std::ostream& out,
               const std::string& manifest_name);

int cmd_fit(RunConfig& cfg, const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  const RegionGraph graph = load_graph(cfg);
  const FactorDesign design = design_for(cfg);
  const Dataset data = load_counts(cfg, design, graph, err);
  const ModelSpec spec = resolve_model(cfg.model, cfg.orientation, design);
  cfg.mcmc.validate(true);
  auto manifest = prepare_output(cfg, "fit");

  const IcarModel icar = scale_icar(icar_precision(graph));
  const FitResult f = fit(spec, data, icar, cfg.mcmc, design);
  const PosteriorSummary s = summarize(f, data, design);
  for (const auto& w : f.warnings) err << "warning: " << w << '\n';

  json seeds = json::array();
  for (const auto& c : f.chains) seeds.push_back(c.seed);
  manifest.seeds[spec.label] = seeds;
  manifest.timings[spec.label] = f.cpu_seconds;
  write_best_outputs(cfg, f, s, manifest, fit_summary_json(f));
  manifest.write(cfg, argv);
  out << spec.label << ": DIC " << csv::format_fixed(f.dic.dic, 1) << ", WAIC "
      << csv::format_fixed(f.waic.waic, 1) << ", converged " << (f.converged ? "true" : "false")
      << ", " << csv::format_fixed(f.cpu_seconds, 2) << " s\n";
  if (cfg.geojson && !cfg.geometry.empty()) {
    cfg.fit_dir = cfg.output;
    return cmd_report(cfg, argv, out, "report_manifest.json");
  }
  return 0;
}

int cmd_ladder(RunConfig& cfg, const std::vector<std::string>& argv, std::ostream& out,
               std::ostream& err) {
  const RegionGraph graph = load_graph(cfg);
  const FactorDesign design = design_for(cfg);
  const Dataset data = load_counts(cfg, design, graph, err);
  cfg.mcmc.validate(true);
  auto manifest = prepare_output(cfg, "ladder");
  const auto t0 = std::chrono::steady_clock::now();

  const IcarModel icar = scale_icar(icar_precision(graph));
  LadderOptions opts;
  opts.families = cfg.families;
  opts.dedup = cfg.dedup;
  const LadderResult r = run_ladder(design, data, icar, cfg.mcmc, opts);

  const fs::path table_csv = cfg.output / "comparison.csv";
  const fs::path table_txt = cfg.output / "comparison.txt";
  write_comparison_csv(table_csv, r.table, cfg.timings);
  {
    std::ofstream t(table_txt, std::ios::binary);
    t << render_comparison(r.table, 0, cfg.timings);
  }
  manifest.outputs = {table_csv};

  fs::create_directories(cfg.output / "models");
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    const auto& cf = r.classes[c];
    const auto& rep = r.specs[cf.members.representative()];
    json j = cf.fit ? fit_summary_json(*cf.fit) : json{{"label", rep.label}, {"error", cf.error}};
    json labels = json::array();
    for (auto m : cf.members.members) labels.push_back(r.specs[m].label);
    j["class_labels"] = labels;
    std::ostringstream name;
    name << std::setw(2) << std::setfill('0') << c + 1 << '_' << slug(rep.label) << ".json";
    write_json(cfg.output / "models" / name.str(), j);
    if (cf.fit) {
      json seeds = json::array();
      for (const auto& ch : cf.fit->chains) seeds.push_back(ch.seed);
      manifest.seeds[rep.label] = seeds;
      manifest.timings[rep.label] = cf.fit->cpu_seconds;
      for (const auto& w : cf.fit->warnings) err << "warning: " << rep.label << ": " << w << '\n';
    } else {
      err << "error: " << rep.label << " failed: " << cf.error << '\n';
    }
  }

  const auto& best = r.classes[r.best_class()];
  const bool best_failed = !best.fit;
  if (!best_failed) {
    json summary = fit_summary_json(*best.fit);
    summary["best_label"] = r.table.best_label;
    write_best_outputs(cfg, *best.fit, *best.summary, manifest, summary);
  }
  manifest.timings["ladder_seconds"] = seconds_since(t0);
  manifest.write(cfg, argv);

  out << render_comparison(r.table, 5, cfg.timings);
  out << "best: " << r.table.best_label << (best_failed ? " (failed)" : "") << '\n';
  if (best_failed) return 3;
  if (cfg.geojson && !cfg.geometry.empty()) {
    cfg.fit_dir = cfg.output;
    return cmd_report(cfg, argv, out, "report_manifest.json");
  }
  return 0;
}

// Feature collection with each region's summary row attached as properties.
json join_features(const json& geometry, const std::map<std::string, json>& rows) {
  json fc = {{"type", "FeatureCollection"}, {"features", json::array()}};
  for (const auto& feature : geometry.at("features")) {
    const auto id = feature.at("properties").at("region_id");
    const std::string key = id.is_string() ? id.get<std::string>() : id.dump();
    const auto it = rows.find(key);
    if (it == rows.end()) continue;
    json f = feature;
    for (const auto& [k, v] : it->second.items()) f["properties"][k] = v;
    fc["features"].push_back(std::move(f));
  }
  return fc;
}

int cmd_report(RunConfig& cfg, const std::vector<std::string>& argv, std::ostream& out,
               const std::string& manifest_name) {
  if (cfg.geometry.empty()) throw InputError("report needs a geometry file (paths.geometry / --geometry)");
  const fs::path dir = cfg.fit_dir.empty() ? cfg.output : cfg.fit_dir;
  const fs::path risk_path = dir / "risk.csv";
  const fs::path effects_path = dir / "effects.csv";
  const auto risk = csv::read(risk_path);
  csv::expect_header(risk, risk_path,
                     {"region_id", "group", "rr_mean", "rr_median", "rr_q025", "rr_q975", "p_exceed"});
  const auto effects = csv::read(effects_path);
  csv::expect_header(effects, effects_path, {"region_id", "effect", "mean", "q025", "q975"});

  const json geometry = read_json(cfg.geometry);
  if (!geometry.contains("features") || !geometry.at("features").is_array()) {
    throw InputError(cfg.geometry.string() + ": not a GeoJSON FeatureCollection");
  }
  std::set<std::string> geo_ids;
  for (const auto& f : geometry.at("features")) {
    if (!f.contains("properties") || !f.at("properties").contains("region_id")) {
      throw InputError(cfg.geometry.string() + ": feature without a region_id property");
    }
    const auto id = f.at("properties").at("region_id");
    geo_ids.insert(id.is_string() ? id.get<std::string>() : id.dump());
  }

  // group -> region -> properties, in first-appearance order of groups
  std::vector<std::string> groups, effect_names;
  std::map<std::string, std::map<std::string, json>> by_group, by_effect;
  std::vector<std::string> missing;
  std::set<std::string> seen;
  for (const auto& row : risk.rows) {
    const auto& f = row.fields;
    if (!geo_ids.count(f[0]) && seen.insert(f[0]).second) missing.push_back(f[0]);
    if (!by_group.count(f[1])) groups.push_back(f[1]);
    json p = {{"region_id", f[0]}, {"group", f[1]}};
    const char* cols[] = {"rr_mean", "rr_median", "rr_q025", "rr_q975", "p_exceed"};
    for (int c = 0; c < 5; ++c) p[cols[c]] = csv::parse_double(f[2 + c], risk_path, row.line, cols[c]);
    by_group[f[1]][f[0]] = std::move(p);
  }
  for (const auto& row : effects.rows) {
    const auto& f = row.fields;
    if (!geo_ids.count(f[0]) && seen.insert(f[0]).second) missing.push_back(f[0]);
    if (!by_effect.count(f[1])) effect_names.push_back(f[1]);
    by_effect[f[1]][f[0]] = {{"region_id", f[0]},
                             {"effect", f[1]},
                             {"mean", csv::parse_double(f[2], effects_path, row.line, "mean")},
                             {"q025", csv::parse_double(f[3], effects_path, row.line, "q025")},
                             {"q975", csv::parse_double(f[4], effects_path, row.line, "q975")}};
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw InputError("regions missing from the geometry: " + names);
  }

  auto manifest = prepare_output(cfg, "report", manifest_name);
  const fs::path gdir = cfg.output / "geojson";
  fs::create_directories(gdir);
  for (const auto& g : groups) {
    const fs::path p = gdir / ("risk_" + slug(g) + ".geojson");
    write_json(p, join_features(geometry, by_group[g]));
    manifest.outputs.push_back(p);
  }
  for (const auto& e : effect_names) {
    const fs::path p = gdir / ("effect_" + slug(e) + ".geojson");
    write_json(p, join_features(geometry, by_effect[e]));
    manifest.outputs.push_back(p);
  }
  manifest.write(cfg, argv);
  out << "wrote " << manifest.outputs.size() << " GeoJSON files to " << gdir.string() << '\n';
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

RunConfig parse_run_config(const json& doc, const fs::path& base) {
  const json& j = doc.contains("config") && doc.contains("command") ? doc.at("config") : doc;
  check_keys(j, "config", {"paths", "graph", "design", "mcmc", "ladder", "model", "report"});
  RunConfig c;
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    check_keys(p, "paths", {"adjacency", "geometry", "counts", "truth", "output", "fit_dir"});
    std::string s;
    auto path_key = [&](const char* key, fs::path& target) {
      s.clear();
      read_key(p, key, s, "paths");
      if (!s.empty()) target = resolve(base, s);
    };
    path_key("adjacency", c.adjacency);
    path_key("geometry", c.geometry);
    path_key("counts", c.counts);
    path_key("truth", c.truth);
    path_key("output", c.output);
    path_key("fit_dir", c.fit_dir);
  }
  if (j.contains("graph")) {
    const auto& g = j.at("graph");
    check_keys(g, "graph", {"rule", "drop_islands"});
    read_key(g, "rule", c.rule, "graph");
    read_key(g, "drop_islands", c.drop_islands, "graph");
  }
  if (j.contains("design")) {
    const auto& d = j.at("design");
    check_keys(d, "design", {"factor_names", "levels", "expected_mode"});
    if (d.contains("factor_names") || d.contains("levels")) {
      FactorDesign fd;
      std::vector<std::string> names{fd.factor_names[0], fd.factor_names[1]};
      std::vector<std::vector<std::string>> levels;
      read_key(d, "factor_names", names, "design");
      read_key(d, "levels", levels, "design");
      if (names.size() != 2) throw InputError("config: design.factor_names needs 2 names");
      fd.factor_names = {names[0], names[1]};
      if (!levels.empty()) {
        if (levels.size() != 2 || levels[0].size() != 2 || levels[1].size() != 2) {
          throw InputError("config: design.levels must be [[a, b], [c, d]]");
        }
        fd.level_names = {{{levels[0][0], levels[0][1]}, {levels[1][0], levels[1][1]}}};
      }
      fd.validate();
      c.design = fd;
    }
    std::string mode;
    read_key(d, "expected_mode", mode, "design");
    if (!mode.empty()) c.expected_mode = parse_expected_mode(mode);
  }
  if (j.contains("mcmc")) {
    const auto& m = j.at("mcmc");
    check_keys(m, "mcmc", {"chains", "warmup", "keep", "thin", "master_seed", "sd_upper", "intercept_sd",
                           "adapt_target", "workers"});
    read_key(m, "chains", c.mcmc.n_chains, "mcmc");
    read_key(m, "warmup", c.mcmc.warmup, "mcmc");
    read_key(m, "keep", c.mcmc.keep, "mcmc");
    read_key(m, "thin", c.mcmc.thin, "mcmc");
    read_key(m, "master_seed", c.mcmc.master_seed, "mcmc");
    read_key(m, "sd_upper", c.mcmc.sd_upper, "mcmc");
    read_key(m, "intercept_sd", c.mcmc.intercept_sd, "mcmc");
    read_key(m, "adapt_target", c.mcmc.adapt_target, "mcmc");
    read_key(m, "workers", c.mcmc.workers, "mcmc");
  }
  if (j.contains("ladder")) {
    const auto& l = j.at("ladder");
    check_keys(l, "ladder", {"families", "dedup"});
    std::vector<std::string> fams;
    read_key(l, "families", fams, "ladder");
    for (const auto& f : fams) c.families.push_back(parse_family(f));
    read_key(l, "dedup", c.dedup, "ladder");
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, "model", {"family", "orientation"});
    read_key(m, "family", c.model, "model");
    read_key(m, "orientation", c.orientation, "model");
  }
  if (j.contains("report")) {
    const auto& r = j.at("report");
    check_keys(r, "report", {"save_draws", "geojson", "timings"});
    read_key(r, "save_draws", c.save_draws, "report");
    read_key(r, "geojson", c.geojson, "report");
    read_key(r, "timings", c.timings, "report");
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  return parse_run_config(read_json(path), fs::absolute(path).parent_path());
}

json to_json(const RunConfig& c) {
  json j;
  j["paths"] = {{"adjacency", path_string(c.adjacency)}, {"geometry", path_string(c.geometry)},
                {"counts", path_string(c.counts)},       {"truth", path_string(c.truth)},
                {"output", path_string(c.output)},       {"fit_dir", path_string(c.fit_dir)}};
  j["graph"] = {{"rule", c.rule}, {"drop_islands", c.drop_islands}};
  j["design"] = {{"expected_mode", to_string(c.expected_mode)}};
  if (c.design) {
    j["design"]["factor_names"] = c.design->factor_names;
    j["design"]["levels"] = c.design->level_names;
  }
  j["mcmc"] = {{"chains", c.mcmc.n_chains},         {"warmup", c.mcmc.warmup},
               {"keep", c.mcmc.keep},               {"thin", c.mcmc.thin},
               {"master_seed", c.mcmc.master_seed}, {"sd_upper", c.mcmc.sd_upper},
               {"intercept_sd", c.mcmc.intercept_sd}, {"adapt_target", c.mcmc.adapt_target},
               {"workers", c.mcmc.workers}};
  json fams = json::array();
  for (auto f : c.families) fams.push_back(to_string(f));
  j["ladder"] = {{"families", fams}, {"dedup", c.dedup}};
  j["model"] = {{"family", c.model}, {"orientation", c.orientation}};
  j["report"] = {{"save_draws", c.save_draws}, {"geojson", c.geojson}, {"timings", c.timings}};
  return j;
}

int run(int argc, const char* const* argv) { return run(argc, argv, std::cout, std::cerr); }

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spatial Poisson model ladder for 2x2 factorial count data", "srp-anova"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  std::string config_path, out_dir, adjacency, geometry, rule, counts, truth, fit_dir, families, model,
      orientation;
  std::uint64_t seed = 0;
  int workers = 0, chains = 0, warmup = 0, keep = 0, thin = 0;
  bool force = false, save_draws = false, no_dedup = false, drop_islands = false, timings = false,
       geojson = false;

  app.add_option("--config", config_path, "Run configuration JSON (or a manifest to replay)");
  auto* o_seed = app.add_option("--seed", seed, "Master seed");
  auto* o_out = app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--force", force, "Overwrite an existing manifest");
  auto* o_draws = app.add_flag("--save-draws", save_draws, "Write draws.csv");
  auto* o_nodedup = app.add_flag("--no-dedup", no_dedup, "Fit all ladder labels separately");
  auto* o_islands = app.add_flag("--drop-islands", drop_islands, "Drop regions without neighbours");
  auto* o_timings = app.add_flag("--timings", timings, "Write wall-clock seconds into the comparison tables");
  auto* o_geojson = app.add_flag("--geojson", geojson, "Also write GeoJSON maps (needs --geometry)");
  auto* o_adj = app.add_option("--adjacency", adjacency, "Adjacency CSV (region_id,neighbor_id)");
  auto* o_geo = app.add_option("--geometry", geometry, "GeoJSON polygons with a region_id property");
  auto* o_rule = app.add_option("--rule", rule, "Contiguity rule for --geometry: queen or rook");
  auto* o_counts = app.add_option("--counts", counts, "Counts CSV");
  auto* o_truth = app.add_option("--truth", truth, "Truth JSON for simulate");
  auto* o_fitdir = app.add_option("--fit-dir", fit_dir, "Directory with risk.csv/effects.csv for report");
  auto* o_workers = app.add_option("--workers", workers, "Threads for chains (0 = all cores)");
  auto* o_chains = app.add_option("--chains", chains, "Number of chains");
  auto* o_warmup = app.add_option("--warmup", warmup, "Warmup sweeps per chain");
  auto* o_keep = app.add_option("--keep", keep, "Kept draws per chain");
  auto* o_thin = app.add_option("--thin", thin, "Sweeps per kept draw");
  auto* o_fams = app.add_option("--families", families, "Comma-separated families for ladder");
  auto* o_model = app.add_option("--model", model, "Family (M0..M6) or full label for fit");
  auto* o_orient = app.add_option("--orientation", orientation,
                                  "f1_base=<level>,f2_base=<level>[,first=<factor-name>]");

  auto* validate = app.add_subcommand("validate", "Check an adjacency graph");
  auto* simulate = app.add_subcommand("simulate", "Simulate counts from a truth file");
  auto* fitcmd = app.add_subcommand("fit", "Fit one model");
  auto* ladder = app.add_subcommand("ladder", "Fit the model ladder and rank by DIC");
  auto* report = app.add_subcommand("report", "Join fit summaries to geometry as GeoJSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  std::vector<std::string> args(argv, argv + argc);
  try {
    RunConfig cfg = config_path.empty() ? parse_run_config(json::object(), fs::current_path())
                                        : load_run_config(config_path);
    const fs::path cwd = fs::current_path();
    if (*o_seed) cfg.mcmc.master_seed = seed;
    if (*o_out) cfg.output = resolve(cwd, out_dir);
    if (force) cfg.force = true;
    if (*o_draws) cfg.save_draws = save_draws;
    if (*o_nodedup) cfg.dedup = !no_dedup;
    if (*o_islands) cfg.drop_islands = drop_islands;
    if (*o_timings) cfg.timings = timings;
    if (*o_geojson) cfg.geojson = geojson;
    if (*o_adj) {
      cfg.adjacency = resolve(cwd, adjacency);
      if (!*o_geo) cfg.geometry.clear();
    }
    if (*o_geo) {
      cfg.geometry = resolve(cwd, geometry);
      // geometry alone on the command line means the graph comes from it
      if (!*o_adj && validate->parsed()) cfg.adjacency.clear();
    }
    if (*o_rule) cfg.rule = rule;
    if (*o_counts) cfg.counts = resolve(cwd, counts);
    if (*o_truth) cfg.truth = resolve(cwd, truth);
    if (*o_fitdir) cfg.fit_dir = resolve(cwd, fit_dir);
    if (*o_workers) cfg.mcmc.workers = workers;
    if (*o_chains) cfg.mcmc.n_chains = chains;
    if (*o_warmup) cfg.mcmc.warmup = warmup;
    if (*o_keep) cfg.mcmc.keep = keep;
    if (*o_thin) cfg.mcmc.thin = thin;
    if (*o_fams) cfg.families = parse_families(families);
    if (*o_model) cfg.model = model;
    if (*o_orient) cfg.orientation = orientation;

    if (validate->parsed()) return cmd_validate(cfg, out);
    if (simulate->parsed()) return cmd_simulate(cfg, args, static_cast<bool>(*o_seed), out);
    if (fitcmd->parsed()) return cmd_fit(cfg, args, out, err);
    if (ladder->parsed()) return cmd_ladder(cfg, args, out, err);
    if (report->parsed()) return cmd_report(cfg, args, out, "report_manifest.json");
    return 1;
  } catch (const GraphError& e) {
    err << "graph error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace srp::cli
