// SPDX-License-Identifier: Apache-2.0
//
// pumpmap: optical-pumping geometry evaluation for a solid-state maser
// crystal. Subcommands: trace, mode, overlap, compare, sweep, inspect.
// Exit codes: 0 ok, 2 bad arguments, 3 config error, 4 I/O error,
// 5 numeric failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pumpmap/config.hpp"
#include "pumpmap/emfield.hpp"
#include "pumpmap/fom.hpp"
#include "pumpmap/provenance.hpp"
#include "pumpmap/scene.hpp"
#include "pumpmap/source.hpp"
#include "pumpmap/spectrum.hpp"
#include "pumpmap/tracer.hpp"
#include "pumpmap/version.hpp"
#include "pumpmap/voxelgrid.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pumpmap;

namespace {

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// Paths inside a config file resolve relative to the config's directory.
std::string resolve_near(const std::string& config_path, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || fs::exists(p)) return p;
  fs::path cand = fs::path(config_path).parent_path() / p;
  return cand.string();
}

uint64_t pick_seed(const CLI::Option* seed_opt, uint64_t cli_value) {
  if (seed_opt->count() > 0) return cli_value;
  if (const char* env = std::getenv("PUMPMAP_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("PUMPMAP_SEED is not an integer: " + std::string(env));
    }
  }
  return 1;
}

uint64_t parse_rays(double rays) {
  if (!(rays >= 1.0) || rays != std::floor(rays) || rays > 9.0e15)
    throw CLI::ValidationError("--rays must be a positive integer count");
  return static_cast<uint64_t>(rays);
}

struct LoadedScene {
  Config cfg;
  SceneConfig scene_cfg;
  Scene scene;
  LedSource source;
  double alpha_eff = 0.0; // from spectra when provided, else scalar config
  std::string config_sha;
};

LoadedScene load_scene(const std::string& config_path) {
  LoadedScene ls{Config::from_file(config_path), {}, {}, {}, 0.0, ""};
  ls.config_sha = sha256_hex(ls.cfg.canonical());

  std::optional<Spectrum> emission;
  if (ls.cfg.has("spectra.emission_csv"))
    emission = Spectrum::load_csv(
        resolve_near(config_path, ls.cfg.get_string("spectra.emission_csv")),
        Spectrum::Kind::Emission);
  if (ls.cfg.has("spectra.absorption_csv")) {
    if (!emission)
      throw ConfigError("spectra.absorption_csv given without spectra.emission_csv");
    Spectrum absorption = Spectrum::load_csv(
        resolve_near(config_path, ls.cfg.get_string("spectra.absorption_csv")),
        Spectrum::Kind::Absorption);
    ls.alpha_eff = effective_absorption(*emission, absorption);
    ls.cfg.set("materials.crystal_alpha_mm", ls.alpha_eff);
  }

  ls.scene_cfg = SceneConfig::from_config(ls.cfg);
  if (ls.alpha_eff == 0.0) ls.alpha_eff = ls.scene_cfg.crystal_alpha_mm;
  ls.scene = build_scene(ls.scene_cfg);
  ls.source = LedSource::from_config(ls.cfg, emission ? &*emission : nullptr);
  return ls;
}

VoxelGrid make_grid(const Scene& scene, double pitch) { return make_crystal_grid(scene, pitch); }

void write_manifest(const std::string& out_path, const json& extra,
                    const std::vector<std::string>& output_files, int argc, char** argv) {
  json m;
  std::string cmdline;
  for (int i = 0; i < argc; ++i) {
    if (i) cmdline += ' ';
    cmdline += argv[i];
  }
  m["command"] = cmdline;
  m["version"] = kVersion;
  m["timestamp_utc"] = iso_timestamp();
  for (auto& [k, v] : extra.items()) m[k] = v;
  json outs = json::array();
  for (const auto& f : output_files) outs.push_back({{"path", f}, {"sha256", sha256_file(f)}});
  m["outputs"] = outs;
  std::ofstream o(out_path);
  if (!o) throw IoError("cannot write manifest: " + out_path);
  o << m.dump(2) << "\n";
}

void print_budget(const TraceResult& r) {
  auto frac = [&](double w) { return w / r.launched_w; };
  std::cout.precision(9);
  std::cout << "rays          " << r.rays_traced << "\n"
            << "launched_W    " << r.launched_w << "\n"
            << "absorbed      " << frac(r.absorbed_w) << "\n"
            << "escaped       " << frac(r.escaped_w) << "\n"
            << "retro         " << frac(r.retro_reflected_w) << "\n"
            << "detector      " << frac(r.detector_w) << "\n"
            << "terminated    " << frac(r.terminated_w()) << "\n"
            << "conservation  " << r.conservation_residual() / r.launched_w << "\n"
            << "max_bounces   " << r.max_bounce_depth << "\n";
  if (r.bounce_warning())
    std::cout << "warning: bounce limit truncated more than 0.1% of power\n";
}

json budget_json(const TraceResult& r) {
  return json{{"rays", r.rays_traced},
              {"launched_w", r.launched_w},
              {"absorbed_w", r.absorbed_w},
              {"escaped_w", r.escaped_w},
              {"retro_reflected_w", r.retro_reflected_w},
              {"detector_w", r.detector_w},
              {"terminated_w", r.terminated_w()},
              {"conservation_residual", r.conservation_residual()},
              {"max_bounce_depth", r.max_bounce_depth},
              {"bounce_warning", r.bounce_warning()}};
}

// Shift a scene-frame grid into the cavity frame used by field maps.
void to_cavity_frame(VoxelGrid& g, const Scene& scene) {
  g.origin.z -= scene.cavity_base_z_mm;
}

void write_projection_csv(const std::string& path, const std::vector<double>& img, uint32_t na,
                          uint32_t nb) {
  std::ofstream o(path);
  if (!o) throw IoError("cannot write projection: " + path);
  o.precision(17);
  for (uint32_t b = 0; b < nb; ++b) {
    for (uint32_t a = 0; a < na; ++a) {
      if (a) o << ",";
      o << img[size_t(b) * na + a];
    }
    o << "\n";
  }
}

int axis_index(const std::string& s) {
  if (s == "x") return 0;
  if (s == "y") return 1;
  if (s == "z") return 2;
  throw CLI::ValidationError("--project expects x, y or z");
}

// ---------------------------------------------------------------- trace ---

int cmd_trace(const std::string& config_path, double rays_d, uint64_t seed, int workers,
              double pitch, const std::string& out, const std::vector<std::string>& projections,
              const std::string& obj_path, bool raw, int argc, char** argv) {
  LoadedScene ls = load_scene(config_path);
  TraceOptions opt;
  opt.n_rays = parse_rays(rays_d);
  opt.seed = seed;
  opt.workers = workers;

  VoxelGrid grid = make_grid(ls.scene, pitch);
  TraceResult res = trace(ls.scene, ls.source, opt, &grid);
  print_budget(res);

  bool normalized = false;
  if (!raw) {
    if (grid.total_in_region(Region::Crystal) > 0.0) {
      grid.normalize_region(Region::Crystal, 1.0);
      normalized = true;
    } else {
      std::cout << "note: no crystal deposition; writing raw grid\n";
    }
  }
  to_cavity_frame(grid, ls.scene);
  grid.write(out);
  std::vector<std::string> outputs{out};

  for (const auto& pax : projections) {
    int ax = axis_index(pax);
    auto img = grid.project(ax);
    uint32_t dims[3] = {grid.nx, grid.ny, grid.nz};
    int a = (ax + 1) % 3, b = (ax + 2) % 3;
    if (a > b) std::swap(a, b);
    std::string ppath = out + ".proj_" + pax + ".csv";
    write_projection_csv(ppath, img, dims[a], dims[b]);
    outputs.push_back(ppath);
  }
  if (!obj_path.empty()) {
    ls.scene.export_obj(obj_path);
    outputs.push_back(obj_path);
  }

  json extra{{"subcommand", "trace"},
             {"config", config_path},
             {"config_sha256", sha256_hex(ls.cfg.canonical())},
             {"config_canonical", ls.cfg.canonical()},
             {"seed", seed},
             {"workers", opt.workers},
             {"rays", opt.n_rays},
             {"pitch_mm", pitch},
             {"alpha_eff_mm", ls.alpha_eff},
             {"normalized_region", normalized ? "crystal" : ""},
             {"budget", budget_json(res)}};
  write_manifest(out + ".manifest.json", extra, outputs, argc, argv);
  std::cout << "wrote " << out << "\n";
  return 0;
}

// ----------------------------------------------------------------- mode ---

int cmd_mode(const std::string& config_path, double target_ghz, double pitch,
             const std::string& out, bool tune, double h_min, double h_max, int argc,
             char** argv) {
  Config cfg = Config::from_file(config_path);
  CavitySpec spec = CavitySpec::from_config(cfg);
  if (target_ghz > 0) spec.target_ghz = target_ghz;
  if (pitch > 0) spec.mesh_pitch_mm = pitch;

  ModeResult mode;
  int tune_iters = 0;
  if (tune) {
    if (h_min <= 0) h_min = cfg.get_double("cavity.tune_h_min_mm",
                                           spec.ring_z0_mm + spec.ring_height_mm + 1.0);
    if (h_max <= 0) h_max = cfg.get_double("cavity.tune_h_max_mm", 60.0);
    TuneResult tr = tune_ceiling(spec, spec.target_ghz, h_min, h_max);
    spec = tr.spec;
    mode = std::move(tr.mode);
    tune_iters = tr.iterations;
    std::cout << "tuned ceiling height_mm " << spec.height_mm << " after " << tune_iters
              << " solves\n";
  } else {
    mode = solve_te0_mode(spec);
  }

  mode.field.write(out);
  std::cout.precision(10);
  std::cout << "eigenfrequency_ghz " << mode.freq_ghz << "\n"
            << "residual           " << mode.residual << "\n"
            << "ring_energy_frac   " << mode.ring_energy_fraction << "\n"
            << "stored_energy_J    " << mode.field.energy_joules() << "\n";

  json extra{{"subcommand", "mode"},
             {"config", config_path},
             {"config_sha256", sha256_hex(cfg.canonical())},
             {"config_canonical", cfg.canonical()},
             {"target_ghz", spec.target_ghz},
             {"mesh_pitch_mm", spec.mesh_pitch_mm},
             {"eigenfrequency_ghz", mode.freq_ghz},
             {"residual", mode.residual},
             {"ring_energy_fraction", mode.ring_energy_fraction},
             {"height_mm", spec.height_mm},
             {"tuned", tune},
             {"tune_solves", tune_iters}};
  write_manifest(out + ".manifest.json", extra, {out}, argc, argv);
  std::cout << "wrote " << out << "\n";
  return 0;
}

// -------------------------------------------------------------- overlap ---

int cmd_overlap(const std::string& grid_path, const std::string& field_path,
                const std::string& region_name_s, const std::string& out,
                const std::string& constants_path, double q_loaded, double q0, double pump_w,
                int argc, char** argv) {
  VoxelGrid grid = VoxelGrid::read(grid_path);
  auto [field, renormed] = import_field_map(field_path);
  if (renormed) std::cout << "note: field map renormalized to 1 J\n";
  Region region = region_from_name(region_name_s);

  double delta = overlap_delta(grid, field, region);
  double delta_u = uniform_delta(grid, field, region);
  std::string gamma_s, qm_s;
  if (!constants_path.empty()) {
    SpinConstants sc = SpinConstants::from_config(Config::from_file(constants_path));
    double gamma = cooperativity(sc, delta, q_loaded, pump_w);
    gamma_s = std::to_string(gamma);
    if (q0 > 0) qm_s = std::to_string(qm_from_gamma(q0, gamma));
  }

  std::ostringstream row;
  row.precision(17);
  row << "delta_T2W,delta_uniform_T2W,ratio,gamma,qm,grid_sha256,field_sha256\n"
      << delta << "," << delta_u << "," << delta / delta_u << "," << gamma_s << "," << qm_s
      << "," << sha256_file(grid_path) << "," << sha256_file(field_path) << "\n";
  if (out.empty()) {
    std::cout << row.str();
  } else {
    std::ofstream o(out);
    if (!o) throw IoError("cannot write report: " + out);
    o << row.str();
  }

  std::cout.precision(10);
  std::cout << "delta_T2W          " << delta << "\n"
            << "delta_uniform_T2W  " << delta_u << "\n"
            << "shape_ratio        " << delta / delta_u << "\n";
  if (!out.empty()) {
    json extra{{"subcommand", "overlap"},
               {"grid", grid_path},
               {"field", field_path},
               {"region", region_name_s},
               {"delta_t2w", delta},
               {"delta_uniform_t2w", delta_u}};
    write_manifest(out + ".manifest.json", extra, {out}, argc, argv);
  }
  return 0;
}

// -------------------------------------------------------------- compare ---

struct CaseSpec {
  std::string label;
  std::string config;
  std::string meter_config; // optional
};

std::vector<CaseSpec> parse_cases(const std::vector<std::string>& case_args,
                                  const std::vector<std::string>& meter_args) {
  std::vector<CaseSpec> cases;
  for (const auto& s : case_args) {
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--case expects label=config.cfg, got: " + s);
    cases.push_back({s.substr(0, eq), s.substr(eq + 1), ""});
  }
  for (const auto& s : meter_args) {
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--meter expects label=config.cfg, got: " + s);
    std::string label = s.substr(0, eq);
    bool found = false;
    for (auto& c : cases)
      if (c.label == label) {
        c.meter_config = s.substr(eq + 1);
        found = true;
      }
    if (!found) throw CLI::ValidationError("--meter label has no matching --case: " + label);
  }
  return cases;
}

int cmd_compare(const std::vector<std::string>& case_args,
                const std::vector<std::string>& meter_args, const std::string& field_path,
                double rays_d, uint64_t seed, int workers, double pitch, bool uniform_row,
                const std::string& out, const std::string& maps_prefix, int argc, char** argv) {
  auto cases = parse_cases(case_args, meter_args);
  if (cases.empty()) throw CLI::ValidationError("compare needs at least one --case");
  auto [field, renormed] = import_field_map(field_path);
  if (renormed) std::cout << "note: field map renormalized to 1 J\n";

  TraceOptions opt;
  opt.n_rays = parse_rays(rays_d);
  opt.seed = seed;
  opt.workers = workers;

  std::ostringstream csv;
  csv.precision(17);
  csv << "label,delta_T2W,ratio,absorbed_frac,escaped_frac,retro_frac,detector_frac,"
         "correction_factor,seed,config_sha256\n";

  double delta_first = 0.0;
  std::vector<std::string> outputs;
  std::optional<VoxelGrid> last_grid;
  json case_summaries = json::array();

  for (size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& cs = cases[ci];
    LoadedScene ls = load_scene(cs.config);
    VoxelGrid grid = make_grid(ls.scene, pitch);
    TraceResult res = trace(ls.scene, ls.source, opt, &grid);
    if (grid.total_in_region(Region::Crystal) <= 0.0)
      throw NumericError("region-empty: case " + cs.label + " absorbed nothing in crystal");
    grid.normalize_region(Region::Crystal, 1.0);
    to_cavity_frame(grid, ls.scene);

    double delta = overlap_delta(grid, field, Region::Crystal);
    if (ci == 0) delta_first = delta;

    std::string corr_s;
    if (!cs.meter_config.empty()) {
      LoadedScene meter = load_scene(cs.meter_config);
      double corr = correction_factor(ls.scene, meter.scene, ls.source, opt);
      corr_s = std::to_string(corr);
    }

    auto frac = [&](double w) { return w / res.launched_w; };
    csv << cs.label << "," << delta << "," << delta / delta_first << ","
        << frac(res.absorbed_w) << "," << frac(res.escaped_w) << ","
        << frac(res.retro_reflected_w) << "," << frac(res.detector_w) << "," << corr_s << ","
        << seed << "," << ls.config_sha << "\n";

    case_summaries.push_back(json{{"label", cs.label},
                                  {"config", cs.config},
                                  {"config_sha256", ls.config_sha},
                                  {"delta_t2w", delta},
                                  {"correction_factor", corr_s},
                                  {"budget", budget_json(res)}});

    if (!maps_prefix.empty()) {
      // Fig-style panels: y-axis projections of rho, |B|^2 and rho*|B|^2 on
      // this case's grid footprint.
      uint32_t nx = grid.nx, ny = grid.ny, nzv = grid.nz;
      std::vector<double> rho = grid.project(1);
      std::vector<double> b2(size_t(nx) * nzv, 0.0), rb2(size_t(nx) * nzv, 0.0);
      for (uint32_t k = 0; k < nzv; ++k)
        for (uint32_t j = 0; j < ny; ++j)
          for (uint32_t i = 0; i < nx; ++i) {
            Vec3 c = grid.center(i, j, k);
            double b = field.sample_b2(c.x, c.y, c.z);
            b2[size_t(k) * nx + i] += b;
            rb2[size_t(k) * nx + i] += b * grid.value[grid.index(i, j, k)];
          }
      std::string p0 = maps_prefix + "-" + cs.label + "-rho.csv";
      std::string p1 = maps_prefix + "-" + cs.label + "-b2.csv";
      std::string p2 = maps_prefix + "-" + cs.label + "-rhob2.csv";
      write_projection_csv(p0, rho, nx, nzv);
      write_projection_csv(p1, b2, nx, nzv);
      write_projection_csv(p2, rb2, nx, nzv);
      outputs.push_back(p0);
      outputs.push_back(p1);
      outputs.push_back(p2);
    }
    last_grid = std::move(grid);
  }

  if (uniform_row && last_grid) {
    double du = uniform_delta(*last_grid, field, Region::Crystal);
    csv << "uniform," << du << "," << du / delta_first << ",,,,,,," << "\n";
    case_summaries.push_back(json{{"label", "uniform"}, {"delta_t2w", du}});
  }

  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream o(out);
    if (!o) throw IoError("cannot write report: " + out);
    o << csv.str();
    outputs.insert(outputs.begin(), out);
    json extra{{"subcommand", "compare"}, {"seed", seed},          {"rays", opt.n_rays},
               {"pitch_mm", pitch},       {"field", field_path},   {"cases", case_summaries}};
    write_manifest(out + ".manifest.json", extra, outputs, argc, argv);
  }
  std::cout << csv.str();
  return 0;
}

// ---------------------------------------------------------------- sweep ---

int cmd_sweep(const std::string& config_path, const std::string& param, double from, double to,
              int steps, double rays_d, uint64_t seed, int workers, double pitch,
              const std::string& field_path, const std::string& out,
              const std::string& constants_path, double q_loaded, double pump_w, int argc,
              char** argv) {
  static const std::map<std::string, std::string> sweepable = {
      {"tip_full_angle_deg", "scene.tip_full_angle_deg"},
      {"crystal_alpha_mm", "materials.crystal_alpha_mm"},
      {"insertion_depth_mm", "scene.insertion_depth_mm"},
      {"crystal_diameter_mm", "scene.crystal_diameter_mm"},
  };
  auto it = sweepable.find(param);
  if (it == sweepable.end()) {
    std::string names;
    for (const auto& [k, v] : sweepable) names += (names.empty() ? "" : ", ") + k;
    throw CLI::ValidationError("non-sweepable parameter `" + param + "`; choose one of: " +
                               names);
  }
  if (steps < 1) throw CLI::ValidationError("--steps must be >= 1");

  std::optional<FieldMap> field;
  if (!field_path.empty()) field = import_field_map(field_path).first;
  std::optional<SpinConstants> sc;
  if (!constants_path.empty())
    sc = SpinConstants::from_config(Config::from_file(constants_path));

  std::ostringstream csv;
  csv.precision(17);
  csv << param << ",seed,absorbed_frac,mean_depth_mm,delta_T2W"
      << (sc ? ",gamma" : "") << "\n";

  for (int i = 0; i < steps; ++i) {
    double value = steps == 1 ? from : from + (to - from) * i / double(steps - 1);
    Config cfg = Config::from_file(config_path);
    cfg.set(it->second, value);
    // Spectra (if any) override alpha; a swept alpha must win instead.
    std::optional<Spectrum> emission;
    if (cfg.has("spectra.emission_csv") && param != "crystal_alpha_mm")
      emission = Spectrum::load_csv(resolve_near(config_path,
                                                 cfg.get_string("spectra.emission_csv")),
                                    Spectrum::Kind::Emission);
    if (cfg.has("spectra.absorption_csv") && param != "crystal_alpha_mm" && emission) {
      Spectrum absorption = Spectrum::load_csv(
          resolve_near(config_path, cfg.get_string("spectra.absorption_csv")),
          Spectrum::Kind::Absorption);
      cfg.set("materials.crystal_alpha_mm", effective_absorption(*emission, absorption));
    }

    SceneConfig scfg = SceneConfig::from_config(cfg);
    Scene scene = build_scene(scfg);
    LedSource source = LedSource::from_config(cfg, emission ? &*emission : nullptr);

    TraceOptions opt;
    opt.n_rays = parse_rays(rays_d);
    opt.seed = derive_seed(seed, static_cast<uint64_t>(i));
    opt.workers = workers;
    VoxelGrid grid = make_grid(scene, pitch);
    TraceResult res = trace(scene, source, opt, &grid);

    double mean_depth = grid_mean_depth(grid, Region::Crystal);
    double delta = 0.0;
    if (field && grid.total_in_region(Region::Crystal) > 0.0) {
      grid.normalize_region(Region::Crystal, 1.0);
      to_cavity_frame(grid, scene);
      delta = overlap_delta(grid, *field, Region::Crystal);
    }
    csv << value << "," << opt.seed << "," << res.absorbed_w / res.launched_w << ","
        << mean_depth << "," << delta;
    if (sc) csv << "," << cooperativity(*sc, delta, q_loaded, pump_w);
    csv << "\n";
  }

  if (out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream o(out);
    if (!o) throw IoError("cannot write sweep table: " + out);
    o << csv.str();
    json extra{{"subcommand", "sweep"},
               {"config", config_path},
               {"param", param},
               {"from", from},
               {"to", to},
               {"steps", steps},
               {"master_seed", seed}};
    write_manifest(out + ".manifest.json", extra, {out}, argc, argv);
    std::cout << csv.str();
  }
  return 0;
}

// -------------------------------------------------------------- inspect ---

int cmd_inspect(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  in.close();
  std::cout.precision(10);
  if (std::memcmp(magic, "VGD1", 4) == 0) {
    VoxelGrid g = VoxelGrid::read(path);
    std::cout << "format      VGD1\n"
              << "dims        " << g.nx << " x " << g.ny << " x " << g.nz << "\n"
              << "origin_mm   " << g.origin.x << " " << g.origin.y << " " << g.origin.z << "\n"
              << "pitch_mm    " << g.pitch << "\n"
              << "total_W     " << g.total() << "\n";
    for (int r = 0; r <= 4; ++r) {
      double t = g.total_in_region(static_cast<Region>(r));
      if (t != 0.0)
        std::cout << "region_" << region_name(static_cast<Region>(r)) << "_W  " << t << "\n";
    }
  } else if (std::memcmp(magic, "FMP1", 4) == 0) {
    FieldMap f = FieldMap::read(path);
    double b2max = 0.0;
    for (size_t i = 0; i < f.br.size(); ++i)
      b2max = std::max(b2max, f.br[i] * f.br[i] + f.bz[i] * f.bz[i]);
    std::cout << "format          FMP1\n"
              << "nodes           " << f.nr << " x " << f.nz << "\n"
              << "origin_mm       " << f.r0 << " " << f.z0 << "\n"
              << "spacing_mm      " << f.dr << " " << f.dz << "\n"
              << "frequency_ghz   " << f.freq_ghz << "\n"
              << "energy_J        " << f.energy_joules() << "\n"
              << "peak_B2_T2      " << b2max << "\n";
  } else {
    throw IoError("unrecognized magic in " + path);
  }
  std::cout << "sha256      " << sha256_file(path) << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"optical pump deposition vs cavity mode overlap toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // trace
  auto* t = app.add_subcommand("trace", "Monte Carlo pump deposition into a voxel grid");
  std::string t_config, t_out, t_obj;
  std::vector<std::string> t_proj;
  double t_rays = 1e6, t_pitch = 0.1;
  uint64_t t_seed = 1;
  int t_workers = 1;
  bool t_raw = false;
  t->add_option("--config", t_config, "scene config file")->required();
  t->add_option("--rays", t_rays, "ray count (accepts 1e7 notation)");
  auto* t_seed_opt = t->add_option("--seed", t_seed, "RNG seed (default 1 or PUMPMAP_SEED)");
  t->add_option("--workers", t_workers, "worker threads (default 1, bit-exact)");
  t->add_option("--pitch", t_pitch, "voxel pitch, mm");
  t->add_option("--out", t_out, "output VGD1 grid")->required();
  t->add_option("--project", t_proj, "write CSV projection along axis (x|y|z), repeatable");
  t->add_option("--obj", t_obj, "write debug mesh (Wavefront OBJ)");
  t->add_flag("--raw", t_raw, "skip 1 W crystal normalization of the written grid");

  // mode
  auto* m = app.add_subcommand("mode", "solve the cavity TE01d mode field map");
  std::string m_config, m_out;
  double m_target = 0.0, m_pitch = 0.0, m_hmin = 0.0, m_hmax = 0.0;
  bool m_tune = false;
  m->add_option("--config", m_config, "cavity config file")->required();
  m->add_option("--target-ghz", m_target, "target eigenfrequency, GHz");
  m->add_option("--pitch", m_pitch, "mesh pitch, mm");
  m->add_option("--out", m_out, "output FMP1 field map")->required();
  m->add_flag("--tune", m_tune, "bisect the ceiling height onto the target frequency");
  m->add_option("--h-min", m_hmin, "tuning range lower bound, mm");
  m->add_option("--h-max", m_hmax, "tuning range upper bound, mm");

  // overlap
  auto* o = app.add_subcommand("overlap", "overlap figure of a grid against a field map");
  std::string o_grid, o_field, o_region = "crystal", o_out, o_constants;
  double o_ql = 6000.0, o_q0 = 0.0, o_pump = 1.0;
  o->add_option("--grid", o_grid, "VGD1 deposition grid")->required();
  o->add_option("--field", o_field, "FMP1 field map")->required();
  o->add_option("--region", o_region, "region tag for the integral (default crystal)");
  o->add_option("--out", o_out, "report CSV (default stdout)");
  o->add_option("--constants", o_constants, "spin constants config for gamma");
  o->add_option("--q-loaded", o_ql, "loaded Q for gamma (default 6000)");
  o->add_option("--q0", o_q0, "unloaded Q for the qm column");
  o->add_option("--pump-w", o_pump, "pump power in W for gamma (default 1)");

  // compare
  auto* c = app.add_subcommand("compare", "side-by-side deltas for labelled scene configs");
  std::vector<std::string> c_cases, c_meters;
  std::string c_field, c_out, c_maps;
  double c_rays = 1e6, c_pitch = 0.1;
  uint64_t c_seed = 1;
  int c_workers = 1;
  bool c_uniform = false;
  c->add_option("--case", c_cases, "label=config.cfg (repeatable, first is the baseline)")
      ->required();
  c->add_option("--meter", c_meters, "label=meter_config.cfg for correction factors");
  c->add_option("--field", c_field, "FMP1 field map")->required();
  c->add_option("--rays", c_rays, "ray count per case");
  auto* c_seed_opt = c->add_option("--seed", c_seed, "RNG seed");
  c->add_option("--workers", c_workers, "worker threads");
  c->add_option("--pitch", c_pitch, "voxel pitch, mm");
  c->add_flag("--uniform", c_uniform, "append a uniform-pumping baseline row");
  c->add_option("--out", c_out, "report CSV (default stdout)");
  c->add_option("--maps", c_maps, "prefix for projected rho/B2/rhoB2 CSV maps");

  // sweep
  auto* s = app.add_subcommand("sweep", "1-D parameter sweep");
  std::string s_config, s_param, s_field, s_out, s_constants;
  double s_from = 0.0, s_to = 0.0, s_rays = 2e5, s_pitch = 0.1, s_ql = 6000.0, s_pump = 1.0;
  int s_steps = 1, s_workers = 1;
  uint64_t s_seed = 1;
  s->add_option("--config", s_config, "base scene config")->required();
  s->add_option("--param", s_param,
                "tip_full_angle_deg | crystal_alpha_mm | insertion_depth_mm | "
                "crystal_diameter_mm")
      ->required();
  s->add_option("--from", s_from, "first value")->required();
  s->add_option("--to", s_to, "last value");
  s->add_option("--steps", s_steps, "number of points");
  s->add_option("--rays", s_rays, "rays per point");
  auto* s_seed_opt = s->add_option("--seed", s_seed, "master seed; points derive their own");
  s->add_option("--workers", s_workers, "worker threads");
  s->add_option("--pitch", s_pitch, "voxel pitch, mm");
  s->add_option("--field", s_field, "FMP1 field map for the delta column");
  s->add_option("--out", s_out, "CSV table (default stdout)");
  s->add_option("--constants", s_constants, "spin constants config for gamma column");
  s->add_option("--q-loaded", s_ql, "loaded Q for gamma");
  s->add_option("--pump-w", s_pump, "pump power for gamma");

  // inspect
  auto* i = app.add_subcommand("inspect", "print the header of a VGD1/FMP1 file");
  std::string i_file;
  i->add_option("file", i_file, "file to inspect")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp" ||
        e.get_name() == "CallForVersion")
      return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (*t)
      return cmd_trace(t_config, t_rays, pick_seed(t_seed_opt, t_seed), t_workers, t_pitch,
                       t_out, t_proj, t_obj, t_raw, argc, argv);
    if (*m) return cmd_mode(m_config, m_target, m_pitch, m_out, m_tune, m_hmin, m_hmax, argc,
                            argv);
    if (*o)
      return cmd_overlap(o_grid, o_field, o_region, o_out, o_constants, o_ql, o_q0, o_pump,
                         argc, argv);
    if (*c)
      return cmd_compare(c_cases, c_meters, c_field, c_rays, pick_seed(c_seed_opt, c_seed),
                         c_workers, c_pitch, c_uniform, c_out, c_maps, argc, argv);
    if (*s)
      return cmd_sweep(s_config, s_param, s_from, s_to, s_steps, s_rays,
                       pick_seed(s_seed_opt, s_seed), s_workers, s_pitch, s_field, s_out,
                       s_constants, s_ql, s_pump, argc, argv);
    if (*i) return cmd_inspect(i_file);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
  return 2;
}
