#include "hip/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "hip/hip_assembly.hpp"
#include "hip/linalg.hpp"
#include "hip/mesh.hpp"

namespace hip::cli {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Instance {
  mesh::Mesh m;
  fem::DofMap dofmap;
  verify::Problem prob;
  assembly::Scheme scheme;
  assembly::PenaltyConfig pen;
};

Instance make_instance(const RunConfig& cfg, int n) {
  Instance in{mesh::generate(cfg.mesh == "tri" ? mesh::ElementKind::triangle
                                               : mesh::ElementKind::quad,
                             n),
              {},
              verify::make_problem(cfg.test, cfg.lambda),
              assembly::Scheme::from_name(cfg.scheme),
              {cfg.alpha0, cfg.delta,
               cfg.kappa_mode == "unit" ? assembly::KappaMode::unit
                                        : assembly::KappaMode::normal}};
  in.dofmap = fem::build_dofmap(in.m, cfg.k);
  return in;
}

LevelResult solve_level(const RunConfig& cfg, int n) {
  Instance in = make_instance(cfg, n);
  const assembly::AssemblyContext ctx(in.m, cfg.k, cfg.quad_exactness);
  const assembly::SolveResult sol =
      assembly::solve_hip(in.m, ctx, in.dofmap, in.prob.K, in.scheme, in.pen, in.prob.f,
                          cfg.tol);

  LevelResult lv;
  lv.n = n;
  lv.h = 1.0 / n;
  lv.err_l2 = verify::l2_error(in.m, ctx, in.dofmap, sol.field, in.prob);
  lv.err_l2_disc = verify::l2_error_discrete(in.m, ctx, in.dofmap, sol.field, in.prob);
  lv.err_energy = verify::energy_error(in.m, ctx, in.dofmap, sol.field, in.prob, in.pen);
  lv.err_enriched = verify::enriched_error(in.m, ctx, in.dofmap, sol.field, in.prob, in.pen);
  lv.min_sample = verify::min_sample(in.m, ctx, in.dofmap, sol.field);

  for (double v : {lv.err_l2, lv.err_l2_disc, lv.err_energy, lv.err_enriched, lv.min_sample})
    if (!std::isfinite(v))
      throw linalg::solver_error("non-finite error diagnostic at n=" + std::to_string(n), v);
  return lv;
}

void parse_sweep_spec(const std::string& spec, double& lo, double& hi, double& step) {
  std::istringstream ss(spec);
  char c1 = 0, c2 = 0;
  if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !ss.eof())
    throw std::invalid_argument("alpha0 sweep must have the form MIN:MAX:STEP");
  if (!(lo > 0.0) || !(hi >= lo) || !(step > 0.0))
    throw std::invalid_argument("alpha0 sweep needs 0 < MIN <= MAX and STEP > 0");
}

}  // namespace

void RunConfig::finalize() {
  if (test != "a" && test != "b" && test != "c")
    throw std::invalid_argument("test must be one of a, b, c");

  if (scheme.empty()) scheme = "sip";
  if (k == 0) k = (test == "a") ? 2 : 1;
  if (alpha0 == 0.0) alpha0 = (test == "c") ? 2.0 : 4.0;
  if (lambda == 0.0) lambda = (test == "b") ? 1e-3 : 1.0;
  if (mesh.empty()) mesh = (test == "c") ? "quad" : "tri";
  if (levels.empty()) {
    if (test == "a")
      levels = {16, 32, 64, 128};
    else if (test == "b")
      levels = {32};
    else
      levels = {8, 16, 32, 64};
  }

  if (scheme != "sip" && scheme != "iip" && scheme != "nip")
    throw std::invalid_argument("scheme must be one of sip, iip, nip");
  if (k < 1 || k > 6) throw std::invalid_argument("k must be in [1,6]");
  if (!(alpha0 > 0.0)) throw std::invalid_argument("alpha0 must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (kappa_mode != "unit" && kappa_mode != "normal")
    throw std::invalid_argument("kappa-mode must be unit or normal");
  if (mesh != "tri" && mesh != "quad") throw std::invalid_argument("mesh must be tri or quad");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (quad_exactness < 0 || quad_exactness > 60)
    throw std::invalid_argument("quad-exactness must be in [0,60]");

  for (size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 1) throw std::invalid_argument("levels must be >= 1");
    if (i > 0 && levels[i] <= levels[i - 1])
      throw std::invalid_argument("levels must be strictly increasing");
    if ((test == "b" || test == "c") && levels[i] % 2 != 0)
      throw std::invalid_argument("tests b and c need even n so elements do not straddle "
                                  "the quadrant interfaces");
  }

  if (!sweep.empty()) {
    if (test != "c" || mesh != "quad")
      throw std::invalid_argument("the alpha0 sweep is defined for test c on quad meshes");
    double lo, hi, step;
    parse_sweep_spec(sweep, lo, hi, step);
  }
  if (kappa_ablation && test != "b")
    throw std::invalid_argument("the kappa ablation is defined for test b");
}

ConvergenceResult run_convergence(const RunConfig& cfg) {
  ConvergenceResult res;
  res.config = cfg;
  std::vector<double> hs, e_l2, e_en, e_enr, e_disc;
  for (int n : cfg.levels) {
    res.levels.push_back(solve_level(cfg, n));
    const LevelResult& lv = res.levels.back();
    hs.push_back(lv.h);
    e_l2.push_back(lv.err_l2);
    e_en.push_back(lv.err_energy);
    e_enr.push_back(lv.err_enriched);
    e_disc.push_back(lv.err_l2_disc);
  }
  res.ecr_l2 = verify::ecr(e_l2, hs);
  res.ecr_energy = verify::ecr(e_en, hs);
  res.ecr_enriched = verify::ecr(e_enr, hs);
  res.ecr_l2_disc = verify::ecr(e_disc, hs);
  res.expected = verify::expected_rates(assembly::Scheme::from_name(cfg.scheme).epsilon,
                                        cfg.delta, cfg.k);
  return res;
}

SweepResult run_alpha_sweep(const RunConfig& cfg) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  parse_sweep_spec(cfg.sweep, lo, hi, step);
  const int count = static_cast<int>(std::floor((hi - lo) / step + 0.5)) + 1;

  SweepResult res;
  res.points.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    RunConfig point = cfg;
    point.alpha0 = lo + i * step;
    const LevelResult lv = solve_level(point, cfg.levels.front());
    res.points.push_back({point.alpha0, lv.err_l2, lv.err_l2_disc});
  }
  res.argmin_l2 = res.points.front().alpha0;
  res.argmin_l2_disc = res.points.front().alpha0;
  double best = res.points.front().err_l2, best_disc = res.points.front().err_l2_disc;
  for (const auto& p : res.points) {
    if (p.err_l2 < best) {
      best = p.err_l2;
      res.argmin_l2 = p.alpha0;
    }
    if (p.err_l2_disc < best_disc) {
      best_disc = p.err_l2_disc;
      res.argmin_l2_disc = p.alpha0;
    }
  }
  return res;
}

AblationResult run_kappa_ablation(const RunConfig& cfg) {
  AblationResult res;
  for (const char* mode : {"unit", "normal"}) {
    RunConfig variant = cfg;
    variant.kappa_mode = mode;
    const LevelResult lv = solve_level(variant, cfg.levels.front());
    res.rows.push_back({mode, lv.err_l2, lv.min_sample});
  }
  return res;
}

std::string to_csv(const ConvergenceResult& r) {
  std::ostringstream os;
  os << "n,h,err_l2,err_energy,err_enriched,ecr_l2,ecr_energy,err_l2_disc,ecr_l2_disc,"
        "ecr_enriched\n";
  for (size_t i = 0; i < r.levels.size(); ++i) {
    const LevelResult& lv = r.levels[i];
    os << lv.n << ',' << num(lv.h) << ',' << num(lv.err_l2) << ',' << num(lv.err_energy)
       << ',' << num(lv.err_enriched) << ',';
    if (i > 0) os << num(r.ecr_l2[i - 1]);
    os << ',';
    if (i > 0) os << num(r.ecr_energy[i - 1]);
    os << ',' << num(lv.err_l2_disc) << ',';
    if (i > 0) os << num(r.ecr_l2_disc[i - 1]);
    os << ',';
    if (i > 0) os << num(r.ecr_enriched[i - 1]);
    os << '\n';
  }
  os << "# expected_rates: energy=" << short_num(r.expected.energy)
     << " l2=" << short_num(r.expected.l2) << " (mu=" << short_num(r.expected.mu)
     << " r_delta=" << short_num(r.expected.r_delta)
     << " s_delta=" << short_num(r.expected.s_delta) << ")\n";
  return os.str();
}

std::string to_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "alpha0,err_l2,err_l2_disc\n";
  for (const auto& p : r.points)
    os << num(p.alpha0) << ',' << num(p.err_l2) << ',' << num(p.err_l2_disc) << '\n';
  os << "# argmin: alpha0_l2=" << short_num(r.argmin_l2)
     << " alpha0_l2_disc=" << short_num(r.argmin_l2_disc) << '\n';
  return os.str();
}

std::string to_csv(const AblationResult& r) {
  std::ostringstream os;
  os << "kappa_mode,err_l2,min_sample\n";
  for (const auto& row : r.rows)
    os << row.kappa_mode << ',' << num(row.err_l2) << ',' << num(row.min_sample) << '\n';
  return os.str();
}

std::vector<std::pair<std::string, std::string>> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("config line is not key:value: '" + line + "'");
    const std::string key = trim(line.substr(0, colon));
    const std::string value = trim(line.substr(colon + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config line is not key:value: '" + line + "'");
    entries.emplace_back(key, value);
  }
  return entries;
}

namespace {

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + s + "'");
}

// Apply config-file entries for flags the command line did not set.
void apply_config(const std::vector<std::pair<std::string, std::string>>& entries,
                  const CLI::App& app, RunConfig& cfg) {
  for (const auto& [key, value] : entries) {
    const std::string flag = "--" + key;
    const CLI::Option* opt = nullptr;
    try {
      opt = app.get_option(flag);
    } catch (const CLI::OptionNotFound&) {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
    if (opt->count() > 0) continue;  // command line wins

    if (key == "test") cfg.test = value;
    else if (key == "scheme") cfg.scheme = value;
    else if (key == "k") cfg.k = std::stoi(value);
    else if (key == "delta") cfg.delta = std::stod(value);
    else if (key == "alpha0") cfg.alpha0 = std::stod(value);
    else if (key == "alpha0-sweep") cfg.sweep = value;
    else if (key == "lambda") cfg.lambda = std::stod(value);
    else if (key == "kappa-mode") cfg.kappa_mode = value;
    else if (key == "mesh") cfg.mesh = value;
    else if (key == "levels") cfg.levels = parse_int_list(value);
    else if (key == "tol") cfg.tol = std::stod(value);
    else if (key == "deterministic") cfg.deterministic = parse_bool(value);
    else if (key == "out") cfg.out = value;
    else if (key == "kappa-ablation") cfg.kappa_ablation = parse_bool(value);
    else if (key == "quad-exactness") cfg.quad_exactness = std::stoi(value);
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

}  // namespace

int run_main(int argc, const char* const* argv) {
  RunConfig cfg;
  std::string config_path;

  CLI::App app{"hybridized interior-penalty DG convergence harness"};
  // Required overall, but a config file may supply it, so requiredness is
  // enforced after the merge in finalize().
  app.add_option("--test", cfg.test, "benchmark problem: a, b or c");
  app.add_option("--scheme", cfg.scheme, "sip, iip or nip (default sip)");
  app.add_option("--k", cfg.k, "polynomial degree 1..6");
  app.add_option("--delta", cfg.delta, "penalty exponent shift (default 0)");
  app.add_option("--alpha0", cfg.alpha0, "penalty prefactor (default: 2 for test c, else 4)");
  app.add_option("--alpha0-sweep", cfg.sweep, "sweep alpha0 over MIN:MAX:STEP (test c)");
  app.add_option("--lambda", cfg.lambda, "anisotropy ratio (tests b and c)");
  app.add_option("--kappa-mode", cfg.kappa_mode, "penalty diffusivity: unit or normal");
  app.add_option("--mesh", cfg.mesh, "element kind: tri or quad");
  app.add_option("--levels", cfg.levels, "mesh subdivisions, e.g. 16,32,64")->delimiter(',');
  app.add_option("--tol", cfg.tol, "linear-solver relative residual target");
  app.add_flag("--deterministic", cfg.deterministic,
               "accepted for compatibility; execution is always serial and reproducible");
  app.add_option("--out", cfg.out, "CSV output path (default stdout)");
  app.add_flag("--kappa-ablation", cfg.kappa_ablation,
               "compare unit vs normal penalty diffusivity (test b)");
  app.add_option("--quad-exactness", cfg.quad_exactness,
                 "override the volume/face quadrature exactness (default 2k+4)");
  app.add_option("--config", config_path, "key:value file supplying defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!config_path.empty()) apply_config(load_config(config_path), app, cfg);
    cfg.finalize();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  std::string csv;
  try {
    if (!cfg.sweep.empty())
      csv = to_csv(run_alpha_sweep(cfg));
    else if (cfg.kappa_ablation)
      csv = to_csv(run_kappa_ablation(cfg));
    else
      csv = to_csv(run_convergence(cfg));
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }

  if (cfg.out.empty()) {
    std::cout << csv;
  } else {
    std::ofstream out(cfg.out);
    if (!out) {
      std::cerr << "error: cannot open output file '" << cfg.out << "'\n";
      return 2;
    }
    out << csv;
  }
  return 0;
}

}  // namespace hip::cli
