#include "esqpt/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "esqpt/errors.hpp"
#include "esqpt/excited_surfaces.hpp"
#include "esqpt/ibm_quantum.hpp"
#include "esqpt/level_density.hpp"
#include "esqpt/output.hpp"
#include "esqpt/parallel.hpp"
#include "esqpt/stationary_analysis.hpp"

namespace esqpt {

std::vector<double> JobConfig::lambda_grid() const {
  if (lambda) return {*lambda};
  if (!(lambda_step > 0.0)) throw DomainError("lambda-step must be positive");
  if (lambda_stop < lambda_start) throw DomainError("empty lambda range");
  // Inclusive of the stop value up to rounding of the step count.
  const long long count = std::llround(std::floor((lambda_stop - lambda_start) / lambda_step + 1e-9)) + 1;
  std::vector<double> grid;
  for (long long k = 0; k < count; ++k) grid.push_back(lambda_start + k * lambda_step);
  return grid;
}

std::vector<int> JobConfig::n_gamma_list() const {
  std::vector<int> out;
  std::stringstream ss(n_gamma);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      throw DomainError("n-gamma: '" + item + "' is not an integer");
    }
    if (used != item.size()) throw DomainError("n-gamma: '" + item + "' is not an integer");
    out.push_back(v);
  }
  if (out.empty()) throw DomainError("n-gamma list is empty");
  return out;
}

namespace {

struct Output {
  std::string path;
  Table table;
};

struct JobResult {
  std::vector<Output> files;
  nlohmann::json summary = nlohmann::json::object();
};

DensityOptions density_options(const JobConfig& c) {
  DensityOptions o;
  o.n_samples = c.n_samples;
  o.seed = c.seed;
  o.bins = c.e_bins;
  o.e_min = c.e_min;
  o.e_max = c.e_max;
  o.threads = c.threads;
  return o;
}

double single_lambda(const JobConfig& c) {
  if (!c.lambda) throw DomainError(c.command + " needs --lambda");
  return *c.lambda;
}

std::vector<double> energy_centres(const JobConfig& c) {
  if (c.e_bins < 1 || !(c.e_max > c.e_min)) throw DomainError("empty energy grid");
  std::vector<double> e;
  const double h = (c.e_max - c.e_min) / c.e_bins;
  for (int k = 0; k < c.e_bins; ++k) e.push_back(c.e_min + (k + 0.5) * h);
  return e;
}

JobResult job_phase_diagram(const JobConfig& c) {
  const PhaseDiagram pd = phase_diagram(c.beta0p, c.lambda_grid(), density_options(c));
  Output o{c.output, {{"lambda", "energy", "rho", "drho_dE"}, {}}};
  for (std::size_t i = 0; i < pd.lambdas.size(); ++i) {
    for (std::size_t k = 0; k < pd.e_centers.size(); ++k) {
      o.table.add({pd.lambdas[i], pd.e_centers[k], pd.rho(i, k), pd.drho_dE(i, k)});
    }
  }
  return {{o}, {}};
}

JobResult job_density_cut(const JobConfig& c) {
  const ModelParams p(c.beta0p, single_lambda(c));
  const DensityGrid g = mc_density(p, density_options(c));
  Output grid{c.output, {{"energy", "rho", "rho_error", "drho_dE", "drho_error"}, {}}};
  for (int k = 0; k < g.bins(); ++k) {
    grid.table.add({g.center(k), g.rho[k], g.mc_error[k], g.drho_dE[k], g.drho_error[k]});
  }
  Output feats{sibling_path(c.output, "_features"), {{"type", "energy", "bin", "significance"}, {}}};
  for (const auto& f : detect_features(g)) {
    feats.table.add({to_string(f.type), f.energy, static_cast<long long>(f.bin), f.significance});
  }
  return {{grid, feats}, {}};
}

JobResult job_stationary(const JobConfig& c) {
  if (c.lambda) {
    const ModelParams p(c.beta0p, *c.lambda);
    const StationaryCensus census = find_stationary_points(p);
    Output o{c.output,
             {{"lambda", "x", "y", "px", "py", "energy", "index_r", "class", "branch", "degenerate"}, {}}};
    for (const auto& s : census.points) {
      o.table.add({*c.lambda, s.location.x(), s.location.y(), s.location.px(), s.location.py(), s.energy,
                   static_cast<long long>(s.index_r), roman_key(s.singularity_class()), to_string(s.branch),
                   static_cast<long long>(s.degenerate)});
    }
    return {{o}, {{"points", census.points.size()}}};
  }
  const auto lines = trace_borderlines(c.beta0p, c.lambda_grid());
  Output o{c.output, {{"line", "lambda", "energy", "index_r", "class", "branch"}, {}}};
  for (std::size_t l = 0; l < lines.size(); ++l) {
    for (const auto& pt : lines[l].points) {
      o.table.add({static_cast<long long>(l), pt.lambda, pt.energy, static_cast<long long>(pt.index_r),
                   roman_key(lines[l].singularity_class), to_string(lines[l].branch)});
    }
  }
  return {{o}, {{"borderlines", lines.size()}, {"kinetic_borderlines", count_kinetic_borderlines(lines)}}};
}

JobResult job_boundary(const JobConfig& c) {
  Output o{c.output, {{"lambda", "e_min", "e_max", "extrema", "partial"}, {}}};
  for (double l : c.lambda_grid()) {
    const BoundaryAnalysis b = boundary_extrema(ModelParams(c.beta0p, l));
    o.table.add({l, b.e_min, b.e_max, static_cast<long long>(b.extrema.size()), static_cast<long long>(b.partial)});
  }
  return {{o}, {}};
}

JobResult job_spectrum(const JobConfig& c) {
  DiagonalizeOptions opts;
  opts.cache_dir = c.cache_dir;
  const std::vector<double> grid = c.lambda_grid();
  std::vector<SpectrumResult> spectra(grid.size());
  parallel_for(
      grid.size(), [&](std::size_t i) { spectra[i] = diagonalize(ModelParams(c.beta0p, grid[i]), c.n, opts); },
      c.threads > 0 ? c.threads : default_thread_count());
  Output o{c.output, {{"lambda", "level_index", "energy", "slope", "nd_expect"}, {}}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const SpectrumResult& s = spectra[i];
    for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k) {
      o.table.add({grid[i], static_cast<long long>(k), s.eigenvalues[k], s.slopes[k], s.nd_expectation[k]});
    }
  }
  return {{o}, {{"dimension", basis_dimension(c.n)}, {"energy_scale", quantum_energy_scale(c.n)}}};
}

JobResult job_flow(const JobConfig& c) {
  const SpectrumResult s = diagonalize(ModelParams(c.beta0p, single_lambda(c)), c.n, {.cache_dir = c.cache_dir});
  const FlowGrid f = smoothed_flow({s}, energy_centres(c), c.width);
  Output o{c.output, {{"energy", "rho", "jbar", "phibar"}, {}}};
  for (std::size_t k = 0; k < f.e_centers.size(); ++k) o.table.add({f.e_centers[k], f.rhobar[k], f.jbar[k], f.phibar[k]});
  return {{o}, {}};
}

JobResult job_oscillatory(const JobConfig& c) {
  const ModelParams p(c.beta0p, single_lambda(c));
  DensityOptions d = density_options(c);
  d.reference_n = c.n;
  const DensityGrid g = mc_density(p, d);
  const SpectrumResult s = diagonalize(p, c.n, {.cache_dir = c.cache_dir});
  const OscillatoryGrid osc = oscillatory_density(s, g, {c.osc_c, c.sigma_max});
  Output o{c.output, {{"energy", "rho_smooth", "rho_osc", "sigma"}, {}}};
  for (std::size_t k = 0; k < osc.e_centers.size(); ++k) {
    o.table.add({osc.e_centers[k], osc.rho_smooth[k], osc.rho_osc[k], osc.sigma[k]});
  }
  return {{o}, {}};
}

JobResult job_excited_surfaces(const JobConfig& c) {
  const std::vector<double> grid = c.lambda_grid();
  const std::vector<int> ng = c.n_gamma_list();
  std::vector<ExcitedSurface> surfaces(grid.size() * ng.size());
  parallel_for(
      surfaces.size(),
      [&](std::size_t i) {
        surfaces[i] = excited_surface(ModelParams(c.beta0p, grid[i / ng.size()]), c.n, ng[i % ng.size()], c.beta_points);
      },
      c.threads > 0 ? c.threads : default_thread_count());
  Output curves{c.output, {{"lambda", "n_gamma", "beta", "energy"}, {}}};
  Output points{sibling_path(c.output, "_stationary"), {{"lambda", "n_gamma", "beta_star", "e_star", "kind"}, {}}};
  for (const auto& s : surfaces) {
    for (std::size_t k = 0; k < s.beta_grid.size(); ++k) {
      curves.table.add({s.params.lambda, static_cast<long long>(s.n_gamma), s.beta_grid[k], s.energies[k]});
    }
    for (const auto& pt : s.stationary) {
      points.table.add({s.params.lambda, static_cast<long long>(s.n_gamma), pt.beta, pt.energy, to_string(pt.kind)});
    }
  }
  return {{curves, points}, {}};
}

JobResult job_spinodal(const JobConfig& c) {
  const SpinodalResult r = spinodal_points(c.beta0p);
  auto cell = [](const std::optional<double>& v) -> Cell { return v ? Cell(*v) : Cell(std::string()); };
  Output o{c.output, {{"beta0p", "lambda_star", "lambda_star_star"}, {}}};
  o.table.add({c.beta0p, cell(r.lambda_star), cell(r.lambda_star_star)});
  return {{o}, {{"antispinodal_closed_form", antispinodal_closed_form(c.beta0p)}}};
}

const std::map<std::string, std::pair<std::string, std::function<JobResult(const JobConfig&)>>>& commands() {
  static const std::map<std::string, std::pair<std::string, std::function<JobResult(const JobConfig&)>>> m = {
      {"phase-diagram", {"d rho / dE over a lambda x E grid", job_phase_diagram}},
      {"density-cut", {"smooth density and detected features at one lambda", job_density_cut}},
      {"stationary", {"stationary points at one lambda, or critical borderlines over a range", job_stationary}},
      {"boundary", {"energy extrema on the phase-space boundary", job_boundary}},
      {"spectrum", {"L=0 spectrum with level slopes", job_spectrum}},
      {"flow", {"smoothed quantum density and level flow", job_flow}},
      {"oscillatory", {"oscillatory part of the quantum level density", job_oscillatory}},
      {"excited-surfaces", {"excited energy surfaces and their stationary points", job_excited_surfaces}},
      {"spinodal", {"spinodal and antispinodal lambda", job_spinodal}},
  };
  return m;
}

nlohmann::json config_json(const JobConfig& c) {
  nlohmann::json j = {{"beta0p", c.beta0p},
                      {"n", c.n},
                      {"n-samples", c.n_samples},
                      {"seed", c.seed},
                      {"e-bins", c.e_bins},
                      {"e-min", c.e_min},
                      {"e-max", c.e_max},
                      {"n-gamma", c.n_gamma},
                      {"width", c.width},
                      {"osc-c", c.osc_c},
                      {"sigma-max", c.sigma_max},
                      {"beta-points", c.beta_points},
                      {"format", c.format}};
  if (c.lambda) {
    j["lambda"] = *c.lambda;
  } else {
    j["lambda-start"] = c.lambda_start;
    j["lambda-stop"] = c.lambda_stop;
    j["lambda-step"] = c.lambda_step;
  }
  return j;
}

// Flags that reproduce the job; numbers in shortest round-trip form.
std::string rerun_line(const JobConfig& c, const nlohmann::json& inputs) {
  std::string line = "esqpt " + c.command;
  for (const auto& [k, v] : inputs.items()) {
    line += " --" + k + " ";
    if (v.is_string()) line += v.get<std::string>();
    else if (v.is_number_float()) line += format_number(v.get<double>());
    else line += v.dump();
  }
  return line + " --output " + c.output;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  JobConfig c;
  CLI::App app{"Excited-state quantum phase transitions in the L=0 interacting boson model", "esqpt"};
  app.set_config("--config", "", "key=value file; command-line flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  double lambda = 0.0;
  auto* lambda_opt = app.add_option("--lambda", lambda, "single lambda (otherwise the range is used)");
  app.add_option("--beta0p", c.beta0p, "shape parameter beta0'");
  app.add_option("--lambda-start", c.lambda_start);
  app.add_option("--lambda-stop", c.lambda_stop);
  app.add_option("--lambda-step", c.lambda_step);
  app.add_option("--n", c.n, "boson number");
  app.add_option("--n-samples", c.n_samples, "Monte-Carlo samples per density");
  app.add_option("--seed", c.seed);
  app.add_option("--e-bins", c.e_bins);
  app.add_option("--e-min", c.e_min);
  app.add_option("--e-max", c.e_max);
  app.add_option("--n-gamma", c.n_gamma, "comma-separated even N_gamma values");
  app.add_option("--width", c.width, "Gaussian smoothing width of the quantum density");
  app.add_option("--osc-c", c.osc_c, "sigma = c / rho_smooth for the oscillatory density");
  app.add_option("--sigma-max", c.sigma_max);
  app.add_option("--beta-points", c.beta_points);
  app.add_option("--cache-dir", c.cache_dir, "directory for cached L=0 operator matrices");
  app.add_option("--output,-o", c.output, "data file (default <command>.<format>)");
  app.add_option("--format", c.format)->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", c.threads, "worker threads (default ESQPT_THREADS or 1)");
  for (const auto& [name, entry] : commands()) app.add_subcommand(name, entry.first)->fallthrough();
  app.require_subcommand(1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.clear();  // so that the usage shows the shared options, not just the subcommand
    err << "error: " << e.what() << "\n\n" << app.help();
    return 64;
  }

  c.command = app.get_subcommands().front()->get_name();
  if (lambda_opt->count() > 0) c.lambda = lambda;
  if (c.output.empty()) c.output = c.command + "." + c.format;
  if (c.threads <= 0) c.threads = default_thread_count();

  try {
    const auto t0 = std::chrono::steady_clock::now();
    JobResult r = commands().at(c.command).second(c);
    // Data files first; a manifest only appears next to a complete data file.
    for (const auto& f : r.files) write_table(f.path, f.table, c.format);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const nlohmann::json inputs = config_json(c);
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : r.files) files.push_back(f.path);
    for (const auto& f : r.files) {
      nlohmann::json m = {{"tool", "esqpt"},
                          {"version", kVersion},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                        "." + std::to_string(EIGEN_MINOR_VERSION)},
                          {"command", c.command},
                          {"inputs", inputs},
                          {"seed", c.seed},
                          {"threads", c.threads},
                          {"data", f.path},
                          {"outputs", files},
                          {"rows", f.table.rows.size()},
                          {"results", r.summary},
                          {"rerun", rerun_line(c, inputs)},
                          {"wall_time_s", wall}};
      write_file(manifest_path(f.path), m.dump(2) + "\n");
    }
    for (const auto& f : r.files) out << f.path << "\n";
    return 0;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 74;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << "\n";
    return 2;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace esqpt
