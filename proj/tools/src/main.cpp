#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mblab/cli/commands.hpp"
#include "mblab/cli/config.hpp"
#include "mblab/error.hpp"

namespace {

using namespace mblab;
using namespace mblab::cli;

struct Overrides {
  std::string config;
  std::optional<std::string> output;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_sites;
  std::optional<int> n_excitations;
  std::vector<double> eps;
  std::vector<double> v;
  std::optional<std::size_t> realizations;
  std::optional<double> t_max;
  std::optional<double> dt;
  std::optional<std::string> device_file;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("-o,--output", o.output, "output root (overrides MBLAB_OUTPUT_ROOT and the config)");
  app->add_option("-w,--workers", o.workers, "parallel workers")->check(CLI::PositiveNumber);
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--n-sites", o.n_sites, "number of sites");
  app->add_option("--n-excitations", o.n_excitations, "number of excitations");
  app->add_option("--eps", o.eps, "energy-density targets")->delimiter(',');
  app->add_option("--v", o.v, "disorder amplitudes in MHz")->delimiter(',');
  app->add_option("-k,--realizations", o.realizations, "disorder realizations per cell");
  app->add_option("--t-max", o.t_max, "final time in ns");
  app->add_option("--dt", o.dt, "sampling interval in ns");
  app->add_option("--device-file", o.device_file, "device parameter JSON for the couplings");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.workers) c.workers = *o.workers;
  if (o.seed) c.master_seed = *o.seed;
  if (o.n_sites) {
    c.n_sites = *o.n_sites;
    if (!o.n_excitations) c.n_excitations = half_filling(c.n_sites);
  }
  if (o.n_excitations) c.n_excitations = *o.n_excitations;
  if (!o.eps.empty()) c.eps_grid = o.eps;
  if (!o.v.empty()) c.v_grid_mhz = o.v;
  if (o.realizations) c.realizations = *o.realizations;
  if (o.t_max) c.t_max_ns = *o.t_max;
  if (o.dt) c.dt_ns = *o.dt;
  if (o.device_file) {
    c.couplings.source = CouplingSource::Device;
    c.couplings.device_file = *o.device_file;
  }
  if (o.output) c.output_dir = *o.output;
  validate(c);
  return c;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
      return 2;
    case ErrorCode::IoError:
      return 3;
    default:
      return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disorder-driven localization sweeps for XY qubit arrays"};
  app.require_subcommand(0, 1);
  bool print_defaults = false;
  app.add_flag("--print-config", print_defaults, "print the default configuration and exit");

  Overrides o;
  auto* sweep = app.add_subcommand("sweep", "imbalance dynamics over the (eps, V) grid, resumable");
  auto* rmap = app.add_subcommand("rmap", "mean gap ratio over the (eps, V) grid");
  auto* fit = app.add_subcommand("fit", "power-law fits and critical disorder from a finished sweep");
  auto* dos = app.add_subcommand("dos", "Fock-state versus eigenstate densities of states");
  auto* finite = app.add_subcommand("finite-size", "final and diagonal-ensemble imbalance versus system size");
  auto* evolve = app.add_subcommand("evolve", "one quench at the first eps and V of the configuration");
  auto* print = app.add_subcommand("print-config", "print the resolved configuration as JSON");
  for (auto* s : {sweep, rmap, fit, dos, finite, evolve, print}) add_common(s, o);

  std::optional<int> min_sites;
  finite->add_option("--min-sites", min_sites, "smallest system size");
  std::optional<std::size_t> max_units;
  sweep->add_option("--max-units", max_units, "stop after this many newly computed units");
  bool per_eps = false;
  std::optional<std::string> run_dir;
  fit->add_flag("--per-eps-baseline", per_eps, "fit the baseline separately for each eps");
  fit->add_option("--run-dir", run_dir, "run directory (default: derived from the configuration)");
  std::size_t realization = 0;
  bool dump = false;
  evolve->add_option("--realization", realization, "realization index");
  evolve->add_flag("--dump-states", dump, "write the raw state vectors");

  CLI11_PARSE(app, argc, argv);

  try {
    if (print_defaults) {
      std::cout << to_json(RunConfig{}).dump(2) << "\n";
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 2;
    }
    RunConfig c = resolve(o);
    if (*finite) {
      if (min_sites) c.finite_size.min_sites = *min_sites;
      if (o.realizations) c.finite_size.realizations = *o.realizations;
      if (!o.eps.empty()) c.finite_size.eps = o.eps;
      if (!o.v.empty()) c.finite_size.v_mhz = o.v;
    }
    const auto root = output_root(c, o.output);
    if (*print) {
      std::cout << to_json(c).dump(2) << "\n";
    } else if (*sweep) {
      const SweepResult r = cmd_sweep(c, root, max_units);
      std::printf("%s done=%zu gaps=%zu pending=%zu\n", r.run_dir.string().c_str(), r.done, r.gaps, r.pending);
    } else if (*rmap) {
      std::printf("%s\n", cmd_rmap(c, root).string().c_str());
    } else if (*fit) {
      FitConfig f = c.fit;
      if (per_eps) f.per_eps_baseline = true;
      const auto dir = run_dir ? std::filesystem::path(*run_dir) : root / run_id(c);
      const FitResult r = cmd_fit(dir, f);
      std::printf("%s fitted=%zu skipped=%zu vc=%zu\n", (dir / "summary").string().c_str(), r.fitted, r.skipped,
                  r.vc_rows);
    } else if (*dos) {
      std::printf("%s\n", cmd_dos(c, root).string().c_str());
    } else if (*finite) {
      std::printf("%s\n", cmd_finite_size(c, root).string().c_str());
    } else if (*evolve) {
      std::printf("%s\n", cmd_evolve(c, root, realization, dump).string().c_str());
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
