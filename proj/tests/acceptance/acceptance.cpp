#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mblab/analysis.hpp"
#include "mblab/cli/commands.hpp"
#include "mblab/cli/config.hpp"
#include "mblab/evolve.hpp"
#include "mblab/io.hpp"
#include "mblab/observables.hpp"
#include "mblab/prepare.hpp"
#include "mblab/random.hpp"
#include "mblab/spectrum.hpp"

using namespace mblab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::size_t env_count(const char* name, std::size_t fallback) {
  const char* v = std::getenv(name);
  return v ? std::stoul(v) : fallback;
}

fs::path scratch_root() {
  const char* v = std::getenv("MBLAB_ACCEPTANCE_DIR");
  return v ? fs::path(v) : fs::temp_directory_path() / "mblab_acceptance";
}

std::vector<double> column(const io::CsvTable& t, std::string_view name) {
  const std::size_t c = t.column(name);
  std::vector<double> out;
  for (const auto& r : t.rows) out.push_back(r[c].empty() ? std::nan("") : std::stod(r[c]));
  return out;
}

HamiltonianOperator random_instance(int n, double v, std::uint64_t seed) {
  return build_hamiltonian(enumerate_sector(n, half_filling(n)), default_device_couplings(n),
                           sample_disorder(n, v, seed));
}

FockState random_fock(const SectorBasis& basis, std::uint64_t seed) {
  Rng rng(seed);
  return basis.state_at(rng.below(basis.size()));
}

// Shared 19-site sweeps: eps = 0.5 over V in {4, 16, 38, 50} to 1500 ns, and
// eps = 0.15 at V = 16 to 1000 ns.
class LargeSweeps {
 public:
  const fs::path& main_run() {
    if (!main_) {
      cli::RunConfig c = base();
      c.eps_grid = {0.5};
      c.v_grid_mhz = {4.0, 16.0, 38.0, 50.0};
      c.t_max_ns = 1500.0;
      main_ = run(c);
    }
    return *main_;
  }
  const fs::path& low_energy_run() {
    if (!low_) {
      cli::RunConfig c = base();
      c.eps_grid = {0.15};
      c.v_grid_mhz = {16.0};
      c.t_max_ns = 1000.0;
      c.master_seed = 2;
      low_ = run(c);
    }
    return *low_;
  }

 private:
  static cli::RunConfig base() {
    cli::RunConfig c;
    c.n_sites = 19;
    c.n_excitations = 9;
    c.realizations = 20;
    c.dt_ns = 20.0;
    c.snapshot_times_ns = {1000.0};
    c.observables.pr = false;
    c.observables.f_q = false;
    return c;
  }
  static fs::path run(const cli::RunConfig& c) {
    const cli::SweepResult r = cli::cmd_sweep(c, scratch_root() / "sweeps");
    if (!r.complete) throw std::runtime_error("sweep did not complete");
    return r.run_dir;
  }
  std::optional<fs::path> main_, low_;
};

LargeSweeps sweeps;

Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t count = 0;
  const std::vector<double> at{0.0, 1500.0};
  for (double v : {4.0, 16.0, 50.0}) {
    for (std::uint64_t i = 0; i < 10; ++i) {
      const HamiltonianOperator h = random_instance(8, v, derive_seed(101, {static_cast<std::uint64_t>(v), i}));
      const StateVector psi0 = fock_vector(h.basis(), random_fock(h.basis(), derive_seed(102, {i})));
      const Trajectory tr = evolve_krylov(h, psi0, at, {.keep_states = true});
      const StateVector exact = DensePropagator(h).at(psi0, 1500.0);
      worst = std::max(worst, (tr.states.back() - exact).cwiseAbs().maxCoeff());
      ++count;
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-8 && secs < 10.0 && count == 30,
          fmt("%zu instances, max amplitude error %.2e (< 1e-8), %.2f s (< 10 s)", count, worst, secs)};
}

Outcome conservation() {
  const fs::path run = sweeps.main_run();
  double norm_drift = 0.0, energy_drift = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const fs::path cell = run / "cells" / cli::cell_file_name(0.5, 16.0, k);
    if (!fs::exists(cell)) continue;
    const io::CsvTable t = io::read_csv(cell);
    const auto norm = column(t, "norm");
    const auto e = column(t, "energy_mhz");
    for (std::size_t i = 0; i < norm.size(); ++i) {
      norm_drift = std::max(norm_drift, std::abs(norm[i] - 1.0));
      energy_drift = std::max(energy_drift, std::abs(e[i] - e[0]) / std::abs(e[0]));
    }
    ++used;
  }
  return {used == 3 && norm_drift < 1e-9 && energy_drift < 1e-8,
          fmt("(19, 9) V=16 MHz, %zu realizations to 1500 ns: max |norm - 1| %.2e (< 1e-9), max |dE/E0| %.2e "
              "(< 1e-8)",
              used, norm_drift, energy_drift)};
}

Outcome imbalance_identity() {
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const int n = 4 + static_cast<int>(i % 11);
    const HamiltonianOperator h = random_instance(n, 4.0 + static_cast<double>(i % 47), derive_seed(301, {i}));
    const FockState s = random_fock(h.basis(), derive_seed(302, {i}));
    const double value = generalized_imbalance(fock_vector(h.basis(), s), h.basis(), ImbalancePattern(s));
    worst = std::max(worst, std::abs(value - 1.0));
  }
  return {worst <= 1e-12, fmt("100 instances (4 to 14 sites), max |I_gen(0) - 1| %.2e (<= 1e-12)", worst)};
}

Outcome level_statistics() {
  const std::size_t k = 50;
  const auto basis = enumerate_sector(14, 7);
  const auto hops = std::make_shared<const HoppingTable>(basis, default_device_couplings(14));
  std::map<double, double> mean;
  for (double v : {4.0, 50.0}) {
    double sum = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      const HamiltonianOperator h(hops, sample_disorder(14, v, derive_seed(401, {static_cast<std::uint64_t>(v), r})));
      const EigenSystem es = full_spectrum(h, false);
      sum += mean_r_central(std::span<const double>(es.energies.data(), es.size()), 0.5).mean;
    }
    mean[v] = sum / static_cast<double>(k);
  }
  const bool low = std::abs(mean[4.0] - kGoeMeanR) <= 0.015;
  const bool high = std::abs(mean[50.0] - 0.3863) <= 0.02;
  return {low && high, fmt("(14, 7), %zu realizations, central half: <r>(4 MHz) = %.4f (0.5307 +- 0.015), "
                           "<r>(50 MHz) = %.4f (0.3863 +- 0.02)",
                           k, mean[4.0], mean[50.0])};
}

double heatmap_mean(const fs::path& run, double eps, double v, double t, std::size_t* k) {
  const io::CsvTable h = io::read_csv(run / "summary" / "heatmap.csv");
  const auto e = column(h, "eps"), vv = column(h, "v_mhz"), tt = column(h, "t_ns"), m = column(h, "i_gen_mean"),
             kk = column(h, "k");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (e[i] == eps && vv[i] == v && tt[i] == t) {
      *k = static_cast<std::size_t>(kk[i]);
      return m[i];
    }
  }
  return std::nan("");
}

Outcome contrast() {
  std::size_t k_low = 0, k_mid = 0;
  const double low = heatmap_mean(sweeps.low_energy_run(), 0.15, 16.0, 1000.0, &k_low);
  const double mid = heatmap_mean(sweeps.main_run(), 0.5, 16.0, 1000.0, &k_mid);
  const double diff = low - mid;
  return {k_low == 20 && k_mid == 20 && diff > 0.15,
          fmt("(19, 9) V=16 MHz, I_gen(1000 ns): eps=0.15 %.4f (k=%zu), eps=0.5 %.4f (k=%zu), difference %.4f "
              "(> 0.15)",
              low, k_low, mid, k_mid, diff)};
}

Outcome exponents() {
  const fs::path run = sweeps.main_run();
  cli::cmd_fit(run, cli::FitConfig{});
  const io::CsvTable t = io::read_csv(run / "summary" / "fits.csv");
  const auto v = column(t, "v_mhz"), xi = column(t, "xi"), err = column(t, "xi_err");
  std::map<double, XiPoint> by_v;
  std::vector<XiPoint> curve;
  for (std::size_t i = 0; i < v.size(); ++i) {
    by_v[v[i]] = {v[i], xi[i], err[i]};
    curve.push_back(by_v[v[i]]);
  }
  for (double need : {4.0, 16.0, 38.0, 50.0}) {
    if (!by_v.count(need)) return {false, fmt("no fit at V=%g MHz", need)};
  }
  const double x4 = by_v[4.0].xi, x16 = by_v[16.0].xi, x50 = by_v[50.0].xi, s50 = by_v[50.0].xi_err;
  const Baseline b = baseline_xi(curve, {38.0, 50.0});
  const bool decreasing = x4 > x16 && x16 > x50;
  const bool near = std::abs(x50 - b.value) <= 2.0 * s50;
  return {decreasing && near,
          fmt("eps=0.5, k=20: xi(4)=%.4f > xi(16)=%.4f > xi(50)=%.4f; baseline[38,50]=%.4f, "
              "|xi(50)-baseline|=%.4f (<= 2 sigma = %.4f)",
              x4, x16, x50, b.value, std::abs(x50 - b.value), 2.0 * s50)};
}

Outcome diagonal_ensemble_oracle() {
  double worst = 0.0;
  const auto sched = uniform_schedule(1e5, 20.0);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const HamiltonianOperator h = random_instance(12, 16.0, derive_seed(701, {i}));
    const FockState s = random_fock(h.basis(), derive_seed(702, {i}));
    const ImbalancePattern pattern(s);
    const StateVector psi0 = fock_vector(h.basis(), s);
    const double de = diagonal_ensemble_imbalance(full_spectrum(h, true), psi0, pattern, h.basis());
    double integral = 0.0, prev_t = 0.0, prev_v = 0.0;
    bool started = false;
    evolve_krylov(h, psi0, sched, {.track_energy = false}, [&](std::size_t, double t, const StateVector& psi) {
      if (t < 1e4) return;
      const double v = generalized_imbalance(psi, h.basis(), pattern);
      if (started) integral += 0.5 * (v + prev_v) * (t - prev_t);
      started = true;
      prev_t = t;
      prev_v = v;
    });
    worst = std::max(worst, std::abs(integral / (1e5 - 1e4) - de));
  }
  return {worst < 1e-3, fmt("(12, 6) V=16 MHz, 10 instances: max |DE - time average over [1e4, 1e5] ns| %.2e "
                            "(< 1e-3)",
                            worst)};
}

Outcome density_of_states() {
  const std::size_t k = env_count("MBLAB_ACCEPTANCE_DOS_REALIZATIONS", 10);
  const auto basis = enumerate_sector(14, 7);
  const auto hops = std::make_shared<const HoppingTable>(basis, default_device_couplings(14));
  std::map<double, std::pair<Histogram, Histogram>> pooled;
  for (double v : {4.0, 50.0}) {
    Histogram fock(20, 0.0, 1.0), eig(20, 0.0, 1.0);
    for (std::size_t r = 0; r < k; ++r) {
      const HamiltonianOperator h(hops, sample_disorder(14, v, derive_seed(801, {static_cast<std::uint64_t>(v), r})));
      const EigenSystem es = full_spectrum(h, false);
      for (double e : h.diagonal()) fock.add(energy_density(e, es.e_min(), es.e_max()));
      for (Eigen::Index a = 0; a < es.energies.size(); ++a) {
        eig.add(energy_density(es.energies(a), es.e_min(), es.e_max()));
      }
    }
    pooled.emplace(v, std::make_pair(fock, eig));
  }
  const double tv = total_variation(pooled.at(50.0).first, pooled.at(50.0).second);
  const auto& [f4, e4] = pooled.at(4.0);
  const bool under = f4.count(0) < e4.count(0) && f4.count(19) < e4.count(19);
  return {tv < 0.05 && under,
          fmt("(14, 7), %zu realizations pooled, 20 bins: TV(50 MHz) = %.4f (< 0.05); V=4 MHz edge counts "
              "Fock/eigen low %zu/%zu, high %zu/%zu",
              k, tv, f4.count(0), e4.count(0), f4.count(19), e4.count(19))};
}

Outcome finite_size() {
  FiniteSizeOptions o;
  o.eps_targets = {0.2, 0.5};
  o.v_grid_mhz = {16.0};
  o.realizations = env_count("MBLAB_ACCEPTANCE_FS_REALIZATIONS", 3);
  o.t_final_ns = 1500.0;
  o.diagonalization_cap = 13000;
  const auto rows = finite_size_series(default_device_couplings(19), trailing_removal_subsets(16, 14), o);
  bool pass = rows.size() == 6;
  std::string detail = fmt("V=16 MHz, %zu realizations:", o.realizations);
  for (int n = 16; n >= 14; --n) {
    double de02 = std::nan(""), de05 = std::nan("");
    for (const auto& r : rows) {
      if (r.n_sites != n) continue;
      (r.eps == 0.2 ? de02 : de05) = r.i_gen_de;
    }
    pass = pass && de02 > 0.1 && de05 < 0.05;
    detail += fmt(" N=%d DE(0.2)=%.4f DE(0.5)=%.4f;", n, de02, de05);
  }
  return {pass, detail + " need DE(0.2) > 0.1 and DE(0.5) < 0.05"};
}

Outcome determinism() {
  cli::RunConfig c;
  c.n_sites = 10;
  c.n_excitations = 5;
  c.eps_grid = {0.2, 0.35, 0.5};
  c.v_grid_mhz = {4.0, 16.0, 38.0, 50.0};
  c.realizations = 4;
  c.t_max_ns = 1000.0;
  c.observables.shots.enabled = true;
  c.observables.shots.n_shots = 2000;
  std::vector<std::map<std::string, std::string>> digests;
  for (const char* name : {"first", "second"}) {
    const fs::path root = scratch_root() / "determinism" / name;
    fs::remove_all(root);
    const cli::SweepResult r = cli::cmd_sweep(c, root);
    cli::cmd_fit(r.run_dir, c.fit);
    cli::cmd_rmap(c, root);
    cli::cmd_dos(c, root);
    std::map<std::string, std::string> d;
    for (const auto& e : fs::directory_iterator(r.run_dir / "summary")) {
      d[e.path().filename().string()] = io::file_hash(e.path());
    }
    digests.push_back(d);
  }
  return {digests[0] == digests[1] && digests[0].size() >= 8,
          fmt("%zu summary CSVs from sweep, fit, rmap and dos; hashes %s", digests[0].size(),
              digests[0] == digests[1] ? "identical" : "differ")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "oracle-equivalence", oracle_equivalence},
      {2, "conservation", conservation},
      {3, "imbalance-identity", imbalance_identity},
      {4, "level-statistics", level_statistics},
      {5, "energy-resolved-contrast", contrast},
      {6, "subdiffusive-exponents", exponents},
      {7, "diagonal-ensemble", diagonal_ensemble_oracle},
      {8, "dos-agreement", density_of_states},
      {9, "finite-size-trend", finite_size},
      {10, "determinism", determinism},
  };
  std::set<int> only;
  bool keep = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--keep") {
      keep = true;
    } else if (a == "--list") {
      for (const auto& c : all) std::printf("%d %s\n", c.id, c.name);
      return 0;
    } else {
      only.insert(std::stoi(a));
    }
  }
  if (!keep) fs::remove_all(scratch_root());

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s [%d] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
