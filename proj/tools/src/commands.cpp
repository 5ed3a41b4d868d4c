#include "mblab/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>

#include "mblab/analysis.hpp"
#include "mblab/cli/checkpoint.hpp"
#include "mblab/error.hpp"
#include "mblab/io.hpp"
#include "mblab/parallel.hpp"
#include "mblab/random.hpp"

namespace mblab::cli {

namespace fs = std::filesystem;
using io::format_number;

namespace {

std::mutex log_mutex;

template <class... Args>
void progress(const char* fmt, Args... args) {
  std::lock_guard lock(log_mutex);
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

fs::path prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    fail(ErrorCode::IoError, "cannot create output directory " + dir.string() + ": " + ec.message());
  }
  return dir;
}

fs::path prepare_run(const RunConfig& c, const fs::path& root) {
  validate(c);
  const fs::path run_dir = prepare_dir(root / run_id(c));
  io::write_file_atomic(run_dir / "config.json", to_json(c).dump(2) + "\n");
  return run_dir;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

KrylovOptions krylov_options(const RunConfig& c) {
  KrylovOptions k;
  k.krylov_dim = c.krylov_dim;
  k.tol = c.krylov_tol;
  return k;
}

std::size_t schedule_index(std::span<const double> schedule, double t) {
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (std::abs(schedule[i] - t) <= 1e-9 * std::max(1.0, t)) return i;
  }
  fail(ErrorCode::ConfigError, "snapshot time " + format_number(t) + " ns is not on the schedule");
}

std::vector<double> column(const io::CsvTable& t, std::string_view name) {
  const std::size_t col = t.column(name);
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    out.push_back(r.at(col).empty() ? std::nan("") : std::stod(r.at(col)));
  }
  return out;
}

std::vector<std::string> averaged_fields(const AveragedSeries& a, std::size_t i) {
  return {format_number(a.mean[i]), format_number(a.sem[i])};
}

}  // namespace

TrajectoryTable simulate(const HamiltonianOperator& h, const QuenchInstance& q, const RunConfig& c,
                         const std::optional<fs::path>& state_dump) {
  const SectorBasis& basis = h.basis();
  const ImbalancePattern pattern(q.initial_state);
  const std::vector<double> imbalance = pattern.diagonal(basis);
  const auto sched = schedule(c);
  const bool want_probs = c.observables.pr || c.observables.f_q;

  ShotModel shots;
  std::vector<double> raw_imbalance;
  if (c.observables.shots.enabled) {
    shots.n_shots = c.observables.shots.n_shots;
    shots.post_select = c.observables.shots.post_select;
    std::tie(shots.f0, shots.f1) = readout_fidelities(c);
    if (!shots.post_select) {
      raw_imbalance.resize(std::size_t{1} << basis.n_sites());
      for (std::size_t b = 0; b < raw_imbalance.size(); ++b) raw_imbalance[b] = pattern.value(static_cast<Bits>(b));
    }
  }

  TrajectoryTable out;
  KrylovOptions ko = krylov_options(c);
  ko.keep_states = state_dump.has_value();
  const Trajectory tr = evolve_krylov(
      h, fock_vector(basis, q.initial_state), sched, ko, [&](std::size_t i, double, const StateVector& psi) {
        out.i_gen.push_back(generalized_imbalance(psi, basis, pattern));
        if (!want_probs) return;
        std::vector<double> p = fock_probabilities(psi);
        const std::vector<double>* diag = &imbalance;
        if (c.observables.shots.enabled) {
          p = sample_and_postselect(p, basis, shots, derive_seed(q.disorder.seed, {0x5407, i})).probabilities;
          if (!shots.post_select) diag = &raw_imbalance;
        }
        if (c.observables.pr) out.pr.push_back(participation_ratio(p));
        if (c.observables.f_q) out.f_q.push_back(fisher_information(p, *diag, c.observables.fisher));
      });
  out.t_ns = tr.times_ns;
  out.norm = tr.norm;
  out.energy_mhz = tr.energy_mhz;
  if (state_dump) io::write_state_dump(*state_dump, basis, tr.times_ns, tr.states);
  return out;
}

void write_trajectory_csv(const fs::path& path, const TrajectoryTable& t, const std::string& config_hash,
                          const QuenchInstance& q) {
  io::CsvWriter w({"t_ns", "i_gen", "pr", "f_q", "norm", "energy_mhz"}, config_hash);
  w.comment("initial-state: " + q.initial_state.to_string());
  w.comment("seed: " + std::to_string(q.disorder.seed));
  w.comment("v-mhz: " + format_number(q.disorder.amplitude_mhz));
  w.comment("eps-target: " + format_number(q.eps_target) + " eps-achieved: " + format_number(q.eps_achieved));
  for (std::size_t i = 0; i < t.t_ns.size(); ++i) {
    w.row({format_number(t.t_ns[i]), format_number(t.i_gen[i]), t.pr.empty() ? "" : format_number(t.pr[i]),
           t.f_q.empty() ? "" : format_number(t.f_q[i]), format_number(t.norm[i]),
           t.energy_mhz.empty() ? "" : format_number(t.energy_mhz[i])});
  }
  w.write(path);
}

std::string cell_file_name(double eps, double v_mhz, std::size_t realization) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "eps%.3f_v%.2f_k%02zu.csv", eps, v_mhz, realization);
  return buf;
}

namespace {

void write_sweep_summary(const RunConfig& c, const fs::path& run_dir, const CheckpointLedger& ledger) {
  const std::string hash = config_hash(c);
  const fs::path summary = prepare_dir(run_dir / "summary");
  const auto sched = schedule(c);
  std::vector<std::size_t> snapshots;
  for (double t : c.snapshot_times_ns) snapshots.push_back(schedule_index(sched, t));

  io::CsvWriter averaged({"eps", "v_mhz", "t_ns", "i_gen_mean", "i_gen_sem", "pr_mean", "pr_sem", "f_q_mean",
                          "f_q_sem", "k"},
                         hash);
  io::CsvWriter heatmap({"eps", "v_mhz", "t_ns", "i_gen_mean", "i_gen_sem", "k"}, hash);
  io::CsvWriter gaps({"eps", "v_mhz", "realization", "seed", "best_gap"}, hash);
  std::string instances;

  for (std::size_t v = 0; v < c.v_grid_mhz.size(); ++v) {
    for (std::size_t e = 0; e < c.eps_grid.size(); ++e) {
      std::vector<Series> ig, pr, fq;
      for (std::size_t k = 0; k < c.realizations; ++k) {
        const CellKey key{e, v, k};
        const auto rec = ledger.record(key);
        if (!rec) continue;
        if (rec->status == CellStatus::Gap) {
          gaps.row({format_number(c.eps_grid[e]), format_number(c.v_grid_mhz[v]), std::to_string(k),
                    std::to_string(rec->detail.at("seed").get<std::uint64_t>()),
                    format_number(rec->detail.at("best_gap").get<double>())});
          continue;
        }
        nlohmann::json line = rec->detail;
        line["eps_index"] = e;
        line["v_index"] = v;
        line["realization"] = k;
        instances += line.dump() + "\n";
        const io::CsvTable t = io::read_csv(run_dir / rec->file);
        const auto times = column(t, "t_ns");
        ig.push_back({times, column(t, "i_gen")});
        if (c.observables.pr) pr.push_back({times, column(t, "pr")});
        if (c.observables.f_q) fq.push_back({times, column(t, "f_q")});
      }
      const std::string eps_s = format_number(c.eps_grid[e]), v_s = format_number(c.v_grid_mhz[v]);
      if (ig.empty()) {
        for (std::size_t s : snapshots) heatmap.row({eps_s, v_s, format_number(sched[s]), "", "", "0"});
        continue;
      }
      const AveragedSeries a = disorder_average(ig);
      std::optional<AveragedSeries> ap, af;
      if (!pr.empty()) ap = disorder_average(pr);
      if (!fq.empty()) af = disorder_average(fq);
      for (std::size_t i = 0; i < a.times_ns.size(); ++i) {
        std::vector<std::string> row{eps_s, v_s, format_number(a.times_ns[i])};
        for (auto& f : averaged_fields(a, i)) row.push_back(std::move(f));
        for (const auto* s : {&ap, &af}) {
          if (*s) {
            for (auto& f : averaged_fields(**s, i)) row.push_back(std::move(f));
          } else {
            row.insert(row.end(), {"", ""});
          }
        }
        row.push_back(std::to_string(a.k));
        averaged.row(row);
      }
      for (std::size_t s : snapshots) {
        heatmap.row({eps_s, v_s, format_number(sched[s]), format_number(a.mean[s]), format_number(a.sem[s]),
                     std::to_string(a.k)});
      }
    }
  }
  averaged.write(summary / "averaged.csv");
  heatmap.write(summary / "heatmap.csv");
  gaps.write(summary / "gaps.csv");
  io::write_file_atomic(run_dir / "instances.jsonl", instances);
}

}  // namespace

SweepResult cmd_sweep(const RunConfig& c, const fs::path& root, std::optional<std::size_t> max_units) {
  SweepResult result;
  result.run_dir = prepare_run(c, root);
  const std::string hash = config_hash(c);
  prepare_dir(result.run_dir / "cells");
  CheckpointLedger ledger(result.run_dir, hash);
  ledger.load();

  std::vector<CellKey> pending;
  for (std::size_t v = 0; v < c.v_grid_mhz.size(); ++v)
    for (std::size_t e = 0; e < c.eps_grid.size(); ++e)
      for (std::size_t k = 0; k < c.realizations; ++k)
        if (ledger.status({e, v, k}) == CellStatus::Pending) pending.push_back({e, v, k});
  const std::size_t total = c.v_grid_mhz.size() * c.eps_grid.size() * c.realizations;
  if (max_units && *max_units < pending.size()) pending.resize(*max_units);

  progress("[sweep] %s: %zu of %zu units to compute", result.run_dir.string().c_str(), pending.size(), total);
  const auto basis = enumerate_sector(c.n_sites, c.n_excitations);
  const auto hops = std::make_shared<const HoppingTable>(basis, build_couplings(c));
  std::atomic<std::size_t> finished{0};

  parallel_for(pending.size(), c.workers, [&](std::size_t u) {
    const CellKey key = pending[u];
    const auto start = std::chrono::steady_clock::now();
    const double eps = c.eps_grid[key.eps_index], v = c.v_grid_mhz[key.v_index];
    const std::uint64_t seed = cell_seed(c.master_seed, key.eps_index, key.v_index, key.realization);
    const HamiltonianOperator h(hops, sample_disorder(c.n_sites, v, seed));
    const SpectralBounds b = extremal_eigenvalues(h);
    QuenchInstance q;
    try {
      q = select_initial_state(*basis, h.diagonal(), h.disorder(), b.e_min, b.e_max, eps, c.eps_tol);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::TargetEnergyUnreachable) throw;
      ledger.mark_gap(key, {{"seed", seed}, {"best_gap", err.value().value_or(std::nan(""))}});
      progress("[sweep] %zu/%zu eps=%s V=%s k=%zu gap (best |d eps| = %s)", ++finished, pending.size(),
               format_number(eps).c_str(), format_number(v).c_str(), key.realization,
               format_number(err.value().value_or(0.0)).c_str());
      return;
    }
    const std::string rel = (fs::path("cells") / cell_file_name(eps, v, key.realization)).string();
    write_trajectory_csv(result.run_dir / rel, simulate(h, q, c), hash, q);
    ledger.mark_done(key, rel, io::instance_to_json(q));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    progress("[sweep] %zu/%zu eps=%s V=%s k=%zu done (%.1fs)", ++finished, pending.size(),
             format_number(eps).c_str(), format_number(v).c_str(), key.realization, secs);
  });

  result.processed = pending.size();
  result.done = ledger.count(CellStatus::Done);
  result.gaps = ledger.count(CellStatus::Gap);
  result.pending = total - result.done - result.gaps;
  result.complete = result.pending == 0;
  if (result.complete) {
    write_sweep_summary(c, result.run_dir, ledger);
  } else {
    progress("[sweep] stopped with %zu units pending; rerun the same command to resume", result.pending);
  }
  return result;
}

fs::path cmd_rmap(const RunConfig& c, const fs::path& root) {
  const fs::path run_dir = prepare_run(c, root);
  const std::string hash = config_hash(c);
  const auto basis = enumerate_sector(c.n_sites, c.n_excitations);
  if (basis->size() > c.diagonalization_cap) {
    fail(ErrorCode::DimensionTooLarge,
         "sector dimension " + std::to_string(basis->size()) + " exceeds the diagonalization cap of " +
             std::to_string(c.diagonalization_cap) + "; reduce n_sites (e.g. 14 sites, dimension 3432)",
         static_cast<double>(basis->size()));
  }
  const auto hops = std::make_shared<const HoppingTable>(basis, build_couplings(c));
  const std::size_t n_v = c.v_grid_mhz.size(), n_e = c.eps_grid.size(), k = c.realizations;

  struct Cell {
    double mean = std::nan("");
    std::size_t count = 0;
    std::size_t degenerate = 0;
  };
  std::vector<Cell> cells(n_v * k * n_e);
  std::vector<double> central(n_v * k);
  std::vector<std::uint64_t> seeds(n_v * k);

  parallel_for(n_v * k, c.workers, [&](std::size_t u) {
    const std::size_t v = u / k, r = u % k;
    seeds[u] = cell_seed(c.master_seed, 0, v, r, SeedStream::LevelStatistics);
    const HamiltonianOperator h(hops, sample_disorder(c.n_sites, c.v_grid_mhz[v], seeds[u]));
    const EigenSystem es = full_spectrum(h, false, c.diagonalization_cap);
    const std::span<const double> e(es.energies.data(), es.size());
    for (std::size_t i = 0; i < n_e; ++i) {
      const double lo = std::max(0.0, c.eps_grid[i] - c.eps_tol), hi = std::min(1.0, c.eps_grid[i] + c.eps_tol);
      Cell& cell = cells[u * n_e + i];
      try {
        const MeanGapRatio m = mean_r_in_window(e, es.e_min(), es.e_max(), SpectralWindow(lo, hi));
        cell = {m.mean, m.count, m.degenerate_excluded};
      } catch (const Error& err) {
        if (err.code() != ErrorCode::InsufficientStatistics) throw;
      }
    }
    central[u] = mean_r_central(e, 0.5).mean;
    progress("[rmap] V=%s k=%zu diagonalized (dim %zu)", format_number(c.v_grid_mhz[v]).c_str(), r, es.size());
  });

  const fs::path summary = prepare_dir(run_dir / "summary");
  io::CsvWriter per({"realization_seed", "v_mhz", "eps_bin_center", "mean_r", "count", "degenerate_excluded"}, hash);
  io::CsvWriter pooled({"v_mhz", "eps_bin_center", "mean_r", "count", "realizations"}, hash);
  io::CsvWriter mid({"v_mhz", "mean_r", "sem", "realizations"}, hash);
  for (auto* w : {&per, &pooled, &mid}) {
    w->comment("poisson-mean-r: " + format_number(kPoissonMeanR));
    w->comment("goe-mean-r: " + format_number(kGoeMeanR));
  }
  for (std::size_t v = 0; v < n_v; ++v) {
    const std::string v_s = format_number(c.v_grid_mhz[v]);
    for (std::size_t i = 0; i < n_e; ++i) {
      double sum = 0.0;
      std::size_t count = 0, used = 0;
      for (std::size_t r = 0; r < k; ++r) {
        const Cell& cell = cells[(v * k + r) * n_e + i];
        per.row({std::to_string(seeds[v * k + r]), v_s, format_number(c.eps_grid[i]), format_number(cell.mean),
                 std::to_string(cell.count), std::to_string(cell.degenerate)});
        if (cell.count == 0) continue;
        sum += cell.mean * static_cast<double>(cell.count);
        count += cell.count;
        ++used;
      }
      pooled.row({v_s, format_number(c.eps_grid[i]), count ? format_number(sum / static_cast<double>(count)) : "",
                  std::to_string(count), std::to_string(used)});
    }
    Series s;
    for (std::size_t r = 0; r < k; ++r) {
      s.times_ns.push_back(static_cast<double>(r));
      s.values.push_back(central[v * k + r]);
    }
    double m = 0.0, ss = 0.0;
    for (double x : s.values) m += x;
    m /= static_cast<double>(k);
    for (double x : s.values) ss += (x - m) * (x - m);
    const double sem = k > 1 ? std::sqrt(ss / static_cast<double>(k - 1) / static_cast<double>(k)) : 0.0;
    mid.row({v_s, format_number(m), format_number(sem), std::to_string(k)});
  }
  prepare_dir(run_dir / "rmap");
  per.write(run_dir / "rmap" / "realizations.csv");
  pooled.write(summary / "rmap.csv");
  mid.write(summary / "rmap_central.csv");
  return summary / "rmap.csv";
}

FitResult cmd_fit(const fs::path& run_dir, const FitConfig& fit) {
  const fs::path summary = run_dir / "summary";
  const fs::path input = summary / "averaged.csv";
  if (!fs::exists(input)) {
    fail(ErrorCode::IoError, input.string() + " not found; run a complete sweep first");
  }
  const io::CsvTable t = io::read_csv(input);
  std::string hash;
  for (const auto& line : t.comments) {
    if (line.rfind("config-hash: ", 0) == 0) hash = line.substr(13);
  }
  const std::size_t c_eps = t.column("eps"), c_v = t.column("v_mhz"), c_t = t.column("t_ns"),
                    c_m = t.column("i_gen_mean"), c_s = t.column("i_gen_sem"), c_k = t.column("k");

  // (eps, V) -> series, in file order
  std::map<std::pair<double, double>, AveragedSeries> series;
  for (const auto& row : t.rows) {
    auto& s = series[{std::stod(row[c_eps]), std::stod(row[c_v])}];
    s.times_ns.push_back(std::stod(row[c_t]));
    s.mean.push_back(std::stod(row[c_m]));
    s.sem.push_back(std::stod(row[c_s]));
    s.k = std::stoul(row[c_k]);
  }

  FitResult result;
  io::CsvWriter fits({"eps", "v_mhz", "xi", "xi_err", "r2", "window_lo", "window_hi"}, hash);
  std::map<double, std::vector<XiPoint>> curves;
  for (const auto& [key, s] : series) {
    const auto [eps, v] = key;
    FitWindow w = default_fit_window(v);
    if (fit.window_lo_ns) w.lo_ns = *fit.window_lo_ns;
    if (fit.window_hi_ns) w.hi_ns = *fit.window_hi_ns;
    try {
      const PowerLawFit f = fit_power_law(s, w);
      fits.row({format_number(eps), format_number(v), format_number(f.xi), format_number(f.xi_err),
                format_number(f.r_squared), format_number(w.lo_ns), format_number(w.hi_ns)});
      curves[eps].push_back({v, f.xi, f.xi_err});
      ++result.fitted;
    } catch (const Error& err) {
      std::fprintf(stderr, "warning: no fit for eps=%s V=%s: %s\n", format_number(eps).c_str(),
                   format_number(v).c_str(), err.what());
      ++result.skipped;
    }
  }
  fits.write(summary / "fits.csv");

  const BaselineBand band{fit.baseline_lo_mhz, fit.baseline_hi_mhz};
  std::optional<Baseline> shared;
  if (!fit.per_eps_baseline) {
    std::vector<XiPoint> all;
    for (const auto& [eps, curve] : curves) all.insert(all.end(), curve.begin(), curve.end());
    try {
      shared = baseline_xi(all, band);
    } catch (const Error& err) {
      std::fprintf(stderr, "warning: no shared baseline: %s\n", err.what());
    }
  }
  io::CsvWriter vc({"eps", "vc_mhz", "vc_err", "baseline", "baseline_err"}, hash);
  vc.comment(std::string("baseline: ") + (fit.per_eps_baseline ? "per-eps" : "shared") + " band [" +
             format_number(band.lo_mhz) + ", " + format_number(band.hi_mhz) + "] MHz");
  for (const auto& [eps, curve] : curves) {
    try {
      const VcEstimate e = fit.per_eps_baseline ? estimate_vc(curve, band)
                                                : estimate_vc(curve, shared ? *shared : baseline_xi(curve, band));
      vc.row({format_number(eps), format_number(e.vc_mhz), format_number(e.vc_err), format_number(e.baseline),
              format_number(e.baseline_err)});
      ++result.vc_rows;
    } catch (const Error& err) {
      std::fprintf(stderr, "warning: no V_c for eps=%s: %s\n", format_number(eps).c_str(), err.what());
    }
  }
  vc.write(summary / "vc.csv");
  return result;
}

fs::path cmd_dos(const RunConfig& c, const fs::path& root) {
  const fs::path run_dir = prepare_run(c, root);
  const std::string hash = config_hash(c);
  const auto basis = enumerate_sector(c.n_sites, c.n_excitations);
  const auto hops = std::make_shared<const HoppingTable>(basis, build_couplings(c));
  const std::size_t n_v = c.v_grid_mhz.size(), k = c.realizations;
  const auto bins = static_cast<std::size_t>(c.dos_bins);

  struct Unit {
    std::uint64_t seed = 0;
    std::vector<double> fock, eigen;
    double e_min = 0.0, e_max = 0.0, tv = 0.0;
  };
  std::vector<Unit> units(n_v * k);
  parallel_for(n_v * k, c.workers, [&](std::size_t u) {
    const std::size_t v = u / k, r = u % k;
    Unit& out = units[u];
    out.seed = cell_seed(c.master_seed, 0, v, r, SeedStream::DensityOfStates);
    const HamiltonianOperator h(hops, sample_disorder(c.n_sites, c.v_grid_mhz[v], out.seed));
    const EigenSystem es = full_spectrum(h, false, c.diagonalization_cap);
    out.e_min = es.e_min();
    out.e_max = es.e_max();
    const Histogram fock = dos_histogram(h.diagonal(), c.dos_bins, out.e_min, out.e_max);
    const Histogram eig = dos_histogram(std::span<const double>(es.energies.data(), es.size()), c.dos_bins,
                                        out.e_min, out.e_max);
    out.fock = fock.masses();
    out.eigen = eig.masses();
    out.tv = total_variation(fock, eig);
    progress("[dos] V=%s k=%zu tv=%s", format_number(c.v_grid_mhz[v]).c_str(), r, format_number(out.tv).c_str());
  });

  const fs::path summary = prepare_dir(run_dir / "summary");
  io::CsvWriter stats({"v_mhz", "realization", "seed", "tv_distance", "fock_low_edge", "eigen_low_edge",
                       "fock_high_edge", "eigen_high_edge"},
                      hash);
  for (std::size_t v = 0; v < n_v; ++v) {
    io::CsvWriter w({"bin_center_eps", "bin_center_mhz", "fock_density", "eigen_density"}, hash);
    w.comment("v-mhz: " + format_number(c.v_grid_mhz[v]) + " realizations: " + std::to_string(k));
    std::vector<double> fock(bins, 0.0), eigen(bins, 0.0);
    double lo = 0.0, width = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      const Unit& u = units[v * k + r];
      for (std::size_t b = 0; b < bins; ++b) {
        fock[b] += u.fock[b] / static_cast<double>(k);
        eigen[b] += u.eigen[b] / static_cast<double>(k);
      }
      lo += u.e_min / static_cast<double>(k);
      width += (u.e_max - u.e_min) / static_cast<double>(k);
      stats.row({format_number(c.v_grid_mhz[v]), std::to_string(r), std::to_string(u.seed), format_number(u.tv),
                 format_number(u.fock.front()), format_number(u.eigen.front()), format_number(u.fock.back()),
                 format_number(u.eigen.back())});
    }
    for (std::size_t b = 0; b < bins; ++b) {
      const double center = (static_cast<double>(b) + 0.5) / static_cast<double>(bins);
      w.row({format_number(center), format_number(lo + center * width), format_number(fock[b]),
             format_number(eigen[b])});
    }
    w.write(summary / ("dos_v" + fixed(c.v_grid_mhz[v], 2) + ".csv"));
  }
  stats.write(summary / "dos_stats.csv");
  return summary / "dos_stats.csv";
}

fs::path cmd_finite_size(const RunConfig& c, const fs::path& root) {
  if (c.finite_size.min_sites < 2 || c.finite_size.min_sites > c.n_sites) {
    fail(ErrorCode::ConfigError, "finite_size.min_sites must lie in [2, n_sites]");
  }
  const fs::path run_dir = prepare_run(c, root);
  FiniteSizeOptions o;
  o.eps_targets = c.finite_size.eps;
  o.v_grid_mhz = c.finite_size.v_mhz;
  o.realizations = c.finite_size.realizations;
  o.t_final_ns = c.finite_size.t_final_ns;
  o.diagonalization_cap = c.finite_size.diagonalization_cap;
  o.eps_tol = c.eps_tol;
  o.master_seed = c.master_seed;
  o.workers = c.workers;
  o.krylov = krylov_options(c);
  const auto subsets = trailing_removal_subsets(c.n_sites, c.finite_size.min_sites);
  progress("[finite-size] sizes %d..%d", c.n_sites, c.finite_size.min_sites);
  const auto rows = finite_size_series(build_couplings(c), subsets, o);

  io::CsvWriter w({"n_sites", "dim", "eps", "v_mhz", "i_gen_final", "i_gen_final_sem", "i_gen_de", "i_gen_de_sem",
                   "count", "gaps"},
                  config_hash(c));
  w.comment("t-final-ns: " + format_number(o.t_final_ns));
  for (const auto& r : rows) {
    w.row({std::to_string(r.n_sites), std::to_string(r.dim), format_number(r.eps), format_number(r.v_mhz),
           r.count ? format_number(r.i_gen_final) : "", r.count ? format_number(r.i_gen_final_sem) : "",
           format_number(r.i_gen_de), format_number(r.i_gen_de_sem), std::to_string(r.count),
           std::to_string(r.gaps)});
  }
  const fs::path out = prepare_dir(run_dir / "summary") / "finite_size.csv";
  w.write(out);
  return out;
}

fs::path cmd_evolve(const RunConfig& c, const fs::path& root, std::size_t realization, bool dump_states) {
  const fs::path run_dir = prepare_run(c, root);
  const fs::path dir = prepare_dir(run_dir / "evolve");
  const auto basis = enumerate_sector(c.n_sites, c.n_excitations);
  const double eps = c.eps_grid.front(), v = c.v_grid_mhz.front();
  const std::uint64_t seed = cell_seed(c.master_seed, 0, 0, realization);
  const HamiltonianOperator h = build_hamiltonian(basis, build_couplings(c), sample_disorder(c.n_sites, v, seed));
  const SpectralBounds b = extremal_eigenvalues(h);
  const QuenchInstance q = select_initial_state(*basis, h.diagonal(), h.disorder(), b.e_min, b.e_max, eps, c.eps_tol);
  const std::string name = cell_file_name(eps, v, realization);
  const fs::path csv = dir / name;
  std::optional<fs::path> dump;
  if (dump_states) dump = fs::path(csv).replace_extension(".states");
  write_trajectory_csv(csv, simulate(h, q, c, dump), config_hash(c), q);
  io::write_file_atomic(fs::path(csv).replace_extension(".json"), io::instance_to_json(q).dump(2) + "\n");
  return csv;
}

}  // namespace mblab::cli
