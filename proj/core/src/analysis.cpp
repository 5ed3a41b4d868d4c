#include "mblab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "mblab/error.hpp"
#include "mblab/parallel.hpp"
#include "mblab/random.hpp"

namespace mblab {

AveragedSeries disorder_average(std::span<const Series> series) {
  require(!series.empty(), ErrorCode::EmptyInput, "no series to average");
  const auto& grid = series.front().times_ns;
  for (const Series& s : series) {
    if (s.times_ns != grid || s.values.size() != grid.size()) {
      fail(ErrorCode::GridMismatch, "series do not share one time grid");
    }
  }
  const std::size_t k = series.size();
  AveragedSeries out;
  out.times_ns = grid;
  out.k = k;
  out.mean.assign(grid.size(), 0.0);
  out.sem.assign(grid.size(), 0.0);
  for (std::size_t t = 0; t < grid.size(); ++t) {
    double sum = 0.0;
    for (const Series& s : series) sum += s.values[t];
    const double mean = sum / static_cast<double>(k);
    out.mean[t] = mean;
    if (k > 1) {
      double ss = 0.0;
      for (const Series& s : series) ss += (s.values[t] - mean) * (s.values[t] - mean);
      out.sem[t] = std::sqrt(ss / static_cast<double>(k - 1)) / std::sqrt(static_cast<double>(k));
    }
  }
  return out;
}

FitWindow default_fit_window(double amplitude_mhz) {
  return amplitude_mhz <= 4.0 ? FitWindow{100.0, 1000.0} : FitWindow{100.0, 1500.0};
}

PowerLawFit fit_power_law(std::span<const double> times_ns, std::span<const double> values,
                          const FitWindow& window) {
  require(times_ns.size() == values.size(), ErrorCode::ShapeMismatch,
          "times and values differ in length");
  require(window.lo_ns < window.hi_ns, ErrorCode::InvalidArgument, "fit window needs lo < hi");
  std::vector<double> x;
  std::vector<double> y;
  std::size_t nonpositive = 0;
  for (std::size_t i = 0; i < times_ns.size(); ++i) {
    const double t = times_ns[i];
    if (t < window.lo_ns || t > window.hi_ns) continue;
    if (!(t > 0.0) || !(values[i] > 0.0)) {
      ++nonpositive;
      continue;
    }
    x.push_back(std::log(t));
    y.push_back(std::log(values[i]));
  }
  if (nonpositive > 0) {
    fail(ErrorCode::LogDomainError,
         std::to_string(nonpositive) + " nonpositive points inside the fit window",
         static_cast<double>(nonpositive));
  }
  if (x.size() < kMinFitPoints) {
    fail(ErrorCode::InsufficientStatistics,
         "only " + std::to_string(x.size()) + " points inside the fit window",
         static_cast<double>(x.size()));
  }

  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, ErrorCode::InsufficientStatistics, "fit window holds a single time");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    sse += r * r;
  }

  PowerLawFit fit;
  fit.xi = -slope;
  fit.xi_err = std::sqrt(sse / (n - 2.0) / sxx);
  fit.log_prefactor = intercept;
  fit.t_lo_ns = window.lo_ns;
  fit.t_hi_ns = window.hi_ns;
  fit.r_squared = syy > 1e-24 * n * (1.0 + my * my) ? 1.0 - sse / syy : 1.0;
  fit.points = x.size();
  return fit;
}

PowerLawFit fit_power_law(const AveragedSeries& series, const FitWindow& window) {
  return fit_power_law(series.times_ns, series.mean, window);
}

Baseline baseline_xi(std::span<const XiPoint> points, const BaselineBand& band) {
  Baseline b;
  std::vector<const XiPoint*> in;
  for (const XiPoint& p : points) {
    if (p.v_mhz >= band.lo_mhz && p.v_mhz <= band.hi_mhz) in.push_back(&p);
  }
  if (in.empty()) {
    fail(ErrorCode::InsufficientStatistics, "no xi values inside the baseline band", 0.0);
  }
  b.count = in.size();
  for (const XiPoint* p : in) b.value += p->xi;
  b.value /= static_cast<double>(in.size());
  if (in.size() == 1) {
    b.err = in.front()->xi_err;
  } else {
    double ss = 0.0;
    for (const XiPoint* p : in) ss += (p->xi - b.value) * (p->xi - b.value);
    b.err = std::sqrt(ss / static_cast<double>(in.size() - 1));
  }
  return b;
}

VcEstimate estimate_vc(std::span<const XiPoint> curve, const Baseline& baseline) {
  require(!curve.empty(), ErrorCode::EmptyInput, "empty xi(V) curve");
  for (std::size_t i = 1; i < curve.size(); ++i) {
    require(curve[i].v_mhz > curve[i - 1].v_mhz, ErrorCode::InvalidArgument,
            "xi(V) curve must be sorted by V");
  }
  const double threshold = baseline.value + baseline.err;
  VcEstimate out;
  out.baseline = baseline.value;
  out.baseline_err = baseline.err;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].xi > threshold) continue;
    if (i == 0) {
      out.vc_mhz = curve[0].v_mhz;
      out.vc_err = 0.0;
      return out;
    }
    const XiPoint& a = curve[i - 1];
    const XiPoint& b = curve[i];
    const double f = (a.xi - threshold) / (a.xi - b.xi);
    out.vc_mhz = a.v_mhz + f * (b.v_mhz - a.v_mhz);
    out.vc_err = 0.5 * (b.v_mhz - a.v_mhz);
    return out;
  }
  fail(ErrorCode::NoCrossing, "xi(V) never reaches the baseline " + std::to_string(threshold),
       threshold);
}

VcEstimate estimate_vc(std::span<const XiPoint> curve, const BaselineBand& band) {
  return estimate_vc(curve, baseline_xi(curve, band));
}

namespace {

Eigen::VectorXd eigen_weights(const EigenSystem& eigs, const StateVector& psi0) {
  if (!eigs.vectors) fail(ErrorCode::VectorsRequired, "diagonal ensemble needs eigenvectors");
  const Eigen::MatrixXd& q = *eigs.vectors;
  require(psi0.size() == q.rows(), ErrorCode::ShapeMismatch,
          "state length does not match the eigenvector length");
  const Eigen::VectorXd re = q.transpose() * psi0.real();
  const Eigen::VectorXd im = q.transpose() * psi0.imag();
  return re.array().square() + im.array().square();
}

}  // namespace

double diagonal_ensemble(const EigenSystem& eigs, const StateVector& psi0,
                         std::span<const double> observable_diagonal) {
  const Eigen::VectorXd w = eigen_weights(eigs, psi0);
  const Eigen::MatrixXd& q = *eigs.vectors;
  require(static_cast<Eigen::Index>(observable_diagonal.size()) == q.rows(), ErrorCode::ShapeMismatch,
          "observable diagonal length does not match the sector");
  const Eigen::Map<const Eigen::VectorXd> o(observable_diagonal.data(), q.rows());
  double total = 0.0;
  for (Eigen::Index a = 0; a < q.cols(); ++a) total += w(a) * q.col(a).cwiseAbs2().dot(o);
  return total;
}

double diagonal_ensemble_imbalance(const EigenSystem& eigs, const StateVector& psi0,
                                   const ImbalancePattern& pattern, const SectorBasis& basis) {
  const auto d = pattern.diagonal(basis);
  return diagonal_ensemble(eigs, psi0, d);
}

std::vector<double> diagonal_ensemble_probabilities(const EigenSystem& eigs, const StateVector& psi0) {
  const Eigen::VectorXd w = eigen_weights(eigs, psi0);
  const Eigen::MatrixXd& q = *eigs.vectors;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(q.rows());
  for (Eigen::Index a = 0; a < q.cols(); ++a) p += w(a) * q.col(a).cwiseAbs2();
  return {p.data(), p.data() + p.size()};
}

std::vector<std::vector<int>> trailing_removal_subsets(int n_full, int min_size) {
  require(min_size >= 1 && min_size <= n_full, ErrorCode::InvalidArgument,
          "need 1 <= min_size <= n_full");
  std::vector<std::vector<int>> out;
  for (int n = n_full; n >= min_size; --n) {
    std::vector<int> keep(static_cast<std::size_t>(n));
    std::iota(keep.begin(), keep.end(), 0);
    out.push_back(std::move(keep));
  }
  return out;
}

std::vector<FiniteSizeRow> finite_size_series(const CouplingMatrix& device,
                                              std::span<const std::vector<int>> site_subsets,
                                              const FiniteSizeOptions& options) {
  require(!options.eps_targets.empty() && !options.v_grid_mhz.empty(), ErrorCode::InvalidArgument,
          "finite-size scan needs eps targets and disorder amplitudes");
  require(options.realizations >= 1, ErrorCode::InvalidArgument, "need at least one realization");
  for (const auto& subset : site_subsets) {
    if (subset.size() < 4) {
      fail(ErrorCode::SubsetTooSmall,
           "subset of " + std::to_string(subset.size()) + " sites; need at least 4",
           static_cast<double>(subset.size()));
    }
  }

  struct SizeContext {
    std::shared_ptr<const HoppingTable> hops;
  };
  std::vector<SizeContext> sizes;
  for (const auto& subset : site_subsets) {
    const int n = static_cast<int>(subset.size());
    auto basis = enumerate_sector(n, half_filling(n));
    sizes.push_back({std::make_shared<const HoppingTable>(basis, restrict_sites(device, subset))});
  }

  const std::size_t n_v = options.v_grid_mhz.size();
  const std::size_t n_eps = options.eps_targets.size();
  const std::size_t k = options.realizations;
  struct Outcome {
    std::optional<double> final_value;
    std::optional<double> de_value;
  };
  // outcomes[((s * n_v + v) * k + r) * n_eps + e]
  std::vector<Outcome> outcomes(sizes.size() * n_v * k * n_eps);

  parallel_for(sizes.size() * n_v * k, options.workers, [&](std::size_t unit) {
    const std::size_t r = unit % k;
    const std::size_t v = (unit / k) % n_v;
    const std::size_t s = unit / (k * n_v);
    const auto& hops = sizes[s].hops;
    const SectorBasis& basis = hops->basis();
    const std::uint64_t seed = derive_seed(
        options.master_seed, {static_cast<std::uint64_t>(SeedStream::FiniteSize),
                              static_cast<std::uint64_t>(basis.n_sites()), v, r});
    const HamiltonianOperator h(hops, sample_disorder(basis.n_sites(), options.v_grid_mhz[v], seed));

    std::optional<DensePropagator> dense;
    double e_min, e_max;
    if (basis.size() <= options.diagonalization_cap) {
      dense.emplace(full_spectrum(h.to_dense(), true));
      e_min = dense->eigensystem().e_min();
      e_max = dense->eigensystem().e_max();
    } else {
      const SpectralBounds b = extremal_eigenvalues(h);
      e_min = b.e_min;
      e_max = b.e_max;
    }

    for (std::size_t e = 0; e < n_eps; ++e) {
      Outcome& slot = outcomes[unit * n_eps + e];
      std::optional<QuenchInstance> q;
      try {
        q = select_initial_state(basis, h.diagonal(), h.disorder(), e_min, e_max,
                                 options.eps_targets[e], options.eps_tol);
      } catch (const Error& err) {
        if (err.code() != ErrorCode::TargetEnergyUnreachable) throw;
        continue;
      }
      const ImbalancePattern pattern(q->initial_state);
      const StateVector psi0 = fock_vector(basis, q->initial_state);
      if (dense) {
        slot.final_value = generalized_imbalance(dense->at(psi0, options.t_final_ns), basis, pattern);
        slot.de_value = diagonal_ensemble_imbalance(dense->eigensystem(), psi0, pattern, basis);
      } else {
        KrylovOptions ko = options.krylov;
        ko.track_energy = false;
        const double schedule[] = {0.0, options.t_final_ns};
        double last = 0.0;
        evolve_krylov(h, psi0, schedule, ko, [&](std::size_t i, double, const StateVector& psi) {
          if (i == 1) last = generalized_imbalance(psi, basis, pattern);
        });
        slot.final_value = last;
      }
    }
  });

  auto mean_sem = [](const std::vector<double>& xs) {
    const auto n = static_cast<double>(xs.size());
    const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double sem = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    return std::pair{m, sem};
  };

  std::vector<FiniteSizeRow> rows;
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    for (std::size_t v = 0; v < n_v; ++v) {
      for (std::size_t e = 0; e < n_eps; ++e) {
        FiniteSizeRow row;
        row.n_sites = sizes[s].hops->basis().n_sites();
        row.dim = sizes[s].hops->dim();
        row.eps = options.eps_targets[e];
        row.v_mhz = options.v_grid_mhz[v];
        std::vector<double> finals, des;
        for (std::size_t r = 0; r < k; ++r) {
          const Outcome& o = outcomes[((s * n_v + v) * k + r) * n_eps + e];
          if (!o.final_value) {
            ++row.gaps;
            continue;
          }
          finals.push_back(*o.final_value);
          if (o.de_value) des.push_back(*o.de_value);
        }
        row.count = finals.size();
        if (!finals.empty()) std::tie(row.i_gen_final, row.i_gen_final_sem) = mean_sem(finals);
        if (!des.empty()) std::tie(row.i_gen_de, row.i_gen_de_sem) = mean_sem(des);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace mblab
