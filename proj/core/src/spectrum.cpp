#include "mblab/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <string>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "mblab/error.hpp"
#include "mblab/random.hpp"

namespace mblab {

SpectralWindow::SpectralWindow(double lo, double hi) : eps_lo(lo), eps_hi(hi) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "spectral window must satisfy 0 <= lo < hi <= 1");
  }
}

SpectralBounds extremal_eigenvalues(const HamiltonianOperator& h, const ExtremalOptions& options) {
  const auto dim = static_cast<Eigen::Index>(h.dim());
  require(dim >= 2, ErrorCode::InvalidArgument, "extremal eigenvalues need a sector of dimension >= 2");

  const int max_steps = static_cast<int>(std::min<Eigen::Index>(dim, options.max_iterations));
  Eigen::MatrixXd basis(dim, max_steps);
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples v_j and v_{j+1}

  Rng rng(options.seed);
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.uniform(-1.0, 1.0);
  v.normalize();

  Eigen::VectorXd w(dim);
  SpectralBounds out;
  double scale = 0.0;
  for (int j = 0; j < max_steps; ++j) {
    basis.col(j) = v;
    h.apply(std::span<const double>(v.data(), static_cast<std::size_t>(dim)),
            std::span<double>(w.data(), static_cast<std::size_t>(dim)));
    const double a = v.dot(w);
    alpha.push_back(a);
    scale = std::max(scale, std::abs(a));
    // Two passes of classical Gram-Schmidt against the whole basis.
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd overlaps = basis.leftCols(j + 1).transpose() * w;
      w.noalias() -= basis.leftCols(j + 1) * overlaps;
    }
    const double b = w.norm();
    scale = std::max(scale, b);

    const int k = j + 1;
    const bool breakdown = b <= 1e-14 * std::max(scale, 1.0);
    const bool exhausted = k == max_steps;
    if (k >= 2 && (k % 4 == 0 || breakdown || exhausted)) {
      Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), k);
      Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(beta.data(), k - 1);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const Eigen::VectorXd& theta = tri.eigenvalues();
      const double width = theta(k - 1) - theta(0);
      const double res_lo = b * std::abs(tri.eigenvectors()(k - 1, 0));
      const double res_hi = b * std::abs(tri.eigenvectors()(k - 1, k - 1));
      out.e_min = theta(0);
      out.e_max = theta(k - 1);
      out.iterations = k;
      out.residual = breakdown ? 0.0 : std::max(res_lo, res_hi);
      const double threshold = options.tol * std::max(width, std::numeric_limits<double>::min());
      if (breakdown || k == dim || (res_lo <= threshold && res_hi <= threshold)) return out;
      if (exhausted) {
        fail(ErrorCode::ConvergenceFailure,
             "Lanczos did not converge in " + std::to_string(k) + " iterations (residual " +
                 std::to_string(out.residual) + " MHz)",
             out.residual);
      }
    }
    if (breakdown) break;
    beta.push_back(b);
    v = w / b;
  }
  // Breakdown on the first step: the start vector is itself an eigenvector.
  out.e_min = out.e_max = alpha.front();
  out.iterations = 1;
  out.residual = 0.0;
  return out;
}

double energy_density(double e, double e_min, double e_max) {
  if (!(e_max > e_min)) {
    fail(ErrorCode::DegenerateSpectrum, "energy density needs E_max > E_min", e_max - e_min);
  }
  return (e - e_min) / (e_max - e_min);
}

EigenSystem full_spectrum(Eigen::MatrixXd a, bool want_vectors) {
  require(a.rows() == a.cols(), ErrorCode::ShapeMismatch, "matrix must be square");
  const auto n = static_cast<lapack_int>(a.rows());
  EigenSystem out;
  out.energies.resize(n);
  if (n == 0) return out;
  if (!want_vectors) {
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, a.data(), n, out.energies.data());
    require(info == 0, ErrorCode::ConvergenceFailure, "dsyevd failed, info=" + std::to_string(info));
    return out;
  }
  // dsyevr keeps the workspace at O(n) beyond the two n x n matrices.
  Eigen::MatrixXd z(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'A', 'U', n, a.data(), n, 0.0, 0.0, 0, 0, 0.0, &found,
                     out.energies.data(), z.data(), n, support.data());
  require(info == 0 && found == n, ErrorCode::ConvergenceFailure,
          "dsyevr failed, info=" + std::to_string(info));
  out.vectors = std::move(z);
  return out;
}

EigenSystem full_spectrum(const HamiltonianOperator& h, bool want_vectors, std::size_t cap) {
  if (h.dim() > cap) {
    fail(ErrorCode::DimensionTooLarge,
         "sector dimension " + std::to_string(h.dim()) + " exceeds the dense cap of " +
             std::to_string(cap) + "; reduce n_sites",
         static_cast<double>(h.dim()));
  }
  return full_spectrum(h.to_dense(), want_vectors);
}

GapRatios gap_ratios(std::span<const double> energies, std::optional<double> degeneracy_scale) {
  if (energies.size() < 3) {
    fail(ErrorCode::InsufficientStatistics, "gap ratios need at least 3 levels",
         static_cast<double>(energies.size()));
  }
  require(std::is_sorted(energies.begin(), energies.end()), ErrorCode::InvalidArgument,
          "energies must be ascending");
  const double scale = degeneracy_scale.value_or(energies.back() - energies.front());
  const double eps = 1e-12 * scale;
  GapRatios out;
  out.r.reserve(energies.size() - 2);
  for (std::size_t a = 0; a + 2 < energies.size(); ++a) {
    const double d0 = energies[a + 1] - energies[a];
    const double d1 = energies[a + 2] - energies[a + 1];
    if (d0 < eps && d1 < eps) {
      ++out.degenerate_excluded;
      continue;
    }
    out.r.push_back(std::min(d0, d1) / std::max(d0, d1));
  }
  return out;
}

namespace {

MeanGapRatio mean_over(std::span<const double> levels, double scale) {
  if (levels.size() < kMinLevelsForStatistics) {
    fail(ErrorCode::InsufficientStatistics,
         "only " + std::to_string(levels.size()) + " levels in window",
         static_cast<double>(levels.size()));
  }
  const GapRatios g = gap_ratios(levels, scale);
  MeanGapRatio out;
  out.levels = levels.size();
  out.count = g.r.size();
  out.degenerate_excluded = g.degenerate_excluded;
  if (g.r.empty()) {
    fail(ErrorCode::InsufficientStatistics, "every gap pair in the window is degenerate", 0.0);
  }
  out.mean = std::accumulate(g.r.begin(), g.r.end(), 0.0) / static_cast<double>(g.r.size());
  return out;
}

}  // namespace

MeanGapRatio mean_r_in_window(std::span<const double> energies, double e_min, double e_max,
                              const SpectralWindow& window) {
  std::size_t first = energies.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (window.contains(energy_density(energies[i], e_min, e_max))) {
      first = std::min(first, i);
      last = i + 1;
    }
  }
  if (first >= last) return mean_over({}, e_max - e_min);
  return mean_over(energies.subspan(first, last - first), e_max - e_min);
}

MeanGapRatio mean_r_in_window(const EigenSystem& eigs, const SpectralWindow& window) {
  require(eigs.size() >= 2, ErrorCode::InsufficientStatistics, "need at least two levels");
  std::span<const double> e(eigs.energies.data(), eigs.size());
  return mean_r_in_window(e, eigs.e_min(), eigs.e_max(), window);
}

MeanGapRatio mean_r_central(std::span<const double> energies, double fraction) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorCode::InvalidArgument,
          "fraction must lie in (0, 1]");
  require(!energies.empty(), ErrorCode::EmptyInput, "no energies");
  const auto n = energies.size();
  const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  const std::size_t first = (n - keep) / 2;
  return mean_over(energies.subspan(first, keep), energies.back() - energies.front());
}

Histogram::Histogram(int n_bins, double lo, double hi) : lo_(lo), hi_(hi) {
  require(n_bins >= 1, ErrorCode::InvalidArgument, "histogram needs at least one bin");
  require(hi > lo, ErrorCode::InvalidArgument, "histogram range must have hi > lo");
  counts_.assign(static_cast<std::size_t>(n_bins), 0);
}

void Histogram::add(double value) {
  if (!(value >= lo_ && value <= hi_)) return;
  auto bin = static_cast<std::size_t>((value - lo_) / (hi_ - lo_) * static_cast<double>(counts_.size()));
  bin = std::min(bin, counts_.size() - 1);
  ++counts_[bin];
  ++total_;
}

void Histogram::add(std::span<const double> values) {
  for (double v : values) add(v);
}

double Histogram::center(int bin) const {
  return lo_ + (hi_ - lo_) * (static_cast<double>(bin) + 0.5) / static_cast<double>(counts_.size());
}

std::vector<double> Histogram::masses() const {
  if (total_ == 0) fail(ErrorCode::EmptyInput, "histogram has no values in range");
  std::vector<double> m(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    m[i] = static_cast<double>(counts_[i]) / static_cast<double>(total_);
  }
  return m;
}

Histogram dos_histogram(std::span<const double> values, int n_bins, double lo, double hi) {
  if (values.empty()) fail(ErrorCode::EmptyInput, "no values to histogram");
  Histogram h(n_bins, lo, hi);
  h.add(values);
  if (h.total() == 0) fail(ErrorCode::EmptyInput, "no values inside the histogram range");
  return h;
}

double total_variation(const Histogram& a, const Histogram& b) {
  require(a.n_bins() == b.n_bins() && a.lo() == b.lo() && a.hi() == b.hi(),
          ErrorCode::ShapeMismatch, "histograms must share their binning");
  const auto pa = a.masses();
  const auto pb = b.masses();
  double d = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) d += std::abs(pa[i] - pb[i]);
  return 0.5 * d;
}

}  // namespace mblab
