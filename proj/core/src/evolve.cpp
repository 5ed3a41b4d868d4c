#include "mblab/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "mblab/error.hpp"

namespace mblab {

using cplx = std::complex<double>;

StateVector fock_vector(const SectorBasis& basis, const FockState& state) {
  StateVector psi = StateVector::Zero(static_cast<Eigen::Index>(basis.size()));
  psi(static_cast<Eigen::Index>(basis.index_of(state))) = 1.0;
  return psi;
}

std::vector<double> uniform_schedule(double t_max_ns, double dt_ns) {
  require(dt_ns > 0.0 && t_max_ns >= 0.0, ErrorCode::InvalidArgument,
          "schedule needs dt > 0 and t_max >= 0");
  std::vector<double> t;
  const auto steps = static_cast<long>(std::floor(t_max_ns / dt_ns + 1e-9));
  for (long i = 0; i <= steps; ++i) t.push_back(static_cast<double>(i) * dt_ns);
  return t;
}

struct KrylovPropagator::Projection {
  int dim = 0;              // size of the Krylov space actually built
  double norm = 0.0;        // norm of the starting vector
  double beta_last = 0.0;   // coupling to the first vector outside the space
  Eigen::MatrixXd s;        // eigenvectors of the projected tridiagonal
  Eigen::VectorXd theta;    // its eigenvalues, MHz
  Eigen::VectorXd s0;       // first row of s

  Eigen::VectorXcd coefficients(double tau_ns) const {
    Eigen::VectorXcd phase(dim);
    for (int i = 0; i < dim; ++i) phase(i) = std::polar(s0(i), -kRadPerMhzNs * theta(i) * tau_ns);
    return s * phase;
  }

  double error(double tau_ns) const {
    if (beta_last == 0.0) return 0.0;
    const auto c = coefficients(tau_ns);
    return norm * beta_last * std::abs(c(dim - 1));
  }
};

KrylovPropagator::KrylovPropagator(const HamiltonianOperator& h, KrylovOptions options)
    : h_(&h), options_(options) {
  require(options_.krylov_dim >= 2, ErrorCode::InvalidArgument, "Krylov dimension must be >= 2");
  require(options_.tol > 0.0, ErrorCode::InvalidArgument, "Krylov tolerance must be positive");
  const auto m = std::min<Eigen::Index>(options_.krylov_dim, static_cast<Eigen::Index>(h.dim()));
  basis_.resize(static_cast<Eigen::Index>(h.dim()), m);
}

void KrylovPropagator::build(const StateVector& psi, Projection& p) {
  const Eigen::Index n = basis_.rows();
  const auto m_max = static_cast<int>(basis_.cols());
  p.norm = psi.norm();
  basis_.col(0) = psi / p.norm;

  std::vector<double> alpha;
  std::vector<double> beta;
  Eigen::VectorXcd w(n);
  double scale = 0.0;
  p.beta_last = 0.0;
  int built = 0;
  for (int j = 0; j < m_max; ++j) {
    h_->apply(std::span<const cplx>(basis_.col(j).data(), static_cast<std::size_t>(n)),
              std::span<cplx>(w.data(), static_cast<std::size_t>(n)));
    ++matvecs_;
    const double a = basis_.col(j).dot(w).real();
    alpha.push_back(a);
    w -= a * basis_.col(j);
    if (j > 0) w -= beta.back() * basis_.col(j - 1);
    if (options_.full_reorthogonalization) {
      const Eigen::VectorXcd overlaps = basis_.leftCols(j + 1).adjoint() * w;
      w.noalias() -= basis_.leftCols(j + 1) * overlaps;
    }
    const double b = w.norm();
    scale = std::max({scale, std::abs(a), b});
    built = j + 1;
    if (b <= 1e-12 * std::max(scale, 1e-300) || built == n) {
      p.beta_last = 0.0;  // invariant subspace: projection is exact
      break;
    }
    if (built == m_max) {
      p.beta_last = b;
      break;
    }
    beta.push_back(b);
    basis_.col(j + 1) = w / b;
  }

  p.dim = built;
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), built);
  Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(beta.data(), built - 1);
  if (built == 1) {
    p.s = Eigen::MatrixXd::Ones(1, 1);
    p.theta = diag;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    p.s = tri.eigenvectors();
    p.theta = tri.eigenvalues();
  }
  p.s0 = p.s.row(0).transpose();
}

namespace {

// Largest tau in [0, limit] (limit > 0) with error(tau) <= tol, by bisection.
template <class Err>
double largest_accepted(const Err& error, double limit, double tol) {
  if (error(limit) <= tol) return limit;
  double lo = 0.0;
  double hi = limit;
  for (int it = 0; it < 60 && hi - lo > 1e-9 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (error(mid) <= tol) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

void KrylovPropagator::propagate_through(
    StateVector& psi, std::span<const double> offsets_ns,
    const std::function<void(std::size_t, const StateVector&)>& emit) {
  require(psi.size() == basis_.rows(), ErrorCode::ShapeMismatch,
          "state length does not match the sector dimension");
  for (std::size_t i = 0; i < offsets_ns.size(); ++i) {
    require(offsets_ns[i] >= 0.0 && (i == 0 || offsets_ns[i] >= offsets_ns[i - 1]),
            ErrorCode::InvalidArgument, "schedule must be ascending and non-negative");
  }
  if (offsets_ns.empty()) return;
  const double end = offsets_ns.back();
  const double snap = 1e-12 * std::max(end, 1.0);

  std::size_t next = 0;
  double now = 0.0;
  auto emit_ready = [&] {
    while (next < offsets_ns.size() && offsets_ns[next] - now <= snap) {
      if (emit) emit(next, psi);
      ++next;
    }
  };
  emit_ready();
  if (psi.norm() == 0.0) {
    while (next < offsets_ns.size()) {
      if (emit) emit(next, psi);
      ++next;
    }
    return;
  }

  Projection p;
  StateVector out(psi.size());
  while (next < offsets_ns.size()) {
    if (substeps_ >= options_.max_substeps) {
      fail(ErrorCode::PropagationFailure,
           "substep cap reached at t=" + std::to_string(now) + " ns", now);
    }
    build(psi, p);
    const double tol = options_.tol;
    auto err = [&](double tau) { return p.error(tau); };
    double reach = largest_accepted(err, end - now, tol);
    if (reach <= snap) {
      fail(ErrorCode::PropagationFailure,
           "no acceptable Krylov step at t=" + std::to_string(now) + " ns (residual " +
               std::to_string(p.error(end - now)) + ")",
           p.error(end - now));
    }

    auto lift = [&](double tau) {
      out.noalias() = basis_.leftCols(p.dim) * (p.norm * p.coefficients(tau));
    };
    while (next < offsets_ns.size() && offsets_ns[next] - now <= reach + snap) {
      const double tau = offsets_ns[next] - now;
      if (err(tau) > tol) {
        reach = largest_accepted(err, tau, tol);
        break;
      }
      lift(tau);
      if (emit) emit(next, out);
      ++next;
    }
    if (reach <= snap) {
      fail(ErrorCode::PropagationFailure,
           "Krylov step collapsed at t=" + std::to_string(now) + " ns", p.error(reach));
    }
    lift(reach);
    psi.swap(out);
    now += reach;
    ++substeps_;
    emit_ready();
  }
}

void KrylovPropagator::propagate(StateVector& psi, double dt_ns) {
  if (dt_ns == 0.0) return;
  if (dt_ns > 0.0) {
    const double offsets[] = {dt_ns};
    propagate_through(psi, offsets, {});
    return;
  }
  // exp(-iH dt) for dt < 0 equals conj(exp(-iH |dt|) conj(psi)) since H is real.
  psi = psi.conjugate().eval();
  const double offsets[] = {-dt_ns};
  propagate_through(psi, offsets, {});
  psi = psi.conjugate().eval();
}

Trajectory evolve_krylov(const HamiltonianOperator& h, const StateVector& psi0,
                         std::span<const double> schedule_ns, const KrylovOptions& options,
                         const TrajectoryObserver& observer) {
  require(!schedule_ns.empty() && schedule_ns.front() == 0.0, ErrorCode::InvalidArgument,
          "schedule must start at t = 0");
  require(std::abs(psi0.norm() - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
          "initial state must be normalized");

  Trajectory traj;
  traj.times_ns.assign(schedule_ns.begin(), schedule_ns.end());
  traj.norm.resize(schedule_ns.size());
  if (options.track_energy) traj.energy_mhz.resize(schedule_ns.size());
  if (options.keep_states) traj.states.resize(schedule_ns.size());

  KrylovPropagator prop(h, options);
  StateVector psi = psi0;
  StateVector hpsi(psi0.size());
  prop.propagate_through(psi, schedule_ns, [&](std::size_t i, const StateVector& state) {
    traj.norm[i] = state.norm();
    if (options.track_energy) {
      h.apply(std::span<const cplx>(state.data(), static_cast<std::size_t>(state.size())),
              std::span<cplx>(hpsi.data(), static_cast<std::size_t>(hpsi.size())));
      traj.energy_mhz[i] = state.dot(hpsi).real();
    }
    if (options.keep_states) traj.states[i] = state;
    if (observer) observer(i, schedule_ns[i], state);
  });
  traj.substeps = prop.substeps();
  traj.matvecs = prop.matvecs() + (options.track_energy ? schedule_ns.size() : 0);
  return traj;
}

DensePropagator::DensePropagator(const HamiltonianOperator& h, std::size_t cap)
    : eigs_(full_spectrum(h, true, cap)) {}

DensePropagator::DensePropagator(EigenSystem eigs) : eigs_(std::move(eigs)) {
  require(eigs_.vectors.has_value(), ErrorCode::VectorsRequired,
          "dense propagation needs eigenvectors");
}

StateVector DensePropagator::at(const StateVector& psi0, double t_ns) const {
  const Eigen::MatrixXd& q = *eigs_.vectors;
  require(psi0.size() == q.rows(), ErrorCode::ShapeMismatch,
          "state length does not match the sector dimension");
  const Eigen::VectorXd re = q.transpose() * psi0.real();
  const Eigen::VectorXd im = q.transpose() * psi0.imag();
  Eigen::VectorXd out_re(re.size()), out_im(re.size());
  for (Eigen::Index a = 0; a < re.size(); ++a) {
    const std::complex<double> c =
        std::complex<double>(re(a), im(a)) * std::polar(1.0, -kRadPerMhzNs * eigs_.energies(a) * t_ns);
    out_re(a) = c.real();
    out_im(a) = c.imag();
  }
  StateVector out(q.rows());
  out.real() = q * out_re;
  out.imag() = q * out_im;
  return out;
}

StateVector evolve_dense(const HamiltonianOperator& h, const StateVector& psi0, double t_ns,
                         std::size_t cap) {
  return DensePropagator(h, cap).at(psi0, t_ns);
}

}  // namespace mblab
