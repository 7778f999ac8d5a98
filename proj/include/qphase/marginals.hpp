#pragma once

#include <cmath>
#include <vector>

#include "qphase/fock.hpp"
#include "qphase/hermite.hpp"
#include "qphase/phasespace.hpp"

namespace qphase {

/// Position-space density and current on a uniform q axis. The current is the
/// momentum-weighted marginal (integral of p times the distribution over p),
/// which equals hbar Im(psi* dpsi/dq) for pure states; the continuity equation
/// then carries an explicit 1/m.
struct SpatialProfile {
    Eigen::VectorXd axis;
    Eigen::VectorXd density;
    Eigen::VectorXd current;
};

inline Eigen::VectorXd uniform_axis(double radius, int samples) {
    GridAxis ax(radius, samples);
    Eigen::VectorXd v(samples);
    for (int i = 0; i < samples; ++i) v(i) = ax.value(i);
    return v;
}

/// The q values of a grid's Re-alpha axis for one mode.
inline Eigen::VectorXd q_axis_of(const PhaseGrid& grid, int mode = 0) {
    const GridAxis& ax = grid.axes[mode];
    Eigen::VectorXd v(ax.samples);
    for (int i = 0; i < ax.samples; ++i)
        v(i) = q_of(grid.space, mode, Complex(ax.value(i), 0.0));
    return v;
}

inline Eigen::VectorXd simpson_weights(const Eigen::VectorXd& axis) {
    const int n = static_cast<int>(axis.size());
    if (n < 3 || n % 2 == 0) throw DomainError("simpson_weights: odd sample count >= 3 required");
    const double h = axis(1) - axis(0);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i)
        w(i) = (i == 0 || i == n - 1) ? h / 3.0 : (i % 2 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
    return w;
}

inline void check_density_profile(const SpatialProfile& prof) {
    if (prof.density.minCoeff() < -1e-12)
        throw DomainError("SpatialProfile: negative density beyond round-off");
    const double total = simpson_weights(prof.axis).dot(prof.density);
    if (std::abs(total - 1.0) > 1e-5)
        throw DomainError("SpatialProfile: density integrates to " + std::to_string(total));
}

/// |psi(q)|^2 and hbar Im(psi* psi') from the Fock amplitudes.
inline SpatialProfile psi_profile(const StateVector& state, const Eigen::VectorXd& axis) {
    if (state.space.modes() != 1) throw UnsupportedError("psi_profile: single mode only");
    SpatialProfile prof;
    prof.axis = axis;
    prof.density.resize(axis.size());
    prof.current.resize(axis.size());
    for (long i = 0; i < axis.size(); ++i) {
        auto [psi, dpsi] = position_wavefunction(state, axis(i));
        prof.density(i) = std::norm(psi);
        prof.current(i) = state.space.hbar * std::imag(std::conj(psi) * dpsi);
    }
    check_density_profile(prof);
    return prof;
}

namespace detail {

inline SpatialProfile momentum_marginals(const PhaseDistribution& dist, const char* who) {
    const ModeSpace& space = dist.grid.space;
    if (space.modes() != 1) throw UnsupportedError(std::string(who) + ": single mode only");
    if (dist.measure != Measure::QP)
        throw MeasureError(std::string(who) + ": per-dqdp measure required");
    const GridAxis& ax = dist.grid.axes[0];
    const int n = ax.samples;
    SpatialProfile prof;
    prof.axis = q_axis_of(dist.grid);
    prof.density = Eigen::VectorXd::Zero(n);
    prof.current = Eigen::VectorXd::Zero(n);
    // p runs along the Im-alpha axis; weights converted to p units
    const double pscale = std::sqrt(2.0 * space.hbar * space.mass[0] * space.omega[0]);
    for (int re = 0; re < n; ++re) {
        double dsum = 0.0, jsum = 0.0;
        for (int im = 0; im < n; ++im) {
            const double w = ax.simpson_weight(im) * pscale;
            const double p = p_of(space, 0, Complex(0.0, ax.value(im)));
            const double v = dist.values(static_cast<long>(re) * n + im);
            dsum += w * v;
            jsum += w * p * v;
        }
        prof.density(re) = dsum;
        prof.current(re) = jsum;
    }
    return prof;
}

} // namespace detail

/// density(q) = int W dp, current(q) = int p W dp.
inline SpatialProfile wigner_marginals(const PhaseDistribution& wigner) {
    if (wigner.kind != DistKind::Wigner)
        throw DomainError("wigner_marginals: Wigner distribution required");
    SpatialProfile prof = detail::momentum_marginals(wigner, "wigner_marginals");
    check_density_profile(prof);
    return prof;
}

/// rho_Q(q) = int Q dp, j_Q(q) = int p Q dp, by direct quadrature.
inline SpatialProfile q_marginals(const PhaseDistribution& q) {
    if (q.kind != DistKind::Q) throw DomainError("q_marginals: Q distribution required");
    SpatialProfile prof = detail::momentum_marginals(q, "q_marginals");
    check_density_profile(prof);
    return prof;
}

struct ContinuityCheck {
    double max_residual = 0.0;  // max over interior (q, t) of |d rho/dt + (1/m) dj/dq|
    double time_scale = 0.0;    // max |d rho/dt|, for relative comparisons
};

/// Central-difference check of d rho_Q/dt + (1/m) d j_Q/dq = 0 on uniformly
/// spaced profiles.
inline ContinuityCheck continuity_residual(const std::vector<SpatialProfile>& profiles,
                                           const std::vector<double>& times, double mass) {
    if (profiles.size() < 3 || times.size() != profiles.size())
        throw SamplingError("continuity_residual: at least 3 uniformly spaced times required");
    const double dt = times[1] - times[0];
    for (std::size_t i = 1; i + 1 < times.size(); ++i)
        if (std::abs((times[i + 1] - times[i]) - dt) > 1e-12 * std::max(1.0, std::abs(dt)))
            throw SamplingError("continuity_residual: time grid is not uniform");
    const long n = profiles[0].axis.size();
    const double dq = profiles[0].axis(1) - profiles[0].axis(0);
    ContinuityCheck out;
    for (std::size_t t = 1; t + 1 < profiles.size(); ++t) {
        for (long i = 1; i + 1 < n; ++i) {
            const double drho_dt = (profiles[t + 1].density(i) - profiles[t - 1].density(i)) / (2 * dt);
            const double dj_dq = (profiles[t].current(i + 1) - profiles[t].current(i - 1)) / (2 * dq);
            out.max_residual = std::max(out.max_residual, std::abs(drho_dt + dj_dq / mass));
            out.time_scale = std::max(out.time_scale, std::abs(drho_dt));
        }
    }
    return out;
}

} // namespace qphase
