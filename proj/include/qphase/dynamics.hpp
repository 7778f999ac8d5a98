#pragma once

#include <cmath>
#include <vector>

#include "qphase/fock.hpp"
#include "qphase/phasespace.hpp"

namespace qphase {

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityOperator> states;
};

/// Unitary propagation rho_t = U rho_0 U^dag with U from the exact Hermitian
/// eigendecomposition of H. Stores steps+1 states on the uniform time grid
/// 0..t_final; no integrator error enters downstream checks.
inline Trajectory evolve(const DensityOperator& rho0, const OperatorMatrix& h, double t_final,
                         int steps) {
    if (steps < 1) throw DomainError("evolve: at least one step");
    if (!(h.space == rho0.space)) throw DomainError("evolve: space mismatch");
    const double herm = (h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kHermitianTol)
        throw DomainError("evolve: Hamiltonian not Hermitian (deviation " + std::to_string(herm) + ")");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix);
    const Matrix& v = es.eigenvectors();
    const Eigen::VectorXd& lam = es.eigenvalues();

    Trajectory traj;
    const double dt = t_final / steps;
    for (int s = 0; s <= steps; ++s) {
        const double t = s * dt;
        Vector phase(lam.size());
        for (long i = 0; i < lam.size(); ++i)
            phase(i) = std::exp(Complex(0.0, -lam(i) * t / rho0.space.hbar));
        Matrix u = v * phase.asDiagonal() * v.adjoint();
        Matrix rt = u * rho0.matrix * u.adjoint();
        rt = 0.5 * (rt + rt.adjoint().eval()); // scrub round-off asymmetry
        DensityOperator state(rho0.space, std::move(rt));
        if (std::abs(state.matrix.trace().real() - 1.0) > 1e-8)
            throw DomainError("evolve: trace drift beyond 1e-8");
        traj.times.push_back(t);
        traj.states.push_back(std::move(state));
    }
    return traj;
}

/// dQ/dt at one point: -(i / pi^M hbar) tr([H, rho] |alpha><alpha|).
inline double q_time_derivative(const DensityOperator& rho, const OperatorMatrix& h,
                                const PhasePoint& point) {
    if (!(h.space == rho.space)) throw DomainError("q_time_derivative: space mismatch");
    const Matrix comm = h.matrix * rho.matrix - rho.matrix * h.matrix;
    Vector v = coherent_projection(rho.space, point.alphas);
    const Complex val = Complex(0.0, -1.0) * v.dot(comm * v) /
                        (std::pow(M_PI, rho.space.modes()) * rho.space.hbar);
    if (std::abs(val.imag()) > 1e-10)
        throw DomainError("q_time_derivative: imaginary residue " + std::to_string(val.imag()));
    return val.real();
}

/// dQ/dt on every grid point, batched.
inline Eigen::VectorXd q_time_derivative_grid(const DensityOperator& rho, const OperatorMatrix& h,
                                              const PhaseGrid& grid) {
    const Matrix comm = h.matrix * rho.matrix - rho.matrix * h.matrix;
    Eigen::VectorXcd raw = overlap_values(comm, grid);
    const double pref = 1.0 / (std::pow(M_PI, grid.space.modes()) * grid.space.hbar);
    return (Complex(0.0, -1.0) * raw * pref).real();
}

/// Checks that harmonic Q dynamics reduce to the classical rotation flow
/// generated by the drift A = -i w alpha: dQ/dt must equal the angular
/// derivative of Q along the flow. The drift side is differenced along the
/// rotation with arc step equal to the grid step, which is exact for
/// rotation-invariant states and second-order otherwise. H must be harmonic
/// up to an additive constant.
inline double fokker_planck_residual(const DensityOperator& rho, const OperatorMatrix& h,
                                     const PhaseGrid& grid) {
    const ModeSpace& space = rho.space;
    if (space.modes() != 1) throw UnsupportedError("fokker_planck_residual: single mode only");
    Matrix diff = h.matrix - space.hbar * space.omega[0] * number_operator(space, 0).matrix;
    diff -= (diff.trace() / static_cast<double>(space.dim())) *
            Matrix::Identity(space.dim(), space.dim());
    if (diff.cwiseAbs().maxCoeff() > 1e-10)
        throw UnsupportedError("fokker_planck_residual: Hamiltonian is not harmonic");

    const double w = space.omega[0];
    const double hh = grid.axes[0].step();
    const long n = grid.total_points();
    const Eigen::VectorXd dq_dt = q_time_derivative_grid(rho, h, grid);
    const double pref = 1.0 / M_PI;

    std::vector<PhasePoint> rotated;
    rotated.reserve(2 * n);
    std::vector<double> steps(n);
    for (long i = 0; i < n; ++i) {
        const Complex a = grid.point_at(i).alphas[0];
        const double r = std::abs(a);
        // angular step chosen so the O(delta^2) difference error stays O(hh^2)
        // uniformly in r: the third angular derivative grows like r + r^3
        const double delta = std::min(1.0, hh / std::sqrt(r + r * r * r + 1e-300));
        steps[i] = delta;
        rotated.emplace_back(a * std::exp(Complex(0.0, delta)));
        rotated.emplace_back(a * std::exp(Complex(0.0, -delta)));
    }
    const Eigen::VectorXcd vals = overlap_values(rho.matrix, space, rotated);
    double residual = 0.0;
    for (long i = 0; i < n; ++i) {
        const double q_plus = vals(2 * i).real() * pref;
        const double q_minus = vals(2 * i + 1).real() * pref;
        const double drift = w * (q_plus - q_minus) / (2.0 * steps[i]);
        residual = std::max(residual, std::abs(dq_dt(i) - drift));
    }
    return residual;
}

} // namespace qphase
