#pragma once

#include <cmath>
#include <vector>

#include "qphase/fock.hpp"

namespace qphase {

// Harmonic-oscillator position eigenfunctions via the stabilized recurrence
// on the *normalized* Hermite functions phi_n(xi) = H_n(xi) e^{-xi^2/2} /
// sqrt(2^n n! sqrt(pi)). The Gaussian factor rides along inside phi_0, so no
// factorials or large intermediates ever appear.
//
//   phi_{n+1} = sqrt(2/(n+1)) xi phi_n - sqrt(n/(n+1)) phi_{n-1}
//   phi_n'    = sqrt(2n) phi_{n-1} - xi phi_n

/// phi_0..phi_{count-1} at xi.
inline std::vector<double> hermite_functions(int count, double xi) {
    std::vector<double> phi(count);
    if (count <= 0) return phi;
    phi[0] = std::pow(M_PI, -0.25) * std::exp(-0.5 * xi * xi);
    if (count == 1) return phi;
    phi[1] = std::sqrt(2.0) * xi * phi[0];
    for (int n = 1; n + 1 < count; ++n)
        phi[n + 1] = std::sqrt(2.0 / (n + 1)) * xi * phi[n] - std::sqrt(n / (n + 1.0)) * phi[n - 1];
    return phi;
}

/// d phi_n / d xi for the same stack.
inline std::vector<double> hermite_function_derivatives(const std::vector<double>& phi, double xi) {
    std::vector<double> dphi(phi.size());
    for (std::size_t n = 0; n < phi.size(); ++n) {
        dphi[n] = -xi * phi[n];
        if (n >= 1) dphi[n] += std::sqrt(2.0 * n) * phi[n - 1];
    }
    return dphi;
}

/// psi(x) and psi'(x) for a single-mode state, summing Fock amplitudes
/// against psi_n(x) = (m omega / hbar)^{1/4} phi_n(x sqrt(m omega / hbar)).
inline std::pair<Complex, Complex> position_wavefunction(const StateVector& state, double x) {
    if (state.space.modes() != 1)
        throw UnsupportedError("position_wavefunction: single mode only");
    const double s = std::sqrt(state.space.mass[0] * state.space.omega[0] / state.space.hbar);
    const double xi = s * x;
    const int d = state.space.dims[0];
    std::vector<double> phi = hermite_functions(d, xi);
    std::vector<double> dphi = hermite_function_derivatives(phi, xi);
    Complex psi = 0.0, dpsi = 0.0;
    for (int n = 0; n < d; ++n) {
        psi += state.amplitudes(n) * phi[n];
        dpsi += state.amplitudes(n) * dphi[n];
    }
    const double root_s = std::sqrt(s);
    return {psi * root_s, dpsi * root_s * s}; // chain rule: d/dx = s d/dxi
}

} // namespace qphase
