#pragma once

#include <random>

#include "qphase/fock.hpp"
#include "qphase/measurement.hpp"

namespace qphase::test {

inline std::mt19937_64 rng(unsigned long long seed) { return std::mt19937_64(seed); }

inline Complex random_complex(std::mt19937_64& gen) {
    std::normal_distribution<double> g(0.0, 1.0);
    return {g(gen), g(gen)};
}

/// Random normalized pure state. Amplitudes beyond max_level (when >= 0) are
/// zero; a mild exponential envelope keeps typical states away from the
/// truncation edge and within the default grid extent.
inline StateVector random_state(const ModeSpace& space, std::mt19937_64& gen, int max_level = -1,
                                double envelope = 0.0) {
    Vector v(space.dim());
    for (long i = 0; i < v.size(); ++i) {
        const auto occ = space.unpack(i);
        int top = 0;
        for (int o : occ) top = std::max(top, o);
        if (max_level >= 0 && top > max_level) {
            v(i) = 0.0;
            continue;
        }
        v(i) = random_complex(gen) * std::exp(-envelope * top);
    }
    v /= v.norm();
    return StateVector(space, std::move(v));
}

/// Random full-rank density operator (Ginibre construction), optionally with
/// an exponential occupation envelope so that its Q mass stays inside the
/// default grid.
inline DensityOperator random_density(const ModeSpace& space, std::mt19937_64& gen,
                                      double envelope = 0.0, int max_level = -1) {
    const long d = space.dim();
    Matrix g(d, d);
    for (long i = 0; i < d; ++i) {
        const auto occ = space.unpack(i);
        int top = 0;
        for (int o : occ) top = std::max(top, o);
        const double damp = (max_level >= 0 && top > max_level) ? 0.0 : std::exp(-envelope * top);
        for (long j = 0; j < d; ++j) g(i, j) = damp * random_complex(gen);
    }
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    rho = 0.5 * (rho + rho.adjoint().eval());
    return DensityOperator(space, std::move(rho));
}

/// Orthonormal basis from the QR factorization of a random complex matrix.
inline std::vector<StateVector> random_basis(const ModeSpace& space, int count,
                                             std::mt19937_64& gen) {
    const long d = space.dim();
    Matrix g(d, d);
    for (long i = 0; i < d; ++i)
        for (long j = 0; j < d; ++j) g(i, j) = random_complex(gen);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    std::vector<StateVector> out;
    for (int i = 0; i < count; ++i) out.emplace_back(space, q.col(i).eval());
    return out;
}

/// Measurement model with pointer regions evenly placed on a circle so that
/// adjacent centres sit `separation` apart. The apparatus truncation is sized
/// from the outermost coherent node.
inline MeasurementModel circle_model(const std::vector<Complex>& amplitudes, double separation,
                                     double radius, std::vector<StateVector> basis,
                                     double phase = 0.0, double mu_support = -1.0) {
    const int n = static_cast<int>(amplitudes.size());
    const double ring = (n == 1) ? 0.0 : separation / (2.0 * std::sin(M_PI / n));
    std::vector<PointerRegion> regions;
    for (int j = 0; j < n; ++j) {
        const double th = phase + 2.0 * M_PI * j / std::max(n, 1);
        regions.push_back({j + 1, std::polar(ring, th), radius});
    }
    const double support = (mu_support >= 0.0) ? std::min(mu_support, radius)
                                               : std::max(std::min(1.0, radius - 2.2), 0.0);
    const int app_dim = required_truncation(Complex(ring + support, 0.0)) + 4;
    const ModeSpace system = basis[0].space;
    ModeSpace apparatus(app_dim, system.hbar, 1.0, 1.0);
    MeasurementModel model(system, apparatus, std::move(basis), amplitudes, std::move(regions));
    if (mu_support >= 0.0) model.mu_support = mu_support;
    return model;
}

/// Fock basis |0..n-1> on a small system space.
inline std::vector<StateVector> fock_basis(const ModeSpace& system, int count) {
    std::vector<StateVector> out;
    for (int i = 0; i < count; ++i) out.push_back(number_state(system, i));
    return out;
}

} // namespace qphase::test
