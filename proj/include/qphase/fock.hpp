#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qphase/errors.hpp"

namespace qphase {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr long kMaxDim = 4096;         // hard cap on the dense matrix dimension
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kNormTol = 1e-10;
inline constexpr double kCoherentTailTol = 1e-8;

/// Truncated multi-mode Fock space with its physical constants.
/// Mode 0 is the slowest-varying tensor index.
struct ModeSpace {
    double hbar = 1.0;
    std::vector<int> dims;      // Fock levels per mode, each >= 2
    std::vector<double> mass;   // per mode
    std::vector<double> omega;  // per mode

    ModeSpace(std::vector<int> dims_, std::vector<double> mass_,
              std::vector<double> omega_, double hbar_ = 1.0)
        : hbar(hbar_), dims(std::move(dims_)), mass(std::move(mass_)), omega(std::move(omega_)) {
        if (dims.empty()) throw DomainError("ModeSpace: at least one mode required");
        if (mass.size() != dims.size() || omega.size() != dims.size())
            throw DomainError("ModeSpace: per-mode parameter count mismatch");
        if (!(hbar > 0.0)) throw DomainError("ModeSpace: hbar must be positive");
        long d = 1;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            if (dims[k] < 2) throw DomainError("ModeSpace: truncation must be >= 2");
            if (!(mass[k] > 0.0) || !(omega[k] > 0.0))
                throw DomainError("ModeSpace: mass and omega must be positive");
            d *= dims[k];
            if (d > kMaxDim) throw ScaleError("ModeSpace: matrix dimension exceeds cap of 4096");
        }
    }

    /// Single-mode space, the common case.
    explicit ModeSpace(int dim, double hbar_ = 1.0, double mass_ = 1.0, double omega_ = 1.0)
        : ModeSpace(std::vector<int>{dim}, {mass_}, {omega_}, hbar_) {}

    int modes() const { return static_cast<int>(dims.size()); }

    long dim() const {
        long d = 1;
        for (int n : dims) d *= n;
        return d;
    }

    // Index stride of one Fock step in the given mode (mode 0 slowest).
    long stride(int mode) const {
        check_mode(mode);
        long s = 1;
        for (std::size_t k = mode + 1; k < dims.size(); ++k) s *= dims[k];
        return s;
    }

    void check_mode(int mode) const {
        if (mode < 0 || mode >= modes()) throw IndexError("mode index out of range");
    }

    std::vector<int> unpack(long index) const {
        std::vector<int> occ(dims.size());
        for (int k = modes() - 1; k >= 0; --k) {
            occ[k] = static_cast<int>(index % dims[k]);
            index /= dims[k];
        }
        return occ;
    }

    long pack(const std::vector<int>& occ) const {
        long index = 0;
        for (int k = 0; k < modes(); ++k) index = index * dims[k] + occ[k];
        return index;
    }

    /// Composite space: the modes of *this followed by the modes of other.
    ModeSpace tensor(const ModeSpace& other) const {
        if (hbar != other.hbar) throw DomainError("ModeSpace::tensor: hbar mismatch");
        std::vector<int> d = dims;
        std::vector<double> m = mass, w = omega;
        d.insert(d.end(), other.dims.begin(), other.dims.end());
        m.insert(m.end(), other.mass.begin(), other.mass.end());
        w.insert(w.end(), other.omega.begin(), other.omega.end());
        return ModeSpace(std::move(d), std::move(m), std::move(w), hbar);
    }

    bool operator==(const ModeSpace& o) const {
        return hbar == o.hbar && dims == o.dims && mass == o.mass && omega == o.omega;
    }
};

/// Normalized pure state.
struct StateVector {
    ModeSpace space;
    Vector amplitudes;

    StateVector(ModeSpace space_, Vector amplitudes_)
        : space(std::move(space_)), amplitudes(std::move(amplitudes_)) {
        if (amplitudes.size() != space.dim())
            throw DomainError("StateVector: amplitude length does not match space");
        double n = amplitudes.norm();
        if (std::abs(n - 1.0) > kNormTol)
            throw DomainError("StateVector: not normalized (norm " + std::to_string(n) + ")");
    }
};

/// Hermitian, positive-semidefinite, unit-trace operator.
struct DensityOperator {
    ModeSpace space;
    Matrix matrix;

    DensityOperator(ModeSpace space_, Matrix matrix_)
        : space(std::move(space_)), matrix(std::move(matrix_)) {
        const long d = space.dim();
        if (matrix.rows() != d || matrix.cols() != d)
            throw DomainError("DensityOperator: matrix dimension does not match space");
        double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
        if (herm > kHermitianTol)
            throw DomainError("DensityOperator: not Hermitian (max deviation " + std::to_string(herm) + ")");
        double tr = matrix.trace().real();
        if (std::abs(tr - 1.0) > kTraceTol)
            throw DomainError("DensityOperator: trace is " + std::to_string(tr) + ", expected 1");
        Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
        double lo = es.eigenvalues().minCoeff();
        if (lo < -kPsdTol)
            throw DomainError("DensityOperator: negative eigenvalue " + std::to_string(lo));
    }

    double purity() const { return (matrix * matrix).trace().real(); }
};

/// Arbitrary operator on a truncated space, with a free-text label.
struct OperatorMatrix {
    ModeSpace space;
    Matrix matrix;
    std::string label;

    OperatorMatrix(ModeSpace space_, Matrix matrix_, std::string label_ = "")
        : space(std::move(space_)), matrix(std::move(matrix_)), label(std::move(label_)) {
        const long d = space.dim();
        if (matrix.rows() != d || matrix.cols() != d)
            throw DomainError("OperatorMatrix: matrix dimension does not match space");
    }
};

/// <n-1|a|n> = sqrt(n) on the given mode, identity on the others.
inline OperatorMatrix annihilation(const ModeSpace& space, int mode = 0) {
    space.check_mode(mode);
    const long d = space.dim();
    const long s = space.stride(mode);
    const int dm = space.dims[mode];
    Matrix a = Matrix::Zero(d, d);
    for (long i = 0; i < d; ++i) {
        int n = static_cast<int>((i / s) % dm);
        if (n >= 1) a(i - s, i) = std::sqrt(static_cast<double>(n));
    }
    return OperatorMatrix(space, std::move(a), "a[" + std::to_string(mode) + "]");
}

inline OperatorMatrix creation(const ModeSpace& space, int mode = 0) {
    OperatorMatrix a = annihilation(space, mode);
    return OperatorMatrix(space, a.matrix.adjoint(), "a_dag[" + std::to_string(mode) + "]");
}

inline OperatorMatrix number_operator(const ModeSpace& space, int mode = 0) {
    space.check_mode(mode);
    const long d = space.dim();
    const long s = space.stride(mode);
    const int dm = space.dims[mode];
    Matrix n = Matrix::Zero(d, d);
    for (long i = 0; i < d; ++i) n(i, i) = static_cast<double>((i / s) % dm);
    return OperatorMatrix(space, std::move(n), "n[" + std::to_string(mode) + "]");
}

/// q = sqrt(hbar/(2 m omega)) (a + a^dag)
inline OperatorMatrix position(const ModeSpace& space, int mode = 0) {
    OperatorMatrix a = annihilation(space, mode);
    double c = std::sqrt(space.hbar / (2.0 * space.mass[mode] * space.omega[mode]));
    Matrix q = c * (a.matrix + a.matrix.adjoint());
    return OperatorMatrix(space, std::move(q), "q[" + std::to_string(mode) + "]");
}

/// p = i sqrt(hbar m omega / 2) (a^dag - a)
inline OperatorMatrix momentum(const ModeSpace& space, int mode = 0) {
    OperatorMatrix a = annihilation(space, mode);
    double c = std::sqrt(space.hbar * space.mass[mode] * space.omega[mode] / 2.0);
    Matrix p = Complex(0, 1) * c * (a.matrix.adjoint() - a.matrix);
    return OperatorMatrix(space, std::move(p), "p[" + std::to_string(mode) + "]");
}

/// H = sum_k hbar omega_k (n_k + 1/2)
inline OperatorMatrix harmonic_hamiltonian(const ModeSpace& space) {
    const long d = space.dim();
    Matrix h = Matrix::Zero(d, d);
    for (long i = 0; i < d; ++i) {
        std::vector<int> occ = space.unpack(i);
        double e = 0.0;
        for (int k = 0; k < space.modes(); ++k)
            e += space.hbar * space.omega[k] * (occ[k] + 0.5);
        h(i, i) = e;
    }
    return OperatorMatrix(space, std::move(h), "H_harmonic");
}

/// H = hbar (omega n + chi n^2), single mode. n-conserving anharmonicity.
inline OperatorMatrix kerr_hamiltonian(const ModeSpace& space, double chi, int mode = 0) {
    space.check_mode(mode);
    const long d = space.dim();
    const long s = space.stride(mode);
    const int dm = space.dims[mode];
    Matrix h = Matrix::Zero(d, d);
    for (long i = 0; i < d; ++i) {
        double n = static_cast<double>((i / s) % dm);
        h(i, i) = space.hbar * (space.omega[mode] * n + chi * n * n);
    }
    return OperatorMatrix(space, std::move(h), "H_kerr");
}

inline StateVector number_state(const ModeSpace& space, const std::vector<int>& occupations) {
    if (static_cast<int>(occupations.size()) != space.modes())
        throw DomainError("number_state: one occupation per mode required");
    for (int k = 0; k < space.modes(); ++k)
        if (occupations[k] < 0 || occupations[k] >= space.dims[k])
            throw TruncationError("number_state: occupation " + std::to_string(occupations[k]) +
                                  " outside truncation " + std::to_string(space.dims[k]));
    Vector v = Vector::Zero(space.dim());
    v(space.pack(occupations)) = 1.0;
    return StateVector(space, std::move(v));
}

inline StateVector number_state(const ModeSpace& space, int n) {
    return number_state(space, std::vector<int>{n});
}

/// Smallest truncation D whose tail mass 1 - sum_{n<D} |c_n|^2 stays below tol
/// for a coherent state of amplitude alpha (Poisson tail with mean |alpha|^2).
inline int required_truncation(Complex alpha, double tol = kCoherentTailTol) {
    const double lam = std::norm(alpha);
    double term = std::exp(-lam); // Poisson P(0)
    double cum = term;
    int n = 0;
    while (1.0 - cum >= tol) {
        ++n;
        term *= lam / n;
        cum += term;
        if (n > 100000) throw DomainError("required_truncation: did not converge");
    }
    return std::max(n + 1, 2);
}

/// Truncated coherent state c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!),
/// renormalized after the tail-mass guard passes. Multi-mode: tensor product.
inline StateVector coherent_state(const ModeSpace& space, const std::vector<Complex>& alphas) {
    if (static_cast<int>(alphas.size()) != space.modes())
        throw DomainError("coherent_state: one amplitude per mode required");
    double total_tail = 0.0;
    std::vector<Vector> per_mode;
    per_mode.reserve(alphas.size());
    for (int k = 0; k < space.modes(); ++k) {
        const int dm = space.dims[k];
        Vector c(dm);
        c(0) = std::exp(-0.5 * std::norm(alphas[k]));
        for (int n = 1; n < dm; ++n) c(n) = c(n - 1) * alphas[k] / std::sqrt(static_cast<double>(n));
        double kept = c.squaredNorm();
        total_tail += 1.0 - kept;
        per_mode.push_back(std::move(c));
    }
    if (total_tail >= kCoherentTailTol) {
        std::ostringstream msg;
        msg << "coherent_state: tail mass " << total_tail << " exceeds guard " << kCoherentTailTol
            << "; required truncations:";
        for (int k = 0; k < space.modes(); ++k)
            msg << " mode " << k << ": D >= " << required_truncation(alphas[k]);
        throw TruncationError(msg.str());
    }
    Vector v = per_mode[0];
    for (int k = 1; k < space.modes(); ++k) {
        Vector t(v.size() * per_mode[k].size());
        for (long i = 0; i < v.size(); ++i)
            t.segment(i * per_mode[k].size(), per_mode[k].size()) = v(i) * per_mode[k];
        v = std::move(t);
    }
    v /= v.norm();
    return StateVector(space, std::move(v));
}

inline StateVector coherent_state(const ModeSpace& space, Complex alpha) {
    return coherent_state(space, std::vector<Complex>{alpha});
}

inline DensityOperator pure_density(const StateVector& state) {
    Matrix m = state.amplitudes * state.amplitudes.adjoint();
    return DensityOperator(state.space, std::move(m));
}

/// Unnormalized projection of |alpha> onto the truncated space. Overlaps
/// <alpha|m> taken from this vector are exact for any alpha, which is what
/// phase-space evaluation needs; tails are only an issue for *states*.
inline Vector coherent_projection(const ModeSpace& space, const std::vector<Complex>& alphas) {
    if (static_cast<int>(alphas.size()) != space.modes())
        throw DomainError("coherent_projection: one amplitude per mode required");
    Vector v = Vector::Ones(1);
    for (int k = 0; k < space.modes(); ++k) {
        const int dm = space.dims[k];
        Vector c(dm);
        c(0) = std::exp(-0.5 * std::norm(alphas[k]));
        for (int n = 1; n < dm; ++n) c(n) = c(n - 1) * alphas[k] / std::sqrt(static_cast<double>(n));
        Vector t(v.size() * dm);
        for (long i = 0; i < v.size(); ++i) t.segment(i * dm, dm) = v(i) * c;
        v = std::move(t);
    }
    return v;
}

inline Matrix tensor_product(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long i = 0; i < a.rows(); ++i)
        for (long j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Reduced density matrix of one mode, tracing out all the others.
inline DensityOperator partial_trace(const DensityOperator& rho, int keep) {
    rho.space.check_mode(keep);
    const int dk = rho.space.dims[keep];
    const long sk = rho.space.stride(keep);
    const long d = rho.space.dim();
    Matrix out = Matrix::Zero(dk, dk);
    for (long i = 0; i < d; ++i) {
        int ni = static_cast<int>((i / sk) % dk);
        long rest_i = i - ni * sk;
        for (int nj = 0; nj < dk; ++nj) {
            long j = rest_i + nj * sk;
            out(ni, nj) += rho.matrix(i, j);
        }
    }
    ModeSpace sub({rho.space.dims[keep]}, {rho.space.mass[keep]}, {rho.space.omega[keep]},
                  rho.space.hbar);
    return DensityOperator(std::move(sub), std::move(out));
}

} // namespace qphase
