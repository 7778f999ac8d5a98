#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "qphase/fock.hpp"
#include "qphase/polynomial.hpp"

namespace qphase {

inline constexpr double kQNegativityTol = 1e-12;

enum class Measure { Alpha2, QP };       // density per d^2alpha vs per dq dp
enum class DistKind { Q, Husimi, Wigner };

/// One phase-space point, alpha per mode.
struct PhasePoint {
    std::vector<Complex> alphas;
    PhasePoint() = default;
    explicit PhasePoint(Complex a) : alphas{a} {}
    explicit PhasePoint(std::vector<Complex> a) : alphas(std::move(a)) {}
};

inline Complex alpha_from_qp(const ModeSpace& space, int mode, double q, double p) {
    const double mw = space.mass[mode] * space.omega[mode];
    return {std::sqrt(mw / (2.0 * space.hbar)) * q, p / std::sqrt(2.0 * space.hbar * mw)};
}

inline double q_of(const ModeSpace& space, int mode, Complex alpha) {
    return alpha.real() * std::sqrt(2.0 * space.hbar / (space.mass[mode] * space.omega[mode]));
}

inline double p_of(const ModeSpace& space, int mode, Complex alpha) {
    return alpha.imag() * std::sqrt(2.0 * space.hbar * space.mass[mode] * space.omega[mode]);
}

inline PhasePoint point_from_qp(const ModeSpace& space, const std::vector<double>& qs,
                                const std::vector<double>& ps) {
    std::vector<Complex> a(space.modes());
    for (int k = 0; k < space.modes(); ++k) a[k] = alpha_from_qp(space, k, qs[k], ps[k]);
    return PhasePoint(std::move(a));
}

/// Uniform axis over [-radius, radius]; odd sample count (composite Simpson).
struct GridAxis {
    double radius;
    int samples;

    GridAxis(double radius_, int samples_) : radius(radius_), samples(samples_) {
        if (!(radius > 0.0)) throw DomainError("GridAxis: radius must be positive");
        if (samples < 3 || samples % 2 == 0)
            throw DomainError("GridAxis: sample count must be odd and >= 3");
    }
    double step() const { return 2.0 * radius / (samples - 1); }
    double value(int i) const { return -radius + i * step(); }
    double simpson_weight(int i) const {
        const double h = step();
        if (i == 0 || i == samples - 1) return h / 3.0;
        return (i % 2 == 1) ? 4.0 * h / 3.0 : 2.0 * h / 3.0;
    }
};

/// Cartesian product of per-mode (Re alpha, Im alpha) axes. Flat index is
/// row-major over axes in mode order, Re before Im, mode 0 slowest.
struct PhaseGrid {
    ModeSpace space;
    std::vector<GridAxis> axes; // one per mode, shared by Re and Im

    PhaseGrid(ModeSpace space_, std::vector<GridAxis> axes_)
        : space(std::move(space_)), axes(std::move(axes_)) {
        if (static_cast<int>(axes.size()) != space.modes())
            throw DomainError("PhaseGrid: one axis per mode required");
    }

    long total_points() const {
        long n = 1;
        for (const auto& ax : axes) n *= static_cast<long>(ax.samples) * ax.samples;
        return n;
    }

    /// Per-mode (re, im) integer indices of a flat index.
    std::vector<std::pair<int, int>> unpack(long flat) const {
        std::vector<std::pair<int, int>> idx(axes.size());
        for (int k = static_cast<int>(axes.size()) - 1; k >= 0; --k) {
            int n = axes[k].samples;
            idx[k].second = static_cast<int>(flat % n);
            flat /= n;
            idx[k].first = static_cast<int>(flat % n);
            flat /= n;
        }
        return idx;
    }

    long pack(const std::vector<std::pair<int, int>>& idx) const {
        long flat = 0;
        for (std::size_t k = 0; k < axes.size(); ++k)
            flat = (flat * axes[k].samples + idx[k].first) * axes[k].samples + idx[k].second;
        return flat;
    }

    PhasePoint point_at(long flat) const {
        auto idx = unpack(flat);
        std::vector<Complex> a(axes.size());
        for (std::size_t k = 0; k < axes.size(); ++k)
            a[k] = Complex(axes[k].value(idx[k].first), axes[k].value(idx[k].second));
        return PhasePoint(std::move(a));
    }

    /// Simpson weight of the point in the d^2alpha measure (product rule).
    double weight_alpha(long flat) const {
        auto idx = unpack(flat);
        double w = 1.0;
        for (std::size_t k = 0; k < axes.size(); ++k)
            w *= axes[k].simpson_weight(idx[k].first) * axes[k].simpson_weight(idx[k].second);
        return w;
    }
};

inline PhaseGrid default_grid(const ModeSpace& space, double radius = 6.0, int samples = 121) {
    return PhaseGrid(space, std::vector<GridAxis>(space.modes(), GridAxis(radius, samples)));
}

/// (2 hbar)^M: the exact Jacobian between d^2alpha and dq dp per mode.
inline double qp_jacobian(const ModeSpace& space) {
    return std::pow(2.0 * space.hbar, space.modes());
}

struct PhaseDistribution {
    PhaseGrid grid;
    DistKind kind;
    double kappa;   // smoothing frequency for Husimi; omega for Q; unused for Wigner
    Measure measure;
    Eigen::VectorXd values;
};

inline PhaseDistribution convert_measure(const PhaseDistribution& dist, Measure target) {
    if (dist.measure == target) return dist;
    PhaseDistribution out = dist;
    out.measure = target;
    const double j = qp_jacobian(dist.grid.space);
    out.values = (target == Measure::QP) ? (dist.values / j).eval() : (dist.values * j).eval();
    return out;
}

/// Simpson-weighted grid sum honoring the measure convention. The summation
/// order is the fixed flat-index order.
inline double integrate(const PhaseDistribution& dist) {
    const double mf = (dist.measure == Measure::QP) ? qp_jacobian(dist.grid.space) : 1.0;
    double s = 0.0;
    const long n = dist.grid.total_points();
    for (long i = 0; i < n; ++i) s += dist.grid.weight_alpha(i) * dist.values(i);
    return s * mf;
}

// ---------------------------------------------------------------------------
// Q-function evaluation

/// <alpha|A|alpha> over a list of points, batched through dense matrix
/// products.
inline Eigen::VectorXcd overlap_values(const Matrix& a, const ModeSpace& space,
                                       const std::vector<PhasePoint>& points) {
    const long n = static_cast<long>(points.size());
    const long d = a.rows();
    Eigen::VectorXcd out(n);
    const long chunk = std::max<long>(1, (1L << 20) / std::max<long>(d, 1));
    Matrix v(d, std::min(chunk, n));
    for (long start = 0; start < n; start += chunk) {
        const long cols = std::min(chunk, n - start);
        for (long c = 0; c < cols; ++c)
            v.col(c) = coherent_projection(space, points[start + c].alphas);
        Matrix av = a * v.leftCols(cols);
        for (long c = 0; c < cols; ++c)
            out(start + c) = v.col(c).dot(av.col(c)); // conjugates the left factor
    }
    return out;
}

inline Eigen::VectorXcd overlap_values(const Matrix& a, const PhaseGrid& grid) {
    const long n = grid.total_points();
    std::vector<PhasePoint> points;
    points.reserve(n);
    for (long i = 0; i < n; ++i) points.push_back(grid.point_at(i));
    return overlap_values(a, grid.space, points);
}

/// Q(alpha) = (1/pi^M) <alpha|rho|alpha>, density per d^2alpha. Overlaps with
/// the truncated rho are exact at any alpha, so no point-level guard applies.
inline double q_value(const DensityOperator& rho, const PhasePoint& point) {
    Vector v = coherent_projection(rho.space, point.alphas);
    const double q = (v.dot(rho.matrix * v)).real() / std::pow(M_PI, rho.space.modes());
    if (q < -kQNegativityTol)
        throw DomainError("q_value: negative value beyond round-off: " + std::to_string(q));
    return q;
}

inline PhaseDistribution q_distribution(const DensityOperator& rho, const PhaseGrid& grid,
                                        Measure measure = Measure::Alpha2) {
    if (!(grid.space == rho.space)) throw DomainError("q_distribution: space mismatch");
    Eigen::VectorXcd raw = overlap_values(rho.matrix, grid);
    const double pref = 1.0 / std::pow(M_PI, grid.space.modes());
    Eigen::VectorXd vals = raw.real() * pref;
    const double lo = vals.minCoeff();
    if (lo < -kQNegativityTol)
        throw DomainError("q_distribution: negative value beyond round-off: " + std::to_string(lo));
    if (measure == Measure::QP) vals /= qp_jacobian(grid.space);
    return {grid, DistKind::Q, grid.space.omega[0], measure, std::move(vals)};
}

// ---------------------------------------------------------------------------
// Wigner function (single mode), Fock-basis Laguerre expansion:
//   W(alpha) = (2/pi) e^{-2|a|^2} sum_{m<=n} (2-d_mn)
//              Re[ rho_mn (-1)^m sqrt(m!/n!) (2a)^{n-m} L_m^{n-m}(4|a|^2) ]
// per d^2alpha; validated against direct quadrature of the defining integral
// in the test suite.

inline double wigner_alpha_value(const DensityOperator& rho, Complex alpha) {
    if (rho.space.modes() != 1) throw UnsupportedError("wigner: single mode only");
    const int d = rho.space.dims[0];
    const double u = 4.0 * std::norm(alpha);
    std::vector<double> lgf(d); // log n!
    lgf[0] = 0.0;
    for (int n = 1; n < d; ++n) lgf[n] = lgf[n - 1] + std::log(static_cast<double>(n));
    double total = 0.0;
    for (int m = 0; m < d; ++m) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        Complex pow2a = 1.0; // (2 alpha)^(n-m)
        for (int n = m; n < d; ++n) {
            const Complex rmn = rho.matrix(m, n);
            if (std::abs(rmn) > 0.0) {
                const double lag = std::assoc_laguerre(m, n - m, u);
                const double amp = std::exp(0.5 * (lgf[m] - lgf[n]));
                const double re = (rmn * pow2a).real() * sign * amp * lag;
                total += (n == m) ? re : 2.0 * re;
            }
            pow2a *= 2.0 * alpha;
        }
    }
    return (2.0 / M_PI) * std::exp(-2.0 * std::norm(alpha)) * total;
}

/// Wigner value per dq dp.
inline double wigner_value(const DensityOperator& rho, const PhasePoint& point) {
    return wigner_alpha_value(rho, point.alphas.at(0)) / qp_jacobian(rho.space);
}

inline PhaseDistribution wigner_distribution(const DensityOperator& rho, const PhaseGrid& grid,
                                             Measure measure = Measure::QP) {
    if (!(grid.space == rho.space)) throw DomainError("wigner_distribution: space mismatch");
    if (grid.space.modes() != 1) throw UnsupportedError("wigner: single mode only");
    const long n = grid.total_points();
    Eigen::VectorXd vals(n);
    for (long i = 0; i < n; ++i)
        vals(i) = wigner_alpha_value(rho, grid.point_at(i).alphas[0]);
    if (measure == Measure::QP) vals /= qp_jacobian(grid.space);
    return {grid, DistKind::Wigner, 0.0, measure, std::move(vals)};
}

// ---------------------------------------------------------------------------
// Weierstrass transform: Gaussian smoothing of a Wigner grid.
//
// In alpha coordinates the normalized minimum-uncertainty kernel of smoothing
// frequency kappa is (2/pi) exp(-2(kappa/w) dx^2 - 2(w/kappa) dy^2); its unit
// mass fixes the prefactor, and kappa = w reproduces the Q-function exactly.

struct WeierstrassKernel {
    double sigma_x, sigma_y; // kernel widths in Re/Im alpha
    static WeierstrassKernel make(const ModeSpace& space, double kappa) {
        if (!(kappa > 0.0)) throw DomainError("husimi: kappa must be positive");
        const double w = space.omega[0];
        return {0.5 * std::sqrt(w / kappa), 0.5 * std::sqrt(kappa / w)};
    }
    double value(double dx, double dy) const {
        return (2.0 / M_PI) *
               std::exp(-0.5 * dx * dx / (sigma_x * sigma_x) - 0.5 * dy * dy / (sigma_y * sigma_y));
    }
};

inline constexpr double kKernelCutSigmas = 7.0;

/// Radius beyond which the grid values have decayed below rel_tol of the peak.
inline double support_radius(const PhaseDistribution& dist, double rel_tol = 1e-6) {
    const double cutoff = rel_tol * dist.values.cwiseAbs().maxCoeff();
    double r = 0.0;
    for (long i = 0; i < dist.grid.total_points(); ++i)
        if (std::abs(dist.values(i)) > cutoff)
            r = std::max(r, std::abs(dist.grid.point_at(i).alphas[0]));
    return r;
}

/// Largest magnitude on the outermost grid ring; what zero padding neglects.
inline double edge_magnitude(const PhaseDistribution& dist) {
    const int n = dist.grid.axes[0].samples;
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
        m = std::max(m, std::abs(dist.values(static_cast<long>(0) * n + i)));
        m = std::max(m, std::abs(dist.values(static_cast<long>(n - 1) * n + i)));
        m = std::max(m, std::abs(dist.values(static_cast<long>(i) * n + 0)));
        m = std::max(m, std::abs(dist.values(static_cast<long>(i) * n + (n - 1))));
    }
    return m;
}

inline PhaseDistribution weierstrass_transform(const PhaseDistribution& wigner, double kappa) {
    if (wigner.kind != DistKind::Wigner)
        throw DomainError("weierstrass_transform: input must be a Wigner distribution");
    const ModeSpace& space = wigner.grid.space;
    if (space.modes() != 1) throw UnsupportedError("weierstrass_transform: single mode only");
    const WeierstrassKernel ker = WeierstrassKernel::make(space, kappa);
    const GridAxis& ax = wigner.grid.axes[0];
    const double width = std::max(ker.sigma_x, ker.sigma_y);
    if (ax.radius < support_radius(wigner) + 5.0 * width ||
        edge_magnitude(wigner) > 1e-9 * wigner.values.cwiseAbs().maxCoeff())
        throw ExtentError("weierstrass_transform: grid extent below support + 5 kernel widths");

    // Work on per-d^2alpha values; plain tensor-product quadrature of the
    // kernel is exponentially accurate for Gaussians at these step sizes.
    Eigen::VectorXd w_alpha = (wigner.measure == Measure::QP)
                                  ? (wigner.values * qp_jacobian(space)).eval()
                                  : wigner.values;
    const int n = ax.samples;
    const double h = ax.step();
    const int tx = static_cast<int>(std::ceil(kKernelCutSigmas * ker.sigma_x / h));
    const int ty = static_cast<int>(std::ceil(kKernelCutSigmas * ker.sigma_y / h));
    Eigen::MatrixXd kweights(2 * tx + 1, 2 * ty + 1);
    for (int a = -tx; a <= tx; ++a)
        for (int b = -ty; b <= ty; ++b)
            kweights(a + tx, b + ty) = ker.value(a * h, b * h) * h * h;

    Eigen::MatrixXd w = Eigen::Map<const Eigen::MatrixXd>(w_alpha.data(), n, n); // (im, re) col-major
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (int re = 0; re < n; ++re)
        for (int im = 0; im < n; ++im) {
            double acc = 0.0;
            const int alo = std::max(-tx, re - (n - 1)), ahi = std::min(tx, re);
            const int blo = std::max(-ty, im - (n - 1)), bhi = std::min(ty, im);
            for (int a = alo; a <= ahi; ++a)
                for (int b = blo; b <= bhi; ++b)
                    acc += kweights(a + tx, b + ty) * w(im - b, re - a);
            out(im, re) = acc;
        }
    Eigen::VectorXd vals = Eigen::Map<Eigen::VectorXd>(out.data(), n * n);
    if (wigner.measure == Measure::QP) vals /= qp_jacobian(space);
    return {wigner.grid, DistKind::Husimi, kappa, wigner.measure, std::move(vals)};
}

/// Pointwise Husimi(kappa) value per dq dp: quadrature of the smoothing
/// kernel against the Wigner function around the point.
inline double husimi_value(const DensityOperator& rho, const PhasePoint& point, double kappa) {
    if (rho.space.modes() != 1) throw UnsupportedError("husimi: single mode only");
    const WeierstrassKernel ker = WeierstrassKernel::make(rho.space, kappa);
    const Complex a0 = point.alphas.at(0);
    const int half = 48;
    const double hx = kKernelCutSigmas * ker.sigma_x / half;
    const double hy = kKernelCutSigmas * ker.sigma_y / half;
    auto simpson = [&](int i, int nn) { return (i == 0 || i == nn - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
    const int n = 2 * half + 1;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double dx = -half * hx + i * hx;
        for (int j = 0; j < n; ++j) {
            const double dy = -half * hy + j * hy;
            const double wv = wigner_alpha_value(rho, a0 - Complex(dx, dy));
            acc += simpson(i, n) * simpson(j, n) * ker.value(dx, dy) * wv;
        }
    }
    acc *= hx * hy / 9.0;
    return acc / qp_jacobian(rho.space); // per dq dp
}

// ---------------------------------------------------------------------------
// Region probabilities and polynomial expectations

/// Fraction of the grid cell around (re, im) on one mode's plane lying inside
/// the region, probed on a subdiv x subdiv lattice of cell midpoints.
inline double cell_coverage(const std::function<bool(Complex)>& region, double re, double im,
                            double h, int subdiv) {
    int inside = 0;
    for (int a = 0; a < subdiv; ++a)
        for (int b = 0; b < subdiv; ++b) {
            const double x = re + h * ((a + 0.5) / subdiv - 0.5);
            const double y = im + h * ((b + 0.5) / subdiv - 0.5);
            if (region(Complex(x, y))) ++inside;
        }
    return static_cast<double>(inside) / (subdiv * subdiv);
}

/// Integral of a Q distribution over the region. Single-mode grids use cell
/// weights with fractional coverage at the boundary (the cell rule keeps
/// coverage fractions and quadrature weights consistent; Simpson weights do
/// not); boundary resolution is O(h^2). Multi-mode grids fall back to
/// whole-cell membership of the grid point.
inline double region_probability(const PhaseDistribution& dist,
                                 const std::function<bool(const PhasePoint&)>& region,
                                 int subdiv = 8) {
    if (dist.kind != DistKind::Q)
        throw DomainError("region_probability: defined for Q distributions");
    const double mf = (dist.measure == Measure::QP) ? qp_jacobian(dist.grid.space) : 1.0;
    const long n = dist.grid.total_points();
    double s = 0.0;
    if (dist.grid.space.modes() == 1) {
        const double h = dist.grid.axes[0].step();
        auto region1 = [&](Complex a) { return region(PhasePoint(a)); };
        for (long i = 0; i < n; ++i) {
            const PhasePoint pt = dist.grid.point_at(i);
            const double cov =
                cell_coverage(region1, pt.alphas[0].real(), pt.alphas[0].imag(), h, subdiv);
            if (cov > 0.0) s += cov * h * h * dist.values(i);
        }
    } else {
        for (long i = 0; i < n; ++i)
            if (region(dist.grid.point_at(i))) s += dist.grid.weight_alpha(i) * dist.values(i);
    }
    return s * mf;
}

struct ExpectationResult {
    Complex value;
    bool extent_warning = false;
};

/// integral of f(q, p) against the distribution.
inline ExpectationResult phase_expectation(const PhaseDistribution& dist,
                                           const PhasePolynomial& f) {
    const ModeSpace& space = dist.grid.space;
    if (f.modes() != space.modes()) throw DomainError("phase_expectation: mode count mismatch");
    if (f.degree() > kPolynomialDegreeCap)
        throw DomainError("phase_expectation: polynomial degree above cap");
    ExpectationResult res;
    double rmin = dist.grid.axes[0].radius;
    for (const auto& ax : dist.grid.axes) rmin = std::min(rmin, ax.radius);
    res.extent_warning = rmin < 6.0 + 0.5 * f.degree();
    const double mf = (dist.measure == Measure::QP) ? qp_jacobian(space) : 1.0;
    const long n = dist.grid.total_points();
    std::vector<double> qs(space.modes()), ps(space.modes());
    Complex acc = 0.0;
    for (long i = 0; i < n; ++i) {
        const PhasePoint pt = dist.grid.point_at(i);
        for (int k = 0; k < space.modes(); ++k) {
            qs[k] = q_of(space, k, pt.alphas[k]);
            ps[k] = p_of(space, k, pt.alphas[k]);
        }
        acc += dist.grid.weight_alpha(i) * dist.values(i) * f.evaluate(space, qs, ps);
    }
    res.value = acc * mf;
    return res;
}

} // namespace qphase
