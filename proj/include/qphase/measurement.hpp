#pragma once

#include <cmath>
#include <vector>

#include "qphase/fock.hpp"
#include "qphase/phasespace.hpp"

namespace qphase {

/// Disk-shaped pointer region in the apparatus alpha plane.
struct PointerRegion {
    int label = 0;
    Complex centre;
    double radius = 0.0;
};

/// Projective measurement model: system basis {|B_i>}, amplitudes c_i, one
/// pointer region per outcome, and the region weight mu (a width-`mu_width`
/// Gaussian truncated at `mu_support` from the centre). The macroscopic
/// pointer of the modeled apparatus is emulated by region separation large
/// against the coherent width, not by mode count.
struct MeasurementModel {
    ModeSpace system;
    ModeSpace apparatus;
    std::vector<StateVector> basis;
    std::vector<Complex> amplitudes;
    std::vector<PointerRegion> regions;
    double mu_width = 1.0;
    double mu_support = -1.0; // negative: use min(mu_width, radius - 2.2)
    int mu_nodes = 17;        // quadrature lattice per axis over the support box
    bool allow_small_regions = false;

    MeasurementModel(ModeSpace system_, ModeSpace apparatus_, std::vector<StateVector> basis_,
                     std::vector<Complex> amplitudes_, std::vector<PointerRegion> regions_)
        : system(std::move(system_)), apparatus(std::move(apparatus_)), basis(std::move(basis_)),
          amplitudes(std::move(amplitudes_)), regions(std::move(regions_)) {
        if (system.modes() != 1 || apparatus.modes() != 1)
            throw DomainError("MeasurementModel: system and apparatus are single-mode");
        const std::size_t n = basis.size();
        if (n == 0 || amplitudes.size() != n || regions.size() != n)
            throw DomainError("MeasurementModel: one amplitude and one region per basis element");
        double total = 0.0;
        for (const Complex& c : amplitudes) total += std::norm(c);
        if (std::abs(total - 1.0) > 1e-10)
            throw DomainError("MeasurementModel: amplitudes must satisfy sum |c_i|^2 = 1");
        for (std::size_t i = 0; i < n; ++i) {
            if (!(basis[i].space == system))
                throw DomainError("MeasurementModel: basis state on wrong space");
            for (std::size_t j = 0; j < i; ++j) {
                const Complex ov = basis[j].amplitudes.dot(basis[i].amplitudes);
                if (std::abs(ov) > 1e-10)
                    throw DomainError("MeasurementModel: basis not orthonormal");
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) {
                const double gap = std::abs(regions[i].centre - regions[j].centre) -
                                   regions[i].radius - regions[j].radius;
                if (gap < 2.0 - 1e-12)
                    throw GeometryError("MeasurementModel: pointer regions closer than gap 2");
            }
    }

    int outcomes() const { return static_cast<int>(basis.size()); }

    void check_outcome(int j) const {
        if (j < 0 || j >= outcomes()) throw IndexError("outcome index out of range");
    }

    double support_radius(int j) const {
        check_outcome(j);
        if (mu_support >= 0.0) return std::min(mu_support, regions[j].radius);
        return std::max(std::min(mu_width, regions[j].radius - 2.2), 0.0);
    }
};

/// rho_j: quadrature sum of coherent projectors over the region weight,
/// trace-renormalized. The default guard keeps the region wide enough that
/// the mixture's Q mass inside Gamma_j exceeds 0.999.
inline DensityOperator pointer_state(const MeasurementModel& model, int j) {
    model.check_outcome(j);
    const PointerRegion& reg = model.regions[j];
    if (reg.radius < 3.0 && !model.allow_small_regions)
        throw GeometryError("pointer_state: region radius below 3 (set allow_small_regions to "
                            "accept degraded pointer fidelity)");
    const double s = model.support_radius(j);
    const long d = model.apparatus.dim();
    Matrix acc = Matrix::Zero(d, d);
    auto add_node = [&](Complex alpha, double weight) {
        Vector v = coherent_state(model.apparatus, alpha).amplitudes;
        acc.noalias() += weight * (v * v.adjoint());
    };
    if (s <= 1e-12) {
        add_node(reg.centre, 1.0);
    } else {
        const int n = model.mu_nodes;
        const double h = 2.0 * s / (n - 1);
        const double two_sigma_sq = 2.0 * model.mu_width * model.mu_width;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const Complex delta(-s + a * h, -s + b * h);
                if (std::norm(delta) > s * s + 1e-12) continue;
                add_node(reg.centre + delta, std::exp(-std::norm(delta) / two_sigma_sq));
            }
    }
    acc /= acc.trace().real();
    return DensityOperator(model.apparatus, std::move(acc));
}

/// rho_red,A = sum_i |c_i|^2 rho_i.
inline DensityOperator apparatus_reduced_state(const MeasurementModel& model) {
    const long d = model.apparatus.dim();
    Matrix acc = Matrix::Zero(d, d);
    for (int i = 0; i < model.outcomes(); ++i)
        acc += std::norm(model.amplitudes[i]) * pointer_state(model, i).matrix;
    return DensityOperator(model.apparatus, std::move(acc));
}

/// Post-measurement joint state with cross terms dropped: full dephasing in
/// the measured basis, rho_SA = sum_i |c_i|^2 |B_i><B_i| (x) rho_i.
inline DensityOperator post_measurement_state(const MeasurementModel& model) {
    const ModeSpace joint = model.system.tensor(model.apparatus);
    Matrix acc = Matrix::Zero(joint.dim(), joint.dim());
    for (int i = 0; i < model.outcomes(); ++i) {
        const Matrix proj = model.basis[i].amplitudes * model.basis[i].amplitudes.adjoint();
        acc += std::norm(model.amplitudes[i]) *
               tensor_product(proj, pointer_state(model, i).matrix);
    }
    return DensityOperator(joint, std::move(acc));
}

/// Apparatus grid covering every region plus a decay margin.
inline PhaseGrid apparatus_grid(const MeasurementModel& model, double step = 0.125,
                                double margin = 2.5) {
    double radius = 0.0;
    for (const auto& reg : model.regions)
        radius = std::max(radius, std::abs(reg.centre) + reg.radius + margin);
    int samples = 2 * static_cast<int>(std::ceil(radius / step)) + 1;
    return default_grid(model.apparatus, radius, samples);
}

inline std::function<bool(const PhasePoint&)> region_predicate(const PointerRegion& reg) {
    return [reg](const PhasePoint& pt) { return std::abs(pt.alphas[0] - reg.centre) <= reg.radius; };
}

/// P(j): the apparatus reduced Q integrated over Gamma_j.
inline double pointer_probability(const MeasurementModel& model, int j, const PhaseGrid& grid) {
    model.check_outcome(j);
    PhaseDistribution q = q_distribution(apparatus_reduced_state(model), grid);
    return region_probability(q, region_predicate(model.regions[j]));
}

inline double pointer_probability(const MeasurementModel& model, int j) {
    return pointer_probability(model, j, apparatus_grid(model));
}

/// Joint Q over (beta, alpha): Q(beta, alpha) = sum_i |c_i|^2 Q_{B_i}(beta)
/// Q_{rho_i}(alpha), the Q-function of the dephased joint state.
inline PhaseDistribution joint_q(const MeasurementModel& model, const PhaseGrid& system_grid,
                                 const PhaseGrid& app_grid) {
    if (!(system_grid.space == model.system) || !(app_grid.space == model.apparatus))
        throw DomainError("joint_q: grid spaces must match the model");
    const ModeSpace joint_space = model.system.tensor(model.apparatus);
    PhaseGrid grid(joint_space, {system_grid.axes[0], app_grid.axes[0]});
    const long nsys = system_grid.total_points();
    const long napp = app_grid.total_points();
    std::vector<Eigen::VectorXd> u, v;
    for (int i = 0; i < model.outcomes(); ++i) {
        u.push_back(q_distribution(pure_density(model.basis[i]), system_grid).values);
        v.push_back(q_distribution(pointer_state(model, i), app_grid).values);
    }
    Eigen::VectorXd vals(nsys * napp);
    for (long b = 0; b < nsys; ++b) {
        double* row = vals.data() + b * napp;
        for (long a = 0; a < napp; ++a) {
            double acc = 0.0;
            for (int i = 0; i < model.outcomes(); ++i)
                acc += std::norm(model.amplitudes[i]) * u[i](b) * v[i](a);
            row[a] = acc;
        }
    }
    return {std::move(grid), DistKind::Q, joint_space.omega[0], Measure::Alpha2, std::move(vals)};
}

/// Marginal over all modes but `keep`; output is per d^2alpha of that mode.
inline PhaseDistribution marginal_mode(const PhaseDistribution& dist, int keep) {
    const ModeSpace& space = dist.grid.space;
    space.check_mode(keep);
    const Eigen::VectorXd vals_alpha = (dist.measure == Measure::QP)
                                           ? (dist.values * qp_jacobian(space)).eval()
                                           : dist.values;
    ModeSpace sub({space.dims[keep]}, {space.mass[keep]}, {space.omega[keep]}, space.hbar);
    PhaseGrid out_grid(sub, {dist.grid.axes[keep]});
    const int nk = dist.grid.axes[keep].samples;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<long>(nk) * nk);
    const long n = dist.grid.total_points();
    for (long i = 0; i < n; ++i) {
        auto idx = dist.grid.unpack(i);
        double w = 1.0;
        for (int k = 0; k < space.modes(); ++k) {
            if (k == keep) continue;
            w *= dist.grid.axes[k].simpson_weight(idx[k].first) *
                 dist.grid.axes[k].simpson_weight(idx[k].second);
        }
        out(static_cast<long>(idx[keep].first) * nk + idx[keep].second) += w * vals_alpha(i);
    }
    return {std::move(out_grid), dist.kind, dist.kappa, Measure::Alpha2, std::move(out)};
}

/// Probability that the apparatus mode of a joint Q lies in Gamma_j, with
/// fractional boundary cells.
inline double joint_region_probability(const PhaseDistribution& joint, const PointerRegion& reg,
                                       int subdiv = 8) {
    const PhaseDistribution app = marginal_mode(joint, 1);
    return region_probability(app, region_predicate(reg), subdiv);
}

/// Bayesian update on "the pointer is in Gamma_j": restrict the joint Q to
/// the region in apparatus phase space and renormalize by 1/P(j). Collapse of
/// the system marginal to Q_{B_j} is a consequence, not an input.
inline PhaseDistribution bayesian_update(const MeasurementModel& model,
                                         const PhaseDistribution& joint, int j, int subdiv = 8) {
    model.check_outcome(j);
    const ModeSpace& space = joint.grid.space;
    if (space.modes() != 2) throw DomainError("bayesian_update: joint distribution required");
    const GridAxis& app_ax = joint.grid.axes[1];
    const int napp = app_ax.samples;
    auto pred = region_predicate(model.regions[j]);
    Eigen::VectorXd coverage(static_cast<long>(napp) * napp);
    for (int re = 0; re < napp; ++re)
        for (int im = 0; im < napp; ++im)
            coverage(static_cast<long>(re) * napp + im) =
                cell_coverage([&](Complex a) { return pred(PhasePoint(a)); }, app_ax.value(re),
                              app_ax.value(im), app_ax.step(), subdiv);
    const long n = joint.grid.total_points();
    const long app_block = static_cast<long>(napp) * napp;
    PhaseDistribution out = joint;
    for (long i = 0; i < n; ++i) out.values(i) = joint.values(i) * coverage(i % app_block);
    const double pj = integrate(out);
    if (pj <= 1e-9)
        throw ConditioningError("bayesian_update: conditioning on a region of probability " +
                                std::to_string(pj));
    out.values /= pj;
    return out;
}

/// Overlap witness of two eigenstate Q-functions: integral of min(Q_n, Q_m).
inline double eigenstate_q_overlap(const ModeSpace& space, int n, int m, const PhaseGrid& grid) {
    if (space.modes() != 1) throw UnsupportedError("eigenstate_q_overlap: single mode only");
    if (n == m) throw DomainError("eigenstate_q_overlap: states must differ");
    const PhaseDistribution qn = q_distribution(pure_density(number_state(space, n)), grid);
    const PhaseDistribution qm = q_distribution(pure_density(number_state(space, m)), grid);
    double acc = 0.0;
    for (long i = 0; i < grid.total_points(); ++i)
        acc += grid.weight_alpha(i) * std::min(qn.values(i), qm.values(i));
    return acc;
}

inline double eigenstate_q_overlap(const ModeSpace& space, int n, int m) {
    const double radius = std::max(6.0, std::sqrt(static_cast<double>(std::max(n, m))) + 4.5);
    const int samples = 2 * static_cast<int>(std::ceil(radius / 0.04)) + 1;
    return eigenstate_q_overlap(space, n, m, default_grid(space, radius, samples));
}

} // namespace qphase
