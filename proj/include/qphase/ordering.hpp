#pragma once

#include <algorithm>
#include <deque>
#include <map>
#include <vector>

#include "qphase/fock.hpp"
#include "qphase/phasespace.hpp"
#include "qphase/polynomial.hpp"

namespace qphase {

namespace detail {

// c_q = sqrt(hbar / 2 m w), the ladder expansion prefactor of q.
inline Coefficient q_prefactor(int mode, int modes) {
    return Coefficient::units(ComplexRational::integer(1), -1, 1, mode, -1, -1, modes);
}
// c_p = sqrt(hbar m w / 2); p = i c_p (a^dag - a).
inline Coefficient p_prefactor(int mode, int modes) {
    return Coefficient::units(ComplexRational::integer(1), -1, 1, mode, 1, 1, modes);
}

// Symmetrized ladder expansion of q^m p^n on one mode, without prefactors:
// the average over all distinct interleavings of m (a + a^dag) factors and
// n (a^dag - a) factors.
inline std::map<LadderWord, Rational> symmetrize_mode(int mode, int m, int n) {
    std::vector<int> pattern; // 0 = q factor, 1 = p factor
    pattern.insert(pattern.end(), m, 0);
    pattern.insert(pattern.end(), n, 1);
    std::sort(pattern.begin(), pattern.end());
    long long perms = 0;
    std::map<LadderWord, long long> acc;
    do {
        ++perms;
        // expand the product of two-term factors over this ordering
        std::map<LadderWord, long long> cur;
        cur[LadderWord{}] = 1;
        for (int f : pattern) {
            std::map<LadderWord, long long> next;
            for (const auto& [w, c] : cur) {
                LadderWord wa = w, wd = w;
                wa.push_back({mode, false});
                wd.push_back({mode, true});
                if (f == 0) { // a + a^dag
                    next[wa] += c;
                    next[wd] += c;
                } else {      // a^dag - a
                    next[wd] += c;
                    next[wa] -= c;
                }
            }
            cur = std::move(next);
        }
        for (const auto& [w, c] : cur) acc[w] += c;
    } while (std::next_permutation(pattern.begin(), pattern.end()));
    std::map<LadderWord, Rational> out;
    for (const auto& [w, c] : acc)
        if (c != 0) out[w] = Rational(c, perms);
    return out;
}

} // namespace detail

/// Weyl quantization: each monomial maps to the fully symmetrized operator
/// product, expanded into ladder words. Tag: symmetric.
inline LadderPolynomial weyl_quantize(const PhasePolynomial& f) {
    if (f.degree() > kPolynomialDegreeCap)
        throw DomainError("weyl_quantize: polynomial degree above cap");
    const int modes = f.modes();
    LadderPolynomial out(modes);
    for (const auto& [mono, coeff] : f.terms()) {
        // cross-mode factors commute; symmetrization acts within each mode
        std::map<LadderWord, Coefficient> partial;
        partial[LadderWord{}] = coeff;
        for (int k = 0; k < modes; ++k) {
            const int m = mono.qpow[k], n = mono.ppow[k];
            if (m == 0 && n == 0) continue;
            Coefficient factor = Coefficient::integer(1, modes);
            for (int j = 0; j < m; ++j) factor = factor * detail::q_prefactor(k, modes);
            for (int j = 0; j < n; ++j)
                factor = factor * detail::p_prefactor(k, modes) * Coefficient::i_unit(modes);
            auto sym = detail::symmetrize_mode(k, m, n);
            std::map<LadderWord, Coefficient> next;
            for (const auto& [w0, c0] : partial)
                for (const auto& [wk, rk] : sym) {
                    LadderWord w = w0;
                    w.insert(w.end(), wk.begin(), wk.end());
                    Coefficient c = c0 * factor * Coefficient::rational(ComplexRational(rk), modes);
                    auto it = next.find(w);
                    if (it == next.end()) next[w] = c;
                    else it->second = it->second + c;
                }
            partial = std::move(next);
        }
        for (const auto& [w, c] : partial) out.add_term(w, c);
    }
    out.set_tag(OrderTag::Symmetric);
    return out;
}

/// Berezin (anti-Wick) quantization: substitute alpha, alpha* for the
/// classical variables and place every a left of every a^dag with no
/// commutator corrections. Tag: antinormal.
inline LadderPolynomial berezin_quantize(const PhasePolynomial& f) {
    if (f.degree() > kPolynomialDegreeCap)
        throw DomainError("berezin_quantize: polynomial degree above cap");
    const int modes = f.modes();
    LadderPolynomial out(modes);
    for (const auto& [mono, coeff] : f.terms()) {
        // expand prod_k (alpha + alpha*)^m (alpha* - alpha)^n over exponent
        // pairs (j, k) per mode; commuting classical algebra
        std::map<std::vector<std::pair<int, int>>, long long> cur;
        cur[std::vector<std::pair<int, int>>(modes, {0, 0})] = 1;
        Coefficient pref = coeff;
        for (int k = 0; k < modes; ++k) {
            const int m = mono.qpow[k], n = mono.ppow[k];
            for (int j = 0; j < m; ++j) pref = pref * detail::q_prefactor(k, modes);
            for (int j = 0; j < n; ++j)
                pref = pref * detail::p_prefactor(k, modes) * Coefficient::i_unit(modes);
            for (int j = 0; j < m + n; ++j) {
                const bool is_q = j < m;
                std::map<std::vector<std::pair<int, int>>, long long> next;
                for (const auto& [e, c] : cur) {
                    auto ea = e, ed = e;
                    ea[k].first += 1;  // alpha
                    ed[k].second += 1; // alpha*
                    if (is_q) { next[ea] += c; next[ed] += c; }
                    else { next[ed] += c; next[ea] -= c; }
                }
                cur = std::move(next);
            }
        }
        for (const auto& [e, c] : cur) {
            if (c == 0) continue;
            LadderWord w;
            for (int k = 0; k < modes; ++k)
                for (int j = 0; j < e[k].first; ++j) w.push_back({k, false});
            for (int k = 0; k < modes; ++k)
                for (int j = 0; j < e[k].second; ++j) w.push_back({k, true});
            out.add_term(w, pref.times_int(c));
        }
    }
    out.set_tag(OrderTag::Antinormal);
    return out;
}

/// Rewrite to anti-normal order by repeated application of
/// a^dag a = a a^dag - 1 per mode. Coefficient arithmetic is exact; no matrix
/// truncation is involved.
inline LadderPolynomial to_antinormal(const LadderPolynomial& op) {
    const int modes = op.modes();
    LadderPolynomial out(modes);
    for (const auto& [word0, coeff] : op.terms()) {
        std::map<LadderWord, long long> done;
        std::deque<std::pair<LadderWord, long long>> work;
        work.emplace_back(word0, 1);
        while (!work.empty()) {
            auto [w, mult] = std::move(work.front());
            work.pop_front();
            // leftmost adjacent (dagger, non-dagger) pair
            std::size_t i = 0;
            for (; i + 1 < w.size(); ++i)
                if (w[i].dagger && !w[i + 1].dagger) break;
            if (i + 1 >= w.size()) {
                // anti-normal; canonical order: annihilators then creators, by mode
                std::stable_sort(w.begin(), w.end(), [](const LadderOp& a, const LadderOp& b) {
                    if (a.dagger != b.dagger) return !a.dagger;
                    return a.mode < b.mode;
                });
                done[w] += mult;
                continue;
            }
            if (w[i].mode == w[i + 1].mode) {
                LadderWord contracted = w;
                contracted.erase(contracted.begin() + i, contracted.begin() + i + 2);
                std::swap(w[i], w[i + 1]);
                work.emplace_back(std::move(w), mult);
                work.emplace_back(std::move(contracted), -mult);
            } else {
                std::swap(w[i], w[i + 1]); // different modes commute
                work.emplace_back(std::move(w), mult);
            }
        }
        for (const auto& [w, mult] : done)
            if (mult != 0) out.add_term(w, coeff.times_int(mult));
    }
    out.set_tag(OrderTag::Antinormal);
    return out;
}

/// Dense matrix of a ladder polynomial on the given space.
inline OperatorMatrix matrix_of(const LadderPolynomial& op, const ModeSpace& space) {
    if (op.modes() != space.modes()) throw DomainError("matrix_of: mode count mismatch");
    const long d = space.dim();
    std::vector<Matrix> a(space.modes()), ad(space.modes());
    for (int k = 0; k < space.modes(); ++k) {
        a[k] = annihilation(space, k).matrix;
        ad[k] = a[k].adjoint();
    }
    Matrix total = Matrix::Zero(d, d);
    for (const auto& [w, c] : op.terms()) {
        Matrix m = Matrix::Identity(d, d);
        for (const auto& sym : w) m = m * (sym.dagger ? ad[sym.mode] : a[sym.mode]);
        total += c.value(space) * m;
    }
    return OperatorMatrix(space, std::move(total), "ladder_polynomial");
}

struct TraceExpectation {
    Complex value;
    bool truncation_warning = false;
};

// Largest occupied level of rho in the given mode, by diagonal weight.
inline int support_level(const DensityOperator& rho, int mode, double tol = 1e-12) {
    const long d = rho.space.dim();
    const long s = rho.space.stride(mode);
    const int dm = rho.space.dims[mode];
    int top = 0;
    for (long i = 0; i < d; ++i)
        if (rho.matrix(i, i).real() > tol)
            top = std::max(top, static_cast<int>((i / s) % dm));
    return top;
}

/// trace(rho * matrix(op)). Warns when a word can climb past the truncation
/// edge on the support of rho, which silently corrupts the trace.
inline TraceExpectation expectation_trace(const DensityOperator& rho, const LadderPolynomial& op) {
    TraceExpectation out;
    for (const auto& [w, c] : op.terms()) {
        std::vector<int> rise(rho.space.modes(), 0), peak(rho.space.modes(), 0);
        for (auto it = w.rbegin(); it != w.rend(); ++it) { // operators act right to left
            rise[it->mode] += it->dagger ? 1 : -1;
            peak[it->mode] = std::max(peak[it->mode], rise[it->mode]);
        }
        for (int k = 0; k < rho.space.modes(); ++k)
            if (support_level(rho, k) + peak[k] > rho.space.dims[k] - 1)
                out.truncation_warning = true;
    }
    out.value = (rho.matrix * matrix_of(op, rho.space).matrix).trace();
    return out;
}

/// Anti-normal words a^j a^dag^k become c-number monomials alpha^j alpha*^k
/// integrated against Q. Refuses other orderings: silently symmetrizing is
/// exactly the mistake this pipeline exists to expose.
inline Complex expectation_via_q(const DensityOperator& rho, const LadderPolynomial& op,
                                 const PhaseDistribution& q) {
    if (op.tag() != OrderTag::Antinormal)
        throw OrderingError("expectation_via_q: operator is not anti-normally ordered; "
                            "call to_antinormal first");
    if (q.kind != DistKind::Q) throw DomainError("expectation_via_q: Q distribution required");
    if (!(q.grid.space == rho.space))
        throw DomainError("expectation_via_q: distribution was built on a different space");
    const ModeSpace& space = q.grid.space;
    if (op.modes() != space.modes()) throw DomainError("expectation_via_q: mode count mismatch");
    const double mf = (q.measure == Measure::QP) ? qp_jacobian(space) : 1.0;
    struct MonomialTerm {
        Complex coeff;
        std::vector<std::pair<int, int>> powers; // (a, a^dag) exponents per mode
    };
    std::vector<MonomialTerm> monos;
    for (const auto& [w, c] : op.terms()) {
        MonomialTerm t{c.value(space), std::vector<std::pair<int, int>>(space.modes(), {0, 0})};
        for (const auto& sym : w)
            (sym.dagger ? t.powers[sym.mode].second : t.powers[sym.mode].first) += 1;
        monos.push_back(std::move(t));
    }
    const long n = q.grid.total_points();
    Complex acc = 0.0;
    for (long i = 0; i < n; ++i) {
        const PhasePoint pt = q.grid.point_at(i);
        Complex term = 0.0;
        for (const auto& t : monos) {
            Complex mono = t.coeff;
            for (int k = 0; k < space.modes(); ++k) {
                const Complex a = pt.alphas[k];
                for (int j = 0; j < t.powers[k].first; ++j) mono *= a;
                for (int j = 0; j < t.powers[k].second; ++j) mono *= std::conj(a);
            }
            term += mono;
        }
        acc += q.grid.weight_alpha(i) * q.values(i) * term;
    }
    return acc * mf;
}

/// Grid sized for the extent guard R >= 6 + degree/2 at the default step.
inline PhaseGrid moment_grid(const ModeSpace& space, int degree) {
    const double radius = 6.0 + 0.5 * degree;
    const int samples = 2 * static_cast<int>(std::ceil(radius / 0.1)) + 1;
    return default_grid(space, radius, samples);
}

inline Complex expectation_via_q(const DensityOperator& rho, const LadderPolynomial& op) {
    PhaseGrid grid = moment_grid(rho.space, op.degree());
    return expectation_via_q(rho, op, q_distribution(rho, grid));
}

/// trace pipeline under Weyl quantization minus Q pipeline under Berezin
/// quantization; for f = q^2 this is -hbar/(2 m omega) independent of rho.
inline double ordering_discrepancy(const PhasePolynomial& f, const DensityOperator& rho) {
    const Complex weyl = expectation_trace(rho, weyl_quantize(f)).value;
    const Complex berezin = expectation_via_q(rho, berezin_quantize(f));
    return (weyl - berezin).real();
}

} // namespace qphase
