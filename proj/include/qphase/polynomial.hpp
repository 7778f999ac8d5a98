#pragma once

#include <algorithm>
#include <boost/rational.hpp>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qphase/errors.hpp"
#include "qphase/fock.hpp"

namespace qphase {

inline constexpr int kPolynomialDegreeCap = 8;

using Rational = boost::rational<long long>;

struct ComplexRational {
    Rational re{0}, im{0};

    ComplexRational() = default;
    ComplexRational(Rational r, Rational i = Rational(0)) : re(r), im(i) {}
    static ComplexRational integer(long long n) { return ComplexRational(Rational(n)); }
    static ComplexRational i_unit() { return ComplexRational(Rational(0), Rational(1)); }

    bool is_zero() const { return re == Rational(0) && im == Rational(0); }
    ComplexRational operator+(const ComplexRational& o) const { return {re + o.re, im + o.im}; }
    ComplexRational operator-(const ComplexRational& o) const { return {re - o.re, im - o.im}; }
    ComplexRational operator*(const ComplexRational& o) const {
        return {re * o.re - im * o.im, re * o.im + im * o.re};
    }
    ComplexRational operator-() const { return {-re, -im}; }
    Complex value() const {
        return {boost::rational_cast<double>(re), boost::rational_cast<double>(im)};
    }
};

// Exact coefficient: a sum of atoms  r * sqrt(2)^s * hbar^(h/2) * prod_k
// m_k^(mu_k/2) w_k^(w_k/2)  with r complex rational and s in {0,1}. The
// quantization prefactors sqrt(hbar/2mw) and sqrt(hbar m w/2) live entirely in
// this ring, so commutator cascades stay exact until the final numeric
// evaluation against a ModeSpace.
struct CoeffAtom {
    ComplexRational r;
    int sqrt2 = 0;              // 0 or 1 after canonicalization
    int hbar2 = 0;              // half-integer exponents, counted in halves
    std::vector<int> mass2;     // per mode
    std::vector<int> omega2;    // per mode

    std::tuple<int, int, std::vector<int>, std::vector<int>> key() const {
        return {sqrt2, hbar2, mass2, omega2};
    }
};

class Coefficient {
  public:
    Coefficient() = default;

    static Coefficient zero(int modes = 1) { (void)modes; return Coefficient(); }

    static Coefficient rational(ComplexRational r, int modes = 1) {
        Coefficient c;
        if (!r.is_zero()) c.atoms_.push_back({r, 0, 0, std::vector<int>(modes, 0), std::vector<int>(modes, 0)});
        return c;
    }

    static Coefficient integer(long long n, int modes = 1) {
        return rational(ComplexRational::integer(n), modes);
    }

    static Coefficient i_unit(int modes = 1) { return rational(ComplexRational::i_unit(), modes); }

    /// r * 2^(two2/2) * hbar^(hbar2/2) * m_mode^(mass2/2) * w_mode^(omega2/2)
    static Coefficient units(ComplexRational r, int two2, int hbar2, int mode, int mass2,
                             int omega2, int modes) {
        CoeffAtom a;
        a.r = r;
        a.hbar2 = hbar2;
        a.mass2.assign(modes, 0);
        a.omega2.assign(modes, 0);
        a.mass2[mode] = mass2;
        a.omega2[mode] = omega2;
        // fold the even part of the power of two into the rational
        int k = (two2 >= 0) ? two2 / 2 : -((-two2 + 1) / 2);
        a.sqrt2 = two2 - 2 * k;
        Rational p(1);
        if (k >= 0) for (int j = 0; j < k; ++j) p *= 2;
        else for (int j = 0; j < -k; ++j) p /= 2;
        a.r = a.r * ComplexRational(p);
        Coefficient c;
        if (!a.r.is_zero()) c.atoms_.push_back(std::move(a));
        return c;
    }

    bool is_zero() const { return atoms_.empty(); }

    Coefficient operator+(const Coefficient& o) const {
        Coefficient out = *this;
        out.atoms_.insert(out.atoms_.end(), o.atoms_.begin(), o.atoms_.end());
        out.canonicalize();
        return out;
    }

    Coefficient operator-() const {
        Coefficient out = *this;
        for (auto& a : out.atoms_) a.r = -a.r;
        return out;
    }

    Coefficient operator-(const Coefficient& o) const { return *this + (-o); }

    Coefficient operator*(const Coefficient& o) const {
        Coefficient out;
        for (const auto& a : atoms_)
            for (const auto& b : o.atoms_) {
                CoeffAtom c;
                c.r = a.r * b.r;
                c.hbar2 = a.hbar2 + b.hbar2;
                c.mass2 = a.mass2;
                c.omega2 = a.omega2;
                if (b.mass2.size() != a.mass2.size())
                    throw DomainError("Coefficient: mode count mismatch");
                for (std::size_t k = 0; k < c.mass2.size(); ++k) {
                    c.mass2[k] += b.mass2[k];
                    c.omega2[k] += b.omega2[k];
                }
                int s = a.sqrt2 + b.sqrt2;
                if (s == 2) { c.r = c.r * ComplexRational::integer(2); s = 0; }
                c.sqrt2 = s;
                out.atoms_.push_back(std::move(c));
            }
        out.canonicalize();
        return out;
    }

    Coefficient times_int(long long n) const {
        Coefficient out = *this;
        for (auto& a : out.atoms_) a.r = a.r * ComplexRational::integer(n);
        if (n == 0) out.atoms_.clear();
        return out;
    }

    Complex value(const ModeSpace& space) const {
        Complex v = 0.0;
        for (const auto& a : atoms_) {
            if (static_cast<int>(a.mass2.size()) != space.modes())
                throw DomainError("Coefficient: mode count mismatch with space");
            double u = std::pow(2.0, 0.5 * a.sqrt2) * std::pow(space.hbar, 0.5 * a.hbar2);
            for (int k = 0; k < space.modes(); ++k)
                u *= std::pow(space.mass[k], 0.5 * a.mass2[k]) *
                     std::pow(space.omega[k], 0.5 * a.omega2[k]);
            v += a.r.value() * u;
        }
        return v;
    }

    const std::vector<CoeffAtom>& atoms() const { return atoms_; }

  private:
    void canonicalize() {
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const CoeffAtom& a, const CoeffAtom& b) { return a.key() < b.key(); });
        std::vector<CoeffAtom> merged;
        for (auto& a : atoms_) {
            if (!merged.empty() && merged.back().key() == a.key())
                merged.back().r = merged.back().r + a.r;
            else
                merged.push_back(std::move(a));
        }
        atoms_.clear();
        for (auto& a : merged)
            if (!a.r.is_zero()) atoms_.push_back(std::move(a));
    }

    std::vector<CoeffAtom> atoms_;
};

// ---------------------------------------------------------------------------
// Classical phase-space polynomial in commuting variables q_k, p_k.

struct PhaseMonomial {
    std::vector<int> qpow, ppow; // per mode
    bool operator<(const PhaseMonomial& o) const {
        return std::tie(qpow, ppow) < std::tie(o.qpow, o.ppow);
    }
    int degree() const {
        int d = 0;
        for (std::size_t k = 0; k < qpow.size(); ++k) d += qpow[k] + ppow[k];
        return d;
    }
};

class PhasePolynomial {
  public:
    explicit PhasePolynomial(int modes = 1) : modes_(modes) {
        if (modes < 1) throw DomainError("PhasePolynomial: at least one mode");
    }

    static PhasePolynomial constant(Coefficient c, int modes = 1) {
        PhasePolynomial f(modes);
        PhaseMonomial m{std::vector<int>(modes, 0), std::vector<int>(modes, 0)};
        if (!c.is_zero()) f.terms_[m] = std::move(c);
        return f;
    }

    static PhasePolynomial variable_q(int mode = 0, int modes = 1) {
        PhasePolynomial f(modes);
        PhaseMonomial m{std::vector<int>(modes, 0), std::vector<int>(modes, 0)};
        m.qpow[mode] = 1;
        f.terms_[m] = Coefficient::integer(1, modes);
        return f;
    }

    static PhasePolynomial variable_p(int mode = 0, int modes = 1) {
        PhasePolynomial f(modes);
        PhaseMonomial m{std::vector<int>(modes, 0), std::vector<int>(modes, 0)};
        m.ppow[mode] = 1;
        f.terms_[m] = Coefficient::integer(1, modes);
        return f;
    }

    int modes() const { return modes_; }
    const std::map<PhaseMonomial, Coefficient>& terms() const { return terms_; }

    int degree() const {
        int d = 0;
        for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
        return d;
    }

    PhasePolynomial operator+(const PhasePolynomial& o) const {
        check(o);
        PhasePolynomial out = *this;
        for (const auto& [m, c] : o.terms_) out.add_term(m, c);
        return out;
    }

    PhasePolynomial operator-(const PhasePolynomial& o) const { return *this + (-o); }

    PhasePolynomial operator-() const {
        PhasePolynomial out(modes_);
        for (const auto& [m, c] : terms_) out.terms_[m] = -c;
        return out;
    }

    PhasePolynomial operator*(const PhasePolynomial& o) const {
        check(o);
        PhasePolynomial out(modes_);
        for (const auto& [ma, ca] : terms_)
            for (const auto& [mb, cb] : o.terms_) {
                PhaseMonomial m = ma;
                for (int k = 0; k < modes_; ++k) {
                    m.qpow[k] += mb.qpow[k];
                    m.ppow[k] += mb.ppow[k];
                }
                out.add_term(m, ca * cb);
            }
        return out;
    }

    PhasePolynomial scaled(const Coefficient& c) const {
        PhasePolynomial out(modes_);
        for (const auto& [m, t] : terms_) out.add_term(m, t * c);
        return out;
    }

    PhasePolynomial pow(int n) const {
        PhasePolynomial out = constant(Coefficient::integer(1, modes_), modes_);
        for (int j = 0; j < n; ++j) out = out * (*this);
        return out;
    }

    Complex evaluate(const ModeSpace& space, const std::vector<double>& qs,
                     const std::vector<double>& ps) const {
        Complex v = 0.0;
        for (const auto& [m, c] : terms_) {
            Complex t = c.value(space);
            for (int k = 0; k < modes_; ++k)
                t *= std::pow(qs[k], m.qpow[k]) * std::pow(ps[k], m.ppow[k]);
            v += t;
        }
        return v;
    }

    void add_term(const PhaseMonomial& m, const Coefficient& c) {
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            if (!c.is_zero()) terms_[m] = c;
        } else {
            it->second = it->second + c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

  private:
    void check(const PhasePolynomial& o) const {
        if (o.modes_ != modes_) throw DomainError("PhasePolynomial: mode count mismatch");
    }
    int modes_;
    std::map<PhaseMonomial, Coefficient> terms_;
};

// ---------------------------------------------------------------------------
// Ladder-operator polynomial: sums of ordered words in a_k, a_k^dag.

enum class OrderTag { Arbitrary, Normal, Antinormal, Symmetric };

struct LadderOp {
    int mode = 0;
    bool dagger = false;
    auto operator<=>(const LadderOp&) const = default;
};

using LadderWord = std::vector<LadderOp>; // identity = empty word

inline bool word_is_antinormal(const LadderWord& w, int modes) {
    std::vector<bool> seen_dagger(modes, false);
    for (const auto& op : w) {
        if (op.dagger) seen_dagger[op.mode] = true;
        else if (seen_dagger[op.mode]) return false;
    }
    return true;
}

class LadderPolynomial {
  public:
    explicit LadderPolynomial(int modes = 1, OrderTag tag = OrderTag::Arbitrary)
        : modes_(modes), tag_(tag) {
        if (modes < 1) throw DomainError("LadderPolynomial: at least one mode");
    }

    static LadderPolynomial identity(int modes = 1) {
        LadderPolynomial f(modes);
        f.terms_[LadderWord{}] = Coefficient::integer(1, modes);
        return f;
    }

    static LadderPolynomial single(LadderOp op, int modes = 1) {
        LadderPolynomial f(modes);
        f.terms_[LadderWord{op}] = Coefficient::integer(1, modes);
        return f;
    }

    int modes() const { return modes_; }
    OrderTag tag() const { return tag_; }
    const std::map<LadderWord, Coefficient>& terms() const { return terms_; }

    int degree() const {
        std::size_t d = 0;
        for (const auto& [w, c] : terms_) d = std::max(d, w.size());
        return static_cast<int>(d);
    }

    LadderPolynomial operator+(const LadderPolynomial& o) const {
        check(o);
        LadderPolynomial out = *this;
        out.tag_ = OrderTag::Arbitrary;
        for (const auto& [w, c] : o.terms_) out.add_term(w, c);
        out.refresh_tag();
        return out;
    }

    LadderPolynomial operator-(const LadderPolynomial& o) const {
        LadderPolynomial neg = o;
        for (auto& [w, c] : neg.terms_) c = -c;
        return *this + neg;
    }

    LadderPolynomial operator*(const LadderPolynomial& o) const {
        check(o);
        LadderPolynomial out(modes_);
        for (const auto& [wa, ca] : terms_)
            for (const auto& [wb, cb] : o.terms_) {
                LadderWord w = wa;
                w.insert(w.end(), wb.begin(), wb.end());
                out.add_term(w, ca * cb);
            }
        return out;
    }

    LadderPolynomial scaled(const Coefficient& c) const {
        LadderPolynomial out(modes_, tag_);
        for (const auto& [w, t] : terms_) out.add_term(w, t * c);
        return out;
    }

    void add_term(const LadderWord& w, const Coefficient& c) {
        auto it = terms_.find(w);
        if (it == terms_.end()) {
            if (!c.is_zero()) terms_[w] = c;
        } else {
            it->second = it->second + c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    void set_tag(OrderTag tag) {
        if (tag == OrderTag::Antinormal) {
            for (const auto& [w, c] : terms_)
                if (!word_is_antinormal(w, modes_))
                    throw OrderingError("LadderPolynomial: word is not anti-normal");
        }
        tag_ = tag;
    }

  private:
    void check(const LadderPolynomial& o) const {
        if (o.modes_ != modes_) throw DomainError("LadderPolynomial: mode count mismatch");
    }
    void refresh_tag() {
        for (const auto& [w, c] : terms_)
            if (!word_is_antinormal(w, modes_)) { tag_ = OrderTag::Arbitrary; return; }
        if (tag_ == OrderTag::Arbitrary) tag_ = OrderTag::Antinormal;
    }

    int modes_;
    OrderTag tag_;
    std::map<LadderWord, Coefficient> terms_;
};

/// alpha_k = sqrt(m w / 2 hbar) q_k + i p_k / sqrt(2 hbar m w), as an exact
/// classical polynomial; alpha^j (alpha*)^k products feed the moment bridge.
inline PhasePolynomial alpha_of_mode(int mode, int modes, bool conjugate = false) {
    Coefficient cq = Coefficient::units(ComplexRational::integer(1), -1, -1, mode, 1, 1, modes);
    ComplexRational ip = conjugate ? -ComplexRational::i_unit() : ComplexRational::i_unit();
    Coefficient cp = Coefficient::units(ip, -1, -1, mode, -1, -1, modes);
    return PhasePolynomial::variable_q(mode, modes).scaled(cq) +
           PhasePolynomial::variable_p(mode, modes).scaled(cp);
}

inline PhasePolynomial alpha_monomial(int j, int k, int mode = 0, int modes = 1) {
    return alpha_of_mode(mode, modes, false).pow(j) * alpha_of_mode(mode, modes, true).pow(k);
}

// ---------------------------------------------------------------------------
// Text syntax shared by the CLI: terms like "2.0*q^2*p" or "1*a'*a"
// (apostrophe = dagger), case-sensitive, whitespace-insensitive.

namespace detail {

struct PolyToken {
    enum Kind { Number, Symbol, Caret, Star, Plus, Minus, End } kind;
    ComplexRational number;
    char symbol = 0;   // 'q','p','a','A' (A = a-dagger), 'i'
    int position = 0;
};

inline ComplexRational parse_decimal(const std::string& digits, int pos) {
    auto dot = digits.find('.');
    std::string intpart = (dot == std::string::npos) ? digits : digits.substr(0, dot);
    std::string frac = (dot == std::string::npos) ? "" : digits.substr(dot + 1);
    if (intpart.empty() && frac.empty())
        throw ParseError("polynomial: bad number at position " + std::to_string(pos));
    if (intpart.size() + frac.size() > 15)
        throw ParseError("polynomial: number too long at position " + std::to_string(pos));
    long long num = 0;
    for (char ch : intpart + frac) {
        if (!std::isdigit(static_cast<unsigned char>(ch)))
            throw ParseError("polynomial: bad digit at position " + std::to_string(pos));
        num = num * 10 + (ch - '0');
    }
    long long den = 1;
    for (std::size_t j = 0; j < frac.size(); ++j) den *= 10;
    return ComplexRational(Rational(num, den));
}

inline std::vector<PolyToken> tokenize_polynomial(const std::string& text) {
    std::vector<PolyToken> out;
    std::size_t i = 0;
    while (i < text.size()) {
        char ch = text[i];
        if (std::isspace(static_cast<unsigned char>(ch))) { ++i; continue; }
        PolyToken t;
        t.position = static_cast<int>(i);
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
            std::size_t j = i;
            while (j < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.'))
                ++j;
            t.kind = PolyToken::Number;
            t.number = parse_decimal(text.substr(i, j - i), static_cast<int>(i));
            i = j;
        } else if (ch == 'q' || ch == 'p' || ch == 'i') {
            t.kind = PolyToken::Symbol;
            t.symbol = ch;
            ++i;
        } else if (ch == 'a') {
            t.kind = PolyToken::Symbol;
            if (i + 1 < text.size() && text[i + 1] == '\'') { t.symbol = 'A'; i += 2; }
            else { t.symbol = 'a'; ++i; }
        } else if (ch == '^') { t.kind = PolyToken::Caret; ++i; }
        else if (ch == '*') { t.kind = PolyToken::Star; ++i; }
        else if (ch == '+') { t.kind = PolyToken::Plus; ++i; }
        else if (ch == '-') { t.kind = PolyToken::Minus; ++i; }
        else throw ParseError("polynomial: unexpected character '" + std::string(1, ch) +
                              "' at position " + std::to_string(i));
        out.push_back(std::move(t));
    }
    out.push_back({PolyToken::End, {}, 0, static_cast<int>(text.size())});
    return out;
}

struct ParsedTerm {
    ComplexRational coeff = ComplexRational::integer(1);
    std::vector<std::pair<char, int>> factors; // (symbol, power)
};

inline std::vector<ParsedTerm> parse_terms(const std::string& text) {
    auto toks = tokenize_polynomial(text);
    std::vector<ParsedTerm> terms;
    std::size_t i = 0;
    bool first = true;
    while (toks[i].kind != PolyToken::End) {
        ComplexRational sign = ComplexRational::integer(1);
        if (toks[i].kind == PolyToken::Plus) { ++i; }
        else if (toks[i].kind == PolyToken::Minus) { sign = ComplexRational::integer(-1); ++i; }
        else if (!first)
            throw ParseError("polynomial: expected '+' or '-' at position " +
                             std::to_string(toks[i].position));
        first = false;
        ParsedTerm term;
        term.coeff = sign;
        bool want_factor = true;
        while (want_factor) {
            const PolyToken& t = toks[i];
            if (t.kind == PolyToken::Number) {
                term.coeff = term.coeff * t.number;
                ++i;
            } else if (t.kind == PolyToken::Symbol) {
                if (t.symbol == 'i') {
                    term.coeff = term.coeff * ComplexRational::i_unit();
                    ++i;
                } else {
                    char sym = t.symbol;
                    ++i;
                    int power = 1;
                    if (toks[i].kind == PolyToken::Caret) {
                        ++i;
                        if (toks[i].kind != PolyToken::Number || toks[i].number.im != Rational(0) ||
                            toks[i].number.re.denominator() != 1)
                            throw ParseError("polynomial: integer exponent expected at position " +
                                             std::to_string(toks[i].position));
                        power = static_cast<int>(toks[i].number.re.numerator());
                        if (power < 0) throw ParseError("polynomial: negative exponent");
                        ++i;
                    }
                    term.factors.emplace_back(sym, power);
                }
            } else {
                throw ParseError("polynomial: expected a factor at position " +
                                 std::to_string(t.position));
            }
            if (toks[i].kind == PolyToken::Star) { ++i; want_factor = true; }
            else want_factor = false;
        }
        terms.push_back(std::move(term));
    }
    if (terms.empty()) throw ParseError("polynomial: empty input");
    return terms;
}

} // namespace detail

inline PhasePolynomial parse_phase_polynomial(const std::string& text, int modes = 1) {
    PhasePolynomial out(modes);
    for (const auto& term : detail::parse_terms(text)) {
        PhasePolynomial t = PhasePolynomial::constant(Coefficient::rational(term.coeff, modes), modes);
        for (const auto& [sym, power] : term.factors) {
            if (sym == 'a' || sym == 'A')
                throw ParseError("polynomial: ladder symbols not allowed in a phase-space polynomial");
            PhasePolynomial v = (sym == 'q') ? PhasePolynomial::variable_q(0, modes)
                                             : PhasePolynomial::variable_p(0, modes);
            t = t * v.pow(power);
        }
        out = out + t;
    }
    return out;
}

inline LadderPolynomial parse_ladder_polynomial(const std::string& text, int modes = 1) {
    LadderPolynomial out(modes);
    for (const auto& term : detail::parse_terms(text)) {
        LadderWord w;
        for (const auto& [sym, power] : term.factors) {
            if (sym == 'q' || sym == 'p')
                throw ParseError("polynomial: q/p not allowed in a ladder polynomial");
            for (int j = 0; j < power; ++j) w.push_back({0, sym == 'A'});
        }
        out.add_term(w, Coefficient::rational(term.coeff, modes));
    }
    return out;
}

} // namespace qphase
