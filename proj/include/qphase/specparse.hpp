#pragma once

#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qphase/fock.hpp"
#include "qphase/ordering.hpp"
#include "qphase/polynomial.hpp"

namespace qphase {

// Mini-languages used on the command line:
//   state:       fock 1 | coherent 1+0.5i | superpose 0.6 fock 0 + 0.8 fock 1
//                | mixture 0.5 (fock 0) + 0.5 (fock 1)
//   hamiltonian: harmonic | kerr chi=0.5 | poly <ladder polynomial>

/// "1", "-0.5", "1+2i", "0.3-0.7i", "i", "-i", "2i"
inline Complex parse_complex(const std::string& text) {
    const std::string s = [&] {
        std::string t;
        for (char c : text)
            if (!std::isspace(static_cast<unsigned char>(c))) t += c;
        return t;
    }();
    if (s.empty()) throw ParseError("complex: empty literal");
    // split at the last +/- that is neither the leading sign nor an exponent sign
    std::size_t split = std::string::npos;
    for (std::size_t i = 1; i < s.size(); ++i)
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') split = i;
    auto parse_part = [&](std::string part, bool imag_required) -> double {
        bool imag = false;
        if (!part.empty() && part.back() == 'i') {
            imag = true;
            part.pop_back();
            if (part.empty() || part == "+") part = "1";
            else if (part == "-") part = "-1";
        }
        if (imag != imag_required) throw ParseError("complex: malformed literal '" + text + "'");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &used);
        } catch (const std::exception&) {
            throw ParseError("complex: malformed literal '" + text + "'");
        }
        if (used != part.size()) throw ParseError("complex: malformed literal '" + text + "'");
        return v;
    };
    if (split == std::string::npos) {
        if (s.back() == 'i') return {0.0, parse_part(s, true)};
        return {parse_part(s, false), 0.0};
    }
    if (s.back() != 'i') throw ParseError("complex: malformed literal '" + text + "'");
    return {parse_part(s.substr(0, split), false), parse_part(s.substr(split), true)};
}

struct ParsedState {
    std::optional<StateVector> pure; // present unless the spec was a mixture
    DensityOperator rho;
};

namespace detail {

// Whitespace-delimited tokens; parentheses split off on their own. A '+'
// only separates terms when it stands alone, so complex literals like 1+0.5i
// survive intact.
inline std::vector<std::string> split_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) { out.push_back(cur); cur.clear(); }
        } else if (c == '(' || c == ')') {
            if (!cur.empty()) { out.push_back(cur); cur.clear(); }
            out.emplace_back(1, c);
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

struct TokenCursor {
    const std::vector<std::string>& toks;
    std::size_t i = 0;
    bool done() const { return i >= toks.size(); }
    const std::string& peek() const {
        static const std::string end = "<end>";
        return done() ? end : toks[i];
    }
    std::string next() {
        if (done()) throw ParseError("state: unexpected end of input");
        return toks[i++];
    }
    void expect(const std::string& t) {
        if (next() != t) throw ParseError("state: expected '" + t + "'");
    }
};

inline StateVector parse_atom(const ModeSpace& space, TokenCursor& cur) {
    const std::string kind = cur.next();
    if (kind == "fock") {
        int n = 0;
        try {
            n = std::stoi(cur.next());
        } catch (const std::exception&) {
            throw ParseError("state: fock level must be an integer");
        }
        return number_state(space, n);
    }
    if (kind == "coherent") return coherent_state(space, parse_complex(cur.next()));
    throw ParseError("state: unknown atom '" + kind + "'");
}

inline StateVector parse_pure(const ModeSpace& space, TokenCursor& cur) {
    if (cur.peek() == "superpose") {
        cur.next();
        Vector acc = Vector::Zero(space.dim());
        while (true) {
            const Complex c = parse_complex(cur.next());
            acc += c * parse_atom(space, cur).amplitudes;
            if (cur.peek() == "+") cur.next();
            else break;
        }
        const double norm = acc.norm();
        if (norm < 1e-12) throw ParseError("state: superposition has zero norm");
        return StateVector(space, acc / norm);
    }
    return parse_atom(space, cur);
}

} // namespace detail

inline ParsedState parse_state(const ModeSpace& space, const std::string& text) {
    auto toks = detail::split_tokens(text);
    detail::TokenCursor cur{toks};
    if (cur.peek() == "mixture") {
        cur.next();
        Matrix acc = Matrix::Zero(space.dim(), space.dim());
        double total = 0.0;
        while (true) {
            double w = 0.0;
            try {
                w = std::stod(cur.next());
            } catch (const std::exception&) {
                throw ParseError("state: mixture weight must be a real number");
            }
            if (w < 0.0) throw ParseError("state: mixture weights must be nonnegative");
            cur.expect("(");
            StateVector s = detail::parse_pure(space, cur);
            cur.expect(")");
            acc += w * (s.amplitudes * s.amplitudes.adjoint());
            total += w;
            if (cur.peek() == "+") cur.next();
            else break;
        }
        if (!cur.done()) throw ParseError("state: trailing input '" + cur.peek() + "'");
        if (total <= 0.0) throw ParseError("state: mixture weights sum to zero");
        return {std::nullopt, DensityOperator(space, acc / total)};
    }
    StateVector s = detail::parse_pure(space, cur);
    if (!cur.done()) throw ParseError("state: trailing input '" + cur.peek() + "'");
    DensityOperator rho = pure_density(s);
    return {std::move(s), std::move(rho)};
}

inline OperatorMatrix parse_hamiltonian(const ModeSpace& space, const std::string& text) {
    std::istringstream in(text);
    std::string head;
    in >> head;
    if (head == "harmonic") return harmonic_hamiltonian(space);
    if (head == "kerr") {
        std::string arg;
        in >> arg;
        if (arg.rfind("chi=", 0) != 0) throw ParseError("hamiltonian: expected kerr chi=<value>");
        double chi = 0.0;
        try {
            chi = std::stod(arg.substr(4));
        } catch (const std::exception&) {
            throw ParseError("hamiltonian: bad chi value");
        }
        return kerr_hamiltonian(space, chi);
    }
    if (head == "poly") {
        std::string rest;
        std::getline(in, rest);
        OperatorMatrix h = matrix_of(parse_ladder_polynomial(rest, space.modes()), space);
        const double herm = (h.matrix - h.matrix.adjoint()).cwiseAbs().maxCoeff();
        if (herm > kHermitianTol)
            throw ParseError("hamiltonian: polynomial is not Hermitian (deviation " +
                             std::to_string(herm) + ")");
        h.label = "H_poly";
        return h;
    }
    throw ParseError("hamiltonian: unknown form '" + head + "'");
}

} // namespace qphase
