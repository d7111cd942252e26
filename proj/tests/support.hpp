#pragma once
// Independent oracles and random generators shared by the unit tests and the
// acceptance run.

#include "motint/measure.hpp"
#include "motint/motive.hpp"

#include <random>

namespace support {

using namespace motint;

// ---- brute-force oracle over Z/p^M with machine integers ----

using i128 = __int128;

struct IntPoly {
    std::vector<std::pair<long long, std::vector<int>>> terms;  // coefficient, exponents per coordinate
    IntPoly(const Poly& f, const std::vector<std::string>& vars, long long p) {
        for (auto& [m, c] : f.terms()) {
            std::vector<int> ex(vars.size(), 0);
            long long coef = c.get_si();
            for (auto& [v, e] : m) {
                if (v == kPi) {
                    for (int k = 0; k < e; ++k) coef *= p;
                    continue;
                }
                for (std::size_t i = 0; i < vars.size(); ++i)
                    if (vars[i] == v) ex[i] = e;
            }
            terms.emplace_back(coef, ex);
        }
    }
    i128 eval(const std::vector<long long>& x) const {
        i128 acc = 0;
        for (auto& [c, ex] : terms) {
            i128 t = c;
            for (std::size_t i = 0; i < ex.size(); ++i)
                for (int k = 0; k < ex[i]; ++k) t *= x[i];
            acc += t;
        }
        return acc;
    }
};

inline int vp(i128 v, long long p) {
    if (v == 0) return 1 << 20;
    int k = 0;
    while (v % p == 0) {
        v /= p;
        ++k;
    }
    return k;
}

// Classifies one jet: 1 liftable, 0 not liftable, -1 undecided within M digits.
inline int oracle_jet(const IntPoly& f, const std::vector<IntPoly>& df, long long p, int n, int M, std::vector<long long> x,
               int m, long long pm) {
    i128 v = f.eval(x);
    int u = vp(v, p);
    if (u < m) return 0;
    if (v == 0) return 1;
    int e = 1 << 20;
    for (auto& g : df) e = std::min(e, vp(g.eval(x), p));
    if (u > 2 * e && u - e >= n + 1) return 1;
    if (m == M) return -1;
    int d = static_cast<int>(x.size());
    long long total = 1;
    for (int i = 0; i < d; ++i) total *= p;
    bool undecided = false;
    for (long long t = 0; t < total; ++t) {
        std::vector<long long> y = x;
        long long r = t;
        for (int i = 0; i < d; ++i) {
            y[i] += (r % p) * pm;
            r /= p;
        }
        int c = oracle_jet(f, df, p, n, M, y, m + 1, pm * p);
        if (c == 1) return 1;
        if (c == -1) undecided = true;
    }
    return undecided ? -1 : 0;
}

// Image count of a hypersurface (or the whole space) by brute force.
inline std::pair<long long, long long> oracle_image(const AffineVariety& X, long long p, int n, int B) {
    int d = X.dim();
    long long q = 1;
    for (int i = 0; i <= n; ++i) q *= p;
    long long total = 1;
    for (int i = 0; i < d; ++i) total *= q;
    if (X.eqs.empty()) return {total, 0};
    IntPoly f(X.eqs[0], X.vars, p);
    std::vector<IntPoly> df;
    for (auto& v : X.vars) df.emplace_back(X.eqs[0].derivative(v), X.vars, p);
    long long lift = 0, undecided = 0;
    for (long long t = 0; t < total; ++t) {
        std::vector<long long> x(d);
        long long r = t;
        for (int i = 0; i < d; ++i) {
            x[i] = r % q;
            r /= q;
        }
        if (vp(f.eval(x), p) < n + 1) continue;
        int c = oracle_jet(f, df, p, n, n + 1 + B, x, n + 1, q);
        lift += c == 1;
        undecided += c == -1;
    }
    return {lift, undecided};
}

inline long long brute_jets(const AffineVariety& X, const BackendSpec& b, int n) {
    int d = X.dim();
    Integer per = residue_count(b, n + 1);
    long long q = per.get_si(), total = 1;
    for (int i = 0; i < d; ++i) total *= q;
    long long cnt = 0;
    for (long long t = 0; t < total; ++t) {
        std::map<std::string, Poly> sub;
        long long r = t;
        std::vector<Element> x;
        for (int i = 0; i < d; ++i) {
            x.push_back(Element::from_index(b, Integer(static_cast<long>(r % q))));
            r /= q;
        }
        bool ok = true;
        for (auto& f : X.eqs) {
            CPoly c(f, b, [&](const std::string& v) {
                return static_cast<int>(std::find(X.vars.begin(), X.vars.end(), v) - X.vars.begin());
            });
            auto o = c.eval(x).ord();
            if (o && *o < n + 1) ok = false;
        }
        cnt += ok;
    }
    return cnt;
}


inline std::string random_poly(std::mt19937& rng, const std::vector<std::string>& vs) {
    std::uniform_int_distribution<int> coef(-3, 3), ex(0, 2), nterms(1, 3);
    std::uniform_int_distribution<std::size_t> pick(0, vs.size() - 1);
    std::string s;
    for (int t = nterms(rng); t > 0; --t) {
        int c = coef(rng);
        if (c == 0) c = 1;
        std::string term = std::to_string(std::abs(c));
        int e = ex(rng);
        if (e > 0) term += "*" + vs[pick(rng)] + "^" + std::to_string(e);
        if (ex(rng) == 2) term += "*" + vs[pick(rng)];
        s += (s.empty() ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ")) + term;
    }
    return s;
}

inline std::string random_formula(std::mt19937& rng, std::vector<std::string> vs, int depth) {
    std::uniform_int_distribution<int> kind(0, depth > 0 ? 9 : 3), small(0, 2);
    switch (kind(rng)) {
        case 0: return random_poly(rng, vs) + " = 0";
        case 1: return "ord(" + random_poly(rng, vs) + ") <= ord(" + random_poly(rng, vs) + ") " +
                       (small(rng) == 0 ? "- 1" : "+ 1");
        case 2: return "ord(" + random_poly(rng, vs) + ") >= " + std::to_string(small(rng));
        case 3: return "ord(" + random_poly(rng, vs) + ") ~ " + std::to_string(small(rng)) + " mod 2";
        case 4: return "!(" + random_formula(rng, vs, depth - 1) + ")";
        case 5: return "(" + random_formula(rng, vs, depth - 1) + ") & (" + random_formula(rng, vs, depth - 1) + ")";
        case 6: return "(" + random_formula(rng, vs, depth - 1) + ") | (" + random_formula(rng, vs, depth - 1) + ")";
        case 7: {
            std::string z = "z" + std::to_string(depth);
            vs.push_back(z);
            return "E " + z + ":vr. " + random_formula(rng, vs, depth - 1);
        }
        case 8: {
            std::string z = "z" + std::to_string(depth);
            vs.push_back(z);
            return "A " + z + ":vr. " + random_formula(rng, vs, depth - 1);
        }
        default: {
            std::string n = "n" + std::to_string(depth);
            return "E " + n + ":vg. ord(" + random_poly(rng, vs) + ") = " + n + " & " + random_formula(rng, vs, 0);
        }
    }
}


inline std::string random_atom(std::mt19937& rng) {
    static const char* polys[] = {"x", "y", "x + y", "x - y + 1", "x*y", "x^2 + y", "x + 2*y + 3", "y^2 - x"};
    std::uniform_int_distribution<int> pick(0, 7), kind(0, 2), k(0, 2);
    std::string g = polys[pick(rng)];
    switch (kind(rng)) {
        case 0: return "ord(" + g + ") >= " + std::to_string(k(rng));
        case 1: return "ord(" + g + ") = " + std::to_string(std::min(k(rng), 1));
        default: return "!(ord(" + g + ") >= " + std::to_string(k(rng) + 1) + ")";
    }
}

inline std::string random_cylinder(std::mt19937& rng) {
    std::uniform_int_distribution<int> op(0, 2);
    std::string a = random_atom(rng), c = random_atom(rng);
    switch (op(rng)) {
        case 0: return a;
        case 1: return "(" + a + ") & (" + c + ")";
        default: return "(" + a + ") | (" + c + ")";
    }
}

/// p^{-k}
inline Rational pinv(unsigned p, int k) {
    Rational r(1, ipow(Integer(p), static_cast<unsigned long>(k)));
    r.canonicalize();
    return r;
}

// Sum over k of p^{-mk} (p^{-k} - p^{-k-1}) summed as a geometric series.
inline Rational abs_power_oracle(unsigned p, int m) {
    Rational first = 1 - pinv(p, 1);
    Rational ratio = pinv(p, m + 1);
    return first / (1 - ratio);
}

inline MotiveElem random_elem(std::mt19937& rng) {
    std::uniform_int_distribution<int> c(-4, 4), deg(0, 3), k(0, 2), ex(0, 2), den(1, 3);
    std::vector<Rational> num(deg(rng) + 1);
    for (auto& x : num) x = Rational(c(rng), den(rng));
    std::map<int, int> e;
    for (int d : {1, 2, 3, 4, 6})
        if (int x = ex(rng) - 1; x > 0) e[d] = x;
    return MotiveElem::make(QPoly(num), k(rng), e);
}

}  // namespace support
