#include "motint/series.hpp"

#include <algorithm>
#include <sstream>

namespace motint {

bool SeriesApprox::all_exact() const {
    for (std::size_t i = 0; i < size(); ++i)
        if (!exact(i)) return false;
    return true;
}

SeriesApprox poincare_coeffs(const AffineVariety& X, const BackendSpec& b, int n_max, int B, const ArcsConfig& cfg) {
    if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
    SeriesApprox s;
    s.variety = X.name;
    s.p = b.p;
    s.dim = X.dim();
    for (int n = 0; n <= n_max; ++n) {
        ImageCount c = image_count(X, b, n, B < 0 ? n + 4 : B, cfg);
        s.lo.push_back(c.lo);
        s.hi.push_back(c.hi);
    }
    return s;
}

namespace {

using RPoly = std::vector<Rational>;

RPoly mul(const RPoly& a, const RPoly& b, std::size_t cap) {
    RPoly r(std::min(cap, a.size() + b.size() - 1));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size() && i + j < r.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

RPoly denominator(const std::vector<std::pair<int, int>>& f, std::uint32_t p) {
    RPoly d{Rational(1)};
    for (auto [a, b] : f) {
        RPoly g(b + 1);
        g[0] = 1;
        g[b] = -rpow(Rational(p), a);
        d = mul(d, g, d.size() + b);
    }
    return d;
}

std::string term_str(const Rational& c, int e, const std::string& var, bool first) {
    std::string out;
    Rational a = abs(c);
    if (first) out = c < 0 ? "-" : "";
    else out = c < 0 ? " - " : " + ";
    std::string mono = e == 0 ? "" : e == 1 ? var : var + "^" + std::to_string(e);
    if (e == 0) out += to_string(a);
    else if (a == 1) out += mono;
    else out += to_string(a) + (a.get_den() == 1 ? "" : " ") + mono;
    return out;
}

std::string poly_str(const RPoly& c, const std::string& var) {
    std::string out;
    bool first = true;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] == 0) continue;
        out += term_str(c[i], static_cast<int>(i), var, first);
        first = false;
    }
    return first ? "0" : out;
}

}  // namespace

std::vector<Rational> RationalFit::expand(std::size_t len) const {
    RPoly d = denominator(factors, p);
    std::vector<Rational> s(len);
    for (std::size_t n = 0; n < len; ++n) {
        Rational acc = n < numerator.size() ? numerator[n] : Rational(0);
        for (std::size_t k = 1; k < d.size() && k <= n; ++k) acc -= d[k] * s[n - k];
        s[n] = acc;  // d[0] == 1
    }
    return s;
}

std::string RationalFit::str() const {
    std::string num = poly_str(numerator, "T");
    std::size_t nz = std::count_if(numerator.begin(), numerator.end(), [](const Rational& q) { return q != 0; });
    if (factors.empty()) return num;
    if (nz > 1) num = "(" + num + ")";
    std::string den;
    for (auto [a, b] : factors) den += "(1 - " + (a == 0 ? "" : to_string(rpow(Rational(p), a)) + (a < 0 ? " " : "")) +
                                      (b == 1 ? "T" : "T^" + std::to_string(b)) + ")";
    if (factors.size() > 1) den = "(" + den + ")";
    return num + "/" + den;
}

RationalFit fit_rational(const SeriesApprox& s, FitGrid grid) {
    if (!s.all_exact())
        throw IntervalCoefficientsPresent("series has interval coefficients; fitting needs exact values");
    return fit_rational(s.lo, s.p, s.dim, grid);
}

RationalFit fit_rational(const std::vector<Integer>& coeffs, std::uint32_t p, int dim, FitGrid grid) {
    if (grid.min_a == 0 && grid.max_a == 0) {
        grid.min_a = -dim;
        grid.max_a = 2 * dim;
    }
    const std::size_t L = coeffs.size();
    if (L < static_cast<std::size_t>(grid.min_holdouts) + 1)
        throw std::invalid_argument("too few coefficients to fit with holdouts");
    RPoly S(coeffs.begin(), coeffs.end());
    std::vector<std::pair<int, int>> single;
    for (int a = grid.min_a; a <= grid.max_a; ++a)
        for (int b = 1; b <= grid.max_b; ++b) single.emplace_back(a, b);
    std::sort(single.begin(), single.end());
    for (int k = 0; k <= grid.max_factors; ++k) {
        std::vector<std::pair<int, std::vector<std::pair<int, int>>>> cands;
        std::vector<std::size_t> idx(k, 0);
        std::function<void(int, std::size_t)> rec = [&](int pos, std::size_t start) {
            if (pos == k) {
                std::vector<std::pair<int, int>> f;
                int deg = 0;
                for (auto i : idx) {
                    f.push_back(single[i]);
                    deg += single[i].second;
                }
                cands.emplace_back(deg, f);
                return;
            }
            for (std::size_t i = start; i < single.size(); ++i) {
                idx[pos] = i;
                rec(pos + 1, i);
            }
        };
        rec(0, 0);
        std::sort(cands.begin(), cands.end());
        for (auto& [deg, f] : cands) {
            RPoly P = mul(denominator(f, p), S, L);
            int last = -1;
            for (std::size_t i = 0; i < L; ++i)
                if (P[i] != 0) last = static_cast<int>(i);
            int hold = static_cast<int>(L) - 1 - last;
            if (hold < grid.min_holdouts) continue;
            RationalFit r;
            r.p = p;
            r.numerator.assign(P.begin(), P.begin() + (last + 1));
            r.factors = f;
            r.fitted = last + 1;
            r.holdouts = hold;
            auto e = r.expand(L);
            r.holdout_ok = std::equal(e.begin(), e.end(), S.begin());
            if (r.holdout_ok) return r;
        }
    }
    throw NoFitInGrid("no denominator in the grid reproduces the coefficients");
}

// ---- cross-prime interpolation ----

std::string poly_in_p_str(const std::vector<Rational>& c) {
    RPoly rev;
    std::string out;
    bool first = true;
    for (std::size_t i = c.size(); i-- > 0;) {
        if (c[i] == 0) continue;
        out += term_str(c[i], static_cast<int>(i), "p", first);
        first = false;
    }
    return first ? "0" : out;
}

std::string CrossPrimeFit::poly_str() const { return poly_in_p_str(poly); }

static Rational eval_p(const std::vector<Rational>& c, std::uint32_t p) {
    Rational acc = 0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * p + c[i];
    return acc;
}

CrossPrimeFit cross_prime_interpolate(const std::vector<std::pair<std::uint32_t, Integer>>& fit,
                                      const std::vector<std::pair<std::uint32_t, Integer>>& holdout, int max_exp) {
    if (fit.empty()) throw InsufficientPrimes("need at least one fitting prime");
    if (holdout.empty()) throw InsufficientPrimes("need at least one holdout prime");
    CrossPrimeFit out;
    const int E = max_exp;
    for (std::size_t k = 1; k <= fit.size() && out.poly.empty(); ++k) {
        std::vector<std::vector<int>> supports;
        std::vector<int> cur;
        std::function<void(int)> rec = [&](int start) {
            if (cur.size() == k) {
                supports.push_back(cur);
                return;
            }
            for (int e = start; e <= E; ++e) {
                cur.push_back(e);
                rec(e + 1);
                cur.pop_back();
            }
        };
        rec(0);
        std::stable_sort(supports.begin(), supports.end(),
                         [](const std::vector<int>& a, const std::vector<int>& b) { return a.back() < b.back(); });
        for (auto& sup : supports) {
            std::vector<std::vector<Rational>> A(k, std::vector<Rational>(k));
            std::vector<Rational> rhs(k);
            for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t j = 0; j < k; ++j) A[i][j] = ipow(Integer(fit[i].first), sup[j]);
                rhs[i] = fit[i].second;
            }
            auto x = solve_linear(A, rhs);
            if (!x) continue;
            std::vector<Rational> poly(sup.back() + 1);
            for (std::size_t j = 0; j < k; ++j) poly[sup[j]] = (*x)[j];
            bool ok = true;
            for (auto& [p, v] : fit)
                if (eval_p(poly, p) != v) ok = false;
            if (ok) {
                out.poly = poly;
                break;
            }
        }
    }
    bool all = !out.poly.empty();
    for (auto& [p, v] : fit) {
        Rational pr = out.poly.empty() ? Rational(0) : eval_p(out.poly, p);
        out.fit.push_back({p, v, pr, pr == v});
    }
    for (auto& [p, v] : holdout) {
        Rational pr = out.poly.empty() ? Rational(0) : eval_p(out.poly, p);
        out.holdout.push_back({p, v, pr, pr == v});
        all = all && pr == v;
    }
    out.status = all ? CrossPrimeFit::Status::POLYNOMIAL : CrossPrimeFit::Status::NON_POLYNOMIAL;
    return out;
}

CrossPrimeFit cross_prime_fit(const AffineVariety& X, int n, const std::vector<std::uint32_t>& fit_primes,
                              const std::vector<std::uint32_t>& holdout_primes,
                              std::optional<std::pair<std::uint32_t, std::uint32_t>> residue_class, int B,
                              const ArcsConfig& cfg) {
    if (fit_primes.empty()) throw InsufficientPrimes("need at least one fitting prime");
    if (holdout_primes.empty()) throw InsufficientPrimes("need at least one holdout prime");
    auto value = [&](std::uint32_t p) {
        if (!is_prime(p)) throw std::invalid_argument(std::to_string(p) + " is not prime");
        if (residue_class && p % residue_class->first != residue_class->second % residue_class->first)
            throw std::invalid_argument("prime " + std::to_string(p) + " is outside the residue class");
        ImageCount c = image_count(X, BackendSpec::padic(p), n, B < 0 ? n + 4 : B, cfg);
        if (!c.exact())
            throw IntervalCoefficientsPresent("N_{" + std::to_string(p) + "," + std::to_string(n) + "} is not exact");
        return std::make_pair(p, c.lo);
    };
    std::vector<std::pair<std::uint32_t, Integer>> f, h;
    for (auto p : fit_primes) f.push_back(value(p));
    for (auto p : holdout_primes) h.push_back(value(p));
    return cross_prime_interpolate(f, h, X.dim() * (n + 1));
}

// ---- reports ----

nlohmann::ordered_json series_json(const SeriesApprox& s, const std::optional<RationalFit>& fit) {
    nlohmann::ordered_json j;
    j["variety"] = s.variety;
    j["prime"] = s.p;
    auto coeffs = nlohmann::ordered_json::array();
    auto stats = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        coeffs.push_back(s.exact(i) ? to_string(s.lo[i]) : "[" + to_string(s.lo[i]) + "," + to_string(s.hi[i]) + "]");
        stats.push_back(s.exact(i) ? "EXACT" : "PARTIAL");
    }
    j["coefficients"] = coeffs;
    j["statuses"] = stats;
    if (fit) {
        nlohmann::ordered_json f;
        auto num = nlohmann::ordered_json::array();
        for (auto& q : fit->numerator) num.push_back(to_string(q));
        f["numerator"] = num;
        auto fac = nlohmann::ordered_json::array();
        for (auto [a, b] : fit->factors) fac.push_back({a, b});
        f["factors"] = fac;
        f["fitted"] = fit->fitted;
        f["holdouts"] = fit->holdouts;
        f["holdout_ok"] = fit->holdout_ok;
        f["rendered"] = fit->str();
        j["fit"] = f;
    } else {
        j["fit"] = nullptr;
    }
    return j;
}

std::string series_csv(const SeriesApprox& s) {
    std::ostringstream o;
    o << "n,lo,hi,status\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        o << i << "," << s.lo[i] << "," << s.hi[i] << "," << (s.exact(i) ? "EXACT" : "PARTIAL") << "\n";
    return o.str();
}

}  // namespace motint
