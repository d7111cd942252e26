#include "motint/motive.hpp"

#include "motint/pas.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <numeric>
#include <sstream>

namespace motint {

// ---- QPoly ----

QPoly::QPoly(std::vector<Rational> c) : c_(std::move(c)) {
    for (auto& x : c_) x.canonicalize();
    trim();
}

QPoly QPoly::constant(const Rational& c) { return QPoly(std::vector<Rational>{c}); }

QPoly QPoly::monomial(const Rational& c, int e) {
    std::vector<Rational> v(e + 1);
    v[e] = c;
    return QPoly(v);
}

void QPoly::trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

QPoly QPoly::operator+(const QPoly& o) const {
    std::vector<Rational> r(std::max(c_.size(), o.c_.size()));
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
    return QPoly(r);
}

QPoly QPoly::operator-() const { return scaled(-1); }
QPoly QPoly::operator-(const QPoly& o) const { return *this + (-o); }

QPoly QPoly::operator*(const QPoly& o) const {
    if (is_zero() || o.is_zero()) return QPoly();
    std::vector<Rational> r(c_.size() + o.c_.size() - 1);
    for (std::size_t i = 0; i < c_.size(); ++i)
        for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return QPoly(r);
}

QPoly QPoly::scaled(const Rational& k) const {
    std::vector<Rational> r = c_;
    for (auto& x : r) x *= k;
    return QPoly(r);
}

std::pair<QPoly, QPoly> QPoly::divmod(const QPoly& d) const {
    if (d.is_zero()) throw std::domain_error("polynomial division by zero");
    std::vector<Rational> r = c_;
    int dd = d.degree();
    if (degree() < dd) return {QPoly(), *this};
    std::vector<Rational> q(degree() - dd + 1);
    for (int i = degree(); i >= dd; --i) {
        if (r[i] == 0) continue;
        Rational f = r[i] / d.c_[dd];
        q[i - dd] = f;
        for (int j = 0; j <= dd; ++j) r[i - dd + j] -= f * d.c_[j];
    }
    return {QPoly(q), QPoly(r)};
}

Rational QPoly::eval(const Rational& x) const {
    Rational acc = 0;
    for (std::size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
    return acc;
}

std::string QPoly::str(const std::string& var) const {
    if (c_.empty()) return "0";
    std::string out;
    bool first = true;
    for (std::size_t i = c_.size(); i-- > 0;) {
        if (c_[i] == 0) continue;
        Rational a = abs(c_[i]);
        out += first ? (c_[i] < 0 ? "-" : "") : (c_[i] < 0 ? " - " : " + ");
        first = false;
        std::string mono = i == 0 ? "" : i == 1 ? var : var + "^" + std::to_string(i);
        if (i == 0) out += to_string(a);
        else if (a == 1) out += mono;
        else out += to_string(a) + (a.get_den() == 1 ? "" : " ") + mono;
    }
    return out;
}

const QPoly& cyclotomic(int d) {
    if (d < 1) throw std::invalid_argument("cyclotomic index must be >= 1");
    static std::mutex mu;
    static std::map<int, QPoly> cache;
    std::lock_guard<std::mutex> g(mu);
    std::function<const QPoly&(int)> get = [&](int n) -> const QPoly& {
        auto it = cache.find(n);
        if (it != cache.end()) return it->second;
        QPoly x = QPoly::monomial(1, n) - QPoly::constant(1);
        for (int e = 1; e < n; ++e)
            if (n % e == 0) x = x.divmod(get(e)).first;
        return cache.emplace(n, x).first->second;
    };
    return get(d);
}

// ---- MotiveElem ----

MotiveElem::MotiveElem(const Rational& c) : num_(QPoly::constant(c)) {}  // QPoly canonicalizes

MotiveElem MotiveElem::L() { return from_poly(QPoly::monomial(1, 1)); }

MotiveElem MotiveElem::from_poly(const QPoly& num) { return make(num, 0, {}); }

MotiveElem MotiveElem::inv_Lpow_minus_one(int i) {
    if (i < 1) throw std::invalid_argument("L^i - 1 needs i >= 1");
    std::map<int, int> e;
    for (int d = 1; d <= i; ++d)
        if (i % d == 0) e[d] = 1;
    return make(QPoly::constant(1), 0, e);
}

MotiveElem MotiveElem::make(const QPoly& num, int k, const std::map<int, int>& e) {
    MotiveElem r;
    r.num_ = num;
    r.k_ = k;
    r.e_ = e;
    if (r.k_ < 0) {
        r.num_ = r.num_ * QPoly::monomial(1, -r.k_);
        r.k_ = 0;
    }
    for (auto& [d, x] : r.e_)
        if (d < 1 || x < 0) throw std::invalid_argument("bad cyclotomic exponent");
    r.normalize();
    return r;
}

void MotiveElem::normalize() {
    if (num_.is_zero()) {
        k_ = 0;
        e_.clear();
        return;
    }
    while (k_ > 0 && num_.c()[0] == 0) {
        std::vector<Rational> c(num_.c().begin() + 1, num_.c().end());
        num_ = QPoly(c);
        --k_;
    }
    for (auto it = e_.begin(); it != e_.end();) {
        while (it->second > 0) {
            auto [q, r] = num_.divmod(cyclotomic(it->first));
            if (!r.is_zero()) break;
            num_ = q;
            --it->second;
        }
        it = it->second == 0 ? e_.erase(it) : std::next(it);
    }
}

static QPoly cyclo_pow(const std::map<int, int>& e) {
    QPoly r = QPoly::constant(1);
    for (auto& [d, x] : e)
        for (int i = 0; i < x; ++i) r = r * cyclotomic(d);
    return r;
}

MotiveElem MotiveElem::operator+(const MotiveElem& o) const {
    int K = std::max(k_, o.k_);
    std::map<int, int> E = e_, ea, eb;
    for (auto& [d, x] : o.e_) E[d] = std::max(E[d], x);
    for (auto& [d, x] : E) {
        auto a = e_.find(d), b = o.e_.find(d);
        ea[d] = x - (a == e_.end() ? 0 : a->second);
        eb[d] = x - (b == o.e_.end() ? 0 : b->second);
    }
    QPoly n1 = num_ * QPoly::monomial(1, K - k_) * cyclo_pow(ea);
    QPoly n2 = o.num_ * QPoly::monomial(1, K - o.k_) * cyclo_pow(eb);
    return make(n1 + n2, K, E);
}

MotiveElem MotiveElem::operator-() const {
    MotiveElem r = *this;
    r.num_ = -r.num_;
    return r;
}

MotiveElem MotiveElem::operator-(const MotiveElem& o) const { return *this + (-o); }

MotiveElem MotiveElem::operator*(const MotiveElem& o) const {
    std::map<int, int> E = e_;
    for (auto& [d, x] : o.e_) E[d] += x;
    return make(num_ * o.num_, k_ + o.k_, E);
}

MotiveElem MotiveElem::inverse() const {
    if (is_zero()) throw std::domain_error("division by zero in the localized ring");
    QPoly r = num_;
    int j = 0;
    while (r.c()[0] == 0) {
        r = QPoly(std::vector<Rational>(r.c().begin() + 1, r.c().end()));
        ++j;
    }
    std::map<int, int> f;
    int deg = r.degree();
    for (int d = 1; r.degree() > 0 && d <= 2 * deg * deg + 2; ++d) {
        while (r.degree() >= cyclotomic(d).degree()) {
            auto [q, rem] = r.divmod(cyclotomic(d));
            if (!rem.is_zero()) break;
            r = q;
            ++f[d];
        }
    }
    if (r.degree() > 0)
        throw NotInLocalizedRing("cannot invert " + num_.str("L") + ": not a product of L and L^i - 1 factors");
    Rational c = r.c()[0];
    QPoly n = QPoly::monomial(1, k_) * cyclo_pow(e_);
    return make(n.scaled(1 / c), j, f);
}

MotiveElem MotiveElem::operator/(const MotiveElem& o) const { return *this * o.inverse(); }

MotiveElem MotiveElem::pow(int e) const {
    if (e < 0) return inverse().pow(-e);
    MotiveElem r(1), b = *this;
    while (e) {
        if (e & 1) r = r * b;
        b = b * b;
        e >>= 1;
    }
    return r;
}

bool MotiveElem::operator==(const MotiveElem& o) const { return num_ == o.num_ && k_ == o.k_ && e_ == o.e_; }

std::string MotiveElem::str() const {
    if (is_zero()) return "0";
    std::map<int, int> e = e_;
    std::map<int, int> facs;
    QPoly extra = QPoly::constant(1);
    while (!e.empty()) {
        int d = e.rbegin()->first;
        for (int dd = 1; dd <= d; ++dd) {
            if (d % dd) continue;
            auto it = e.find(dd);
            if (it != e.end()) {
                if (--it->second == 0) e.erase(it);
            } else {
                extra = extra * cyclotomic(dd);
            }
        }
        ++facs[d];
    }
    QPoly N = num_ * extra;
    Integer q = 1;
    for (auto& x : N.c()) q = lcm(q, Integer(x.get_den()));
    N = N.scaled(Rational(q));
    std::vector<std::string> parts;
    if (q > 1) parts.push_back(to_string(q));
    if (k_ > 0) parts.push_back(k_ == 1 ? "L" : "L^" + std::to_string(k_));
    for (auto& [i, m] : facs) {
        std::string f = i == 1 ? "(L - 1)" : "(L^" + std::to_string(i) + " - 1)";
        if (m > 1) f += "^" + std::to_string(m);
        parts.push_back(f);
    }
    std::string ns = N.str("L");
    if (parts.empty()) return ns;
    int nz = static_cast<int>(std::count_if(N.c().begin(), N.c().end(), [](const Rational& x) { return x != 0; }));
    if (nz > 1) ns = "(" + ns + ")";
    std::string den;
    if (parts.size() == 1) {
        den = parts[0];
    } else {
        den = "(";
        for (std::size_t i = 0; i < parts.size(); ++i) den += (i ? " " : "") + parts[i];
        den += ")";
    }
    return ns + "/" + den;
}

// ---- parsing ----

namespace {

struct MParser {
    std::string s;
    std::size_t i = 0;

    void ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    [[noreturn]] void fail(const std::string& m) {
        throw ParseError(m + " in '" + s + "'", 1, static_cast<int>(i) + 1);
    }
    bool eat(char c) {
        ws();
        if (i < s.size() && s[i] == c) {
            ++i;
            return true;
        }
        return false;
    }
    bool starts_atom() {
        ws();
        return i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == 'L' || s[i] == '(');
    }
    MotiveElem expr() {
        MotiveElem a = term();
        while (true) {
            if (eat('+')) a = a + term();
            else if (eat('-')) a = a - term();
            else return a;
        }
    }
    MotiveElem term() {
        MotiveElem a = unary();
        while (true) {
            if (eat('*')) a = a * unary();
            else if (eat('/')) a = a / unary();
            else if (starts_atom()) a = a * power();
            else return a;
        }
    }
    MotiveElem unary() {
        if (eat('-')) return -unary();
        return power();
    }
    MotiveElem power() {
        MotiveElem a = atom();
        if (eat('^')) {
            ws();
            bool neg = eat('-');
            ws();
            std::size_t st = i;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            if (st == i) fail("expected exponent");
            int e = std::stoi(s.substr(st, i - st));
            a = a.pow(neg ? -e : e);
        }
        return a;
    }
    MotiveElem atom() {
        ws();
        if (i >= s.size()) fail("unexpected end");
        if (s[i] == 'L') {
            ++i;
            return MotiveElem::L();
        }
        if (eat('(')) {
            MotiveElem a = expr();
            if (!eat(')')) fail("expected ')'");
            return a;
        }
        std::size_t st = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (st == i) fail("unexpected character");
        return MotiveElem(Rational(Integer(s.substr(st, i - st))));
    }
};

}  // namespace

MotiveElem parse_motive(const std::string& text) {
    MParser p{text};
    MotiveElem e = p.expr();
    p.ws();
    if (p.i != text.size()) p.fail("unexpected trailing text");
    return e;
}

// ---- specializations ----

Rational specialize_numeric(const MotiveElem& e, std::uint32_t p) {
    if (p < 2) throw std::invalid_argument("specialization needs p >= 2");
    Rational x(p);
    Rational den = rpow(x, e.L_power());
    for (auto& [d, k] : e.cyclotomic_exponents()) den *= rpow(cyclotomic(d).eval(x), k);
    if (den == 0) throw std::logic_error("vanishing denominator at L = p");
    return e.numerator().eval(x) / den;
}

Rational specialize_euler(const MotiveElem& e) {
    auto& ex = e.cyclotomic_exponents();
    if (ex.count(1)) throw PoleAtOne("pole at L = 1: the factor L - 1 does not cancel in " + e.str());
    Rational den = 1;
    for (auto& [d, k] : ex) den *= rpow(cyclotomic(d).eval(1), k);
    return e.numerator().eval(1) / den;
}

HodgeValue specialize_hodge(const MotiveElem& e) { return HodgeValue{e}; }

Rational HodgeValue::eval(const Rational& u, const Rational& v) const {
    Rational w = u * v;
    Rational den = rpow(w, in_w.L_power());
    for (auto& [d, k] : in_w.cyclotomic_exponents()) den *= rpow(cyclotomic(d).eval(w), k);
    if (den == 0) throw std::domain_error("Hodge-Deligne value has a pole at this (u, v)");
    return in_w.numerator().eval(w) / den;
}

std::string HodgeValue::str() const {
    std::string s = in_w.str(), out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != 'L') {
            out += s[i];
        } else if (i + 1 < s.size() && s[i + 1] == '^') {
            out += "(uv)";
        } else {
            out += "uv";
        }
    }
    return out;
}

// ---- covers ----

std::vector<int> KummerCover::subgroups() const {
    std::vector<int> r;
    for (int d = 1; d <= m; ++d)
        if (m % d == 0) r.push_back(d);
    return r;
}

MotiveElem KummerCover::quotient(int order) const {
    if (order < 1 || m % order) throw std::invalid_argument(std::to_string(order) + " is not a subgroup order");
    auto it = quotients.find(order);
    if (it != quotients.end()) return it->second;
    if (order == 1) return Y;
    if (order == m) return X;
    throw MissingQuotientClass("catalog lacks the class of Y/A for |A| = " + std::to_string(order));
}

static std::string strip(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

static std::vector<std::string> split(const std::string& s, char c) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == c) {
            out.push_back(strip(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(strip(cur));
    return out;
}

std::vector<KummerCover> parse_cover_catalog(const std::string& text) {
    std::vector<KummerCover> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto h = line.find('#');
        if (h != std::string::npos) line = line.substr(0, h);
        line = strip(line);
        if (line.empty()) continue;
        std::string quot;
        auto q = line.find("quotients:");
        if (q != std::string::npos) {
            quot = line.substr(q + 10);
            line = strip(line.substr(0, q));
            while (!line.empty() && (line.back() == ',' || line.back() == ';')) line = strip(line.substr(0, line.size() - 1));
        }
        KummerCover c;
        bool has_m = false, has_f = false, has_y = false, has_x = false;
        try {
            for (auto& field : split(line, ';')) {
                if (field.empty()) continue;
                if (field.rfind("classes:", 0) == 0) {
                    for (auto& kv : split(field.substr(8), ',')) {
                        auto eq = kv.find('=');
                        if (eq == std::string::npos) throw ParseError("expected NAME=class", lineno, 1);
                        std::string k = strip(kv.substr(0, eq));
                        MotiveElem v = parse_motive(kv.substr(eq + 1));
                        if (k == "Y") c.Y = v, has_y = true;
                        else if (k == "X") c.X = v, has_x = true;
                        else throw ParseError("unknown class '" + k + "'", lineno, 1);
                    }
                    continue;
                }
                auto eq = field.find('=');
                if (eq == std::string::npos) throw ParseError("expected key=value", lineno, 1);
                std::string k = strip(field.substr(0, eq)), v = strip(field.substr(eq + 1));
                if (k == "m") {
                    c.m = std::stoi(v);
                    has_m = true;
                } else if (k == "f") {
                    c.f = parse_poly(v);
                    has_f = true;
                } else if (k == "name") {
                    c.name = v;
                } else {
                    throw ParseError("unknown key '" + k + "'", lineno, 1);
                }
            }
            if (!quot.empty())
                for (auto& kv : split(quot, ',')) {
                    auto eq = kv.find('=');
                    if (eq == std::string::npos) throw ParseError("expected ORDER=class", lineno, 1);
                    c.quotients[std::stoi(kv.substr(0, eq))] = parse_motive(kv.substr(eq + 1));
                }
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno, e.col);
        } catch (const std::invalid_argument& e) {
            throw ParseError(std::string("bad number: ") + e.what(), lineno, 1);
        }
        if (!has_m || !has_f || !has_y || !has_x) throw ParseError("record needs m, f, Y and X", lineno, 1);
        if (c.m < 2) throw ParseError("m must be >= 2", lineno, 1);
        if (c.f.is_zero()) throw ParseError("f must be nonzero", lineno, 1);
        for (auto& v : c.f.vars())
            if (v != "x") throw ParseError("f must be a polynomial in x", lineno, 1);
        for (auto& [a, _] : c.quotients)
            if (a < 1 || c.m % a) throw ParseError("quotient key " + std::to_string(a) + " does not divide m", lineno, 1);
        if (c.name.empty()) c.name = "y^" + std::to_string(c.m) + " = " + c.f.str();
        out.push_back(c);
    }
    return out;
}

std::vector<KummerCover> load_cover_catalog(const std::string& path) { return parse_cover_catalog(read_file(path)); }

static int normalizer_order(const KummerCover& cov, int) { return cov.m; }  // G is abelian

MotiveElem recursion_term(const KummerCover& cov, int order) {
    if (order < 1 || cov.m % order) throw std::invalid_argument(std::to_string(order) + " is not a subgroup order");
    MotiveElem acc = MotiveElem(Rational(order)) * cov.quotient(order);
    for (int a = 1; a < order; ++a)
        if (order % a == 0) acc = acc - MotiveElem(Rational(a)) * recursion_term(cov, a);
    return acc * MotiveElem(Rational(1, order));
}

MotiveElem chi_c_cover(const KummerCover& cov, int order) {
    return MotiveElem(Rational(order, normalizer_order(cov, order))) * recursion_term(cov, order);
}

static long f_mod(const Poly& f, long x, long p) {
    Integer acc = 0;
    for (auto& [mono, c] : f.terms()) {
        Integer t = c;
        for (auto& [v, e] : mono) {
            Integer xe;
            mpz_ui_pow_ui(xe.get_mpz_t(), static_cast<unsigned long>(x), e);
            t *= xe;
        }
        acc += t;
    }
    Integer r;
    mpz_fdiv_r_ui(r.get_mpz_t(), acc.get_mpz_t(), static_cast<unsigned long>(p));
    return r.get_si();
}

static long powmod(long b, long e, long p) {
    long r = 1 % p;
    b %= p;
    while (e) {
        if (e & 1) r = r * b % p;
        b = b * b % p;
        e >>= 1;
    }
    return r;
}

// z in F_p^* is an e-th power (e | p - 1).
static bool is_power(long z, long e, long p) { return powmod(z, (p - 1) / std::gcd(e, p - 1), p) == 1; }

bool good_prime(const KummerCover& cov, std::uint32_t p) {
    if (!is_prime(p) || p % cov.m != 1) return false;
    int deg = cov.f.degree_in("x");
    Integer lc = cov.f.coeff(deg == 0 ? Monomial{} : Monomial{{"x", deg}});
    return lc % p != 0;
}

static void require_good(const KummerCover& cov, std::uint32_t p) {
    if (!good_prime(cov, p))
        throw BadReduction("p = " + std::to_string(p) + " is not a good prime for " + cov.name +
                           " (need p prime, p = 1 mod m, p not dividing the leading coefficient)");
}

Integer decomposition_count(const KummerCover& cov, int order, std::uint32_t p) {
    if (order < 1 || cov.m % order) throw std::invalid_argument(std::to_string(order) + " is not a subgroup order");
    require_good(cov, p);
    long cnt = 0;
    for (long x = 0; x < static_cast<long>(p); ++x) {
        long v = f_mod(cov.f, x, p);
        if (v == 0) continue;
        int e = 1;
        for (int d = 1; d <= cov.m; ++d)
            if (cov.m % d == 0 && is_power(v, d, p)) e = d;
        cnt += cov.m / e == order;
    }
    return Integer(cnt);
}

RecursionCheck verify_recursion(const KummerCover& cov, int order, std::uint32_t p) {
    if (order < 1 || cov.m % order) throw std::invalid_argument(std::to_string(order) + " is not a subgroup order");
    require_good(cov, p);
    RecursionCheck r;
    r.order = order;
    r.p = p;
    const long P = p;
    // Points (x, z) of Y/A: z^{m/a} = f(x) != 0.
    auto points = [&](int a, bool full_decomposition) {
        long cnt = 0;
        for (long x = 0; x < P; ++x) {
            long v = f_mod(cov.f, x, P);
            if (v == 0) continue;
            for (long z = 1; z < P; ++z) {
                if (powmod(z, cov.m / a, P) != v) continue;
                bool ok = true;
                if (full_decomposition)
                    for (int l = 2; l <= a; ++l)
                        if (a % l == 0 && is_prime(l) && is_power(z, l, P)) ok = false;
                cnt += ok;
            }
        }
        return Integer(cnt);
    };
    r.lhs = Integer(order) * points(order, false);
    r.rhs = 0;
    for (int a = 1; a <= order; ++a)
        if (order % a == 0) r.rhs += Integer(a) * points(a, true);
    r.partition_sum = 0;
    for (int c : cov.subgroups()) r.partition_sum += decomposition_count(cov, c, p);
    long xs = 0;
    for (long x = 0; x < P; ++x) xs += f_mod(cov.f, x, P) != 0;
    r.x_points = xs;
    r.chi_value = specialize_numeric(chi_c_cover(cov, order), p);
    r.decomposition = decomposition_count(cov, order, p);
    r.ok = r.lhs == r.rhs && r.partition_sum == r.x_points && r.chi_value == Rational(r.decomposition);
    return r;
}

}  // namespace motint
