#include "motint/poly.hpp"

#include <algorithm>

namespace motint {

static Monomial mono_mul(const Monomial& a, const Monomial& b) {
    std::map<std::string, int> m;
    for (auto& [v, e] : a) m[v] += e;
    for (auto& [v, e] : b) m[v] += e;
    return Monomial(m.begin(), m.end());
}

static int mono_deg(const Monomial& m) {
    int d = 0;
    for (auto& t : m) d += t.second;
    return d;
}

void Poly::add_term(const Monomial& m, const Integer& c) {
    if (c == 0) return;
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(m, c);
        return;
    }
    it->second += c;
    if (it->second == 0) terms_.erase(it);
}

Poly Poly::constant(const Integer& c) {
    Poly r;
    r.add_term({}, c);
    return r;
}

Poly Poly::var(const std::string& name) {
    Poly r;
    r.add_term({{name, 1}}, 1);
    return r;
}

Poly Poly::operator+(const Poly& o) const {
    Poly r = *this;
    for (auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
}

Poly Poly::operator-() const {
    Poly r;
    for (auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Poly& o) const {
    Poly r;
    for (auto& [m1, c1] : terms_)
        for (auto& [m2, c2] : o.terms_) r.add_term(mono_mul(m1, m2), c1 * c2);
    return r;
}

Poly Poly::pow(unsigned e) const {
    Poly r = constant(1), b = *this;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

bool Poly::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty()); }

Integer Poly::constant_term() const { return coeff({}); }

Integer Poly::coeff(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Integer(0) : it->second;
}

int Poly::total_degree() const {
    int d = 0;
    for (auto& t : terms_) d = std::max(d, mono_deg(t.first));
    return d;
}

int Poly::degree_in(const std::string& v) const {
    int d = 0;
    for (auto& t : terms_)
        for (auto& [n, e] : t.first)
            if (n == v) d = std::max(d, e);
    return d;
}

std::set<std::string> Poly::vars() const {
    std::set<std::string> s;
    for (auto& t : terms_)
        for (auto& ve : t.first) s.insert(ve.first);
    return s;
}

Poly Poly::derivative(const std::string& v) const {
    Poly r;
    for (auto& [m, c] : terms_) {
        Monomial nm;
        int e = 0;
        for (auto& [n, k] : m) {
            if (n == v) {
                e = k;
                if (k > 1) nm.emplace_back(n, k - 1);
            } else {
                nm.emplace_back(n, k);
            }
        }
        if (e) r.add_term(nm, c * e);
    }
    return r;
}

Poly Poly::substitute(const std::map<std::string, Poly>& s) const {
    Poly r;
    for (auto& [m, c] : terms_) {
        Poly t = constant(c);
        for (auto& [n, e] : m) {
            auto it = s.find(n);
            t = t * (it == s.end() ? var(n).pow(e) : it->second.pow(e));
        }
        r = r + t;
    }
    return r;
}

std::string Poly::str() const {
    if (terms_.empty()) return "0";
    std::vector<std::pair<Monomial, Integer>> ts(terms_.begin(), terms_.end());
    std::stable_sort(ts.begin(), ts.end(),
                     [](auto& a, auto& b) { return mono_deg(a.first) > mono_deg(b.first); });
    std::string out;
    bool first = true;
    for (auto& [m, c] : ts) {
        Integer a = abs(c);
        if (first)
            out += c < 0 ? "-" : "";
        else
            out += c < 0 ? " - " : " + ";
        first = false;
        std::string mono;
        for (auto& [n, e] : m) {
            if (!mono.empty()) mono += "*";
            mono += n;
            if (e > 1) mono += "^" + std::to_string(e);
        }
        if (mono.empty())
            out += a.get_str();
        else if (a == 1)
            out += mono;
        else
            out += a.get_str() + "*" + mono;
    }
    return out;
}

CPoly::CPoly(const Poly& f, const BackendSpec& b, const std::function<int(const std::string&)>& slot_of)
    : backend_(b) {
    Element pi = Element::pi(b);
    std::map<std::vector<std::pair<int, int>>, Element> acc;
    for (auto& [m, c] : f.terms()) {
        Element coef = Element::integer(b, c);
        std::vector<std::pair<int, int>> pw;
        for (auto& [n, e] : m) {
            if (n == kPi)
                for (int i = 0; i < e; ++i) coef = coef * pi;
            else
                pw.emplace_back(slot_of(n), e);
        }
        std::sort(pw.begin(), pw.end());
        auto it = acc.find(pw);
        if (it == acc.end())
            acc.emplace(pw, coef);
        else
            it->second = it->second + coef;
    }
    for (auto& [pw, c] : acc)
        if (!c.is_zero()) terms_.push_back({c, pw});
    finish();
}

void CPoly::finish() {
    std::set<int> s;
    degree_ = 0;
    for (auto& t : terms_) {
        int d = 0;
        for (auto& [sl, e] : t.pw) {
            s.insert(sl);
            d += e;
        }
        degree_ = std::max(degree_, d);
    }
    slots_.assign(s.begin(), s.end());
}

Element CPoly::eval(const std::vector<Element>& point) const {
    Element acc = Element::integer(backend_, 0);
    for (auto& t : terms_) {
        Element v = t.coef;
        for (auto& [sl, e] : t.pw)
            for (int i = 0; i < e; ++i) v = v * point[sl];
        acc = acc + v;
    }
    return acc;
}

CPoly CPoly::derivative(int slot) const {
    CPoly r;
    r.backend_ = backend_;
    std::map<std::vector<std::pair<int, int>>, Element> acc;
    for (auto& t : terms_) {
        std::vector<std::pair<int, int>> pw;
        int e = 0;
        for (auto& [sl, k] : t.pw) {
            if (sl == slot) {
                e = k;
                if (k > 1) pw.emplace_back(sl, k - 1);
            } else {
                pw.emplace_back(sl, k);
            }
        }
        if (!e) continue;
        Element c = t.coef.scaled(Integer(e));
        auto it = acc.find(pw);
        if (it == acc.end())
            acc.emplace(pw, c);
        else
            it->second = it->second + c;
    }
    for (auto& [pw, c] : acc)
        if (!c.is_zero()) r.terms_.push_back({c, pw});
    r.finish();
    return r;
}

CPoly CPoly::from_map(const BackendSpec& b, const std::map<std::vector<std::pair<int, int>>, Element>& acc) {
    CPoly r;
    r.backend_ = b;
    for (auto& [pw, c] : acc)
        if (!c.is_zero()) r.terms_.push_back({c, pw});
    r.finish();
    return r;
}

static void accumulate(std::map<std::vector<std::pair<int, int>>, Element>& acc, const std::vector<std::pair<int, int>>& pw,
                       const Element& c) {
    auto it = acc.find(pw);
    if (it == acc.end())
        acc.emplace(pw, c);
    else
        it->second = it->second + c;
}

CPoly CPoly::operator+(const CPoly& o) const {
    std::map<std::vector<std::pair<int, int>>, Element> acc;
    for (auto& t : terms_) accumulate(acc, t.pw, t.coef);
    for (auto& t : o.terms_) accumulate(acc, t.pw, t.coef);
    return from_map(backend_, acc);
}

CPoly CPoly::operator-(const CPoly& o) const {
    std::map<std::vector<std::pair<int, int>>, Element> acc;
    for (auto& t : terms_) accumulate(acc, t.pw, t.coef);
    for (auto& t : o.terms_) accumulate(acc, t.pw, -t.coef);
    return from_map(backend_, acc);
}

CPoly CPoly::operator*(const CPoly& o) const {
    std::map<std::vector<std::pair<int, int>>, Element> acc;
    for (auto& t : terms_)
        for (auto& u : o.terms_) {
            std::map<int, int> m;
            for (auto& [s, e] : t.pw) m[s] += e;
            for (auto& [s, e] : u.pw) m[s] += e;
            accumulate(acc, {m.begin(), m.end()}, t.coef * u.coef);
        }
    return from_map(backend_, acc);
}

}  // namespace motint
