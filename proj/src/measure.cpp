#include "motint/measure.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

namespace motint {

using K = Formula::Kind;

// ---- level brackets ----

static std::pair<Integer, Integer> level_counts(const Evaluator& ev, const BackendSpec& b, int d, int N,
                                                const EvalConfig& base) {
    EvalConfig cfg = base;
    cfg.N = N;
    Integer per = residue_count(b, N);
    Integer total = ipow(per, d);
    double cost = total.get_d() * ev.cost_estimate(cfg);
    if (!total.fits_ulong_p() || cost > static_cast<double>(cfg.budget))
        throw BudgetExceeded("measure: estimated " + std::to_string(cost) + " atom evaluations at precision " +
                             std::to_string(N));
    std::uint64_t T = total.get_ui();
    std::mutex mu;
    std::uint64_t tc = 0, uc = 0;
    parallel_for(T, cfg.threads, [&](std::uint64_t lo, std::uint64_t hi) {
        std::uint64_t t = 0, u = 0;
        std::vector<Value> vals(d);
        for (std::uint64_t i = lo; i < hi; ++i) {
            Integer rest(static_cast<unsigned long>(i));
            for (int k = 0; k < d; ++k) {
                Integer q, r;
                mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), rest.get_mpz_t(), per.get_mpz_t());
                vals[k] = VrValue{Element::from_index(b, r), N};
                rest = q;
            }
            Tri v = ev.eval(vals, cfg);
            t += v == Tri::True;
            u += v == Tri::Unknown;
        }
        std::lock_guard<std::mutex> g(mu);
        tc += t;
        uc += u;
    });
    return {Integer(static_cast<unsigned long>(tc)), Integer(static_cast<unsigned long>(uc))};
}

MeasureResult set_measure(const FormulaPtr& f, const BackendSpec& b, const std::vector<int>& schedule,
                          const RingRegistry* reg, const std::vector<std::string>& vars, const EvalConfig& base) {
    MeasureResult r;
    r.coords = coordinates_of(f, vars);
    const int d = static_cast<int>(r.coords.size());
    std::vector<std::pair<std::string, Sort>> fv;
    for (auto& v : r.coords) fv.emplace_back(v, Sort::VAL_RING);
    Evaluator ev(f, b, fv, reg);
    std::vector<int> sched = schedule;
    std::sort(sched.begin(), sched.end());
    sched.erase(std::unique(sched.begin(), sched.end()), sched.end());
    if (sched.empty() || sched.front() < 0) throw std::invalid_argument("schedule must list levels >= 0");
    r.lo = 0;
    r.hi = 1;
    for (int n : sched) {
        auto [t, u] = level_counts(ev, b, d, n + 1, base);
        Rational scale(1, ipow(Integer(b.p), static_cast<unsigned long>((n + 1) * d)));
        scale.canonicalize();
        MeasureLevel lv{n, Rational(t) * scale, Rational(t + u) * scale};
        r.history.push_back(lv);
        r.lo = std::max(r.lo, lv.lo);
        r.hi = std::min(r.hi, lv.hi);
        if (u == 0) {
            r.stabilized = true;
            r.method = "cylinder";
            r.stable_level = n;
            break;
        }
    }
    if (!r.stabilized) {
        if (auto v = closure_measure(f, b, r.coords)) {
            if (*v < r.lo || *v > r.hi)
                throw std::logic_error("closure value " + to_string(*v) + " lies outside the level brackets");
            r.lo = r.hi = *v;
            r.stabilized = true;
            r.method = "closure";
        }
    }
    return r;
}

// ---- exact closure ----

namespace {

FormulaPtr kTrue() { return eq_zero(Poly()); }
FormulaPtr kFalse() { return eq_zero(Poly::constant(1)); }
bool is_true(const FormulaPtr& f) { return f->kind == K::EQ_ZERO && f->g1.is_zero(); }
bool is_false(const FormulaPtr& f) { return f->kind == K::EQ_ZERO && !f->g1.is_zero() && f->g1.is_constant(); }

struct Unsupported {};

class Closure {
public:
    Closure(const BackendSpec& b, const std::vector<std::string>& vars, int max_states)
        : b_(b), vars_(vars), max_(max_states) {}

    std::optional<Rational> run(const FormulaPtr& f) {
        try {
            FormulaPtr g = norm(f);
            int root = state(g);
            std::size_t n = rows_.size();
            std::vector<std::vector<Rational>> A(n, std::vector<Rational>(n));
            std::vector<Rational> rhs(n);
            for (std::size_t i = 0; i < n; ++i) {
                A[i][i] += 1;
                rhs[i] = rows_[i].constant;
                for (auto& [j, w] : rows_[i].terms) A[i][j] -= w;
            }
            auto x = solve_linear(A, rhs);
            if (!x) return std::nullopt;
            return (*x)[root];
        } catch (const Unsupported&) {
            return std::nullopt;
        }
    }

private:
    struct Row {
        Rational constant;
        std::vector<std::pair<int, Rational>> terms;
    };

    BackendSpec b_;
    std::vector<std::string> vars_;
    int max_;
    std::map<std::string, int> index_;
    std::vector<Row> rows_;

    int slot(const std::string& v) const {
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == v) return static_cast<int>(i);
        throw Unsupported{};
    }

    // g = pi^k * h with h of content zero.
    std::pair<int, Poly> content(const Poly& g) const {
        if (b_.kind == BackendKind::P_ADIC) {
            Poly h = g.substitute({{kPi, Poly::constant(Integer(b_.p))}});
            int k = INT32_MAX;
            for (auto& [m, c] : h.terms()) k = std::min(k, padic_val(c, b_.p));
            Integer pk = ipow(Integer(b_.p), k);
            Poly out;
            for (auto& [m, c] : h.terms()) {
                Poly t = Poly::constant(c / pk);
                for (auto& [v, e] : m) t = t * Poly::var(v).pow(e);
                out = out + t;
            }
            return {k, out};
        }
        std::map<Monomial, Integer> red;
        int k = INT32_MAX;
        for (auto& [m, c] : g.terms()) {
            Integer r;
            mpz_fdiv_r_ui(r.get_mpz_t(), c.get_mpz_t(), b_.p);
            if (r == 0) continue;
            red[m] = r;
            int e = 0;
            for (auto& [v, x] : m)
                if (v == kPi) e = x;
            k = std::min(k, e);
        }
        Poly out;
        for (auto& [m, c] : red) {
            Poly t = Poly::constant(c);
            for (auto& [v, e] : m) t = t * Poly::var(v).pow(v == kPi ? e - k : e);
            out = out + t;
        }
        return {red.empty() ? 0 : k, out};
    }

    // Order of a content-free h if it is the same at every point of O^d: it
    // is 0 exactly when h has no zero mod pi.
    std::optional<int> uniform(const Poly& h) const {
        std::vector<std::string> used;
        for (auto& v : h.vars())
            if (v != kPi) used.push_back(v);
        for (auto& v : used) slot(v);
        Integer total = ipow(Integer(b_.p), used.size());
        if (total > 100000) return std::nullopt;
        CPoly c(h, b_, [&](const std::string& v) {
            return static_cast<int>(std::find(used.begin(), used.end(), v) - used.begin());
        });
        TaylorPoly t(c);
        std::vector<int> r(used.size(), 1);
        for (unsigned long i = 0; i < total.get_ui(); ++i) {
            std::vector<Element> z;
            unsigned long rest = i;
            for (std::size_t k = 0; k < used.size(); ++k, rest /= b_.p)
                z.push_back(Element::from_index(b_, Integer(rest % b_.p)));
            OrdInfo o = t.over(z, r);
            if (!o.exact() || o.v != 0) return std::nullopt;
        }
        return 0;
    }

    static long constant_of(const Poly& L) {
        if (!L.is_constant()) throw Unsupported{};
        Integer c = L.constant_term();
        if (!c.fits_slong_p()) throw Unsupported{};
        return c.get_si();
    }

    FormulaPtr norm(const FormulaPtr& f) const {
        switch (f->kind) {
            case K::EQ_ZERO: {
                if (f->eq_sort != Sort::VAL_RING) throw Unsupported{};
                if (f->g1.is_zero()) return kTrue();
                auto [k, h] = content(f->g1);
                if (h.is_zero()) return kTrue();
                if (uniform(h)) return kFalse();
                return eq_zero(h);
            }
            case K::ORD_LEQ: {
                long c = constant_of(f->L);
                if (f->g2.is_zero()) return kTrue();
                if (f->g1.is_zero()) return norm(eq_zero(f->g2));
                auto [k1, h1] = content(f->g1);
                auto [k2, h2] = content(f->g2);
                if (h2.is_zero()) return kTrue();
                if (h1.is_zero()) return norm(eq_zero(f->g2));
                c += k2 - k1;
                bool c1 = false, c2 = false;
                if (auto u = uniform(h1)) {
                    c -= *u;
                    h1 = Poly::constant(1);
                    c1 = true;
                }
                if (auto u = uniform(h2)) {
                    c += *u;
                    h2 = Poly::constant(1);
                    c2 = true;
                }
                if (c1 && c2) return c >= 0 ? kTrue() : kFalse();
                if (c1 && c >= 0) return kTrue();
                if (c2 && c < 0) return kFalse();
                return ord_leq(h1, h2, Poly::constant(Integer(c)));
            }
            case K::ORD_CONG: {
                if (f->d < 1 || !f->d.fits_slong_p() || !f->d_var.empty()) throw Unsupported{};
                long d = f->d.get_si();
                long c = constant_of(f->L);
                if (f->g1.is_zero()) throw Unsupported{};
                auto [k, h] = content(f->g1);
                long r = ((c - k) % d + d) % d;
                if (auto u = uniform(h)) return ((*u - r) % d + d) % d == 0 ? kTrue() : kFalse();
                return ord_cong(h, Poly::constant(Integer(r)), Integer(d));
            }
            case K::NOT: {
                auto a = norm(f->a);
                if (is_true(a)) return kFalse();
                if (is_false(a)) return kTrue();
                return f_not(a);
            }
            case K::AND: {
                auto a = norm(f->a), c = norm(f->b);
                if (is_false(a) || is_false(c)) return kFalse();
                if (is_true(a)) return c;
                if (is_true(c)) return a;
                return f_and(a, c);
            }
            case K::OR: {
                auto a = norm(f->a), c = norm(f->b);
                if (is_true(a) || is_true(c)) return kTrue();
                if (is_false(a)) return c;
                if (is_false(c)) return a;
                return f_or(a, c);
            }
            case K::IMPLIES: return norm(f_or(f_not(f->a), f->b));
            default: throw Unsupported{};
        }
    }

    static long weight(const FormulaPtr& f) {
        switch (f->kind) {
            case K::ORD_LEQ:
            case K::ORD_CONG: return std::abs(f->L.constant_term().get_si()) + 1;
            case K::EQ_ZERO: return 1;
            case K::NOT: return weight(f->a);
            case K::AND:
            case K::OR: return weight(f->a) + weight(f->b);
            default: return 0;
        }
    }

    int state(const FormulaPtr& f) {
        std::string key = render(f);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        if (static_cast<int>(rows_.size()) >= max_) throw Unsupported{};
        int id = static_cast<int>(rows_.size());
        index_[key] = id;
        rows_.emplace_back();
        if (is_true(f)) {
            rows_[id].constant = 1;
            return id;
        }
        if (is_false(f)) return id;
        std::vector<std::pair<std::string, Sort>> fv;
        for (auto& v : vars_) fv.emplace_back(v, Sort::VAL_RING);
        Evaluator ev(f, b_, fv);
        std::vector<Value> box(vars_.size(), VrValue{Element::integer(b_, Integer(0)), 0});
        Tri t = ev.eval(box, EvalConfig(1));
        if (t == Tri::True) {
            rows_[id].constant = 1;
            return id;
        }
        if (t == Tri::False) return id;
        std::vector<FormulaPtr> best;
        long best_w = -1;
        for (auto& [v, s] : free_vars(f)) {
            std::vector<FormulaPtr> kids;
            long w = 0;
            for (std::uint32_t c = 0; c < b_.p; ++c) {
                Poly sub = Poly::constant(Integer(c)) + Poly::var(kPi) * Poly::var(v);
                auto k = norm(substitute_formula(f, {{v, sub}}));
                w += weight(k);
                kids.push_back(k);
            }
            if (best_w < 0 || w < best_w) {
                best_w = w;
                best = kids;
            }
        }
        if (best.empty()) throw Unsupported{};
        Rational share(1, b_.p);
        share.canonicalize();
        std::vector<std::pair<int, Rational>> terms;
        for (auto& k : best) {
            int j = state(k);
            terms.emplace_back(j, share);
        }
        rows_[id].terms = terms;
        return id;
    }
};

}  // namespace

std::optional<Rational> closure_measure(const FormulaPtr& f, const BackendSpec& b, const std::vector<std::string>& vars,
                                        int max_states) {
    return Closure(b, vars, max_states).run(f);
}

// ---- substitution ----

FormulaPtr substitute_formula(const FormulaPtr& f, const std::map<std::string, Poly>& s) {
    if (s.empty()) return f;
    auto sub = [&](const Poly& g) { return g.substitute(s); };
    switch (f->kind) {
        case K::EQ_ZERO: {
            auto r = std::make_shared<Formula>(*f);
            r->g1 = sub(f->g1);
            return r;
        }
        case K::ORD_LEQ:
        case K::ORD_CONG: {
            auto r = std::make_shared<Formula>(*f);
            r->g1 = sub(f->g1);
            r->g2 = sub(f->g2);
            return r;
        }
        case K::RES_PRED: {
            auto r = std::make_shared<Formula>(*f);
            for (auto& a : r->args) a = sub(a);
            return r;
        }
        case K::NOT: return f_not(substitute_formula(f->a, s));
        case K::AND: return f_and(substitute_formula(f->a, s), substitute_formula(f->b, s));
        case K::OR: return f_or(substitute_formula(f->a, s), substitute_formula(f->b, s));
        case K::IMPLIES: return f_implies(substitute_formula(f->a, s), substitute_formula(f->b, s));
        case K::EXISTS:
        case K::FORALL: {
            std::map<std::string, Poly> inner = s;
            inner.erase(f->var);
            for (auto& [v, p] : inner)
                if (p.vars().count(f->var))
                    throw std::invalid_argument("substitution would capture bound variable '" + f->var + "'");
            auto body = substitute_formula(f->a, inner);
            return f->kind == K::EXISTS ? f_exists(f->var, f->var_sort, body) : f_forall(f->var, f->var_sort, body);
        }
    }
    return f;
}

// ---- integrals ----

std::pair<FormulaPtr, std::vector<std::string>> integral_formula(const Poly& f, const std::vector<std::string>& vars) {
    if (f.is_zero()) throw std::invalid_argument("integral_abs needs a nonzero polynomial");
    std::vector<std::string> coords = vars;
    if (coords.empty())
        for (auto& v : f.vars())
            if (v != kPi) coords.push_back(v);
    std::string t = "t";
    while (std::find(coords.begin(), coords.end(), t) != coords.end()) t += "_";
    coords.push_back(t);
    return {ord_leq(f, Poly::var(t), Poly()), coords};
}

MeasureResult integral_abs(const Poly& f, const BackendSpec& b, const std::vector<int>& schedule,
                           const std::vector<std::string>& vars) {
    auto [phi, coords] = integral_formula(f, vars);
    return set_measure(phi, b, schedule, nullptr, coords);
}

// ---- change of variables ----

Poly BirationalMapData::jacobian_of(const std::vector<std::string>& src, const std::vector<Poly>& comps) {
    std::size_t n = comps.size();
    if (src.size() != n) throw std::invalid_argument("map must be square");
    std::vector<std::vector<Poly>> m(n, std::vector<Poly>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i][j] = comps[i].derivative(src[j]);
    std::function<Poly(const std::vector<std::vector<Poly>>&)> det = [&](const std::vector<std::vector<Poly>>& a) {
        std::size_t k = a.size();
        if (k == 1) return a[0][0];
        Poly acc;
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<std::vector<Poly>> sub;
            for (std::size_t i = 1; i < k; ++i) {
                std::vector<Poly> row;
                for (std::size_t l = 0; l < k; ++l)
                    if (l != j) row.push_back(a[i][l]);
                sub.push_back(row);
            }
            Poly t = a[0][j] * det(sub);
            acc = j % 2 ? acc - t : acc + t;
        }
        return acc;
    };
    return det(m);
}

BirationalMapData::BirationalMapData(std::vector<std::string> src, std::vector<std::string> tgt,
                                     std::vector<Poly> comps, Poly jac, int order)
    : source(std::move(src)), target(std::move(tgt)), components(std::move(comps)), jacobian(std::move(jac)),
      e(order) {
    if (target.size() != components.size()) throw std::invalid_argument("one component per target coordinate");
    for (auto& c : components)
        for (auto& v : c.vars())
            if (v != kPi && std::find(source.begin(), source.end(), v) == source.end())
                throw std::invalid_argument("component uses '" + v + "', not a source coordinate");
    Poly J = jacobian_of(source, components);
    if (!(J == jacobian))
        throw std::invalid_argument("jacobian " + jacobian.str() + " differs from the determinant " + J.str());
    if (e < 0) throw std::invalid_argument("jacobian order must be >= 0");
}

BirationalMapData parse_birational_map(const std::string& text) {
    std::vector<std::string> src, tgt;
    std::map<std::string, Poly> comp;
    std::optional<Poly> jac;
    std::optional<int> order;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    auto names = [](std::string s) {
        std::replace(s.begin(), s.end(), ',', ' ');
        std::istringstream ls(s);
        std::vector<std::string> out;
        std::string v;
        while (ls >> v) out.push_back(v);
        return out;
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto h = line.find('#');
        if (h != std::string::npos) line = line.substr(0, h);
        std::istringstream ls(line);
        std::string kw;
        if (!(ls >> kw)) continue;
        std::string rest;
        std::getline(ls, rest);
        try {
            if (kw == "source") src = names(rest);
            else if (kw == "target") tgt = names(rest);
            else if (kw == "jacobian") jac = parse_poly(rest);
            else if (kw == "order") order = std::stoi(rest);
            else {
                auto eq = line.find('=');
                if (eq == std::string::npos) throw ParseError("expected 'name = polynomial'", lineno, 1);
                std::string v = names(line.substr(0, eq)).at(0);
                comp[v] = parse_poly(line.substr(eq + 1));
            }
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno, e.col);
        } catch (const std::logic_error& e) {
            throw ParseError(std::string("bad line: ") + e.what(), lineno, 1);
        }
    }
    if (src.empty() || tgt.empty()) throw ParseError("map needs 'source' and 'target' lines", lineno, 1);
    std::vector<Poly> comps;
    for (auto& t : tgt) {
        auto it = comp.find(t);
        if (it == comp.end()) throw ParseError("no component for '" + t + "'", lineno, 1);
        comps.push_back(it->second);
    }
    Poly J = jac ? *jac : BirationalMapData::jacobian_of(src, comps);
    return BirationalMapData(src, tgt, comps, J, order ? *order : 0);
}

CovCheck change_of_variables_check(const BirationalMapData& map, const FormulaPtr& h, const BackendSpec& b, int N,
                                   const RingRegistry* reg) {
    if (N < 1) throw std::invalid_argument("precision must be >= 1");
    std::map<std::string, Poly> s;
    for (std::size_t i = 0; i < map.target.size(); ++i) s[map.target[i]] = map.components[i];
    FormulaPtr pre = substitute_formula(h, s);
    std::vector<int> sched;
    for (int n = 0; n < N; ++n) sched.push_back(n);

    // Jacobian order on every ball of the preimage known to lie inside it.
    const int d = static_cast<int>(map.source.size());
    std::vector<std::pair<std::string, Sort>> fv;
    for (auto& v : map.source) fv.emplace_back(v, Sort::VAL_RING);
    Evaluator ev(pre, b, fv, reg);
    CPoly jc(map.jacobian, b, [&](const std::string& v) {
        auto it = std::find(map.source.begin(), map.source.end(), v);
        if (it == map.source.end()) throw std::invalid_argument("jacobian uses a non-source variable");
        return static_cast<int>(it - map.source.begin());
    });
    TaylorPoly jt(jc);
    Integer per = residue_count(b, N);
    Integer total = ipow(per, d);
    if (!total.fits_ulong_p() || total > Integer(static_cast<unsigned long>(default_budget())))
        throw BudgetExceeded("change_of_variables_check: too many balls");
    EvalConfig cfg(N);
    for (unsigned long i = 0; i < total.get_ui(); ++i) {
        Integer rest(i);
        std::vector<Value> vals;
        std::vector<Element> c;
        for (int k = 0; k < d; ++k) {
            Integer q, r;
            mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), rest.get_mpz_t(), per.get_mpz_t());
            c.push_back(Element::from_index(b, r));
            vals.push_back(VrValue{c.back(), N});
            rest = q;
        }
        if (ev.eval(vals, cfg) != Tri::True) continue;
        OrdInfo o = jt.over(c, std::vector<int>(d, N));
        if (!o.exact() || o.v != map.e) {
            std::string w;
            for (auto& x : c) w += (w.empty() ? "" : ", ") + x.str();
            throw NonConstantJacobianOrder("jacobian order is not " + std::to_string(map.e) + " on the ball (" + w +
                                               ") mod pi^" + std::to_string(N),
                                           c, N);
        }
    }

    CovCheck out;
    out.target = set_measure(h, b, sched, reg, map.target);
    out.source = set_measure(pre, b, sched, reg, map.source);
    if (out.source.stabilized) {
        Rational scale(1, ipow(Integer(b.p), static_cast<unsigned long>(map.e)));
        scale.canonicalize();
        out.scaled_source = out.source.lo * scale;
    }
    out.ok = out.target.stabilized && out.source.stabilized && out.target.lo == out.scaled_source;
    return out;
}

nlohmann::ordered_json measure_json(const std::string& formula, const BackendSpec& b, const MeasureResult& m) {
    nlohmann::ordered_json j;
    j["formula"] = formula;
    j["backend"] = b.name();
    j["p"] = b.p;
    auto lv = nlohmann::ordered_json::array();
    for (auto& l : m.history) lv.push_back({{"n", l.n}, {"lo", to_string(l.lo)}, {"hi", to_string(l.hi)}});
    j["levels"] = lv;
    j["stabilized"] = m.stabilized;
    j["method"] = m.method;
    if (m.stabilized) j["value"] = to_string(m.lo);
    else j["bracket"] = {to_string(m.lo), to_string(m.hi)};
    return j;
}

}  // namespace motint
