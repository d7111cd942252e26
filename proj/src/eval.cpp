#include "motint/eval.hpp"

#include <algorithm>
#include <atomic>
#include <climits>
#include <cmath>
#include <mutex>
#include <cstdlib>
#include <thread>

namespace motint {

Tri tri_not(Tri a) { return a == Tri::True ? Tri::False : a == Tri::False ? Tri::True : Tri::Unknown; }
Tri tri_and(Tri a, Tri b) {
    if (a == Tri::False || b == Tri::False) return Tri::False;
    if (a == Tri::True && b == Tri::True) return Tri::True;
    return Tri::Unknown;
}
Tri tri_or(Tri a, Tri b) { return tri_not(tri_and(tri_not(a), tri_not(b))); }
const char* tri_name(Tri t) { return t == Tri::True ? "TRUE" : t == Tri::False ? "FALSE" : "UNKNOWN"; }

std::uint64_t default_budget() {
    if (const char* s = std::getenv("MOTINT_BUDGET")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(s, &end, 10);
        if (end != s && v > 0) return v;
    }
    return 1000000000ULL;
}

Value vr_value(const TruncatedElement& x) { return VrValue{x.repr(), x.precision()}; }
Value vr_exact(const Element& x) { return VrValue{x, kExact}; }

void parallel_for(std::uint64_t n, unsigned threads, const std::function<void(std::uint64_t, std::uint64_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads == 1 || n < 64) {
        fn(0, n);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    const std::uint64_t chunk = std::max<std::uint64_t>(1, n / (threads * 8));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            while (true) {
                std::uint64_t lo = next.fetch_add(chunk);
                if (lo >= n) break;
                fn(lo, std::min(n, lo + chunk));
            }
        });
    for (auto& th : pool) th.join();
}

// ---- compiled representation ----

namespace {

using K = Formula::Kind;
constexpr long long INF = LLONG_MAX / 4;

struct RfPoly {
    std::vector<std::pair<std::uint64_t, std::vector<std::pair<int, int>>>> terms;
    std::uint64_t eval(const std::vector<std::uint32_t>& rf, std::uint32_t p) const {
        std::uint64_t acc = 0;
        for (auto& [c, pw] : terms) {
            std::uint64_t v = c;
            for (auto& [s, e] : pw)
                for (int i = 0; i < e; ++i) v = v * rf[s] % p;
            acc = (acc + v) % p;
        }
        return acc;
    }
};

struct CNode;

struct HenselCombo {
    std::vector<const CNode*> eqs;
    std::vector<int> vars;
    TaylorPoly det;
};

struct HenselData {
    std::vector<int> block;
    std::vector<HenselCombo> combos;
};

struct CRing;

struct CNode {
    K kind = K::EQ_ZERO;
    Sort eq_sort = Sort::VAL_RING;
    TaylorPoly g1, g2;
    RfPoly rf;
    std::vector<std::pair<int, long long>> Lt;
    long long Lc = 0;
    long long d = 1;
    const CRing* ring = nullptr;
    std::vector<TaylorPoly> args;
    std::unique_ptr<CNode> a, b;
    Sort qsort = Sort::VAL_RING;
    int slot = -1;
    // head of a block of like valuation-ring quantifiers
    std::vector<int> block;
    const CNode* body = nullptr;
    HenselData hensel;
};

struct CRing {
    int nrf = 0;
    std::unique_ptr<CNode> root;
};

struct Env {
    std::vector<Element> c;
    std::vector<int> r;
    std::vector<long long> vg;
    std::vector<std::uint32_t> rf;
};

struct Ctx {
    const BackendSpec* b;
    int N;
    long long Bvg;
    bool certify;
    bool level;
    const std::vector<const CNode*>* forced;
};

}  // namespace

class CompiledFormula {
public:
    std::unique_ptr<CNode> root;
    std::map<std::string, std::unique_ptr<CRing>> rings;
    int nvr = 0, nvg = 0, nrf = 0;
    HenselData root_hensel;
    BackendSpec backend = BackendSpec::padic(2);

    Tri ev(const CNode& n, Env& e, const Ctx& c) const;

private:
    OrdInfo ordinfo(const TaylorPoly& g, const Env& e, const Ctx& c) const;
    long long affine(const CNode& n, const Env& e) const;
    Tri quant_vr(const CNode& n, Env& e, const Ctx& c) const;
    Tri enumerate_block(const CNode& n, std::size_t k, Env& e, const Ctx& c) const;
    Tri ring_eval(const CRing& r, const std::vector<std::uint32_t>& acs, const Ctx& c) const;

public:
    Tri hensel(const HenselData& hd, const CNode& body, Env& e, const Ctx& c, const std::vector<int>* required) const;
};

namespace {

struct Compiler {
    const BackendSpec& b;
    const RingRegistry* reg;
    CompiledFormula& cf;
    std::map<std::string, std::pair<Sort, int>> scope;
    int nvr = 0, nvg = 0, nrf = 0;

    int slot_of(const std::string& v, Sort want) {
        auto it = scope.find(v);
        if (it == scope.end()) throw SortError(SortError::Code::UNBOUND_VARIABLE, "unbound variable '" + v + "'");
        if (it->second.first != want)
            throw SortError(SortError::Code::SORT_MISMATCH, "variable '" + v + "' has sort " +
                                                                sort_name(it->second.first));
        return it->second.second;
    }

    TaylorPoly vr_poly(const Poly& p) {
        return TaylorPoly(CPoly(p, b, [&](const std::string& v) { return slot_of(v, Sort::VAL_RING); }));
    }

    RfPoly rf_poly(const Poly& p) {
        RfPoly r;
        for (auto& [m, c] : p.terms()) {
            std::vector<std::pair<int, int>> pw;
            for (auto& [v, e] : m) {
                if (v == kPi) throw SortError(SortError::Code::SORT_MISMATCH, "PI in a residue equation");
                pw.emplace_back(slot_of(v, Sort::RESIDUE), e);
            }
            std::uint64_t cm = mpz_fdiv_ui(c.get_mpz_t(), b.p);
            if (cm) r.terms.emplace_back(cm, pw);
        }
        return r;
    }

    void affine(const Poly& L, CNode& n) {
        for (auto& [m, c] : L.terms()) {
            if (!c.fits_slong_p()) throw std::overflow_error("value-group coefficient too large");
            if (m.empty()) {
                n.Lc += c.get_si();
                continue;
            }
            if (m.size() != 1 || m[0].second != 1)
                throw SortError(SortError::Code::SORT_MISMATCH, "value-group term must have degree <= 1");
            n.Lt.emplace_back(slot_of(m[0].first, Sort::VAL_GROUP), c.get_si());
        }
    }

    int bind(const std::string& v, Sort s) {
        int slot = s == Sort::VAL_RING ? nvr++ : s == Sort::VAL_GROUP ? nvg++ : nrf++;
        scope[v] = {s, slot};
        return slot;
    }

    std::unique_ptr<CNode> compile(const FormulaPtr& f) {
        auto n = std::make_unique<CNode>();
        n->kind = f->kind;
        switch (f->kind) {
            case K::EQ_ZERO: {
                bool rf = false;
                for (auto& v : f->g1.vars()) {
                    auto it = scope.find(v);
                    if (it != scope.end() && it->second.first == Sort::RESIDUE) rf = true;
                }
                n->eq_sort = rf ? Sort::RESIDUE : Sort::VAL_RING;
                if (rf)
                    n->rf = rf_poly(f->g1);
                else
                    n->g1 = vr_poly(f->g1);
                break;
            }
            case K::ORD_LEQ:
                n->g1 = vr_poly(f->g1);
                n->g2 = vr_poly(f->g2);
                affine(f->L, *n);
                break;
            case K::ORD_CONG:
                if (!f->d_var.empty())
                    throw SortError(SortError::Code::VARIABLE_MODULUS, "variable modulus '" + f->d_var + "'");
                if (f->d < 1 || !f->d.fits_slong_p()) throw std::invalid_argument("bad modulus");
                n->g1 = vr_poly(f->g1);
                affine(f->L, *n);
                n->d = f->d.get_si();
                break;
            case K::RES_PRED:
                n->ring = ring(f->pred, f->args.size());
                for (auto& a : f->args) n->args.push_back(vr_poly(a));
                break;
            case K::NOT: n->a = compile(f->a); break;
            case K::AND:
            case K::OR:
            case K::IMPLIES:
                n->a = compile(f->a);
                n->b = compile(f->b);
                break;
            case K::EXISTS:
            case K::FORALL: {
                auto saved = scope.find(f->var) == scope.end() ? std::nullopt
                                                                : std::optional(scope[f->var]);
                n->qsort = f->var_sort;
                n->slot = bind(f->var, f->var_sort);
                n->a = compile(f->a);
                if (saved)
                    scope[f->var] = *saved;
                else
                    scope.erase(f->var);
                if (n->qsort == Sort::VAL_RING) {
                    n->block.push_back(n->slot);
                    const CNode* cur = n->a.get();
                    while (cur->kind == n->kind && cur->qsort == Sort::VAL_RING) {
                        n->block.push_back(cur->slot);
                        cur = cur->a.get();
                    }
                    n->body = cur;
                    if (n->kind == K::EXISTS) n->hensel = hensel_data(n->block, *cur);
                }
                break;
            }
        }
        return n;
    }

    const CRing* ring(const std::string& name, std::size_t arity) {
        auto it = cf.rings.find(name);
        if (it != cf.rings.end()) return it->second.get();
        if (!reg || !reg->count(name))
            throw SortError(SortError::Code::UNKNOWN_PREDICATE, "unknown ring formula '" + name + "'");
        const RingDef& def = reg->at(name);
        if (def.params.size() != arity) throw SortError(SortError::Code::SORT_MISMATCH, "arity mismatch for " + name);
        Compiler sub{b, reg, cf, {}, 0, 0, 0};
        for (auto& v : def.params) sub.bind(v, Sort::RESIDUE);
        auto r = std::make_unique<CRing>();
        r->root = sub.compile(def.body);
        if (sub.nvr || sub.nvg) throw SortError(SortError::Code::SORT_MISMATCH, "ring formula uses non-residue sorts");
        r->nrf = sub.nrf;
        const CRing* out = r.get();
        cf.rings[name] = std::move(r);
        return out;
    }

    static void positive_eqs(const CNode& n, const std::vector<int>& block, std::vector<const CNode*>& out) {
        if (n.kind == K::AND || n.kind == K::OR) {
            positive_eqs(*n.a, block, out);
            positive_eqs(*n.b, block, out);
            return;
        }
        if (n.kind != K::EQ_ZERO || n.eq_sort != Sort::VAL_RING) return;
        for (int s : n.g1.poly().slots())
            if (std::find(block.begin(), block.end(), s) != block.end()) {
                out.push_back(&n);
                return;
            }
    }

    static CPoly det(const std::vector<std::vector<CPoly>>& m) {
        std::size_t k = m.size();
        if (k == 1) return m[0][0];
        if (k == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
        CPoly acc = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
        acc = acc - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]);
        return acc + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }

    static void subsets(std::size_t n, std::size_t k, std::size_t start, std::vector<std::size_t>& cur,
                        std::vector<std::vector<std::size_t>>& out) {
        if (cur.size() == k) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            cur.push_back(i);
            subsets(n, k, i + 1, cur, out);
            cur.pop_back();
        }
    }

    static HenselData hensel_data(const std::vector<int>& block, const CNode& body) {
        HenselData hd;
        hd.block = block;
        std::vector<const CNode*> eqs;
        positive_eqs(body, block, eqs);
        std::size_t mmax = std::min<std::size_t>({3, eqs.size(), block.size()});
        for (std::size_t m = 1; m <= mmax && hd.combos.size() < 200; ++m) {
            std::vector<std::vector<std::size_t>> es, vs;
            std::vector<std::size_t> cur;
            subsets(eqs.size(), m, 0, cur, es);
            subsets(block.size(), m, 0, cur, vs);
            for (auto& E : es)
                for (auto& V : vs) {
                    std::vector<std::vector<CPoly>> mat(m, std::vector<CPoly>());
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < m; ++j)
                            mat[i].push_back(eqs[E[i]]->g1.poly().derivative(block[V[j]]));
                    CPoly dt = det(mat);
                    if (dt.is_zero()) continue;
                    HenselCombo hc;
                    for (auto i : E) hc.eqs.push_back(eqs[i]);
                    for (auto j : V) hc.vars.push_back(block[j]);
                    hc.det = TaylorPoly(dt);
                    hd.combos.push_back(std::move(hc));
                }
        }
        return hd;
    }
};

double cost_of(const CNode& n, const BackendSpec& b, int N, long long B) {
    switch (n.kind) {
        case K::EQ_ZERO:
        case K::ORD_LEQ:
        case K::ORD_CONG: return 1;
        case K::RES_PRED: return std::pow(static_cast<double>(b.p), static_cast<double>(n.args.size()));
        case K::NOT: return cost_of(*n.a, b, N, B);
        case K::AND:
        case K::OR:
        case K::IMPLIES: return cost_of(*n.a, b, N, B) + cost_of(*n.b, b, N, B);
        case K::EXISTS:
        case K::FORALL: {
            double size = n.qsort == Sort::VAL_RING ? std::pow(static_cast<double>(b.p), N)
                          : n.qsort == Sort::VAL_GROUP ? static_cast<double>(2 * B + 1)
                                                       : static_cast<double>(b.p);
            return size * cost_of(*n.a, b, N, B);
        }
    }
    return 1;
}

}  // namespace

// ---- evaluation ----

OrdInfo CompiledFormula::ordinfo(const TaylorPoly& g, const Env& e, const Ctx& c) const {
    if (!c.level) return g.over(e.c, e.r);
    Element v = g.poly().eval(e.c).mod_pi(c.N);
    OrdInfo o;
    if (auto u = v.ord()) {
        o.kind = OrdInfo::Kind::EXACT;
        o.v = *u;
        o.ac = v.ac();
    }
    return o;
}

long long CompiledFormula::affine(const CNode& n, const Env& e) const {
    long long v = n.Lc;
    for (auto& [s, k] : n.Lt) v += k * e.vg[s];
    return v;
}

Tri CompiledFormula::ring_eval(const CRing& r, const std::vector<std::uint32_t>& acs, const Ctx& c) const {
    Env e;
    e.rf.assign(r.nrf, 0);
    std::copy(acs.begin(), acs.end(), e.rf.begin());
    Ctx rc = c;
    rc.forced = nullptr;
    return ev(*r.root, e, rc);
}

Tri CompiledFormula::ev(const CNode& n, Env& e, const Ctx& c) const {
    if (c.forced && std::find(c.forced->begin(), c.forced->end(), &n) != c.forced->end()) return Tri::True;
    switch (n.kind) {
        case K::EQ_ZERO: {
            if (n.eq_sort == Sort::RESIDUE) return n.rf.eval(e.rf, c.b->p) == 0 ? Tri::True : Tri::False;
            OrdInfo o = ordinfo(n.g1, e, c);
            return o.kind == OrdInfo::Kind::ZERO ? Tri::True : o.exact() ? Tri::False : Tri::Unknown;
        }
        case K::ORD_LEQ: {
            OrdInfo o1 = ordinfo(n.g1, e, c), o2 = ordinfo(n.g2, e, c);
            long long L = affine(n, e);
            auto lo = [](const OrdInfo& o) { return o.kind == OrdInfo::Kind::ZERO ? INF : o.v; };
            auto hi = [](const OrdInfo& o) { return o.exact() ? static_cast<long long>(o.v) : INF; };
            long long lo2 = lo(o2) == INF ? INF : lo(o2) + L;
            long long hi2 = hi(o2) == INF ? INF : hi(o2) + L;
            if (hi(o1) <= lo2) return Tri::True;
            if (lo(o1) > hi2) return Tri::False;
            return Tri::Unknown;
        }
        case K::ORD_CONG: {
            OrdInfo o = ordinfo(n.g1, e, c);
            if (!o.exact()) return c.level ? Tri::False : Tri::Unknown;
            long long r = (o.v - affine(n, e)) % n.d;
            return r == 0 ? Tri::True : Tri::False;
        }
        case K::RES_PRED: {
            std::vector<std::vector<std::uint32_t>> choices;
            for (auto& a : n.args) {
                OrdInfo o = ordinfo(a, e, c);
                if (o.exact())
                    choices.push_back({o.ac});
                else if (o.kind == OrdInfo::Kind::ZERO)
                    choices.push_back({0});
                else {
                    std::vector<std::uint32_t> all(c.b->p);
                    for (std::uint32_t i = 0; i < c.b->p; ++i) all[i] = i;
                    choices.push_back(all);
                }
            }
            std::vector<std::size_t> idx(choices.size(), 0);
            std::vector<std::uint32_t> acs(choices.size());
            bool any_t = false, any_f = false;
            while (true) {
                for (std::size_t i = 0; i < idx.size(); ++i) acs[i] = choices[i][idx[i]];
                Tri t = ring_eval(*n.ring, acs, c);
                any_t |= t == Tri::True;
                any_f |= t == Tri::False;
                if (t == Tri::Unknown || (any_t && any_f)) return Tri::Unknown;
                std::size_t k = 0;
                while (k < idx.size() && ++idx[k] == choices[k].size()) idx[k++] = 0;
                if (k == idx.size()) break;
            }
            return any_t ? Tri::True : Tri::False;
        }
        case K::NOT: return tri_not(ev(*n.a, e, c));
        case K::AND: {
            Tri a = ev(*n.a, e, c);
            if (a == Tri::False) return a;
            return tri_and(a, ev(*n.b, e, c));
        }
        case K::OR: {
            Tri a = ev(*n.a, e, c);
            if (a == Tri::True) return a;
            return tri_or(a, ev(*n.b, e, c));
        }
        case K::IMPLIES: {
            Tri a = ev(*n.a, e, c);
            if (a == Tri::False) return Tri::True;
            return tri_or(tri_not(a), ev(*n.b, e, c));
        }
        case K::EXISTS:
        case K::FORALL: {
            bool ex = n.kind == K::EXISTS;
            if (n.qsort == Sort::VAL_RING) return quant_vr(n, e, c);
            bool unknown = false;
            if (n.qsort == Sort::RESIDUE) {
                for (std::uint32_t v = 0; v < c.b->p; ++v) {
                    e.rf[n.slot] = v;
                    Tri t = ev(*n.a, e, c);
                    if (t == (ex ? Tri::True : Tri::False)) return t;
                    unknown |= t == Tri::Unknown;
                }
                return unknown ? Tri::Unknown : (ex ? Tri::False : Tri::True);
            }
            for (long long v = -c.Bvg; v <= c.Bvg; ++v) {
                e.vg[n.slot] = v;
                Tri t = ev(*n.a, e, c);
                if (t == (ex ? Tri::True : Tri::False)) return t;
            }
            if (c.level) return ex ? Tri::False : Tri::True;
            return Tri::Unknown;
        }
    }
    return Tri::Unknown;
}

Tri CompiledFormula::quant_vr(const CNode& n, Env& e, const Ctx& c) const {
    std::vector<Element> saved_c;
    std::vector<int> saved_r;
    for (int s : n.block) {
        saved_c.push_back(e.c[s]);
        saved_r.push_back(e.r[s]);
    }
    Tri t = enumerate_block(n, 0, e, c);
    for (std::size_t i = 0; i < n.block.size(); ++i) {
        e.c[n.block[i]] = saved_c[i];
        e.r[n.block[i]] = saved_r[i];
    }
    if (t == Tri::Unknown && !c.level) return Tri::Unknown;
    return t;
}

Tri CompiledFormula::enumerate_block(const CNode& n, std::size_t k, Env& e, const Ctx& c) const {
    bool ex = n.kind == K::EXISTS;
    Tri win = ex ? Tri::True : Tri::False;
    if (k == n.block.size()) {
        Tri t = ev(*n.body, e, c);
        if (t != Tri::Unknown || c.level) return t;
        // exact center, then Newton certificate
        std::vector<int> rs;
        for (int s : n.block) {
            rs.push_back(e.r[s]);
            e.r[s] = kExact;
        }
        Tri te = ev(*n.body, e, c);
        for (std::size_t i = 0; i < n.block.size(); ++i) e.r[n.block[i]] = rs[i];
        if (te == win) return win;
        if (ex && c.certify && hensel(n.hensel, *n.body, e, c, nullptr) == Tri::True) return Tri::True;
        return Tri::Unknown;
    }
    int s = n.block[k];
    Integer count = residue_count(*c.b, c.N);
    bool unknown = false;
    for (Integer i = 0; i < count; ++i) {
        e.c[s] = Element::from_index(*c.b, i);
        e.r[s] = c.level ? kExact : c.N;
        Tri t = enumerate_block(n, k + 1, e, c);
        if (t == win) return win;
        unknown |= t == Tri::Unknown;
    }
    if (unknown) return Tri::Unknown;
    return ex ? Tri::False : Tri::True;
}

Tri CompiledFormula::hensel(const HenselData& hd, const CNode& body, Env& e, const Ctx& c,
                            const std::vector<int>* required) const {
    std::vector<int> saved;
    for (int s : hd.block) {
        saved.push_back(e.r[s]);
        e.r[s] = kExact;
    }
    auto restore = [&] {
        for (std::size_t i = 0; i < hd.block.size(); ++i) e.r[hd.block[i]] = saved[i];
    };
    for (auto& combo : hd.combos) {
        OrdInfo de = combo.det.over(e.c, e.r);
        if (!de.exact()) continue;
        int ee = de.v;
        int lowmin = kExact;
        bool ok = true;
        for (auto* eq : combo.eqs) {
            int lb = eq->g1.over(e.c, e.r).lower();
            if (lb <= 2 * ee) {
                ok = false;
                break;
            }
            lowmin = std::min(lowmin, lb);
        }
        if (!ok) continue;
        int rho = lowmin >= kExact ? kExact : lowmin - ee;
        if (required) {
            for (int v : combo.vars) {
                auto pos = std::find(hd.block.begin(), hd.block.end(), v) - hd.block.begin();
                if (rho < (*required)[pos]) ok = false;
            }
            if (!ok) continue;
        }
        for (int v : combo.vars) e.r[v] = rho;
        Ctx fc = c;
        fc.forced = &combo.eqs;
        Tri t = ev(body, e, fc);
        for (int v : combo.vars) e.r[v] = kExact;
        if (t == Tri::True) {
            restore();
            return Tri::True;
        }
    }
    restore();
    return Tri::Unknown;
}

// ---- Evaluator ----

Evaluator::Evaluator(const FormulaPtr& f, const BackendSpec& b, const std::vector<std::pair<std::string, Sort>>& free,
                     const RingRegistry* reg)
    : backend_(b), free_(free), c_(std::make_unique<CompiledFormula>()) {
    c_->backend = b;
    Compiler comp{b, reg, *c_, {}, 0, 0, 0};
    for (auto& [v, s] : free) comp.bind(v, s);
    for (auto& [v, s] : free_vars(f)) {
        auto it = comp.scope.find(v);
        if (it == comp.scope.end()) throw SortError(SortError::Code::UNBOUND_VARIABLE, "unbound variable '" + v + "'");
    }
    c_->root = comp.compile(f);
    c_->nvr = comp.nvr;
    c_->nvg = comp.nvg;
    c_->nrf = comp.nrf;
    std::vector<int> vr_free;
    for (auto& [v, s] : free)
        if (s == Sort::VAL_RING) vr_free.push_back(comp.scope.at(v).second);
    c_->root_hensel = Compiler::hensel_data(vr_free, *c_->root);
}

Evaluator::~Evaluator() = default;
Evaluator::Evaluator(Evaluator&&) noexcept = default;

namespace {

Env make_env(const CompiledFormula& cf, const BackendSpec& b, const std::vector<std::pair<std::string, Sort>>& free,
             const std::vector<Value>& vals) {
    if (vals.size() != free.size()) throw std::invalid_argument("assignment does not match free variables");
    Env e;
    e.c.assign(cf.nvr, Element::integer(b, 0));
    e.r.assign(cf.nvr, kExact);
    e.vg.assign(cf.nvg, 0);
    e.rf.assign(cf.nrf, 0);
    int ivr = 0, ivg = 0, irf = 0;
    for (std::size_t i = 0; i < free.size(); ++i) {
        switch (free[i].second) {
            case Sort::VAL_RING: {
                auto* v = std::get_if<VrValue>(&vals[i]);
                if (!v) throw std::invalid_argument("value of wrong sort for '" + free[i].first + "'");
                if (v->center.kind() != b.kind || v->center.p() != b.p)
                    throw BackendMismatch("value for '" + free[i].first + "' is in another ring");
                e.c[ivr] = v->radius >= kExact ? v->center : v->center.mod_pi(v->radius);
                e.r[ivr++] = v->radius;
                break;
            }
            case Sort::VAL_GROUP: {
                auto* v = std::get_if<long>(&vals[i]);
                if (!v) throw std::invalid_argument("value of wrong sort for '" + free[i].first + "'");
                e.vg[ivg++] = *v;
                break;
            }
            case Sort::RESIDUE: {
                auto* v = std::get_if<ResidueElement>(&vals[i]);
                if (!v) throw std::invalid_argument("value of wrong sort for '" + free[i].first + "'");
                e.rf[irf++] = v->value % b.p;
                break;
            }
        }
    }
    return e;
}

}  // namespace

Tri Evaluator::eval(const std::vector<Value>& vals, const EvalConfig& cfg) const {
    if (cfg.N < 1) throw std::invalid_argument("precision must be >= 1");
    Env e = make_env(*c_, backend_, free_, vals);
    Ctx c{&backend_, cfg.N, cfg.vg_bound(), cfg.certify, false, nullptr};
    return c_->ev(*c_->root, e, c);
}

bool Evaluator::eval_level(const std::vector<Value>& vals, const EvalConfig& cfg) const {
    if (cfg.N < 1) throw std::invalid_argument("precision must be >= 1");
    Env e = make_env(*c_, backend_, free_, vals);
    for (auto& r : e.r) r = kExact;
    for (auto& x : e.c) x = x.mod_pi(cfg.N);
    Ctx c{&backend_, cfg.N, cfg.vg_bound(), false, true, nullptr};
    return c_->ev(*c_->root, e, c) == Tri::True;
}

Tri Evaluator::ball_meets(const std::vector<Element>& centers, const std::vector<int>& radii,
                          const EvalConfig& cfg) const {
    std::vector<Value> vals;
    for (std::size_t i = 0; i < centers.size(); ++i) vals.push_back(VrValue{centers[i], radii[i]});
    Env e = make_env(*c_, backend_, free_, vals);
    Ctx c{&backend_, cfg.N, cfg.vg_bound(), cfg.certify, false, nullptr};
    Tri t = c_->ev(*c_->root, e, c);
    if (t != Tri::Unknown) return t;
    std::vector<int> rs = e.r;
    for (std::size_t i = 0; i < centers.size(); ++i) e.r[i] = kExact;
    if (c_->ev(*c_->root, e, c) == Tri::True) return Tri::True;
    for (std::size_t i = 0; i < centers.size(); ++i) e.r[i] = rs[i];
    if (cfg.certify && c_->hensel(c_->root_hensel, *c_->root, e, c, &radii) == Tri::True) return Tri::True;
    return Tri::Unknown;
}

double Evaluator::cost_estimate(const EvalConfig& cfg) const {
    return cost_of(*c_->root, backend_, cfg.N, cfg.vg_bound());
}

static std::vector<std::pair<std::string, Sort>> order_from(const Assignment& a) {
    std::vector<std::pair<std::string, Sort>> out;
    for (auto& [k, v] : a) {
        Sort s = std::holds_alternative<VrValue>(v) ? Sort::VAL_RING
                 : std::holds_alternative<long>(v)  ? Sort::VAL_GROUP
                                                    : Sort::RESIDUE;
        out.emplace_back(k, s);
    }
    return out;
}

Tri eval_at_level(const FormulaPtr& f, const BackendSpec& b, const EvalConfig& cfg, const Assignment& a,
                  const RingRegistry* reg) {
    Evaluator ev(f, b, order_from(a), reg);
    std::vector<Value> vals;
    for (auto& kv : a) vals.push_back(kv.second);
    return ev.eval(vals, cfg);
}

bool eval_level_truth(const FormulaPtr& f, const BackendSpec& b, const EvalConfig& cfg, const Assignment& a,
                      const RingRegistry* reg) {
    Evaluator ev(f, b, order_from(a), reg);
    std::vector<Value> vals;
    for (auto& kv : a) vals.push_back(kv.second);
    return ev.eval_level(vals, cfg);
}

CountResult count_satisfying(const FormulaPtr& f, const BackendSpec& b, const EvalConfig& cfg,
                             const RingRegistry* reg) {
    auto fv = free_vars(f);
    for (auto& [v, s] : fv)
        if (s != Sort::VAL_RING)
            throw std::invalid_argument("count_satisfying: free variable '" + v + "' is not of sort vr");
    Evaluator ev(f, b, fv, reg);
    std::size_t d = fv.size();
    Integer per = residue_count(b, cfg.N);
    Integer total = ipow(per, d);
    double cost = total.get_d() * ev.cost_estimate(cfg);
    if (!total.fits_ulong_p() || cost > static_cast<double>(cfg.budget))
        throw BudgetExceeded("count_satisfying: estimated " + std::to_string(cost) + " atom evaluations");
    std::uint64_t n = total.get_ui();
    std::mutex mu;
    std::uint64_t t_count = 0, u_count = 0;
    parallel_for(n, cfg.threads, [&](std::uint64_t lo, std::uint64_t hi) {
        std::uint64_t tc = 0, uc = 0;
        std::vector<Value> vals(d);
        for (std::uint64_t i = lo; i < hi; ++i) {
            Integer rest(static_cast<unsigned long>(i));
            for (std::size_t k = 0; k < d; ++k) {
                Integer q, r;
                mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), rest.get_mpz_t(), per.get_mpz_t());
                vals[k] = VrValue{Element::from_index(b, r), cfg.N};
                rest = q;
            }
            Tri t = ev.eval(vals, cfg);
            tc += t == Tri::True;
            uc += t == Tri::Unknown;
        }
        std::lock_guard<std::mutex> g(mu);
        t_count += tc;
        u_count += uc;
    });
    CountResult r;
    r.certain_true = static_cast<unsigned long>(t_count);
    r.unknown = static_cast<unsigned long>(u_count);
    r.certain_false = total - r.certain_true - r.unknown;
    return r;
}

StabilizeResult stabilize_sentence(const FormulaPtr& f, const BackendSpec& b, const std::vector<int>& schedule,
                                   const RingRegistry* reg, const EvalConfig& base) {
    if (schedule.empty()) throw std::invalid_argument("empty schedule");
    if (!free_vars(f).empty()) throw std::invalid_argument("stabilize_sentence needs a closed formula");
    Evaluator ev(f, b, {}, reg);
    StabilizeResult out;
    for (int N : schedule) {
        EvalConfig cfg = base;
        cfg.N = N;
        if (ev.cost_estimate(cfg) > static_cast<double>(cfg.budget))
            throw BudgetExceeded("stabilize_sentence: level " + std::to_string(N) + " over budget");
        out.history.emplace_back(N, ev.eval({}, cfg));
    }
    std::size_t first = 0;
    while (first < out.history.size() && out.history[first].second == Tri::Unknown) ++first;
    if (first == out.history.size()) return out;
    Tri v = out.history[first].second;
    for (std::size_t i = first; i < out.history.size(); ++i)
        if (out.history[i].second != v) return out;
    out.verdict = v;
    return out;
}

AkeReport ake_compare(const FormulaPtr& f, const std::vector<std::uint32_t>& primes, const std::vector<int>& schedule,
                      const RingRegistry* reg) {
    AkeReport rep;
    for (auto p : primes) {
        AkeRow row;
        row.p = p;
        row.padic = stabilize_sentence(f, BackendSpec::padic(p), schedule, reg).verdict;
        row.power_series = stabilize_sentence(f, BackendSpec::power_series(p), schedule, reg).verdict;
        if (row.padic == Tri::Unknown || row.power_series == Tri::Unknown) {
            row.status = AkeRow::Status::UNDECIDED;
            ++rep.undecided;
        } else if (row.padic == row.power_series) {
            row.status = AkeRow::Status::AGREE;
            ++rep.agreements;
        } else {
            row.status = AkeRow::Status::DISAGREE;
            ++rep.disagreements;
        }
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace motint
