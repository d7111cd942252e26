#include "motint/arcs.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <mutex>
#include <sstream>

namespace motint {

FormulaPtr AffineVariety::lift_formula() const {
    if (eqs.empty()) return eq_zero(Poly());
    FormulaPtr f = eq_zero(eqs[0]);
    for (std::size_t i = 1; i < eqs.size(); ++i) f = f_and(f, eq_zero(eqs[i]));
    return f;
}

static std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

AffineVariety parse_variety(const std::string& text, const std::string& name) {
    AffineVariety X;
    X.name = name;
    int d = -1;
    std::vector<std::string> declared;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto h = line.find('#');
        if (h != std::string::npos) line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;
        if (d < 0) {
            std::istringstream ls(line);
            std::string kw;
            ls >> kw >> d;
            if (kw != "dim" || !ls || d < 0) throw ParseError("expected 'dim d'", lineno, 1);
            std::string rest;
            if (ls >> rest) throw ParseError("unexpected text after dimension", lineno, 1);
            continue;
        }
        if (line.rfind("vars", 0) == 0 && (line.size() == 4 || line[4] == ' ')) {
            std::string rest = line.substr(4);
            std::replace(rest.begin(), rest.end(), ',', ' ');
            std::istringstream ls(rest);
            std::string v;
            declared.clear();
            while (ls >> v) declared.push_back(v);
            continue;
        }
        try {
            auto eq = line.find('=');
            if (eq != std::string::npos)
                X.eqs.push_back(parse_poly(line.substr(0, eq)) - parse_poly(line.substr(eq + 1)));
            else
                X.eqs.push_back(parse_poly(line));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), lineno, e.col);
        }
    }
    if (d < 0) throw ParseError("missing 'dim d' line", lineno, 1);
    std::set<std::string> used;
    for (auto& f : X.eqs)
        for (auto& v : f.vars())
            if (v != kPi) used.insert(v);
    if (!declared.empty()) {
        if (static_cast<int>(declared.size()) != d) throw ParseError("vars line does not match dimension", 0, 0);
        for (auto& v : used)
            if (std::find(declared.begin(), declared.end(), v) == declared.end())
                throw ParseError("undeclared variable '" + v + "'", 0, 0);
        X.vars = declared;
    } else {
        X.vars.assign(used.begin(), used.end());
        if (static_cast<int>(X.vars.size()) > d) throw ParseError("more variables than the dimension", 0, 0);
        for (int k = 1; static_cast<int>(X.vars.size()) < d; ++k) {
            std::string v = "x" + std::to_string(k);
            if (!used.count(v)) X.vars.push_back(v);
        }
    }
    return X;
}

AffineVariety load_variety(const std::string& path) {
    std::string name = path;
    auto s = name.find_last_of('/');
    if (s != std::string::npos) name = name.substr(s + 1);
    auto dot = name.find_last_of('.');
    if (dot != std::string::npos) name = name.substr(0, dot);
    return parse_variety(read_file(path), name);
}

const char* lift_kind_name(LiftStatus::Kind k) {
    switch (k) {
        case LiftStatus::Kind::LIFTABLE: return "LIFTABLE";
        case LiftStatus::Kind::NOT_LIFTABLE: return "NOT_LIFTABLE";
        default: return "UNKNOWN";
    }
}

JetPoint make_jet(const BackendSpec& b, const std::vector<TruncatedElement>& pt) {
    JetPoint j;
    if (pt.empty()) throw std::invalid_argument("empty point");
    int N = pt[0].precision();
    for (auto& x : pt) {
        if (!x.backend().same_ring(b)) throw BackendMismatch("point coordinate in another ring");
        if (x.precision() != N) throw std::invalid_argument("point coordinates at different precisions");
        j.coords.push_back(x.repr().mod_pi(N));
    }
    j.n = N - 1;
    return j;
}

namespace {

struct Counter {
    std::atomic<std::uint64_t> n{0};
    std::uint64_t budget;
    explicit Counter(std::uint64_t b) : budget(b) {}
    void tick() {
        if (++n > budget) throw BudgetExceeded("arcs: node budget of " + std::to_string(budget) + " exceeded");
    }
};

struct Ball {
    std::vector<Element> c;
    std::vector<int> r;
};

Element digit(const BackendSpec& b, std::uint32_t k, int r) { return Element::integer(b, Integer(k)).mul_pi(r); }

Ball child(const BackendSpec& b, const Ball& x, int j, std::uint32_t k) {
    Ball y = x;
    y.c[j] = y.c[j] + digit(b, k, y.r[j]);
    y.r[j] += 1;
    return y;
}

struct Sys {
    BackendSpec b;
    int d = 0;
    std::vector<TaylorPoly> f;
    std::vector<TaylorPoly> df;  // partials of f[0], one per coordinate (hypersurfaces)
    // Square minors for Newton certificates: chosen coordinates and determinant.
    std::vector<std::pair<std::vector<int>, CPoly>> minors;

    Sys(const AffineVariety& X, const BackendSpec& bk) : b(bk), d(X.dim()) {
        auto slot_of = [&](const std::string& v) {
            for (int i = 0; i < d; ++i)
                if (X.vars[i] == v) return i;
            throw std::invalid_argument("variable '" + v + "' is not a coordinate");
        };
        std::vector<CPoly> cp;
        for (auto& g : X.eqs) {
            cp.emplace_back(g, b, slot_of);
            f.emplace_back(cp.back());
        }
        if (cp.size() == 1)
            for (int j = 0; j < d; ++j) df.emplace_back(cp[0].derivative(j));
        int r = static_cast<int>(cp.size());
        if (r == 0 || r > d) return;
        std::vector<int> sel(r);
        std::function<void(int, int)> rec = [&](int pos, int start) {
            if (pos == r) {
                std::vector<std::vector<CPoly>> m(r, std::vector<CPoly>(r));
                for (int i = 0; i < r; ++i)
                    for (int k = 0; k < r; ++k) m[i][k] = cp[i].derivative(sel[k]);
                minors.emplace_back(sel, det(m));
                return;
            }
            for (int j = start; j < d; ++j) {
                sel[pos] = j;
                rec(pos + 1, j + 1);
            }
        };
        rec(0, 0);
    }

    CPoly det(const std::vector<std::vector<CPoly>>& m) const {
        std::size_t n = m.size();
        if (n == 1) return m[0][0];
        CPoly acc;
        bool first = true;
        for (std::size_t k = 0; k < n; ++k) {
            std::vector<std::vector<CPoly>> sub;
            for (std::size_t i = 1; i < n; ++i) {
                std::vector<CPoly> row;
                for (std::size_t j = 0; j < n; ++j)
                    if (j != k) row.push_back(m[i][j]);
                sub.push_back(row);
            }
            CPoly t = m[0][k] * det(sub);
            if (first) {
                acc = k % 2 ? CPoly() - t : t;
                first = false;
            } else {
                acc = k % 2 ? acc - t : acc + t;
            }
        }
        return acc;
    }

    bool is_root(const std::vector<Element>& x) const {
        for (auto& g : f)
            if (!g.poly().eval(x).is_zero()) return false;
        return true;
    }
};

Integer count_jets_in(const Sys& s, const Ball& x, int n) {
    int e = 0;
    for (int i = 0; i < s.d; ++i) e += n + 1 - x.r[i];
    return ipow(Integer(s.b.p), e);
}

// Expands the root on the calling thread until the frontier is wide enough,
// then finishes each subtree independently. step() either settles a ball
// (adding into acc) or names the coordinate to split.
template <class Acc, class Step>
void run_tree(const BackendSpec& b, const Ball& root, unsigned threads, Acc& out, const Step& step) {
    std::deque<Ball> frontier{root};
    while (!frontier.empty() && frontier.size() < 64) {
        Ball x = std::move(frontier.front());
        frontier.pop_front();
        int j = step(x, out);
        if (j >= 0)
            for (std::uint32_t k = 0; k < b.p; ++k) frontier.push_back(child(b, x, j, k));
    }
    std::vector<Ball> fr(frontier.begin(), frontier.end());
    std::vector<Acc> parts(fr.size());
    std::function<void(const Ball&, Acc&)> dfs = [&](const Ball& x, Acc& acc) {
        int j = step(x, acc);
        if (j >= 0)
            for (std::uint32_t k = 0; k < b.p; ++k) dfs(child(b, x, j, k), acc);
    };
    parallel_for(fr.size(), threads, [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i) dfs(fr[i], parts[i]);
    });
    for (auto& a : parts) out += a;
}

int min_radius_coord(const Ball& x, int cap, int skip = -1) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(x.r.size()); ++i)
        if (i != skip && x.r[i] < cap && (best < 0 || x.r[i] < x.r[best])) best = i;
    return best;
}

Ball root_ball(const BackendSpec& b, int d) {
    Ball x;
    x.c.assign(d, Element::integer(b, Integer(0)));
    x.r.assign(d, 0);
    return x;
}

struct Lifter {
    const Sys& s;
    Counter& ctr;
    int n, B;

    // Search result for one ball.
    struct Res {
        enum { EMPTY, FOUND, OPEN } kind = EMPTY;
        int death = 0;  // EMPTY: precision at which no point of the ball survives
        NewtonCert cert;
    };

    // Newton test at a; with allow_root an exact zero also certifies.
    bool newton(const std::vector<Element>& a, NewtonCert& cert, bool allow_root) const {
        int u = kExact;
        for (auto& g : s.f) {
            auto o = g.poly().eval(a).ord();
            if (o) u = std::min(u, *o);
        }
        for (auto& [vars, det] : s.minors) {
            auto e = det.eval(a).ord();
            if (!e) continue;
            if (u > 2 * *e && u - *e >= n + 1) {
                cert = NewtonCert{a, vars, u, *e, false};
                return true;
            }
        }
        if (allow_root && u >= kExact) {
            cert = NewtonCert{a, {}, u, 0, true};
            return true;
        }
        return false;
    }

    Res search(const Ball& x) {
        ctr.tick();
        Res res;
        int rmax = *std::max_element(x.r.begin(), x.r.end());
        for (auto& g : s.f) {
            OrdInfo o = g.over(x.c, x.r);
            if (o.exact()) {
                res.kind = Res::EMPTY;
                res.death = std::max(o.v + 1, rmax);
                return res;
            }
        }
        if (newton(x.c, res.cert, true)) {
            res.kind = Res::FOUND;
            return res;
        }
        int j = min_radius_coord(x, n + 1 + B);
        if (j < 0) {
            res.kind = Res::OPEN;
            return res;
        }
        res.kind = Res::EMPTY;
        res.death = 0;
        bool open = false;
        for (std::uint32_t k = 0; k < s.b.p; ++k) {
            Res c = search(child(s.b, x, j, k));
            if (c.kind == Res::FOUND) return c;
            if (c.kind == Res::OPEN) open = true;
            else res.death = std::max(res.death, c.death);
        }
        if (open) res.kind = Res::OPEN;
        return res;
    }

    LiftStatus run(const std::vector<Element>& jet) {
        LiftStatus st;
        Ball x;
        x.c = jet;
        x.r.assign(s.d, n + 1);
        for (auto& g : s.f) {
            OrdInfo o = g.over(x.c, x.r);
            if (o.lower() < n + 1) throw std::invalid_argument("point is not on the variety at its level");
        }
        if (B == 0) {
            // No extra digits: only the jet's own representative may certify.
            ctr.tick();
            NewtonCert c;
            if (newton(jet, c, false)) {
                st.kind = LiftStatus::Kind::LIFTABLE;
                st.cert = c;
            } else {
                st.kind = LiftStatus::Kind::UNKNOWN;
                st.depth = n + 1;
            }
            return st;
        }
        Res r = search(x);
        if (r.kind == Res::FOUND) {
            st.kind = LiftStatus::Kind::LIFTABLE;
            st.cert = r.cert;
        } else if (r.kind == Res::EMPTY) {
            st.kind = LiftStatus::Kind::NOT_LIFTABLE;
            st.depth = r.death;
        } else {
            st.kind = LiftStatus::Kind::UNKNOWN;
            st.depth = n + 1 + B;
        }
        return st;
    }
};

struct Tally {
    Integer lo, hi;
    std::uint64_t unknown = 0;
    Tally& operator+=(const Tally& o) {
        lo += o.lo;
        hi += o.hi;
        unknown += o.unknown;
        return *this;
    }
};

void add_status(Tally& acc, const LiftStatus& st) {
    if (st.kind == LiftStatus::Kind::LIFTABLE) {
        acc.lo += 1;
        acc.hi += 1;
    } else if (st.kind == LiftStatus::Kind::UNKNOWN) {
        acc.hi += 1;
        acc.unknown += 1;
    }
}

}  // namespace

Integer jet_count(const AffineVariety& X, const BackendSpec& b, int n, const ArcsConfig& cfg) {
    if (n < 0) throw std::invalid_argument("level must be >= 0");
    Sys s(X, b);
    Counter ctr(cfg.budget);
    struct Acc {
        Integer v;
        Acc& operator+=(const Acc& o) {
            v += o.v;
            return *this;
        }
    } out;
    run_tree(b, root_ball(b, s.d), cfg.threads, out, [&](const Ball& x, Acc& acc) {
        ctr.tick();
        bool all = true;
        for (auto& g : s.f) {
            OrdInfo o = g.over(x.c, x.r);
            if (o.exact() && o.v < n + 1) return -1;
            if (o.lower() < n + 1) all = false;
        }
        if (all) {
            acc.v += count_jets_in(s, x, n);
            return -1;
        }
        return min_radius_coord(x, n + 1);
    });
    return out.v;
}

LiftStatus lift_certificate(const AffineVariety& X, const BackendSpec& b, const JetPoint& pt, int B,
                            const ArcsConfig& cfg) {
    if (B < 0) throw std::invalid_argument("depth budget must be >= 0");
    if (static_cast<int>(pt.coords.size()) != X.dim()) throw std::invalid_argument("point has wrong dimension");
    Sys s(X, b);
    Counter ctr(cfg.budget);
    Lifter L{s, ctr, pt.n, B};
    return L.run(pt.coords);
}

// ---- independent re-check ----

static Element eval_direct(const AffineVariety& X, const BackendSpec& b, const Poly& f, const std::vector<Element>& x) {
    Element acc = Element::integer(b, Integer(0));
    for (auto& [mono, c] : f.terms()) {
        Element t = Element::integer(b, c);
        for (auto& [v, e] : mono) {
            Element base;
            if (v == kPi) {
                base = Element::pi(b);
            } else {
                auto it = std::find(X.vars.begin(), X.vars.end(), v);
                base = x[it - X.vars.begin()];
            }
            for (int k = 0; k < e; ++k) t = t * base;
        }
        acc = acc + t;
    }
    return acc;
}

static int ord_or(const Element& e, int inf) {
    auto o = e.ord();
    return o ? *o : inf;
}

bool check_lift_certificate(const AffineVariety& X, const BackendSpec& b, const JetPoint& pt, const LiftStatus& st) {
    const int d = X.dim();
    const int n = pt.n;
    if (st.kind == LiftStatus::Kind::LIFTABLE) {
        if (!st.cert) return false;
        const auto& c = *st.cert;
        if (static_cast<int>(c.witness.size()) != d) return false;
        for (int i = 0; i < d; ++i)
            if (!((c.witness[i] - pt.coords[i]).mod_pi(n + 1)).is_zero()) return false;
        const int INF = kExact;
        int u = INF;
        for (auto& f : X.eqs) u = std::min(u, ord_or(eval_direct(X, b, f, c.witness), INF));
        if (c.exact_root) return u == INF;
        int r = static_cast<int>(X.eqs.size());
        if (static_cast<int>(c.vars.size()) != r) return false;
        // Jacobian minor by cofactor expansion on elements.
        std::vector<std::vector<Element>> m(r, std::vector<Element>(r));
        for (int i = 0; i < r; ++i)
            for (int k = 0; k < r; ++k) m[i][k] = eval_direct(X, b, X.eqs[i].derivative(X.vars[c.vars[k]]), c.witness);
        std::function<Element(const std::vector<std::vector<Element>>&)> det =
            [&](const std::vector<std::vector<Element>>& a) -> Element {
            std::size_t k = a.size();
            if (k == 1) return a[0][0];
            Element acc = Element::integer(b, Integer(0));
            for (std::size_t j = 0; j < k; ++j) {
                std::vector<std::vector<Element>> sub;
                for (std::size_t i = 1; i < k; ++i) {
                    std::vector<Element> row;
                    for (std::size_t l = 0; l < k; ++l)
                        if (l != j) row.push_back(a[i][l]);
                    sub.push_back(row);
                }
                Element t = a[0][j] * det(sub);
                acc = j % 2 ? acc - t : acc + t;
            }
            return acc;
        };
        int e = ord_or(det(m), INF);
        return e < INF && u == c.u && e == c.e && u > 2 * e && u - e >= n + 1;
    }
    if (st.kind == LiftStatus::Kind::NOT_LIFTABLE) {
        int D = st.depth;
        if (D <= n + 1) return false;
        Integer per = ipow(Integer(b.p), D - n - 1);
        Integer total = ipow(per, d);
        if (total > 20000000) throw std::runtime_error("certificate too deep to re-check exhaustively");
        unsigned long T = total.get_ui();
        for (unsigned long i = 0; i < T; ++i) {
            Integer rest(i);
            std::vector<Element> x(d);
            for (int k = 0; k < d; ++k) {
                Integer q, rr;
                mpz_fdiv_qr(q.get_mpz_t(), rr.get_mpz_t(), rest.get_mpz_t(), per.get_mpz_t());
                x[k] = pt.coords[k] + Element::from_index(b, rr).mul_pi(n + 1);
                rest = q;
            }
            bool sol = true;
            for (auto& f : X.eqs)
                if (ord_or(eval_direct(X, b, f, x), kExact) < D) {
                    sol = false;
                    break;
                }
            if (sol) return false;
        }
        return true;
    }
    return true;
}

// ---- image counts ----

ImageCount image_count(const AffineVariety& X, const BackendSpec& b, int n, int B, const ArcsConfig& cfg) {
    if (n < 0 || B < 0) throw std::invalid_argument("level and depth budget must be >= 0");
    Sys s(X, b);
    Counter ctr(cfg.budget);
    Tally out;
    const bool hyper = s.f.size() == 1;
    run_tree(b, root_ball(b, s.d), cfg.threads, out, [&](const Ball& x, Tally& acc) -> int {
        ctr.tick();
        for (auto& g : s.f) {
            OrdInfo o = g.over(x.c, x.r);
            if (o.exact()) return -1;
        }
        if (s.f.empty()) {
            Integer c = count_jets_in(s, x, n);
            acc.lo += c;
            acc.hi += c;
            return -1;
        }
        int suggest = -1;
        if (hyper) {
            // Implicit-function rule: a coordinate j whose partial has constant
            // order e < r_j and dominates the others gives one lift per jet of
            // the remaining coordinates, or none.
            for (int j = 0; j < s.d && suggest < 0; ++j) {
                OrdInfo oj = s.df[j].over(x.c, x.r);
                if (!oj.exact() || x.r[j] <= oj.v) continue;
                int e = oj.v;
                bool dom = true;
                for (int i = 0; i < s.d && dom; ++i)
                    if (i != j && s.df[i].over(x.c, x.r).lower() < e) dom = false;
                if (!dom) continue;
                std::vector<int> rr = x.r;
                rr[j] = kExact;
                OrdInfo g = s.f[0].over(x.c, rr);
                if (g.lower() >= x.r[j] + e) {
                    Integer c(1);
                    for (int i = 0; i < s.d; ++i)
                        if (i != j) c *= ipow(Integer(b.p), n + 1 - x.r[i]);
                    acc.lo += c;
                    acc.hi += c;
                    return -1;
                }
                if (g.exact()) return -1;
                suggest = min_radius_coord(x, n + 1, j);
            }
        }
        if (suggest >= 0) return suggest;
        int j = min_radius_coord(x, n + 1);
        if (j >= 0) return j;
        Lifter L{s, ctr, n, B};
        add_status(acc, L.run(x.c));
        return -1;
    });
    ImageCount r;
    r.lo = out.lo;
    r.hi = out.hi;
    r.unknown_jets = out.unknown;
    return r;
}

std::vector<JetPoint> enumerate_jets(const AffineVariety& X, const BackendSpec& b, int n, const ArcsConfig& cfg) {
    Sys s(X, b);
    Counter ctr(cfg.budget);
    std::vector<JetPoint> out;
    std::function<void(const Ball&)> rec = [&](const Ball& x) {
        ctr.tick();
        for (auto& g : s.f) {
            OrdInfo o = g.over(x.c, x.r);
            if (o.exact() && o.v < n + 1) return;
        }
        int j = min_radius_coord(x, n + 1);
        if (j < 0) {
            out.push_back(JetPoint{x.c, n});
            return;
        }
        for (std::uint32_t k = 0; k < b.p; ++k) rec(child(b, x, j, k));
    };
    rec(root_ball(b, s.d));
    return out;
}

ImageCount image_count_per_jet(const AffineVariety& X, const BackendSpec& b, int n, int B, const ArcsConfig& cfg) {
    Sys s(X, b);
    auto jets = enumerate_jets(X, b, n, cfg);
    Counter ctr(cfg.budget);
    std::vector<Tally> parts(jets.size());
    parallel_for(jets.size(), cfg.threads, [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i) {
            Lifter L{s, ctr, n, B};
            add_status(parts[i], L.run(jets[i].coords));
        }
    });
    Tally out;
    for (auto& t : parts) out += t;
    ImageCount r;
    r.lo = out.lo;
    r.hi = out.hi;
    r.unknown_jets = out.unknown;
    return r;
}

// ---- truncations of definable sets ----

namespace {
constexpr std::size_t kFrontierCap = 4096;
}

std::vector<std::string> coordinates_of(const FormulaPtr& f, const std::vector<std::string>& vars) {
    auto fv = free_vars(f);
    for (auto& [v, s] : fv) {
        if (s != Sort::VAL_RING) throw std::invalid_argument("free variable '" + v + "' is not of sort vr");
        if (!vars.empty() && std::find(vars.begin(), vars.end(), v) == vars.end())
            throw std::invalid_argument("free variable '" + v + "' is not among the coordinates");
    }
    if (!vars.empty()) return vars;
    std::vector<std::string> out;
    for (auto& kv : fv) out.push_back(kv.first);
    return out;
}

ImageCount truncation_count(const FormulaPtr& f, const BackendSpec& b, int n, int B, const RingRegistry* reg,
                            const ArcsConfig& cfg, const std::vector<std::string>& vars) {
    if (n < 0 || B < 0) throw std::invalid_argument("level and depth budget must be >= 0");
    std::vector<std::pair<std::string, Sort>> fv;
    for (auto& v : coordinates_of(f, vars)) fv.emplace_back(v, Sort::VAL_RING);
    Evaluator ev(f, b, fv, reg);
    const int d = static_cast<int>(fv.size());
    Integer per = residue_count(b, n + 1);
    Integer total = ipow(per, d);
    if (!total.fits_ulong_p() || total.get_d() > static_cast<double>(cfg.budget))
        throw BudgetExceeded("truncation_count: " + total.get_str() + " tuples exceed the budget");
    Counter ctr(cfg.budget);
    std::uint64_t T = total.get_ui();
    std::mutex mu;
    Tally out;
    parallel_for(T, cfg.threads, [&](std::uint64_t lo, std::uint64_t hi) {
        Tally loc;
        for (std::uint64_t i = lo; i < hi; ++i) {
            Integer rest(static_cast<unsigned long>(i));
            Ball x;
            for (int k = 0; k < d; ++k) {
                Integer q, r;
                mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), rest.get_mpz_t(), per.get_mpz_t());
                x.c.push_back(Element::from_index(b, r));
                x.r.push_back(n + 1);
                rest = q;
            }
            std::vector<Ball> level{x};
            Tri verdict = Tri::False;
            for (int depth = 0;; ++depth) {
                std::vector<Ball> open;
                EvalConfig ec(n + 1 + depth);
                ec.threads = 1;
                bool hit = false;
                for (auto& y : level) {
                    ctr.tick();
                    Tri t = ev.ball_meets(y.c, y.r, ec);
                    if (t == Tri::True) {
                        hit = true;
                        break;
                    }
                    if (t == Tri::Unknown) open.push_back(y);
                }
                if (hit) {
                    verdict = Tri::True;
                    break;
                }
                if (open.empty()) break;
                if (depth == B || open.size() * std::pow(b.p, d) > kFrontierCap) {
                    verdict = Tri::Unknown;
                    break;
                }
                level.clear();
                for (auto& y : open) {
                    std::vector<Ball> cur{y};
                    for (int k = 0; k < d; ++k) {
                        std::vector<Ball> nxt;
                        for (auto& z : cur)
                            for (std::uint32_t dg = 0; dg < b.p; ++dg) nxt.push_back(child(b, z, k, dg));
                        cur.swap(nxt);
                    }
                    level.insert(level.end(), cur.begin(), cur.end());
                }
            }
            if (verdict == Tri::True) {
                loc.lo += 1;
                loc.hi += 1;
            } else if (verdict == Tri::Unknown) {
                loc.hi += 1;
                loc.unknown += 1;
            }
        }
        std::lock_guard<std::mutex> g(mu);
        out += loc;
    });
    ImageCount r;
    r.lo = out.lo;
    r.hi = out.hi;
    r.unknown_jets = out.unknown;
    return r;
}

bool weak_stability_probe(const FormulaPtr& f, const BackendSpec& b, int n, int m, int B, const RingRegistry* reg,
                          const ArcsConfig& cfg, const std::vector<std::string>& vars, int dim) {
    if (m <= n) throw std::invalid_argument("weak_stability_probe needs m > n");
    int d = dim >= 0 ? dim : static_cast<int>(coordinates_of(f, vars).size());
    ImageCount a = truncation_count(f, b, n, B, reg, cfg, vars);
    ImageCount c = truncation_count(f, b, m, B, reg, cfg, vars);
    if (!a.exact() || !c.exact()) return false;
    return c.lo == a.lo * ipow(Integer(b.p), (m - n) * d);
}

}  // namespace motint
