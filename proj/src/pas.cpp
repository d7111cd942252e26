#include "motint/pas.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace motint {

const char* sort_name(Sort s) {
    switch (s) {
        case Sort::VAL_RING: return "vr";
        case Sort::VAL_GROUP: return "vg";
        case Sort::RESIDUE: return "rf";
    }
    return "?";
}

ParseError::ParseError(const std::string& msg, int l, int c)
    : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), col(c) {}

bool Formula::operator==(const Formula& o) const {
    if (kind != o.kind) return false;
    switch (kind) {
        case Kind::EQ_ZERO: return g1 == o.g1;
        case Kind::ORD_LEQ: return g1 == o.g1 && g2 == o.g2 && L == o.L;
        case Kind::ORD_CONG: return g1 == o.g1 && L == o.L && d == o.d && d_var == o.d_var;
        case Kind::RES_PRED: return pred == o.pred && args == o.args;
        case Kind::NOT: return same(a, o.a);
        case Kind::AND:
        case Kind::OR:
        case Kind::IMPLIES: return same(a, o.a) && same(b, o.b);
        case Kind::EXISTS:
        case Kind::FORALL: return var == o.var && var_sort == o.var_sort && same(a, o.a);
    }
    return false;
}

bool same(const FormulaPtr& x, const FormulaPtr& y) {
    if (!x || !y) return x == y;
    return *x == *y;
}

static FormulaPtr mk(Formula f) { return std::make_shared<const Formula>(std::move(f)); }

FormulaPtr eq_zero(Poly g) {
    Formula f;
    f.kind = Formula::Kind::EQ_ZERO;
    f.g1 = std::move(g);
    return mk(std::move(f));
}

FormulaPtr ord_leq(Poly g1, Poly g2, Poly L) {
    Formula f;
    f.kind = Formula::Kind::ORD_LEQ;
    f.g1 = std::move(g1);
    f.g2 = std::move(g2);
    f.L = std::move(L);
    return mk(std::move(f));
}

FormulaPtr ord_cong(Poly g, Poly L, Integer d) {
    Formula f;
    f.kind = Formula::Kind::ORD_CONG;
    f.g1 = std::move(g);
    f.L = std::move(L);
    f.d = std::move(d);
    return mk(std::move(f));
}

FormulaPtr res_pred(std::string name, std::vector<Poly> args) {
    Formula f;
    f.kind = Formula::Kind::RES_PRED;
    f.pred = std::move(name);
    f.args = std::move(args);
    return mk(std::move(f));
}

static FormulaPtr unary(Formula::Kind k, FormulaPtr a) {
    Formula f;
    f.kind = k;
    f.a = std::move(a);
    return mk(std::move(f));
}

static FormulaPtr binary(Formula::Kind k, FormulaPtr a, FormulaPtr b) {
    Formula f;
    f.kind = k;
    f.a = std::move(a);
    f.b = std::move(b);
    return mk(std::move(f));
}

static FormulaPtr quant(Formula::Kind k, std::string v, Sort s, FormulaPtr body) {
    Formula f;
    f.kind = k;
    f.var = std::move(v);
    f.var_sort = s;
    f.a = std::move(body);
    return mk(std::move(f));
}

FormulaPtr f_not(FormulaPtr a) { return unary(Formula::Kind::NOT, std::move(a)); }
FormulaPtr f_and(FormulaPtr a, FormulaPtr b) { return binary(Formula::Kind::AND, std::move(a), std::move(b)); }
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) { return binary(Formula::Kind::OR, std::move(a), std::move(b)); }
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
    return binary(Formula::Kind::IMPLIES, std::move(a), std::move(b));
}
FormulaPtr f_exists(std::string v, Sort s, FormulaPtr body) {
    return quant(Formula::Kind::EXISTS, std::move(v), s, std::move(body));
}
FormulaPtr f_forall(std::string v, Sort s, FormulaPtr body) {
    return quant(Formula::Kind::FORALL, std::move(v), s, std::move(body));
}

// ---- lexer ----

namespace {

struct Tok {
    enum Type { IDENT, INT, SYM, END } type;
    std::string text;
    int line, col;
};

std::vector<Tok> lex(const std::string& s, int line0 = 1, int col0 = 1) {
    std::vector<Tok> out;
    int line = line0, col = col0;
    std::size_t i = 0;
    auto adv = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k) {
            if (s[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    static const char* syms2[] = {"!=", "<=", ">=", "->", ":="};
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            adv(1);
            continue;
        }
        if (c == '#') {
            while (i < s.size() && s[i] != '\n') adv(1);
            continue;
        }
        int l = line, cl = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_' || s[j] == '\''))
                ++j;
            out.push_back({Tok::IDENT, s.substr(i, j - i), l, cl});
            adv(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            if (j + 1 < s.size() && s[j] == '.' && std::isdigit(static_cast<unsigned char>(s[j + 1])))
                throw ParseError("rational coefficients are not allowed", l, cl);
            out.push_back({Tok::INT, s.substr(i, j - i), l, cl});
            adv(j - i);
            continue;
        }
        bool two = false;
        for (auto sy : syms2)
            if (s.compare(i, 2, sy) == 0) {
                out.push_back({Tok::SYM, sy, l, cl});
                adv(2);
                two = true;
                break;
            }
        if (two) continue;
        if (std::string("(),.:;+-*^=<>~&|!/").find(c) != std::string::npos) {
            out.push_back({Tok::SYM, std::string(1, c), l, cl});
            adv(1);
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
    }
    out.push_back({Tok::END, "", line, col});
    return out;
}

const std::set<std::string> kKeywords = {"E", "A", "ord", "ac", "res", "mod", "free", "ring"};

class Parser {
public:
    Parser(std::vector<Tok> t, const RingRegistry* reg) : t_(std::move(t)), reg_(reg) {}

    FormulaPtr formula() { return implication(); }

    Poly poly_expr() {
        Poly acc;
        bool neg = false;
        if (sym("+")) {
            ++i_;
        } else if (sym("-")) {
            ++i_;
            neg = true;
        }
        Poly t = term();
        acc = neg ? -t : t;
        while (sym("+") || sym("-")) {
            bool minus = sym("-");
            ++i_;
            Poly u = term();
            acc = minus ? acc - u : acc + u;
        }
        return acc;
    }

    void expect_end() {
        if (cur().type != Tok::END) fail("unexpected '" + cur().text + "'");
    }

    const Tok& cur() const { return t_[i_]; }
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, cur().line, cur().col); }

private:
    bool sym(const char* s) const { return cur().type == Tok::SYM && cur().text == s; }
    bool ident(const char* s) const { return cur().type == Tok::IDENT && cur().text == s; }
    void expect(const char* s) {
        if (!sym(s)) fail(std::string("expected '") + s + "'");
        ++i_;
    }
    void expect_ident(const char* s) {
        if (!ident(s)) fail(std::string("expected '") + s + "'");
        ++i_;
    }
    std::string name() {
        if (cur().type != Tok::IDENT) fail("expected identifier");
        if (kKeywords.count(cur().text)) fail("reserved word '" + cur().text + "'");
        return t_[i_++].text;
    }

    FormulaPtr implication() {
        FormulaPtr a = disj();
        if (sym("->")) {
            ++i_;
            return f_implies(a, implication());
        }
        return a;
    }
    FormulaPtr disj() {
        FormulaPtr a = conj();
        while (sym("|")) {
            ++i_;
            a = f_or(a, conj());
        }
        return a;
    }
    FormulaPtr conj() {
        FormulaPtr a = unary_f();
        while (sym("&")) {
            ++i_;
            a = f_and(a, unary_f());
        }
        return a;
    }
    FormulaPtr unary_f() {
        if (sym("!")) {
            ++i_;
            return f_not(unary_f());
        }
        if ((ident("E") || ident("A")) && t_[i_ + 1].type == Tok::IDENT) {
            bool ex = ident("E");
            ++i_;
            std::string v = name();
            expect(":");
            Sort s = sort();
            expect(".");
            FormulaPtr body = formula();
            return ex ? f_exists(v, s, body) : f_forall(v, s, body);
        }
        return primary();
    }
    Sort sort() {
        if (ident("vr")) {
            ++i_;
            return Sort::VAL_RING;
        }
        if (ident("vg")) {
            ++i_;
            return Sort::VAL_GROUP;
        }
        if (ident("rf")) {
            ++i_;
            return Sort::RESIDUE;
        }
        fail("expected sort vr, vg or rf");
    }
    FormulaPtr primary() {
        if (sym("(")) {
            std::size_t save = i_;
            try {
                return atom();
            } catch (const ParseError&) {
                i_ = save;
            }
            ++i_;
            FormulaPtr f = formula();
            expect(")");
            return f;
        }
        return atom();
    }
    Poly ord_arg() {
        expect_ident("ord");
        expect("(");
        Poly p = poly_expr();
        expect(")");
        return p;
    }
    FormulaPtr atom() {
        if (ident("ord")) return ord_atom();
        if (ident("res")) return res_atom();
        Poly lhs = poly_expr();
        bool ne;
        if (sym("="))
            ne = false;
        else if (sym("!="))
            ne = true;
        else
            fail("expected '=' or '!='");
        ++i_;
        Poly rhs = poly_expr();
        FormulaPtr e = eq_zero(lhs - rhs);
        return ne ? f_not(e) : e;
    }
    FormulaPtr ord_atom() {
        Poly P = ord_arg();
        if (sym("~")) {
            ++i_;
            Poly L = poly_expr();
            expect_ident("mod");
            Formula f;
            f.kind = Formula::Kind::ORD_CONG;
            f.g1 = P;
            f.L = L;
            if (cur().type == Tok::INT) {
                f.d = Integer(t_[i_++].text);
                if (f.d < 1) fail("modulus must be positive");
            } else if (cur().type == Tok::IDENT) {
                f.d_var = t_[i_++].text;
                f.d = 0;
            } else {
                fail("expected modulus");
            }
            return mk(std::move(f));
        }
        std::string rel;
        for (const char* r : {"<=", ">=", "=", "<", ">"})
            if (sym(r)) rel = r;
        if (rel.empty()) fail("expected comparison after ord(...)");
        ++i_;
        Poly Q = Poly::constant(1), L;
        if (ident("ord")) {
            Q = ord_arg();
            if (sym("+") || sym("-")) L = poly_expr();
        } else {
            L = poly_expr();
        }
        Poly one = Poly::constant(1);
        if (rel == "<=") return ord_leq(P, Q, L);
        if (rel == ">=") return ord_leq(Q, P, -L);
        if (rel == "<") return ord_leq(P, Q, L - one);
        if (rel == ">") return ord_leq(Q, P, -L - one);
        return f_and(ord_leq(P, Q, L), ord_leq(Q, P, -L));
    }
    FormulaPtr res_atom() {
        ++i_;
        int l = cur().line, c = cur().col;
        std::string nm = name();
        if (reg_ && !reg_->count(nm)) throw ParseError("unknown identifier '" + nm + "'", l, c);
        expect("(");
        std::vector<Poly> args;
        while (true) {
            expect_ident("ac");
            expect("(");
            args.push_back(poly_expr());
            expect(")");
            if (sym(",")) {
                ++i_;
                continue;
            }
            break;
        }
        expect(")");
        return res_pred(nm, args);
    }
    Poly term() {
        Poly acc = factor();
        while (sym("*") || sym("/")) {
            if (sym("/")) fail("rational coefficients are not allowed");
            ++i_;
            acc = acc * factor();
        }
        return acc;
    }
    Poly factor() {
        Poly b = base();
        if (sym("^")) {
            ++i_;
            if (cur().type != Tok::INT) fail("expected integer exponent");
            b = b.pow(static_cast<unsigned>(std::stoul(t_[i_++].text)));
        }
        return b;
    }
    Poly base() {
        if (cur().type == Tok::INT) return Poly::constant(Integer(t_[i_++].text));
        if (sym("(")) {
            ++i_;
            Poly p = poly_expr();
            expect(")");
            return p;
        }
        if (cur().type == Tok::IDENT) {
            if (t_[i_ + 1].type == Tok::SYM && t_[i_ + 1].text == "(" && !kKeywords.count(cur().text))
                fail("unknown identifier '" + cur().text + "'");
            return Poly::var(name());
        }
        fail("expected polynomial");
    }

    std::vector<Tok> t_;
    std::size_t i_ = 0;
    const RingRegistry* reg_;
};

}  // namespace

FormulaPtr parse(const std::string& text, const RingRegistry* reg) {
    Parser p(lex(text), reg);
    FormulaPtr f = p.formula();
    p.expect_end();
    return f;
}

Poly parse_poly(const std::string& text) {
    Parser p(lex(text), nullptr);
    Poly f = p.poly_expr();
    p.expect_end();
    return f;
}

// ---- rendering ----

static std::string render_L(const Poly& L) {
    if (L.terms().size() <= 1 && (L.is_zero() || L.terms().begin()->second > 0)) return L.str();
    return "(" + L.str() + ")";
}

static std::string r(const FormulaPtr& f, bool wrap_quant) {
    using K = Formula::Kind;
    switch (f->kind) {
        case K::EQ_ZERO: return f->g1.str() + " = 0";
        case K::ORD_LEQ: return "ord(" + f->g1.str() + ") <= ord(" + f->g2.str() + ") + " + render_L(f->L);
        case K::ORD_CONG:
            return "ord(" + f->g1.str() + ") ~ " + f->L.str() + " mod " +
                   (f->d_var.empty() ? f->d.get_str() : f->d_var);
        case K::RES_PRED: {
            std::string s = "res " + f->pred + "(";
            for (std::size_t i = 0; i < f->args.size(); ++i) s += (i ? ", ac(" : "ac(") + f->args[i].str() + ")";
            return s + ")";
        }
        case K::NOT: return "!(" + r(f->a, false) + ")";
        case K::AND: return "(" + r(f->a, true) + " & " + r(f->b, false) + ")";
        case K::OR: return "(" + r(f->a, true) + " | " + r(f->b, false) + ")";
        case K::IMPLIES: return "(" + r(f->a, true) + " -> " + r(f->b, false) + ")";
        case K::EXISTS:
        case K::FORALL: {
            std::string s = std::string(f->kind == K::EXISTS ? "E " : "A ") + f->var + ":" + sort_name(f->var_sort) +
                            ". " + r(f->a, false);
            return wrap_quant ? "(" + s + ")" : s;
        }
    }
    return "";
}

std::string render(const FormulaPtr& f) { return r(f, false); }

// ---- sorts ----

namespace {

using Scope = std::map<std::string, Sort>;

Sort lookup(const Scope& sc, const std::string& v) {
    auto it = sc.find(v);
    if (it == sc.end()) throw SortError(SortError::Code::UNBOUND_VARIABLE, "unbound variable '" + v + "'");
    return it->second;
}

void require_sort(const Poly& p, const Scope& sc, Sort want, const char* where) {
    for (auto& v : p.vars()) {
        if (v == kPi) {
            if (want != Sort::VAL_RING)
                throw SortError(SortError::Code::SORT_MISMATCH, std::string("PI not allowed in ") + where);
            continue;
        }
        Sort s = lookup(sc, v);
        if (s != want)
            throw SortError(SortError::Code::SORT_MISMATCH, "variable '" + v + "' of sort " + sort_name(s) + " used in " +
                                                                 where);
    }
}

FormulaPtr check(const FormulaPtr& f, Scope& sc, const RingRegistry* reg) {
    using K = Formula::Kind;
    Formula g = *f;
    switch (f->kind) {
        case K::EQ_ZERO: {
            bool vr = false, rf = false, pi = false;
            for (auto& v : f->g1.vars()) {
                if (v == kPi) {
                    pi = true;
                    continue;
                }
                Sort s = lookup(sc, v);
                if (s == Sort::VAL_GROUP)
                    throw SortError(SortError::Code::SORT_MISMATCH,
                                    "value-group variable '" + v + "' inside a polynomial equation");
                (s == Sort::VAL_RING ? vr : rf) = true;
            }
            if (rf && (vr || pi))
                throw SortError(SortError::Code::SORT_MISMATCH, "equation mixes residue and valuation-ring sorts");
            g.eq_sort = rf ? Sort::RESIDUE : Sort::VAL_RING;
            break;
        }
        case K::ORD_LEQ:
            require_sort(f->g1, sc, Sort::VAL_RING, "ord(...)");
            require_sort(f->g2, sc, Sort::VAL_RING, "ord(...)");
            require_sort(f->L, sc, Sort::VAL_GROUP, "a value-group term");
            if (f->L.total_degree() > 1)
                throw SortError(SortError::Code::SORT_MISMATCH, "value-group term must have degree <= 1");
            break;
        case K::ORD_CONG:
            if (!f->d_var.empty())
                throw SortError(SortError::Code::VARIABLE_MODULUS, "modulus must be a positive integer, not '" +
                                                                       f->d_var + "'");
            require_sort(f->g1, sc, Sort::VAL_RING, "ord(...)");
            require_sort(f->L, sc, Sort::VAL_GROUP, "a value-group term");
            if (f->L.total_degree() > 1)
                throw SortError(SortError::Code::SORT_MISMATCH, "value-group term must have degree <= 1");
            break;
        case K::RES_PRED:
            for (auto& a : f->args) require_sort(a, sc, Sort::VAL_RING, "ac(...)");
            if (reg) {
                auto it = reg->find(f->pred);
                if (it == reg->end())
                    throw SortError(SortError::Code::UNKNOWN_PREDICATE, "unknown ring formula '" + f->pred + "'");
                if (it->second.params.size() != f->args.size())
                    throw SortError(SortError::Code::SORT_MISMATCH, "arity mismatch for '" + f->pred + "'");
            }
            break;
        case K::NOT: g.a = check(f->a, sc, reg); break;
        case K::AND:
        case K::OR:
        case K::IMPLIES:
            g.a = check(f->a, sc, reg);
            g.b = check(f->b, sc, reg);
            break;
        case K::EXISTS:
        case K::FORALL: {
            auto old = sc.find(f->var);
            std::optional<Sort> prev;
            if (old != sc.end()) prev = old->second;
            sc[f->var] = f->var_sort;
            g.a = check(f->a, sc, reg);
            if (prev)
                sc[f->var] = *prev;
            else
                sc.erase(f->var);
            break;
        }
    }
    return mk(std::move(g));
}

}  // namespace

FormulaPtr check_sorts(const FormulaPtr& f, const SortEnv& env, const RingRegistry* reg) {
    Scope sc(env.begin(), env.end());
    return check(f, sc, reg);
}

std::vector<std::pair<std::string, Sort>> free_vars(const FormulaPtr& f) {
    std::map<std::string, Sort> out;
    std::function<void(const FormulaPtr&, std::map<std::string, Sort>&)> go =
        [&](const FormulaPtr& g, std::map<std::string, Sort>& bound) {
            using K = Formula::Kind;
            auto note = [&](const Poly& p, Sort s) {
                for (auto& v : p.vars())
                    if (v != kPi && !bound.count(v) && !out.count(v)) out[v] = s;
            };
            auto note_hint = [&](const Poly& p, Sort s) {
                for (auto& v : p.vars())
                    if (v != kPi && !bound.count(v)) {
                        auto it = out.find(v);
                        if (it == out.end() || (it->second == Sort::VAL_RING && s != Sort::VAL_RING)) out[v] = s;
                    }
            };
            switch (g->kind) {
                case K::EQ_ZERO: {
                    Sort s = Sort::VAL_RING;
                    for (auto& v : g->g1.vars()) {
                        auto it = bound.find(v);
                        if (it != bound.end() && it->second == Sort::RESIDUE) s = Sort::RESIDUE;
                    }
                    if (s == Sort::RESIDUE)
                        note_hint(g->g1, s);
                    else
                        note(g->g1, s);
                    break;
                }
                case K::ORD_LEQ:
                    note(g->g1, Sort::VAL_RING);
                    note(g->g2, Sort::VAL_RING);
                    note_hint(g->L, Sort::VAL_GROUP);
                    break;
                case K::ORD_CONG:
                    note(g->g1, Sort::VAL_RING);
                    note_hint(g->L, Sort::VAL_GROUP);
                    break;
                case K::RES_PRED:
                    for (auto& a : g->args) note(a, Sort::VAL_RING);
                    break;
                case K::NOT: go(g->a, bound); break;
                case K::AND:
                case K::OR:
                case K::IMPLIES:
                    go(g->a, bound);
                    go(g->b, bound);
                    break;
                case K::EXISTS:
                case K::FORALL: {
                    auto inner = bound;
                    inner[g->var] = g->var_sort;
                    go(g->a, inner);
                    break;
                }
            }
        };
    std::map<std::string, Sort> bound;
    go(f, bound);
    return {out.begin(), out.end()};
}

// ---- files ----

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace {

std::string strip_comments(const std::string& s) {
    std::string out;
    bool comment = false;
    for (char c : s) {
        if (c == '#') comment = true;
        if (c == '\n') comment = false;
        out += comment ? ' ' : c;
    }
    return out;
}

struct Stmt {
    std::string text;
    int line, col;
};

std::vector<Stmt> split_statements(const std::string& s) {
    std::vector<Stmt> out;
    int line = 1, col = 1, sl = 1, scol = 1;
    std::string cur;
    for (char c : s) {
        if (c == ';') {
            out.push_back({cur, sl, scol});
            cur.clear();
        } else {
            if (cur.empty()) {
                sl = line;
                scol = col;
            }
            cur += c;
        }
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    out.push_back({cur, sl, scol});
    std::vector<Stmt> kept;
    for (auto& st : out)
        if (st.text.find_first_not_of(" \t\r\n") != std::string::npos) kept.push_back(st);
    return kept;
}

std::string first_word(const std::string& s) {
    std::size_t i = s.find_first_not_of(" \t\r\n");
    if (i == std::string::npos) return "";
    std::size_t j = i;
    while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
    return s.substr(i, j - i);
}

void parse_ring_def(const Stmt& st, RingRegistry& reg) {
    auto toks = lex(st.text, st.line, st.col);
    std::size_t i = 1;
    auto err = [&](const std::string& m) { throw ParseError(m, toks[i].line, toks[i].col); };
    if (toks[i].type != Tok::IDENT) err("expected ring formula name");
    RingDef def;
    def.name = toks[i++].text;
    if (toks[i].text != "(") err("expected '('");
    ++i;
    while (toks[i].type == Tok::IDENT) {
        def.params.push_back(toks[i++].text);
        if (toks[i].text == ",") ++i;
    }
    if (toks[i].text != ")") err("expected ')'");
    ++i;
    if (toks[i].text != ":=") err("expected ':='");
    ++i;
    std::vector<Tok> rest(toks.begin() + static_cast<long>(i), toks.end());
    Parser p(rest, &reg);
    FormulaPtr body = p.formula();
    p.expect_end();
    SortEnv env;
    for (auto& v : def.params) env[v] = Sort::RESIDUE;
    def.body = check_sorts(body, env, &reg);
    reg[def.name] = def;
}

}  // namespace

FormulaFile parse_formula_file(const std::string& text) {
    FormulaFile out;
    std::string clean = strip_comments(text);
    bool have_formula = false;
    for (auto& st : split_statements(clean)) {
        std::string w = first_word(st.text);
        if (w == "free") {
            auto toks = lex(st.text, st.line, st.col);
            std::size_t i = 1;
            while (toks[i].type == Tok::IDENT) {
                std::string v = toks[i++].text;
                if (toks[i].text != ":") throw ParseError("expected ':'", toks[i].line, toks[i].col);
                ++i;
                std::string s = toks[i].text;
                Sort so;
                if (s == "vr")
                    so = Sort::VAL_RING;
                else if (s == "vg")
                    so = Sort::VAL_GROUP;
                else if (s == "rf")
                    so = Sort::RESIDUE;
                else
                    throw ParseError("expected sort", toks[i].line, toks[i].col);
                ++i;
                out.free.emplace_back(v, so);
                if (toks[i].text == ",") ++i;
            }
            if (toks[i].type != Tok::END) throw ParseError("unexpected '" + toks[i].text + "'", toks[i].line, toks[i].col);
        } else if (w == "ring") {
            parse_ring_def(st, out.rings);
        } else {
            if (have_formula) throw ParseError("more than one formula in file", st.line, st.col);
            Parser p(lex(st.text, st.line, st.col), &out.rings);
            out.formula = p.formula();
            p.expect_end();
            have_formula = true;
        }
    }
    if (!have_formula) throw ParseError("no formula in file", 1, 1);
    SortEnv env(out.free.begin(), out.free.end());
    out.formula = check_sorts(out.formula, env, &out.rings);
    return out;
}

FormulaFile load_formula_file(const std::string& path) { return parse_formula_file(read_file(path)); }

Corpus parse_corpus(const std::string& text) {
    Corpus c;
    std::istringstream in(strip_comments(text));
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::string body = line;
        while (!body.empty() && (body.back() == ';' || std::isspace(static_cast<unsigned char>(body.back()))))
            body.pop_back();
        if (first_word(body) == "ring") {
            parse_ring_def({body, ln, 1}, c.rings);
            continue;
        }
        Parser p(lex(body, ln, 1), &c.rings);
        FormulaPtr f = p.formula();
        p.expect_end();
        c.sentences.push_back(check_sorts(f, {}, &c.rings));
        std::size_t s = body.find_first_not_of(" \t");
        c.sources.push_back(body.substr(s));
    }
    return c;
}

}  // namespace motint
