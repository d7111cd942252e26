#pragma once

#include "motint/poly.hpp"

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace motint {

enum class Sort { VAL_RING, VAL_GROUP, RESIDUE };

const char* sort_name(Sort s);  // "vr", "vg", "rf"

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    enum class Kind { EQ_ZERO, ORD_LEQ, ORD_CONG, RES_PRED, NOT, AND, OR, IMPLIES, EXISTS, FORALL };
    Kind kind = Kind::EQ_ZERO;

    Poly g1, g2;  // EqZero / OrdLeq / OrdCong operands
    Poly L;       // affine form in value-group variables
    Integer d;    // OrdCong modulus
    std::string d_var;  // set when a variable was written as modulus; rejected by check_sorts
    Sort eq_sort = Sort::VAL_RING;  // filled in by check_sorts for EqZero

    std::string pred;        // RES_PRED name
    std::vector<Poly> args;  // RES_PRED arguments inside ac(...)

    FormulaPtr a, b;  // children
    std::string var;  // quantifier variable
    Sort var_sort = Sort::VAL_RING;

    bool operator==(const Formula& o) const;
};

FormulaPtr eq_zero(Poly g);
FormulaPtr ord_leq(Poly g1, Poly g2, Poly L);
FormulaPtr ord_cong(Poly g, Poly L, Integer d);
FormulaPtr res_pred(std::string name, std::vector<Poly> args);
FormulaPtr f_not(FormulaPtr a);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr f_exists(std::string v, Sort s, FormulaPtr body);
FormulaPtr f_forall(std::string v, Sort s, FormulaPtr body);

bool same(const FormulaPtr& x, const FormulaPtr& y);

/// A named ring formula over residue-field variables, used by "res phi(...)".
struct RingDef {
    std::string name;
    std::vector<std::string> params;
    FormulaPtr body;
};
using RingRegistry = std::map<std::string, RingDef>;

struct ParseError : std::runtime_error {
    int line, col;
    ParseError(const std::string& msg, int l, int c);
};

struct SortError : std::runtime_error {
    enum class Code { SORT_MISMATCH, UNBOUND_VARIABLE, VARIABLE_MODULUS, UNKNOWN_PREDICATE };
    Code code;
    SortError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

using SortEnv = std::map<std::string, Sort>;

/// Parses one formula. When reg is given, "res" predicates must be registered.
FormulaPtr parse(const std::string& text, const RingRegistry* reg = nullptr);
Poly parse_poly(const std::string& text);

FormulaPtr check_sorts(const FormulaPtr& f, const SortEnv& env, const RingRegistry* reg = nullptr);
std::vector<std::pair<std::string, Sort>> free_vars(const FormulaPtr& f);
std::string render(const FormulaPtr& f);

/// Contents of a formula file.
struct FormulaFile {
    std::vector<std::pair<std::string, Sort>> free;
    RingRegistry rings;
    FormulaPtr formula;  // sort-checked
};

FormulaFile parse_formula_file(const std::string& text);
FormulaFile load_formula_file(const std::string& path);

/// One sentence per line; "ring" lines add to a registry shared by later lines.
struct Corpus {
    RingRegistry rings;
    std::vector<FormulaPtr> sentences;
    std::vector<std::string> sources;
};
Corpus parse_corpus(const std::string& text);

std::string read_file(const std::string& path);

}  // namespace motint
