#pragma once

#include "motint/arcs.hpp"

#include <json.hpp>

namespace motint {

struct MeasureLevel {
    int n = 0;
    Rational lo, hi;
};

struct MeasureResult {
    Rational lo, hi;
    bool stabilized = false;
    /// "cylinder": all level-n balls decided; "closure": exact self-similarity
    /// system; empty when only brackets are known.
    std::string method;
    int stable_level = -1;
    std::vector<MeasureLevel> history;
    std::vector<std::string> coords;
};

/// Measure of {x in O^d : f(x)} for the Haar measure of total mass 1. Level n
/// brackets it by balls of radius n+1 inside / meeting the set.
MeasureResult set_measure(const FormulaPtr& f, const BackendSpec& b, const std::vector<int>& schedule,
                          const RingRegistry* reg = nullptr, const std::vector<std::string>& vars = {},
                          const EvalConfig& base = EvalConfig());

/// Exact measure of a quantifier-free set in vr variables by zooming into
/// residue classes until the formulas repeat; nullopt when the closure is not
/// reached within max_states or the formula is outside the supported fragment.
std::optional<Rational> closure_measure(const FormulaPtr& f, const BackendSpec& b, const std::vector<std::string>& vars,
                                        int max_states = 400);

/// Integral of |f| over O^d, as the measure of {(x, t) : ord f(x) <= ord t}.
MeasureResult integral_abs(const Poly& f, const BackendSpec& b, const std::vector<int>& schedule,
                           const std::vector<std::string>& vars = {});
/// The auxiliary formula and its coordinates.
std::pair<FormulaPtr, std::vector<std::string>> integral_formula(const Poly& f, const std::vector<std::string>& vars = {});

/// Replaces free occurrences of variables by polynomials.
FormulaPtr substitute_formula(const FormulaPtr& f, const std::map<std::string, Poly>& s);

struct BirationalMapData {
    std::vector<std::string> source, target;
    std::vector<Poly> components;  // target[i] = components[i](source)
    Poly jacobian;
    int e = 0;  // asserted constant order of the Jacobian on the preimage

    /// Checks that jacobian is the determinant of the derivative matrix.
    BirationalMapData(std::vector<std::string> src, std::vector<std::string> tgt, std::vector<Poly> comps, Poly jac,
                      int order);
    static Poly jacobian_of(const std::vector<std::string>& src, const std::vector<Poly>& comps);
};

/// "source u, v" / "target x, y" / "x = u" / "y = u*v" / "jacobian u" / "order 1".
BirationalMapData parse_birational_map(const std::string& text);

struct NonConstantJacobianOrder : std::runtime_error {
    std::vector<Element> witness;
    int radius;
    NonConstantJacobianOrder(const std::string& msg, std::vector<Element> w, int r)
        : std::runtime_error(msg), witness(std::move(w)), radius(r) {}
};

struct CovCheck {
    bool ok = false;
    MeasureResult target, source;  // nu_X(h) and nu_Y(preimage)
    Rational scaled_source;        // p^{-e} nu_Y(preimage) when exact
};

/// nu_X(h) = p^{-e} nu_Y(map^{-1}(h)), both sides at precision N.
CovCheck change_of_variables_check(const BirationalMapData& map, const FormulaPtr& h, const BackendSpec& b, int N,
                                   const RingRegistry* reg = nullptr);

nlohmann::ordered_json measure_json(const std::string& formula, const BackendSpec& b, const MeasureResult& m);

}  // namespace motint
