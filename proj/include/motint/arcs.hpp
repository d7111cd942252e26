#pragma once

#include "motint/eval.hpp"

#include <optional>

namespace motint {

struct AffineVariety {
    std::string name;
    std::vector<std::string> vars;  // ambient coordinates, size d
    std::vector<Poly> eqs;

    int dim() const { return static_cast<int>(vars.size()); }
    /// Conjunction of the equations as a formula in the coordinates.
    FormulaPtr lift_formula() const;
};

/// "dim d" line, optional "vars x, y" line, then one polynomial per line
/// ("P" or "P = Q"); '#' starts a comment.
AffineVariety parse_variety(const std::string& text, const std::string& name = "");
AffineVariety load_variety(const std::string& path);

struct ArcsConfig {
    std::uint64_t budget = default_budget();  // tree nodes
    unsigned threads = 0;
};

/// #X(Z/p^{n+1}) by digit-by-digit extension with ball pruning.
Integer jet_count(const AffineVariety& X, const BackendSpec& b, int n, const ArcsConfig& cfg = {});

struct NewtonCert {
    std::vector<Element> witness;  // lies over the jet
    std::vector<int> vars;         // coordinates of the square minor
    int u = 0;                     // min ord f_i(witness)
    int e = 0;                     // ord det of the minor at the witness
    bool exact_root = false;       // witness is an exact zero of every equation
};

struct LiftStatus {
    enum class Kind { LIFTABLE, NOT_LIFTABLE, UNKNOWN };
    Kind kind = Kind::UNKNOWN;
    /// NOT_LIFTABLE: no solution modulo pi^depth extends the jet.
    /// UNKNOWN: the precision explored, n + 1 + B.
    int depth = 0;
    std::optional<NewtonCert> cert;
};

const char* lift_kind_name(LiftStatus::Kind k);

struct JetPoint {
    std::vector<Element> coords;  // canonical residues mod pi^{n+1}
    int n = 0;
};

JetPoint make_jet(const BackendSpec& b, const std::vector<TruncatedElement>& pt);

LiftStatus lift_certificate(const AffineVariety& X, const BackendSpec& b, const JetPoint& pt, int B,
                            const ArcsConfig& cfg = {});

/// Re-checks a LIFTABLE or NOT_LIFTABLE verdict without the search code.
bool check_lift_certificate(const AffineVariety& X, const BackendSpec& b, const JetPoint& pt, const LiftStatus& st);

struct ImageCount {
    Integer lo, hi;
    bool exact() const { return lo == hi; }
    std::string status() const { return exact() ? "EXACT" : "PARTIAL"; }
    std::uint64_t unknown_jets = 0;
};

/// N_{p,n}: jets mod pi^{n+1} that lift to X(Z_p). Uniform balls are counted
/// wholesale; remaining jets go through lift_certificate.
ImageCount image_count(const AffineVariety& X, const BackendSpec& b, int n, int B, const ArcsConfig& cfg = {});
/// Same number, classifying every jet one by one.
ImageCount image_count_per_jet(const AffineVariety& X, const BackendSpec& b, int n, int B,
                               const ArcsConfig& cfg = {});

/// Enumerates X(Z/p^{n+1}) as canonical residue tuples.
std::vector<JetPoint> enumerate_jets(const AffineVariety& X, const BackendSpec& b, int n, const ArcsConfig& cfg = {});

/// Coordinates of h: `vars` if given (it may name variables absent from f),
/// else the free variables of f in sorted order. All must be of sort vr.
std::vector<std::string> coordinates_of(const FormulaPtr& f, const std::vector<std::string>& vars = {});

/// #pi_n(h) for h defined by f.
ImageCount truncation_count(const FormulaPtr& f, const BackendSpec& b, int n, int B, const RingRegistry* reg = nullptr,
                            const ArcsConfig& cfg = {}, const std::vector<std::string>& vars = {});

/// count_m == count_n * p^{(m-n) dim}, both exact; dim < 0 means the number
/// of coordinates.
bool weak_stability_probe(const FormulaPtr& f, const BackendSpec& b, int n, int m, int B,
                          const RingRegistry* reg = nullptr, const ArcsConfig& cfg = {},
                          const std::vector<std::string>& vars = {}, int dim = -1);

}  // namespace motint
