#pragma once

#include "motint/arith.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace motint {

enum class BackendKind { P_ADIC, POWER_SERIES };

/// Z_p (uniformizer p) or F_p[[t]] (uniformizer t).
struct BackendSpec {
    BackendKind kind = BackendKind::P_ADIC;
    std::uint32_t p = 2;
    int precision_default = 1;

    BackendSpec(BackendKind k, std::uint32_t prime, int precision = 1);
    static BackendSpec padic(std::uint32_t prime, int precision = 1) {
        return BackendSpec(BackendKind::P_ADIC, prime, precision);
    }
    static BackendSpec power_series(std::uint32_t prime, int precision = 1) {
        return BackendSpec(BackendKind::POWER_SERIES, prime, precision);
    }

    bool same_ring(const BackendSpec& o) const { return kind == o.kind && p == o.p; }
    std::string name() const;
};

struct BackendMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IndeterminateOrder : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResidueElement {
    std::uint32_t value = 0;
    bool operator==(const ResidueElement&) const = default;
};

struct ExtOrd {
    bool exact = false;
    int v = 0;  // the value when exact, the lower bound otherwise

    static ExtOrd Exact(int v) { return {true, v}; }
    static ExtOrd AtLeast(int n) { return {false, n}; }
    bool operator==(const ExtOrd&) const = default;
    std::string str() const;
};

/// An exact element of Z (inside Z_p) or of F_p[t] (inside F_p[[t]]).
class Element {
public:
    Element() = default;
    static Element integer(const BackendSpec& b, const Integer& z);
    static Element series(const BackendSpec& b, const std::vector<long long>& coeffs);
    static Element pi(const BackendSpec& b);
    /// Canonical residue number i in [0, p^N): base-p digits for power series.
    static Element from_index(const BackendSpec& b, const Integer& i);

    BackendKind kind() const { return kind_; }
    std::uint32_t p() const { return p_; }
    bool is_zero() const;
    /// nullopt for zero.
    std::optional<int> ord() const;
    /// Residue of x * pi^-ord(x); 0 for zero.
    std::uint32_t ac() const;
    /// Residue mod pi.
    std::uint32_t residue() const;

    Element operator+(const Element& o) const;
    Element operator-(const Element& o) const;
    Element operator*(const Element& o) const;
    Element operator-() const;
    Element scaled(const Integer& k) const;
    bool operator==(const Element& o) const;

    /// Canonical representative modulo pi^n.
    Element mod_pi(int n) const;
    /// Exact division by pi^k; requires ord >= k.
    Element div_pi(int k) const;
    Element mul_pi(int k) const;

    const Integer& z() const { return z_; }
    const std::vector<std::uint32_t>& coeffs() const { return c_; }
    /// Inverse of from_index for canonical elements.
    Integer index() const;
    std::string str() const;

private:
    void check(const Element& o) const;
    void trim();

    BackendKind kind_ = BackendKind::P_ADIC;
    std::uint32_t p_ = 2;
    Integer z_;
    std::vector<std::uint32_t> c_;  // no trailing zeros
};

class TruncatedElement {
public:
    TruncatedElement(const BackendSpec& b, const Element& raw, int precision);

    const BackendSpec& backend() const { return backend_; }
    const Element& repr() const { return repr_; }
    int precision() const { return precision_; }
    std::string str() const;

private:
    BackendSpec backend_;
    Element repr_;
    int precision_;
};

TruncatedElement make_truncated(const BackendSpec& b, const Integer& raw, int N);
TruncatedElement make_truncated(const BackendSpec& b, const std::vector<long long>& coeffs, int N);

ExtOrd ord(const TruncatedElement& x);
ResidueElement angular_component(const TruncatedElement& x);

enum class RingOp { ADD, SUB, MUL };
TruncatedElement ring_arithmetic(const TruncatedElement& a, const TruncatedElement& b, RingOp op);

/// p^N, or the count of residues of F_p[t]/t^N.
Integer residue_count(const BackendSpec& b, int N);

}  // namespace motint
