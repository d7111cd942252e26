#pragma once

#include "motint/arith.hpp"
#include "motint/pas.hpp"

#include <map>
#include <optional>

namespace motint {

/// Polynomial over Q in one variable, coefficients low to high, no trailing zeros.
class QPoly {
public:
    QPoly() = default;
    explicit QPoly(std::vector<Rational> c);
    static QPoly constant(const Rational& c);
    static QPoly monomial(const Rational& c, int e);

    const std::vector<Rational>& c() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    Rational lead() const { return c_.empty() ? Rational(0) : c_.back(); }

    QPoly operator+(const QPoly& o) const;
    QPoly operator-(const QPoly& o) const;
    QPoly operator*(const QPoly& o) const;
    QPoly operator-() const;
    QPoly scaled(const Rational& k) const;
    bool operator==(const QPoly& o) const { return c_ == o.c_; }

    /// Quotient and remainder by a nonzero divisor.
    std::pair<QPoly, QPoly> divmod(const QPoly& d) const;
    Rational eval(const Rational& x) const;
    std::string str(const std::string& var) const;

private:
    void trim();
    std::vector<Rational> c_;
};

/// Phi_d(L) with integer coefficients.
const QPoly& cyclotomic(int d);

struct PoleAtOne : std::domain_error {
    using std::domain_error::domain_error;
};
struct NotInLocalizedRing : std::domain_error {
    using std::domain_error::domain_error;
};

/// num(L) / (L^k * prod_d Phi_d(L)^{e_d}) in lowest terms. Every product of
/// factors L^i - 1 is such a denominator and conversely up to the numerator.
class MotiveElem {
public:
    MotiveElem() = default;
    MotiveElem(const Rational& c);  // NOLINT: constants convert implicitly
    static MotiveElem L();
    static MotiveElem from_poly(const QPoly& num);
    /// 1 / (L^i - 1).
    static MotiveElem inv_Lpow_minus_one(int i);
    static MotiveElem make(const QPoly& num, int k, const std::map<int, int>& e);

    const QPoly& numerator() const { return num_; }
    int L_power() const { return k_; }
    const std::map<int, int>& cyclotomic_exponents() const { return e_; }
    bool is_zero() const { return num_.is_zero(); }

    MotiveElem operator+(const MotiveElem& o) const;
    MotiveElem operator-(const MotiveElem& o) const;
    MotiveElem operator*(const MotiveElem& o) const;
    MotiveElem operator-() const;
    /// Division is defined when the divisor's numerator is a constant times
    /// L^j times cyclotomic factors.
    MotiveElem operator/(const MotiveElem& o) const;
    MotiveElem pow(int e) const;
    bool operator==(const MotiveElem& o) const;
    bool operator!=(const MotiveElem& o) const { return !(*this == o); }

    MotiveElem inverse() const;
    /// Denominator rendered as L^k and (L^i - 1) factors.
    std::string str() const;

private:
    void normalize();
    QPoly num_;
    int k_ = 0;
    std::map<int, int> e_;
};

MotiveElem parse_motive(const std::string& text);

Rational specialize_numeric(const MotiveElem& e, std::uint32_t p);
/// L -> 1 limit; PoleAtOne when a factor L - 1 survives in the denominator.
Rational specialize_euler(const MotiveElem& e);

/// Hodge-Deligne value: the same rational function of w = uv.
struct HodgeValue {
    MotiveElem in_w;
    Rational eval(const Rational& u, const Rational& v) const;
    std::string str() const;
};
HodgeValue specialize_hodge(const MotiveElem& e);

// ---- cyclic covers ----

/// y^m = f(x) over X = A^1 minus {f = 0}, group Z/m. Subgroups are named by
/// their order.
struct KummerCover {
    int m = 2;
    Poly f;  // in x
    std::string name;
    MotiveElem Y, X;
    std::map<int, MotiveElem> quotients;  // order of A -> [Y/A]

    std::vector<int> subgroups() const;  // divisors of m, increasing
    /// [Y/A]; [Y/1] = [Y] and [Y/G] = [X] unless catalogued.
    MotiveElem quotient(int order) const;
};

struct MissingQuotientClass : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadReduction : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// One record per non-comment line:
///   m=2; f=x; classes: Y=L-1, X=L-1; quotients: 1=L-1, 2=L-1
std::vector<KummerCover> parse_cover_catalog(const std::string& text);
std::vector<KummerCover> load_cover_catalog(const std::string& path);

/// chi_c of the formula "x lifts to Y/C with decomposition group exactly C",
/// i.e. the recursion term u(C) of |C|[Y/C] = sum_{A <= C} |A| u(A).
MotiveElem recursion_term(const KummerCover& cov, int order);
/// chi_c of "x in X has decomposition group C": |C|/|N_G(C)| * u(C).
MotiveElem chi_c_cover(const KummerCover& cov, int order);

/// Good primes: p prime, p = 1 mod m, p not dividing the leading coefficient of f.
bool good_prime(const KummerCover& cov, std::uint32_t p);

/// Number of x in X(F_p) whose decomposition group has the given order.
Integer decomposition_count(const KummerCover& cov, int order, std::uint32_t p);

struct RecursionCheck {
    int order = 1;
    std::uint32_t p = 0;
    Integer lhs, rhs;                 // |C| #(Y/C)(F_p) and sum_A |A| u(A)_p
    Integer partition_sum, x_points;  // sum_C decomposition counts, #X(F_p)
    Rational chi_value;               // specialize_numeric(chi_c_cover(C), p)
    Integer decomposition;            // decomposition_count(C, p)
    bool ok = false;
};

RecursionCheck verify_recursion(const KummerCover& cov, int order, std::uint32_t p);

}  // namespace motint
