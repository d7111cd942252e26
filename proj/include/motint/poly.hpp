#pragma once

#include "motint/arith.hpp"
#include "motint/dvr.hpp"

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace motint {

/// Sorted (name, exponent) pairs, exponents positive.
using Monomial = std::vector<std::pair<std::string, int>>;

/// Name of the uniformizer constant in polynomial text.
inline const std::string kPi = "PI";

/// Multivariate polynomial over Z in named variables (PI included as a name).
class Poly {
public:
    Poly() = default;
    static Poly constant(const Integer& c);
    static Poly var(const std::string& name);

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly operator-() const;
    Poly pow(unsigned e) const;
    bool operator==(const Poly& o) const { return terms_ == o.terms_; }
    bool operator<(const Poly& o) const { return terms_ < o.terms_; }

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    Integer constant_term() const;
    int total_degree() const;
    int degree_in(const std::string& v) const;
    std::set<std::string> vars() const;
    Poly derivative(const std::string& v) const;
    Poly substitute(const std::map<std::string, Poly>& s) const;
    Integer coeff(const Monomial& m) const;
    const std::map<Monomial, Integer>& terms() const { return terms_; }

    std::string str() const;

private:
    void add_term(const Monomial& m, const Integer& c);
    std::map<Monomial, Integer> terms_;
};

/// Polynomial with coefficients in the backend ring and variables bound to slots.
struct CTerm {
    Element coef;
    std::vector<std::pair<int, int>> pw;  // (slot, exponent)
};

class CPoly {
public:
    CPoly() = default;
    /// slot_of maps variable names to slots; PI is substituted by the uniformizer.
    CPoly(const Poly& f, const BackendSpec& b, const std::function<int(const std::string&)>& slot_of);

    Element eval(const std::vector<Element>& point) const;
    bool is_zero() const { return terms_.empty(); }
    int degree() const { return degree_; }
    const std::vector<int>& slots() const { return slots_; }
    const std::vector<CTerm>& terms() const { return terms_; }
    CPoly derivative(int slot) const;
    CPoly operator+(const CPoly& o) const;
    CPoly operator-(const CPoly& o) const;
    CPoly operator*(const CPoly& o) const;

private:
    BackendSpec backend_ = BackendSpec::padic(2);
    std::vector<CTerm> terms_;
    std::vector<int> slots_;
    int degree_ = 0;
    void finish();
    static CPoly from_map(const BackendSpec& b, const std::map<std::vector<std::pair<int, int>>, Element>& acc);
};

}  // namespace motint
