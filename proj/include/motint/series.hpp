#pragma once

#include "motint/arcs.hpp"

#include <json.hpp>

namespace motint {

struct SeriesApprox {
    std::string variety;
    std::uint32_t p = 2;
    int dim = 0;
    std::vector<Integer> lo, hi;  // N_{p,n} in [lo[n], hi[n]]

    std::size_t size() const { return lo.size(); }
    bool exact(std::size_t n) const { return lo[n] == hi[n]; }
    bool all_exact() const;
};

/// Image counts N_{p,0..n_max}; B < 0 means n + 4 at level n.
SeriesApprox poincare_coeffs(const AffineVariety& X, const BackendSpec& b, int n_max, int B = -1,
                             const ArcsConfig& cfg = {});

/// Sum_n N_n T^n = numerator(T) / prod_j (1 - p^{a_j} T^{b_j}).
struct RationalFit {
    std::uint32_t p = 2;
    std::vector<Rational> numerator;
    std::vector<std::pair<int, int>> factors;
    int fitted = 0;    // coefficients determining the numerator
    int holdouts = 0;  // further coefficients verified
    bool holdout_ok = false;

    /// First len coefficients of the expansion.
    std::vector<Rational> expand(std::size_t len) const;
    std::string str() const;
};

struct FitGrid {
    int min_a = 0, max_a = 0;  // defaults -d and 2d when both zero
    int max_b = 3;
    int max_factors = 3;
    int min_holdouts = 2;
};

struct NoFitInGrid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IntervalCoefficientsPresent : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RationalFit fit_rational(const SeriesApprox& s, FitGrid grid = {});
/// Same search on raw coefficients.
RationalFit fit_rational(const std::vector<Integer>& coeffs, std::uint32_t p, int dim, FitGrid grid = {});

struct InsufficientPrimes : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CrossPrimeFit {
    enum class Status { POLYNOMIAL, NON_POLYNOMIAL } status = Status::NON_POLYNOMIAL;
    std::vector<Rational> poly;  // coefficients of p^0, p^1, ...; empty when none fits the fitting primes
    struct Check {
        std::uint32_t p;
        Integer value;
        Rational predicted;
        bool ok;
    };
    std::vector<Check> fit, holdout;

    std::string poly_str() const;
};

/// Sparsest polynomial in p (exponents <= max_exp; by support size, then
/// largest exponent, then lexicographic) through the fitting values, checked on
/// the holdouts.
CrossPrimeFit cross_prime_interpolate(const std::vector<std::pair<std::uint32_t, Integer>>& fit,
                                      const std::vector<std::pair<std::uint32_t, Integer>>& holdout, int max_exp);

CrossPrimeFit cross_prime_fit(const AffineVariety& X, int n, const std::vector<std::uint32_t>& fit_primes,
                              const std::vector<std::uint32_t>& holdout_primes,
                              std::optional<std::pair<std::uint32_t, std::uint32_t>> residue_class = std::nullopt,
                              int B = -1, const ArcsConfig& cfg = {});

std::string poly_in_p_str(const std::vector<Rational>& c);

nlohmann::ordered_json series_json(const SeriesApprox& s, const std::optional<RationalFit>& fit);
std::string series_csv(const SeriesApprox& s);

}  // namespace motint
