#pragma once

#include "motint/poly.hpp"

#include <vector>

namespace motint {

/// Radius of a variable known exactly.
constexpr int kExact = 1 << 28;

/// What is known about ord g over a product of balls.
struct OrdInfo {
    enum class Kind { ZERO, EXACT, AT_LEAST };
    Kind kind = Kind::ZERO;
    int v = 0;
    std::uint32_t ac = 0;

    bool exact() const { return kind == Kind::EXACT; }
    /// Uniform lower bound (kExact for ZERO).
    int lower() const { return kind == Kind::ZERO ? kExact : v; }
};

/// A polynomial together with its first partials, for first-order Taylor
/// bounds over balls center + pi^r * (everything).
class TaylorPoly {
public:
    TaylorPoly() = default;
    explicit TaylorPoly(CPoly f);

    OrdInfo over(const std::vector<Element>& centers, const std::vector<int>& radii) const;
    const CPoly& poly() const { return f_; }
    const CPoly* partial(int slot) const;

private:
    CPoly f_;
    std::vector<std::pair<int, CPoly>> d_;
};

}  // namespace motint
