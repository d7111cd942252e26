#include "motint/ball.hpp"

#include <algorithm>

namespace motint {

TaylorPoly::TaylorPoly(CPoly f) : f_(std::move(f)) {
    for (int s : f_.slots()) d_.emplace_back(s, f_.derivative(s));
}

const CPoly* TaylorPoly::partial(int slot) const {
    for (auto& [s, d] : d_)
        if (s == slot) return &d;
    return nullptr;
}

OrdInfo TaylorPoly::over(const std::vector<Element>& centers, const std::vector<int>& radii) const {
    Element val = f_.eval(centers);
    auto u = val.ord();
    int w = kExact;
    int rmin = kExact;
    for (auto& [s, d] : d_) {
        int r = radii[s];
        if (r >= kExact) continue;
        rmin = std::min(rmin, r);
        auto e = d.eval(centers).ord();
        if (e) w = std::min(w, *e + r);
    }
    if (rmin < kExact && f_.degree() >= 2) w = std::min(w, 2 * rmin);
    OrdInfo out;
    if (u && *u < w) {
        out.kind = OrdInfo::Kind::EXACT;
        out.v = *u;
        out.ac = val.ac();
    } else if (w >= kExact) {
        out.kind = u ? OrdInfo::Kind::EXACT : OrdInfo::Kind::ZERO;
        if (u) {
            out.v = *u;
            out.ac = val.ac();
        }
    } else {
        out.kind = OrdInfo::Kind::AT_LEAST;
        out.v = w;
    }
    return out;
}

}  // namespace motint
