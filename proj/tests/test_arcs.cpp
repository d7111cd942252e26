#include "doctest.h"
#include "motint/arcs.hpp"
#include "support.hpp"

#include <set>

using namespace motint;
using namespace support;

static const std::string kData = MOTINT_DATA_DIR;

static AffineVariety var(const std::string& name) { return load_variety(kData + "/varieties/" + name + ".var"); }

static JetPoint jet(const BackendSpec& b, std::vector<long> xs, int n) {
    std::vector<TruncatedElement> pt;
    for (long x : xs) pt.push_back(make_truncated(b, x, n + 1));
    return make_jet(b, pt);
}


const std::vector<std::string> kShipped = {"point", "circle", "axes", "cusp", "plane"};

TEST_CASE("variety files") {
    auto X = parse_variety("# c\ndim 2\nx^2 + y^2 = 1\n");
    CHECK(X.dim() == 2);
    CHECK(X.vars == std::vector<std::string>{"x", "y"});
    CHECK(X.eqs.size() == 1);
    CHECK(X.eqs[0].str() == parse_poly("x^2 + y^2 - 1").str());
    auto A = parse_variety("dim 3\n");
    CHECK(A.vars.size() == 3);
    CHECK_THROWS_AS(parse_variety("x^2\n"), ParseError);
    CHECK_THROWS_AS(parse_variety("dim 1\nx*y\n"), ParseError);
    CHECK_THROWS_AS(parse_variety("dim 1\nx/2\n"), ParseError);
    for (auto& n : kShipped) CHECK_NOTHROW(var(n));
}

TEST_CASE("jet counts") {
    CHECK(jet_count(var("axes"), BackendSpec::padic(3), 1) == 21);
    CHECK(jet_count(parse_variety("dim 1\n"), BackendSpec::padic(7), 3) == 2401);
    CHECK(jet_count(var("cusp"), BackendSpec::padic(5), 0) == 5);
    for (auto& name : kShipped)
        for (std::uint32_t p : {2u, 3u, 5u})
            for (int n = 0; n <= 2; ++n)
                for (auto b : {BackendSpec::padic(p), BackendSpec::power_series(p)}) {
                    CAPTURE(name);
                    CAPTURE(p);
                    CAPTURE(n);
                    CHECK(jet_count(var(name), b, n) == Integer(static_cast<long>(brute_jets(var(name), b, n))));
                }
    ArcsConfig tiny;
    tiny.budget = 10;
    CHECK_THROWS_AS(jet_count(var("circle"), BackendSpec::padic(5), 3, tiny), BudgetExceeded);
}

TEST_CASE("lift certificates") {
    auto b = BackendSpec::padic(5);
    auto C = var("circle");
    auto K = var("cusp");
    auto pt = jet(b, {1, 0}, 0);
    auto s = lift_certificate(C, b, pt, 4);
    CHECK(s.kind == LiftStatus::Kind::LIFTABLE);
    CHECK(check_lift_certificate(C, b, pt, s));
    auto s0 = lift_certificate(C, b, pt, 0);
    CHECK(s0.kind == LiftStatus::Kind::LIFTABLE);
    CHECK(s0.cert->e == 0);

    auto q = jet(b, {5, 5}, 1);
    auto t = lift_certificate(K, b, q, 5);
    CHECK(t.kind == LiftStatus::Kind::NOT_LIFTABLE);
    CHECK(t.depth - (q.n + 1) == 1);
    CHECK(check_lift_certificate(K, b, q, t));

    auto z = jet(b, {0, 0}, 0);
    auto u = lift_certificate(K, b, z, 0);
    CHECK(u.kind == LiftStatus::Kind::UNKNOWN);
    CHECK(u.depth == 1);
    auto w = lift_certificate(K, b, z, 2);
    CHECK(w.kind == LiftStatus::Kind::LIFTABLE);
    CHECK(check_lift_certificate(K, b, z, w));

    CHECK_THROWS_AS(lift_certificate(C, b, jet(b, {1, 1}, 0), 3), std::invalid_argument);

    // Every certificate for every jet of the shipped varieties re-checks.
    for (auto& name : kShipped)
        for (auto bk : {BackendSpec::padic(3), BackendSpec::power_series(3), BackendSpec::padic(5)})
            for (int n = 0; n <= 1; ++n) {
                auto X = var(name);
                for (auto& j : enumerate_jets(X, bk, n)) {
                    auto st = lift_certificate(X, bk, j, 3);
                    CAPTURE(name);
                    CAPTURE(n);
                    CHECK(check_lift_certificate(X, bk, j, st));
                }
            }
}

TEST_CASE("image count examples") {
    for (std::uint32_t p : {2u, 5u, 11u})
        for (int n = 0; n <= 3; ++n) {
            auto r = image_count(var("point"), BackendSpec::padic(p), n, n + 4);
            CHECK(r.exact());
            CHECK(r.lo == 1);
        }
    CHECK(image_count(var("circle"), BackendSpec::padic(5), 1, 5).lo == 20);
    auto ax = image_count(var("axes"), BackendSpec::padic(3), 1, 5);
    CHECK(ax.exact());
    CHECK(ax.lo == 17);
}

TEST_CASE("image count agrees with the brute-force oracle") {
    const int B = 4;
    for (auto& name : kShipped) {
        auto X = var(name);
        for (std::uint32_t p : {2u, 3u, 5u, 7u})
            for (int n = 0; n <= 2; ++n) {
                CAPTURE(name);
                CAPTURE(p);
                CAPTURE(n);
                auto [lift, undecided] = oracle_image(X, p, n, B);
                REQUIRE(undecided == 0);
                auto r = image_count(X, BackendSpec::padic(p), n, B);
                CHECK(r.exact());
                CHECK(r.lo == Integer(static_cast<long>(lift)));
            }
    }
}

TEST_CASE("fast and per-jet image counts agree") {
    for (auto& name : kShipped)
        for (auto b : {BackendSpec::padic(3), BackendSpec::power_series(3), BackendSpec::padic(5),
                       BackendSpec::power_series(5)})
            for (int n = 0; n <= 2; ++n) {
                CAPTURE(name);
                CAPTURE(n);
                auto a = image_count(var(name), b, n, n + 4);
                auto c = image_count_per_jet(var(name), b, n, n + 4);
                CHECK(a.lo == c.lo);
                CHECK(a.hi == c.hi);
            }
}

TEST_CASE("smooth case law") {
    auto C = var("circle");
    for (std::uint32_t p : {5u, 7u, 13u}) {
        long pts = p % 4 == 1 ? p - 1 : p + 1;
        for (int n = 0; n <= 4; ++n) {
            auto r = image_count(C, BackendSpec::padic(p), n, n + 4);
            CHECK(r.exact());
            CHECK(r.lo == Integer(pts) * ipow(Integer(p), n));
        }
    }
}

TEST_CASE("monotone image bound and projection") {
    auto b = BackendSpec::padic(3);
    for (auto& name : kShipped) {
        auto X = var(name);
        for (int n = 0; n <= 2; ++n) {
            auto lo = image_count(X, b, n, n + 4), hi = image_count(X, b, n + 1, n + 5);
            CHECK(hi.lo <= lo.lo * ipow(Integer(3), X.dim()));
            std::set<std::vector<Integer>> base;
            for (auto& j : enumerate_jets(X, b, n))
                if (lift_certificate(X, b, j, n + 4).kind == LiftStatus::Kind::LIFTABLE) {
                    std::vector<Integer> k;
                    for (auto& c : j.coords) k.push_back(c.index());
                    base.insert(k);
                }
            for (auto& j : enumerate_jets(X, b, n + 1))
                if (lift_certificate(X, b, j, n + 5).kind == LiftStatus::Kind::LIFTABLE) {
                    std::vector<Integer> k;
                    for (auto& c : j.coords) k.push_back(c.mod_pi(n + 1).index());
                    CHECK(base.count(k) == 1);
                }
        }
    }
}

TEST_CASE("cusp image counts") {
    const std::vector<long> p5 = {5, 21, 103, 521, 2603, 13011};
    for (int n = 0; n < static_cast<int>(p5.size()); ++n) {
        auto r = image_count(var("cusp"), BackendSpec::padic(5), n, n + 4);
        CHECK(r.exact());
        CHECK(r.lo == p5[n]);
    }
}

TEST_CASE("truncation counts") {
    auto b5 = BackendSpec::padic(5);
    for (int n = 0; n <= 2; ++n) CHECK(truncation_count(parse("x = x"), b5, n, 2, nullptr, {}, {"x"}).lo == ipow(Integer(5), n + 1));
    auto sq = truncation_count(parse("E y:vr. y^2 - x = 0"), b5, 0, 4);
    CHECK(sq.exact());
    CHECK(sq.lo == 3);
    auto K = var("cusp");
    auto t = truncation_count(K.lift_formula(), b5, 1, 5);
    auto i = image_count(K, b5, 1, 5);
    CHECK(t.exact());
    CHECK(t.lo == i.lo);
    auto C = var("circle");
    CHECK(truncation_count(C.lift_formula(), BackendSpec::power_series(3), 1, 5).lo ==
          image_count(C, BackendSpec::power_series(3), 1, 5).lo);
    CHECK_THROWS_AS(truncation_count(parse("ord(x) <= n"), b5, 1, 2), std::invalid_argument);
}

TEST_CASE("weak stability") {
    CHECK(weak_stability_probe(parse("ord(x) >= 1"), BackendSpec::padic(3), 1, 2, 3));
    CHECK_FALSE(weak_stability_probe(parse("x = 0"), BackendSpec::padic(3), 1, 2, 3));
    auto C = var("circle");
    for (int n = 0; n <= 1; ++n) CHECK(weak_stability_probe(C.lift_formula(), BackendSpec::padic(5), n, n + 1, 3, nullptr, {}, {}, 1));
    CHECK_FALSE(weak_stability_probe(C.lift_formula(), BackendSpec::padic(5), 0, 1, 3));
    CHECK_THROWS_AS(truncation_count(parse("x = y"), BackendSpec::padic(3), 0, 1, nullptr, {}, {"x"}),
                    std::invalid_argument);
}
