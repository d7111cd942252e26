#include "doctest.h"
#include "motint/measure.hpp"
#include "support.hpp"

#include <random>

using namespace motint;
using namespace support;

static const std::string kData = MOTINT_DATA_DIR;

static Rational q(long a, long b = 1) {
    Rational r(a, b);
    r.canonicalize();
    return r;
}

static BirationalMapData load_map(const std::string& name) {
    return parse_birational_map(read_file(kData + "/maps/" + name + ".map"));
}

static std::vector<int> levels(int k) {
    std::vector<int> s;
    for (int n = 0; n < k; ++n) s.push_back(n);
    return s;
}

TEST_CASE("set_measure examples") {
    auto b3 = BackendSpec::padic(3);
    auto r = set_measure(parse("ord(x) >= 1"), b3, levels(3));
    CHECK(r.stabilized);
    CHECK(r.method == "cylinder");
    CHECK(r.stable_level == 0);
    CHECK(r.lo == q(1, 3));

    for (unsigned p : {2u, 3u, 5u}) {
        auto z = set_measure(parse("x = 0"), BackendSpec::padic(p), levels(3));
        REQUIRE(z.history.size() == 3);
        for (auto& lv : z.history) {
            CHECK(lv.lo == 0);
            CHECK(lv.hi == pinv(p, lv.n + 1));
        }
        CHECK(z.stabilized);
        CHECK(z.method == "closure");
        CHECK(z.lo == 0);
    }

    auto sq = set_measure(parse("E y:vr. y^2 - x = 0"), BackendSpec::padic(5), levels(4));
    CHECK_FALSE(sq.stabilized);
    CHECK(sq.lo <= q(5, 12));
    CHECK(sq.hi >= q(5, 12));
    CHECK(sq.hi - sq.lo < q(1, 20));
    for (auto& lv : sq.history) CHECK((lv.lo <= q(5, 12) && q(5, 12) <= lv.hi));
}

TEST_CASE("integral of |f|") {
    auto b3 = BackendSpec::padic(3);
    CHECK(integral_abs(parse_poly("x"), b3, levels(2)).lo == q(3, 4));
    CHECK(integral_abs(parse_poly("x^2"), b3, levels(2)).lo == q(9, 13));
    auto one = integral_abs(parse_poly("1"), b3, levels(2), {"x"});
    CHECK(one.stabilized);
    CHECK(one.lo == 1);
    CHECK_THROWS(integral_abs(Poly(), b3, levels(1)));

    for (unsigned p : {2u, 3u, 5u})
        for (int m = 1; m <= 4; ++m) {
            auto r = integral_abs(parse_poly("x^" + std::to_string(m)), BackendSpec::padic(p), levels(2));
            CHECK(r.stabilized);
            CHECK(r.lo == abs_power_oracle(p, m));
            CHECK(r.lo == r.hi);
            auto s = integral_abs(parse_poly("x^" + std::to_string(m)), BackendSpec::power_series(p), levels(2));
            CHECK(s.lo == abs_power_oracle(p, m));
        }
    CHECK(integral_abs(parse_poly("x"), BackendSpec::padic(2), levels(1)).lo == q(2, 3));
    CHECK(integral_abs(parse_poly("x^2"), BackendSpec::padic(5), levels(1)).lo == q(25, 31));
    // |3x| over Z_3 is |x|/3.
    CHECK(integral_abs(parse_poly("3*x"), b3, levels(1)).lo == q(1, 4));
    // |xy| = |x||y| has integral 9/16; the closure does not factor out units,
    // so only brackets are available.
    auto xy = integral_abs(parse_poly("x*y"), b3, levels(2));
    CHECK_FALSE(xy.stabilized);
    CHECK(xy.lo <= q(9, 16));
    CHECK(xy.hi >= q(9, 16));
}

TEST_CASE("closure agrees with cylinder values") {
    auto b = BackendSpec::padic(3);
    for (const char* s : {"ord(x) >= 1", "ord(x) = 1 & ord(y) >= 1", "ord(x - y) >= 2 | ord(x) = 0",
                          "ord(x^2 + y) ~ 1 mod 2 & ord(x^2 + y) <= 2", "!(ord(x*y - 1) >= 1)"}) {
        auto f = parse(s);
        auto cyl = set_measure(f, b, levels(3), nullptr, {"x", "y"});
        REQUIRE(cyl.stabilized);
        CHECK(cyl.method == "cylinder");
        auto cl = closure_measure(f, b, {"x", "y"});
        REQUIRE(cl);
        CHECK(*cl == cyl.lo);
    }
    CHECK(*closure_measure(parse("x != 0"), b, {"x"}) == 1);
    CHECK(*closure_measure(parse("ord(x) ~ 0 mod 2"), b, {"x"}) == q(3, 4));
    CHECK_FALSE(closure_measure(parse("E y:vr. y^2 - x = 0"), b, {"x"}));
}


TEST_CASE("additivity and normalization on random cylinders") {
    std::mt19937 rng(20261015);
    const std::vector<std::string> xy = {"x", "y"};
    int pairs = 0;
    for (unsigned p : {2u, 3u}) {
        auto b = BackendSpec::padic(p);
        auto full = set_measure(parse("x - x = 0"), b, levels(3), nullptr, xy);
        for (auto& lv : full.history) {
            CHECK(lv.lo == 1);
            CHECK(lv.hi == 1);
        }
        CHECK(full.lo == 1);
        for (int i = 0; i < 60; ++i) {
            std::string s1 = random_cylinder(rng), s2 = random_cylinder(rng);
            auto m = [&](const std::string& s) {
                auto r = set_measure(parse(s), b, levels(3), nullptr, xy);
                REQUIRE_MESSAGE(r.stabilized, s);
                REQUIRE(r.method == "cylinder");
                return r.lo;
            };
            Rational a = m(s1), c = m(s2);
            Rational u = m("(" + s1 + ") | (" + s2 + ")");
            Rational n = m("(" + s1 + ") & (" + s2 + ")");
            CHECK_MESSAGE(u == a + c - n, s1 << " / " << s2);
            CHECK(m("!(" + s1 + ")") == 1 - a);
            ++pairs;
        }
    }
    CHECK(pairs >= 100);
}

TEST_CASE("countable family ord x = n") {
    for (unsigned p : {2u, 3u, 5u}) {
        auto b = BackendSpec::padic(p);
        const int K = 5;
        Rational partial = 0;
        for (int n = 0; n < K; ++n) {
            auto r = set_measure(parse("ord(x) = " + std::to_string(n)), b, levels(n + 1));
            REQUIRE(r.stabilized);
            CHECK(r.lo == (1 - pinv(p, 1)) * pinv(p, n));
            partial += r.lo;
        }
        auto all = set_measure(parse("x != 0"), b, levels(2));
        REQUIRE(all.stabilized);
        CHECK(all.lo == 1);
        CHECK(all.lo - partial <= pinv(p, K));
        CHECK(all.lo - partial >= 0);
    }
}

TEST_CASE("brackets are monotone") {
    auto b = BackendSpec::padic(3);
    for (const char* s : {"E y:vr. y^2 - x = 0", "x = 0", "ord(x) <= ord(y) + 0", "x^2 - y^3 = 0"}) {
        auto r = set_measure(parse(s), b, levels(4), nullptr, {"x", "y"});
        for (std::size_t i = 1; i < r.history.size(); ++i) {
            CHECK(r.history[i - 1].lo <= r.history[i].lo);
            CHECK(r.history[i - 1].hi >= r.history[i].hi);
        }
        for (auto& lv : r.history) CHECK(lv.lo <= lv.hi);
    }
}

TEST_CASE("birational map data") {
    auto m = load_map("blowup");
    CHECK(m.source == std::vector<std::string>{"u", "v"});
    CHECK(m.target == std::vector<std::string>{"x", "y"});
    CHECK(m.e == 1);
    CHECK(m.jacobian == parse_poly("u"));
    CHECK_THROWS_AS(parse_birational_map("source u, v\ntarget x, y\nx = u\ny = u*v\njacobian v\norder 1\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_birational_map("source u\ntarget x, y\nx = u\n"), ParseError);
    CHECK(BirationalMapData::jacobian_of({"u", "v"}, {parse_poly("u + v"), parse_poly("u - v")}) == parse_poly("-2"));
    auto f = substitute_formula(parse("ord(x) = 1 & E z:vr. z^2 - y = 0"), {{"x", parse_poly("u")}, {"y", parse_poly("u*v")}});
    CHECK(render(f) == render(parse("ord(u) = 1 & E z:vr. z^2 - u*v = 0")));
    CHECK_THROWS(substitute_formula(parse("E z:vr. z - x = 0"), {{"x", parse_poly("z")}}));
}

TEST_CASE("change of variables") {
    auto h = parse("ord(x) = 1 & ord(y) >= 1");
    for (unsigned p : {3u, 5u}) {
        auto c = change_of_variables_check(load_map("blowup"), h, BackendSpec::padic(p), 2);
        CHECK(c.ok);
        CHECK(c.target.lo == (p - 1) * pinv(p, 3));
        CHECK(c.source.lo == (p - 1) * pinv(p, 2));
    }
    auto c5 = change_of_variables_check(load_map("blowup"), h, BackendSpec::padic(5), 2);
    CHECK(c5.target.lo == q(4, 125));
    CHECK(c5.source.lo == q(4, 25));
    CHECK(c5.scaled_source == q(4, 125));

    for (unsigned p : {2u, 3u, 5u, 7u}) {
        auto b = BackendSpec::padic(p);
        auto s = change_of_variables_check(load_map("scaling"), parse("ord(x) >= 1"), b, 2);
        CHECK(s.ok);
        CHECK(s.target.lo == pinv(p, 1));
        CHECK(s.source.lo == 1);
        auto id = change_of_variables_check(load_map("identity"), parse("ord(x - y) >= 1 | ord(x) = 0"), b, 2);
        CHECK(id.ok);
        CHECK(id.target.lo == id.source.lo);
    }

    // ord(x) >= 0 pulls back to all of Z_p^2, where ord(u) takes every value.
    try {
        change_of_variables_check(load_map("blowup"), parse("ord(x) >= 0 & ord(y) >= 1"), BackendSpec::padic(3), 2);
        FAIL("expected NonConstantJacobianOrder");
    } catch (const NonConstantJacobianOrder& e) {
        CHECK(e.witness.size() == 2);
        CHECK(e.radius == 2);
    }
}

TEST_CASE("measure json") {
    auto b = BackendSpec::padic(3);
    auto r = set_measure(parse("ord(x) >= 1"), b, levels(2));
    auto j = measure_json("ord(x) >= 1", b, r);
    CHECK(j["p"] == 3);
    CHECK(j["value"] == "1/3");
    CHECK(j["stabilized"] == true);
    CHECK(j["levels"].size() == 1);
}
