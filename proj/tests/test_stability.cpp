#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rotnum/stability.hpp"

using namespace rotnum;

namespace {

Mat rot2(double a) {
    Mat r(2, 2);
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

void check_lift_invariants(const FiberedConjugacy& h) {
    for (size_t s = 0; s < h.knots.size(); ++s) {
        const auto& ks = h.knots[s];
        const auto& vs = h.values[s];
        REQUIRE(ks.size() == vs.size());
        for (size_t j = 1; j < ks.size(); ++j) {
            REQUIRE(ks[j] > ks[j - 1]);
            CHECK(vs[j] > vs[j - 1]);
        }
        // lift(theta + 1) = lift(theta) + 1 by the interpolation rule
        for (double t : {0.07, 0.31, 0.93})
            CHECK(h.evaluate(s, t + 1.0) - h.evaluate(s, t) ==
                  Catch::Approx(1.0).margin(1e-10));
    }
}

}  // namespace

TEST_CASE("conjugating a dominated cocycle with itself gives the identity") {
    auto sys = SymbolicSystem::full_shift(2);
    auto c = MatrixCocycle::constant(sys, diag2(2.0, 0.5));
    std::vector<BasePoint> samples = {BasePoint::periodic({0}), BasePoint::periodic({0, 1})};
    auto h = conjugate_projective_pair(c, c, samples);
    CHECK(h.defect <= 1e-12);
    CHECK(h.identity_distance() <= 1e-10);
    check_lift_invariants(h);
}

TEST_CASE("conjugacy between nearby diagonal cocycles is a small exact conjugacy") {
    auto sys = SymbolicSystem::full_shift(2);
    auto ca = MatrixCocycle::constant(sys, diag2(2.0, 0.5));
    auto cb = MatrixCocycle::constant(sys, diag2(2.1, 1.0 / 2.1));
    std::vector<BasePoint> samples = {BasePoint::periodic({0})};
    auto h = conjugate_projective_pair(ca, cb, samples);
    CHECK(h.defect <= 1e-6);
    CHECK(h.identity_distance() <= 0.05);
    check_lift_invariants(h);

    // both share the coordinate axes as invariant directions, and the
    // conjugacy must fix them: turns 0 (x-axis) and 1/2 (y-axis)
    CHECK(detail::circle_distance(h.evaluate(0, 0.0), 0.0) <= 1e-8);
    CHECK(detail::circle_distance(h.evaluate(0, 0.5), 0.5) <= 1e-8);

    // spot-check the conjugacy equation off the knot grid
    Mat pa = diag2(2.0, 0.5), pb = diag2(2.1, 1.0 / 2.1);
    for (double t : {0.031, 0.21, 0.4, 0.62, 0.88}) {
        double lhs = h.evaluate(0, detail::projective_action(pa, t));
        double rhs = detail::projective_action(pb, h.evaluate(0, t));
        CHECK(detail::circle_distance(lhs, rhs) <= 1e-3);  // interpolation error
    }
}

TEST_CASE("tilted bundles are aligned before the circle conjugacy") {
    auto sys = SymbolicSystem::full_shift(2);
    Mat a = diag2(2.0, 0.5);
    auto ca = MatrixCocycle::constant(sys, a);
    auto cb = MatrixCocycle::constant(sys, Mat(rot2(0.01) * a));
    std::vector<BasePoint> samples = {BasePoint::periodic({0})};
    auto h = conjugate_projective_pair(ca, cb, samples);
    CHECK(h.defect <= 1e-6);
    check_lift_invariants(h);

    // h must send A's invariant directions exactly onto B's
    Mat pa = a, pb = rot2(0.01) * a;
    auto [ua, sa] = detail::north_south_directions(pa);
    auto [ub, sb] = detail::north_south_directions(pb);
    CHECK(detail::circle_distance(h.evaluate(0, ua), ub) <= 1e-8);
    CHECK(detail::circle_distance(h.evaluate(0, sa), sb) <= 1e-8);
}

TEST_CASE("the conjugacy shrinks to the identity with the perturbation") {
    auto sys = SymbolicSystem::full_shift(2);
    auto ca = MatrixCocycle::constant(sys, diag2(2.0, 0.5));
    std::vector<BasePoint> samples = {BasePoint::periodic({0})};
    double prev = 1e300;
    for (int k = 0; k < 5; ++k) {
        double eps = 0.2 * std::pow(0.5, k);
        auto cb = MatrixCocycle::constant(sys, diag2(2.0 + eps, 1.0 / (2.0 + eps)));
        auto h = conjugate_projective_pair(ca, cb, samples);
        double d = h.identity_distance();
        CHECK(d <= prev + 1e-12);
        prev = d;
    }
    CHECK(prev <= 2e-3);
}

TEST_CASE("non-dominated inputs are rejected") {
    auto sys = SymbolicSystem::full_shift(2);
    auto ca = MatrixCocycle::constant(sys, diag2(2.0, 0.5));
    auto cb = MatrixCocycle::constant(sys, rot2(0.7));
    std::vector<BasePoint> samples = {BasePoint::periodic({0})};
    CHECK_THROWS_AS(conjugate_projective_pair(ca, cb, samples), NotDominatedError);
}
