#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <algorithm>
#include <complex>
#include <random>

#include "rotnum/family.hpp"
#include "rotnum/su11.hpp"

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

Mat random_sl2(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat m(2, 2);
    do {
        m << u(rng), u(rng), u(rng), u(rng);
    } while (std::abs(m.determinant()) < 0.1);
    m /= std::sqrt(std::abs(m.determinant()));
    if (m.determinant() < 0.0) m.col(0) *= -1.0;
    return m;
}

CocyclePath rotation_angle_path(const SymbolicSystem& sys, double from, double to,
                                const Mat& factor) {
    CocyclePath p;
    p.t0 = 0.0;
    p.t1 = 1.0;
    p.eval = [sys, from, to, factor](double t) {
        return MatrixCocycle::constant(sys, Mat(rot2(from + t * (to - from)) * factor));
    };
    int steps = std::max(1, static_cast<int>(std::ceil(std::abs(to - from) / 0.05)));
    for (int i = 0; i <= steps; ++i) p.knots.push_back(static_cast<double>(i) / steps);
    return p;
}

}  // namespace

TEST_CASE("to_su11 matches the closed-form images") {
    auto id = to_su11(Mat::Identity(2, 2));
    CHECK(std::abs(id.u - Cplx(1.0, 0.0)) <= 1e-12);
    CHECK(std::abs(id.v) <= 1e-12);

    const double d = 0.7;
    auto r = to_su11(rot2(d));
    CHECK(std::abs(r.u - std::polar(1.0, d)) <= 1e-12);
    CHECK(std::abs(r.v) <= 1e-12);

    const double s = 0.4;
    auto h = to_su11(diag2(std::exp(s), std::exp(-s)));
    CHECK(std::abs(h.u) == Catch::Approx(std::cosh(s)).margin(1e-12));
    CHECK(std::abs(h.v) == Catch::Approx(std::sinh(s)).margin(1e-12));

    CHECK_THROWS_AS(to_su11(diag2(2.0, 1.0)), std::invalid_argument);
}

TEST_CASE("to_su11 preserves the unit form on random samples") {
    std::mt19937 rng(20260823);
    for (int i = 0; i < 10000; ++i) {
        auto a = to_su11(random_sl2(rng));
        REQUIRE(std::abs(std::norm(a.u) - std::norm(a.v) - 1.0) <= 1e-10);
    }
}

TEST_CASE("tau satisfies the multiplicative cocycle relation") {
    CHECK(std::abs(tau(to_su11(Mat::Identity(2, 2)), Cplx(0.3, -0.4)) - 1.0) <= 1e-12);
    CHECK(std::abs(tau(to_su11(rot2(0.7)), Cplx(0.0, 0.0)) - std::polar(1.0, -0.7)) <= 1e-12);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    for (int i = 0; i < 200; ++i) {
        Mat ma = random_sl2(rng), mb = random_sl2(rng);
        auto a = to_su11(ma), b = to_su11(mb);
        auto ab = to_su11(Mat(ma * mb));
        Cplx z(u(rng), u(rng));
        REQUIRE(std::abs(tau(ab, z) - tau(a, moebius(b, z)) * tau(b, z)) <= 1e-10);
    }
    // n-fold products
    for (int trial = 0; trial < 20; ++trial) {
        Mat prod = Mat::Identity(2, 2);
        Cplx z(u(rng), u(rng)), zc = z, t_fold = 1.0;
        for (int k = 0; k < 6; ++k) {
            Mat mk = random_sl2(rng);
            auto ak = to_su11(mk);
            t_fold *= tau(ak, zc);
            zc = moebius(ak, zc);
            prod = mk * prod;
        }
        REQUIRE(std::abs(tau(to_su11(prod), z) - t_fold) <= 1e-9 * std::abs(t_fold));
    }
}

TEST_CASE("the delta lift reproduces tau ratios") {
    std::mt19937 rng(11);
    for (int i = 0; i < 50; ++i) {
        Mat m0 = random_sl2(rng);
        auto tau_at = [&](double s) {
            return tau(to_su11(Mat(rot2(3.7 * s) * m0)), Cplx(0.2, 0.1));
        };
        DeltaAccumulator acc;
        acc.add_leg(tau_at);
        Cplx ratio = std::exp(Cplx(0.0, 2.0 * M_PI) * acc.lift);
        REQUIRE(std::abs(ratio - tau_at(1.0) / tau_at(0.0)) <= 1e-9);
    }
}

TEST_CASE("the disk-model datum has the closed-form value on pure rotations") {
    auto sys = SymbolicSystem::full_shift(2);
    const double d = 0.6;
    auto p = rotation_angle_path(sys, 0.0, d, Mat::Identity(2, 2));
    auto avg = ak_rotation_number(p, BasePoint::periodic({0}), Cplx(0, 0), Cplx(0, 0), 25);
    CHECK(avg.average.real() == Catch::Approx(-d / (2.0 * M_PI)).margin(1e-9));
    CHECK(std::abs(avg.average.imag()) <= 1e-9);
    for (const auto& dk : avg.per_iterate)
        CHECK(dk.real() == Catch::Approx(-d / (2.0 * M_PI)).margin(1e-9));

    // a constant path has zero real part
    auto cp = rotation_angle_path(sys, 0.3, 0.3, Mat::Identity(2, 2));
    auto c_avg = ak_rotation_number(cp, BasePoint::periodic({0}), Cplx(0.2, 0), Cplx(-0.1, 0.3), 10);
    CHECK(std::abs(c_avg.average.real()) <= 1e-9);
}

TEST_CASE("the imaginary part carries the growth rate on a hyperbolic constant") {
    auto sys = SymbolicSystem::full_shift(2);
    const double s = 0.4;
    Mat h = diag2(std::exp(s), std::exp(-s));
    CocyclePath cp;
    cp.t0 = 0.0;
    cp.t1 = 1.0;
    cp.eval = [sys, h](double) { return MatrixCocycle::constant(sys, h); };
    cp.knots = {0.0, 1.0};
    // z-endpoints at the repelling/attracting boundary fixed points; few
    // iterates, before the renormalized repelling point drifts away
    auto avg = ak_rotation_number(cp, BasePoint::periodic({0}), Cplx(-1, 0), Cplx(1, 0), 10);
    CHECK(avg.renormalized);
    auto mu = InvariantMeasure::on_orbit(PeriodicOrbit::from_word({0}, sys));
    auto c = MatrixCocycle::constant(sys, h);
    auto lyaps = lyapunov_estimate(c, mu, 32);
    double lyap = *std::max_element(lyaps.begin(), lyaps.end());
    CHECK(-M_PI * avg.average.imag() == Catch::Approx(lyap).margin(1e-6));
}

TEST_CASE("delta is additive under path concatenation") {
    auto sys = SymbolicSystem::full_shift(2);
    Mat m0 = diag2(1.3, 1.0 / 1.3);
    auto full = rotation_angle_path(sys, 0.0, 0.9, m0);
    auto first = rotation_angle_path(sys, 0.0, 0.45, m0);
    auto second = rotation_angle_path(sys, 0.45, 0.9, m0);
    BasePoint x = BasePoint::periodic({0, 1});
    Cplx z(0.3, -0.2);
    auto d_full = ak_rotation_number(full, x, z, z, 1).per_iterate[0];
    auto d1 = ak_rotation_number(first, x, z, z, 1).per_iterate[0];
    auto d2 = ak_rotation_number(second, x, z, z, 1).per_iterate[0];
    // with matching z-endpoints the t-legs concatenate exactly
    CHECK(std::abs(d_full - (d1 + d2)) <= 1e-10);
}

TEST_CASE("the two rotation-number pipelines agree up to the factor -2") {
    auto sys = SymbolicSystem::full_shift(2);
    auto mu = InvariantMeasure::on_orbit(PeriodicOrbit::from_word({0}, sys));

    const double d = 0.6;
    auto p = rotation_angle_path(sys, 0.0, d, Mat::Identity(2, 2));
    auto chk = ak_consistency_check(p, mu, 50);
    CHECK(chk.rho_projective == Catch::Approx(d / M_PI).margin(1e-9));
    CHECK(chk.delta_rho.real() == Catch::Approx(-d / (2.0 * M_PI)).margin(1e-9));
    CHECK(chk.residual <= 1e-9);

    auto cp = rotation_angle_path(sys, 0.3, 0.3, diag2(1.2, 1.0 / 1.2));
    auto c_chk = ak_consistency_check(cp, mu, 50);
    CHECK(c_chk.residual <= c_chk.uncertainty);
}

TEST_CASE("the factor -2 holds on a quasi-periodic energy-type cocycle") {
    auto sys = SymbolicSystem::golden_rotation(10);
    const double energy = 0.3, coupling = 0.45;
    auto c = MatrixCocycle::pointwise(sys, 2, [energy, coupling](const BasePoint& x) {
        Mat m(2, 2);
        m << energy - 2.0 * coupling * std::cos(2.0 * M_PI * x.angle), -1.0, 1.0, 0.0;
        return m;
    });
    auto p = rotation_ray_path(c, {FrozenPlaneField::whole_plane(sys)}, {0.4});
    auto mu = InvariantMeasure::lebesgue_measure({1, 1}, 32);
    auto chk = ak_consistency_check(p, mu, 4000, default_n_list(256));
    CHECK(chk.residual <= chk.uncertainty);
    CHECK(chk.residual <= 5e-3);
}
