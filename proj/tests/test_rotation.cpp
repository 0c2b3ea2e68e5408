#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rotnum/rotation.hpp"

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

// path of constant cocycles t -> R_t * A, t in [0, t_max]
CocyclePath constant_rotation_path(const SymbolicSystem& sys, const Mat& a, double t_max,
                                   int direction = +1) {
    auto c = MatrixCocycle::constant(sys, a);
    return rotation_family_path(c, {FrozenPlaneField::whole_plane(sys)}, t_max, direction);
}

}  // namespace

TEST_CASE("winding of discrete direction paths") {
    CHECK(winding_number({0.1, 0.1, 0.1}) == Catch::Approx(0.0).margin(1e-15));
    std::vector<double> full, quarter;
    for (int k = 0; k <= 40; ++k) full.push_back(k / 40.0);
    for (int k = 0; k <= 10; ++k) quarter.push_back(0.25 * k / 10.0);
    CHECK(winding_number(full) == Catch::Approx(1.0).margin(1e-12));
    CHECK(winding_number(quarter) == Catch::Approx(0.25).margin(1e-12));
    CHECK_THROWS_AS(winding_number({0.0, 0.3}), RefinementRequiredError);
}

TEST_CASE("constant paths have zero rotation number") {
    auto sys = SymbolicSystem::full_shift(2);
    auto c = MatrixCocycle::constant(sys, diag2(2.0, 0.5) * rot2(0.3));
    auto path = constant_path(c);
    auto mu = InvariantMeasure::on_orbit(PeriodicOrbit::from_word({0}, sys));
    auto enc = path_rotation_number(path, mu, FrameFlow::whole_plane(), default_n_list(16));
    CHECK(enc.lower <= 0.0);
    CHECK(enc.upper >= 0.0);
    CHECK(enc.width() <= 1.0 / 16.0);
}

TEST_CASE("pure rotation family winds delta over two pi") {
    auto sys = SymbolicSystem::full_shift(2);
    const double delta = M_PI / 3.0;
    auto path = constant_rotation_path(sys, Mat::Identity(2, 2), delta);
    auto mu = InvariantMeasure::on_orbit(PeriodicOrbit::from_word({0}, sys));
    auto enc = path_rotation_number(path, mu, FrameFlow::whole_plane(), default_n_list(8));
    CHECK(enc.lower <= delta / (2.0 * M_PI) + 1e-12);
    CHECK(enc.upper >= delta / (2.0 * M_PI) - 1e-12);
    CHECK(enc.width() <= 1e-9);
}

TEST_CASE("rotations composed with a hyperbolic matrix stay locked") {
    auto sys = SymbolicSystem::full_shift(2);
    auto path = constant_rotation_path(sys, diag2(2.0, 0.5), 0.05);
    auto mu = InvariantMeasure::on_orbit(PeriodicOrbit::from_word({0}, sys));
    auto enc = path_rotation_number(path, mu, FrameFlow::whole_plane(), default_n_list(64));
    CHECK(enc.lower <= 0.0);
    CHECK(enc.upper >= 0.0);
}

TEST_CASE("per-point winding spread stays below one plus slack") {
    auto sys = SymbolicSystem::full_shift(2);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int trial = 0; trial < 8; ++trial) {
        Mat a = rot2(u(rng)) * diag2(std::exp(u(rng)), std::exp(-u(rng)));
        auto path = constant_rotation_path(sys, a, 0.4 + 0.2 * std::abs(u(rng)));
        BasePoint x = BasePoint::periodic({0, 1}, trial % 2);
        for (long long n : {1LL, 4LL, 9LL}) {
            auto st = winding_sweep(path, FrameFlow::whole_plane(), x, n);
            CHECK(st.sigma <= st.tau);
            CHECK(st.tau - st.sigma < 1.0 + st.slack);
        }
    }
}

TEST_CASE("winding is nearly additive under composition") {
    auto sys = SymbolicSystem::full_shift(2);
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    auto flow = FrameFlow::whole_plane();
    for (int trial = 0; trial < 10; ++trial) {
        Mat a = rot2(u(rng)) * diag2(std::exp(u(rng)), std::exp(-u(rng)));
        auto path = constant_rotation_path(sys, a, 0.5);
        BasePoint x = BasePoint::periodic({0, 1, 1}, 0);
        long long n = 2 + (trial % 3), m = 1 + (trial % 4);
        Eigen::Vector2d seed(std::cos(trial), std::sin(trial));
        double w_n = seed_winding(path, flow, x, n, seed);
        MatrixCocycle c0 = path.at(0.0);
        Eigen::Vector2d image = (iterate(c0, x, n) * seed).normalized();
        double w_m = seed_winding(path, flow, step(sys, x, n), m, image);
        double w_nm = seed_winding(path, flow, x, n + m, seed);
        CHECK(std::abs(w_nm - w_n - w_m) < 2.0);
    }
}

TEST_CASE("relative rotation number of a small rotation is exact") {
    auto sys = SymbolicSystem::full_shift(2);
    auto a = MatrixCocycle::constant(sys, Mat::Identity(2, 2));
    auto b = MatrixCocycle::constant(sys, rot2(0.2));
    auto mu = InvariantMeasure::on_orbit(PeriodicOrbit::from_word({0}, sys));
    RelRotOptions opts;
    opts.skip_radius_check = true;
    auto enc = relative_rotation_number(a, b, -1, mu, opts);
    CHECK(enc.midpoint() == Catch::Approx(0.2 / (2.0 * M_PI)).margin(1e-9));
    CHECK(enc.width() <= 1e-9);

    auto self = relative_rotation_number(a, a, -1, mu, opts);
    CHECK(self.lower <= 0.0);
    CHECK(self.upper >= 0.0);
}

TEST_CASE("relative rotation numbers satisfy the chain rule inclusion") {
    auto sys = SymbolicSystem::full_shift(2);
    std::mt19937 rng(43);
    std::uniform_real_distribution<double> u(-0.15, 0.15);
    auto mu = InvariantMeasure::on_orbit(PeriodicOrbit::from_word({0, 1}, sys));
    RelRotOptions opts;
    opts.skip_radius_check = true;
    opts.n_list = default_n_list(16);
    for (int trial = 0; trial < 6; ++trial) {
        auto mk = [&]() {
            std::map<Word, Mat> t;
            t[{0}] = rot2(u(rng)) * diag2(std::exp(u(rng)), std::exp(-u(rng)));
            t[{1}] = rot2(u(rng)) * diag2(std::exp(u(rng)), std::exp(-u(rng)));
            return MatrixCocycle::from_table(sys, 1, std::move(t));
        };
        auto a = mk(), b = mk(), c = mk();
        auto ac = relative_rotation_number(a, c, -1, mu, opts);
        auto ab = relative_rotation_number(a, b, -1, mu, opts);
        auto bc = relative_rotation_number(b, c, -1, mu, opts);
        const double tail = 2.0 / 16.0;
        CHECK(ac.lower >= ab.lower + bc.lower - tail - 1e-9);
        CHECK(ac.upper <= ab.upper + bc.upper + tail + 1e-9);
    }
}

TEST_CASE("positivity certificate for the half-radian rotation family") {
    auto sys = SymbolicSystem::full_shift(2);
    auto path = constant_rotation_path(sys, Mat::Identity(2, 2), 0.5);
    std::vector<BasePoint> samples = {BasePoint::periodic({0}, 0)};
    auto cert = positivity_certificate(path, samples, FrameFlow::whole_plane(), 20);
    REQUIRE(cert.has_value());
    // winding of the N-iterate over the full family is N*0.5/(2*pi), first
    // exceeding one full turn at N = 13
    CHECK(cert->n == 13);
}

TEST_CASE("no certificate for constant or locked paths") {
    auto sys = SymbolicSystem::full_shift(2);
    auto c = MatrixCocycle::constant(sys, diag2(2.0, 0.5));
    std::vector<BasePoint> samples = {BasePoint::periodic({0}, 0)};
    CHECK_FALSE(positivity_certificate(constant_path(c), samples, FrameFlow::whole_plane(), 25)
                    .has_value());
    auto path = constant_rotation_path(sys, diag2(2.0, 0.5), 0.05);
    CHECK_FALSE(
        positivity_certificate(path, samples, FrameFlow::whole_plane(), 200).has_value());
}

TEST_CASE("mode-locking probe verdicts") {
    auto sys = SymbolicSystem::full_shift(2);
    auto mu = InvariantMeasure::on_orbit(PeriodicOrbit::from_word({0}, sys));
    auto field = FrozenPlaneField::whole_plane(sys);

    auto hyp = MatrixCocycle::constant(sys, diag2(2.0, 0.5));
    auto v1 = modelock_probe(hyp, field, mu, 0.05, 60);
    CHECK(v1.kind == ModeLockKind::LockedEvidence);
    REQUIRE(v1.report.has_value());
    CHECK(v1.report->per_index[0].verdict == Verdict::Dominated);

    auto rot = MatrixCocycle::constant(sys, rot2(0.7));
    // a full extra turn at angle step 0.05 needs n > 2*pi/0.05 ~ 126 iterates
    auto v2 = modelock_probe(rot, field, mu, 0.05, 150);
    CHECK(v2.kind == ModeLockKind::UnlockedUp);
    CHECK(v2.certificate.has_value());
}

TEST_CASE("eigenvalue arguments") {
    CHECK(eigenvalue_argument(Mat::Identity(2, 2)) == 0.0);
    CHECK(eigenvalue_argument(Mat(-Mat::Identity(2, 2))) == Catch::Approx(M_PI));
    CHECK(eigenvalue_argument(rot2(M_PI / 3.0)) == Catch::Approx(M_PI / 3.0).margin(1e-12));
    CHECK(eigenvalue_argument(rot2(-M_PI / 3.0)) ==
          Catch::Approx(2.0 * M_PI - M_PI / 3.0).margin(1e-12));
    CHECK(eigenvalue_argument(diag2(3.0, 0.5)) == 0.0);
    CHECK_THROWS_AS(eigenvalue_argument(diag2(1.0, -1.0)), OrientationError);
}

TEST_CASE("return-map congruence for commuting rotations") {
    auto sys = SymbolicSystem::full_shift(2);
    auto a = MatrixCocycle::constant(sys, rot2(0.3));
    auto b = MatrixCocycle::constant(sys, rot2(0.5));
    auto orbit = PeriodicOrbit::from_word({0}, sys);
    auto res = return_map_congruence(a, b, orbit, -1);
    CHECK(res.residual <= std::max(res.uncertainty, 1e-9));
    CHECK(res.theta_b - res.theta_a == Catch::Approx(0.2).margin(1e-12));
    CHECK(res.enclosure.midpoint() == Catch::Approx(0.2 / (2.0 * M_PI)).margin(1e-9));
}

TEST_CASE("return-map congruence on a period-2 orbit") {
    auto sys = SymbolicSystem::full_shift(2);
    std::map<Word, Mat> ta, tb;
    ta[{0}] = rot2(0.2);
    ta[{1}] = rot2(0.3);
    tb[{0}] = rot2(0.3);
    tb[{1}] = rot2(0.45);
    auto a = MatrixCocycle::from_table(sys, 1, std::move(ta));
    auto b = MatrixCocycle::from_table(sys, 1, std::move(tb));
    auto orbit = PeriodicOrbit::from_word({0, 1}, sys);
    auto res = return_map_congruence(a, b, orbit, -1);
    CHECK(res.residual <= std::max(res.uncertainty, 1e-9));
}

TEST_CASE("enclosure bounds are ordered and nested") {
    auto sys = SymbolicSystem::full_shift(2);
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    auto mu = InvariantMeasure::on_orbit(PeriodicOrbit::from_word({0, 1}, sys));
    auto flow = FrameFlow::whole_plane();
    for (int trial = 0; trial < 4; ++trial) {
        Mat a = rot2(0.5 + u(rng)) * diag2(std::exp(u(rng)), std::exp(-u(rng)));
        auto path = constant_rotation_path(sys, a, 0.3);
        std::vector<long long> ns = {2, 4, 8, 16};
        RotationEnclosure prev;
        for (size_t k = 1; k <= ns.size(); ++k) {
            std::vector<long long> prefix(ns.begin(), ns.begin() + k);
            auto enc = path_rotation_number(path, mu, flow, prefix);
            CHECK(enc.lower <= enc.upper + 1e-12);
            if (k > 1) {
                CHECK(enc.lower >= prev.lower - 1e-12);
                CHECK(enc.upper <= prev.upper + 1e-12);
            }
            prev = enc;
        }
    }
}
