#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rotnum/cocycle.hpp"

using namespace rotnum;

namespace {

Mat rot2(double a) {
    Mat r(2, 2);
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

MatrixCocycle random_sl2_cocycle(const SymbolicSystem& sys, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::map<Word, Mat> table;
    for (int s = 0; s < sys.symbols; ++s) {
        Mat m(2, 2);
        do {
            m << u(rng), u(rng), u(rng), u(rng);
        } while (std::abs(m.determinant()) < 0.05);
        m /= std::sqrt(std::abs(m.determinant()));
        if (m.determinant() < 0) m.col(0) *= -1.0;
        table[{s}] = m;
    }
    return MatrixCocycle::from_table(sys, 1, std::move(table));
}

}  // namespace

TEST_CASE("constant cocycle powers") {
    auto sys = SymbolicSystem::full_shift(2);
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = 2.0;
    a(1, 1) = 0.5;
    auto c = MatrixCocycle::constant(sys, a);
    BasePoint x = BasePoint::periodic({0, 1}, 0);
    Mat p = iterate(c, x, 3);
    CHECK(p(0, 0) == Catch::Approx(8.0));
    CHECK(p(1, 1) == Catch::Approx(0.125));
    CHECK(std::abs(p(0, 1)) + std::abs(p(1, 0)) < 1e-15);
}

TEST_CASE("two-step product over the (01) orbit") {
    auto sys = SymbolicSystem::full_shift(2);
    std::map<Word, Mat> t;
    t[{0}] = Eigen::DiagonalMatrix<double, 2>(2.0, 1.0);
    t[{1}] = Eigen::DiagonalMatrix<double, 2>(1.0, 2.0);
    auto c = MatrixCocycle::from_table(sys, 1, std::move(t));
    Mat p = iterate(c, BasePoint::periodic({0, 1}, 0), 2);
    CHECK((p - 2.0 * Mat::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("negative iterates invert forward products") {
    auto sys = SymbolicSystem::full_shift(2);
    std::mt19937 rng(11);
    auto c = random_sl2_cocycle(sys, rng);
    BasePoint x = BasePoint::periodic({0, 1, 1, 0, 1}, 2);
    for (long long n : {1LL, 3LL, 7LL}) {
        Mat fwd = iterate(c, x, n);
        Mat bwd = iterate(c, step(sys, x, n), -n);
        CHECK((bwd * fwd - Mat::Identity(2, 2)).norm() < 1e-10);
    }
}

TEST_CASE("cocycle identity on random triples") {
    auto sys = SymbolicSystem::full_shift(3);
    std::mt19937 rng(23);
    auto c = random_sl2_cocycle(sys, rng);
    std::uniform_int_distribution<int> sym(0, 2), len(3, 8), iter(0, 6);
    for (int trial = 0; trial < 25; ++trial) {
        Word w(len(rng));
        for (auto& s : w) s = sym(rng);
        BasePoint x = BasePoint::periodic(w, 0);
        long long n = iter(rng), m = iter(rng);
        Mat lhs = iterate(c, x, n + m);
        Mat rhs = iterate(c, step(sys, x, n), m) * iterate(c, x, n);
        CHECK((lhs - rhs).norm() < 1e-10);
    }
}

TEST_CASE("singular values are ascending and multiply to the determinant") {
    auto sys = SymbolicSystem::full_shift(2);
    Mat a = Eigen::DiagonalMatrix<double, 2>(2.0, 0.5);
    auto c = MatrixCocycle::constant(sys, a);
    BasePoint x = BasePoint::periodic({0}, 0);
    Vec s = singular_values(c, x, 4);
    CHECK(s[0] == Catch::Approx(1.0 / 16.0));
    CHECK(s[1] == Catch::Approx(16.0));

    auto r = MatrixCocycle::constant(sys, rot2(0.7));
    Vec sr = singular_values(r, x, 5);
    CHECK(sr[0] == Catch::Approx(1.0));
    CHECK(sr[1] == Catch::Approx(1.0));

    std::mt19937 rng(5);
    auto sl2 = random_sl2_cocycle(sys, rng);
    Vec s6 = singular_values(sl2, BasePoint::periodic({0, 1, 0}, 0), 6);
    CHECK(s6[0] <= s6[1]);
    CHECK(s6[0] * s6[1] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("scaled iteration matches plain iteration in log scale") {
    auto sys = SymbolicSystem::full_shift(2);
    std::mt19937 rng(3);
    auto c = random_sl2_cocycle(sys, rng);
    BasePoint x = BasePoint::periodic({0, 1, 1}, 0);
    Vec ls = log_singular_values(c, x, 60);
    Vec s = singular_values(c, x, 60);
    CHECK(ls[1] == Catch::Approx(std::log(s[1])).margin(1e-8));
}

TEST_CASE("lyapunov estimates") {
    auto sys = SymbolicSystem::full_shift(2);
    Mat a = Eigen::DiagonalMatrix<double, 2>(2.0, 0.5);
    auto c = MatrixCocycle::constant(sys, a);
    auto mu = InvariantMeasure::on_orbit(PeriodicOrbit::from_word({0, 1}, sys));
    auto ly = lyapunov_estimate(c, mu, 10);
    CHECK(ly[0] == Catch::Approx(-std::log(2.0)).margin(1e-12));
    CHECK(ly[1] == Catch::Approx(std::log(2.0)).margin(1e-12));

    std::map<Word, Mat> t;
    t[{0}] = Eigen::DiagonalMatrix<double, 2>(3.0, 1.0);
    t[{1}] = Eigen::DiagonalMatrix<double, 2>(1.0, 3.0);
    auto c2 = MatrixCocycle::from_table(sys, 1, std::move(t));
    auto ly2 = lyapunov_estimate(c2, mu, 8);
    CHECK(ly2[0] == Catch::Approx(0.5 * std::log(3.0)).margin(1e-12));
    CHECK(ly2[1] == Catch::Approx(0.5 * std::log(3.0)).margin(1e-12));

    // exponents sum to the determinant average
    std::mt19937 rng(17);
    auto c3 = random_sl2_cocycle(sys, rng);
    auto ly3 = lyapunov_estimate(c3, mu, 12);
    CHECK(ly3[0] + ly3[1] == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("deepening changes no product") {
    auto sys = SymbolicSystem::full_shift(2);
    std::mt19937 rng(29);
    auto c = random_sl2_cocycle(sys, rng);
    auto c2 = deepen(c, 2);
    CHECK(c2.depth == 2);
    std::uniform_int_distribution<int> sym(0, 1), len(2, 9), iter(1, 12);
    for (int trial = 0; trial < 100; ++trial) {
        Word w(len(rng));
        for (auto& s : w) s = sym(rng);
        BasePoint x = BasePoint::periodic(w, 0);
        long long n = iter(rng);
        CHECK((iterate(c, x, n) - iterate(c2, x, n)).norm() < 1e-13);
    }
}

TEST_CASE("perturb_on_cylinder with zero delta is the identity") {
    auto sys = SymbolicSystem::full_shift(2);
    std::mt19937 rng(31);
    auto c = random_sl2_cocycle(sys, rng);
    double dist = -1.0;
    auto p = perturb_on_cylinder(c, {0, 1}, Mat::Zero(2, 2), PerturbMode::Add, &dist);
    CHECK(dist == 0.0);
    CHECK(sup_distance(c, p) < 1e-15);
}

TEST_CASE("compose-mode perturbation obeys the norm bound") {
    auto sys = SymbolicSystem::full_shift(2);
    std::mt19937 rng(37);
    auto c = random_sl2_cocycle(sys, rng);
    Mat delta(2, 2);
    delta << 1e-3, 0.0, 0.0, -1e-3;
    double max_norm = 0.0;
    for (const auto& [w, m] : c.table) max_norm = std::max(max_norm, m.operatorNorm());
    double dist = 0.0;
    auto p = perturb_on_cylinder(c, {1}, delta, PerturbMode::Compose, &dist);
    CHECK(dist <= delta.operatorNorm() * max_norm + 1e-12);
    // off the cylinder the cocycle is unchanged
    for (const auto& [w, m] : p.table)
        if (w[0] != 1) CHECK((m - c.table.at(Word{w[0]})).norm() == 0.0);
}

TEST_CASE("determinant floor is enforced") {
    auto sys = SymbolicSystem::full_shift(2);
    std::map<Word, Mat> t;
    t[{0}] = Mat::Identity(2, 2);
    t[{1}] = 1e-6 * Mat::Identity(2, 2);
    CHECK_THROWS(MatrixCocycle::from_table(sys, 1, std::move(t)));
}

TEST_CASE("trig cocycles evaluate harmonics") {
    auto sys = SymbolicSystem::golden_rotation();
    std::vector<MatrixCocycle::Harmonic> hs;
    hs.push_back({0, Mat::Identity(2, 2), Mat()});
    Mat c1 = Mat::Zero(2, 2);
    c1(0, 1) = 0.5;
    hs.push_back({1, c1, Mat()});
    auto c = MatrixCocycle::trig(sys, hs);
    BasePoint x = BasePoint::on_circle(0.25);
    Mat a = c.at(x);
    CHECK(a(0, 0) == Catch::Approx(1.0));
    CHECK(a(0, 1) == Catch::Approx(0.5 * std::cos(M_PI / 2.0)).margin(1e-15));
}

TEST_CASE("linear interpolation paths respect the step cap and endpoints") {
    auto sys = SymbolicSystem::full_shift(2);
    std::mt19937 rng(41);
    auto a = random_sl2_cocycle(sys, rng);
    auto b = random_sl2_cocycle(sys, rng);
    auto path = linear_interpolation(a, b);
    CHECK(sup_distance(path.at(0.0), a) < 1e-14);
    CHECK(sup_distance(path.at(1.0), b) < 1e-14);
    for (size_t i = 0; i + 1 < path.knots.size(); ++i)
        CHECK(sup_distance(path.at(path.knots[i]), path.at(path.knots[i + 1])) <=
              kPathStepCap + 1e-12);
}
