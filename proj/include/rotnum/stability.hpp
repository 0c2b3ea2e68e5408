#pragma once
//
// Fibered projective conjugacies between nearby dominated d = 2 cocycles:
// along each sampled (periodic) fiber, the return maps of both cocycles act
// on the projective circle as North-South maps; after aligning the invariant
// directions by a fibered linear change of frame, an affine identification of
// fundamental domains extends by the dynamics to a circle homeomorphism h
// with h o P(return of A) = P(return of B) o h, fixed on the four invariant
// directions.
//

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rotnum/cocycle.hpp"
#include "rotnum/domination.hpp"

namespace rotnum {

struct NotDominatedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A sampled fibered circle homeomorphism: per base point, a strictly
// increasing lift on a knot grid, in projective-circle turns. The lift obeys
// lift(theta + 1) = lift(theta) + 1.
struct FiberedConjugacy {
    std::vector<BasePoint> samples;
    std::vector<std::vector<double>> knots;   // per sample, increasing in [0, 1)
    std::vector<std::vector<double>> values;  // lift at the knots
    double defect = 0.0;                      // sup conjugacy-equation error

    // lift evaluation by monotone piecewise-linear interpolation
    double evaluate(size_t sample, double theta) const {
        const auto& k = knots.at(sample);
        const auto& v = values.at(sample);
        const double base = std::floor(theta - k.front());
        const double t = theta - base;  // in [k.front(), k.front() + 1)
        size_t j = static_cast<size_t>(
            std::upper_bound(k.begin(), k.end(), t) - k.begin());
        double k0, k1, v0, v1;
        if (j == k.size()) {
            k0 = k.back(); v0 = v.back();
            k1 = k.front() + 1.0; v1 = v.front() + 1.0;
        } else if (j == 0) {  // t == k.front() up to rounding
            k0 = k.front(); v0 = v.front();
            k1 = k[1]; v1 = v[1];
        } else {
            k0 = k[j - 1]; v0 = v[j - 1];
            k1 = k[j]; v1 = v[j];
        }
        const double s = (k1 > k0) ? (t - k0) / (k1 - k0) : 0.0;
        return base + v0 + s * (v1 - v0);
    }

    // sup over knots of the wrapped displacement from the identity
    double identity_distance() const {
        double d = 0.0;
        for (size_t s = 0; s < knots.size(); ++s)
            for (size_t j = 0; j < knots[s].size(); ++j) {
                double diff = values[s][j] - knots[s][j];
                diff -= std::round(diff);
                d = std::max(d, std::abs(diff));
            }
        return d;
    }
};

namespace detail {

// projective-circle coordinate of a direction, in turns on [0, 1)
inline double projective_turn(const Eigen::Vector2d& v) {
    double t = std::atan2(v[1], v[0]) / M_PI;
    t -= std::floor(t);
    return t >= 1.0 ? 0.0 : t;
}

// action of a 2x2 matrix on the projective circle, in turns
inline double projective_action(const Mat& m, double theta) {
    Eigen::Vector2d v(std::cos(M_PI * theta), std::sin(M_PI * theta));
    Eigen::Vector2d w = m * v;
    return projective_turn(w);
}

// wrapped circle distance in turns (circle of circumference 1)
inline double circle_distance(double a, double b) {
    double d = a - b;
    d -= std::round(d);
    return std::abs(d);
}

// eigen-directions of a 2x2 return map with real spectrum of distinct
// moduli: {attracting (dominant), repelling (weak)} projective turns
inline std::pair<double, double> north_south_directions(const Mat& m) {
    Eigen::EigenSolver<Mat> es(m);
    auto lam = es.eigenvalues();
    if (std::abs(lam[0].imag()) > 1e-12 * std::abs(lam[0]) ||
        std::abs(std::abs(lam[0]) - std::abs(lam[1])) <
            1e-9 * (std::abs(lam[0]) + std::abs(lam[1])))
        throw NotDominatedError(
            "north_south_directions: return map spectrum is not real with "
            "distinct moduli");
    int iu = std::abs(lam[0].real()) > std::abs(lam[1].real()) ? 0 : 1;
    Eigen::Vector2d u = es.eigenvectors().col(iu).real().normalized();
    Eigen::Vector2d s = es.eigenvectors().col(1 - iu).real().normalized();
    return {projective_turn(u), projective_turn(s)};
}

// North-South circle conjugacy between two orientation-preserving projective
// actions with identical fixed directions u (attracting) and s (repelling):
// on each complementary arc, an affine identification of the fundamental
// domains anchored at the arc midpoint, extended by the dynamics. Returns
// h(theta) with h o P(a) = P(b) o h, h(u) = u, h(s) = s.
inline double shared_axis_conjugacy(const Mat& a, const Mat& b, double u, double s,
                                    double theta) {
    theta -= std::floor(theta);
    if (circle_distance(theta, u) < 1e-13) return u;
    if (circle_distance(theta, s) < 1e-13) return s;
    // the arc (lo, hi) containing theta, endpoints among {u, s} lifted so
    // that lo < theta < hi
    double lo = s, hi = u;
    auto lift_above = [](double base, double t) {
        double r = t - std::floor(t - base);
        return r < base ? r + 1.0 : r;
    };
    hi = lift_above(lo, hi);
    double th = lift_above(lo, theta);
    if (th > hi) {  // theta sits in the other arc (u, s + 1)
        lo = u; hi = lift_above(lo, s); th = lift_above(lo, theta);
    }
    const double mid = 0.5 * (lo + hi);
    // signed displacement of the action along the arc at the midpoint
    auto arc_step = [&](const Mat& m, double t) {
        double img = projective_action(m, t);
        return lift_above(lo, img) <= hi ? lift_above(lo, img)
                                         : lift_above(lo, img) - 1.0;
    };
    // walk theta into the fundamental domain [mid, a(mid)) (or (a(mid), mid]
    // when the motion is toward lo), counting iterates
    const double ma = arc_step(a, mid);
    const double mb = arc_step(b, mid);
    if ((ma - mid) * (mb - mid) <= 0.0)
        throw NotDominatedError(
            "shared_axis_conjugacy: arc motions disagree in direction");
    const double dir = (ma > mid) ? 1.0 : -1.0;
    double fa_lo = std::min(mid, ma), fa_hi = std::max(mid, ma);
    double fb_lo = std::min(mid, mb), fb_hi = std::max(mid, mb);
    long long n = 0;
    double z = th;
    for (int guard = 0; guard < 4096; ++guard) {
        // tolerant membership: the conjugacy equation glues the domain ends,
        // so accepting a boundary hit on either side keeps h continuous
        if (z >= fa_lo - 1e-12 && z < fa_hi + 1e-12) break;
        bool forward = dir > 0 ? (z < fa_lo) : (z >= fa_hi);
        z = forward ? arc_step(a, z) : lift_above(lo, projective_action(
                                           Mat(a.inverse()), z));
        if (forward && z > hi) z -= 1.0;
        n += forward ? 1 : -1;
        if (guard == 4095)
            throw NotDominatedError(
                "shared_axis_conjugacy: fundamental domain not reached");
    }
    // affine identification of the fundamental domains, anchored at mid
    double w = fb_lo + (z - fa_lo) / (fa_hi - fa_lo) * (fb_hi - fb_lo);
    // undo the walk with the target dynamics
    for (; n > 0; --n) w = lift_above(lo, projective_action(Mat(b.inverse()), w));
    for (; n < 0; ++n) {
        w = arc_step(b, w);
        if (w > hi) w -= 1.0;
    }
    w -= std::floor(w);
    return w;
}

}  // namespace detail

// Construct the fibered circle conjugacy h with h(P(A) u) = P(B) h(u) along
// the sampled periodic fibers of two dominated d = 2 cocycles: align B's
// invariant directions onto A's by a fibered linear map, then identify
// fundamental domains affinely on each complementary arc and extend by the
// dynamics. Knots accumulate dyadically near the repelling direction, where
// the conjugacy loses regularity.
inline FiberedConjugacy conjugate_projective_pair(const MatrixCocycle& ca,
                                                  const MatrixCocycle& cb,
                                                  const std::vector<BasePoint>& samples,
                                                  int knot_count = 256) {
    if (ca.dim != 2 || cb.dim != 2)
        throw std::invalid_argument("conjugate_projective_pair: d = 2 only");
    if (samples.empty() || knot_count < 16)
        throw std::invalid_argument(
            "conjugate_projective_pair: need samples and knot_count >= 16");
    {
        auto ra = domination_report(ca, samples, 40);
        auto rb = domination_report(cb, samples, 40);
        if (!ra.dominated_at(1) || !rb.dominated_at(1))
            throw NotDominatedError(
                "conjugate_projective_pair: both cocycles must be index-1 "
                "dominated over the samples");
    }

    FiberedConjugacy h;
    h.samples = samples;
    for (const auto& x : samples) {
        if (x.circle)
            throw std::invalid_argument(
                "conjugate_projective_pair: shift-base periodic samples only");
        const long long p = static_cast<long long>(x.word.size());
        Mat pa = iterate(ca, x, p);
        Mat pb = iterate(cb, x, p);
        if (pa.determinant() <= 0.0 || pb.determinant() <= 0.0)
            throw std::invalid_argument(
                "conjugate_projective_pair: orientation-preserving return "
                "maps required");
        auto [ua, sa] = detail::north_south_directions(pa);
        auto [ub, sb] = detail::north_south_directions(pb);

        // fibered alignment: the unimodular map sending A's axes to B's,
        // so that L^-1 P(B) L shares its fixed directions with P(A)
        Mat fa(2, 2), fb(2, 2);
        fa.col(0) = Eigen::Vector2d(std::cos(M_PI * ua), std::sin(M_PI * ua));
        fa.col(1) = Eigen::Vector2d(std::cos(M_PI * sa), std::sin(M_PI * sa));
        fb.col(0) = Eigen::Vector2d(std::cos(M_PI * ub), std::sin(M_PI * ub));
        fb.col(1) = Eigen::Vector2d(std::cos(M_PI * sb), std::sin(M_PI * sb));
        Mat l = fb * fa.inverse();
        l /= std::sqrt(std::abs(l.determinant()));
        Mat pb_aligned = l.inverse() * pb * l;

        // exact evaluator: h = P(L) o g, with g conjugating P(A) to the
        // aligned P(B) while fixing the shared axes
        auto h_at = [&](double theta) {
            double g = detail::shared_axis_conjugacy(pa, pb_aligned, ua, sa, theta);
            return detail::projective_action(l, g);
        };

        // knot grid: uniform base plus dyadic refinement near the repelling
        // directions of both maps
        std::vector<double> ks;
        const int base_n = std::max(16, knot_count - 32);
        for (int j = 0; j < base_n; ++j)
            ks.push_back(static_cast<double>(j) / base_n);
        for (double center : {sa}) {
            for (int j = 1; j <= 8; ++j) {
                double eps = std::ldexp(1.0, -3 - j);
                ks.push_back(center - eps);
                ks.push_back(center + eps);
            }
        }
        for (auto& t : ks) t -= std::floor(t);
        std::sort(ks.begin(), ks.end());
        ks.erase(std::unique(ks.begin(), ks.end(),
                             [](double a, double b) { return b - a < 1e-12; }),
                 ks.end());

        std::vector<double> vs;
        vs.reserve(ks.size());
        double prev = -1.0;
        for (double t : ks) {
            double v = h_at(t);
            // unwrap into a strictly increasing lift
            if (!vs.empty())
                while (v < prev) v += 1.0;
            vs.push_back(v);
            prev = v;
        }
        // conjugacy-equation defect at the knots
        for (double t : ks) {
            double lhs = h_at(detail::projective_action(pa, t));
            double rhs = detail::projective_action(pb, h_at(t));
            h.defect = std::max(h.defect, detail::circle_distance(lhs, rhs));
        }
        h.knots.push_back(std::move(ks));
        h.values.push_back(std::move(vs));
    }
    return h;
}

}  // namespace rotnum
