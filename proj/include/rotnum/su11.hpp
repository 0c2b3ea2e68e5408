#pragma once
//
// SL(2,R) <-> SU(1,1) conjugation and the disk-model rotation number of a
// path of SL(2,R) cocycles: the multiplicative cocycle tau over the Moebius
// action on the closed unit disk, its additive logarithmic lift delta along
// the path, and the Birkhoff average whose real part is, up to the factor
// -2, the projective rotation number of the path.
//

#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rotnum/cocycle.hpp"
#include "rotnum/rotation.hpp"

namespace rotnum {

using Cplx = std::complex<double>;

// A matrix (u, vbar; v, ubar) preserving |x|^2 - |y|^2, packed as (u, v).
struct SU11Matrix {
    Cplx u{1.0, 0.0};
    Cplx v{0.0, 0.0};
};

namespace detail {

inline Eigen::Matrix2cd disk_model_q() {
    Eigen::Matrix2cd q;
    const Cplx s = -1.0 / Cplx(1.0, 1.0);
    q << s, s * Cplx(0.0, -1.0), s, s * Cplx(0.0, 1.0);
    return q;
}

}  // namespace detail

// Conjugate an SL(2,R) matrix into SU(1,1) by the fixed disk-model matrix.
inline SU11Matrix to_su11(const Mat& m) {
    if (m.rows() != 2 || m.cols() != 2)
        throw std::invalid_argument("to_su11: 2x2 matrices only");
    if (std::abs(m.determinant() - 1.0) > 1e-10)
        throw std::invalid_argument("to_su11: determinant must be 1");
    static const Eigen::Matrix2cd q = detail::disk_model_q();
    static const Eigen::Matrix2cd qinv = detail::disk_model_q().inverse();
    Eigen::Matrix2cd r = q * m.cast<Cplx>() * qinv;
    SU11Matrix a;
    // the entrywise conjugate of Q M Q^{-1} (an automorphism of SU(1,1),
    // equal to conjugation by the conjugated disk-model matrix) is chosen so
    // that the counterclockwise rotation by delta maps to u = e^{i delta}:
    // this orients the disk boundary so that rho_projective = -2 Re(delta
    // rho) holds with the standard lift exp(2 pi i lift) = tau
    a.u = std::conj(r(0, 0));
    a.v = std::conj(r(1, 0));
    if (std::abs(r(1, 1) - std::conj(r(0, 0))) > 1e-9 ||
        std::abs(r(0, 1) - std::conj(r(1, 0))) > 1e-9 ||
        std::abs(std::norm(a.u) - std::norm(a.v) - 1.0) > 1e-10)
        throw std::runtime_error("to_su11: conjugate is not in SU(1,1)");
    return a;
}

// The multiplicative cocycle over the Moebius action: A (z; 1) = tau * (A.z; 1).
inline Cplx tau(const SU11Matrix& a, Cplx z) { return a.v * z + std::conj(a.u); }

// Moebius action of SU(1,1) on the closed unit disk.
inline Cplx moebius(const SU11Matrix& a, Cplx z) {
    return (a.u * z + std::conj(a.v)) / tau(a, z);
}

// Accumulates the continuous lift of log tau along paths, in units of the
// covering map z -> e^{2 pi i z}: each leg adds (log tau(1) - log tau(0)) /
// (2 pi i) for the branch continued along the leg, with adaptive bisection
// until every step has |tau_next / tau_prev - 1| < 1/2.
struct DeltaAccumulator {
    Cplx lift{0.0, 0.0};
    long long legs = 0;

    void add_leg(const std::function<Cplx(double)>& tau_at) {
        struct Seg { double a, b; Cplx ta, tb; };
        std::vector<Seg> stack;
        stack.push_back({0.0, 1.0, tau_at(0.0), tau_at(1.0)});
        int guard = 0;
        while (!stack.empty()) {
            Seg s = stack.back();
            stack.pop_back();
            Cplx ratio = s.tb / s.ta;
            if (std::abs(ratio - 1.0) < 0.5) {
                lift += std::log(ratio) / Cplx(0.0, 2.0 * M_PI);
                continue;
            }
            if (++guard > (1 << 20))
                throw std::runtime_error("DeltaAccumulator: leg refinement diverged");
            double m = 0.5 * (s.a + s.b);
            Cplx tm = tau_at(m);
            stack.push_back({m, s.b, tm, s.tb});
            stack.push_back({s.a, m, s.ta, tm});
        }
        ++legs;
    }
};

struct AKAverage {
    Cplx average{0.0, 0.0};              // (1/n) * sum of per-iterate deltas
    std::vector<Cplx> per_iterate;       // delta at each iterate
    long long n = 0;
    bool renormalized = false;           // a disk orbit was pulled off the boundary
};

namespace detail {

// evaluate-and-cache the path's cocycles at the t values the lift visits
struct PathCache {
    const CocyclePath* path;
    std::map<double, MatrixCocycle> at_t;

    const MatrixCocycle& get(double t) {
        auto it = at_t.find(t);
        if (it == at_t.end()) it = at_t.emplace(t, path->at(t)).first;
        return it->second;
    }
};

inline constexpr double kDiskMargin = 1e-12;

}  // namespace detail

// The disk-model rotation datum of the path at x: the Birkhoff average over n
// iterates of the additive cocycle delta(x, z0, z1), where each delta is the
// lift difference of tau along a path from (t0, z0) to (t1, z1) (a z-segment
// at t0 followed by the t-sweep at z1), and the disk points advance under the
// endpoint cocycles' Moebius actions. The real part of the average converges
// to -1/2 of the projective rotation number; the imaginary part carries the
// tau growth rate (-pi * Im recovers the log growth per iterate across the
// z-legs).
inline AKAverage ak_rotation_number(const CocyclePath& path, const BasePoint& x, Cplx z0,
                                    Cplx z1, long long n) {
    if (n < 1) throw std::invalid_argument("ak_rotation_number: n >= 1 required");
    if (std::abs(z0) > 1.0 + 1e-9 || std::abs(z1) > 1.0 + 1e-9)
        throw std::invalid_argument("ak_rotation_number: disk points required");
    detail::PathCache cache{&path, {}};
    const SymbolicSystem sys = cache.get(path.t0).base;
    // knots give the initial t-subdivision; the leg walker refines further
    std::vector<double> tgrid = path.knots;
    if (tgrid.size() < 2) tgrid = {path.t0, path.t1};

    AKAverage out;
    out.n = n;
    BasePoint xk = x;
    Cplx a = z0, b = z1;
    for (long long k = 0; k < n; ++k) {
        SU11Matrix m0 = to_su11(cache.get(path.t0).at(xk));
        SU11Matrix m1 = to_su11(cache.get(path.t1).at(xk));
        DeltaAccumulator acc;
        // z-leg at t0: segment from a to b (the disk is convex)
        acc.add_leg([&](double s) { return tau(m0, a + s * (b - a)); });
        // t-leg at z = b
        for (size_t j = 0; j + 1 < tgrid.size(); ++j) {
            double ta = tgrid[j], tb = tgrid[j + 1];
            acc.add_leg([&](double s) {
                double t = ta + s * (tb - ta);
                return tau(to_su11(cache.get(t).at(xk)), b);
            });
        }
        out.per_iterate.push_back(acc.lift);
        out.average += acc.lift;
        a = moebius(m0, a);
        b = moebius(m1, b);
        for (Cplx* z : {&a, &b}) {
            double r = std::abs(*z);
            if (r > 1.0 - detail::kDiskMargin) {
                *z *= (1.0 - detail::kDiskMargin) / r;
                out.renormalized = true;
            }
        }
        xk = step(sys, xk, 1);
    }
    out.average /= static_cast<double>(n);
    return out;
}

struct AKConsistency {
    double rho_projective = 0.0;  // 2 * enclosure midpoint
    Cplx delta_rho{0.0, 0.0};     // measure average of the disk-model datum
    double residual = 0.0;        // |rho_projective + 2 Re(delta_rho)|
    double uncertainty = 0.0;     // 2 * enclosure width + Birkhoff tail bound
    RotationEnclosure enclosure;
    bool renormalized = false;
};

// Cross-check the two rotation-number pipelines on the same path: the
// direction-circle Kingman enclosure against the disk-model Birkhoff average,
// which must satisfy rho_projective = -2 Re(delta rho).
inline AKConsistency ak_consistency_check(const CocyclePath& path, const InvariantMeasure& mu,
                                          long long n,
                                          const std::vector<long long>& n_list = default_n_list(32),
                                          int m_seeds = kSeedGrid) {
    AKConsistency out;
    out.enclosure = path_rotation_number(path, mu, FrameFlow::whole_plane(), n_list, m_seeds);
    out.rho_projective = 2.0 * out.enclosure.midpoint();

    const SymbolicSystem sys = path.at(path.t0).base;
    for (const auto& [x, w] : measure_support_points(sys, mu)) {
        auto avg = ak_rotation_number(path, x, Cplx(0.0, 0.0), Cplx(0.0, 0.0), n);
        out.delta_rho += w * avg.average;
        out.renormalized = out.renormalized || avg.renormalized;
    }
    out.residual = std::abs(out.rho_projective + 2.0 * out.delta_rho.real());
    // the winding's dependence on the disk points is below 1/n on each side
    out.uncertainty = 2.0 * out.enclosure.width() + 2.0 / static_cast<double>(n);
    return out;
}

}  // namespace rotnum
