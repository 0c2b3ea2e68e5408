#pragma once
//
// Winding numbers of direction paths under moving frames, rotation-number
// enclosures for paths of cocycles via sub/superadditive bounds, relative
// rotation numbers, positivity certificates, mode-locking probes,
// eigenvalue arguments and the periodic-orbit congruence check.
//

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rotnum/cocycle.hpp"
#include "rotnum/domination.hpp"
#include "rotnum/family.hpp"

namespace rotnum {

inline constexpr int kSeedGrid = 64;
inline constexpr double kMaxTurnStep = 0.125;  // turns; < 1/4 guarantees a unique lift

struct RefinementRequiredError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OrientationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double wrap_turn(double dtheta) { return dtheta - std::round(dtheta); }

}  // namespace detail

// Winding (in turns) of a discretized direction path given by angles in the
// transported frame; every step must stay below a quarter turn.
inline double winding_number(const std::vector<double>& angles_turns) {
    double w = 0.0;
    for (size_t k = 0; k + 1 < angles_turns.size(); ++k) {
        double d = detail::wrap_turn(angles_turns[k + 1] - angles_turns[k]);
        if (std::abs(d) >= 0.25)
            throw RefinementRequiredError("winding_number: step of a quarter turn or more");
        w += d;
    }
    return w;
}

// Oriented 2-frame field over (path parameter, base point), continuous in t
// for each fixed point.
struct FrameFlow {
    std::function<Mat(double, const BasePoint&)> at;
    bool t_independent = false;

    static FrameFlow whole_plane() {
        FrameFlow f;
        f.at = [](double, const BasePoint&) { return Mat(Mat::Identity(2, 2)); };
        f.t_independent = true;
        return f;
    }

    static FrameFlow fixed(std::function<Mat(const BasePoint&)> fn) {
        FrameFlow f;
        f.at = [fn](double, const BasePoint& x) { return fn(x); };
        f.t_independent = true;
        return f;
    }

    static FrameFlow from_field(const FrozenPlaneField& field) {
        FrameFlow f;
        f.at = [field](double, const BasePoint& x) { return field.frame(x); };
        f.t_independent = true;
        return f;
    }

    // Continuation of the splitting bundle [start_index, start_index+2) along
    // the path by the backward-forward singular construction, with frames
    // aligned in t by orthogonal projection (cached per base point). An
    // orientation reference fixes the sign of the frame's orientation, which
    // the singular construction leaves arbitrary.
    static FrameFlow continued(const CocyclePath& path, int start_index, int n_cont = 24,
                               std::function<Mat(const BasePoint&)> orient = {}) {
        auto cache = std::make_shared<std::map<std::string, std::map<double, Mat>>>();
        const double cos_bound = std::cos(0.45 * M_PI);
        FrameFlow f;
        f.at = [path, start_index, n_cont, cache, cos_bound, orient](double t,
                                                                     const BasePoint& x) -> Mat {
            auto& per = (*cache)[x.key()];
            auto it = per.find(t);
            if (it != per.end()) return it->second;
            MatrixCocycle ct = path.at(t);
            Mat fr = detail::splitting_frame(ct, x, n_cont, start_index, start_index + 2);
            if (per.empty() && orient) {
                Mat overlap = fr.transpose() * orient(x);
                if (overlap.determinant() < 0.0) fr.col(1) *= -1.0;
            }
            if (!per.empty()) {
                auto nb = per.lower_bound(t);
                if (nb == per.end()) {
                    --nb;
                } else if (nb != per.begin()) {
                    auto prev = std::prev(nb);
                    if (t - prev->first < nb->first - t) nb = prev;
                }
                Mat overlap = fr.transpose() * nb->second;
                Eigen::JacobiSVD<Mat> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
                if (svd.singularValues()[1] < cos_bound)
                    throw ContinuationBrokenError("FrameFlow: bundle drifted too far", t);
                fr = fr * (svd.matrixU() * svd.matrixV().transpose());
            }
            per[t] = fr;
            return fr;
        };
        return f;
    }
};

struct WindingStats {
    long long n = 0;
    double tau = 0.0;    // max winding over seeds
    double sigma = 0.0;  // min winding over seeds
    double slack = 0.0;  // 2 * max adjacent seed gap
};

namespace detail {

// Canonical lift (in turns) of the direction-circle map u(theta) -> m2*u of
// a 2x2 matrix with positive determinant: continuous, L(theta+1) =
// L(theta)+1, L(0) in (-1/2, 1/2]. The map's angular slope is bounded by the
// condition number, which fixes the walking step.
inline double direction_lift(const Mat& m2, double cond, double theta) {
    const double base = std::floor(theta + 0.5);
    const double th = theta - base;  // in [-1/2, 1/2)
    auto ang = [&](double t) {
        Eigen::Vector2d u(std::cos(2.0 * M_PI * t), std::sin(2.0 * M_PI * t));
        Eigen::Vector2d v = m2 * u;
        return std::atan2(v[1], v[0]) / (2.0 * M_PI);
    };
    const int steps = 1 + static_cast<int>(std::ceil(8.0 * cond * std::abs(th)));
    double cur = ang(0.0);
    for (int k = 1; k <= steps; ++k) cur += wrap_turn(ang(th * k / steps) - cur);
    return base + cur;
}

struct LiftStep {
    Mat m2;          // in-frame step map at t = 0
    double cond = 1.0;
    double c = 0.0;  // rotation rate, turns per unit path parameter
};

inline Mat rot2_of(double a) {
    Mat r(2, 2);
    r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return r;
}

// For rotation-family paths with t-independent frames the in-frame step maps
// factor exactly as rot(2*pi*c*t) * M; verify the factorization numerically
// and return the steps, or nothing when the fast path does not apply.
inline std::optional<std::vector<LiftStep>> build_lift_steps(const CocyclePath& path,
                                                             const FrameFlow& frames,
                                                             const BasePoint& x, long long n,
                                                             bool check_orientation) {
    if (!path.family || !frames.t_independent || path.t0 != 0.0 || n < 1) return std::nullopt;
    const MatrixCocycle a0 = path.at(0.0);
    const SymbolicSystem sys = a0.base;
    const double t1 = path.t1;
    const double ta = 0.01 * t1;
    std::vector<LiftStep> steps;
    BasePoint xk = x;
    for (long long k = 0; k < n; ++k) {
        BasePoint xk1 = step(sys, xk, 1);
        Mat fk = frames.at(0.0, xk);
        Mat fk1 = frames.at(0.0, xk1);
        Mat ax = a0.at(xk);
        LiftStep s;
        s.m2 = fk1.transpose() * (ax * fk);
        if (s.m2.determinant() <= 0.0) {
            if (check_orientation)
                throw OrientationError("winding: restriction reverses orientation");
            return std::nullopt;
        }
        auto in_frame = [&](double t) {
            return Mat(fk1.transpose() * (path.family->rotation_at(t, xk1) * (ax * fk)));
        };
        Mat m2inv = s.m2.inverse();
        Mat da = in_frame(ta) * m2inv;
        if ((da * da.transpose() - Mat::Identity(2, 2)).norm() > 1e-9) return std::nullopt;
        double alpha = std::atan2(da(1, 0), da(0, 0));
        if ((in_frame(2.0 * ta) * m2inv - rot2_of(2.0 * alpha)).norm() > 1e-8) return std::nullopt;
        double rate = alpha / ta;
        if ((in_frame(t1) * m2inv - rot2_of(rate * t1)).norm() > 1e-8) return std::nullopt;
        s.c = rate / (2.0 * M_PI);
        Eigen::JacobiSVD<Mat> svd(s.m2);
        s.cond = svd.singularValues()[0] / svd.singularValues()[1];
        steps.push_back(std::move(s));
        xk = xk1;
    }
    return steps;
}

inline double lift_winding(const std::vector<LiftStep>& steps, double t0, double t1,
                           double theta0) {
    auto comp = [&](double t) {
        double th = theta0;
        for (const auto& s : steps) th = direction_lift(s.m2, s.cond, th) + s.c * t;
        return th;
    };
    return comp(t1) - comp(t0);
}

// Shared adaptive t-grid evaluator for general paths: winding of any seed
// after refining the grid until every tracked seed moves < 1/8 turn per step.
struct SampledWinding {
    const CocyclePath& path;
    const FrameFlow& frames;
    BasePoint x, y;
    long long n;
    bool check_orientation;
    size_t max_nodes;

    struct Node {
        double t;
        Mat prod;  // F_y(t)^T * A_t^n(x) * F_x(t)
    };
    std::vector<Node> nodes;
    std::vector<Eigen::Vector2d> seeds;

    SampledWinding(const CocyclePath& p, const FrameFlow& fr, const BasePoint& x_, long long n_,
                   bool chk, size_t mx)
        : path(p), frames(fr), x(x_), n(n_), check_orientation(chk), max_nodes(mx) {
        const SymbolicSystem sys = path.at(path.t0).base;
        y = step(sys, x, n);
        std::vector<double> grid = path.knots;
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        for (double t : grid) nodes.push_back(make_node(t));
    }

    Node make_node(double t) {
        MatrixCocycle ct = path.at(t);
        Mat fx = frames.at(t, x);
        Mat fy = frames.at(t, y);
        if (check_orientation) {
            const SymbolicSystem sys = ct.base;
            Mat one = frames.at(t, step(sys, x, 1)).transpose() * (ct.at(x) * fx);
            if (one.determinant() <= 0.0)
                throw OrientationError("winding: restriction reverses orientation");
        }
        return Node{t, Mat(fy.transpose() * (iterate(ct, x, n) * fx))};
    }

    static double theta(const Node& nd, const Eigen::Vector2d& u) {
        Eigen::Vector2d v = nd.prod * u;
        return std::atan2(v[1], v[0]) / (2.0 * M_PI);
    }

    void refine() {
        for (bool changed = true; changed;) {
            changed = false;
            for (size_t k = 0; k + 1 < nodes.size(); ++k) {
                bool split = false;
                for (const auto& u : seeds) {
                    if (std::abs(wrap_turn(theta(nodes[k + 1], u) - theta(nodes[k], u))) >=
                        kMaxTurnStep) {
                        split = true;
                        break;
                    }
                }
                if (!split) continue;
                const double width = nodes[k + 1].t - nodes[k].t;
                if (width <= 1e-12 * std::max(1.0, std::abs(nodes[k].t)) ||
                    nodes.size() >= max_nodes)
                    throw RefinementRequiredError(
                        "winding: direction jump not resolvable on the parameter grid");
                nodes.insert(nodes.begin() + static_cast<long>(k) + 1,
                             make_node(nodes[k].t + 0.5 * width));
                changed = true;
                ++k;
            }
        }
    }

    double winding(const Eigen::Vector2d& u) {
        seeds.push_back(u);
        refine();
        double w = 0.0;
        for (size_t k = 0; k + 1 < nodes.size(); ++k)
            w += wrap_turn(theta(nodes[k + 1], u) - theta(nodes[k], u));
        return w;
    }
};

}  // namespace detail

// Sweep M seed directions in E(x): for each, the winding of
// t -> direction of A_t^n(x) u in the transported frame at T^n x. Rotation
// families with t-independent frames are evaluated exactly through circle-map
// lifts; other paths by adaptive bisection of the t-grid.
inline WindingStats winding_sweep(const CocyclePath& path, const FrameFlow& frames,
                                  const BasePoint& x, long long n, int m_seeds = kSeedGrid,
                                  bool check_orientation = true, size_t max_nodes = 1 << 16) {
    auto lift_steps = detail::build_lift_steps(path, frames, x, n, check_orientation);
    std::optional<detail::SampledWinding> sampler;
    if (!lift_steps)
        sampler.emplace(path, frames, x, n, check_orientation, max_nodes);

    auto wind = [&](double a) {
        if (lift_steps) return detail::lift_winding(*lift_steps, path.t0, path.t1, a);
        return sampler->winding(
            Eigen::Vector2d(std::cos(2.0 * M_PI * a), std::sin(2.0 * M_PI * a)));
    };

    std::vector<double> w(m_seeds);
    for (int j = 0; j < m_seeds; ++j) w[j] = wind(static_cast<double>(j) / m_seeds);

    double slack = 0.0;
    int jmax = 0, jmin = 0;
    for (int j = 0; j < m_seeds; ++j) {
        slack = std::max(slack, 2.0 * std::abs(w[(j + 1) % m_seeds] - w[j]));
        if (w[j] > w[jmax]) jmax = j;
        if (w[j] < w[jmin]) jmin = j;
    }
    WindingStats stats;
    stats.n = n;
    stats.tau = w[jmax];
    stats.sigma = w[jmin];
    stats.slack = slack;

    // one refinement pass around the extremal seeds
    auto refine_around = [&](int j, bool want_max) {
        const double base = static_cast<double>(j) / m_seeds;
        for (int s = 1; s < 8; ++s) {
            for (double side : {-1.0, 1.0}) {
                double wk = wind(base + side * s / (8.0 * m_seeds));
                if (want_max)
                    stats.tau = std::max(stats.tau, wk);
                else
                    stats.sigma = std::min(stats.sigma, wk);
            }
        }
    };
    if (stats.slack > 0.0) {
        refine_around(jmax, true);
        refine_around(jmin, false);
    }
    return stats;
}

// Winding of a single seed direction (coordinates in the moving frame at x)
// under the n-iterate along the path, with the same adaptive grid.
inline double seed_winding(const CocyclePath& path, const FrameFlow& frames, const BasePoint& x,
                           long long n, const Eigen::Vector2d& seed, size_t max_nodes = 1 << 16) {
    if (auto lift_steps = detail::build_lift_steps(path, frames, x, n, /*check_orientation=*/false)) {
        double a = std::atan2(seed[1], seed[0]) / (2.0 * M_PI);
        return detail::lift_winding(*lift_steps, path.t0, path.t1, a);
    }
    detail::SampledWinding sw(path, frames, x, n, /*check_orientation=*/false, max_nodes);
    return sw.winding(seed.normalized());
}

struct RotationEnclosure {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    std::vector<long long> n_used;
    double slack = 0.0;  // largest per-point grid slack encountered

    double midpoint() const { return 0.5 * (lower + upper); }
    double width() const { return upper - lower; }
};

// Kingman enclosure of the rotation number of the path above mu along the
// continued plane field: lower = max_n (1/n) * integral of (sigma_n - slack),
// upper = min_n (1/n) * integral of (tau_n + slack).
inline RotationEnclosure path_rotation_number(const CocyclePath& path, const InvariantMeasure& mu,
                                              const FrameFlow& frames,
                                              const std::vector<long long>& n_list,
                                              int m_seeds = kSeedGrid) {
    const SymbolicSystem sys = path.at(path.t0).base;
    auto support = measure_support_points(sys, mu);
    RotationEnclosure enc;
    for (long long n : n_list) {
        double up = 0.0, lo = 0.0;
        for (const auto& [x, wgt] : support) {
            WindingStats st = winding_sweep(path, frames, x, n, m_seeds);
            up += wgt * (st.tau + st.slack);
            lo += wgt * (st.sigma - st.slack);
            enc.slack = std::max(enc.slack, st.slack);
        }
        enc.lower = std::max(enc.lower, lo / static_cast<double>(n));
        enc.upper = std::min(enc.upper, up / static_cast<double>(n));
        enc.n_used.push_back(n);
    }
    return enc;
}

inline std::vector<long long> default_n_list(long long n_max) {
    std::vector<long long> ns;
    for (long long n = 2; n < n_max; n *= 2) ns.push_back(n);
    ns.push_back(n_max);
    return ns;
}

struct RelRotOptions {
    std::vector<long long> n_list = default_n_list(32);
    int m_seeds = kSeedGrid;
    double nbhd_radius = 0.2 * kDominationMargin;
    bool skip_radius_check = false;
    int n_cont = 24;
};

// Rotation number of the linear-interpolation path from a to b relative to
// the continued bundle at ascending index start_index (whole plane if d = 2
// and start_index < 0).
inline RotationEnclosure relative_rotation_number(const MatrixCocycle& a, const MatrixCocycle& b,
                                                  int start_index, const InvariantMeasure& mu,
                                                  const RelRotOptions& opts = {}) {
    if (!opts.skip_radius_check && sup_distance(a, b) > opts.nbhd_radius)
        throw std::invalid_argument("relative_rotation_number: perturbation outside neighborhood");
    CocyclePath path = linear_interpolation(a, b);
    FrameFlow flow = (start_index < 0) ? FrameFlow::whole_plane()
                                       : FrameFlow::continued(path, start_index, opts.n_cont);
    return path_rotation_number(path, mu, flow, opts.n_list, opts.m_seeds);
}

struct PositivityCertificate {
    BasePoint point;
    int n = 0;
};

// First (x, N) whose grid-certified minimal winding exceeds one full turn
// (direction = +1) or stays below minus one full turn (direction = -1).
inline std::optional<PositivityCertificate> positivity_certificate(
    const CocyclePath& path, const std::vector<BasePoint>& samples, const FrameFlow& frames,
    int n_max, int m_seeds = kSeedGrid, int direction = +1) {
    for (int n = 1; n <= n_max; ++n) {
        for (const auto& x : samples) {
            WindingStats st = winding_sweep(path, frames, x, n, m_seeds);
            if (direction > 0 && st.sigma - st.slack > 1.0) return PositivityCertificate{x, n};
            if (direction < 0 && st.tau + st.slack < -1.0) return PositivityCertificate{x, n};
        }
    }
    return std::nullopt;
}

enum class ModeLockKind { UnlockedUp, UnlockedDown, LockedEvidence };

struct ModeLockVerdict {
    ModeLockKind kind = ModeLockKind::LockedEvidence;
    std::optional<PositivityCertificate> certificate;
    std::optional<SplittingReport> report;  // attached in the locked case
};

// Probe mode-locking above mu along the plane field: certificates for the
// increasing family R_{+t} o A and the decreasing family R_{-t} o A with
// angles up to eps; if both sides exhaust, attach the domination report over
// the support as the equivalence cross-check.
inline ModeLockVerdict modelock_probe(const MatrixCocycle& c, const FrozenPlaneField& field,
                                      const InvariantMeasure& mu, double eps, int n_max,
                                      int m_seeds = kSeedGrid, int report_n_max = 40) {
    auto support = measure_support_points(c.base, mu);
    std::vector<BasePoint> samples;
    for (const auto& [x, w] : support) samples.push_back(x);

    ModeLockVerdict v;
    CocyclePath up = rotation_family_path(c, {field}, eps, +1);
    FrameFlow flow_up = (c.dim == 2) ? FrameFlow::whole_plane()
                                     : FrameFlow::continued(up, /*start_index*/ 0, 24,
                                                            [&field](const BasePoint& y) {
                                                                return field.frame(y);
                                                            });
    if (auto cert = positivity_certificate(up, samples, flow_up, n_max, m_seeds, +1)) {
        v.kind = ModeLockKind::UnlockedUp;
        v.certificate = cert;
        return v;
    }
    CocyclePath down = rotation_family_path(c, {field}, eps, -1);
    FrameFlow flow_down = (c.dim == 2) ? FrameFlow::whole_plane()
                                       : FrameFlow::continued(down, 0, 24,
                                                              [&field](const BasePoint& y) {
                                                                  return field.frame(y);
                                                              });
    if (auto cert = positivity_certificate(down, samples, flow_down, n_max, m_seeds, -1)) {
        v.kind = ModeLockKind::UnlockedDown;
        v.certificate = cert;
        return v;
    }
    v.kind = ModeLockKind::LockedEvidence;
    v.report = domination_report(c, samples, report_n_max);
    return v;
}

// Rotation-part argument of a 2x2 matrix with positive determinant, in
// [0, 2*pi): the angle of the similarity class for complex pairs (signed by
// the projective motion in the oriented frame), 0 for positive real pairs,
// pi for negative real pairs.
inline double eigenvalue_argument(const Mat& m) {
    if (m.rows() != 2 || m.cols() != 2 || m.determinant() <= 0.0)
        throw OrientationError("eigenvalue_argument: 2x2 with positive determinant required");
    const double det = m.determinant();
    const double tr = m(0, 0) + m(1, 1);
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) return tr >= 0.0 ? 0.0 : M_PI;
    double th = std::acos(std::clamp(tr / (2.0 * std::sqrt(det)), -1.0, 1.0));
    // complex pair: the projective motion never vanishes, so its sign at e1
    // (the lower-left entry) is the rotation sign
    if (m(1, 0) < 0.0) th = 2.0 * M_PI - th;
    return th;
}

struct CongruenceResult {
    double residual = 0.0;
    double uncertainty = 0.0;
    double theta_a = 0.0;
    double theta_b = 0.0;
    RotationEnclosure enclosure;
};

// Periodic-orbit congruence: the return-map arguments satisfy
// theta_b - theta_a = 2*pi*p*rho mod 2*pi, with rho the relative rotation
// number above the orbit measure along the continued plane.
inline CongruenceResult return_map_congruence(const MatrixCocycle& a, const MatrixCocycle& b,
                                     const PeriodicOrbit& orbit, int start_index,
                                     const RelRotOptions& opts_in = {}) {
    RelRotOptions opts = opts_in;
    opts.skip_radius_check = true;
    const int p = orbit.period();
    BasePoint x = BasePoint::periodic(orbit.word, 0);
    CocyclePath path = linear_interpolation(a, b);
    FrameFlow flow = (start_index < 0) ? FrameFlow::whole_plane()
                                       : FrameFlow::continued(path, start_index, opts.n_cont);
    Mat fa = flow.at(path.t0, x);
    Mat fb = flow.at(path.t1, x);
    CongruenceResult res;
    res.theta_a = eigenvalue_argument(fa.transpose() * (iterate(a, x, p) * fa));
    res.theta_b = eigenvalue_argument(fb.transpose() * (iterate(b, x, p) * fb));
    auto mu = InvariantMeasure::on_orbit(orbit);
    res.enclosure = path_rotation_number(path, mu, flow, opts.n_list, opts.m_seeds);
    double target = 2.0 * M_PI * p * res.enclosure.midpoint();
    double diff = res.theta_b - res.theta_a - target;
    diff = diff - 2.0 * M_PI * std::round(diff / (2.0 * M_PI));
    res.residual = std::abs(diff);
    res.uncertainty = M_PI * p * res.enclosure.width() + 1e-9;
    return res;
}

}  // namespace rotnum
