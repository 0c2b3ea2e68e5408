#pragma once
//
// Dominated-splitting detection: exact N-step checks on periodic generator
// loops, asymptotic detection via singular-value ratios with fitted (C, tau),
// finest splitting from backward-forward singular subspaces, bundle
// continuation along cocycle paths, orientation checks.
//

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rotnum/cocycle.hpp"

namespace rotnum {

inline constexpr double kDominationMargin = 0.02;
inline constexpr double kRatioFloor = 0.5;
inline constexpr double kDefectTol = 1e-7;

struct NotSplittableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContinuationBrokenError : std::runtime_error {
    double knot;
    ContinuationBrokenError(const std::string& what, double knot_)
        : std::runtime_error(what), knot(knot_) {}
};

enum class OrientationFlag { Oriented, Unorientable, Unknown };

// An approximately invariant subbundle sampled at finitely many base points.
// Frames are orthonormal d x dim matrices whose columns span the fiber; the
// bundle occupies ascending singular-value indices [start_index,
// start_index + dim) of the asymptotic splitting.
struct Bundle {
    int dim = 0;
    int start_index = 0;
    OrientationFlag orientation = OrientationFlag::Unknown;
    std::vector<BasePoint> points;
    std::vector<Mat> frames;

    const Mat* frame_at(const BasePoint& x) const {
        const std::string k = x.key();
        for (size_t i = 0; i < points.size(); ++i)
            if (points[i].key() == k) return &frames[i];
        return nullptr;
    }

    void add(const BasePoint& x, Mat frame) {
        points.push_back(x);
        frames.push_back(std::move(frame));
    }
};

enum class Verdict { Dominated, NotDominated, Inconclusive };

struct SplittingReport {
    struct IndexResult {
        int index = 0;  // split after the `index` weakest singular directions
        Verdict verdict = Verdict::Inconclusive;
        double c_fit = 1.0;
        double tau_fit = 1.0;
        BasePoint worst_point;
        double worst_ratio = 1.0;  // sigma_i/sigma_{i+1} at n_max, max over samples
    };
    std::vector<IndexResult> per_index;
    std::vector<int> finest_dims;
    int n_max = 0;
    double margin = kDominationMargin;

    bool dominated_at(int index) const {
        for (const auto& r : per_index)
            if (r.index == index) return r.verdict == Verdict::Dominated;
        return false;
    }
};

namespace detail {

// Orthonormal frame at x approximating the splitting bundle of ascending
// indices [lo, hi): intersection of the dimension-hi stable flag (weakest
// right singular subspace of the forward product at x) with the
// dimension-(d-lo) unstable flag (strongest left singular subspace of the
// backward product into x).
inline Mat splitting_frame(const MatrixCocycle& c, const BasePoint& x, long long n, int lo, int hi) {
    const int d = c.dim;
    if (lo == 0 && hi == d) return Mat::Identity(d, d);
    Mat stable;
    if (lo == 0 || hi < d) {
        auto [mf, ls] = iterate_scaled(c, x, n);
        (void)ls;
        Eigen::JacobiSVD<Mat> svd(mf, Eigen::ComputeFullV);
        stable = svd.matrixV().rightCols(hi);  // Eigen sorts descending
    }
    if (lo == 0) return stable;
    Mat unstable;
    {
        BasePoint y = step(c.base, x, -n);
        auto [mb, ls] = iterate_scaled(c, y, n);
        (void)ls;
        Eigen::JacobiSVD<Mat> svd(mb, Eigen::ComputeFullU);
        unstable = svd.matrixU().leftCols(d - lo);
    }
    if (hi == d) return unstable;
    Mat overlap = stable.transpose() * unstable;
    Eigen::JacobiSVD<Mat> svd(overlap, Eigen::ComputeFullU);
    return Mat(stable * svd.matrixU().leftCols(hi - lo));
}

// ascending log singular values of an incremental product family:
// rows n = 1..n_max, columns i = 0..d-1
inline std::vector<Vec> log_sv_profile(const MatrixCocycle& c, const BasePoint& x, int n_max) {
    std::vector<Vec> out;
    Mat m = Mat::Identity(c.dim, c.dim);
    double log_scale = 0.0;
    BasePoint y = x;
    for (int n = 1; n <= n_max; ++n) {
        m = c.at(y) * m;
        y = step(c.base, y);
        double s = m.norm();
        m /= s;
        log_scale += std::log(s);
        Eigen::JacobiSVD<Mat> svd(m);
        Vec ls(c.dim);
        for (int i = 0; i < c.dim; ++i)
            ls[i] = std::log(svd.singularValues()[c.dim - 1 - i]) + log_scale;
        out.push_back(ls);
    }
    return out;
}

struct EigenSplit {
    Mat weak;    // invariant subspace of the i smallest eigen-moduli
    Mat strong;  // complement (d-i largest)
};

// Invariant splitting of a single matrix at ascending eigen-moduli index i.
inline EigenSplit eigen_split(const Mat& p, int index) {
    const int d = static_cast<int>(p.rows());
    Eigen::EigenSolver<Mat> es(p);
    std::vector<int> order(d);
    for (int i = 0; i < d; ++i) order[i] = i;
    auto mod = [&](int i) { return std::abs(es.eigenvalues()[i]); };
    std::sort(order.begin(), order.end(), [&](int a, int b) { return mod(a) < mod(b); });
    if (std::abs(mod(order[index - 1]) - mod(order[index])) <=
        1e-12 * std::max(1.0, mod(order[index])))
        throw NotSplittableError("eigen_split: eigen-moduli tie at requested index");

    auto real_span = [&](int from, int to) {
        std::vector<Eigen::VectorXd> cols;
        for (int k = from; k < to; ++k) {
            Eigen::VectorXcd v = es.eigenvectors().col(order[k]);
            Eigen::VectorXd re = v.real(), im = v.imag();
            if (re.norm() > 1e-14) cols.push_back(re);
            if (im.norm() > 1e-14) cols.push_back(im);
        }
        Mat raw(d, static_cast<int>(cols.size()));
        for (size_t j = 0; j < cols.size(); ++j) raw.col(static_cast<int>(j)) = cols[j];
        Eigen::ColPivHouseholderQR<Mat> qr(raw);
        qr.setThreshold(1e-10);
        if (static_cast<int>(qr.rank()) != to - from)
            throw NotSplittableError("eigen_split: degenerate invariant subspace");
        Mat q = qr.householderQ();
        return Mat(q.leftCols(to - from));
    };
    EigenSplit s;
    s.weak = real_span(0, index);
    s.strong = real_span(index, d);
    return s;
}

inline double sigma_max(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()[0];
}

inline double sigma_min(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()[svd.singularValues().size() - 1];
}

}  // namespace detail

// Exact N-step domination check on a periodic generator loop
// [A(x), A(Tx), ..., A(T^{p-1}x)]: at every cyclic position, every unit u in
// the index-i invariant subbundle and unit v in the complement satisfy
// ||A^N u|| < 1/2 ||A^N v||, tested through extremal singular values of the
// induced operators.
inline bool n_domination_check(const std::vector<Mat>& loop, int index, int N) {
    if (loop.empty() || N < 1) throw std::invalid_argument("n_domination_check: bad input");
    const int p = static_cast<int>(loop.size());
    const int d = static_cast<int>(loop[0].rows());
    if (index < 1 || index >= d) throw std::invalid_argument("n_domination_check: bad index");

    Mat ret = Mat::Identity(d, d);
    for (int k = 0; k < p; ++k) ret = loop[k] * ret;

    detail::EigenSplit split;
    try {
        split = detail::eigen_split(ret, index);
    } catch (const NotSplittableError&) {
        // A moduli tie at the index kills domination outright when the tied
        // eigenvalues are real (invariant splittings exist, all with ratio 1);
        // a complex pair leaves no invariant index-i splitting at all.
        Eigen::EigenSolver<Mat> es(ret);
        std::vector<std::complex<double>> ev(es.eigenvalues().data(),
                                             es.eigenvalues().data() + d);
        std::sort(ev.begin(), ev.end(),
                  [](auto a, auto b) { return std::abs(a) < std::abs(b); });
        if (std::abs(ev[index - 1].imag()) < 1e-10 * std::max(1.0, std::abs(ev[index - 1])) &&
            std::abs(ev[index].imag()) < 1e-10 * std::max(1.0, std::abs(ev[index])))
            return false;
        throw;
    }

    // propagate the splitting along the orbit
    std::vector<Mat> weak(p), strong(p);
    weak[0] = split.weak;
    strong[0] = split.strong;
    for (int k = 1; k < p; ++k) {
        Mat qw = Eigen::HouseholderQR<Mat>(loop[k - 1] * weak[k - 1]).householderQ();
        weak[k] = qw.leftCols(index);
        Mat qs = Eigen::HouseholderQR<Mat>(loop[k - 1] * strong[k - 1]).householderQ();
        strong[k] = qs.leftCols(d - index);
    }
    for (int k = 0; k < p; ++k) {
        Mat m = Mat::Identity(d, d);
        for (int j = 0; j < N; ++j) m = loop[(k + j) % p] * m;
        if (!(detail::sigma_max(m * weak[k]) < 0.5 * detail::sigma_min(m * strong[k])))
            return false;
    }
    return true;
}

// Regress log(sigma_i/sigma_{i+1})(n) on n over n in [n_max/2, n_max] per
// sample; dominated if the slope stays below log(1 - margin) at every sample,
// not-dominated if some sample's ratio at n_max is >= ratio_floor.
inline SplittingReport domination_report(const MatrixCocycle& c, const std::vector<BasePoint>& samples,
                                         int n_max, double margin = kDominationMargin,
                                         double ratio_floor = kRatioFloor) {
    if (samples.empty() || n_max < 8)
        throw std::invalid_argument("domination_report: need samples and n_max >= 8");
    const int d = c.dim;
    SplittingReport rep;
    rep.n_max = n_max;
    rep.margin = margin;

    std::vector<std::vector<Vec>> profiles;
    profiles.reserve(samples.size());
    for (const auto& x : samples) profiles.push_back(detail::log_sv_profile(c, x, n_max));

    const int n_lo = n_max / 2;
    for (int i = 1; i < d; ++i) {
        SplittingReport::IndexResult r;
        r.index = i;
        double worst_slope = -1e300;
        double worst_ratio = -1e300;
        double c_fit = 0.0;
        size_t worst_sample = 0;
        bool ok_fit = true;
        for (size_t s = 0; s < samples.size(); ++s) {
            // log ratio of ascending sigma_{i-1} over sigma_i (0-based), i.e.
            // the gap being tested at split index i
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            int cnt = 0;
            for (int n = n_lo; n <= n_max; ++n) {
                double y = profiles[s][n - 1][i - 1] - profiles[s][n - 1][i];
                sx += n; sy += y; sxx += double(n) * n; sxy += double(n) * y;
                ++cnt;
            }
            double denom = cnt * sxx - sx * sx;
            double slope = (cnt * sxy - sx * sy) / denom;
            double intercept = (sy - slope * sx) / cnt;
            double ratio_end = std::exp(profiles[s][n_max - 1][i - 1] - profiles[s][n_max - 1][i]);
            if (ratio_end > worst_ratio) {
                worst_ratio = ratio_end;
                worst_sample = s;
            }
            worst_slope = std::max(worst_slope, slope);
            c_fit = std::max(c_fit, std::exp(intercept));
            // residual sanity: the fit should describe the tail
            for (int n = n_lo; n <= n_max; ++n) {
                double y = profiles[s][n - 1][i - 1] - profiles[s][n - 1][i];
                if (std::abs(y - (intercept + slope * n)) > 0.5 * std::abs(slope) * n + 2.0)
                    ok_fit = false;
            }
        }
        r.worst_ratio = worst_ratio;
        r.worst_point = samples[worst_sample];
        r.tau_fit = std::exp(worst_slope);
        r.c_fit = std::max(c_fit, 1e-300);
        if (worst_ratio >= ratio_floor) {
            r.verdict = Verdict::NotDominated;
        } else if (ok_fit && worst_slope <= std::log(1.0 - margin)) {
            r.verdict = Verdict::Dominated;
        } else {
            r.verdict = Verdict::Inconclusive;
        }
        rep.per_index.push_back(r);
    }

    int prev = 0;
    for (int i = 1; i < d; ++i) {
        if (rep.per_index[i - 1].verdict == Verdict::Dominated) {
            rep.finest_dims.push_back(i - prev);
            prev = i;
        }
    }
    rep.finest_dims.push_back(d - prev);
    return rep;
}

// Bundles of the finest detected splitting: frame at x spans the
// corresponding ascending left singular subspace of the backward product
// iterate(c, T^{-n_max}x, n_max); invariance defect checked against the
// one-step image.
inline std::vector<Bundle> finest_splitting(const MatrixCocycle& c, const std::vector<BasePoint>& samples,
                                            int n_max, double defect_tol = kDefectTol) {
    SplittingReport rep = domination_report(c, samples, n_max);
    for (const auto& r : rep.per_index)
        if (r.verdict == Verdict::Inconclusive)
            throw std::runtime_error(
                "finest_splitting: inconclusive domination verdict at index " +
                std::to_string(r.index));

    std::vector<Bundle> bundles;
    int lo = 0;
    for (int dim : rep.finest_dims) {
        Bundle b;
        b.dim = dim;
        b.start_index = lo;
        for (const auto& x : samples) {
            Mat f = detail::splitting_frame(c, x, n_max, lo, lo + dim);
            b.add(x, std::move(f));
        }
        bundles.push_back(std::move(b));
        lo += dim;
    }

    for (auto& b : bundles) {
        for (size_t k = 0; k < b.points.size(); ++k) {
            const BasePoint& x = b.points[k];
            BasePoint tx = step(c.base, x, 1);
            const Mat* ftx = b.frame_at(tx);
            Mat ftx_local;
            if (!ftx) {
                ftx_local = detail::splitting_frame(c, tx, n_max, b.start_index,
                                                   b.start_index + b.dim);
                ftx = &ftx_local;
            }
            Mat img = c.at(x) * b.frames[k];
            // normalize columns so the defect is scale-free
            for (int j = 0; j < img.cols(); ++j) img.col(j).normalize();
            Mat defect = img - (*ftx) * ((*ftx).transpose() * img);
            if (defect.norm() > defect_tol)
                throw std::runtime_error("finest_splitting: invariance defect " +
                                         std::to_string(defect.norm()) + " above tolerance at " +
                                         x.key());
        }
    }
    return bundles;
}

// Continue an invariant bundle along a path of cocycles, knot by knot, using
// the same singular-subspace construction; orientation transported by
// orthogonal projection onto the previous frame.
inline std::vector<Bundle> bundle_continuation(const CocyclePath& path, const Bundle& e,
                                               std::vector<double> knots, int n_cont = 24,
                                               double ratio_floor = kRatioFloor,
                                               int max_refine = 12) {
    if (knots.size() < 2) throw std::invalid_argument("bundle_continuation: need >= 2 knots");
    std::vector<Bundle> out;
    Bundle prev = e;
    const double cos_quarter = std::cos(M_PI / 4.0);

    std::vector<double> agenda(knots.begin(), knots.end());
    size_t i = 0;
    out.push_back(prev);
    ++i;
    int refinements = 0;
    while (i < agenda.size()) {
        double t = agenda[i];
        MatrixCocycle ct = path.at(t);
        Bundle cur;
        cur.dim = e.dim;
        cur.start_index = e.start_index;
        bool too_far = false;
        for (size_t k = 0; k < prev.points.size(); ++k) {
            const BasePoint& x = prev.points[k];
            // domination must persist at the bundle edges
            Vec ls = log_singular_values(ct, step(ct.base, x, -n_cont), n_cont);
            auto edge_ok = [&](int idx) {
                if (idx <= 0 || idx >= ct.dim) return true;
                return std::exp(ls[idx - 1] - ls[idx]) < ratio_floor;
            };
            if (!edge_ok(e.start_index) || !edge_ok(e.start_index + e.dim))
                throw ContinuationBrokenError("bundle_continuation: domination lost", t);

            Mat f = detail::splitting_frame(ct, x, n_cont, e.start_index, e.start_index + e.dim);
            Mat overlap = f.transpose() * prev.frames[k];
            Eigen::JacobiSVD<Mat> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
            if (svd.singularValues()[svd.singularValues().size() - 1] < cos_quarter) {
                too_far = true;
                break;
            }
            // align to the previous frame (projection transport)
            f = f * (svd.matrixU() * svd.matrixV().transpose());
            cur.add(x, std::move(f));
        }
        if (too_far) {
            if (++refinements > max_refine)
                throw ContinuationBrokenError("bundle_continuation: refinement limit", t);
            agenda.insert(agenda.begin() + static_cast<long>(i), 0.5 * (agenda[i - 1] + t));
            continue;
        }
        if (std::binary_search(knots.begin(), knots.end(), t)) out.push_back(cur);
        prev = std::move(cur);
        ++i;
    }
    return out;
}

struct OrientationResult {
    bool orientable = false;
    bool preserved = false;
};

// Transport a frame of a 2-dimensional invariant bundle around each periodic
// point; the bundle over a finite orbit is always orientable, and the cocycle
// preserves orientation iff every return map has positive determinant.
inline OrientationResult orientation_check(const MatrixCocycle& c, const Bundle& e,
                                           const std::vector<std::pair<BasePoint, int>>& orbit_points,
                                           int n_frame = 24) {
    if (e.dim != 2) throw std::invalid_argument("orientation_check: 2-dimensional bundles only");
    OrientationResult res;
    res.orientable = true;
    res.preserved = true;
    for (const auto& [x, period] : orbit_points) {
        const Mat* f = e.frame_at(x);
        Mat flocal;
        if (!f) {
            flocal = detail::splitting_frame(c, x, n_frame, e.start_index, e.start_index + e.dim);
            f = &flocal;
        }
        Mat ret = iterate(c, x, period);
        Mat m2 = f->transpose() * (ret * (*f));
        if (m2.determinant() <= 0.0) res.preserved = false;
    }
    return res;
}

inline OrientationResult orientation_check(const MatrixCocycle& c, const Bundle& e,
                                           const std::vector<PeriodicOrbit>& orbits,
                                           int n_frame = 24) {
    std::vector<std::pair<BasePoint, int>> pts;
    for (const auto& o : orbits) pts.emplace_back(BasePoint::periodic(o.word, 0), o.period());
    return orientation_check(c, e, pts, n_frame);
}

}  // namespace rotnum
