#pragma once
//
// Matrix cocycles over a base system: locally constant generators over shift
// bases (depth-m word tables), trigonometric-polynomial generators over
// circle rotations, iteration with periodic rescaling, singular values,
// Lyapunov estimates, cylinder-supported perturbations.
//

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "rotnum/base.hpp"

namespace rotnum {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline constexpr double kDetFloor = 1e-9;
inline constexpr double kPathStepCap = 0.05;
inline constexpr int kRescaleEvery = 25;

struct MatrixCocycle {
    SymbolicSystem base;
    int dim = 2;
    int depth = 1;                             // shift bases
    std::map<Word, Mat> table;                 // shift bases: depth-m word -> matrix
    struct Harmonic {
        int k = 0;
        Mat cos_coeff;  // coefficient of cos(2*pi*k*theta)
        Mat sin_coeff;  // coefficient of sin(2*pi*k*theta)
    };
    std::vector<Harmonic> harmonics;           // circle bases
    std::function<Mat(const BasePoint&)> custom;  // overrides table/harmonics when set
    double det_floor = kDetFloor;

    Mat at(const BasePoint& x) const {
        if (custom) return custom(x);
        if (base.is_shift()) {
            Word w(depth);
            for (int k = 0; k < depth; ++k) w[k] = x.symbol(k);
            auto it = table.find(w);
            if (it == table.end())
                throw std::out_of_range("MatrixCocycle::at: word not in generator table");
            return it->second;
        }
        Mat a = Mat::Zero(dim, dim);
        for (const auto& h : harmonics) {
            const double ph = 2.0 * M_PI * h.k * x.angle;
            if (h.cos_coeff.size() > 0) a += std::cos(ph) * h.cos_coeff;
            if (h.sin_coeff.size() > 0) a += std::sin(ph) * h.sin_coeff;
        }
        return a;
    }

    static MatrixCocycle constant(const SymbolicSystem& base, const Mat& a) {
        MatrixCocycle c;
        c.base = base;
        c.dim = static_cast<int>(a.rows());
        if (base.is_shift()) {
            c.depth = 1;
            for (int s = 0; s < base.symbols; ++s) c.table[{s}] = a;
        } else {
            c.harmonics.push_back({0, a, Mat()});
        }
        c.validate();
        return c;
    }

    static MatrixCocycle from_table(const SymbolicSystem& base, int depth, std::map<Word, Mat> table) {
        if (!base.is_shift()) throw std::invalid_argument("from_table: shift bases only");
        MatrixCocycle c;
        c.base = base;
        c.depth = depth;
        c.table = std::move(table);
        c.dim = static_cast<int>(c.table.begin()->second.rows());
        c.validate();
        return c;
    }

    static MatrixCocycle trig(const SymbolicSystem& base, std::vector<Harmonic> harmonics,
                              int validation_samples = 64) {
        if (base.is_shift()) throw std::invalid_argument("trig: circle bases only");
        MatrixCocycle c;
        c.base = base;
        c.harmonics = std::move(harmonics);
        for (const auto& h : c.harmonics) {
            if (h.cos_coeff.size() > 0) c.dim = static_cast<int>(h.cos_coeff.rows());
            if (h.sin_coeff.size() > 0) c.dim = static_cast<int>(h.sin_coeff.rows());
        }
        c.validate(validation_samples);
        return c;
    }

    // Non-serializable evaluator; caller promises the determinant floor.
    static MatrixCocycle pointwise(const SymbolicSystem& base, int dim,
                                   std::function<Mat(const BasePoint&)> fn) {
        MatrixCocycle c;
        c.base = base;
        c.dim = dim;
        c.custom = std::move(fn);
        return c;
    }

    void validate(int circle_samples = 64) const {
        if (custom) return;
        if (base.is_shift()) {
            Word w(depth);
            std::function<void(int)> rec = [&](int k) {
                if (k == depth) {
                    if (!base.word_admissible(w)) return;
                    auto it = table.find(w);
                    if (it == table.end())
                        throw std::invalid_argument("MatrixCocycle: table missing admissible word");
                    if (std::abs(it->second.determinant()) < det_floor)
                        throw std::invalid_argument("MatrixCocycle: determinant below floor");
                    return;
                }
                for (int s = 0; s < base.symbols; ++s) { w[k] = s; rec(k + 1); }
            };
            rec(0);
        } else {
            for (int i = 0; i < circle_samples; ++i) {
                BasePoint x = BasePoint::on_circle(static_cast<double>(i) / circle_samples);
                if (std::abs(at(x).determinant()) < det_floor)
                    throw std::invalid_argument("MatrixCocycle: determinant below floor on circle");
            }
        }
    }
};

// A(T^{n-1}x)...A(x); n = 0 gives the identity, n < 0 the inverse of the
// forward product along the backward orbit.
inline Mat iterate(const MatrixCocycle& c, const BasePoint& x, long long n) {
    Mat m = Mat::Identity(c.dim, c.dim);
    if (n >= 0) {
        BasePoint y = x;
        for (long long k = 0; k < n; ++k) {
            m = c.at(y) * m;
            y = step(c.base, y);
        }
    } else {
        BasePoint y = x;
        for (long long k = 0; k < -n; ++k) {
            y = step(c.base, y, -1);
            m = c.at(y).inverse() * m;
        }
    }
    return m;
}

// Same product, rescaled by its norm every kRescaleEvery steps; returns the
// rescaled matrix and the accumulated log of the discarded scale.
inline std::pair<Mat, double> iterate_scaled(const MatrixCocycle& c, const BasePoint& x, long long n) {
    if (n < 0) throw std::invalid_argument("iterate_scaled: n >= 0 required");
    Mat m = Mat::Identity(c.dim, c.dim);
    double log_scale = 0.0;
    BasePoint y = x;
    for (long long k = 0; k < n; ++k) {
        m = c.at(y) * m;
        y = step(c.base, y);
        if ((k + 1) % kRescaleEvery == 0) {
            double s = m.norm();
            m /= s;
            log_scale += std::log(s);
        }
    }
    return {m, log_scale};
}

inline Vec singular_values(const MatrixCocycle& c, const BasePoint& x, long long n) {
    Eigen::JacobiSVD<Mat> svd(iterate(c, x, n));
    Vec s = svd.singularValues();  // Eigen: descending
    return s.reverse();
}

inline Vec log_singular_values(const MatrixCocycle& c, const BasePoint& x, long long n) {
    auto [m, log_scale] = iterate_scaled(c, x, n);
    Eigen::JacobiSVD<Mat> svd(m);
    Vec s = svd.singularValues();
    Vec out(c.dim);
    for (int i = 0; i < c.dim; ++i) out[i] = std::log(s[c.dim - 1 - i]) + log_scale;
    return out;
}

// (1/n) * integral of log sigma_i(., n) d mu, ascending.
inline std::vector<double> lyapunov_estimate(const MatrixCocycle& c, const InvariantMeasure& mu,
                                             long long n) {
    if (n < 1) throw std::invalid_argument("lyapunov_estimate: n >= 1 required");
    std::vector<double> acc(c.dim, 0.0);
    for (const auto& [x, w] : measure_support_points(c.base, mu)) {
        Vec ls = log_singular_values(c, x, n);
        for (int i = 0; i < c.dim; ++i) acc[i] += w * ls[i];
    }
    for (auto& v : acc) v /= static_cast<double>(n);
    return acc;
}

// Restrict a depth-m table to depth m' > m (value depends on the first m
// symbols only); products are unchanged.
inline MatrixCocycle deepen(const MatrixCocycle& c, int new_depth) {
    if (!c.base.is_shift()) throw std::invalid_argument("deepen: shift bases only");
    if (c.custom) throw std::invalid_argument("deepen: table-backed cocycles only");
    if (new_depth < c.depth) throw std::invalid_argument("deepen: new depth below current");
    if (new_depth == c.depth) return c;
    MatrixCocycle out;
    out.base = c.base;
    out.dim = c.dim;
    out.depth = new_depth;
    out.det_floor = c.det_floor;
    Word w(new_depth);
    std::function<void(int)> rec = [&](int k) {
        if (k == new_depth) {
            if (!c.base.word_admissible(w)) return;
            Word prefix(w.begin(), w.begin() + c.depth);
            out.table[w] = c.table.at(prefix);
            return;
        }
        for (int s = 0; s < c.base.symbols; ++s) { w[k] = s; rec(k + 1); }
    };
    rec(0);
    return out;
}

enum class PerturbMode { Compose, Add };

// Sup distance between two table or trig cocycles over the same base
// (max over admissible words, resp. circle samples, of the operator-norm gap).
inline double sup_distance(const MatrixCocycle& a, const MatrixCocycle& b, int circle_samples = 256) {
    double d = 0.0;
    if (a.base.is_shift()) {
        const MatrixCocycle* pa = &a;
        const MatrixCocycle* pb = &b;
        MatrixCocycle da, db;
        int m = std::max(a.depth, b.depth);
        if (a.depth < m && !a.custom) { da = deepen(a, m); pa = &da; }
        if (b.depth < m && !b.custom) { db = deepen(b, m); pb = &db; }
        for (const auto& [w, ma] : pa->table) {
            auto it = pb->table.find(w);
            if (it == pb->table.end()) continue;
            d = std::max(d, (ma - it->second).operatorNorm());
        }
    } else {
        for (int i = 0; i < circle_samples; ++i) {
            BasePoint x = BasePoint::on_circle(static_cast<double>(i) / circle_samples);
            d = std::max(d, (a.at(x) - b.at(x)).operatorNorm());
        }
    }
    return d;
}

// Modify the generator on the cylinder [word] (coordinates 0..|word|-1)
// only: compose mode maps A_w to (I+Delta)*A_w, add mode to A_w + Delta.
// Deepens the table to max(depth, |word|) first.
inline MatrixCocycle perturb_on_cylinder(const MatrixCocycle& c, const Word& word, const Mat& delta,
                                         PerturbMode mode, double* sup_dist_out = nullptr) {
    if (!c.base.is_shift())
        throw std::invalid_argument("perturb_on_cylinder: shift bases only");
    if (c.custom)
        throw std::invalid_argument("perturb_on_cylinder: table-backed cocycles only");
    MatrixCocycle out = deepen(c, std::max<int>(c.depth, static_cast<int>(word.size())));
    double dist = 0.0;
    for (auto& [w, m] : out.table) {
        if (!std::equal(word.begin(), word.end(), w.begin())) continue;
        Mat nm = (mode == PerturbMode::Compose)
                     ? Mat((Mat::Identity(c.dim, c.dim) + delta) * m)
                     : Mat(m + delta);
        if (std::abs(nm.determinant()) < out.det_floor)
            throw std::invalid_argument("perturb_on_cylinder: determinant below floor");
        dist = std::max(dist, (nm - m).operatorNorm());
        m = nm;
    }
    if (sup_dist_out) *sup_dist_out = dist;
    return out;
}

// Marker for paths of the form t -> R_t o A with a t=0 base cocycle and an
// explicit rotation factor; enables exact lift-based winding evaluation.
struct RotationFamilyInfo {
    std::function<Mat(double, const BasePoint&)> rotation_at;
};

// A continuous one-parameter family of cocycles on [t0, t1].
struct CocyclePath {
    double t0 = 0.0;
    double t1 = 1.0;
    std::function<MatrixCocycle(double)> eval;
    std::vector<double> knots;  // grid on which step_cap was checked
    std::shared_ptr<const RotationFamilyInfo> family;

    MatrixCocycle at(double t) const { return eval(t); }
};

inline CocyclePath constant_path(const MatrixCocycle& c) {
    CocyclePath p;
    p.eval = [c](double) { return c; };
    p.knots = {0.0, 1.0};
    return p;
}

inline CocyclePath linear_interpolation(const MatrixCocycle& a, const MatrixCocycle& b,
                                        double step_cap = kPathStepCap) {
    if (a.base.is_shift() != b.base.is_shift() || a.dim != b.dim)
        throw std::invalid_argument("linear_interpolation: incompatible cocycles");
    MatrixCocycle a2 = a, b2 = b;
    if (a.base.is_shift()) {
        int m = std::max(a.depth, b.depth);
        a2 = deepen(a, m);
        b2 = deepen(b, m);
    }
    const double gap = sup_distance(a2, b2);
    int steps = std::max(1, static_cast<int>(std::ceil(gap / step_cap)));
    CocyclePath p;
    p.eval = [a2, b2](double t) {
        MatrixCocycle c = a2;
        if (a2.base.is_shift()) {
            for (auto& [w, m] : c.table) {
                m = (1.0 - t) * m + t * b2.table.at(w);
                if (std::abs(m.determinant()) < c.det_floor)
                    throw std::invalid_argument("linear_interpolation: determinant below floor");
            }
        } else {
            MatrixCocycle ac = a2, bc = b2;
            c = MatrixCocycle::pointwise(a2.base, a2.dim, [ac, bc, t](const BasePoint& x) {
                return Mat((1.0 - t) * ac.at(x) + t * bc.at(x));
            });
        }
        return c;
    };
    for (int i = 0; i <= steps; ++i) {
        double t = static_cast<double>(i) / steps;
        p.knots.push_back(t);
        p.at(t);  // determinant floor check along the grid
    }
    return p;
}

inline CocyclePath sampled_path(std::vector<MatrixCocycle> cocycles, std::vector<double> knots) {
    if (cocycles.size() != knots.size() || cocycles.size() < 2)
        throw std::invalid_argument("sampled_path: need matching knots and >= 2 samples");
    for (size_t i = 0; i + 1 < cocycles.size(); ++i)
        if (sup_distance(cocycles[i], cocycles[i + 1]) > kPathStepCap + 1e-12)
            throw std::invalid_argument("sampled_path: adjacent samples exceed step cap");
    CocyclePath p;
    p.t0 = knots.front();
    p.t1 = knots.back();
    p.knots = knots;
    auto cs = std::make_shared<std::vector<MatrixCocycle>>(std::move(cocycles));
    auto ks = std::make_shared<std::vector<double>>(std::move(knots));
    p.eval = [cs, ks](double t) {
        auto it = std::lower_bound(ks->begin(), ks->end(), t);
        size_t i = std::min<size_t>(ks->size() - 1, static_cast<size_t>(it - ks->begin()));
        if (i > 0 && (i == ks->size() || std::abs((*ks)[i - 1] - t) < std::abs((*ks)[i] - t))) --i;
        return (*cs)[i];
    };
    return p;
}

}  // namespace rotnum
