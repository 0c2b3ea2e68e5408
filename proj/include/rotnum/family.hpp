#pragma once
//
// Fibered rotation fields and the one-parameter families they generate:
// R_t acts as the rotation of angle t on a frozen oriented plane field and
// as the identity on a frozen complement; composing with a cocycle gives the
// family t -> R_t o A with generator x -> R_t(Tx) * A(x).
//

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rotnum/cocycle.hpp"
#include "rotnum/domination.hpp"

namespace rotnum {

inline constexpr int kFreezeDepth = 6;

struct SpecTooCoarseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A plane field frozen to a finite description: locally constant over
// depth-k cylinders on shift bases, or sampled on a uniform angle grid on
// circle bases. Frames are oriented d x 2; complements d x (d-2).
struct FrozenPlaneField {
    int dim = 2;
    int depth = kFreezeDepth;                 // shift bases
    std::map<Word, Mat> frames;               // shift bases
    std::map<Word, Mat> complements;
    std::vector<Mat> grid_frames;              // circle bases, uniform grid
    std::vector<Mat> grid_complements;
    bool is_circle = false;

    Mat frame(const BasePoint& x) const {
        if (is_circle) {
            size_t i = grid_index(x);
            return grid_frames[i];
        }
        return frames.at(word_at(x));
    }

    Mat complement(const BasePoint& x) const {
        if (is_circle) {
            size_t i = grid_index(x);
            return grid_complements[i];
        }
        return complements.at(word_at(x));
    }

    Word word_at(const BasePoint& x) const {
        Word w(depth);
        for (int k = 0; k < depth; ++k) w[k] = x.symbol(k);
        return w;
    }

    size_t grid_index(const BasePoint& x) const {
        const size_t n = grid_frames.size();
        return static_cast<size_t>(std::llround(x.angle * static_cast<double>(n))) % n;
    }

    // whole-plane field for d = 2
    static FrozenPlaneField whole_plane(const SymbolicSystem& sys, int grid = 64) {
        FrozenPlaneField f;
        f.dim = 2;
        if (sys.is_shift()) {
            f.depth = 1;
            for (int s = 0; s < sys.symbols; ++s) {
                f.frames[{s}] = Mat::Identity(2, 2);
                f.complements[{s}] = Mat(2, 0);
            }
        } else {
            f.is_circle = true;
            f.grid_frames.assign(grid, Mat::Identity(2, 2));
            f.grid_complements.assign(grid, Mat(2, 0));
        }
        return f;
    }

    static FrozenPlaneField constant(const SymbolicSystem& sys, const Mat& frame, int grid = 64) {
        const int d = static_cast<int>(frame.rows());
        Eigen::FullPivHouseholderQR<Mat> qr(frame);
        Mat q = qr.matrixQ();
        Mat u = frame;
        Mat w = q.rightCols(d - 2);
        FrozenPlaneField f;
        f.dim = d;
        if (sys.is_shift()) {
            f.depth = 1;
            for (int s = 0; s < sys.symbols; ++s) {
                f.frames[{s}] = u;
                f.complements[{s}] = w;
            }
        } else {
            f.is_circle = true;
            f.grid_frames.assign(grid, u);
            f.grid_complements.assign(grid, w);
        }
        return f;
    }

    // Freeze a continued/invariant bundle at cylinder depth k: the frame on
    // each cylinder is taken at a representative periodic point (the word
    // repeated), with the complement the orthogonal one.
    static FrozenPlaneField freeze(const MatrixCocycle& c, int start_index, int depth, int n_frame = 24) {
        if (!c.base.is_shift())
            throw std::invalid_argument("FrozenPlaneField::freeze: shift bases only");
        FrozenPlaneField f;
        f.dim = c.dim;
        f.depth = depth;
        Word w(depth);
        Mat prev;
        std::function<void(int)> rec = [&](int k) {
            if (k == depth) {
                if (!c.base.word_admissible(w)) return;
                if (!c.base.cycle_admissible(w)) return;
                BasePoint x = BasePoint::periodic(w, 0);
                Mat u = detail::splitting_frame(c, x, n_frame, start_index, start_index + 2);
                if (prev.size() > 0) {
                    // keep the orientation consistent across cylinders when
                    // the planes are close
                    Mat overlap = u.transpose() * prev;
                    if (overlap.determinant() < 0.0) u.col(1) *= -1.0;
                }
                prev = u;
                Eigen::FullPivHouseholderQR<Mat> qr(u);
                Mat q = qr.matrixQ();
                f.frames[w] = u;
                f.complements[w] = q.rightCols(c.dim - 2);
                return;
            }
            for (int s = 0; s < c.base.symbols; ++s) { w[k] = s; rec(k + 1); }
        };
        rec(0);
        if (f.frames.empty())
            throw std::invalid_argument("FrozenPlaneField::freeze: no admissible cylinders");
        // non-cyclic admissible words fall back to the nearest cyclic one
        Word w2(depth);
        std::function<void(int)> fill = [&](int k) {
            if (k == depth) {
                if (!c.base.word_admissible(w2) || f.frames.count(w2)) return;
                f.frames[w2] = f.frames.begin()->second;
                f.complements[w2] = f.complements.begin()->second;
                return;
            }
            for (int s = 0; s < c.base.symbols; ++s) { w2[k] = s; fill(k + 1); }
        };
        fill(0);
        return f;
    }
};

namespace detail {

inline Mat plane_rotation(const FrozenPlaneField& field, const BasePoint& x, double angle) {
    Mat u = field.frame(x);
    Mat w = field.complement(x);
    const int d = static_cast<int>(u.rows());
    Mat g(d, d);
    g.leftCols(2) = u;
    if (w.cols() > 0) g.rightCols(d - 2) = w;
    Mat block = Mat::Identity(d, d);
    block(0, 0) = std::cos(angle);
    block(0, 1) = -std::sin(angle);
    block(1, 0) = std::sin(angle);
    block(1, 1) = std::cos(angle);
    return g * block * g.inverse();
}

}  // namespace detail

// Generator of R_{angles} o A: x -> R(Tx) * A(x), where R rotates by
// angles[i] in fields[i]'s plane. Shift bases get a depth-(k+1) table;
// circle bases a pointwise evaluator.
inline MatrixCocycle apply_rotation_family(const MatrixCocycle& c,
                                           const std::vector<FrozenPlaneField>& fields,
                                           const std::vector<double>& angles) {
    if (fields.size() != angles.size())
        throw std::invalid_argument("apply_rotation_family: field/angle count mismatch");
    auto rot_at = [fields, angles](const BasePoint& y) {
        Mat r = Mat::Identity(fields.empty() ? 2 : fields[0].dim,
                              fields.empty() ? 2 : fields[0].dim);
        for (size_t i = 0; i < fields.size(); ++i)
            r = detail::plane_rotation(fields[i], y, angles[i]) * r;
        return r;
    };
    if (!c.base.is_shift()) {
        MatrixCocycle base_copy = c;
        SymbolicSystem sys = c.base;
        return MatrixCocycle::pointwise(c.base, c.dim, [base_copy, rot_at, sys](const BasePoint& x) {
            return Mat(rot_at(step(sys, x, 1)) * base_copy.at(x));
        });
    }
    int k = 1;
    for (const auto& f : fields) k = std::max(k, f.depth);
    MatrixCocycle out = deepen(c, std::max(c.depth, k + 1));
    for (auto& [w, m] : out.table) {
        BasePoint x = BasePoint::periodic(w, 0);
        // the image point's leading k symbols are w[1..k], which the deepened
        // word determines
        m = rot_at(step(out.base, x, 1)) * m;
    }
    return out;
}

// The path s in [0,1] -> R_{s * angles} o A toward a fixed angle vector.
inline CocyclePath rotation_ray_path(const MatrixCocycle& c,
                                     const std::vector<FrozenPlaneField>& fields,
                                     const std::vector<double>& target_angles,
                                     double step_cap = kPathStepCap) {
    if (fields.size() != target_angles.size())
        throw std::invalid_argument("rotation_ray_path: field/angle count mismatch");
    CocyclePath p;
    p.t0 = 0.0;
    p.t1 = 1.0;
    p.eval = [c, fields, target_angles](double s) {
        std::vector<double> angles(target_angles);
        for (auto& a : angles) a *= s;
        return apply_rotation_family(c, fields, angles);
    };
    double amax = 0.0;
    for (double a : target_angles) amax = std::max(amax, std::abs(a));
    int steps = std::max(1, static_cast<int>(std::ceil(amax * 4.0 / step_cap)));
    for (int i = 0; i <= steps; ++i) p.knots.push_back(static_cast<double>(i) / steps);
    auto info = std::make_shared<RotationFamilyInfo>();
    info->rotation_at = [fields, target_angles](double s, const BasePoint& y) {
        Mat r = Mat::Identity(fields[0].dim, fields[0].dim);
        for (size_t i = 0; i < fields.size(); ++i)
            r = detail::plane_rotation(fields[i], y, s * target_angles[i]) * r;
        return r;
    };
    p.family = info;
    return p;
}

// The path t -> R_{t * direction} o A on t in [0, t_max].
inline CocyclePath rotation_family_path(const MatrixCocycle& c,
                                        const std::vector<FrozenPlaneField>& fields,
                                        double t_max, int direction = +1,
                                        double step_cap = kPathStepCap) {
    CocyclePath p;
    p.t0 = 0.0;
    p.t1 = t_max;
    p.eval = [c, fields, direction](double t) {
        std::vector<double> angles(fields.size(), t * direction);
        return apply_rotation_family(c, fields, angles);
    };
    int steps = std::max(1, static_cast<int>(std::ceil(t_max * 4.0 / step_cap)));
    for (int i = 0; i <= steps; ++i) p.knots.push_back(t_max * i / steps);
    auto info = std::make_shared<RotationFamilyInfo>();
    info->rotation_at = [fields, direction](double t, const BasePoint& y) {
        Mat r = Mat::Identity(fields[0].dim, fields[0].dim);
        for (const auto& f : fields) r = detail::plane_rotation(f, y, t * direction) * r;
        return r;
    };
    p.family = info;
    return p;
}

}  // namespace rotnum
