#pragma once
//
// Explicit perturbation constructions and searches: monotone rotation
// families with derivative certificates, redistribution of singular values
// along a factor sequence, eigen-moduli equalization, elliptic-point
// searches (single- and multi-bundle with the face-sign parameter map), and
// the simple-spectrum pipeline.
//

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rotnum/family.hpp"
#include "rotnum/rotation.hpp"

namespace rotnum {

inline constexpr double kSplitEps = 1e-2;       // moduli-splitting diagonal factor
inline constexpr double kSimpleGapTol = 1e-3;   // simple spectrum: min adjacent ratio - 1

// ---------------------------------------------------------------------------
// Monotone rotation families
// ---------------------------------------------------------------------------

// Target bundles with their frozen approximations: fields[i] rotates in the
// plane approximating the continued bundle at ascending index start_index[i]
// (negative index = whole plane, d = 2). eps_bundle is the transversality
// margin required between each continued bundle and the frozen complements.
struct RotationFamilySpec {
    std::vector<FrozenPlaneField> fields;
    std::vector<int> start_indices;  // parallel to fields; -1 = whole plane
    double eta = 0.1;                // angle cube radius
    double eps_bundle = 0.05;        // transversality margin (radians)
    int n_cont = 24;                 // continuation window for bundle checks
};

struct MonotoneFamily {
    CocyclePath path;
    int direction = +1;
    double margin = 0.0;  // min angular derivative of the projected motion
};

namespace detail {

// smallest principal angle between the column spans of a and b
inline double min_principal_angle(const Mat& a, const Mat& b) {
    if (a.cols() == 0 || b.cols() == 0) return M_PI / 2.0;
    Eigen::HouseholderQR<Mat> qa(a), qb(b);
    Mat qa_full = qa.householderQ();
    Mat qb_full = qb.householderQ();
    Mat ua = qa_full.leftCols(a.cols());
    Mat ub = qb_full.leftCols(b.cols());
    Eigen::JacobiSVD<Mat> svd(Mat(ua.transpose() * ub));
    return std::acos(std::clamp(svd.singularValues()[0], 0.0, 1.0));
}

inline Mat continued_plane(const MatrixCocycle& c, const BasePoint& x, int start_index,
                           int n_cont) {
    if (start_index < 0) {
        if (c.dim != 2)
            throw std::invalid_argument("continued_plane: whole-plane bundles need d = 2");
        return Mat::Identity(2, 2);
    }
    return splitting_frame(c, x, n_cont, start_index, start_index + 2);
}

}  // namespace detail

// The certified path t -> R_{t * direction} o A up to angle eta: at every
// sampled fiber and path knot the circle motion induced on each continued
// bundle (projected onto the frozen plane along the frozen complement) has
// angular derivative of one sign; the minimal margin is reported.
inline MonotoneFamily monotone_rotation_family(const MatrixCocycle& c,
                                               const RotationFamilySpec& spec, int direction,
                                               const std::vector<BasePoint>& samples) {
    if (spec.fields.size() != spec.start_indices.size())
        throw std::invalid_argument("monotone_rotation_family: field/index count mismatch");
    MonotoneFamily fam;
    fam.direction = direction;
    fam.path = rotation_family_path(c, spec.fields, spec.eta, direction);
    fam.margin = std::numeric_limits<double>::infinity();

    for (size_t i = 0; i < spec.fields.size(); ++i) {
        const FrozenPlaneField& field = spec.fields[i];
        FrameFlow flow = (spec.start_indices[i] < 0)
                             ? FrameFlow::whole_plane()
                             : FrameFlow::continued(
                                   fam.path, spec.start_indices[i], spec.n_cont,
                                   [&field](const BasePoint& y) { return field.frame(y); });
        for (const auto& x : samples) {
            // transversality of the continued bundle and the frozen complement
            Mat cont0 = flow.at(0.0, x);
            Mat w = field.complement(x);
            if (detail::min_principal_angle(cont0, w) <= spec.eps_bundle)
                throw SpecTooCoarseError(
                    "monotone_rotation_family: continued bundle too close to the frozen "
                    "complement");
            // projection pi onto the frozen plane along the complement,
            // expressed in the frozen frame
            Mat u = field.frame(x);
            const int d = c.dim;
            Mat g(d, d);
            g.leftCols(2) = u;
            if (w.cols() > 0) g.rightCols(d - 2) = w;
            Mat proj_coords = g.inverse().topRows(2);
            if (std::abs(Mat(proj_coords * cont0).determinant()) < 1e-8)
                throw SpecTooCoarseError("monotone_rotation_family: projection degenerate");
            // angle of pi(R_t v(t)) for directions v(t) continued along the
            // path; the t-derivative must keep the sign of the sweep
            for (int s = 0; s < 8; ++s) {
                double a0 = s / 8.0 * 2.0 * M_PI;
                Eigen::Vector2d seed(std::cos(a0), std::sin(a0));
                auto psi = [&](double t) {
                    Mat r = fam.path.family->rotation_at(t, x);
                    Eigen::Vector2d v = proj_coords * (r * (flow.at(t, x) * seed));
                    return std::atan2(v[1], v[0]);
                };
                const auto& ks = fam.path.knots;
                double prev = psi(ks.front());
                for (size_t j = 1; j < ks.size(); ++j) {
                    double cur = psi(ks[j]);
                    double da = cur - prev;
                    da -= 2.0 * M_PI * std::round(da / (2.0 * M_PI));
                    fam.margin =
                        std::min(fam.margin, direction * da / (ks[j] - ks[j - 1]));
                    prev = cur;
                }
            }
        }
    }
    if (fam.margin <= 0.0)
        throw SpecTooCoarseError("monotone_rotation_family: projected motion not monotone");
    return fam;
}

// ---------------------------------------------------------------------------
// Singular-value redistribution and moduli equalization
// ---------------------------------------------------------------------------

struct SVRedistribution {
    std::vector<Mat> factors;       // B_1..B_n
    std::vector<double> distances;  // per factor, ||A_i^{-1} B_i - I||
    double target_distance = 0.0;   // sqrt(sum ln^2(sigma_i / tau_i))
};

// Spread the multiplicative correction turning the product's singular values
// into the targets evenly over the factors: with P = A_n..A_1 = U S V^T and
// Q = U diag(tau) V^T, B_i = A_i g_{i-1} exp(X/n) g_{i-1}^{-1} where
// X = log(P^{-1} Q) and g_i = A_i..A_1; the product telescopes to Q exactly.
inline SVRedistribution perturb_to_singular_values(const std::vector<Mat>& a,
                                                   std::vector<double> targets_ascending) {
    if (a.empty()) throw std::invalid_argument("perturb_to_singular_values: empty sequence");
    const int d = static_cast<int>(a[0].rows());
    const int n = static_cast<int>(a.size());
    if (static_cast<int>(targets_ascending.size()) != d)
        throw std::invalid_argument("perturb_to_singular_values: target count != dimension");
    std::sort(targets_ascending.begin(), targets_ascending.end());

    Mat p = Mat::Identity(d, d);
    for (const auto& m : a) p = m * p;
    Eigen::JacobiSVD<Mat> svd(p, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::VectorXd sigma = svd.singularValues();  // descending
    Eigen::VectorXd tau(d);
    for (int i = 0; i < d; ++i) tau[i] = targets_ascending[d - 1 - i];  // descending

    double prod_tau = 1.0, det_p = std::abs(p.determinant());
    for (int i = 0; i < d; ++i) prod_tau *= tau[i];
    if (std::abs(prod_tau - det_p) > 1e-9 * std::max(1.0, det_p))
        throw std::invalid_argument("perturb_to_singular_values: determinant mismatch");

    SVRedistribution out;
    double worst_log = 0.0;
    for (int i = 0; i < d; ++i) {
        double l = std::log(tau[i] / sigma[i]);
        out.target_distance += l * l;
        worst_log = std::max(worst_log, std::abs(l));
    }
    out.target_distance = std::sqrt(out.target_distance);
    if (worst_log < 1e-13) {  // targets already met: leave the factors untouched
        out.factors = a;
        out.distances.assign(a.size(), 0.0);
        return out;
    }

    // exp(X/n) = V diag((tau/sigma)^{1/n}) V^T, symmetric positive-definite
    Eigen::VectorXd ratio_root(d);
    for (int i = 0; i < d; ++i) ratio_root[i] = std::pow(tau[i] / sigma[i], 1.0 / n);
    Mat exp_step = svd.matrixV() * ratio_root.asDiagonal() * svd.matrixV().transpose();

    Mat g = Mat::Identity(d, d);  // g_{i-1}
    for (int i = 0; i < n; ++i) {
        Mat corr = g * exp_step * g.inverse();
        out.factors.push_back(a[i] * corr);
        out.distances.push_back((corr - Mat::Identity(d, d)).norm());
        g = a[i] * g;
    }
    return out;
}

struct ModuliEqualization {
    std::vector<Mat> factors;
    double perturbation = 0.0;  // ||D - I|| of the correcting diagonal
};

namespace detail {

// Orthonormal basis whose leading-k column spans are the invariant flags of
// ascending eigen-moduli (real spans for complex pairs), plus the sorted
// moduli. The product expressed in this basis is block upper triangular.
inline std::pair<Mat, std::vector<double>> moduli_flag_basis(const Mat& p) {
    const int d = static_cast<int>(p.rows());
    Eigen::EigenSolver<Mat> es(p);
    std::vector<int> order(d);
    for (int i = 0; i < d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        return std::abs(es.eigenvalues()[i]) < std::abs(es.eigenvalues()[j]);
    });
    Eigen::MatrixXcd vecs(d, d);
    std::vector<double> moduli(d);
    for (int i = 0; i < d; ++i) {
        vecs.col(i) = es.eigenvectors().col(order[i]);
        moduli[i] = std::abs(es.eigenvalues()[order[i]]);
    }
    Mat spans(d, 2 * d);
    for (int i = 0; i < d; ++i) {
        spans.col(2 * i) = vecs.col(i).real();
        spans.col(2 * i + 1) = vecs.col(i).imag();
    }
    // Gram-Schmidt over the ordered real spans gives the flag basis
    Mat basis(d, d);
    int filled = 0;
    for (int i = 0; i < 2 * d && filled < d; ++i) {
        Eigen::VectorXd v = spans.col(i);
        for (int k = 0; k < filled; ++k) v -= basis.col(k) * (basis.col(k).dot(v));
        double nrm = v.norm();
        if (nrm < 1e-10) continue;
        basis.col(filled++) = v / nrm;
    }
    if (filled < d) throw std::runtime_error("moduli_flag_basis: defective flag");
    return {basis, moduli};
}

}  // namespace detail

// Multiply the first factor by the diagonal (in the moduli-ordered
// block-triangularizing basis) that lifts every eigen-modulus of the product
// to the largest one.
inline ModuliEqualization equalize_moduli(const std::vector<Mat>& a) {
    if (a.empty()) throw std::invalid_argument("equalize_moduli: empty sequence");
    const int d = static_cast<int>(a[0].rows());
    Mat rest = Mat::Identity(d, d);  // A_p..A_2
    for (size_t i = 1; i < a.size(); ++i) rest = a[i] * rest;

    ModuliEqualization out;
    out.factors = a;
    Mat total = Mat::Identity(d, d);
    // the single pass is exact in exact arithmetic; refine to absorb the
    // eigensolver's rounding
    for (int pass = 0; pass < 4; ++pass) {
        Mat p = rest * out.factors[0];
        auto [basis, moduli] = detail::moduli_flag_basis(p);
        double spread = moduli[d - 1] / moduli[0] - 1.0;
        if (pass > 0 && spread <= 1e-10) break;
        Eigen::VectorXd diag(d);
        for (int i = 0; i < d; ++i) diag[i] = moduli[d - 1] / moduli[i];
        if ((Mat(diag.asDiagonal()) - Mat::Identity(d, d)).norm() == 0.0) break;
        Mat corr = basis * diag.asDiagonal() * basis.transpose();
        out.factors[0] = out.factors[0] * corr;
        total = total * corr;
    }
    out.perturbation = (total - Mat::Identity(d, d)).norm();
    return out;
}

// ---------------------------------------------------------------------------
// Elliptic-point searches
// ---------------------------------------------------------------------------

struct EllipticProbe {
    double t = 0.0;
    std::string orbit;
    double discriminant = 0.0;
};

struct EllipticResult {
    std::optional<std::pair<double, PeriodicOrbit>> hit;
    std::vector<EllipticProbe> log;
};

namespace detail {

// return map at the orbit's base point restricted to the continued plane;
// the frame's orientation is pinned against `orient` when given, so the sign
// of the return argument is stable across nearby cocycles (the raw frame's
// orientation is an arbitrary artifact of the factorization)
inline Mat restricted_return_map(const MatrixCocycle& c, const PeriodicOrbit& orbit,
                                 int start_index, int n_cont, const Mat* orient = nullptr) {
    BasePoint x = BasePoint::periodic(orbit.word, 0);
    Mat f = continued_plane(c, x, start_index, n_cont);
    if (orient && (f.transpose() * *orient).determinant() < 0.0) f.col(1) *= -1.0;
    return f.transpose() * (iterate(c, x, orbit.period()) * f);
}

inline double discriminant2(const Mat& m2) {
    double tr = m2(0, 0) + m2(1, 1);
    return tr * tr - 4.0 * m2.determinant();
}

}  // namespace detail

// Sweep the increasing rotation family in the given plane field; report the
// first (t, orbit), in lexicographic (t-index, orbit-index) order, whose
// return map restricted to the continued plane has a complex eigenvalue pair.
inline EllipticResult elliptic_search(const MatrixCocycle& c, const FrozenPlaneField& field,
                                      int start_index, const std::vector<PeriodicOrbit>& orbits,
                                      double t_range, int steps, int n_cont = 24) {
    EllipticResult res;
    CocyclePath path = rotation_family_path(c, {field}, std::max(t_range, 1e-12), +1);
    for (int i = 0; i <= steps; ++i) {
        const double t = t_range * i / std::max(steps, 1);
        MatrixCocycle ct = path.at(t);
        for (const auto& orbit : orbits) {
            Mat m2 = detail::restricted_return_map(ct, orbit, start_index, n_cont);
            double disc = detail::discriminant2(m2);
            res.log.push_back({t, orbit.label(), disc});
            if (disc < 0.0 && !res.hit) {
                res.hit = {t, orbit};
                return res;
            }
        }
    }
    return res;
}

// Grid of relative rotation enclosures over the parameter cube [-eta, eta]^l:
// node j carries one enclosure per bundle for the ray path s -> R_{s t} o A.
struct ThetaMap {
    double eta = 0.0;
    int per_axis = 3;
    std::vector<std::vector<double>> nodes;             // parameter vectors
    std::vector<std::vector<RotationEnclosure>> values;  // per node, per bundle
};

struct JointEllipticResult {
    std::optional<std::vector<double>> t;       // first grid node with all bundles elliptic
    std::vector<PeriodicOrbit> orbits;          // per bundle, the witnessing orbit
    ThetaMap theta;
    bool face_pattern_ok = false;
};

// Evaluate the parameter map on the grid, verify the face-sign pattern
// (positive enclosures on each +i face, nonpositive on each -i face), then
// scan grid nodes for a parameter at which every bundle's restricted return
// map is elliptic at some enumerated orbit.
inline JointEllipticResult joint_elliptic_search(const MatrixCocycle& c,
                                                 const RotationFamilySpec& spec,
                                                 const std::vector<PeriodicOrbit>& orbits,
                                                 const InvariantMeasure& mu, int per_axis = 3,
                                                 const std::vector<long long>& n_list = {2, 4, 8}) {
    const int l = static_cast<int>(spec.fields.size());
    JointEllipticResult res;
    res.theta.eta = spec.eta;
    res.theta.per_axis = per_axis;

    std::vector<int> idx(l, 0);
    const int total = static_cast<int>(std::pow(per_axis, l));
    for (int node = 0; node < total; ++node) {
        int rem = node;
        std::vector<double> t(l);
        for (int i = 0; i < l; ++i) {
            int k = rem % per_axis;
            rem /= per_axis;
            t[i] = -spec.eta + 2.0 * spec.eta * k / (per_axis - 1);
        }
        std::vector<double> angles = t;
        CocyclePath ray = rotation_ray_path(c, spec.fields, angles);
        std::vector<RotationEnclosure> encs;
        for (int i = 0; i < l; ++i) {
            FrameFlow flow = (spec.start_indices[i] < 0)
                                 ? FrameFlow::whole_plane()
                                 : FrameFlow::continued(
                                       ray, spec.start_indices[i], spec.n_cont,
                                       [f = &spec.fields[i]](const BasePoint& y) {
                                           return f->frame(y);
                                       });
            encs.push_back(path_rotation_number(ray, mu, flow, n_list));
        }
        res.theta.nodes.push_back(t);
        res.theta.values.push_back(std::move(encs));
    }

    // face-sign pattern
    res.face_pattern_ok = true;
    for (size_t j = 0; j < res.theta.nodes.size(); ++j) {
        for (int i = 0; i < l; ++i) {
            double ti = res.theta.nodes[j][i];
            const RotationEnclosure& e = res.theta.values[j][i];
            if (std::abs(ti - spec.eta) < 1e-12 && !(e.upper > 0.0)) res.face_pattern_ok = false;
            if (std::abs(ti + spec.eta) < 1e-12 && !(e.lower <= 0.0)) res.face_pattern_ok = false;
        }
    }

    // node scan for joint ellipticity
    for (size_t j = 0; j < res.theta.nodes.size(); ++j) {
        MatrixCocycle ct = apply_rotation_family(c, spec.fields, res.theta.nodes[j]);
        std::vector<PeriodicOrbit> witnesses;
        bool all = true;
        for (int i = 0; i < l && all; ++i) {
            bool found = false;
            for (const auto& orbit : orbits) {
                Mat m2 = detail::restricted_return_map(ct, orbit, spec.start_indices[i],
                                                       spec.n_cont);
                if (detail::discriminant2(m2) < 0.0) {
                    witnesses.push_back(orbit);
                    found = true;
                    break;
                }
            }
            all = found;
        }
        if (all) {
            res.t = res.theta.nodes[j];
            res.orbits = std::move(witnesses);
            return res;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Simple-spectrum search
// ---------------------------------------------------------------------------

struct SimpleSpectrumResult {
    bool success = false;
    MatrixCocycle cocycle;
    PeriodicOrbit orbit;
    std::vector<double> moduli;      // ascending
    double min_gap_ratio = 0.0;      // min adjacent moduli ratio
    double sup_dist = 0.0;           // distance to the input cocycle
};

namespace detail {

inline std::vector<double> return_moduli(const MatrixCocycle& c, const PeriodicOrbit& orbit) {
    BasePoint x = BasePoint::periodic(orbit.word, 0);
    Mat m = iterate(c, x, orbit.period());
    Eigen::EigenSolver<Mat> es(m);
    std::vector<double> mods(c.dim);
    for (int i = 0; i < c.dim; ++i) mods[i] = std::abs(es.eigenvalues()[i]);
    std::sort(mods.begin(), mods.end());
    return mods;
}

inline double min_adjacent_ratio(const std::vector<double>& mods) {
    double r = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < mods.size(); ++i)
        r = std::min(r, mods[i + 1] / std::max(mods[i], 1e-300));
    return r;
}

// signed distance (radians) from theta to the nearest multiple of pi
inline double to_nearest_real_axis(double theta) {
    return theta - M_PI * std::round(theta / M_PI);
}

}  // namespace detail

// Search for a periodic orbit with simple spectrum near the given cocycle:
// (1) return unchanged if an enumerated orbit already has distinct moduli;
// (2) otherwise, for each 2-dimensional elliptic bundle, sweep the rotation
// family over homoclinic approximants of the fixed orbit until the return
// argument can be driven to the real axis within budget (the required angle
// shrinks like 1/period), locating the crossing by bisection on the
// discriminant; (3) split any remaining moduli tie by a diagonal composition
// on the orbit's cylinder.
inline SimpleSpectrumResult simple_spectrum_search(const MatrixCocycle& c, int p_max,
                                                   int excursion_budget,
                                                   double perturbation_budget) {
    if (!c.base.is_shift())
        throw std::invalid_argument("simple_spectrum_search: shift bases only");
    const SymbolicSystem sys = c.base;
    auto orbits = enumerate_periodic_orbits(sys, std::min(p_max, 6));

    SimpleSpectrumResult best;
    best.cocycle = c;
    auto grade = [&](const MatrixCocycle& cand, const PeriodicOrbit& orbit) {
        auto mods = detail::return_moduli(cand, orbit);
        double ratio = detail::min_adjacent_ratio(mods);
        if (ratio > best.min_gap_ratio) {
            best.min_gap_ratio = ratio;
            best.cocycle = cand;
            best.orbit = orbit;
            best.moduli = mods;
            best.sup_dist = sup_distance(cand, c);
        }
        return ratio;
    };

    // (1) already simple at some short orbit?
    for (const auto& orbit : orbits) {
        if (grade(c, orbit) > 1.0 + kSimpleGapTol) {
            best.success = true;
            return best;
        }
    }

    // locate the 2-dimensional bundles to rotate: the finest splitting at the
    // fixed orbit (whole space when nothing dominates, d = 2 only then)
    PeriodicOrbit base_orbit = orbits.front();
    BasePoint x0 = BasePoint::periodic(base_orbit.word, 0);
    std::vector<std::pair<int, int>> blocks;  // [lo, hi) ascending index ranges
    try {
        auto bundles = finest_splitting(c, {x0}, 40);
        for (const auto& b : bundles)
            if (b.dim == 2) blocks.push_back({b.start_index, b.start_index + 2});
    } catch (const std::exception&) {
        if (c.dim == 2) blocks.push_back({-1, 1});
    }
    if (blocks.empty() && c.dim == 2) blocks.push_back({-1, 1});

    std::vector<FrozenPlaneField> fields;
    std::vector<int> starts;
    for (auto [lo, hi] : blocks) {
        if (lo < 0) {
            fields.push_back(FrozenPlaneField::whole_plane(sys));
            starts.push_back(-1);
        } else {
            fields.push_back(FrozenPlaneField::freeze(c, lo, 1));
            starts.push_back(lo);
        }
    }

    auto approximants =
        homoclinic_periodic_approximations(sys, base_orbit, {1}, excursion_budget);
    const double rot_budget = 0.8 * perturbation_budget;

    for (const auto& orbit : approximants) {
        const int p = orbit.period();
        BasePoint xb = BasePoint::periodic(orbit.word, 0);
        std::vector<Mat> refs;  // frozen orientation references, one per bundle
        for (const auto& f : fields) refs.push_back(f.frame(xb));
        // per-bundle required angles at this orbit
        std::vector<double> t_req(fields.size(), 0.0);
        bool feasible = true;
        for (size_t i = 0; i < fields.size(); ++i) {
            Mat m2 = detail::restricted_return_map(c, orbit, starts[i], 24, &refs[i]);
            if (detail::discriminant2(m2) >= 0.0) continue;  // already real in this block
            double theta = eigenvalue_argument(m2);
            t_req[i] = -detail::to_nearest_real_axis(theta) / p;
            if (std::abs(t_req[i]) * 1.5 > rot_budget) feasible = false;
        }
        if (!feasible) continue;

        // Drive each bundle's return argument onto the real axis by bisection
        // on the signed angle residual, other bundles held at their angles.
        // The crossing may be tangential (conservative rotations never leave
        // the elliptic region except at the axis itself), so the residual,
        // not the discriminant, is the robust root function.
        std::vector<double> angles(fields.size(), 0.0);
        bool resolved = true;
        for (size_t i = 0; i < fields.size() && resolved; ++i) {
            if (t_req[i] == 0.0) continue;
            auto resid_at = [&](double ti) {
                std::vector<double> a = angles;
                a[i] = ti;
                MatrixCocycle ct = apply_rotation_family(c, fields, a);
                Mat m2 = detail::restricted_return_map(ct, orbit, starts[i], 24, &refs[i]);
                if (detail::discriminant2(m2) >= 0.0) return 0.0;
                return detail::to_nearest_real_axis(eigenvalue_argument(m2));
            };
            double lo = 0.0, hi = 1.5 * t_req[i];
            double rlo = resid_at(lo), rhi = resid_at(hi);
            if (rlo == 0.0) continue;
            if (rhi != 0.0 && rlo * rhi > 0.0) {
                resolved = false;
                break;
            }
            for (int it = 0; it < 80 && std::abs(hi - lo) > 1e-14; ++it) {
                double mid = 0.5 * (lo + hi);
                double rm = resid_at(mid);
                if (rm == 0.0 || rm * rlo < 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    rlo = rm;
                }
            }
            angles[i] = hi;
        }
        if (!resolved) continue;

        MatrixCocycle ct = apply_rotation_family(c, fields, angles);
        if (grade(ct, orbit) > 1.0 + kSimpleGapTol &&
            sup_distance(ct, c) <= perturbation_budget) {
            best.success = true;
            return best;
        }

        // (3) split remaining near-ties by a diagonal composition on a
        // cylinder the orbit visits exactly once per period, acting
        // block-diagonally in the invariant frames of the return map there
        int anchor_phase = 0, anchor_depth = p;
        for (int klen = 1; klen <= p && anchor_depth == p; ++klen) {
            for (int phase = 0; phase < p; ++phase) {
                int hits = 0;
                for (int q = 0; q < p; ++q) {
                    bool same = true;
                    for (int r = 0; r < klen && same; ++r)
                        same = orbit.word[(q + r) % p] == orbit.word[(phase + r) % p];
                    hits += same;
                }
                if (hits == 1) {
                    anchor_phase = phase;
                    anchor_depth = klen;
                    break;
                }
            }
        }
        Word cyl(anchor_depth);
        for (int r = 0; r < anchor_depth; ++r) cyl[r] = orbit.word[(anchor_phase + r) % p];
        BasePoint x = BasePoint::periodic(orbit.word, anchor_phase);

        Mat k = Mat::Identity(c.dim, c.dim);
        for (size_t i = 0; i < fields.size(); ++i) {
            Mat f = detail::continued_plane(ct, x, starts[i], 24);
            Mat m2 = f.transpose() * (iterate(ct, x, p) * f);
            Mat g2 = Mat::Identity(2, 2);
            if (detail::discriminant2(m2) > 1e-12 * m2.squaredNorm()) {
                Eigen::EigenSolver<Mat> es(m2);
                g2.col(0) = es.eigenvectors().col(0).real().normalized();
                g2.col(1) = es.eigenvectors().col(1).real().normalized();
                if (std::abs(g2.determinant()) < 1e-6) g2 = Mat::Identity(2, 2);
            }
            double scale = 1.0 + kSplitEps * (1.0 + 0.5 * static_cast<double>(i));
            Mat d2 = Mat::Zero(2, 2);
            d2(0, 0) = scale;
            d2(1, 1) = 1.0 / scale;
            Mat block = f * (g2 * d2 * g2.inverse()) * f.transpose();
            k += block - f * f.transpose();
        }
        Mat ax = ct.at(x);
        Mat delta = ax * k * ax.inverse() - Mat::Identity(c.dim, c.dim);
        MatrixCocycle deep = deepen(ct, std::max(ct.depth, anchor_depth));
        double dsup = 0.0;
        MatrixCocycle split = perturb_on_cylinder(deep, cyl, delta, PerturbMode::Compose, &dsup);
        if (grade(split, orbit) > 1.0 + kSimpleGapTol &&
            sup_distance(split, c) <= perturbation_budget) {
            best.success = true;
            return best;
        }
    }
    return best;  // budget exhausted; carries the best gap achieved
}

}  // namespace rotnum
