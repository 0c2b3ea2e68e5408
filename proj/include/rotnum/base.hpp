#pragma once
//
// Symbolic and circle base dynamics: full shifts, subshifts of finite type,
// circle rotations with rational (convergent) angles; periodic orbits and
// invariant measures supported on them or on Lebesgue.
//

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rotnum {

using Word = std::vector<int>;

struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d) : num(n), den(d) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        if (den < 0) { num = -num; den = -den; }
        long long g = std::gcd(std::abs(num), den);
        if (g > 1) { num /= g; den /= g; }
    }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    Rational operator+(const Rational& o) const { return {num * o.den + o.num * den, den * o.den}; }
    Rational operator*(const Rational& o) const { return {num * o.num, den * o.den}; }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

enum class BaseKind { FullShift, FiniteType, CircleRotation };

// A base system: two-sided full shift on `symbols` letters, a subshift of
// finite type given by an allowed-transition matrix, or a rigid circle
// rotation by a rational angle p/q (in turns).
struct SymbolicSystem {
    BaseKind kind = BaseKind::FullShift;
    int symbols = 2;
    Eigen::MatrixXi transitions;  // FiniteType only
    Rational angle{0, 1};         // CircleRotation only, in turns

    static SymbolicSystem full_shift(int symbols) {
        SymbolicSystem s;
        s.kind = BaseKind::FullShift;
        s.symbols = symbols;
        return s;
    }

    static SymbolicSystem finite_type(Eigen::MatrixXi allowed) {
        if (allowed.rows() != allowed.cols())
            throw std::invalid_argument("finite_type: transition matrix must be square");
        SymbolicSystem s;
        s.kind = BaseKind::FiniteType;
        s.symbols = static_cast<int>(allowed.rows());
        s.transitions = std::move(allowed);
        return s;
    }

    static SymbolicSystem circle_rotation(Rational angle) {
        SymbolicSystem s;
        s.kind = BaseKind::CircleRotation;
        s.symbols = 0;
        s.angle = angle;
        return s;
    }

    // Continued-fraction convergent of the golden mean (sqrt(5)-1)/2:
    // F(depth)/F(depth+1) with Fibonacci numbers.
    static SymbolicSystem golden_rotation(int depth = 12) {
        long long a = 1, b = 1;
        for (int i = 0; i < depth; ++i) { long long c = a + b; a = b; b = c; }
        return circle_rotation(Rational{a, b});
    }

    bool is_shift() const { return kind != BaseKind::CircleRotation; }

    bool edge_allowed(int a, int b) const {
        if (kind != BaseKind::FiniteType) return true;
        return transitions(a, b) != 0;
    }

    bool word_admissible(const Word& w) const {
        for (int c : w)
            if (c < 0 || c >= symbols) return false;
        if (kind == BaseKind::FiniteType)
            for (size_t i = 0; i + 1 < w.size(); ++i)
                if (!edge_allowed(w[i], w[i + 1])) return false;
        return true;
    }

    bool cycle_admissible(const Word& w) const {
        if (!word_admissible(w)) return false;
        if (kind == BaseKind::FiniteType && !w.empty())
            return edge_allowed(w.back(), w.front());
        return true;
    }
};

namespace detail {

// Index of the lexicographically minimal rotation of w (Booth would be
// overkill at these sizes).
inline size_t min_rotation(const Word& w) {
    size_t best = 0;
    const size_t n = w.size();
    for (size_t i = 1; i < n; ++i) {
        for (size_t k = 0; k < n; ++k) {
            int a = w[(i + k) % n], b = w[(best + k) % n];
            if (a != b) {
                if (a < b) best = i;
                break;
            }
        }
    }
    return best;
}

inline bool is_primitive(const Word& w) {
    const size_t n = w.size();
    for (size_t d = 1; d < n; ++d) {
        if (n % d != 0) continue;
        bool rep = true;
        for (size_t i = d; i < n && rep; ++i)
            if (w[i] != w[i % d]) rep = false;
        if (rep) return false;
    }
    return true;
}

inline long long mod_ll(long long a, long long m) {
    long long r = a % m;
    return r < 0 ? r + m : r;
}

}  // namespace detail

// A periodic orbit of a shift base, stored as the lexicographically minimal
// rotation of its primitive defining word.
struct PeriodicOrbit {
    Word word;

    PeriodicOrbit() = default;

    static PeriodicOrbit from_word(Word w, const SymbolicSystem& sys) {
        if (w.empty()) throw std::invalid_argument("PeriodicOrbit: empty word");
        if (!sys.is_shift()) throw std::invalid_argument("PeriodicOrbit: shift bases only");
        if (!sys.cycle_admissible(w))
            throw std::invalid_argument("PeriodicOrbit: word not admissible as a cycle");
        // reduce to the primitive root
        const size_t n = w.size();
        for (size_t d = 1; d < n; ++d) {
            if (n % d != 0) continue;
            bool rep = true;
            for (size_t i = d; i < n && rep; ++i)
                if (w[i] != w[i % d]) rep = false;
            if (rep) { w.resize(d); break; }
        }
        size_t r = detail::min_rotation(w);
        std::rotate(w.begin(), w.begin() + static_cast<long>(r), w.end());
        PeriodicOrbit o;
        o.word = std::move(w);
        return o;
    }

    int period() const { return static_cast<int>(word.size()); }

    bool operator==(const PeriodicOrbit& o) const { return word == o.word; }
    bool operator<(const PeriodicOrbit& o) const {
        return std::lexicographical_compare(word.begin(), word.end(),
                                            o.word.begin(), o.word.end());
    }

    std::string label() const {
        std::ostringstream os;
        for (int c : word) os << c;
        return os.str();
    }
};

// A point of the base. For shift bases: a periodic point, given by the
// repeating word and a phase (position of the origin coordinate in the word).
// For circle bases: an angle in turns.
struct BasePoint {
    Word word;       // shift bases
    int phase = 0;   // shift bases
    double angle = 0.0;  // circle bases
    bool circle = false;

    static BasePoint periodic(Word w, int phase = 0) {
        BasePoint x;
        x.word = std::move(w);
        x.phase = phase;
        return x;
    }

    static BasePoint on_circle(double angle) {
        BasePoint x;
        x.circle = true;
        x.angle = angle - std::floor(angle);
        return x;
    }

    int symbol(long long k) const {
        if (circle || word.empty()) throw std::logic_error("BasePoint::symbol: not a shift point");
        return word[static_cast<size_t>(detail::mod_ll(phase + k, static_cast<long long>(word.size())))];
    }

    std::string key() const {
        std::ostringstream os;
        if (circle) {
            os.precision(17);
            os << "c:" << angle;
        } else {
            os << "w:";
            for (int c : word) os << c;
            os << ":" << phase;
        }
        return os.str();
    }
};

inline BasePoint step(const SymbolicSystem& sys, const BasePoint& x, long long n = 1) {
    BasePoint y = x;
    if (sys.kind == BaseKind::CircleRotation) {
        double a = x.angle + static_cast<double>(n) * sys.angle.value();
        y.angle = a - std::floor(a);
    } else {
        y.phase = static_cast<int>(detail::mod_ll(x.phase + n, static_cast<long long>(x.word.size())));
    }
    return y;
}

// All periodic orbit classes with (primitive) period <= p_max, sorted
// lexicographically by canonical word.
inline std::vector<PeriodicOrbit> enumerate_periodic_orbits(const SymbolicSystem& sys, int p_max) {
    if (!sys.is_shift())
        throw std::invalid_argument("enumerate_periodic_orbits: shift bases only");
    std::vector<PeriodicOrbit> out;
    Word w;
    std::function<void(int)> rec = [&](int p) {
        if (static_cast<int>(w.size()) == p) {
            if (!sys.cycle_admissible(w)) return;
            if (!detail::is_primitive(w)) return;
            if (detail::min_rotation(w) != 0) return;  // one representative per class
            PeriodicOrbit o;
            o.word = w;
            out.push_back(o);
            return;
        }
        for (int c = 0; c < sys.symbols; ++c) {
            if (!w.empty() && !sys.edge_allowed(w.back(), c)) continue;
            w.push_back(c);
            rec(p);
            w.pop_back();
        }
    };
    for (int p = 1; p <= p_max; ++p) rec(p);
    std::sort(out.begin(), out.end());
    return out;
}

// Periodic approximations of a homoclinic loop: repeat the base orbit's word
// m times and append the excursion, for m = 1..count.
inline std::vector<PeriodicOrbit> homoclinic_periodic_approximations(
    const SymbolicSystem& sys, const PeriodicOrbit& orbit, const Word& excursion, int count) {
    std::vector<PeriodicOrbit> out;
    for (int m = 1; m <= count; ++m) {
        Word w;
        for (int i = 0; i < m; ++i)
            w.insert(w.end(), orbit.word.begin(), orbit.word.end());
        w.insert(w.end(), excursion.begin(), excursion.end());
        out.push_back(PeriodicOrbit::from_word(std::move(w), sys));
    }
    return out;
}

// An invariant measure: a finite combination of uniform measures on periodic
// orbits (shift bases) plus, on circle bases, a multiple of Lebesgue
// discretized by uniform quadrature.
struct InvariantMeasure {
    struct Atom {
        PeriodicOrbit orbit;
        Rational weight;
    };
    std::vector<Atom> atoms;
    Rational lebesgue{0, 1};
    int quadrature_points = 256;

    static InvariantMeasure on_orbit(PeriodicOrbit o, Rational w = {1, 1}) {
        InvariantMeasure mu;
        mu.atoms.push_back({std::move(o), w});
        return mu;
    }

    static InvariantMeasure lebesgue_measure(Rational w = {1, 1}, int quad = 256) {
        InvariantMeasure mu;
        mu.lebesgue = w;
        mu.quadrature_points = quad;
        return mu;
    }

    double total_mass() const {
        double m = lebesgue.value();
        for (const auto& a : atoms) m += a.weight.value();
        return m;
    }
};

// Expand a measure into weighted sample points: each orbit atom contributes
// its points with weight w/p, the Lebesgue part contributes uniform
// quadrature nodes. Exact for orbit atoms; for Lebesgue this is the uniform
// (trapezoid-on-the-circle) rule.
inline std::vector<std::pair<BasePoint, double>> measure_support_points(
    const SymbolicSystem& sys, const InvariantMeasure& mu) {
    std::vector<std::pair<BasePoint, double>> pts;
    for (const auto& a : mu.atoms) {
        const int p = a.orbit.period();
        const double w = a.weight.value() / p;
        for (int i = 0; i < p; ++i) {
            if (sys.is_shift()) {
                pts.emplace_back(BasePoint::periodic(a.orbit.word, i), w);
            } else {
                throw std::invalid_argument("measure_support_points: orbit atom on circle base");
            }
        }
    }
    if (mu.lebesgue.num != 0) {
        if (sys.is_shift())
            throw std::invalid_argument("measure_support_points: Lebesgue part on shift base");
        const int q = mu.quadrature_points;
        const double w = mu.lebesgue.value() / q;
        for (int i = 0; i < q; ++i)
            pts.emplace_back(BasePoint::on_circle(static_cast<double>(i) / q), w);
    }
    return pts;
}

inline double measure_integrate(const SymbolicSystem& sys, const InvariantMeasure& mu,
                                const std::function<double(const BasePoint&)>& f) {
    double s = 0.0;
    for (const auto& [x, w] : measure_support_points(sys, mu)) s += w * f(x);
    return s;
}

}  // namespace rotnum
