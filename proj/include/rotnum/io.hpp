#pragma once
//
// JSON round-trips for base systems, measures, and cocycles, plus the fixed
// CSV / JSON-lines dump formats for results. All emitters are deterministic:
// identical values produce byte-identical output.
//

#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "rotnum/base.hpp"
#include "rotnum/cocycle.hpp"
#include "rotnum/domination.hpp"
#include "rotnum/perturb.hpp"
#include "rotnum/rotation.hpp"
#include "rotnum/stability.hpp"
#include "rotnum/su11.hpp"

namespace rotnum {

using Json = nlohmann::ordered_json;

struct SchemaError : std::runtime_error {
    std::string field;
    SchemaError(const std::string& field_, const std::string& what_)
        : std::runtime_error("schema error at '" + field_ + "': " + what_), field(field_) {}
};

namespace detail {

// full-precision, locale-independent double formatting (shortest round-trip)
inline std::string fmt_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string word_string(const Word& w) {
    std::string s;
    for (int c : w) s += static_cast<char>('0' + c);
    return s;
}

inline Word parse_word(const std::string& s, const std::string& field) {
    Word w;
    for (char c : s) {
        if (c < '0' || c > '9') throw SchemaError(field, "word symbols must be digits");
        w.push_back(c - '0');
    }
    if (w.empty()) throw SchemaError(field, "empty word");
    return w;
}

template <typename T>
T require(const Json& j, const std::string& key) {
    if (!j.contains(key)) throw SchemaError(key, "missing required field");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw SchemaError(key, "wrong type");
    }
}

inline Json rational_to_json(const Rational& r) { return Json{{"num", r.num}, {"den", r.den}}; }

inline Rational rational_from_json(const Json& j, const std::string& field) {
    if (j.is_number_integer()) return Rational{j.get<long long>(), 1};
    if (!j.is_object()) throw SchemaError(field, "expected {num, den} or integer");
    return Rational{require<long long>(j, "num"), require<long long>(j, "den")};
}

inline Json matrix_to_json(const Mat& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline Mat matrix_from_json(const Json& j, const std::string& field) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw SchemaError(field, "expected array of rows");
    Mat m(j.size(), j[0].size());
    for (size_t i = 0; i < j.size(); ++i) {
        if (j[i].size() != j[0].size()) throw SchemaError(field, "ragged matrix rows");
        for (size_t k = 0; k < j[i].size(); ++k) {
            if (!j[i][k].is_number()) throw SchemaError(field, "non-numeric entry");
            m(i, k) = j[i][k].get<double>();
        }
    }
    return m;
}

}  // namespace detail

// ---- base systems ----------------------------------------------------------

inline Json system_to_json(const SymbolicSystem& sys) {
    Json j;
    switch (sys.kind) {
        case BaseKind::FullShift:
            j["kind"] = "full-shift";
            j["alphabet_size"] = sys.symbols;
            break;
        case BaseKind::FiniteType: {
            j["kind"] = "sft";
            j["alphabet_size"] = sys.symbols;
            Json rows = Json::array();
            for (int a = 0; a < sys.symbols; ++a) {
                Json row = Json::array();
                for (int b = 0; b < sys.symbols; ++b) row.push_back(sys.transitions(a, b));
                rows.push_back(row);
            }
            j["transition"] = rows;
            break;
        }
        case BaseKind::CircleRotation:
            j["kind"] = "circle-rotation";
            j["angle"] = detail::rational_to_json(sys.angle);
            break;
    }
    return j;
}

inline SymbolicSystem system_from_json(const Json& j) {
    const std::string kind = detail::require<std::string>(j, "kind");
    if (kind == "full-shift") {
        int n = detail::require<int>(j, "alphabet_size");
        if (n < 2) throw SchemaError("alphabet_size", "need at least 2 symbols");
        return SymbolicSystem::full_shift(n);
    }
    if (kind == "sft") {
        if (!j.contains("transition")) throw SchemaError("transition", "missing required field");
        const Json& t = j.at("transition");
        if (!t.is_array() || t.empty()) throw SchemaError("transition", "expected square 0/1 matrix");
        Eigen::MatrixXi m(t.size(), t.size());
        for (size_t a = 0; a < t.size(); ++a) {
            if (t[a].size() != t.size()) throw SchemaError("transition", "matrix must be square");
            for (size_t b = 0; b < t.size(); ++b) m(a, b) = t[a][b].get<int>() != 0;
        }
        return SymbolicSystem::finite_type(m);
    }
    if (kind == "circle-rotation") {
        if (!j.contains("angle")) throw SchemaError("angle", "missing required field");
        Rational r = detail::rational_from_json(j.at("angle"), "angle");
        if (r.den < 1 || r.num <= 0) throw SchemaError("angle", "need a rational in (0,1)");
        return SymbolicSystem::circle_rotation(r);
    }
    throw SchemaError("kind", "unknown system kind '" + kind + "'");
}

// ---- measures ---------------------------------------------------------------

inline Json measure_to_json(const InvariantMeasure& mu) {
    Json j;
    Json atoms = Json::array();
    for (const auto& a : mu.atoms)
        atoms.push_back(Json{{"word", detail::word_string(a.orbit.word)},
                             {"weight", detail::rational_to_json(a.weight)}});
    j["atoms"] = atoms;
    j["lebesgue_weight"] = detail::rational_to_json(mu.lebesgue);
    j["quadrature_points"] = mu.quadrature_points;
    return j;
}

inline InvariantMeasure measure_from_json(const Json& j, const SymbolicSystem& sys) {
    InvariantMeasure mu;
    if (j.contains("atoms")) {
        if (!j.at("atoms").is_array()) throw SchemaError("atoms", "expected array");
        for (const auto& a : j.at("atoms")) {
            Word w = detail::parse_word(detail::require<std::string>(a, "word"), "atoms.word");
            Rational wt{1, 1};
            if (a.contains("weight")) wt = detail::rational_from_json(a.at("weight"), "atoms.weight");
            if (wt.num < 0) throw SchemaError("atoms.weight", "weights must be nonnegative");
            mu.atoms.push_back({PeriodicOrbit::from_word(w, sys), wt});
        }
    }
    mu.lebesgue = {0, 1};
    if (j.contains("lebesgue_weight"))
        mu.lebesgue = detail::rational_from_json(j.at("lebesgue_weight"), "lebesgue_weight");
    if (j.contains("quadrature_points")) {
        mu.quadrature_points = detail::require<int>(j, "quadrature_points");
        if (mu.quadrature_points < 1)
            throw SchemaError("quadrature_points", "must be positive");
    }
    if (mu.total_mass() <= 0.0) throw SchemaError("atoms", "measure must have positive mass");
    return mu;
}

// ---- cocycles ---------------------------------------------------------------

inline Json cocycle_to_json(const MatrixCocycle& c) {
    if (c.custom) throw std::invalid_argument("cocycle_to_json: pointwise cocycles are not serializable");
    Json j;
    j["base"] = system_to_json(c.base);
    j["dimension"] = c.dim;
    if (c.base.is_shift()) {
        j["depth"] = c.depth;
        Json gen = Json::object();
        for (const auto& [w, m] : c.table) gen[detail::word_string(w)] = detail::matrix_to_json(m);
        j["generator"] = gen;
    } else {
        Json hs = Json::array();
        for (const auto& h : c.harmonics) {
            Json hj{{"k", h.k}};
            if (h.cos_coeff.size() > 0) hj["cos"] = detail::matrix_to_json(h.cos_coeff);
            if (h.sin_coeff.size() > 0) hj["sin"] = detail::matrix_to_json(h.sin_coeff);
            hs.push_back(hj);
        }
        j["harmonics"] = hs;
    }
    return j;
}

inline MatrixCocycle cocycle_from_json(const Json& j) {
    SymbolicSystem sys = system_from_json(j.contains("base") ? j.at("base")
                                                             : throw SchemaError("base", "missing required field"));
    int dim = detail::require<int>(j, "dimension");
    if (dim < 2) throw SchemaError("dimension", "need dimension >= 2");
    if (sys.is_shift()) {
        int depth = detail::require<int>(j, "depth");
        if (depth < 1) throw SchemaError("depth", "must be positive");
        if (!j.contains("generator") || !j.at("generator").is_object())
            throw SchemaError("generator", "expected word -> matrix object");
        std::map<Word, Mat> table;
        for (const auto& [key, val] : j.at("generator").items()) {
            Word w = detail::parse_word(key, "generator");
            if (static_cast<int>(w.size()) != depth)
                throw SchemaError("generator", "word '" + key + "' does not have the declared depth");
            Mat m = detail::matrix_from_json(val, "generator." + key);
            if (m.rows() != dim || m.cols() != dim)
                throw SchemaError("generator." + key, "matrix does not match declared dimension");
            table[w] = m;
        }
        try {
            return MatrixCocycle::from_table(sys, depth, std::move(table));
        } catch (const std::exception& e) {
            throw SchemaError("generator", e.what());
        }
    }
    if (!j.contains("harmonics") || !j.at("harmonics").is_array())
        throw SchemaError("harmonics", "expected array of harmonics");
    std::vector<MatrixCocycle::Harmonic> hs;
    for (const auto& hj : j.at("harmonics")) {
        MatrixCocycle::Harmonic h;
        h.k = detail::require<int>(hj, "k");
        if (hj.contains("cos")) h.cos_coeff = detail::matrix_from_json(hj.at("cos"), "harmonics.cos");
        if (hj.contains("sin")) h.sin_coeff = detail::matrix_from_json(hj.at("sin"), "harmonics.sin");
        hs.push_back(std::move(h));
    }
    try {
        return MatrixCocycle::trig(sys, std::move(hs));
    } catch (const std::exception& e) {
        throw SchemaError("harmonics", e.what());
    }
}

// ---- result records ---------------------------------------------------------

inline Json enclosure_to_json(const RotationEnclosure& e) {
    return Json{{"lower", e.lower},
                {"upper", e.upper},
                {"midpoint", e.midpoint()},
                {"width", e.width()},
                {"n_used", e.n_used},
                {"slack", e.slack}};
}

inline Json splitting_report_to_json(const SplittingReport& rep) {
    auto verdict_name = [](Verdict v) {
        switch (v) {
            case Verdict::Dominated: return "dominated";
            case Verdict::NotDominated: return "not-dominated";
            default: return "inconclusive";
        }
    };
    Json per = Json::array();
    for (const auto& r : rep.per_index)
        per.push_back(Json{{"index", r.index},
                           {"verdict", verdict_name(r.verdict)},
                           {"c_fit", r.c_fit},
                           {"tau_fit", r.tau_fit},
                           {"worst_ratio", r.worst_ratio}});
    return Json{{"per_index", per},
                {"finest_dims", rep.finest_dims},
                {"n_max", rep.n_max},
                {"margin", rep.margin}};
}

// ---- CSV dumps --------------------------------------------------------------

inline std::string orbits_csv(const std::vector<PeriodicOrbit>& orbits) {
    std::string out = "word,period\n";
    for (const auto& o : orbits)
        out += detail::word_string(o.word) + "," + std::to_string(o.period()) + "\n";
    return out;
}

// (x, n, sigma_n, tau_n) rows for winding statistics
inline std::string winding_csv(
    const std::vector<std::tuple<std::string, long long, double, double>>& rows) {
    std::string out = "x,n,sigma,tau\n";
    for (const auto& [x, n, sigma, tau_] : rows)
        out += x + "," + std::to_string(n) + "," + detail::fmt_double(sigma) + "," +
               detail::fmt_double(tau_) + "\n";
    return out;
}

// grid coordinates followed by per-bundle enclosure bounds
inline std::string theta_map_csv(const ThetaMap& tm) {
    const size_t ell = tm.nodes.empty() ? 0 : tm.nodes.front().size();
    std::string out;
    for (size_t i = 0; i < ell; ++i) out += "t" + std::to_string(i) + ",";
    for (size_t i = 0; i < ell; ++i)
        out += "lower" + std::to_string(i) + ",upper" + std::to_string(i) +
               (i + 1 < ell ? "," : "");
    out += "\n";
    for (size_t n = 0; n < tm.nodes.size(); ++n) {
        for (double t : tm.nodes[n]) out += detail::fmt_double(t) + ",";
        const auto& vals = tm.values[n];
        for (size_t i = 0; i < vals.size(); ++i)
            out += detail::fmt_double(vals[i].lower) + "," + detail::fmt_double(vals[i].upper) +
                   std::string(i + 1 < vals.size() ? "," : "");
        out += "\n";
    }
    return out;
}

// one JSON record per (t, orbit) probe
inline std::string elliptic_log_jsonl(const std::vector<EllipticProbe>& log) {
    std::string out;
    for (const auto& p : log) {
        Json j{{"t", p.t}, {"orbit", p.orbit}, {"discriminant", p.discriminant}};
        out += j.dump() + "\n";
    }
    return out;
}

// (sample id, knot, value) rows for a fibered conjugacy
inline std::string conjugacy_csv(const FiberedConjugacy& h) {
    std::string out = "sample,knot,value\n";
    for (size_t s = 0; s < h.knots.size(); ++s)
        for (size_t k = 0; k < h.knots[s].size(); ++k)
            out += std::to_string(s) + "," + detail::fmt_double(h.knots[s][k]) + "," +
                   detail::fmt_double(h.values[s][k]) + "\n";
    return out;
}

// (k, Re delta, Im delta) rows for a disk-model trace
inline std::string delta_trace_csv(const AKAverage& avg) {
    std::string out = "k,re_delta,im_delta\n";
    for (size_t k = 0; k < avg.per_iterate.size(); ++k)
        out += std::to_string(k) + "," + detail::fmt_double(avg.per_iterate[k].real()) + "," +
               detail::fmt_double(avg.per_iterate[k].imag()) + "\n";
    return out;
}

}  // namespace rotnum
