//
// Batch experiment runner: config in, JSON verdicts and CSV traces out.
//
// Usage:  rotnum <command> --config <path> [--out <dir>] [--seed <u64>]
//                 [--threads <n>]
//
// Every command reads one JSON config document, prints a verdict JSON object
// to stdout, and (when --out is given) writes verdict.json plus per-command
// trace files into the output directory. Outputs are byte-identical for
// identical (command, config, seed). Exit codes: 0 success, 2 inconclusive
// or nothing found, 1 error (with a diagnostic naming the offending field).
//

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rotnum/family.hpp"
#include "rotnum/io.hpp"

using namespace rotnum;

namespace {

struct CliContext {
    Json config;
    std::string out_dir;  // empty: stdout only
    unsigned long long seed = 0;
    int threads = 1;
};

template <typename T>
T param(const Json& cfg, const std::string& key, T def) {
    if (!cfg.contains(key)) return def;
    try {
        return cfg.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw SchemaError(key, "wrong type");
    }
}

MatrixCocycle load_cocycle(const Json& cfg) {
    if (cfg.contains("fixture")) {
        const std::string f = detail::require<std::string>(cfg, "fixture");
        if (f == "pure-rotation")
            return MatrixCocycle::constant(SymbolicSystem::full_shift(2), Mat::Identity(2, 2));
        if (f == "sign-flip") {
            auto sys = SymbolicSystem::circle_rotation(Rational{0, 1});
            return MatrixCocycle::pointwise(sys, 2, [](const BasePoint& x) {
                double s = 2.0 * x.angle - 1.0;
                Mat m = Mat::Zero(2, 2);
                m(0, 0) = std::exp(-s);
                m(1, 1) = -std::exp(s);
                return m;
            });
        }
        throw SchemaError("fixture", "unknown fixture '" + f + "'");
    }
    if (!cfg.contains("cocycle")) throw SchemaError("cocycle", "missing required field");
    return cocycle_from_json(cfg.at("cocycle"));
}

InvariantMeasure load_measure(const Json& cfg, const SymbolicSystem& sys) {
    if (cfg.contains("measure")) return measure_from_json(cfg.at("measure"), sys);
    if (sys.is_shift()) return InvariantMeasure::on_orbit(PeriodicOrbit::from_word({0}, sys));
    return InvariantMeasure::lebesgue_measure({1, 1}, 64);
}

std::vector<BasePoint> load_samples(const Json& cfg, const SymbolicSystem& sys) {
    std::vector<BasePoint> samples;
    if (sys.is_shift()) {
        if (cfg.contains("samples")) {
            if (!cfg.at("samples").is_array()) throw SchemaError("samples", "expected array of words");
            for (const auto& s : cfg.at("samples")) {
                if (!s.is_string()) throw SchemaError("samples", "expected array of words");
                samples.push_back(BasePoint::periodic(
                    detail::parse_word(s.get<std::string>(), "samples")));
            }
        } else {
            int p_max = param<int>(cfg, "sample_period", 3);
            for (const auto& o : enumerate_periodic_orbits(sys, p_max))
                samples.push_back(BasePoint::periodic(o.word));
        }
    } else {
        int n = param<int>(cfg, "circle_samples", 17);
        if (n < 2) throw SchemaError("circle_samples", "need at least 2");
        // uniform grid over [0, 1) including the half-turn point exactly
        for (int k = 0; k < n; ++k)
            samples.push_back(BasePoint::on_circle(k / (n - 1.0) * 0.999999));
        samples.push_back(BasePoint::on_circle(0.5));
    }
    if (samples.empty()) throw SchemaError("samples", "need at least one sample");
    return samples;
}

std::vector<PeriodicOrbit> load_orbits(const Json& cfg, const SymbolicSystem& sys, int def_p_max) {
    int p_max = param<int>(cfg, "p_max", def_p_max);
    if (p_max < 1) throw SchemaError("p_max", "must be positive");
    return enumerate_periodic_orbits(sys, p_max);
}

std::vector<Mat> load_factors(const Json& cfg, unsigned long long seed) {
    if (cfg.contains("factors")) {
        if (!cfg.at("factors").is_array() || cfg.at("factors").empty())
            throw SchemaError("factors", "expected nonempty array of matrices");
        std::vector<Mat> out;
        for (size_t i = 0; i < cfg.at("factors").size(); ++i)
            out.push_back(detail::matrix_from_json(cfg.at("factors")[i],
                                                   "factors[" + std::to_string(i) + "]"));
        return out;
    }
    if (!cfg.contains("random"))
        throw SchemaError("factors", "need either 'factors' or 'random'");
    const Json& r = cfg.at("random");
    int count = detail::require<int>(r, "count");
    int dim = detail::require<int>(r, "dimension");
    if (count < 1) throw SchemaError("random.count", "must be positive");
    if (dim < 2) throw SchemaError("random.dimension", "need dimension >= 2");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Mat> out;
    for (int k = 0; k < count; ++k) {
        Mat m(dim, dim);
        do {
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) m(i, j) = u(rng);
        } while (std::abs(m.determinant()) < 0.05);
        // normalize to determinant +1 so products stay volume-preserving
        m /= std::pow(std::abs(m.determinant()), 1.0 / dim);
        if (m.determinant() < 0.0) m.col(0) *= -1.0;
        out.push_back(m);
    }
    return out;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << body;
}

// print the verdict and, when an output directory was given, write it and
// the trace files there
void emit(const CliContext& ctx, const Json& verdict,
          const std::vector<std::pair<std::string, std::string>>& files = {}) {
    const std::string body = verdict.dump(2) + "\n";
    std::fputs(body.c_str(), stdout);
    if (ctx.out_dir.empty()) return;
    std::filesystem::create_directories(ctx.out_dir);
    write_file(ctx.out_dir + "/verdict.json", body);
    for (const auto& [name, content] : files) write_file(ctx.out_dir + "/" + name, content);
}

std::string winding_trace(const CocyclePath& path, const FrameFlow& flow,
                          const SymbolicSystem& sys, const InvariantMeasure& mu,
                          const std::vector<long long>& n_list, int m_seeds) {
    std::vector<std::tuple<std::string, long long, double, double>> rows;
    for (const auto& [x, w] : measure_support_points(sys, mu))
        for (long long n : n_list) {
            WindingStats st = winding_sweep(path, flow, x, n, m_seeds);
            rows.emplace_back(x.key(), n, st.sigma, st.tau);
        }
    return winding_csv(rows);
}

Json moduli_json(const std::vector<Mat>& factors) {
    Mat p = Mat::Identity(factors[0].rows(), factors[0].cols());
    for (const auto& m : factors) p = m * p;
    Eigen::EigenSolver<Mat> es(p);
    std::vector<double> mods(p.rows());
    for (Eigen::Index i = 0; i < p.rows(); ++i) mods[i] = std::abs(es.eigenvalues()[i]);
    std::sort(mods.begin(), mods.end());
    return Json(mods);
}

// ---- command handlers -------------------------------------------------------

int cmd_rotnum(const CliContext& ctx) {
    auto c = load_cocycle(ctx.config);
    if (c.dim != 2) throw SchemaError("cocycle.dimension", "rotnum needs dimension 2");
    auto mu = load_measure(ctx.config, c.base);
    double angle = param<double>(ctx.config, "angle", M_PI / 6.0);
    int n_max = param<int>(ctx.config, "n_max", 32);
    int m_seeds = param<int>(ctx.config, "m_seeds", kSeedGrid);
    if (n_max < 2) throw SchemaError("n_max", "need n_max >= 2");

    auto path = rotation_ray_path(c, {FrozenPlaneField::whole_plane(c.base)}, {angle});
    auto flow = FrameFlow::whole_plane();
    auto n_list = default_n_list(n_max);
    auto enc = path_rotation_number(path, mu, flow, n_list, m_seeds);

    Json v{{"command", "rotnum"},
           {"seed", ctx.seed},
           {"status", "ok"},
           {"angle", angle},
           {"enclosure", enclosure_to_json(enc)}};
    emit(ctx, v, {{"windings.csv", winding_trace(path, flow, c.base, mu, n_list, m_seeds)}});
    return 0;
}

int cmd_relrot(const CliContext& ctx) {
    auto a = load_cocycle(ctx.config);
    if (!ctx.config.contains("cocycle_b")) throw SchemaError("cocycle_b", "missing required field");
    auto b = cocycle_from_json(ctx.config.at("cocycle_b"));
    auto mu = load_measure(ctx.config, a.base);
    RelRotOptions opts;
    opts.n_list = default_n_list(param<int>(ctx.config, "n_max", 32));
    opts.m_seeds = param<int>(ctx.config, "m_seeds", kSeedGrid);
    opts.skip_radius_check = param<bool>(ctx.config, "skip_radius_check", false);
    int start_index = param<int>(ctx.config, "start_index", -1);

    if (!opts.skip_radius_check && sup_distance(a, b) > opts.nbhd_radius)
        throw std::invalid_argument(
            "relrot: cocycle_b is outside the perturbation neighborhood "
            "(set skip_radius_check to override)");
    auto path = linear_interpolation(a, b);
    FrameFlow flow = (start_index < 0) ? FrameFlow::whole_plane()
                                       : FrameFlow::continued(path, start_index, opts.n_cont);
    auto enc = path_rotation_number(path, mu, flow, opts.n_list, opts.m_seeds);

    Json v{{"command", "relrot"},
           {"seed", ctx.seed},
           {"status", "ok"},
           {"start_index", start_index},
           {"enclosure", enclosure_to_json(enc)}};
    emit(ctx, v,
         {{"windings.csv", winding_trace(path, flow, a.base, mu, opts.n_list, opts.m_seeds)}});
    return 0;
}

int cmd_dominate(const CliContext& ctx) {
    auto c = load_cocycle(ctx.config);
    auto samples = load_samples(ctx.config, c.base);
    int n_max = param<int>(ctx.config, "n_max", 40);
    auto rep = domination_report(c, samples, n_max);

    bool any_dom = false, all_not = true;
    for (const auto& r : rep.per_index) {
        any_dom = any_dom || r.verdict == Verdict::Dominated;
        all_not = all_not && r.verdict == Verdict::NotDominated;
    }
    std::string overall = any_dom ? "dominated" : (all_not ? "not-dominated" : "inconclusive");

    Json v{{"command", "dominate"},
           {"seed", ctx.seed},
           {"status", overall == "inconclusive" ? "inconclusive" : "ok"},
           {"verdict", overall},
           {"report", splitting_report_to_json(rep)}};
    emit(ctx, v);
    return overall == "inconclusive" ? 2 : 0;
}

int cmd_modelock(const CliContext& ctx) {
    auto c = load_cocycle(ctx.config);
    if (c.dim != 2) throw SchemaError("cocycle.dimension", "modelock needs dimension 2");
    auto mu = load_measure(ctx.config, c.base);
    double eps = param<double>(ctx.config, "eps", 0.05);
    int n_max = param<int>(ctx.config, "n_max", 60);
    if (eps <= 0.0) throw SchemaError("eps", "must be positive");

    auto verdict = modelock_probe(c, FrozenPlaneField::whole_plane(c.base), mu, eps, n_max,
                                  param<int>(ctx.config, "m_seeds", kSeedGrid),
                                  param<int>(ctx.config, "report_n_max", 40));
    const char* kind = verdict.kind == ModeLockKind::UnlockedUp     ? "unlocked-up"
                       : verdict.kind == ModeLockKind::UnlockedDown ? "unlocked-down"
                                                                    : "locked-evidence";
    Json v{{"command", "modelock"}, {"seed", ctx.seed}, {"status", "ok"}, {"kind", kind}};
    if (verdict.certificate)
        v["certificate"] = Json{{"point", verdict.certificate->point.key()},
                                {"n", verdict.certificate->n}};
    if (verdict.report) v["report"] = splitting_report_to_json(*verdict.report);
    emit(ctx, v);
    return 0;
}

int cmd_elliptic(const CliContext& ctx) {
    auto c = load_cocycle(ctx.config);
    auto orbits = load_orbits(ctx.config, c.base, 4);
    int start_index = param<int>(ctx.config, "start_index", -1);
    double t_range = param<double>(ctx.config, "t_range", 0.5);
    int steps = param<int>(ctx.config, "steps", 50);
    if (t_range <= 0.0) throw SchemaError("t_range", "must be positive");
    if (steps < 1) throw SchemaError("steps", "must be positive");

    FrozenPlaneField field =
        (start_index < 0)
            ? FrozenPlaneField::whole_plane(c.base)
            : FrozenPlaneField::freeze(c, start_index, param<int>(ctx.config, "freeze_depth", 6));
    if (start_index < 0 && c.dim != 2)
        throw SchemaError("start_index", "whole-plane search needs dimension 2");
    auto res = elliptic_search(c, field, start_index, orbits, t_range, steps);

    Json v{{"command", "elliptic"},
           {"seed", ctx.seed},
           {"status", res.hit ? "ok" : "none"},
           {"found", static_cast<bool>(res.hit)}};
    if (res.hit) {
        v["t"] = res.hit->first;
        v["orbit"] = res.hit->second.label();
    }
    emit(ctx, v, {{"probes.jsonl", elliptic_log_jsonl(res.log)}});
    return res.hit ? 0 : 2;
}

int cmd_joint_elliptic(const CliContext& ctx) {
    auto c = load_cocycle(ctx.config);
    auto mu = load_measure(ctx.config, c.base);
    auto orbits = load_orbits(ctx.config, c.base, 3);
    if (!ctx.config.contains("blocks") || !ctx.config.at("blocks").is_array() ||
        ctx.config.at("blocks").empty())
        throw SchemaError("blocks", "expected nonempty array of start indices");

    RotationFamilySpec spec;
    spec.eta = param<double>(ctx.config, "eta", 0.1);
    spec.eps_bundle = param<double>(ctx.config, "eps_bundle", 0.05);
    if (spec.eta <= 0.0) throw SchemaError("eta", "must be positive");
    int depth = param<int>(ctx.config, "freeze_depth", 6);
    for (const auto& b : ctx.config.at("blocks")) {
        if (!b.is_number_integer()) throw SchemaError("blocks", "start indices must be integers");
        int idx = b.get<int>();
        spec.start_indices.push_back(idx);
        if (idx < 0) {
            if (c.dim != 2) throw SchemaError("blocks", "whole-plane block needs dimension 2");
            spec.fields.push_back(FrozenPlaneField::whole_plane(c.base));
        } else {
            spec.fields.push_back(FrozenPlaneField::freeze(c, idx, depth));
        }
    }
    int per_axis = param<int>(ctx.config, "per_axis", 3);
    std::vector<long long> n_list = param<std::vector<long long>>(ctx.config, "n_list", {2, 4, 8});
    auto res = joint_elliptic_search(c, spec, orbits, mu, per_axis, n_list);

    Json v{{"command", "joint-elliptic"},
           {"seed", ctx.seed},
           {"status", res.t ? "ok" : "none"},
           {"found", static_cast<bool>(res.t)},
           {"face_pattern_ok", res.face_pattern_ok}};
    if (res.t) {
        v["t"] = *res.t;
        Json ws = Json::array();
        for (const auto& o : res.orbits) ws.push_back(o.label());
        v["orbits"] = ws;
    }
    emit(ctx, v, {{"theta_map.csv", theta_map_csv(res.theta)}});
    return res.t ? 0 : 2;
}

int cmd_simple_spectrum(const CliContext& ctx) {
    auto c = load_cocycle(ctx.config);
    int p_max = param<int>(ctx.config, "p_max", 4);
    int excursion = param<int>(ctx.config, "excursion_budget", 25);
    double budget = param<double>(ctx.config, "perturbation_budget", 0.05);
    if (budget <= 0.0) throw SchemaError("perturbation_budget", "must be positive");
    auto res = simple_spectrum_search(c, p_max, excursion, budget);

    Json v{{"command", "simple-spectrum"},
           {"seed", ctx.seed},
           {"status", res.success ? "ok" : "none"},
           {"success", res.success},
           {"orbit", res.orbit.label()},
           {"moduli", res.moduli},
           {"min_gap_ratio", res.min_gap_ratio},
           {"sup_dist", res.sup_dist}};
    std::vector<std::pair<std::string, std::string>> files;
    if (!res.cocycle.custom)
        files.emplace_back("cocycle.json", cocycle_to_json(res.cocycle).dump(2) + "\n");
    emit(ctx, v, files);
    return res.success ? 0 : 2;
}

int cmd_conjugate(const CliContext& ctx) {
    auto a = load_cocycle(ctx.config);
    if (!ctx.config.contains("cocycle_b")) throw SchemaError("cocycle_b", "missing required field");
    auto b = cocycle_from_json(ctx.config.at("cocycle_b"));
    auto samples = load_samples(ctx.config, a.base);
    int knot_count = param<int>(ctx.config, "knot_count", 256);
    try {
        auto h = conjugate_projective_pair(a, b, samples, knot_count);
        Json v{{"command", "conjugate"},
               {"seed", ctx.seed},
               {"status", "ok"},
               {"defect", h.defect},
               {"identity_distance", h.identity_distance()}};
        emit(ctx, v, {{"conjugacy.csv", conjugacy_csv(h)}});
        return 0;
    } catch (const NotDominatedError& e) {
        Json v{{"command", "conjugate"},
               {"seed", ctx.seed},
               {"status", "none"},
               {"reason", e.what()}};
        emit(ctx, v);
        return 2;
    }
}

int cmd_ak_check(const CliContext& ctx) {
    auto c = load_cocycle(ctx.config);
    if (c.dim != 2) throw SchemaError("cocycle.dimension", "ak-check needs dimension 2");
    auto mu = load_measure(ctx.config, c.base);
    double angle = param<double>(ctx.config, "angle", 0.4);
    long long n = param<long long>(ctx.config, "n", 1000);
    int n_max = param<int>(ctx.config, "n_max", 64);
    if (n < 1) throw SchemaError("n", "must be positive");

    auto path = rotation_ray_path(c, {FrozenPlaneField::whole_plane(c.base)}, {angle});
    auto chk = ak_consistency_check(path, mu, n, default_n_list(n_max));
    bool consistent = chk.residual <= chk.uncertainty;

    auto support = measure_support_points(c.base, mu);
    long long n_trace = std::min<long long>(n, 256);
    auto trace = ak_rotation_number(path, support.front().first, Cplx(0, 0), Cplx(0, 0), n_trace);

    Json v{{"command", "ak-check"},
           {"seed", ctx.seed},
           {"status", consistent ? "ok" : "inconsistent"},
           {"consistent", consistent},
           {"rho_projective", chk.rho_projective},
           {"delta_rho_re", chk.delta_rho.real()},
           {"delta_rho_im", chk.delta_rho.imag()},
           {"residual", chk.residual},
           {"uncertainty", chk.uncertainty},
           {"renormalized", chk.renormalized},
           {"enclosure", enclosure_to_json(chk.enclosure)}};
    emit(ctx, v, {{"delta_trace.csv", delta_trace_csv(trace)}});
    return consistent ? 0 : 2;
}

int cmd_svredistribute(const CliContext& ctx) {
    auto factors = load_factors(ctx.config, ctx.seed);
    const int d = static_cast<int>(factors[0].rows());
    std::vector<double> targets;
    if (ctx.config.contains("targets")) {
        targets = param<std::vector<double>>(ctx.config, "targets", {});
        if (static_cast<int>(targets.size()) != d)
            throw SchemaError("targets", "need one target per dimension");
    } else {
        // default: pull the singular values halfway toward their geometric
        // mean, preserving the product (hence the determinant)
        Mat p = Mat::Identity(d, d);
        for (const auto& m : factors) p = m * p;
        Eigen::JacobiSVD<Mat> svd(p);
        double gm = std::pow(std::abs(p.determinant()), 1.0 / d);
        for (int i = 0; i < d; ++i)
            targets.push_back(std::sqrt(svd.singularValues()[i] * gm));
    }
    auto res = perturb_to_singular_values(factors, targets);

    Mat q = Mat::Identity(d, d);
    for (const auto& m : res.factors) q = m * q;
    Eigen::JacobiSVD<Mat> svd_q(q);
    std::vector<double> achieved(svd_q.singularValues().data(),
                                 svd_q.singularValues().data() + d);
    std::sort(targets.begin(), targets.end());
    double worst = 0.0;
    for (int i = 0; i < d; ++i)
        worst = std::max(worst, std::abs(achieved[d - 1 - i] - targets[i]));

    Json jf = Json::array();
    for (const auto& m : res.factors) jf.push_back(detail::matrix_to_json(m));
    Json v{{"command", "svredistribute"},
           {"seed", ctx.seed},
           {"status", "ok"},
           {"targets", targets},
           {"achieved", achieved},
           {"worst_error", worst},
           {"per_factor_distances", res.distances},
           {"target_distance", res.target_distance}};
    emit(ctx, v, {{"factors.json", jf.dump(2) + "\n"}});
    return 0;
}

int cmd_equalize(const CliContext& ctx) {
    auto factors = load_factors(ctx.config, ctx.seed);
    Json before = moduli_json(factors);
    auto res = equalize_moduli(factors);
    Json after = moduli_json(res.factors);
    double spread = after.back().get<double>() - after.front().get<double>();

    Json jf = Json::array();
    for (const auto& m : res.factors) jf.push_back(detail::matrix_to_json(m));
    Json v{{"command", "equalize"},
           {"seed", ctx.seed},
           {"status", "ok"},
           {"moduli_before", before},
           {"moduli_after", after},
           {"spread", spread},
           {"perturbation", res.perturbation}};
    emit(ctx, v, {{"factors.json", jf.dump(2) + "\n"}});
    return 0;
}

int report_error(const std::string& field, const std::string& message) {
    Json v{{"status", "error"}, {"error", Json{{"field", field}, {"message", message}}}};
    std::fputs((v.dump(2) + "\n").c_str(), stdout);
    std::fprintf(stderr, "error: %s\n", message.c_str());
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rotation numbers, dominated splittings, and cocycle perturbations"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    unsigned long long seed = 0;
    bool seed_given = false;
    int threads = 1;
    app.add_option("--config", config_path, "JSON config document")->required();
    app.add_option("--out", out_dir, "output directory for verdict.json and traces");
    app.add_option("--seed", seed, "seed for randomized choices (overrides config)")
        ->each([&](const std::string&) { seed_given = true; });
    app.add_option("--threads", threads, "worker threads (execution is deterministic)")
        ->check(CLI::PositiveNumber);

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const CliContext&);
    };
    const std::vector<Command> commands = {
        {"rotnum", "rotation-number enclosure of a rotation-family path", cmd_rotnum},
        {"relrot", "relative rotation number between two nearby cocycles", cmd_relrot},
        {"dominate", "dominated-splitting report over sample points", cmd_dominate},
        {"modelock", "mode-locking probe above a measure", cmd_modelock},
        {"elliptic", "sweep the rotation family for an elliptic periodic point", cmd_elliptic},
        {"joint-elliptic", "parameter-grid search for simultaneous elliptic blocks",
         cmd_joint_elliptic},
        {"simple-spectrum", "perturb toward a periodic orbit with simple spectrum",
         cmd_simple_spectrum},
        {"conjugate", "fibered conjugacy between dominated projective cocycles", cmd_conjugate},
        {"ak-check", "cross-check the winding and disk-model rotation numbers", cmd_ak_check},
        {"svredistribute", "redistribute a product's singular values over factors",
         cmd_svredistribute},
        {"equalize", "equalize the eigenvalue moduli of a matrix product", cmd_equalize},
    };
    for (const auto& cmd : commands) app.add_subcommand(cmd.name, cmd.help);

    CLI11_PARSE(app, argc, argv);

    CliContext ctx;
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    try {
        std::ifstream f(config_path);
        if (!f) return report_error("config", "cannot open config file '" + config_path + "'");
        try {
            ctx.config = Json::parse(f);
        } catch (const nlohmann::json::exception& e) {
            return report_error("config", std::string("config is not valid JSON: ") + e.what());
        }
        if (!ctx.config.is_object()) return report_error("config", "config must be a JSON object");
        ctx.seed = seed_given ? seed : param<unsigned long long>(ctx.config, "seed", 0);

        for (const auto& cmd : commands)
            if (app.got_subcommand(cmd.name)) return cmd.run(ctx);
        return report_error("command", "no command selected");
    } catch (const SchemaError& e) {
        return report_error(e.field, e.what());
    } catch (const std::exception& e) {
        return report_error("", e.what());
    }
}
