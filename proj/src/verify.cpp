#include "opsplit/verify.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "opsplit/problems.hpp"
#include "opsplit/projector.hpp"
#include "opsplit/reference.hpp"

namespace opsplit {

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

class Collector {
public:
    Collector(std::string suite, std::vector<PropertyResult>& out) : suite_(std::move(suite)), out_(out) {}

    void check(const std::string& name, double err, double tol) {
        out_.push_back({suite_, name, err <= tol, fmt("max error %.3e", err) + fmt(" (tol %.0e)", tol)});
    }
    void check_bool(const std::string& name, bool ok, std::string detail) {
        out_.push_back({suite_, name, ok, std::move(detail)});
    }

private:
    std::string suite_;
    std::vector<PropertyResult>& out_;
};

void prox_suite(std::uint64_t seed, std::vector<PropertyResult>& out) {
    Collector c("prox", out);
    Rng rng(seed);
    for (auto [rows, cols] : {std::pair<Eigen::Index, Eigen::Index>{2, 3}, {4, 4}}) {
        const std::string shape = "/" + std::to_string(rows) + "x" + std::to_string(cols);
        for (const auto& [name, f] : sample_prox_functions(rows, cols, rng)) {
            double moreau = 0, scaling = 0, optimality = 0;
            for (int trial = 0; trial < 100; ++trial) {
                const double lambda = std::pow(10.0, rng.uniform(-1.5, 1.5));
                const VectorXd u = 2.0 * rng.normal_vector(rows * cols);
                const VectorXd lhs = prox(f, lambda, u) + lambda * reference::conjugate_prox(f, 1.0 / lambda, VectorXd(u / lambda));
                moreau = std::max(moreau, (lhs - u).cwiseAbs().maxCoeff() / (1.0 + u.cwiseAbs().maxCoeff()));

                const VectorXd direct = reference::conjugate_prox(reference::scaled_function(f, lambda), 1.0, u);
                scaling = std::max(scaling, (scaled_conjugate_prox(f, lambda, u) - direct).cwiseAbs().maxCoeff());

                const VectorXd p = prox(f, lambda, u);
                const double best = reference::random_search_best(f, lambda, u, 50, rng);
                const double mine = reference::prox_objective(f, lambda, u, p);
                optimality = std::max(optimality, mine - best);
            }
            c.check("moreau-identity/" + name + shape, moreau, 1e-10);
            c.check("conjugate-scaling/" + name + shape, scaling, 1e-10);
            c.check("beats-random-search/" + name + shape, std::max(optimality, 0.0), 1e-12);
        }
    }

    // envelope gradient against central differences
    Rng grad_rng(seed + 1);
    for (const auto& [name, f] : sample_prox_functions(2, 3, grad_rng)) {
        if (f.kind() != ProxKind::L1 && f.kind() != ProxKind::IndicatorNonneg && f.kind() != ProxKind::Nuclear) continue;
        double worst = 0;
        for (int trial = 0; trial < 20; ++trial) {
            const double lambda = grad_rng.uniform(0.2, 2.0);
            const VectorXd x = 2.0 * grad_rng.normal_vector(6);
            const VectorXd g = moreau_envelope_grad(f, lambda, x);
            VectorXd fd(6);
            const double h = 1e-6;
            for (int i = 0; i < 6; ++i) {
                VectorXd xp = x, xm = x;
                xp(i) += h;
                xm(i) -= h;
                fd(i) = (moreau_envelope(f, lambda, xp) - moreau_envelope(f, lambda, xm)) / (2 * h);
            }
            worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-8));
        }
        c.check("envelope-gradient/" + name, worst, 1e-5);
    }
}

double adjoint_gap(const LinearMap<double>& op, Rng& rng) {
    const VectorXd x = rng.normal_vector(op.in_dim());
    const VectorXd y = rng.normal_vector(op.out_dim());
    const double lhs = op.apply(x).dot(y);
    const double rhs = x.dot(op.adjoint_apply(y));
    return std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1.0});
}

void operators_suite(std::uint64_t seed, std::vector<PropertyResult>& out) {
    Collector c("operators", out);
    Rng rng(seed);
    const FanBeamGeometry geom = FanBeamGeometry::random_views(16, 6, 24, seed);
    const std::vector<std::pair<std::string, LinearMap<double>>> ops{
        {"identity", make_identity<double>(7)},
        {"dense", make_dense<double>(rng.normal_matrix(5, 8))},
        {"sparse-projector", make_sparse<double>(fan_beam_matrix(geom))},
        {"difference-1d", make_difference_1d<double>(40)},
        {"gradient-2d", make_gradient_2d<double>(9, 13)},
        {"gaussian-blur", make_gaussian_blur<double>(12, 10, 1.0)},
        {"block-average", make_block_average<double>(12, 10, 2)},
        {"blur-downsample", make_blur_downsample<double>(12, 12, 1.0, 3)},
        {"scaled", scaled(-2.5, make_difference_1d<double>(10))},
    };
    for (const auto& [name, op] : ops) {
        double worst = 0;
        for (int trial = 0; trial < 10; ++trial) worst = std::max(worst, adjoint_gap(op, rng));
        c.check("adjoint/" + name, worst, 1e-10);
        const MatrixXd dense = to_dense(op);
        const double exact = Eigen::JacobiSVD<MatrixXd>(dense).singularValues()(0);
        const double est = estimate_norm(op);
        c.check("norm-estimate/" + name, std::abs(est - exact) / std::max(exact, 1e-300), 1e-4);
    }

    const double d1 = power_iteration(make_difference_1d<double>(200)).eigenvalue;
    const double d1_exact = 2.0 - 2.0 * std::cos(199.0 * M_PI / 200.0);
    c.check("lambda-max/difference-1d-200", std::abs(d1 - d1_exact), 1e-4);
    const double g2 = power_iteration(make_gradient_2d<double>(64, 64)).eigenvalue;
    c.check_bool("lambda-max/gradient-2d-64", g2 >= 7.9 && g2 <= 8.0, fmt("estimate %.6f in [7.9, 8.0]", g2));

    bool rejected = false;
    try {
        (void)make_difference_1d<double>(5).apply(VectorXd::Zero(4));
    } catch (const DimensionError&) {
        rejected = true;
    }
    c.check_bool("dimension-mismatch-rejected", rejected, rejected ? "DimensionError raised" : "no error");
}

SolverConfig<double> trajectory_config(const SolverConfig<double>& base, int iterations) {
    SolverConfig<double> c = base;
    c.inner_iters = 1;
    c.max_outer = iterations;
    c.outer_eps = 1e-300;  // run the full budget
    c.keep_iterates = true;
    c.warm_start_dual = true;
    return c;
}

void equivalence_suite(std::uint64_t seed, std::vector<PropertyResult>& out) {
    Collector c("equivalence", out);
    constexpr int kIters = 120;
    const SplitProblem<double> p = build_fused_lasso(30, 60, 0.2, 0.8, 0.01, seed);
    double gaps[6] = {0, 0, 0, 0, 0, 0};
    for (auto preset : {ParamPreset::TypeI, ParamPreset::TypeII}) {
        const auto cfg = trajectory_config(SolverConfig<double>::from_preset(preset, p), kIters);
        gaps[0] = std::max(gaps[0], max_iterate_gap(solve_alg1_dual_fbs(p, cfg), solve_pdfp(p, cfg)));
        gaps[1] = std::max(gaps[1], max_iterate_gap(solve_alg3_dual_three_op(p, cfg), solve_pd3o(p, cfg)));
        gaps[2] = std::max(gaps[2], max_iterate_gap(solve_alg4_pd_three_op(p, cfg), solve_new_scheme(p, cfg)));
        gaps[3] = std::max(gaps[3], max_iterate_gap(solve_alg2_pd_fbs(p, cfg),
                                                    solve_condat_vu(p, condat_vu_steps_from_alg2(cfg))));

        // PD3O started from z0 = x0 - gamma grad f(x0) - gamma B^T y0
        const VectorXd x0 = VectorXd::Zero(p.dim());
        const VectorXd y0 = VectorXd::Zero(p.B.out_dim());
        auto matched = cfg;
        matched.initial_shadow = x0 - cfg.gamma * p.f.gradient(x0) - cfg.gamma * p.B.adjoint_apply(y0);
        gaps[5] = std::max(gaps[5], max_iterate_gap(solve_pdfp(p, cfg), solve_pd3o(p, matched)));
    }

    // PD3O with lambda = 1 on an identity-B problem against Davis-Yin
    {
        Rng rng(seed, Rng::Stream::Matrix);
        const MatrixXd a = rng.normal_matrix(20, 15);
        const VectorXd b = rng.normal_vector(20);
        SplitProblem<double> q{SmoothFunction<double>::least_squares(make_dense<double>(a), b),
                               make_l1(0.3), make_box_indicator(-0.4, 0.6), make_identity<double>(15), 1.0,
                               std::nullopt, std::nullopt, std::nullopt};
        auto cfg = trajectory_config(SolverConfig<double>::from_preset(ParamPreset::TypeII, q), kIters);
        cfg.lambda = 1.0;
        gaps[4] = std::max(gaps[4], max_iterate_gap(solve_pd3o(q, cfg), solve_davis_yin(q, cfg)));
    }

    const char* names[6] = {"alg1(J=1)==pdfp", "alg3(J=1)==pd3o", "alg4(J=1)==new-scheme",
                            "alg2(J=1)==condat-vu", "pd3o(lambda=1,B=I)==davis-yin", "pdfp==pd3o(matched-init)"};
    for (int i = 0; i < 6; ++i) c.check(names[i], gaps[i], 1e-12);

    // without g the two schemes coincide once PD3O starts from z0 = x0
    const SplitProblem<double> p0 = build_fused_lasso(30, 60, 0.0, 0.8, 0.01, seed);
    const auto cfg0 = trajectory_config(SolverConfig<double>::from_preset(ParamPreset::TypeII, p0), kIters);
    c.check("pdfp==pd3o(g=0,z0=x0)", max_iterate_gap(solve_pdfp(p0, cfg0), solve_pd3o(p0, cfg0)), 1e-12);
}

}  // namespace

std::optional<Suite> parse_suite(std::string_view name) {
    if (name == "prox") return Suite::Prox;
    if (name == "operators") return Suite::Operators;
    if (name == "equivalence") return Suite::Equivalence;
    if (name == "all") return Suite::All;
    return std::nullopt;
}

std::vector<std::pair<std::string, ProxFunction<double>>> sample_prox_functions(Eigen::Index rows, Eigen::Index cols,
                                                                                Rng& rng) {
    const Eigen::Index n = rows * cols;
    if (n % 2 != 0) throw std::invalid_argument("sample_prox_functions: rows*cols must be even");
    std::vector<std::pair<std::string, ProxFunction<double>>> fs;
    fs.emplace_back("l1", make_l1(rng.uniform(0.1, 2.0)));
    fs.emplace_back("group-l21", make_group_l21(rng.uniform(0.1, 2.0), n / 2, 2));
    fs.emplace_back("indicator-nonneg", make_nonneg_indicator<double>());
    const double lo = rng.uniform(-1.0, 0.0);
    fs.emplace_back("indicator-box", make_box_indicator(lo, lo + rng.uniform(0.2, 2.0)));
    fs.emplace_back("nuclear", make_nuclear(rng.uniform(0.1, 2.0), rows, cols));
    fs.emplace_back("quadratic-distance", make_quadratic_distance(rng.uniform(0.1, 2.0), rng.normal_vector(n)));
    fs.emplace_back("zero", make_zero<double>());
    return fs;
}

double max_iterate_gap(const SolveTrace<double>& a, const SolveTrace<double>& b) {
    if (a.iterates.size() != b.iterates.size() || a.iterates.empty()) return kInfinity<double>;
    double gap = 0;
    for (std::size_t i = 0; i < a.iterates.size(); ++i)
        gap = std::max(gap, (a.iterates[i] - b.iterates[i]).cwiseAbs().maxCoeff());
    return gap;
}

std::vector<PropertyResult> run_verification(Suite suite, std::uint64_t seed) {
    std::vector<PropertyResult> out;
    if (suite == Suite::Prox || suite == Suite::All) prox_suite(seed, out);
    if (suite == Suite::Operators || suite == Suite::All) operators_suite(seed, out);
    if (suite == Suite::Equivalence || suite == Suite::All) equivalence_suite(seed, out);
    return out;
}

}  // namespace opsplit
