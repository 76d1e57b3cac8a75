#include <cmath>

#include "doctest.h"
#include "opsplit/problems.hpp"
#include "opsplit/rng.hpp"
#include "opsplit/solvers.hpp"

using namespace opsplit;

namespace {

constexpr SolverId kAll[] = {SolverId::Alg1, SolverId::Alg2,     SolverId::Alg3,         SolverId::Alg4,
                             SolverId::Pdfp, SolverId::CondatVu, SolverId::CondatVuTau1, SolverId::Pd3o,
                             SolverId::NewScheme};

SolverConfig<double> tight(const SplitProblem<double>& p, ParamPreset preset = ParamPreset::TypeI) {
    auto c = SolverConfig<double>::from_preset(preset, p);
    c.outer_eps = 1e-13;
    c.max_outer = 200000;
    return c;
}

SplitProblem<double> least_squares_problem(Rng& rng, bool identity_b) {
    const MatrixXd a = rng.normal_matrix(40, 10);
    const VectorXd b = rng.normal_vector(40);
    auto f = SmoothFunction<double>::least_squares(make_dense<double>(a), b);
    auto bop = identity_b ? make_identity<double>(10) : make_difference_1d<double>(10);
    return {f, make_zero<double>(), make_zero<double>(), bop, identity_b ? 1.0 : 2.0, std::nullopt, std::nullopt,
            std::nullopt};
}

// argmin 1/2||x - u||^2 + mu ||Dx||_1 by projected gradient on the dual
// min_{|p| <= mu} 1/2 ||u - D^T p||^2.
VectorXd tv_denoise_oracle(const VectorXd& u, double mu) {
    const Eigen::Index n = u.size();
    const MatrixXd d = to_dense(make_difference_1d<double>(n));
    VectorXd p = VectorXd::Zero(n - 1);
    for (int it = 0; it < 200000; ++it) {
        const VectorXd grad = -d * (u - d.transpose() * p);
        p = (p - 0.25 * grad).cwiseMax(-mu).cwiseMin(mu);
    }
    return u - d.transpose() * p;
}

}  // namespace

TEST_CASE("solver ids round-trip through their names") {
    for (SolverId id : kAll) CHECK(parse_solver_id(to_string(id)) == id);
    CHECK(parse_solver_id("davis-yin") == SolverId::DavisYin);
    CHECK_FALSE(parse_solver_id("alg5").has_value());
}

TEST_CASE("with g = h = 0 the single-step schemes are gradient descent") {
    Rng rng(1);
    const auto p = least_squares_problem(rng, true);
    auto c = SolverConfig<double>::from_preset(ParamPreset::TypeI, p);
    c.max_outer = 5;
    c.keep_iterates = true;
    std::vector<VectorXd> gd{VectorXd::Zero(10)};
    for (int k = 0; k < 5; ++k) gd.push_back(gd.back() - c.gamma * p.f.gradient(gd.back()));
    for (SolverId id : {SolverId::Alg1, SolverId::Alg3, SolverId::Pdfp, SolverId::Pd3o, SolverId::DavisYin}) {
        CAPTURE(to_string(id));
        const auto t = solve(id, p, c);
        REQUIRE(t.iterates.size() == 6);
        for (int k = 0; k <= 5; ++k) CHECK((t.iterates[k] - gd[k]).norm() < 1e-12);
    }
}

TEST_CASE("least squares: every solver reaches the normal-equation solution") {
    Rng rng(2);
    const auto p = least_squares_problem(rng, false);
    const MatrixXd a = to_dense(p.f.op());
    const VectorXd exact = (a.transpose() * a).ldlt().solve(a.transpose() * p.f.data());
    for (SolverId id : kAll) {
        CAPTURE(to_string(id));
        const auto t = solve(id, p, tight(p));
        CHECK(t.converged);
        CHECK((t.final_x - exact).cwiseAbs().maxCoeff() < 1e-6);
    }
    const auto q = least_squares_problem(rng, true);
    const MatrixXd aq = to_dense(q.f.op());
    const VectorXd exact_q = (aq.transpose() * aq).ldlt().solve(aq.transpose() * q.f.data());
    CHECK((solve(SolverId::DavisYin, q, tight(q)).final_x - exact_q).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("f = 0: 1D TV denoising matches a dual projected-gradient oracle") {
    Rng rng(3);
    const VectorXd u = rng.normal_vector(20) + VectorXd::LinSpaced(20, 0, 3);
    const double mu = 0.4;
    const SplitProblem<double> p{SmoothFunction<double>::zero(20), make_quadratic_distance(1.0, u), make_l1(mu),
                                 make_difference_1d<double>(20), 2.0, std::nullopt, std::nullopt, std::nullopt};
    const VectorXd oracle = tv_denoise_oracle(u, mu);
    for (SolverId id : kAll) {
        for (ParamPreset preset : {ParamPreset::TypeI, ParamPreset::TypeII}) {
            // sigma ||B||^2 = ||B|| > 1 under type-II, outside the tau1 form's range
            if (id == SolverId::CondatVuTau1 && preset == ParamPreset::TypeII) continue;
            CAPTURE(to_string(id));
            auto c = tight(p, preset);
            c.inner_iters = 3;
            const auto t = solve(id, p, c);
            CHECK((t.final_x - oracle).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}

TEST_CASE("Davis-Yin matches proximal gradient on l1 + box") {
    Rng rng(4);
    const MatrixXd a = rng.normal_matrix(30, 15);
    const VectorXd b = rng.normal_vector(30);
    const SplitProblem<double> p{SmoothFunction<double>::least_squares(make_dense<double>(a), b), make_l1(0.5),
                                 make_box_indicator(-0.3, 0.3), make_identity<double>(15), 1.0,
                                 std::nullopt, std::nullopt, std::nullopt};
    // prox of 0.5|.| + box is soft-threshold then clip
    const double L = p.f.lipschitz(), step = 1.0 / L;
    VectorXd x = VectorXd::Zero(15);
    for (int it = 0; it < 100000; ++it) {
        const VectorXd v = x - step * a.transpose() * (a * x - b);
        const VectorXd soft = v.array().sign() * (v.array().abs() - 0.5 * step).max(0.0);
        x = soft.cwiseMax(-0.3).cwiseMin(0.3);
    }
    const auto t = solve(SolverId::DavisYin, p, tight(p));
    CHECK(t.converged);
    CHECK((t.final_x - x).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("fused lasso: all solvers agree and the result is locally optimal") {
    const auto p = build_fused_lasso(80, 40, 0.2, 0.8, 0.01, 7);
    std::vector<VectorXd> sols;
    for (SolverId id : kAll) {
        if (id == SolverId::CondatVuTau1) continue;
        CAPTURE(to_string(id));
        const auto t = solve(id, p, tight(p, ParamPreset::TypeII));
        CHECK(t.converged);
        sols.push_back(t.final_x);
    }
    for (const auto& s : sols) CHECK((s - sols.front()).cwiseAbs().maxCoeff() < 1e-6);

    Rng rng(5);
    const double best = objective(p, sols.front());
    for (int i = 0; i < 200; ++i) {
        const VectorXd d = 1e-3 * rng.normal_vector(40);
        CHECK(objective(p, VectorXd(sols.front() + d)) >= best - 1e-9);
    }
}

TEST_CASE("type-I dual steps with one inner iteration stall, more inner iterations converge") {
    const auto p = build_fused_lasso(80, 40, 0.2, 0.8, 0.01, 7);
    auto c = SolverConfig<double>::from_preset(ParamPreset::TypeI, p);
    c.max_outer = 5000;
    CHECK_FALSE(solve(SolverId::Alg1, p, c).converged);
    CHECK_FALSE(solve(SolverId::Alg3, p, c).converged);
    c.inner_iters = 10;
    CHECK(solve(SolverId::Alg1, p, c).converged);
    CHECK(solve(SolverId::Alg3, p, c).converged);
}

TEST_CASE("a converged state is a fixed point") {
    const auto p = build_fused_lasso(80, 40, 0.2, 0.8, 0.01, 9);
    for (SolverId id : {SolverId::Alg1, SolverId::Alg2, SolverId::Alg3, SolverId::Pdfp, SolverId::CondatVu,
                        SolverId::Pd3o}) {
        CAPTURE(to_string(id));
        const auto c = tight(p, ParamPreset::TypeII);
        const auto t = solve(id, p, c);
        auto p2 = p;
        p2.initial_point = t.final_x;
        auto c2 = c;
        c2.max_outer = 1;
        c2.initial_dual = t.final_dual;
        c2.initial_shadow = t.final_shadow;
        const auto again = solve(id, p2, c2);
        CHECK((again.final_x - t.final_x).norm() <= 1e-9 * t.final_x.norm());
    }
}

TEST_CASE("stopping rule and trace bookkeeping") {
    const auto p = build_fused_lasso(30, 60, 0.2, 0.8, 0.01, 11);
    auto c = SolverConfig<double>::from_preset(ParamPreset::TypeI, p);
    c.outer_eps = 1e-6;
    c.inner_iters = 4;
    const auto t = solve(SolverId::Alg3, p, c);
    REQUIRE(t.converged);
    REQUIRE(!t.records.empty());
    CHECK(t.records.back().rel_change <= 1e-6);
    for (std::size_t i = 0; i + 1 < t.records.size(); ++i) CHECK(t.records[i].rel_change > 1e-6);
    CHECK(t.total_outer == static_cast<int>(t.records.size()));
    CHECK(t.records.front().k == 1);
    CHECK(t.records.front().inner_count == 4);
    CHECK(t.records.back().snr.has_value());
    CHECK_FALSE(t.records.back().ssim.has_value());

    c.max_outer = 3;
    const auto capped = solve(SolverId::Alg3, p, c);
    CHECK_FALSE(capped.converged);
    CHECK(capped.total_outer == 3);

    c.max_outer = 5000;
    c.warm_start_dual = false;
    const auto cold = solve(SolverId::Alg1, p, c);
    CHECK(cold.converged);
}

TEST_CASE("divergence is reported with the iteration number") {
    Rng rng(6);
    const MatrixXd a = rng.normal_matrix(20, 10);
    // understated Lipschitz constant lets an unstable gamma through validation
    const SplitProblem<double> p{SmoothFunction<double>::least_squares(make_dense<double>(a), rng.normal_vector(20), 0.01),
                                 make_zero<double>(), make_zero<double>(), make_identity<double>(10), 1.0,
                                 std::nullopt, VectorXd::Ones(10), std::nullopt};
    auto c = SolverConfig<double>::from_preset(ParamPreset::TypeI, p);
    try {
        (void)solve(SolverId::Alg1, p, c);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.iteration() >= 1);
        CHECK(e.iteration() < 5000);
    }
}

TEST_CASE("parameter validation") {
    const auto p = build_fused_lasso(30, 60, 0.2, 0.8, 0.01, 1);
    const double L = p.f.lipschitz();
    const auto base = SolverConfig<double>::from_preset(ParamPreset::TypeI, p);

    auto c = base;
    c.gamma = 2.0 / L;
    CHECK_THROWS_AS(solve(SolverId::Alg1, p, c), ConfigError);
    c = base;
    c.lambda = 2.0 / p.b_norm_sq();
    CHECK_THROWS_AS(solve(SolverId::Alg3, p, c), ConfigError);
    c = base;
    c.sigma = 1.01 / p.b_norm_sq();
    CHECK_THROWS_AS(solve(SolverId::Alg4, p, c), ConfigError);
    c = base;
    c.inner_iters = 0;
    CHECK_THROWS_AS(solve(SolverId::Alg2, p, c), ConfigError);
    c = base;
    c.initial_dual = VectorXd::Zero(3);
    CHECK_THROWS_AS(solve(SolverId::Pd3o, p, c), ConfigError);
    CHECK_THROWS_AS(solve(SolverId::DavisYin, p, base), ConfigError);

    // both presets sit on the admissible boundary and must be accepted
    for (ParamPreset preset : {ParamPreset::TypeI, ParamPreset::TypeII}) {
        auto ok = SolverConfig<double>::from_preset(preset, p);
        ok.max_outer = 2;
        for (SolverId id : kAll) {
            if (id == SolverId::CondatVuTau1 && preset == ParamPreset::TypeII)
                CHECK_THROWS_AS(solve(id, p, ok), ConfigError);
            else
                CHECK_NOTHROW(solve(id, p, ok));
        }
    }
}

TEST_CASE("Condat-Vu step mapping") {
    SolverConfig<double> c;
    c.gamma = 0.5;
    c.sigma = 0.25;
    c.tau = 1.0;
    const auto m = condat_vu_steps_from_alg2(c);
    CHECK(m.tau == doctest::Approx(0.25));
    CHECK(m.sigma == doctest::Approx(0.5));

    const auto p = build_fused_lasso(30, 60, 0.2, 0.8, 0.01, 3);
    auto bad = SolverConfig<double>::from_preset(ParamPreset::TypeI, p);
    bad.tau = 10.0 / p.f.lipschitz();
    bad.sigma = 0.0;
    CHECK_THROWS_AS(solve_condat_vu(p, bad), ConfigError);
}
