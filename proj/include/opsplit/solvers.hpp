#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "opsplit/metrics.hpp"
#include "opsplit/problem.hpp"

namespace opsplit {

/// Step-size presets. Type I: lambda = 1.9/lambda_max(BB^T), sigma = 1/||B||^2, tau = 1.
/// Type II: lambda = 1/lambda_max(BB^T), sigma = tau = 1/||B||. Both use gamma = 1.9/L.
enum class ParamPreset { TypeI, TypeII };

enum class CondatVuForm { Standard, Tau1 };

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(int iteration, const std::string& what)
        : std::runtime_error("diverged at outer iteration " + std::to_string(iteration) + ": " + what),
          iteration_(iteration) {}
    int iteration() const { return iteration_; }

private:
    int iteration_;
};

template <typename Scalar>
struct SolverConfig {
    Scalar gamma = 1;
    Scalar lambda = 1;  // dual inner step (Algorithms 1, 3, PDFP, PD3O)
    Scalar sigma = 1;   // primal-dual inner steps (Algorithms 2, 4, new scheme)
    Scalar tau = 1;
    int inner_iters = 1;
    Scalar outer_eps = Scalar(1e-8);
    int max_outer = 5000;
    bool warm_start_dual = true;
    std::optional<ParamPreset> param_preset;

    bool keep_iterates = false;
    std::optional<Vector<Scalar>> initial_dual;
    std::optional<Vector<Scalar>> initial_shadow;  // z^0 of the three-operator schemes

    static SolverConfig from_preset(ParamPreset preset, Scalar lipschitz, Scalar b_norm) {
        SolverConfig c;
        c.param_preset = preset;
        c.gamma = lipschitz > 0 ? Scalar(1.9) / lipschitz : Scalar(1);
        const Scalar b_sq = b_norm * b_norm;
        if (preset == ParamPreset::TypeI) {
            c.lambda = Scalar(1.9) / b_sq;
            c.sigma = Scalar(1) / b_sq;
            c.tau = Scalar(1);
        } else {
            c.lambda = Scalar(1) / b_sq;
            c.sigma = Scalar(1) / b_norm;
            c.tau = Scalar(1) / b_norm;
        }
        return c;
    }

    static SolverConfig from_preset(ParamPreset preset, const SplitProblem<Scalar>& p) {
        return from_preset(preset, p.f.lipschitz(), p.b_norm);
    }
};

template <typename Scalar>
struct IterationRecord {
    int k = 0;
    Scalar objective = 0;
    Scalar rel_change = 0;
    int inner_count = 0;
    std::optional<Scalar> snr;
    std::optional<Scalar> nmsd;
    std::optional<Scalar> ssim;
};

template <typename Scalar>
struct SolveTrace {
    std::vector<IterationRecord<Scalar>> records;
    Vector<Scalar> final_x;
    Vector<Scalar> final_dual;
    std::optional<Vector<Scalar>> final_shadow;
    bool converged = false;
    int total_outer = 0;
    // x^0, x^1, ... when SolverConfig::keep_iterates is set
    std::vector<Vector<Scalar>> iterates;
};

enum class SolverId { Alg1, Alg2, Alg3, Alg4, Pdfp, CondatVu, CondatVuTau1, Pd3o, DavisYin, NewScheme };

inline std::string_view to_string(SolverId id) {
    switch (id) {
        case SolverId::Alg1: return "alg1";
        case SolverId::Alg2: return "alg2";
        case SolverId::Alg3: return "alg3";
        case SolverId::Alg4: return "alg4";
        case SolverId::Pdfp: return "pdfp";
        case SolverId::CondatVu: return "condat-vu";
        case SolverId::CondatVuTau1: return "condat-vu-tau1";
        case SolverId::Pd3o: return "pd3o";
        case SolverId::DavisYin: return "davis-yin";
        case SolverId::NewScheme: return "new-scheme";
    }
    return "unknown";
}

inline std::optional<SolverId> parse_solver_id(std::string_view name) {
    for (auto id : {SolverId::Alg1, SolverId::Alg2, SolverId::Alg3, SolverId::Alg4, SolverId::Pdfp,
                    SolverId::CondatVu, SolverId::CondatVuTau1, SolverId::Pd3o, SolverId::DavisYin,
                    SolverId::NewScheme}) {
        if (to_string(id) == name) return id;
    }
    return std::nullopt;
}

/// Solvers whose inner step is the dual forward-backward iteration (parameter lambda).
inline bool uses_dual_step(SolverId id) {
    return id == SolverId::Alg1 || id == SolverId::Alg3 || id == SolverId::Pdfp || id == SolverId::Pd3o ||
           id == SolverId::DavisYin;
}

/// Solvers that run J inner iterations per outer step.
inline bool has_inner_loop(SolverId id) {
    return id == SolverId::Alg1 || id == SolverId::Alg2 || id == SolverId::Alg3 || id == SolverId::Alg4;
}

namespace detail {

// Equality at the preset boundary (sigma tau ||B||^2 == 1) is accepted.
inline constexpr double kStepProductSlack = 1e-12;

template <typename Scalar>
void validate_common(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    p.validate();
    const Scalar L = p.f.lipschitz();
    if (!(c.gamma > 0)) throw ConfigError("gamma must be positive");
    if (L > 0 && !(c.gamma < Scalar(2) / L))
        throw ConfigError("gamma = " + std::to_string(c.gamma) + " outside (0, 2/L) with L = " + std::to_string(L));
    if (c.inner_iters < 1) throw ConfigError("inner_iters must be at least 1");
    if (!(c.outer_eps > 0)) throw ConfigError("outer_eps must be positive");
    if (c.max_outer < 1) throw ConfigError("max_outer must be at least 1");
    if (c.initial_dual && c.initial_dual->size() != p.B.out_dim())
        throw ConfigError("initial dual has wrong length");
    if (c.initial_shadow && c.initial_shadow->size() != p.dim())
        throw ConfigError("initial shadow point has wrong length");
}

template <typename Scalar>
void validate_dual(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    validate_common(p, c);
    if (!(c.lambda > 0 && c.lambda < Scalar(2) / p.b_norm_sq()))
        throw ConfigError("lambda = " + std::to_string(c.lambda) + " outside (0, 2/lambda_max(BB^T)) = (0, " +
                          std::to_string(2 / p.b_norm_sq()) + ")");
}

template <typename Scalar>
void check_step_product(Scalar sigma, Scalar tau, Scalar b_sq) {
    if (!(sigma > 0 && tau > 0)) throw ConfigError("sigma and tau must be positive");
    if (sigma * tau * b_sq > Scalar(1) + Scalar(kStepProductSlack))
        throw ConfigError("sigma * tau * ||B||^2 = " + std::to_string(sigma * tau * b_sq) + " exceeds 1");
}

template <typename Scalar>
void validate_primal_dual(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    validate_common(p, c);
    check_step_product(c.sigma, c.tau, p.b_norm_sq());
}

template <typename Scalar>
Vector<Scalar> initial_point(const SplitProblem<Scalar>& p) {
    return p.initial_point ? *p.initial_point : Vector<Scalar>::Zero(p.dim());
}

template <typename Scalar>
Vector<Scalar> initial_dual(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    return c.initial_dual ? *c.initial_dual : Vector<Scalar>::Zero(p.B.out_dim());
}

template <typename Scalar>
Vector<Scalar> initial_shadow(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    return c.initial_shadow ? *c.initial_shadow : initial_point(p);
}

template <typename Scalar>
void add_metrics(const SplitProblem<Scalar>& p, const Vector<Scalar>& x, IterationRecord<Scalar>& rec) {
    if (!p.ground_truth) return;
    const auto& truth = *p.ground_truth;
    rec.nmsd = nmsd(truth, x);
    rec.snr = snr(truth, x);
    if (p.image_shape) {
        Scalar range = truth.maxCoeff() - truth.minCoeff();
        if (!(range > 0)) range = Scalar(1);
        rec.ssim = ssim_global(truth, x, range);
    }
}

// Shared outer loop: relative-change stopping, divergence detection, trace recording.
// A Stepper exposes x() (the current primal iterate), step() (one outer iteration,
// returning the next primal iterate), dual() and optionally shadow().
template <typename Scalar, typename Stepper>
SolveTrace<Scalar> run_outer(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c, Stepper& stepper,
                             int inner_count) {
    SolveTrace<Scalar> trace;
    Vector<Scalar> x = stepper.x();
    if (c.keep_iterates) trace.iterates.push_back(x);
    const Scalar obj0 = objective(p, x);
    const Scalar growth_limit = Scalar(1e12) * std::max(std::abs(obj0), Scalar(1));
    trace.records.reserve(static_cast<std::size_t>(std::min(c.max_outer, 100000)));

    for (int k = 1; k <= c.max_outer; ++k) {
        Vector<Scalar> x_next = stepper.step();
        if (!x_next.allFinite()) throw DivergenceError(k, "non-finite iterate");
        IterationRecord<Scalar> rec;
        rec.k = k;
        rec.inner_count = inner_count;
        rec.rel_change = (x_next - x).norm() / std::max(x.norm(), Scalar(1e-30));
        rec.objective = objective(p, x_next);
        if (std::isnan(rec.objective)) throw DivergenceError(k, "objective is NaN");
        if (std::isfinite(obj0) && std::isfinite(rec.objective) && std::abs(rec.objective) > growth_limit)
            throw DivergenceError(k, "objective grew beyond 1e12 times its initial value");
        add_metrics(p, x_next, rec);
        trace.records.push_back(rec);
        x = std::move(x_next);
        if (c.keep_iterates) trace.iterates.push_back(x);
        trace.total_outer = k;
        // x^1 == x^0 can happen while the dual or shadow variables still move (f = 0, tau = 1,
        // zero dual start), so the first iteration is never taken as converged.
        if (k > 1 && rec.rel_change <= c.outer_eps) {
            trace.converged = true;
            break;
        }
    }
    trace.final_x = x;
    trace.final_dual = stepper.dual();
    if constexpr (requires { stepper.shadow(); }) trace.final_shadow = stepper.shadow();
    return trace;
}

// Algorithm 1: forward step on f, then J dual forward-backward steps for
// prox_{gamma(g + h o B)}.
template <typename Scalar>
struct DualFbsStepper {
    const SplitProblem<Scalar>& p;
    const SolverConfig<Scalar>& c;
    Vector<Scalar> xk, y;

    DualFbsStepper(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c)
        : p(p), c(c), xk(initial_point(p)), y(initial_dual(p, c)) {}

    const Vector<Scalar>& x() const { return xk; }
    const Vector<Scalar>& dual() const { return y; }

    Vector<Scalar> step() {
        const Scalar gamma = c.gamma;
        const Scalar dual_step = c.lambda / gamma;
        const Vector<Scalar> u = xk - gamma * p.f.gradient(xk);
        if (!c.warm_start_dual) y.setZero();
        for (int j = 0; j < c.inner_iters; ++j) {
            const Vector<Scalar> primal = prox(p.g, gamma, u - gamma * p.B.adjoint_apply(y));
            y = prox_conjugate(p.h, dual_step, y + dual_step * p.B.apply(primal));
        }
        xk = prox(p.g, gamma, u - gamma * p.B.adjoint_apply(y));
        return xk;
    }
};

// Algorithm 2: forward step on f, then J primal-dual steps for prox_{gamma(g + h o B)}.
// The inner primal variable restarts from the previous inner terminal value, which is x^k.
template <typename Scalar>
struct PrimalDualFbsStepper {
    const SplitProblem<Scalar>& p;
    const SolverConfig<Scalar>& c;
    Vector<Scalar> xk, y;

    PrimalDualFbsStepper(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c)
        : p(p), c(c), xk(initial_point(p)), y(initial_dual(p, c)) {}

    const Vector<Scalar>& x() const { return xk; }
    const Vector<Scalar>& dual() const { return y; }

    Vector<Scalar> step() {
        const Scalar gamma = c.gamma, sigma = c.sigma, tau = c.tau;
        const Scalar primal_step = tau * gamma / (Scalar(1) + tau);
        const Vector<Scalar> u = xk - gamma * p.f.gradient(xk);
        if (!c.warm_start_dual) y.setZero();
        Vector<Scalar> xbar = xk;
        for (int j = 0; j < c.inner_iters; ++j) {
            Vector<Scalar> xbar_next =
                prox(p.g, primal_step, (xbar - tau * p.B.adjoint_apply(y) + tau * u) / (Scalar(1) + tau));
            const Vector<Scalar> extrapolated = Scalar(2) * xbar_next - xbar;
            y = gamma * prox_conjugate(p.h, sigma / gamma, (y + sigma * p.B.apply(extrapolated)) / gamma);
            xbar = std::move(xbar_next);
        }
        xk = std::move(xbar);
        return xk;
    }
};

// Algorithm 3: three-operator outer scheme; s^k from J dual forward-backward steps on the
// dual of prox_{gamma h o B}.
template <typename Scalar>
struct DualThreeOpStepper {
    const SplitProblem<Scalar>& p;
    const SolverConfig<Scalar>& c;
    Vector<Scalar> z, xk, y;

    DualThreeOpStepper(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c)
        : p(p), c(c), z(initial_shadow(p, c)), y(initial_dual(p, c)) {
        xk = prox(p.g, c.gamma, z);
    }

    const Vector<Scalar>& x() const { return xk; }
    const Vector<Scalar>& dual() const { return y; }
    const Vector<Scalar>& shadow() const { return z; }

    Vector<Scalar> step() {
        const Scalar gamma = c.gamma, lambda = c.lambda;
        const Scalar dual_step = lambda / gamma;
        const Vector<Scalar> reflected = Scalar(2) * xk - z - gamma * p.f.gradient(xk);
        const Vector<Scalar> b_reflected = p.B.apply(reflected);
        if (!c.warm_start_dual) y.setZero();
        for (int j = 0; j < c.inner_iters; ++j) {
            y = prox_conjugate(p.h, dual_step, y - lambda * p.B.apply(p.B.adjoint_apply(y)) + dual_step * b_reflected);
        }
        const Vector<Scalar> s = reflected - gamma * p.B.adjoint_apply(y);
        z = z + s - xk;
        xk = prox(p.g, gamma, z);
        return xk;
    }
};

// Algorithm 4: three-operator outer scheme; s^k from J primal-dual steps. The inner
// primal variable v carries over between outer iterations.
template <typename Scalar>
struct PrimalDualThreeOpStepper {
    const SplitProblem<Scalar>& p;
    const SolverConfig<Scalar>& c;
    Vector<Scalar> z, xk, v, y;

    PrimalDualThreeOpStepper(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c)
        : p(p), c(c), z(initial_shadow(p, c)), v(initial_shadow(p, c)), y(initial_dual(p, c)) {
        xk = prox(p.g, c.gamma, z);
    }

    const Vector<Scalar>& x() const { return xk; }
    const Vector<Scalar>& dual() const { return y; }
    const Vector<Scalar>& shadow() const { return z; }

    Vector<Scalar> step() {
        const Scalar gamma = c.gamma, sigma = c.sigma, tau = c.tau;
        const Vector<Scalar> u = Scalar(2) * xk - z - gamma * p.f.gradient(xk);
        if (!c.warm_start_dual) y.setZero();
        for (int j = 0; j < c.inner_iters; ++j) {
            Vector<Scalar> v_next = (v - tau * p.B.adjoint_apply(y) + tau * u) / (Scalar(1) + tau);
            const Vector<Scalar> extrapolated = Scalar(2) * v_next - v;
            y = gamma * prox_conjugate(p.h, sigma / gamma, y / gamma + (sigma / gamma) * p.B.apply(extrapolated));
            v = std::move(v_next);
        }
        z = z + v - xk;
        xk = prox(p.g, gamma, z);
        return xk;
    }
};

template <typename Scalar>
struct PdfpStepper {
    const SplitProblem<Scalar>& p;
    const SolverConfig<Scalar>& c;
    Vector<Scalar> xk, y;

    PdfpStepper(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c)
        : p(p), c(c), xk(initial_point(p)), y(initial_dual(p, c)) {}

    const Vector<Scalar>& x() const { return xk; }
    const Vector<Scalar>& dual() const { return y; }

    Vector<Scalar> step() {
        const Scalar gamma = c.gamma;
        const Scalar dual_step = c.lambda / gamma;
        const Vector<Scalar> forward = xk - gamma * p.f.gradient(xk);
        const Vector<Scalar> v = prox(p.g, gamma, forward - gamma * p.B.adjoint_apply(y));
        y = prox_conjugate(p.h, dual_step, y + dual_step * p.B.apply(v));
        xk = prox(p.g, gamma, forward - gamma * p.B.adjoint_apply(y));
        return xk;
    }
};

// Condat-Vu with explicit steps (tau', sigma') on the scaled dual variable.
template <typename Scalar>
struct CondatVuStepper {
    const SplitProblem<Scalar>& p;
    Scalar primal_step, dual_step;
    Vector<Scalar> xk, y;

    CondatVuStepper(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c, Scalar primal_step,
                    Scalar dual_step)
        : p(p), primal_step(primal_step), dual_step(dual_step), xk(initial_point(p)), y(initial_dual(p, c)) {}

    const Vector<Scalar>& x() const { return xk; }
    const Vector<Scalar>& dual() const { return y; }

    Vector<Scalar> step() {
        Vector<Scalar> x_next =
            prox(p.g, primal_step, xk - primal_step * p.B.adjoint_apply(y) - primal_step * p.f.gradient(xk));
        y = prox_conjugate(p.h, dual_step, y + dual_step * p.B.apply(Scalar(2) * x_next - xk));
        xk = std::move(x_next);
        return xk;
    }
};

template <typename Scalar>
struct Pd3oStepper {
    const SplitProblem<Scalar>& p;
    const SolverConfig<Scalar>& c;
    Vector<Scalar> z, xk, y;

    Pd3oStepper(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c)
        : p(p), c(c), z(initial_shadow(p, c)), y(initial_dual(p, c)) {
        xk = prox(p.g, c.gamma, z);
    }

    const Vector<Scalar>& x() const { return xk; }
    const Vector<Scalar>& dual() const { return y; }
    const Vector<Scalar>& shadow() const { return z; }

    Vector<Scalar> step() {
        const Scalar gamma = c.gamma, lambda = c.lambda;
        const Vector<Scalar> forward = xk - gamma * p.f.gradient(xk);
        y = prox_conjugate(p.h, lambda / gamma,
                           y - lambda * p.B.apply(p.B.adjoint_apply(y)) + (lambda / gamma) * p.B.apply(forward + xk - z));
        z = forward - gamma * p.B.adjoint_apply(y);
        xk = prox(p.g, gamma, z);
        return xk;
    }
};

template <typename Scalar>
struct DavisYinStepper {
    const SplitProblem<Scalar>& p;
    const SolverConfig<Scalar>& c;
    Vector<Scalar> z, xk, y;

    DavisYinStepper(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c)
        : p(p), c(c), z(initial_shadow(p, c)), y(initial_dual(p, c)) {
        xk = prox(p.g, c.gamma, z);
    }

    const Vector<Scalar>& x() const { return xk; }
    const Vector<Scalar>& dual() const { return y; }
    const Vector<Scalar>& shadow() const { return z; }

    Vector<Scalar> step() {
        const Scalar gamma = c.gamma;
        const Vector<Scalar> forward = xk - gamma * p.f.gradient(xk);
        y = prox_conjugate(p.h, Scalar(1) / gamma, (forward + xk - z) / gamma);
        z = forward - gamma * y;
        xk = prox(p.g, gamma, z);
        return xk;
    }
};

// The single-loop scheme obtained from Algorithm 4 with one inner iteration, written out
// directly rather than by delegating to the Algorithm 4 stepper.
template <typename Scalar>
struct NewSchemeStepper {
    const SplitProblem<Scalar>& p;
    const SolverConfig<Scalar>& c;
    Vector<Scalar> z, xk, v, y;

    NewSchemeStepper(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c)
        : p(p), c(c), z(initial_shadow(p, c)), v(initial_shadow(p, c)), y(initial_dual(p, c)) {
        xk = prox(p.g, c.gamma, z);
    }

    const Vector<Scalar>& x() const { return xk; }
    const Vector<Scalar>& dual() const { return y; }
    const Vector<Scalar>& shadow() const { return z; }

    Vector<Scalar> step() {
        const Scalar gamma = c.gamma, sigma = c.sigma, tau = c.tau;
        const Vector<Scalar> u = Scalar(2) * xk - z - gamma * p.f.gradient(xk);
        const Vector<Scalar> v_next = (v - tau * p.B.adjoint_apply(y) + tau * u) / (Scalar(1) + tau);
        y = gamma * prox_conjugate(p.h, sigma / gamma, y / gamma + (sigma / gamma) * p.B.apply(Scalar(2) * v_next - v));
        z = z + v_next - xk;
        v = v_next;
        xk = prox(p.g, gamma, z);
        return xk;
    }
};

}  // namespace detail

/// Algorithm 1, dual forward-backward splitting.
template <typename Scalar>
SolveTrace<Scalar> solve_alg1_dual_fbs(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    detail::validate_dual(p, c);
    detail::DualFbsStepper<Scalar> s(p, c);
    return detail::run_outer(p, c, s, c.inner_iters);
}

/// Algorithm 2, primal-dual forward-backward splitting.
template <typename Scalar>
SolveTrace<Scalar> solve_alg2_pd_fbs(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    detail::validate_primal_dual(p, c);
    detail::PrimalDualFbsStepper<Scalar> s(p, c);
    return detail::run_outer(p, c, s, c.inner_iters);
}

/// Algorithm 3, dual three-operator splitting.
template <typename Scalar>
SolveTrace<Scalar> solve_alg3_dual_three_op(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    detail::validate_dual(p, c);
    detail::DualThreeOpStepper<Scalar> s(p, c);
    return detail::run_outer(p, c, s, c.inner_iters);
}

/// Algorithm 4, primal-dual three-operator splitting.
template <typename Scalar>
SolveTrace<Scalar> solve_alg4_pd_three_op(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    detail::validate_primal_dual(p, c);
    detail::PrimalDualThreeOpStepper<Scalar> s(p, c);
    return detail::run_outer(p, c, s, c.inner_iters);
}

template <typename Scalar>
SolveTrace<Scalar> solve_pdfp(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    detail::validate_dual(p, c);
    detail::PdfpStepper<Scalar> s(p, c);
    return detail::run_outer(p, c, s, 1);
}

/// Standard form takes tau' = c.tau and sigma' = c.sigma directly and requires
/// 1/tau' - sigma' ||B||^2 > L/2. The tau1 form uses tau' = gamma/2, sigma' = sigma/gamma
/// and requires gamma in (0, 2/L) and sigma ||B||^2 <= 1.
template <typename Scalar>
SolveTrace<Scalar> solve_condat_vu(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c,
                                   CondatVuForm form = CondatVuForm::Standard) {
    Scalar primal_step, dual_step;
    if (form == CondatVuForm::Standard) {
        // gamma plays no role in this form; check everything else with an admissible one
        SolverConfig<Scalar> checked = c;
        checked.gamma = Scalar(1) / (p.f.lipschitz() + Scalar(1));
        detail::validate_common(p, checked);
        primal_step = c.tau;
        dual_step = c.sigma;
        if (!(primal_step > 0) || !(dual_step >= 0)) throw ConfigError("condat-vu: steps must be positive");
        const Scalar margin = Scalar(1) / primal_step - dual_step * p.b_norm_sq();
        if (!(margin > p.f.lipschitz() / Scalar(2)))
            throw ConfigError("condat-vu: 1/tau' - sigma' ||B||^2 = " + std::to_string(margin) +
                              " must exceed L/2 = " + std::to_string(p.f.lipschitz() / 2));
    } else {
        detail::validate_common(p, c);
        detail::check_step_product(c.sigma, Scalar(1), p.b_norm_sq());
        primal_step = c.gamma / Scalar(2);
        dual_step = c.sigma / c.gamma;
    }
    detail::CondatVuStepper<Scalar> s(p, c, primal_step, dual_step);
    return detail::run_outer(p, c, s, 1);
}

/// Maps Algorithm 2 parameters (gamma, sigma, tau) to the standard Condat-Vu steps
/// tau' = tau gamma / (1 + tau), sigma' = sigma / gamma.
template <typename Scalar>
SolverConfig<Scalar> condat_vu_steps_from_alg2(SolverConfig<Scalar> c) {
    const Scalar tau_p = c.tau * c.gamma / (Scalar(1) + c.tau);
    const Scalar sigma_p = c.sigma / c.gamma;
    c.tau = tau_p;
    c.sigma = sigma_p;
    return c;
}

template <typename Scalar>
SolveTrace<Scalar> solve_pd3o(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    detail::validate_dual(p, c);
    detail::Pd3oStepper<Scalar> s(p, c);
    return detail::run_outer(p, c, s, 1);
}

/// Requires B to be the identity; lambda is not used.
template <typename Scalar>
SolveTrace<Scalar> solve_davis_yin(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    if (p.B.kind() != MapKind::Identity)
        throw ConfigError(std::string("davis-yin: B must be the identity, got ") + to_string(p.B.kind()));
    detail::validate_common(p, c);
    detail::DavisYinStepper<Scalar> s(p, c);
    return detail::run_outer(p, c, s, 1);
}

template <typename Scalar>
SolveTrace<Scalar> solve_new_scheme(const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    detail::validate_primal_dual(p, c);
    detail::NewSchemeStepper<Scalar> s(p, c);
    return detail::run_outer(p, c, s, 1);
}

/// Dispatch by id. For CondatVu the config carries Algorithm 2 parameters, which are
/// mapped through condat_vu_steps_from_alg2.
template <typename Scalar>
SolveTrace<Scalar> solve(SolverId id, const SplitProblem<Scalar>& p, const SolverConfig<Scalar>& c) {
    switch (id) {
        case SolverId::Alg1: return solve_alg1_dual_fbs(p, c);
        case SolverId::Alg2: return solve_alg2_pd_fbs(p, c);
        case SolverId::Alg3: return solve_alg3_dual_three_op(p, c);
        case SolverId::Alg4: return solve_alg4_pd_three_op(p, c);
        case SolverId::Pdfp: return solve_pdfp(p, c);
        case SolverId::CondatVu: return solve_condat_vu(p, condat_vu_steps_from_alg2(c), CondatVuForm::Standard);
        case SolverId::CondatVuTau1: return solve_condat_vu(p, c, CondatVuForm::Tau1);
        case SolverId::Pd3o: return solve_pd3o(p, c);
        case SolverId::DavisYin: return solve_davis_yin(p, c);
        case SolverId::NewScheme: return solve_new_scheme(p, c);
    }
    throw ConfigError("unknown solver");
}

}  // namespace opsplit
