#pragma once
// Per-station conjugate-prior fitting and posterior scoring.
//
// Beta-binomial for completion data (custom artist stations) and
// gamma-Poisson with per-track day exposure for spin data (broadcast
// stations). Priors are fit by maximizing the marginal likelihood, the
// parametric empirical Bayes estimator; posteriors follow the conjugate
// update rules. Everything works in the log domain so counts up to 1e7
// stay finite.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyprec/entity.hpp"
#include "hyprec/errors.hpp"
#include "hyprec/special_functions.hpp"

namespace hyprec {

// Presentations / completions of one track within one custom artist station.
struct BinomialObs {
    EntityId child;
    std::int64_t trials = 0;      // presentations to users
    std::int64_t successes = 0;   // completions
};

// Spin count of one track over its distinct presented days in one broadcast station.
struct PoissonObs {
    EntityId child;
    std::int64_t count = 0;          // spins
    std::int64_t exposure_days = 1;  // distinct days presented, >= 1
};

inline void validate(const BinomialObs& o) {
    if (o.trials < 0 || o.successes < 0 || o.successes > o.trials) {
        throw validation_error("binomial observation requires 0 <= successes <= trials, got k=" +
                               std::to_string(o.successes) + " n=" + std::to_string(o.trials));
    }
}

inline void validate(const PoissonObs& o) {
    if (o.count < 0 || o.exposure_days < 1) {
        throw validation_error("poisson observation requires count >= 0 and exposure_days >= 1, got n=" +
                               std::to_string(o.count) + " d=" + std::to_string(o.exposure_days));
    }
}

struct BetaPrior {
    double alpha = 1.0;
    double beta = 1.0;
};

struct GammaPrior {
    double shape = 1.0;
    double rate = 1.0;  // units: days
};

struct BetaPosterior {
    double alpha = 1.0;
    double beta = 1.0;
};

struct GammaPosterior {
    double shape = 1.0;
    double rate = 1.0;
};

inline BetaPosterior beta_update(const BetaPrior& prior, const BinomialObs& obs) {
    validate(obs);
    return {prior.alpha + static_cast<double>(obs.successes),
            prior.beta + static_cast<double>(obs.trials - obs.successes)};
}

inline GammaPosterior gamma_update(const GammaPrior& prior, const PoissonObs& obs) {
    validate(obs);
    return {prior.shape + static_cast<double>(obs.count),
            prior.rate + static_cast<double>(obs.exposure_days)};
}

inline double posterior_mean(const BetaPosterior& d) { return d.alpha / (d.alpha + d.beta); }
inline double posterior_mean(const GammaPosterior& d) { return d.shape / d.rate; }
inline double prior_mean(const BetaPrior& p) { return p.alpha / (p.alpha + p.beta); }
inline double prior_mean(const GammaPrior& p) { return p.shape / p.rate; }

// ---------------------------------------------------------------------------
// Posterior quantiles (lower credible bounds use q = alpha, default 0.05).

inline double beta_quantile(const BetaPosterior& dist, double q) {
    if (!(q > 0.0) || !(q < 1.0)) {
        throw std::domain_error("beta_quantile: q must lie in (0, 1)");
    }
    const double a = dist.alpha;
    const double b = dist.beta;
    const double ln_b = log_beta(a, b);
    const auto cdf = [&](double x) { return reg_inc_beta(a, b, x); };
    const auto pdf = [&](double x) {
        if (x <= 0.0 || x >= 1.0) return 0.0;
        return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - ln_b);
    };
    return detail::invert_cdf(cdf, pdf, 0.0, 1.0, q, a / (a + b));
}

inline double gamma_quantile(const GammaPosterior& dist, double q) {
    if (!(q > 0.0) || !(q < 1.0)) {
        throw std::domain_error("gamma_quantile: q must lie in (0, 1)");
    }
    const double a = dist.shape;
    const double rate = dist.rate;
    const double ln_g = std::lgamma(a);
    const auto cdf = [&](double x) { return reg_lower_gamma(a, rate * x); };
    const auto pdf = [&](double x) {
        if (x <= 0.0) return 0.0;
        return std::exp(a * std::log(rate) + (a - 1.0) * std::log(x) - rate * x - ln_g);
    };
    // Bracket from the design contract: (0, mean + 20 stddev), widened if short.
    double hi = (a + 20.0 * std::sqrt(a)) / rate;
    while (cdf(hi) < q) {
        hi *= 2.0;
    }
    return detail::invert_cdf(cdf, pdf, 0.0, hi, q, a / rate);
}

// ---------------------------------------------------------------------------
// Marginal log-likelihoods and their analytic derivatives.

inline double beta_binomial_loglik(double alpha, double beta, std::span<const BinomialObs> obs) {
    const double base = log_beta(alpha, beta);
    double ll = 0.0;
    for (const auto& o : obs) {
        const double k = static_cast<double>(o.successes);
        const double n = static_cast<double>(o.trials);
        ll += log_beta(alpha + k, beta + n - k) - base;
    }
    return ll;
}

inline std::array<double, 2> beta_binomial_loglik_grad(double alpha, double beta,
                                                       std::span<const BinomialObs> obs) {
    const double psi_a = digamma(alpha);
    const double psi_b = digamma(beta);
    const double psi_ab = digamma(alpha + beta);
    double ga = 0.0;
    double gb = 0.0;
    for (const auto& o : obs) {
        const double k = static_cast<double>(o.successes);
        const double n = static_cast<double>(o.trials);
        const double psi_abn = digamma(alpha + beta + n);
        ga += digamma(alpha + k) - psi_abn - psi_a + psi_ab;
        gb += digamma(beta + n - k) - psi_abn - psi_b + psi_ab;
    }
    return {ga, gb};
}

namespace detail {

// Hessian of the beta-binomial marginal log-likelihood: {d2/da2, d2/dadb, d2/db2}.
inline std::array<double, 3> beta_binomial_loglik_hess(double alpha, double beta,
                                                       std::span<const BinomialObs> obs) {
    const double tri_a = trigamma(alpha);
    const double tri_b = trigamma(beta);
    const double tri_ab = trigamma(alpha + beta);
    double haa = 0.0, hab = 0.0, hbb = 0.0;
    for (const auto& o : obs) {
        const double k = static_cast<double>(o.successes);
        const double n = static_cast<double>(o.trials);
        const double tri_abn = trigamma(alpha + beta + n);
        haa += trigamma(alpha + k) - tri_abn - tri_a + tri_ab;
        hab += tri_ab - tri_abn;
        hbb += trigamma(beta + n - k) - tri_abn - tri_b + tri_ab;
    }
    return {haa, hab, hbb};
}

}  // namespace detail

inline double gamma_poisson_loglik(double shape, double rate, std::span<const PoissonObs> obs) {
    const double lg_shape = std::lgamma(shape);
    const double ln_rate = std::log(rate);
    double ll = 0.0;
    for (const auto& o : obs) {
        const double n = static_cast<double>(o.count);
        const double d = static_cast<double>(o.exposure_days);
        ll += std::lgamma(shape + n) - lg_shape - std::lgamma(n + 1.0) + shape * ln_rate +
              n * std::log(d) - (shape + n) * std::log(rate + d);
    }
    return ll;
}

inline std::array<double, 2> gamma_poisson_loglik_grad(double shape, double rate,
                                                       std::span<const PoissonObs> obs) {
    const double psi_shape = digamma(shape);
    const double ln_rate = std::log(rate);
    double gs = 0.0;
    double gr = 0.0;
    for (const auto& o : obs) {
        const double n = static_cast<double>(o.count);
        const double d = static_cast<double>(o.exposure_days);
        gs += digamma(shape + n) - psi_shape + ln_rate - std::log(rate + d);
        gr += shape / rate - (shape + n) / (rate + d);
    }
    return {gs, gr};
}

namespace detail {

inline std::array<double, 3> gamma_poisson_loglik_hess(double shape, double rate,
                                                       std::span<const PoissonObs> obs) {
    const double tri_shape = trigamma(shape);
    double hss = 0.0, hsr = 0.0, hrr = 0.0;
    for (const auto& o : obs) {
        const double n = static_cast<double>(o.count);
        const double d = static_cast<double>(o.exposure_days);
        hss += trigamma(shape + n) - tri_shape;
        hsr += 1.0 / rate - 1.0 / (rate + d);
        hrr += -shape / (rate * rate) + (shape + n) / ((rate + d) * (rate + d));
    }
    return {hss, hsr, hrr};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Prior fitting.

struct FitOptions {
    double grad_tol = 1e-8;      // max-norm of the marginal-likelihood gradient
    double step_tol = 1e-10;     // relative parameter movement
    int max_iter = 500;
    double clamp_lo = 1e-3;
    double clamp_hi = 1e6;
};

namespace detail {

// Returns a diagnostic message when a group cannot support a marginal-MLE fit.
inline std::string beta_fit_defect(std::span<const BinomialObs> obs) {
    std::size_t usable = 0;
    const BinomialObs* first = nullptr;
    bool distinct = false;
    for (const auto& o : obs) {
        validate(o);
        if (o.trials == 0) continue;
        ++usable;
        if (!first) {
            first = &o;
        } else if (static_cast<__int128>(o.successes) * first->trials !=
                   static_cast<__int128>(first->successes) * o.trials) {
            distinct = true;
        }
    }
    if (usable < 2) {
        return "fewer than 2 observations with trials > 0; apply the fallback prior";
    }
    if (!distinct) {
        return "all empirical rates identical (zero variance); apply the fallback prior";
    }
    return {};
}

inline std::string gamma_fit_defect(std::span<const PoissonObs> obs) {
    const PoissonObs* first = nullptr;
    bool distinct = false;
    for (const auto& o : obs) {
        validate(o);
        if (!first) {
            first = &o;
        } else if (static_cast<__int128>(o.count) * first->exposure_days !=
                   static_cast<__int128>(first->count) * o.exposure_days) {
            distinct = true;
        }
    }
    if (obs.size() < 2) {
        return "fewer than 2 observations; apply the fallback prior";
    }
    if (!distinct) {
        return "all empirical rates identical (zero variance); apply the fallback prior";
    }
    return {};
}

template <class LogLik, class Grad, class Hess>
std::array<double, 2> maximize2(std::array<double, 2> x, LogLik&& ll_fn, Grad&& grad_fn,
                                Hess&& hess_fn, const FitOptions& opt) {
    const auto clamp = [&](std::array<double, 2> p) {
        p[0] = std::clamp(p[0], opt.clamp_lo, opt.clamp_hi);
        p[1] = std::clamp(p[1], opt.clamp_lo, opt.clamp_hi);
        return p;
    };
    x = clamp(x);
    double fx = ll_fn(x[0], x[1]);
    for (int it = 0; it < opt.max_iter; ++it) {
        const auto g = grad_fn(x[0], x[1]);
        if (std::max(std::fabs(g[0]), std::fabs(g[1])) < opt.grad_tol) {
            break;
        }
        const auto h = hess_fn(x[0], x[1]);
        const double det = h[0] * h[2] - h[1] * h[1];
        std::array<double, 2> dir{g[0], g[1]};  // gradient ascent fallback
        if (h[0] < 0.0 && det > 0.0) {
            // Newton direction -H^{-1} g for a negative-definite Hessian.
            const double d0 = -(h[2] * g[0] - h[1] * g[1]) / det;
            const double d1 = -(h[0] * g[1] - h[1] * g[0]) / det;
            if (d0 * g[0] + d1 * g[1] > 0.0) {
                dir = {d0, d1};
            }
        }
        double t = 1.0;
        std::array<double, 2> xn = x;
        double fn = fx;
        bool improved = false;
        for (int ls = 0; ls < 80; ++ls) {
            xn = clamp({x[0] + t * dir[0], x[1] + t * dir[1]});
            fn = ll_fn(xn[0], xn[1]);
            if (fn > fx) {
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if (!improved) {
            break;
        }
        const double move = std::max(std::fabs(xn[0] - x[0]) / std::max(std::fabs(x[0]), 1e-12),
                                     std::fabs(xn[1] - x[1]) / std::max(std::fabs(x[1]), 1e-12));
        x = xn;
        fx = fn;
        if (move < opt.step_tol) {
            break;
        }
    }
    return x;
}

}  // namespace detail

// Method-of-moments starting point for the beta-binomial fit.
inline std::array<double, 2> beta_moment_init(std::span<const BinomialObs> obs) {
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;
    for (const auto& o : obs) {
        if (o.trials == 0) continue;
        const double rate = static_cast<double>(o.successes) / static_cast<double>(o.trials);
        sum += rate;
        sum_sq += rate * rate;
        ++n;
    }
    const double m = n > 0 ? sum / static_cast<double>(n) : 0.5;
    const double var = n > 1 ? std::max(0.0, (sum_sq - sum * m) / static_cast<double>(n - 1)) : 0.0;
    double a = m;
    double b = 1.0 - m;
    if (var > 0.0 && var < m * (1.0 - m)) {
        const double conc = m * (1.0 - m) / var - 1.0;
        a = m * conc;
        b = (1.0 - m) * conc;
    }
    return {std::clamp(a, 1e-3, 1e6), std::clamp(b, 1e-3, 1e6)};
}

// Method-of-moments starting point for the gamma-Poisson fit. Subtracts the
// expected Poisson sampling noise from the rate variance.
inline std::array<double, 2> gamma_moment_init(std::span<const PoissonObs> obs) {
    double sum = 0.0, sum_sq = 0.0, sum_inv_d = 0.0;
    std::size_t n = 0;
    for (const auto& o : obs) {
        const double rate = static_cast<double>(o.count) / static_cast<double>(o.exposure_days);
        sum += rate;
        sum_sq += rate * rate;
        sum_inv_d += 1.0 / static_cast<double>(o.exposure_days);
        ++n;
    }
    const double m = n > 0 ? sum / static_cast<double>(n) : 1.0;
    const double var = n > 1 ? std::max(0.0, (sum_sq - sum * m) / static_cast<double>(n - 1)) : 0.0;
    const double excess = var - m * (n > 0 ? sum_inv_d / static_cast<double>(n) : 0.0);
    double shape = 1.0;
    double rate = m > 0.0 ? 1.0 / m : 1.0;
    if (m > 0.0 && excess > 0.0) {
        rate = m / excess;
        shape = m * rate;
    }
    return {std::clamp(shape, 1e-3, 1e6), std::clamp(rate, 1e-3, 1e6)};
}

// Maximizes the beta-binomial marginal likelihood. Throws fit_error on
// degenerate groups; callers then apply beta_fallback_prior.
inline BetaPrior fit_beta_prior(std::span<const BinomialObs> obs, const FitOptions& opt = {}) {
    if (const auto defect = detail::beta_fit_defect(obs); !defect.empty()) {
        throw fit_error("fit_beta_prior: " + defect);
    }
    const auto x = detail::maximize2(
        beta_moment_init(obs),
        [&](double a, double b) { return beta_binomial_loglik(a, b, obs); },
        [&](double a, double b) { return beta_binomial_loglik_grad(a, b, obs); },
        [&](double a, double b) { return detail::beta_binomial_loglik_hess(a, b, obs); }, opt);
    return {x[0], x[1]};
}

inline GammaPrior fit_gamma_prior(std::span<const PoissonObs> obs, const FitOptions& opt = {}) {
    if (const auto defect = detail::gamma_fit_defect(obs); !defect.empty()) {
        throw fit_error("fit_gamma_prior: " + defect);
    }
    const auto x = detail::maximize2(
        gamma_moment_init(obs),
        [&](double s, double r) { return gamma_poisson_loglik(s, r, obs); },
        [&](double s, double r) { return gamma_poisson_loglik_grad(s, r, obs); },
        [&](double s, double r) { return detail::gamma_poisson_loglik_hess(s, r, obs); }, opt);
    return {x[0], x[1]};
}

// Fallback priors for degenerate groups: method of moments when its variance
// estimate is usable, otherwise the flat Beta(1,1) / Gamma(1, mean exposure).
inline BetaPrior beta_fallback_prior(std::span<const BinomialObs> obs) {
    double sum = 0.0, sum_sq = 0.0;
    std::size_t n = 0;
    for (const auto& o : obs) {
        if (o.trials == 0) continue;
        const double rate = static_cast<double>(o.successes) / static_cast<double>(o.trials);
        sum += rate;
        sum_sq += rate * rate;
        ++n;
    }
    if (n > 1) {
        const double m = sum / static_cast<double>(n);
        const double var = std::max(0.0, (sum_sq - sum * m) / static_cast<double>(n - 1));
        if (m > 0.0 && m < 1.0 && var > 0.0 && var < m * (1.0 - m)) {
            const double conc = m * (1.0 - m) / var - 1.0;
            return {std::clamp(m * conc, 1e-3, 1e6), std::clamp((1.0 - m) * conc, 1e-3, 1e6)};
        }
    }
    return {1.0, 1.0};
}

inline GammaPrior gamma_fallback_prior(std::span<const PoissonObs> obs) {
    double sum = 0.0, sum_sq = 0.0, sum_d = 0.0, sum_inv_d = 0.0;
    std::size_t n = 0;
    for (const auto& o : obs) {
        const double rate = static_cast<double>(o.count) / static_cast<double>(o.exposure_days);
        sum += rate;
        sum_sq += rate * rate;
        sum_d += static_cast<double>(o.exposure_days);
        sum_inv_d += 1.0 / static_cast<double>(o.exposure_days);
        ++n;
    }
    if (n > 1) {
        const double m = sum / static_cast<double>(n);
        const double var = std::max(0.0, (sum_sq - sum * m) / static_cast<double>(n - 1));
        const double excess = var - m * sum_inv_d / static_cast<double>(n);
        if (m > 0.0 && excess > 0.0) {
            const double rate = m / excess;
            return {std::clamp(m * rate, 1e-3, 1e6), std::clamp(rate, 1e-3, 1e6)};
        }
    }
    const double mean_exposure = n > 0 ? sum_d / static_cast<double>(n) : 1.0;
    return {1.0, std::clamp(mean_exposure, 1e-3, 1e6)};
}

struct BetaFitOutcome {
    BetaPrior prior;
    bool fell_back = false;
};

struct GammaFitOutcome {
    GammaPrior prior;
    bool fell_back = false;
};

inline BetaFitOutcome fit_beta_prior_or_fallback(std::span<const BinomialObs> obs,
                                                 const FitOptions& opt = {}) {
    try {
        return {fit_beta_prior(obs, opt), false};
    } catch (const fit_error&) {
        return {beta_fallback_prior(obs), true};
    }
}

inline GammaFitOutcome fit_gamma_prior_or_fallback(std::span<const PoissonObs> obs,
                                                   const FitOptions& opt = {}) {
    try {
        return {fit_gamma_prior(obs, opt), false};
    } catch (const fit_error&) {
        return {gamma_fallback_prior(obs), true};
    }
}

}  // namespace hyprec
