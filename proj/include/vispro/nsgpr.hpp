#pragma once

// Nonstationary Gaussian-process smoother for noisy RUL trajectories.
// Covariance is a dot-product term plus a locally varying length-scale term;
// the log length-scale field is itself interpolated by a squared-exponential
// GP over a fixed support grid. The quadratic explicit mean is profiled by
// generalized least squares inside the marginal likelihood.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vispro/common.hpp"
#include "vispro/nelder_mead.hpp"

namespace vispro {

// ---------------------------------------------------------------------------
// Dense symmetric linear algebra, sized for a few hundred points.

struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

struct Cholesky {
    int n = 0;
    std::vector<double> lower;  // row-major, lower triangle populated

    static std::optional<Cholesky> factor(const Mat& a) {
        Cholesky chol;
        chol.n = a.rows;
        chol.lower.assign(static_cast<std::size_t>(chol.n) * chol.n, 0.0);
        for (int i = 0; i < chol.n; ++i) {
            for (int j = 0; j <= i; ++j) {
                double sum = a.at(i, j);
                for (int k = 0; k < j; ++k) sum -= chol.l(i, k) * chol.l(j, k);
                if (i == j) {
                    if (!(sum > 0.0) || !std::isfinite(sum)) return std::nullopt;
                    chol.l(i, j) = std::sqrt(sum);
                } else {
                    chol.l(i, j) = sum / chol.l(j, j);
                }
            }
        }
        return chol;
    }

    double& l(int i, int j) { return lower[static_cast<std::size_t>(i) * n + j]; }
    double l(int i, int j) const { return lower[static_cast<std::size_t>(i) * n + j]; }

    void forward_solve(std::vector<double>& b) const {  // b <- L^-1 b
        for (int i = 0; i < n; ++i) {
            double sum = b[i];
            for (int k = 0; k < i; ++k) sum -= l(i, k) * b[k];
            b[i] = sum / l(i, i);
        }
    }

    void backward_solve(std::vector<double>& b) const {  // b <- L^-T b
        for (int i = n - 1; i >= 0; --i) {
            double sum = b[i];
            for (int k = i + 1; k < n; ++k) sum -= l(k, i) * b[k];
            b[i] = sum / l(i, i);
        }
    }

    std::vector<double> solve(std::vector<double> b) const {  // (L L^T)^-1 b
        forward_solve(b);
        backward_solve(b);
        return b;
    }

    double log_det() const {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += std::log(l(i, i));
        return 2.0 * acc;
    }
};

// Gaussian elimination with partial pivoting for the small GLS systems.
inline std::vector<double> solve_small(Mat a, std::vector<double> b) {
    const int n = a.rows;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::abs(a.at(r, col)) > std::abs(a.at(pivot, col))) pivot = r;
        }
        if (std::abs(a.at(pivot, col)) < 1e-300) {
            throw NumericalError("mean fit: rank-deficient design");
        }
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(a.at(col, j), a.at(pivot, j));
            std::swap(b[col], b[pivot]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = a.at(r, col) / a.at(col, col);
            for (int j = col; j < n; ++j) a.at(r, j) -= f * a.at(col, j);
            b[r] -= f * b[col];
        }
    }
    for (int i = n - 1; i >= 0; --i) {
        double sum = b[i];
        for (int j = i + 1; j < n; ++j) sum -= a.at(i, j) * b[j];
        b[i] = sum / a.at(i, i);
    }
    return b;
}

// ---------------------------------------------------------------------------
// Kernels

inline double dot_product_kernel(double xi, double xj, double sigma0) {
    return sigma0 * sigma0 + xi * xj;
}

inline double local_length_scale_kernel(double xi, double xj, double li, double lj,
                                        double sigmaf) {
    if (!(li > 0.0) || !(lj > 0.0) || !(sigmaf > 0.0)) {
        throw UserError("local length-scale kernel: nonpositive hyperparameter");
    }
    const double li2 = li * li, lj2 = lj * lj;
    const double mix = 0.5 * li2 + 0.5 * lj2;
    const double diff = xi - xj;
    return sigmaf * sigmaf * std::pow(li2, 0.25) * std::pow(lj2, 0.25) /
           std::sqrt(mix) * std::exp(-diff * diff / mix);
}

inline double se_kernel(double xi, double xj, double length, double scale) {
    if (!(length > 0.0) || !(scale > 0.0)) {
        throw UserError("squared-exponential kernel: nonpositive hyperparameter");
    }
    const double diff = xi - xj;
    return scale * scale * std::exp(-diff * diff / (length * length));
}

// ---------------------------------------------------------------------------
// Hyperparameters. Positive quantities are stored as logs so the simplex
// search is unconstrained.

enum class KernelKind { kLocalField, kUniversalSe };

struct KernelParams {
    KernelKind kind = KernelKind::kLocalField;
    double log_sigma0 = 0.0;
    double log_sigmaf = 0.0;
    double log_sigmae = 0.0;

    // local-field kind
    std::vector<double> support_x;    // fixed support grid, normalized time
    std::vector<double> log_lengths;  // latent lambda_j at the support points
    double log_len2 = 0.0;            // second-level SE length
    double log_scale2 = 0.0;          // second-level SE scale

    // universal-SE kind
    double log_length = 0.0;

    double sigma0() const { return std::exp(log_sigma0); }
    double sigmaf() const { return std::exp(log_sigmaf); }
    double sigmae() const { return std::exp(log_sigmae); }

    std::vector<double> pack() const {
        std::vector<double> v{log_sigma0, log_sigmaf, log_sigmae};
        if (kind == KernelKind::kLocalField) {
            v.insert(v.end(), log_lengths.begin(), log_lengths.end());
            v.push_back(log_len2);
            v.push_back(log_scale2);
        } else {
            v.push_back(log_length);
        }
        return v;
    }

    void unpack(const std::vector<double>& v) {
        log_sigma0 = v[0];
        log_sigmaf = v[1];
        log_sigmae = v[2];
        if (kind == KernelKind::kLocalField) {
            for (std::size_t j = 0; j < log_lengths.size(); ++j) log_lengths[j] = v[3 + j];
            log_len2 = v[3 + log_lengths.size()];
            log_scale2 = v[4 + log_lengths.size()];
        } else {
            log_length = v[3];
        }
    }
};

// Noise-free SE-GP interpolant of the latent log lengths, centered on their
// mean so that a constant field stays constant everywhere (including far
// extrapolation, where the posterior mean reverts to the centre).
struct LengthScaleField {
    std::vector<double> support_x;
    std::vector<double> weights;
    double lambda_mean = 0.0;
    double length = 1.0;
    double scale = 1.0;

    static LengthScaleField build(const KernelParams& params) {
        const std::size_t k = params.support_x.size();
        for (std::size_t i = 1; i < k; ++i) {
            if (params.support_x[i] <= params.support_x[i - 1]) {
                throw UserError("length-scale field: support points must be strictly increasing");
            }
        }
        LengthScaleField field;
        field.support_x = params.support_x;
        field.length = std::exp(params.log_len2);
        field.scale = std::exp(params.log_scale2);

        double mean = 0.0;
        for (const double v : params.log_lengths) mean += v;
        mean /= static_cast<double>(k);
        field.lambda_mean = mean;

        Mat gram(static_cast<int>(k), static_cast<int>(k));
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                gram.at(static_cast<int>(i), static_cast<int>(j)) =
                    se_kernel(field.support_x[i], field.support_x[j], field.length,
                              field.scale) +
                    (i == j ? 1e-10 : 0.0);
            }
        }
        const auto chol = Cholesky::factor(gram);
        if (!chol) throw UserError("length-scale field: singular second-level covariance");

        std::vector<double> centered(k);
        for (std::size_t j = 0; j < k; ++j) centered[j] = params.log_lengths[j] - mean;
        field.weights = chol->solve(std::move(centered));
        return field;
    }

    double operator()(double x) const {
        double acc = lambda_mean;
        for (std::size_t j = 0; j < support_x.size(); ++j) {
            acc += weights[j] * se_kernel(x, support_x[j], length, scale);
        }
        return std::exp(acc);
    }
};

inline double length_scale_field(const KernelParams& params, double x) {
    return LengthScaleField::build(params)(x);
}

// ---------------------------------------------------------------------------
// Dataset in normalized coordinates.

struct GprDataset {
    std::vector<double> x;  // normalized time, strictly increasing
    std::vector<double> y;  // normalized RUL estimates
    double time_offset = 0.0;
    double time_scale = 1.0;
    double rul_scale = 1.0;

    int size() const { return static_cast<int>(x.size()); }

    double to_normalized_time(double t_seconds) const {
        return (t_seconds - time_offset) / time_scale;
    }

    void validate() const {
        if (x.size() != y.size() || x.size() < 4) {
            throw UserError("gpr dataset: need at least 4 points");
        }
        for (std::size_t i = 1; i < x.size(); ++i) {
            if (x[i] <= x[i - 1]) {
                throw UserError("gpr dataset: inputs must be strictly increasing");
            }
        }
    }

    // Normalizes a (t_seconds, rul_seconds) trajectory: time mapped onto [0,1],
    // outputs divided by max |y|. Trajectories longer than 500 points are
    // evenly subsampled.
    static GprDataset from_trajectory(const std::vector<std::pair<double, double>>& traj) {
        if (traj.size() < 4) throw UserError("gpr dataset: need at least 4 points");
        std::vector<std::pair<double, double>> points;
        if (traj.size() > 500) {
            points.reserve(500);
            const double last = static_cast<double>(traj.size() - 1);
            for (int i = 0; i < 500; ++i) {
                points.push_back(traj[static_cast<std::size_t>(
                    std::llround(last * static_cast<double>(i) / 499.0))]);
            }
        } else {
            points = traj;
        }

        GprDataset ds;
        ds.time_offset = points.front().first;
        ds.time_scale = points.back().first - points.front().first;
        if (!(ds.time_scale > 0.0)) {
            throw UserError("gpr dataset: degenerate time span");
        }
        double max_abs = 0.0;
        for (const auto& [t, r] : points) max_abs = std::max(max_abs, std::abs(r));
        ds.rul_scale = max_abs > 0.0 ? max_abs : 1.0;
        for (const auto& [t, r] : points) {
            ds.x.push_back((t - ds.time_offset) / ds.time_scale);
            ds.y.push_back(r / ds.rul_scale);
        }
        ds.validate();
        return ds;
    }
};

// ---------------------------------------------------------------------------
// Covariance assembly (the sum of the dot-product and local terms).

inline Mat combined_kernel_matrix(const std::vector<double>& xa,
                                  const std::vector<double>& xb,
                                  const KernelParams& params) {
    const double s0 = params.sigma0();
    const double sf = params.sigmaf();
    Mat k(static_cast<int>(xa.size()), static_cast<int>(xb.size()));

    if (params.kind == KernelKind::kLocalField) {
        const LengthScaleField field = LengthScaleField::build(params);
        std::vector<double> la(xa.size()), lb(xb.size());
        for (std::size_t i = 0; i < xa.size(); ++i) la[i] = field(xa[i]);
        for (std::size_t j = 0; j < xb.size(); ++j) lb[j] = field(xb[j]);
        for (std::size_t i = 0; i < xa.size(); ++i) {
            for (std::size_t j = 0; j < xb.size(); ++j) {
                k.at(static_cast<int>(i), static_cast<int>(j)) =
                    dot_product_kernel(xa[i], xb[j], s0) +
                    local_length_scale_kernel(xa[i], xb[j], la[i], lb[j], sf);
            }
        }
    } else {
        const double len = std::exp(params.log_length);
        for (std::size_t i = 0; i < xa.size(); ++i) {
            for (std::size_t j = 0; j < xb.size(); ++j) {
                k.at(static_cast<int>(i), static_cast<int>(j)) =
                    dot_product_kernel(xa[i], xb[j], s0) + se_kernel(xa[i], xb[j], len, sf);
            }
        }
    }
    return k;
}

inline double kernel_value(double xi, double xj, double li, double lj,
                           const KernelParams& params) {
    if (params.kind == KernelKind::kLocalField) {
        return dot_product_kernel(xi, xj, params.sigma0()) +
               local_length_scale_kernel(xi, xj, li, lj, params.sigmaf());
    }
    return dot_product_kernel(xi, xj, params.sigma0()) +
           se_kernel(xi, xj, std::exp(params.log_length), params.sigmaf());
}

// ---------------------------------------------------------------------------
// Mean profiling and marginal likelihood.

inline Mat quadratic_design(const std::vector<double>& x) {
    Mat h(static_cast<int>(x.size()), 3);
    for (std::size_t i = 0; i < x.size(); ++i) {
        h.at(static_cast<int>(i), 0) = 1.0;
        h.at(static_cast<int>(i), 1) = x[i];
        h.at(static_cast<int>(i), 2) = x[i] * x[i];
    }
    return h;
}

inline double quadratic_mean(const std::vector<double>& beta, double x) {
    return beta[0] + beta[1] * x + beta[2] * x * x;
}

// Generalized least squares: beta = (H' Kn^-1 H)^-1 H' Kn^-1 y.
inline std::vector<double> fit_mean_beta(const std::vector<double>& x,
                                         const std::vector<double>& y,
                                         const Cholesky& chol) {
    const int m = static_cast<int>(x.size());
    const Mat h = quadratic_design(x);

    std::vector<std::vector<double>> kinv_h(3, std::vector<double>(m));
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < m; ++i) kinv_h[c][i] = h.at(i, c);
        kinv_h[c] = chol.solve(std::move(kinv_h[c]));
    }
    const std::vector<double> kinv_y = chol.solve(y);

    Mat a(3, 3);
    std::vector<double> b(3, 0.0);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            double sum = 0.0;
            for (int i = 0; i < m; ++i) sum += h.at(i, r) * kinv_h[c][i];
            a.at(r, c) = sum;
        }
        for (int i = 0; i < m; ++i) b[r] += h.at(i, r) * kinv_y[i];
    }
    return solve_small(a, b);
}

// Gaussian log-density of a residual under covariance factor `chol`.
inline double log_likelihood_residual(const Cholesky& chol, std::vector<double> residual) {
    const int m = static_cast<int>(residual.size());
    chol.forward_solve(residual);
    double quad = 0.0;
    for (const double v : residual) quad += v * v;
    return -0.5 * quad - 0.5 * chol.log_det() -
           0.5 * static_cast<double>(m) * std::log(2.0 * M_PI);
}

inline constexpr double kNegativeInfinity = -std::numeric_limits<double>::infinity();

// Profiled log marginal likelihood; factorization failure yields the -inf
// sentinel so the optimizer can step away from bad regions.
inline double log_marginal_likelihood(const GprDataset& ds, const KernelParams& params,
                                      std::vector<double>* beta_out = nullptr) {
    try {
        Mat k = combined_kernel_matrix(ds.x, ds.x, params);
        const double noise = params.sigmae() * params.sigmae();
        for (int i = 0; i < k.rows; ++i) k.at(i, i) += noise;
        const auto chol = Cholesky::factor(k);
        if (!chol) return kNegativeInfinity;

        const std::vector<double> beta = fit_mean_beta(ds.x, ds.y, *chol);
        if (beta_out) *beta_out = beta;
        std::vector<double> residual(ds.y);
        for (int i = 0; i < ds.size(); ++i) residual[i] -= quadratic_mean(beta, ds.x[i]);
        const double value = log_likelihood_residual(*chol, std::move(residual));
        return std::isfinite(value) ? value : kNegativeInfinity;
    } catch (const UserError&) {
        return kNegativeInfinity;
    } catch (const NumericalError&) {
        return kNegativeInfinity;
    }
}

// ---------------------------------------------------------------------------
// Fitting

struct FitConfig {
    std::uint64_t seed = 1;
    int restarts = 5;
    int max_iterations = 2000;
    KernelKind kind = KernelKind::kLocalField;
    int support_count = 8;
    double support_max = 1.25;
    double tolerance = 1e-8;
    std::optional<KernelParams> init;  // overrides the heuristic initializer
};

struct GprModel {
    GprDataset dataset;
    KernelParams params;
    std::vector<double> beta;
    double log_likelihood = kNegativeInfinity;

    // cached factorization state
    Cholesky chol;
    std::vector<double> alpha;  // Kn^-1 (y - H beta)
    std::optional<LengthScaleField> field;

    void refresh_cache() {
        Mat k = combined_kernel_matrix(dataset.x, dataset.x, params);
        const double noise = params.sigmae() * params.sigmae();
        for (int i = 0; i < k.rows; ++i) k.at(i, i) += noise;
        auto factor = Cholesky::factor(k);
        if (!factor) throw NumericalError("gpr: covariance factorization failed");
        chol = std::move(*factor);

        std::vector<double> residual(dataset.y);
        for (int i = 0; i < dataset.size(); ++i) {
            residual[i] -= quadratic_mean(beta, dataset.x[i]);
        }
        alpha = chol.solve(std::move(residual));
        if (params.kind == KernelKind::kLocalField) {
            field = LengthScaleField::build(params);
        } else {
            field.reset();
        }
    }

    // Posterior of the latent process at normalized input x; the standard
    // Gaussian conditional with the quadratic mean added back.
    std::pair<double, double> posterior(double x_norm) const {
        const int m = dataset.size();
        const double lx = field ? (*field)(x_norm) : 1.0;
        std::vector<double> kstar(m);
        for (int i = 0; i < m; ++i) {
            const double li = field ? (*field)(dataset.x[i]) : 1.0;
            kstar[i] = kernel_value(dataset.x[i], x_norm, li, lx, params);
        }
        double mu = quadratic_mean(beta, x_norm);
        for (int i = 0; i < m; ++i) mu += kstar[i] * alpha[i];

        const double kxx = kernel_value(x_norm, x_norm, lx, lx, params);
        chol.forward_solve(kstar);
        double explained = 0.0;
        for (const double v : kstar) explained += v * v;
        double variance = kxx - explained;
        if (variance < -1e-10) {
            throw NumericalError("gpr: negative posterior variance " +
                                 std::to_string(variance));
        }
        variance = std::max(variance, 0.0);
        return {mu, std::sqrt(variance)};
    }

    // Posterior in real units at a wall-clock time.
    std::pair<double, double> predict_seconds(double t_seconds) const {
        const auto [mu, sigma] = posterior(dataset.to_normalized_time(t_seconds));
        return {mu * dataset.rul_scale, sigma * dataset.rul_scale};
    }
};

inline KernelParams heuristic_init(const GprDataset& ds, const FitConfig& config) {
    KernelParams params;
    params.kind = config.kind;

    // Ordinary least squares quadratic as the starting trend.
    Mat identity(ds.size(), ds.size());
    for (int i = 0; i < ds.size(); ++i) identity.at(i, i) = 1.0;
    const auto chol = Cholesky::factor(identity);
    const std::vector<double> beta = fit_mean_beta(ds.x, ds.y, *chol);
    double ss = 0.0;
    for (int i = 0; i < ds.size(); ++i) {
        const double r = ds.y[i] - quadratic_mean(beta, ds.x[i]);
        ss += r * r;
    }
    const double resid_std = std::sqrt(ss / static_cast<double>(ds.size()));

    params.log_sigma0 = std::log(0.3);
    params.log_sigmaf = std::log(std::max(resid_std, 1e-3));
    params.log_sigmae = std::log(std::max(0.5 * resid_std, 1e-3));
    if (config.kind == KernelKind::kLocalField) {
        params.support_x.resize(static_cast<std::size_t>(config.support_count));
        for (int j = 0; j < config.support_count; ++j) {
            params.support_x[j] = config.support_max * static_cast<double>(j) /
                                  static_cast<double>(config.support_count - 1);
        }
        params.log_lengths.assign(params.support_x.size(), std::log(0.2));
        params.log_len2 = std::log(0.4);
        params.log_scale2 = std::log(0.7);
    } else {
        params.log_length = std::log(0.3);
    }
    return params;
}

// Maximizes the profiled marginal likelihood with seeded multi-restart
// simplex search over the log-transformed hyperparameters.
inline GprModel fit(const GprDataset& dataset, const FitConfig& config) {
    dataset.validate();
    const KernelParams init =
        config.init ? *config.init : heuristic_init(dataset, config);

    KernelParams scratch = init;
    const auto objective = [&dataset, &scratch](const std::vector<double>& v) {
        scratch.unpack(v);
        const double ll = log_marginal_likelihood(dataset, scratch);
        return -ll;  // minimize
    };

    Rng rng(config.seed);
    std::vector<double> best_point;
    double best_value = std::numeric_limits<double>::infinity();

    const std::vector<double> start = init.pack();
    for (int r = 0; r < std::max(1, config.restarts); ++r) {
        std::vector<double> p = start;
        if (r > 0) {
            for (double& v : p) v += 0.5 * normal(rng);
        }
        SimplexOptions options;
        options.max_iterations = config.max_iterations;
        options.tolerance = config.tolerance;
        const SimplexResult res = nelder_mead(objective, p, options);
        if (res.best_value < best_value) {
            best_value = res.best_value;
            best_point = res.best_point;
        }
    }
    if (!std::isfinite(best_value)) {
        throw NumericalError("gpr fit: every restart failed to factorize");
    }

    GprModel model;
    model.dataset = dataset;
    model.params = init;
    model.params.unpack(best_point);
    model.log_likelihood =
        log_marginal_likelihood(dataset, model.params, &model.beta);
    model.refresh_cache();
    return model;
}

// ---------------------------------------------------------------------------
// Confidence intervals (two-sided standard-normal quantiles).

struct ConfidenceBound {
    double level = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct RulPrediction {
    double time_seconds = 0.0;
    double mean_seconds = 0.0;
    double sigma_seconds = 0.0;
    std::vector<ConfidenceBound> bounds;
};

inline double z_quantile(double level) {
    if (std::abs(level - 0.80) < 1e-9) return 1.2816;
    if (std::abs(level - 0.90) < 1e-9) return 1.6449;
    if (std::abs(level - 0.95) < 1e-9) return 1.9600;
    throw UserError("unsupported confidence level " + std::to_string(level));
}

inline std::pair<double, double> confidence_interval(double mu, double sigma,
                                                     double level) {
    if (sigma < 0.0) throw UserError("confidence interval: negative sigma");
    const double z = z_quantile(level);
    return {mu - z * sigma, mu + z * sigma};
}

inline RulPrediction predict_rul(const GprModel& model, double t_seconds,
                                 const std::vector<double>& levels) {
    RulPrediction out;
    out.time_seconds = t_seconds;
    const auto [mean, sigma] = model.predict_seconds(t_seconds);
    out.mean_seconds = mean;
    out.sigma_seconds = sigma;
    for (const double level : levels) {
        const auto [lo, hi] = confidence_interval(mean, sigma, level);
        out.bounds.push_back({level, lo, hi});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Failure-time extrapolation: first posterior-mean zero crossing located by a
// cadence-step grid scan, then bisection to 0.1 s.

struct FailureForecast {
    bool crossed = false;
    double failure_time = 0.0;   // valid when crossed
    double rul_at_tc = 0.0;      // posterior mean at the truncation time
    double mean_at_horizon = 0.0;  // valid when not crossed
};

inline FailureForecast predict_failure_time(const GprModel& model, double t_c,
                                            double horizon, double step = 10.0) {
    FailureForecast forecast;
    forecast.rul_at_tc = model.predict_seconds(t_c).first;
    if (forecast.rul_at_tc <= 0.0) {
        forecast.crossed = true;
        forecast.failure_time = t_c;
        return forecast;
    }

    double lo = t_c;
    double hi = t_c;
    bool found = false;
    for (double t = t_c + step; t <= t_c + horizon + 1e-9; t += step) {
        const double mean = model.predict_seconds(t).first;
        if (mean <= 0.0) {
            hi = t;
            found = true;
            break;
        }
        lo = t;
    }
    if (!found) {
        forecast.mean_at_horizon = model.predict_seconds(t_c + horizon).first;
        return forecast;
    }

    while (hi - lo > 0.1) {
        const double mid = 0.5 * (lo + hi);
        if (model.predict_seconds(mid).first <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    forecast.crossed = true;
    forecast.failure_time = hi;
    return forecast;
}

// ---------------------------------------------------------------------------
// Text dump: one key=value line per hyperparameter plus beta, followed by the
// support data needed to rebuild the posterior.

namespace detail {

inline std::string join_doubles(const std::vector<double>& values) {
    std::ostringstream out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ',';
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", values[i]);
        out << buf;
    }
    return out.str();
}

inline std::vector<double> split_doubles(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        if (!token.empty()) out.push_back(std::stod(token));
    }
    return out;
}

}  // namespace detail

inline std::string gpr_to_text(const GprModel& model) {
    std::ostringstream out;
    auto put = [&out](const std::string& key, double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << key << '=' << buf << '\n';
    };
    out << "kind=" << (model.params.kind == KernelKind::kLocalField ? "local_field"
                                                                    : "universal_se")
        << '\n';
    put("log_sigma0", model.params.log_sigma0);
    put("log_sigmaf", model.params.log_sigmaf);
    put("log_sigmae", model.params.log_sigmae);
    if (model.params.kind == KernelKind::kLocalField) {
        out << "support_x=" << detail::join_doubles(model.params.support_x) << '\n';
        out << "log_lengths=" << detail::join_doubles(model.params.log_lengths) << '\n';
        put("log_len2", model.params.log_len2);
        put("log_scale2", model.params.log_scale2);
    } else {
        put("log_length", model.params.log_length);
    }
    out << "beta=" << detail::join_doubles(model.beta) << '\n';
    put("log_likelihood", model.log_likelihood);
    put("time_offset", model.dataset.time_offset);
    put("time_scale", model.dataset.time_scale);
    put("rul_scale", model.dataset.rul_scale);
    out << "x=" << detail::join_doubles(model.dataset.x) << '\n';
    out << "y=" << detail::join_doubles(model.dataset.y) << '\n';
    return out.str();
}

inline GprModel gpr_from_text(const std::string& text) {
    GprModel model;
    std::istringstream in(text);
    std::string line;
    bool have_kind = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("gpr dump: malformed line: " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            if (key == "kind") {
                if (value == "local_field") {
                    model.params.kind = KernelKind::kLocalField;
                } else if (value == "universal_se") {
                    model.params.kind = KernelKind::kUniversalSe;
                } else {
                    throw FormatError("gpr dump: unknown kind " + value);
                }
                have_kind = true;
            } else if (key == "log_sigma0") {
                model.params.log_sigma0 = std::stod(value);
            } else if (key == "log_sigmaf") {
                model.params.log_sigmaf = std::stod(value);
            } else if (key == "log_sigmae") {
                model.params.log_sigmae = std::stod(value);
            } else if (key == "support_x") {
                model.params.support_x = detail::split_doubles(value);
            } else if (key == "log_lengths") {
                model.params.log_lengths = detail::split_doubles(value);
            } else if (key == "log_len2") {
                model.params.log_len2 = std::stod(value);
            } else if (key == "log_scale2") {
                model.params.log_scale2 = std::stod(value);
            } else if (key == "log_length") {
                model.params.log_length = std::stod(value);
            } else if (key == "beta") {
                model.beta = detail::split_doubles(value);
            } else if (key == "log_likelihood") {
                model.log_likelihood = std::stod(value);
            } else if (key == "time_offset") {
                model.dataset.time_offset = std::stod(value);
            } else if (key == "time_scale") {
                model.dataset.time_scale = std::stod(value);
            } else if (key == "rul_scale") {
                model.dataset.rul_scale = std::stod(value);
            } else if (key == "x") {
                model.dataset.x = detail::split_doubles(value);
            } else if (key == "y") {
                model.dataset.y = detail::split_doubles(value);
            } else {
                throw FormatError("gpr dump: unknown key " + key);
            }
        } catch (const std::invalid_argument&) {
            throw FormatError("gpr dump: bad number in line: " + line);
        }
    }
    if (!have_kind || model.beta.size() != 3 || model.dataset.x.empty() ||
        model.dataset.x.size() != model.dataset.y.size()) {
        throw FormatError("gpr dump: missing required fields");
    }
    model.refresh_cache();
    return model;
}

}  // namespace vispro
