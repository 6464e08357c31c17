#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "hyperdet/error.hpp"
#include "hyperdet/model.hpp"
#include "hyperdet/stats.hpp"

namespace hyperdet {

namespace {

// In-place Cholesky solve of the symmetric positive-definite system a * x = b,
// where `a` is n x n row-major. Returns false when a pivot is not positive.
bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
            if (i == j) {
                if (sum <= 0.0) return false;
                a[i * n + i] = std::sqrt(sum);
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {  // forward L y = b
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k) sum -= a[i * n + k] * b[k];
        b[i] = sum / a[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {  // backward L^T x = y
        double sum = b[i];
        for (std::size_t k = i + 1; k < n; ++k) sum -= a[k * n + i] * b[k];
        b[i] = sum / a[i * n + i];
    }
    return true;
}

// Mean log-loss plus lambda * ||w||^2 (intercept excluded), on pre-standardized
// rows. The margin trick log(1+e^z) = max(z,0) + log1p(e^-|z|) keeps it stable.
struct Objective {
    const std::vector<double>& z;  // standardized matrix, row-major
    std::span<const int> y;
    std::size_t rows, cols;
    double lambda;

    double loss(std::span<const double> theta) const {  // theta = [w..., b]
        double total = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            double m = theta[cols];
            for (std::size_t c = 0; c < cols; ++c) m += theta[c] * z[r * cols + c];
            const double signed_m = y[r] ? m : -m;
            total += std::max(-signed_m, 0.0) + std::log1p(std::exp(-std::abs(signed_m)));
        }
        double penalty = 0.0;
        for (std::size_t c = 0; c < cols; ++c) penalty += theta[c] * theta[c];
        return total / static_cast<double>(rows) + lambda * penalty;
    }

    void gradient(std::span<const double> theta, std::span<double> g) const {
        std::fill(g.begin(), g.end(), 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            double m = theta[cols];
            for (std::size_t c = 0; c < cols; ++c) m += theta[c] * z[r * cols + c];
            const double resid = sigmoid(m) - y[r];
            for (std::size_t c = 0; c < cols; ++c) g[c] += resid * z[r * cols + c];
            g[cols] += resid;
        }
        const double inv_n = 1.0 / static_cast<double>(rows);
        for (std::size_t c = 0; c <= cols; ++c) g[c] *= inv_n;
        for (std::size_t c = 0; c < cols; ++c) g[c] += 2.0 * lambda * theta[c];
    }

    void hessian(std::span<const double> theta, std::vector<double>& h) const {
        const std::size_t dim = cols + 1;
        h.assign(dim * dim, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            double m = theta[cols];
            for (std::size_t c = 0; c < cols; ++c) m += theta[c] * z[r * cols + c];
            const double p = sigmoid(m);
            const double s = p * (1.0 - p);
            for (std::size_t i = 0; i < cols; ++i) {
                const double zi = s * z[r * cols + i];
                for (std::size_t j = 0; j <= i; ++j) h[i * dim + j] += zi * z[r * cols + j];
                h[cols * dim + i] += zi;
            }
            h[cols * dim + cols] += s;
        }
        const double inv_n = 1.0 / static_cast<double>(rows);
        for (double& v : h) v *= inv_n;
        for (std::size_t i = 0; i < cols; ++i) h[i * dim + i] += 2.0 * lambda;
        for (std::size_t i = 0; i < dim; ++i) {  // mirror the lower triangle
            for (std::size_t j = i + 1; j < dim; ++j) h[i * dim + j] = h[j * dim + i];
        }
    }
};

}  // namespace

std::unique_ptr<TrainedModel> train_logistic(const LogisticRegressionSpec& spec,
                                             const TrainingData& data, std::uint64_t seed) {
    spec.validate();
    const MatrixView x = data.matrix();
    const Standardizer standardizer = Standardizer::fit(x);

    std::vector<double> z(data.values);
    for (std::size_t r = 0; r < x.rows; ++r) {
        standardizer.transform(std::span(z).subspan(r * x.cols, x.cols));
    }

    const Objective obj{z, data.labels, x.rows, x.cols, spec.lambda};
    const std::size_t dim = x.cols + 1;
    std::vector<double> theta(dim, 0.0), grad(dim), step(dim), trial(dim), hess;

    constexpr double kTolerance = 1e-6;
    constexpr int kMaxIterations = 200;
    double grad_norm = 0.0;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        obj.gradient(theta, grad);
        grad_norm = 0.0;
        for (const double g : grad) grad_norm = std::max(grad_norm, std::abs(g));
        if (grad_norm <= kTolerance) {
            std::vector<double> weights(theta.begin(), theta.begin() + static_cast<long>(x.cols));
            return std::make_unique<LogisticModel>(
                spec, standardizer, std::move(weights), theta[x.cols],
                std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end()), seed);
        }

        obj.hessian(theta, hess);
        step = grad;
        if (!cholesky_solve(hess, step, dim)) {
            // Should not happen with lambda > 0; fall back to gradient descent.
            step = grad;
        }
        // Damped Newton: halve until the loss decreases.
        const double current = obj.loss(theta);
        double scale = 1.0;
        for (int halving = 0; halving < 60; ++halving) {
            for (std::size_t i = 0; i < dim; ++i) trial[i] = theta[i] - scale * step[i];
            if (obj.loss(trial) < current) break;
            scale *= 0.5;
        }
        for (std::size_t i = 0; i < dim; ++i) theta[i] -= scale * step[i];
    }
    throw TrainError("logistic regression did not reach gradient tolerance " +
                         std::to_string(kTolerance) + " (best infinity-norm " +
                         std::to_string(grad_norm) + ")",
                     grad_norm, kMaxIterations);
}

}  // namespace hyperdet
