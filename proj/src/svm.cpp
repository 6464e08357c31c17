#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "hyperdet/error.hpp"
#include "hyperdet/model.hpp"

namespace hyperdet {

namespace {

constexpr double kKktTolerance = 1e-3;
constexpr double kTau = 1e-12;  // curvature floor for degenerate pairs

// RBF kernel row against every training point. exp(-t) for t >= 45 is below
// 1.1e-20 and cannot move the optimizer at C = O(10); skipping the exp there
// makes the row cost linear in the few near neighbours.
class KernelRows {
public:
    KernelRows(const std::vector<double>& z, std::size_t rows, std::size_t cols, double sigma)
        : z_(z), rows_(rows), cols_(cols), sigma_(sigma) {}

    void fill(std::size_t i, std::vector<double>& row) const {
        const double* zi = z_.data() + i * cols_;
        for (std::size_t j = 0; j < rows_; ++j) {
            const double* zj = z_.data() + j * cols_;
            double d2 = 0.0;
            for (std::size_t c = 0; c < cols_; ++c) {
                const double d = zi[c] - zj[c];
                d2 += d * d;
            }
            const double t = sigma_ * d2;
            row[j] = t < 45.0 ? std::exp(-t) : 0.0;
        }
    }

private:
    const std::vector<double>& z_;
    std::size_t rows_, cols_;
    double sigma_;
};

// Platt scaling per Lin, Weng & Keerthi: Newton fit of P(y=1|f) = 1/(1+exp(a f + b))
// on the training decision values, with the usual smoothed targets.
std::pair<double, double> fit_platt(const std::vector<double>& decision,
                                    std::span<const int> labels) {
    const std::size_t n = decision.size();
    double prior1 = 0.0;
    for (const int y : labels) prior1 += y;
    const double prior0 = static_cast<double>(n) - prior1;

    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);
    std::vector<double> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = labels[i] ? hi : lo;

    double a = 0.0;
    double b = std::log((prior0 + 1.0) / (prior1 + 1.0));

    const auto objective = [&](double pa, double pb) {
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double apb = pa * decision[i] + pb;
            if (apb >= 0.0) {
                err += target[i] * apb + std::log1p(std::exp(-apb));
            } else {
                err += (target[i] - 1.0) * apb + std::log1p(std::exp(apb));
            }
        }
        return err;
    };

    constexpr double kSigma = 1e-12;  // Hessian ridge
    constexpr double kMinStep = 1e-10;
    double fval = objective(a, b);
    for (int iter = 0; iter < 100; ++iter) {
        double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double apb = a * decision[i] + b;
            double p, q;
            if (apb >= 0.0) {
                p = std::exp(-apb) / (1.0 + std::exp(-apb));
                q = 1.0 / (1.0 + std::exp(-apb));
            } else {
                p = 1.0 / (1.0 + std::exp(apb));
                q = std::exp(apb) / (1.0 + std::exp(apb));
            }
            const double d2 = p * q;
            h11 += decision[i] * decision[i] * d2;
            h22 += d2;
            h21 += decision[i] * d2;
            const double d1 = target[i] - p;
            g1 += decision[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;

        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;

        double step = 1.0;
        while (step >= kMinStep) {
            const double na = a + step * da;
            const double nb = b + step * db;
            const double nf = objective(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < kMinStep) break;
    }
    return {a, b};
}

}  // namespace

std::unique_ptr<TrainedModel> train_svm(const RbfSvmSpec& spec, const TrainingData& data,
                                        std::uint64_t seed) {
    spec.validate();
    const MatrixView x = data.matrix();
    const std::size_t n = x.rows;
    const Standardizer standardizer = Standardizer::fit(x);

    std::vector<double> z(data.values);
    for (std::size_t r = 0; r < n; ++r) {
        standardizer.transform(std::span(z).subspan(r * x.cols, x.cols));
    }
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = data.labels[i] ? 1.0 : -1.0;

    const KernelRows kernel(z, n, x.cols, spec.sigma);
    std::vector<double> row_i(n), row_j(n);

    // SMO over the dual: minimize (1/2) a^T Q a - e^T a with Q_ij = y_i y_j K_ij,
    // subject to 0 <= a <= C and y^T a = 0. grad[i] tracks (Q a - e)_i. Each step
    // picks the maximal violating pair and solves the two-variable subproblem.
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    const double c = spec.c;

    const long max_iterations = std::max<long>(200000, 100 * static_cast<long>(n));
    double violation = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (long iter = 0; iter < max_iterations; ++iter) {
        constexpr double kInf = std::numeric_limits<double>::infinity();
        double up = -kInf, low = kInf;
        std::size_t i = n, j = n;
        for (std::size_t k = 0; k < n; ++k) {
            const double score = -y[k] * grad[k];
            const bool in_up = (y[k] > 0.0 && alpha[k] < c) || (y[k] < 0.0 && alpha[k] > 0.0);
            const bool in_low = (y[k] > 0.0 && alpha[k] > 0.0) || (y[k] < 0.0 && alpha[k] < c);
            if (in_up && score > up) {
                up = score;
                i = k;
            }
            if (in_low && score < low) {
                low = score;
                j = k;
            }
        }
        violation = up - low;
        if (violation <= kKktTolerance || i >= n || j >= n) {
            converged = true;
            break;
        }

        kernel.fill(i, row_i);
        kernel.fill(j, row_j);

        // Move along alpha_i += y_i t, alpha_j -= y_j t, which keeps y^T a fixed.
        double quad = row_i[i] + row_j[j] - 2.0 * row_i[j];
        if (quad <= 0.0) quad = kTau;
        const double slope = y[i] * grad[i] - y[j] * grad[j];  // equals low - up < 0
        double t = -slope / quad;

        const double t_max_i = y[i] > 0.0 ? c - alpha[i] : alpha[i];
        const double t_max_j = y[j] > 0.0 ? alpha[j] : c - alpha[j];
        t = std::min(t, std::min(t_max_i, t_max_j));

        // Land exactly on a binding box face so bound-membership tests stay exact.
        alpha[i] = t == t_max_i ? (y[i] > 0.0 ? c : 0.0)
                                : std::clamp(alpha[i] + y[i] * t, 0.0, c);
        alpha[j] = t == t_max_j ? (y[j] > 0.0 ? 0.0 : c)
                                : std::clamp(alpha[j] - y[j] * t, 0.0, c);
        for (std::size_t k = 0; k < n; ++k) {
            grad[k] += y[k] * t * (row_i[k] - row_j[k]);
        }
    }
    if (!converged) {
        throw TrainError("SVM did not reach KKT tolerance " + std::to_string(kKktTolerance) +
                             " (best violation " + std::to_string(violation) + ")",
                         violation, max_iterations);
    }

    // KKT: free vectors pin rho exactly; otherwise it sits between the bound
    // constraints' implied limits.
    double rho_sum = 0.0, rho_ub = std::numeric_limits<double>::infinity(), rho_lb = -rho_ub;
    std::size_t free_count = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = y[k] * grad[k];
        if (alpha[k] > 0.0 && alpha[k] < c) {
            rho_sum += r;
            ++free_count;
        } else if ((y[k] > 0.0 && alpha[k] == 0.0) || (y[k] < 0.0 && alpha[k] == c)) {
            rho_ub = std::min(rho_ub, r);
        } else {
            rho_lb = std::max(rho_lb, r);
        }
    }
    const double rho = free_count > 0 ? rho_sum / static_cast<double>(free_count)
                                      : (rho_ub + rho_lb) / 2.0;

    // Training decision values for Platt scaling, recovered from the gradient:
    // sum_j a_j y_j K_kj = y_k (grad[k] + 1).
    std::vector<double> decision(n);
    for (std::size_t k = 0; k < n; ++k) decision[k] = y[k] * (grad[k] + 1.0) - rho;
    const auto [platt_a, platt_b] = fit_platt(decision, data.labels);

    std::vector<double> support_vectors;
    std::vector<double> dual_coef;
    for (std::size_t k = 0; k < n; ++k) {
        if (alpha[k] > 0.0) {
            support_vectors.insert(support_vectors.end(), z.begin() + static_cast<long>(k * x.cols),
                                   z.begin() + static_cast<long>((k + 1) * x.cols));
            dual_coef.push_back(alpha[k] * y[k]);
        }
    }

    return std::make_unique<SvmModel>(
        spec, standardizer, std::move(support_vectors), std::move(dual_coef), rho, platt_a,
        platt_b, std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end()), seed);
}

}  // namespace hyperdet
