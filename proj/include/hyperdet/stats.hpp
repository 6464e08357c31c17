#pragma once

#include <cmath>
#include <span>

namespace hyperdet {

inline double sigmoid(double z) {
    if (z >= 0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(p / (1-p)) with the result clamped to [-bound, bound] so pure
// probabilities (0 or 1) stay finite.
inline double clamped_logit(double p, double bound = 16.0) {
    if (p <= 0.0) return -bound;
    if (p >= 1.0) return bound;
    const double z = std::log(p / (1.0 - p));
    if (z < -bound) return -bound;
    if (z > bound) return bound;
    return z;
}

double mean(std::span<const double> xs);
// Sample variance, n-1 denominator. Returns 0 for fewer than 2 values.
double sample_variance(std::span<const double> xs);

// Regularized incomplete beta function I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// Two-sided p-value of Student's t with `dof` degrees of freedom.
double student_t_two_sided_p(double t, int dof);

}  // namespace hyperdet
