// SPDX-License-Identifier: Apache-2.0
#include "stsad/param_map.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stsad/errors.hpp"

namespace stsad {

double theta_to_variance(double theta, double floor) {
    // Cap the exponent; the optimizer recovers from the flat region.
    return floor + std::exp(std::min(theta, 500.0));
}

double variance_to_theta(double variance, double floor) {
    const double excess = variance - floor;
    if (!(excess > 0.0)) {
        throw DataError("variance " + std::to_string(variance) + " not above floor " +
                        std::to_string(floor));
    }
    return std::log(excess);
}

std::vector<double> pacf_to_ar(std::span<const double> z) {
    const std::size_t p = z.size();
    std::vector<double> phi(p, 0.0);
    std::vector<double> prev(p, 0.0);
    for (std::size_t k = 0; k < p; ++k) {
        const double r = std::tanh(z[k]);
        prev = phi;
        phi[k] = r;
        for (std::size_t j = 0; j < k; ++j) {
            phi[j] = prev[j] - r * prev[k - 1 - j];
        }
    }
    return phi;
}

std::vector<double> ar_to_pacf(std::span<const double> phi) {
    const std::size_t p = phi.size();
    std::vector<double> z(p, 0.0);
    std::vector<double> a(phi.begin(), phi.end());
    for (std::size_t k = p; k-- > 0;) {
        const double r = a[k];
        if (!(std::abs(r) < 1.0)) {
            throw DataError("AR coefficients outside the stationarity region");
        }
        z[k] = std::atanh(r);
        std::vector<double> prev(k, 0.0);
        const double denom = 1.0 - r * r;
        for (std::size_t j = 0; j < k; ++j) {
            prev[j] = (a[j] + r * a[k - 1 - j]) / denom;
        }
        a = std::move(prev);
    }
    return z;
}

std::vector<double> ar_stationary_autocov(std::span<const double> phi, double innovation_var) {
    if (phi.size() == 1) {
        const double f = phi[0];
        const double g0 = innovation_var / (1.0 - f * f);
        return {g0};
    }
    if (phi.size() == 2) {
        const double f1 = phi[0];
        const double f2 = phi[1];
        const double denom = (1.0 + f2) * ((1.0 - f2) * (1.0 - f2) - f1 * f1);
        const double g0 = innovation_var * (1.0 - f2) / denom;
        const double g1 = f1 * g0 / (1.0 - f2);
        return {g0, g1};
    }
    throw DataError("stationary autocovariance implemented for p <= 2");
}

}  // namespace stsad
