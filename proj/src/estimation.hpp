// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

namespace jcam {

// MMSE channel-estimation quality: gamma = tau*rho*beta^2 / (tau*rho*beta + 1).
// Per-antenna variance of the channel estimate under orthogonal pilots of
// length tau sent at normalized power rho.  gamma -> beta as tau*rho*beta
// grows; gamma = 0 iff beta = 0.
inline double mmse_quality(double beta, double tau, double rho) {
    if (!(beta >= 0.0) || !(tau >= 0.0) || !(rho >= 0.0))
        throw std::domain_error("mmse_quality: beta, tau, rho must be nonnegative");
    if (beta == 0.0) return 0.0;
    const double snr = tau * rho * beta;
    return snr * beta / (snr + 1.0);
}

}  // namespace jcam
