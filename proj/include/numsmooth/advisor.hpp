#pragma once

namespace numsmooth {

// Regularity exponents of the smoothed integrand: p for the mixed regularity
// seen by the sparse-grid quadrature, s for the regularity along the
// pre-integration coordinate, kappa for the payoff regularity index.
struct RegularityProfile {
    double p = 0.0;
    double s = 0.0;
    int kappa = 0;

    void validate() const; // requires p > 0, s > 0 and p*s > p + s
};

// Closed-form parameter scalings from the Lagrange-multiplier treatment of
// the work optimization: given a target tolerance, the step size, the number
// of quadrature points of the sparse-grid estimator, and the pre-integration
// node count scale as powers of the tolerance, and the predicted work follows.
struct AsgqAdvice {
    double dt_exponent = 0.0;      // dt = tol^{(ps+p+s)/(ps-p-s)}
    double dt = 0.0;
    double nasgq_exponent = 0.0;   // N_asgq ~ dt^{(p+s-ps)/(p(ps+p+s))}
    double nasgq_scale = 0.0;
    double nq_exponent = 0.0;      // N_q ~ dt^{(p+s-ps)/(s(ps+p+s))}
    double nq_scale = 0.0;
    double work_exponent = 0.0;    // -1 - 2(p+s)/(ps-p-s) - 1/p - 1/s
    double predicted_work = 0.0;   // tol^{work_exponent}
};

AsgqAdvice advise_asgq(const RegularityProfile& profile, double tol);

} // namespace numsmooth
