#include "numsmooth/advisor.hpp"

#include <cmath>
#include <stdexcept>

namespace numsmooth {

void RegularityProfile::validate() const {
    if (!(p > 0.0) || !(s > 0.0))
        throw std::invalid_argument("RegularityProfile: exponents must be positive");
    if (!(p * s > p + s))
        throw std::invalid_argument("RegularityProfile: requires p*s > p+s");
    if (kappa < 0) throw std::invalid_argument("RegularityProfile: kappa must be non-negative");
}

AsgqAdvice advise_asgq(const RegularityProfile& profile, double tol) {
    profile.validate();
    if (!(tol > 0.0 && tol < 1.0))
        throw std::invalid_argument("advise_asgq: tol must be in (0, 1)");

    const double p = profile.p;
    const double s = profile.s;
    const double sum = p * s + p + s;
    const double diff = p * s - p - s;

    AsgqAdvice a;
    a.dt_exponent = sum / diff;
    a.dt = std::pow(tol, a.dt_exponent);
    a.nasgq_exponent = (p + s - p * s) / (p * sum);
    a.nasgq_scale = std::pow(a.dt, a.nasgq_exponent);
    a.nq_exponent = (p + s - p * s) / (s * sum);
    a.nq_scale = std::pow(a.dt, a.nq_exponent);
    a.work_exponent = -1.0 - 2.0 * (p + s) / diff - 1.0 / p - 1.0 / s;
    a.predicted_work = std::pow(tol, a.work_exponent);
    return a;
}

} // namespace numsmooth
