#pragma once

#include "nsbiot/common.hpp"

namespace nsbiot {

/// Isotropic compliance of the poroelastic skeleton, extended to skew tensors
/// by a constant multiple c of the identity.
class ComplianceOp {
public:
    ComplianceOp(double lambda_p, double mu_p, double c_skew);
    ComplianceOp(double lambda_p, double mu_p) : ComplianceOp(lambda_p, mu_p, 1.0 / (2.0 * mu_p)) {}

    Mat2 apply(const Mat2& tau) const;
    /// 2 mu_p sym + lambda_p tr I on the symmetric part, skew / c.
    Mat2 apply_inverse(const Mat2& tau) const;

    double a_min() const { return 1.0 / (2.0 * mu_p_ + 2.0 * lambda_p_); }
    double a_max() const { return 1.0 / (2.0 * mu_p_); }
    double c_skew() const { return c_; }

private:
    double lambda_p_, mu_p_, c_;
};

Mat2 apply_compliance(const Mat2& tau, double lambda_p, double mu_p);
Mat2 deviatoric(const Mat2& tau);

inline Mat2 sym(const Mat2& t) { return 0.5 * (t + t.transpose()); }
inline Mat2 skew(const Mat2& t) { return 0.5 * (t - t.transpose()); }
inline double ddot(const Mat2& a, const Mat2& b) { return a.cwiseProduct(b).sum(); }

} // namespace nsbiot
