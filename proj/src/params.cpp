#include "nsbiot/params.hpp"

#include "nsbiot/compliance.hpp"

#include <cmath>
#include <sstream>

namespace nsbiot {

double PhysicalParams::bjs_coefficient(const Vec2& t) const {
    const double kj = (K * t).dot(t);
    return mu * alpha_bjs / std::sqrt(kj);
}

std::vector<std::string> PhysicalParams::violations() const {
    std::vector<std::string> out;
    auto positive = [&](const char* key, double v) {
        if (!(v > 0) || !std::isfinite(v)) {
            std::ostringstream ss;
            ss << key << ": must be > 0 (got " << v << ")";
            out.push_back(ss.str());
        }
    };
    positive("params.mu", mu);
    if (!(rho >= 0) || !std::isfinite(rho)) out.push_back("params.rho: must be >= 0");
    positive("params.lambda_p", lambda_p);
    positive("params.mu_p", mu_p);
    positive("params.s0", s0);
    if (!K.allFinite() || std::abs(K(0, 1) - K(1, 0)) > 1e-12 * K.norm()) {
        out.push_back("params.K: must be symmetric");
    } else {
        Eigen::SelfAdjointEigenSolver<Mat2> eig(K);
        if (!(eig.eigenvalues().minCoeff() > 0)) out.push_back("params.K: must be positive definite");
    }
    if (!(alpha_p > 0 && alpha_p <= 1)) out.push_back("params.alpha_p: must lie in (0, 1]");
    if (!(alpha_bjs >= 0) || !std::isfinite(alpha_bjs)) out.push_back("params.alpha_bjs: must be >= 0");
    positive("params.kappa1", k1());
    if (!(k2() > 0 && k2() < 4 * mu)) {
        std::ostringstream ss;
        ss << "params.kappa2: must lie in (0, 4 mu) = (0, " << 4 * mu << "), got " << k2();
        out.push_back(ss.str());
    }
    positive("params.skew_c", c_skew());
    if (dyn.rho_p < 0) out.push_back("params.dyn.rho_p: must be >= 0");
    return out;
}

void PhysicalParams::validate() const {
    const auto v = violations();
    if (!v.empty()) {
        const auto colon = v.front().find(':');
        throw ConfigError(v.front().substr(0, colon), v.front().substr(colon + 2));
    }
}

// ---------------------------------------------------------------------------

ComplianceOp::ComplianceOp(double lambda_p, double mu_p, double c_skew)
    : lambda_p_(lambda_p), mu_p_(mu_p), c_(c_skew) {
    if (!(mu_p > 0) || !(lambda_p > 0) || !(c_skew > 0)) throw InvalidArgument("compliance needs positive moduli");
}

Mat2 ComplianceOp::apply(const Mat2& tau) const {
    const Mat2 s = sym(tau);
    return (s - lambda_p_ / (2.0 * mu_p_ + 2.0 * lambda_p_) * s.trace() * Mat2::Identity()) / (2.0 * mu_p_) +
           c_ * skew(tau);
}

Mat2 ComplianceOp::apply_inverse(const Mat2& tau) const {
    const Mat2 s = sym(tau);
    return 2.0 * mu_p_ * s + lambda_p_ * s.trace() * Mat2::Identity() + skew(tau) / c_;
}

Mat2 apply_compliance(const Mat2& tau, double lambda_p, double mu_p) {
    return ComplianceOp(lambda_p, mu_p).apply(tau);
}

Mat2 deviatoric(const Mat2& tau) { return tau - 0.5 * tau.trace() * Mat2::Identity(); }

} // namespace nsbiot
