#pragma once

#include "nsbiot/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nsbiot {

struct DynamicOptions {
    bool fluid_inertia = false; // rho d_t u_f
    double rho_p = 0.0;         // rho_p d_tt eta_p, 0 disables
    double beta = 0.0;          // -beta eta_p, 0 disables

    bool structure_active() const { return rho_p != 0.0 || beta != 0.0; }
};

struct PhysicalParams {
    double mu = 1.0;
    double rho = 1.0;
    double lambda_p = 1.0;
    double mu_p = 1.0;
    double s0 = 1.0;
    Mat2 K = Mat2::Identity();
    double alpha_p = 1.0;
    double alpha_bjs = 1.0;
    std::optional<double> kappa1; // default 1 / (2 mu)
    std::optional<double> kappa2; // default 2 mu
    std::optional<double> skew_c; // default 1 / (2 mu_p)
    DynamicOptions dyn;

    double k1() const { return kappa1.value_or(1.0 / (2.0 * mu)); }
    double k2() const { return kappa2.value_or(2.0 * mu); }
    double c_skew() const { return skew_c.value_or(1.0 / (2.0 * mu_p)); }

    /// Slip coefficient mu alpha_BJS / sqrt((K t).t) for unit tangent t.
    double bjs_coefficient(const Vec2& t) const;

    /// Empty when valid; otherwise one message per violation, each starting
    /// with the dotted config key.
    std::vector<std::string> violations() const;
    /// Throws ConfigError on the first violation.
    void validate() const;
};

} // namespace nsbiot
