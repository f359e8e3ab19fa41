#include "nsbiot/discretization.hpp"

#include <algorithm>

namespace nsbiot {

const char* field_name(Field f) {
    static const char* names[kNumFields] = {"sigma_p", "p_p",    "u_p", "T_f",    "u_f",
                                            "theta",   "lambda", "u_s", "gamma_p"};
    return names[static_cast<int>(f)];
}

Field BlockLayout::field_of(Index i) const {
    const auto it = std::upper_bound(offset.begin(), offset.end(), i);
    return static_cast<Field>(std::max<std::ptrdiff_t>(0, (it - offset.begin()) - 1));
}

Discretization make_discretization(Mesh fluid, Mesh poro) {
    Discretization d;
    d.fluid = std::make_shared<const Mesh>(std::move(fluid));
    d.poro = std::make_shared<const Mesh>(std::move(poro));
    if (d.poro->empty()) throw InvalidArgument("poroelastic mesh is empty");
    d.traces = std::make_shared<const InterfaceTraces>(build_interface_traces(*d.fluid, *d.poro));

    d.spaces[static_cast<int>(Field::sigma_p)] = build_space(d.poro, ElementKind::bdm1_mat);
    d.spaces[static_cast<int>(Field::p_p)] = build_space(d.poro, ElementKind::p0_scalar);
    d.spaces[static_cast<int>(Field::u_p)] = build_space(d.poro, ElementKind::bdm1_vec);
    d.spaces[static_cast<int>(Field::T_f)] = build_space(d.fluid, ElementKind::bdm1_mat);
    d.spaces[static_cast<int>(Field::u_f)] = build_space(d.fluid, ElementKind::p1_vec_cont);
    d.spaces[static_cast<int>(Field::theta)] = build_space(d.traces, ElementKind::p1dc_trace_vec);
    d.spaces[static_cast<int>(Field::lambda)] = build_space(d.traces, ElementKind::p1dc_trace_scalar);
    d.spaces[static_cast<int>(Field::u_s)] = build_space(d.poro, ElementKind::p0_vec);
    d.spaces[static_cast<int>(Field::gamma_p)] = build_space(d.poro, ElementKind::p1_cont_skew);

    d.layout.offset[0] = 0;
    for (int f = 0; f < kNumFields; ++f) d.layout.offset[f + 1] = d.layout.offset[f] + d.spaces[f].dim;
    return d;
}

Vec2 eval_vec_bdm1(const FESpace& s, const Eigen::Ref<const Vector>& c, Index t, const AffineMap& map,
                   const Vec2& ref, double* div) {
    Bdm1Eval b;
    eval_bdm1(map, s.cell_signs(t), ref, b);
    const Index* dofs = s.cell_dofs(t);
    Vec2 v = Vec2::Zero();
    double d = 0;
    for (int l = 0; l < 6; ++l) {
        v += c[dofs[l]] * b.v[l];
        d += c[dofs[l]] * b.div[l];
    }
    if (div) *div = d;
    return v;
}

Mat2 eval_mat_bdm1(const FESpace& s, const Eigen::Ref<const Vector>& c, Index t, const AffineMap& map,
                   const Vec2& ref, Vec2* div) {
    Bdm1Eval b;
    eval_bdm1(map, s.cell_signs(t), ref, b);
    const Index* dofs = s.cell_dofs(t);
    Mat2 m = Mat2::Zero();
    Vec2 d = Vec2::Zero();
    for (int r = 0; r < 2; ++r) {
        for (int l = 0; l < 6; ++l) {
            const double a = c[dofs[6 * r + l]];
            m.row(r) += a * b.v[l].transpose();
            d[r] += a * b.div[l];
        }
    }
    if (div) *div = d;
    return m;
}

Vec2 eval_vec_p1(const FESpace& s, const Eigen::Ref<const Vector>& c, Index t, const AffineMap& map,
                 const Vec2& ref, Mat2* grad) {
    P1Eval p;
    eval_p1(map, ref, p);
    const Index* dofs = s.cell_dofs(t);
    Vec2 v = Vec2::Zero();
    Mat2 g = Mat2::Zero();
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 2; ++k) {
            const double a = c[dofs[2 * i + k]];
            v[k] += a * p.v[i];
            g.row(k) += a * p.grad[i].transpose();
        }
    }
    if (grad) *grad = g;
    return v;
}

double eval_scalar_p1(const FESpace& s, const Eigen::Ref<const Vector>& c, Index t, const AffineMap& map,
                      const Vec2& ref, Vec2* grad) {
    P1Eval p;
    eval_p1(map, ref, p);
    const Index* dofs = s.cell_dofs(t);
    double v = 0;
    Vec2 g = Vec2::Zero();
    for (int i = 0; i < 3; ++i) {
        v += c[dofs[i]] * p.v[i];
        g += c[dofs[i]] * p.grad[i];
    }
    if (grad) *grad = g;
    return v;
}

double eval_trace_scalar(const Eigen::Ref<const Vector>& c, Index seg, double s) {
    return (1 - s) * c[2 * seg] + s * c[2 * seg + 1];
}

Vec2 eval_trace_vec(const Eigen::Ref<const Vector>& c, Index seg, double s) {
    return (1 - s) * Vec2(c[4 * seg], c[4 * seg + 1]) + s * Vec2(c[4 * seg + 2], c[4 * seg + 3]);
}

} // namespace nsbiot
