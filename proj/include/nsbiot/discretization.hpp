#pragma once

#include "nsbiot/elements.hpp"

#include <Eigen/Sparse>

#include <array>
#include <memory>

namespace nsbiot {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Unknowns in block order.
enum class Field : int { sigma_p, p_p, u_p, T_f, u_f, theta, lambda, u_s, gamma_p };
inline constexpr int kNumFields = 9;
inline constexpr std::array<Field, kNumFields> kAllFields = {
    Field::sigma_p, Field::p_p, Field::u_p,    Field::T_f,    Field::u_f,
    Field::theta,   Field::lambda, Field::u_s, Field::gamma_p};

const char* field_name(Field f);

struct BlockLayout {
    std::array<Index, kNumFields + 1> offset{};

    Index begin(Field f) const { return offset[static_cast<int>(f)]; }
    Index dim(Field f) const { return offset[static_cast<int>(f) + 1] - offset[static_cast<int>(f)]; }
    Index size() const { return offset[kNumFields]; }
    /// Field owning global index i.
    Field field_of(Index i) const;
};

struct Discretization {
    std::shared_ptr<const Mesh> fluid;
    std::shared_ptr<const Mesh> poro;
    std::shared_ptr<const InterfaceTraces> traces;
    std::array<FESpace, kNumFields> spaces;
    BlockLayout layout;

    const FESpace& space(Field f) const { return spaces[static_cast<int>(f)]; }
    bool has_fluid() const { return !fluid->empty(); }

    Eigen::Ref<const Vector> block(const Vector& x, Field f) const {
        return x.segment(layout.begin(f), layout.dim(f));
    }
    Eigen::Ref<Vector> block(Vector& x, Field f) const { return x.segment(layout.begin(f), layout.dim(f)); }
};

/// Build every space. The fluid mesh may be empty for a Biot-only problem,
/// in which case the poroelastic mesh must not carry interface edges.
Discretization make_discretization(Mesh fluid, Mesh poro);

// ---------------------------------------------------------------------------
// Pointwise evaluation of discrete fields on one element. `c` is the
// coefficient block of the field; `ref` is the reference point.
// ---------------------------------------------------------------------------

Vec2 eval_vec_bdm1(const FESpace& s, const Eigen::Ref<const Vector>& c, Index t, const AffineMap& map,
                   const Vec2& ref, double* div = nullptr);
Mat2 eval_mat_bdm1(const FESpace& s, const Eigen::Ref<const Vector>& c, Index t, const AffineMap& map,
                   const Vec2& ref, Vec2* div = nullptr);
Vec2 eval_vec_p1(const FESpace& s, const Eigen::Ref<const Vector>& c, Index t, const AffineMap& map,
                 const Vec2& ref, Mat2* grad = nullptr);
double eval_scalar_p1(const FESpace& s, const Eigen::Ref<const Vector>& c, Index t, const AffineMap& map,
                      const Vec2& ref, Vec2* grad = nullptr);
/// Trace fields on poroelastic trace segment `seg` at local parameter s in [0, 1].
double eval_trace_scalar(const Eigen::Ref<const Vector>& c, Index seg, double s);
Vec2 eval_trace_vec(const Eigen::Ref<const Vector>& c, Index seg, double s);

} // namespace nsbiot
