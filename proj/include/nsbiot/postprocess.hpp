#pragma once

#include "nsbiot/system.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nsbiot {

/// Pointwise p_f = -(tr T_f + rho |u_f|^2) / 2.
double recover_pf(const Mat2& T, const Vec2& u, double rho);
/// Pointwise sigma_f = T_f + rho u_f (x) u_f.
Mat2 recover_sigma_f(const Mat2& T, const Vec2& u, double rho);

/// Discontinuous P1 field stored by element vertex, components interleaved:
/// values[(3 t + i) * components + c].
struct DgField {
    int components = 1;
    std::vector<double> values;

    double at(Index t, int i, int c = 0) const { return values[(3 * t + i) * components + c]; }
    Index num_triangles() const { return static_cast<Index>(values.size()) / (3 * components); }
};

DgField recover_pf(const FESpace& T_space, const Eigen::Ref<const Vector>& T, const FESpace& u_space,
                   const Eigen::Ref<const Vector>& u, double rho);
DgField recover_pf(const Discretization& disc, const Vector& x, double rho);
/// Components xx, xy, yx, yy.
DgField recover_sigma_f(const FESpace& T_space, const Eigen::Ref<const Vector>& T, const FESpace& u_space,
                        const Eigen::Ref<const Vector>& u, double rho);
DgField recover_sigma_f(const Discretization& disc, const Vector& x, double rho);

/// eta^m = eta^{m-1} + dt u_s^m over a history of u_s blocks. Returns
/// eta^1 .. eta^N.
std::vector<Vector> accumulate_displacement(const Vector& eta0, const std::vector<Vector>& u_s_history, double dt);

enum class Attachment { point, cell };

struct FieldExport {
    std::string name;
    Attachment attachment = Attachment::cell;
    int components = 1; // 1, 2 or 4 (row-major 2x2 tensor)
    std::vector<double> values;
};

/// Legacy ASCII VTK (version 3.0) unstructured grid of one mesh. Each field
/// becomes a SCALARS array with its own component count.
void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const std::vector<FieldExport>& fields,
               const std::string& title = "nsbiot");

struct ExportOptions {
    std::vector<std::string> fields; // empty: every available field
    double pressure_offset = 0;      // added to pressures; stresses shift by -offset (alpha for sigma_p) I
};

/// Fluid: u_f (point), p_f, T_f, sigma_f (cell, centroid values).
std::vector<FieldExport> fluid_export_fields(const Discretization& disc, const SystemState& s,
                                             const PhysicalParams& params, const ExportOptions& opts = {});
/// Poroelastic: gamma_p (point), p_p, u_p, u_s, eta, sigma_p (cell).
std::vector<FieldExport> poro_export_fields(const Discretization& disc, const SystemState& s,
                                            const PhysicalParams& params, const ExportOptions& opts = {});

/// Writes <dir>/<stem>_fluid_NNNN.vtk (if there is a fluid) and
/// <dir>/<stem>_poro_NNNN.vtk with NNNN = s.step. Returns the paths written.
std::vector<std::filesystem::path> export_vtk(const Discretization& disc, const SystemState& s,
                                              const PhysicalParams& params, const std::filesystem::path& dir,
                                              const std::string& stem, const ExportOptions& opts = {});

/// Interface quantities at the midpoint of each merged segment. The tangent
/// is counterclockwise with respect to the fluid.
struct InterfaceSample {
    double s = 0;
    double u_f_n = 0;        // u_f . n_f
    double solid_flux_n = 0; // (u_p + u_s) . n_p
    double sigma_f_nt = 0;   // (sigma_f n_f) . t
    double sigma_p_nt = 0;   // (sigma_p n_p) . t
    double eta_n = 0;        // eta . n_p
};

std::vector<InterfaceSample> interface_samples(const Discretization& disc, const SystemState& s,
                                               const PhysicalParams& params);
void write_interface_csv_header(std::ostream& out);
void write_interface_csv(std::ostream& out, double t, const std::vector<InterfaceSample>& samples);

} // namespace nsbiot
