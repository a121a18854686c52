#pragma once

#include "swfe/model.hpp"
#include "swfe/spaces.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace swfe {

/// Diagnostics CSV: header `step,time,energy,div_inf,eta_drift,u_drift`,
/// one row per recorded step.
inline std::string diagnostics_csv(const std::vector<DiagnosticsRow>& rows) {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "step,time,energy,div_inf,eta_drift,u_drift\n";
    for (const DiagnosticsRow& r : rows)
        out << r.step << "," << r.time << "," << r.energy << "," << r.div_inf << "," << r.eta_drift << ","
            << r.u_drift << "\n";
    return out.str();
}

/// Legacy VTK ASCII snapshot. The visualization grid refines each element into
/// H.degree^2 subtriangles on the elevation lattice; eta is point data at the
/// H DOF points, velocity is cell data sampled at subcell centroids (natural
/// for discontinuous velocity spaces).
inline void write_vtk_fields(std::ostream& out, const ElementPair& pair, const State& state,
                             const std::string& title) {
    const ScalarSpace& H = pair.H;
    const ReferenceBasis& basis = H.basis();
    const int k = H.degree();
    const int nelem = H.mesh().num_triangles();
    const int ncells = nelem * k * k;

    out << "# vtk DataFile Version 2.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << std::setprecision(17);
    out << "POINTS " << H.ndof() << " double\n";
    for (const Vec2& p : H.dof_coords()) out << p.x() << " " << p.y() << " 0\n";

    struct Cell {
        int a, b, c;     // global H dofs
        int elem;
        Vec2 ref_centroid;
    };
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(ncells));
    for (int e = 0; e < nelem; ++e) {
        const auto dofs = H.element_dofs(e);
        auto at = [&](int i, int j) { return dofs[static_cast<std::size_t>(basis.lattice_dof(i, j))]; };
        auto ref = [&](int i, int j) { return Vec2(static_cast<double>(i) / k, static_cast<double>(j) / k); };
        for (int j = 0; j < k; ++j) {
            for (int i = 0; i + j < k; ++i) {
                cells.push_back({at(i, j), at(i + 1, j), at(i, j + 1), e,
                                 (ref(i, j) + ref(i + 1, j) + ref(i, j + 1)) / 3.0});
                if (i + j < k - 1)
                    cells.push_back({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1), e,
                                     (ref(i + 1, j) + ref(i + 1, j + 1) + ref(i, j + 1)) / 3.0});
            }
        }
    }

    out << "CELLS " << ncells << " " << 4 * ncells << "\n";
    for (const Cell& c : cells) out << "3 " << c.a << " " << c.b << " " << c.c << "\n";
    out << "CELL_TYPES " << ncells << "\n";
    for (int i = 0; i < ncells; ++i) out << "5\n";

    out << "POINT_DATA " << H.ndof() << "\n";
    out << "SCALARS eta double 1\nLOOKUP_TABLE default\n";
    for (int g = 0; g < H.ndof(); ++g) out << state.eta[g] << "\n";

    out << "CELL_DATA " << ncells << "\n";
    out << "VECTORS velocity double\n";
    for (const Cell& c : cells) {
        const Vec2 v = pair.V.evaluate(state.u, c.elem, c.ref_centroid);
        out << v.x() << " " << v.y() << " 0\n";
    }
}

inline std::string vtk_fields_string(const ElementPair& pair, const State& state, const std::string& title) {
    std::ostringstream out;
    write_vtk_fields(out, pair, state, title);
    return out.str();
}

}  // namespace swfe
