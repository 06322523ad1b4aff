#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rigidity/linalg.hpp"

namespace rigidity {

struct HingeSpec {
    std::array<int, 2> panels; // [a, b]
    std::array<int, 2> edge;   // [v1, v2]; positive fold rotates b about unit(v2-v1)
    int angle_index = -1;
};

struct FanStep {
    int panel = -1;
    int hinge = -1; // hinge crossed into `panel` from the previous fan panel
};

struct InteriorVertexSpec {
    int vertex = -1;
    std::vector<FanStep> fan; // cyclic; fan.back().panel is the starting panel
};

struct CycleStep {
    int panel = -1;
    int hinge = -1;
    int anchor_vertex = -1; // vertex on the cycle incident to the crossed hinge
};

struct CycleSpec {
    std::vector<CycleStep> steps;
};

// Per-step data derived once from the reference realization. `sigma` maps the
// stored hinge angle to the right-handed angle about the outward crease axis
// used by the loop product.
struct LoopStep {
    int hinge = -1;
    int panel = -1;       // panel entered by this step
    double sigma = 1.0;
    double alpha = 0.0;   // vertex loops: sector angle; cycle loops: beta
    double length = 0.0;  // cycle loops only: l
    double gamma = 0.0;   // cycle loops only
    Vec3 crease_ref;      // outward unit crease direction, reference state
    Vec3 anchor_ref;      // cycle loops: O_j at reference
};

// One closure loop (an interior vertex fan or a representative cycle).
struct Loop {
    bool is_cycle = false;
    int vertex = -1; // interior vertex index for fans
    std::vector<LoopStep> steps;
    Mat4 frame0_ref = Mat4::Identity(); // reference pose of the starting frame
};

struct FoldingState {
    VecX rho;
};

class Surface {
public:
    std::vector<Vec3> vertices;
    std::vector<std::vector<int>> panels; // counterclockwise w.r.t. the panel normal
    std::vector<HingeSpec> hinges;
    std::vector<InteriorVertexSpec> interior_vertices;
    std::vector<CycleSpec> cycles;

    std::vector<Vec3> panel_normals; // unit, from the CCW listing
    std::vector<Loop> loops;         // fans first (input order), then cycles
    int n_angles = 0;

    int n_interior_vertices() const { return static_cast<int>(interior_vertices.size()); }
    int n_cycles() const { return static_cast<int>(cycles.size()); }
    int n_constraints() const { return 3 * n_interior_vertices() + 6 * n_cycles(); }

    // Reference folding angles derived from the realization.
    const VecX& reference_angles() const { return rho_ref_; }

    friend Surface load_surface(const nlohmann::json& doc);

private:
    VecX rho_ref_;
};

Surface load_surface(const nlohmann::json& doc);
Surface load_surface_file(const std::string& path);

// Signed dihedral offset by pi at each hinge of the given realization
// coordinates (defaults to the surface's own reference coordinates).
FoldingState folding_angles_from_realization(const Surface& s);
FoldingState folding_angles_of_coordinates(const Surface& s, const std::vector<Vec3>& coords);

// Panel poses at a folding state, propagated over a spanning tree of the
// panel-hinge graph with `root_panel` held at its reference pose.
std::vector<Mat4> panel_poses(const Surface& s, const FoldingState& st, int root_panel = 0);

// Vertex coordinates at a folding state (each vertex taken from one
// incident panel; consistent at configurations).
std::vector<Vec3> realize(const Surface& s, const FoldingState& st, int root_panel = 0);

// Per-loop geometric quantities at a folding state, with each loop's
// starting frame held at its reference pose (independent of root choice).
struct LoopGeometry {
    std::vector<Vec3> crease_dirs; // outward unit crease directions
    std::vector<Vec3> anchors;     // cycle loops only
};

struct GeometryCache {
    std::vector<LoopGeometry> per_loop;          // parallel to Surface::loops
    std::vector<Mat4> poses;                     // panel poses (root-dependent)
    std::vector<std::vector<double>> sector_angles; // per loop
};

GeometryCache geometry_at(const Surface& s, const FoldingState& st, int root_panel = 0);

} // namespace rigidity
