// Unstructured triangular meshes with vertex-centered median-dual cells:
// volumes, integrated edge normals, boundary tags, upwind-triangle lookup,
// plain-text I/O and built-in channel generators.
#ifndef ADJFLOW_MESH_HPP_
#define ADJFLOW_MESH_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace adjflow {

enum class BoundaryTag : std::uint8_t {
  slip_wall = 0,
  inflow_freestream = 1,
  outflow_free = 2,
  ground = 3
};

const char* boundary_tag_name(BoundaryTag tag);
bool parse_boundary_tag(const std::string& text, BoundaryTag& out);

/// Priority used when a corner vertex carries several tags:
/// inflow > outflow > slip > ground.
int boundary_tag_priority(BoundaryTag tag);

struct BoundaryEdge {
  int a = -1, b = -1;  // endpoint vertex ids, oriented with the interior left
  BoundaryTag tag = BoundaryTag::slip_wall;
};

/// Interior dual-cell interface built around primal edge (a, b) with a < b.
/// The integrated normal points from cell a into cell b; the reverse
/// direction uses its exact negation.
struct DualEdge {
  int a = -1, b = -1;
  double nx = 0.0, ny = 0.0;
  int upwind_a = -1;  // triangle hit by the half-line from b through a
  int upwind_b = -1;  // triangle hit by the half-line from a through b
};

/// Per-vertex boundary segment contribution (half of a tagged boundary edge).
struct BoundaryPiece {
  BoundaryTag tag = BoundaryTag::slip_wall;
  double nx = 0.0, ny = 0.0;  // integrated outward normal of the segment
};

struct Mesh2D {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<BoundaryEdge> boundary_edges;

  // Derived by build_dual:
  std::vector<double> cell_volumes;
  std::vector<DualEdge> edges;
  std::vector<std::vector<int>> neighbors;  // sorted vertex ids of V(P_i)
  /// Signed incident-edge ids per vertex: entry +(e+1) means this vertex is
  /// edges[e].a, −(e+1) means it is edges[e].b. Fixed order makes gather
  /// assembly bitwise deterministic.
  std::vector<std::vector<int>> incident_edges;
  std::vector<std::vector<BoundaryPiece>> boundary_pieces;  // empty if interior
  /// Length-weighted unit outward normal for boundary vertices, {0,0} inside.
  std::vector<std::array<double, 2>> boundary_vertex_normals;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  bool is_boundary_vertex(int v) const { return !boundary_pieces[v].empty(); }
  /// Highest-priority tag among the vertex's boundary pieces.
  BoundaryTag primary_tag(int v) const;
};

/// Populates all derived fields of a raw mesh (vertices, triangles, boundary
/// edges already set). Throws std::runtime_error naming the offending simplex
/// for non-positive areas, non-conforming edges, or boundary mismatches.
void build_dual(Mesh2D& mesh);

double mesh_total_area(const Mesh2D& mesh);

struct WedgeChannelParams {
  double length = 3.0;
  double height = 1.0;
  double wedge_start = 1.9;      // x where the ramp begins
  double wedge_angle_deg = 10.0; // 0 gives a plain channel
  bool wedge_on_top = false;     // ramp grows from the bottom or the top wall
  double target_h = 0.05;        // nominal edge length
  BoundaryTag bottom_tag = BoundaryTag::slip_wall;  // set to ground for ground-effect runs
  BoundaryTag top_tag = BoundaryTag::slip_wall;
  unsigned jitter_seed = 0;      // nonzero: jitter interior vertices
};

/// Structured transfinite channel with an optional wedge ramp; boundary tags:
/// left inflow, right outflow, walls per params, the ramp always slip_wall.
Mesh2D generate_wedge_channel(const WedgeChannelParams& params);

/// Plain-text format: header "nv nt nbe", nv lines "x y", nt lines "i j k",
/// nbe lines "i j tag" (1-based, tags by name). Coordinates at 17 significant
/// digits round-trip bit-exactly.
Mesh2D read_mesh(const std::string& path);
void write_mesh(const std::string& path, const Mesh2D& mesh);

}  // namespace adjflow

#endif  // ADJFLOW_MESH_HPP_
