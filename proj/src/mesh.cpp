#include "adjflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace adjflow {

namespace {

double cross2(double ax, double ay, double bx, double by) {
  return ax * by - ay * bx;
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

const char* boundary_tag_name(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::slip_wall: return "slip";
    case BoundaryTag::inflow_freestream: return "inflow";
    case BoundaryTag::outflow_free: return "outflow";
    case BoundaryTag::ground: return "ground";
  }
  return "?";
}

bool parse_boundary_tag(const std::string& text, BoundaryTag& out) {
  if (text == "slip") out = BoundaryTag::slip_wall;
  else if (text == "inflow") out = BoundaryTag::inflow_freestream;
  else if (text == "outflow") out = BoundaryTag::outflow_free;
  else if (text == "ground") out = BoundaryTag::ground;
  else return false;
  return true;
}

int boundary_tag_priority(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::inflow_freestream: return 3;
    case BoundaryTag::outflow_free: return 2;
    case BoundaryTag::slip_wall: return 1;
    case BoundaryTag::ground: return 0;
  }
  return -1;
}

BoundaryTag Mesh2D::primary_tag(int v) const {
  BoundaryTag best = BoundaryTag::ground;
  int best_p = -1;
  for (const BoundaryPiece& piece : boundary_pieces[v])
    if (boundary_tag_priority(piece.tag) > best_p) {
      best_p = boundary_tag_priority(piece.tag);
      best = piece.tag;
    }
  return best;
}

void build_dual(Mesh2D& mesh) {
  const int nv = mesh.n_vertices();
  const int nt = mesh.n_triangles();
  if (nv == 0 || nt == 0) throw std::runtime_error("build_dual: empty mesh");

  auto vx = [&](int v) { return mesh.vertices[v][0]; };
  auto vy = [&](int v) { return mesh.vertices[v][1]; };

  // Validate indices and orientation; accumulate cell volumes as area thirds
  // (the three median-dual pieces of a triangle have equal area).
  mesh.cell_volumes.assign(nv, 0.0);
  std::vector<std::vector<int>> vertex_tris(nv);
  for (int t = 0; t < nt; ++t) {
    const auto& T = mesh.triangles[t];
    for (int k = 0; k < 3; ++k)
      if (T[k] < 0 || T[k] >= nv)
        throw std::runtime_error("build_dual: triangle " + std::to_string(t) +
                                 " references vertex " + std::to_string(T[k]));
    const double area2 = cross2(vx(T[1]) - vx(T[0]), vy(T[1]) - vy(T[0]),
                                vx(T[2]) - vx(T[0]), vy(T[2]) - vy(T[0]));
    if (area2 <= 0.0)
      throw std::runtime_error(
          "build_dual: triangle " + std::to_string(t) +
          (area2 == 0.0 ? " has zero area" : " is not counterclockwise"));
    for (int k = 0; k < 3; ++k) {
      mesh.cell_volumes[T[k]] += area2 / 6.0;
      vertex_tris[T[k]].push_back(t);
    }
  }

  // Edge table: adjacency counts and adjacent triangles.
  struct EdgeInfo {
    int idx = -1;
    int tri[2] = {-1, -1};
    int count = 0;
  };
  std::unordered_map<std::uint64_t, EdgeInfo> table;
  table.reserve(static_cast<std::size_t>(nt) * 2);
  mesh.edges.clear();
  for (int t = 0; t < nt; ++t) {
    const auto& T = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = T[k], b = T[(k + 1) % 3];
      EdgeInfo& info = table[edge_key(a, b)];
      if (info.idx < 0) {
        info.idx = static_cast<int>(mesh.edges.size());
        DualEdge e;
        e.a = std::min(a, b);
        e.b = std::max(a, b);
        mesh.edges.push_back(e);
      }
      if (info.count >= 2)
        throw std::runtime_error("build_dual: edge (" + std::to_string(a) +
                                 "," + std::to_string(b) +
                                 ") shared by more than two triangles");
      info.tri[info.count++] = t;
    }
  }

  // Integrated median-dual normals: midpoint-to-centroid segments, oriented
  // from cell a into cell b, computed once per edge for exact antisymmetry.
  for (auto& [key, info] : table) {
    DualEdge& e = mesh.edges[info.idx];
    const double mx = 0.5 * (vx(e.a) + vx(e.b));
    const double my = 0.5 * (vy(e.a) + vy(e.b));
    const double dx = vx(e.b) - vx(e.a);
    const double dy = vy(e.b) - vy(e.a);
    for (int c = 0; c < info.count; ++c) {
      const auto& T = mesh.triangles[info.tri[c]];
      const double gx = (vx(T[0]) + vx(T[1]) + vx(T[2])) / 3.0;
      const double gy = (vy(T[0]) + vy(T[1]) + vy(T[2])) / 3.0;
      double nx = gy - my, ny = mx - gx;  // perpendicular of (g - m)
      if (nx * dx + ny * dy < 0.0) {
        nx = -nx;
        ny = -ny;
      }
      e.nx += nx;
      e.ny += ny;
    }
    (void)key;
  }

  // Declared boundary must coincide with the set of single-triangle edges.
  std::size_t open_edges = 0;
  for (const auto& [key, info] : table)
    if (info.count == 1) ++open_edges;
  if (open_edges != mesh.boundary_edges.size())
    throw std::runtime_error(
        "build_dual: mesh has " + std::to_string(open_edges) +
        " open edges but " + std::to_string(mesh.boundary_edges.size()) +
        " declared boundary edges");

  mesh.boundary_pieces.assign(nv, {});
  mesh.boundary_vertex_normals.assign(nv, {0.0, 0.0});
  std::vector<char> claimed(mesh.edges.size(), 0);
  for (BoundaryEdge& be : mesh.boundary_edges) {
    auto it = table.find(edge_key(be.a, be.b));
    if (it == table.end() || it->second.count != 1 || claimed[it->second.idx])
      throw std::runtime_error("build_dual: declared boundary edge (" +
                               std::to_string(be.a) + "," +
                               std::to_string(be.b) +
                               ") is not an open mesh edge");
    claimed[it->second.idx] = 1;
    // Normalize the stored orientation to the adjacent triangle's (interior
    // on the left), so outward normals are simple right-hand perpendiculars.
    const auto& T = mesh.triangles[it->second.tri[0]];
    bool forward = false;
    for (int k = 0; k < 3; ++k)
      if (T[k] == be.a && T[(k + 1) % 3] == be.b) forward = true;
    if (!forward) std::swap(be.a, be.b);

    const double mx = 0.5 * (vx(be.a) + vx(be.b));
    const double my = 0.5 * (vy(be.a) + vy(be.b));
    BoundaryPiece pa;  // segment from vertex a to the midpoint
    pa.tag = be.tag;
    pa.nx = my - vy(be.a);
    pa.ny = vx(be.a) - mx;
    mesh.boundary_pieces[be.a].push_back(pa);
    BoundaryPiece pb;  // segment from the midpoint to vertex b
    pb.tag = be.tag;
    pb.nx = vy(be.b) - my;
    pb.ny = mx - vx(be.b);
    mesh.boundary_pieces[be.b].push_back(pb);
  }
  for (int v = 0; v < nv; ++v) {
    double nx = 0.0, ny = 0.0;
    for (const BoundaryPiece& p : mesh.boundary_pieces[v]) {
      nx += p.nx;
      ny += p.ny;
    }
    const double len = std::hypot(nx, ny);
    if (len > 0.0) mesh.boundary_vertex_normals[v] = {nx / len, ny / len};
  }

  // Neighbor sets and deterministic incident-edge lists.
  mesh.neighbors.assign(nv, {});
  mesh.incident_edges.assign(nv, {});
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
    mesh.neighbors[mesh.edges[e].a].push_back(mesh.edges[e].b);
    mesh.neighbors[mesh.edges[e].b].push_back(mesh.edges[e].a);
  }
  for (int v = 0; v < nv; ++v) std::sort(mesh.neighbors[v].begin(), mesh.neighbors[v].end());
  for (int e = 0; e < static_cast<int>(mesh.edges.size()); ++e) {
    mesh.incident_edges[mesh.edges[e].a].push_back(e + 1);
    mesh.incident_edges[mesh.edges[e].b].push_back(-(e + 1));
  }
  for (int v = 0; v < nv; ++v)
    std::sort(mesh.incident_edges[v].begin(), mesh.incident_edges[v].end(),
              [](int x, int y) { return std::abs(x) < std::abs(y); });

  // Upwind triangles: the incident triangle whose wedge at the vertex
  // contains the half-line extending the edge upstream. When the half-line
  // runs exactly along a shared ray, both neighbors score the same margin;
  // preferring the triangle on the left of the direction keeps the choice
  // geometric (invariant under rigid motions) instead of order-dependent.
  auto find_upwind = [&](int v, int other) {
    const double dx = vx(v) - vx(other);
    const double dy = vy(v) - vy(other);
    const double dlen = std::hypot(dx, dy);
    struct Candidate {
      int tri;
      double margin;  // min normalized cross against the two wedge rays
      double align;   // normalized centroid alignment, for the fallback
      bool left;
    };
    std::vector<Candidate> cands;
    cands.reserve(vertex_tris[v].size());
    for (int t : vertex_tris[v]) {
      const auto& T = mesh.triangles[t];
      int k = 0;
      while (T[k] != v) ++k;
      const int p = T[(k + 1) % 3], q = T[(k + 2) % 3];
      const double px = vx(p) - vx(v), py = vy(p) - vy(v);
      const double qx = vx(q) - vx(v), qy = vy(q) - vy(v);
      const double m1 = cross2(px, py, dx, dy) / (std::hypot(px, py) * dlen);
      const double m2 = cross2(dx, dy, qx, qy) / (std::hypot(qx, qy) * dlen);
      const double gx = (vx(T[0]) + vx(T[1]) + vx(T[2])) / 3.0 - vx(v);
      const double gy = (vy(T[0]) + vy(T[1]) + vy(T[2])) / 3.0 - vy(v);
      cands.push_back({t, std::min(m1, m2),
                       (gx * dx + gy * dy) / (std::hypot(gx, gy) * dlen),
                       cross2(dx, dy, gx, gy) > 0.0});
    }
    auto pick = [&](double Candidate::* key) {
      double best = -2.0;
      for (const Candidate& c : cands) best = std::max(best, c.*key);
      for (const Candidate& c : cands)
        if (c.*key >= best - 1e-13 && c.left) return c.tri;
      for (const Candidate& c : cands)
        if (c.*key >= best - 1e-13) return c.tri;
      return -1;
    };
    for (const Candidate& c : cands)
      if (c.margin >= -1e-12) return pick(&Candidate::margin);
    return pick(&Candidate::align);  // boundary vertex looking outward
  };
  for (DualEdge& e : mesh.edges) {
    e.upwind_a = find_upwind(e.a, e.b);
    e.upwind_b = find_upwind(e.b, e.a);
  }
}

double mesh_total_area(const Mesh2D& mesh) {
  double area = 0.0;
  for (const auto& T : mesh.triangles) {
    const auto& p0 = mesh.vertices[T[0]];
    const auto& p1 = mesh.vertices[T[1]];
    const auto& p2 = mesh.vertices[T[2]];
    area += 0.5 * cross2(p1[0] - p0[0], p1[1] - p0[1], p2[0] - p0[0], p2[1] - p0[1]);
  }
  return area;
}

Mesh2D generate_wedge_channel(const WedgeChannelParams& params) {
  const double L = params.length, H = params.height;
  if (L <= 0.0 || H <= 0.0 || params.target_h <= 0.0)
    throw std::invalid_argument("generate_wedge_channel: non-positive size");
  const double theta = params.wedge_angle_deg * M_PI / 180.0;
  const double tan_t = std::tan(theta);

  const int nx = std::max(3, static_cast<int>(std::lround(L / params.target_h)) + 1);
  const int ny = std::max(3, static_cast<int>(std::lround(H / params.target_h)) + 1);
  const double dx = L / (nx - 1);

  // Snap the ramp start to a grid column so the corner is a mesh vertex.
  const int ix_start = std::clamp(
      static_cast<int>(std::lround(params.wedge_start / dx)), 0, nx - 1);
  const double xs = ix_start * dx;
  auto ramp = [&](double x) { return x > xs ? (x - xs) * tan_t : 0.0; };
  if (ramp(L) >= 0.8 * H)
    throw std::runtime_error(
        "generate_wedge_channel: wedge reaches the opposite wall");

  Mesh2D mesh;
  mesh.vertices.resize(static_cast<std::size_t>(nx) * ny);
  auto vid = [&](int i, int j) { return j * nx + i; };
  for (int i = 0; i < nx; ++i) {
    const double x = i * dx;
    const double yb = params.wedge_on_top ? 0.0 : ramp(x);
    const double yt = params.wedge_on_top ? H - ramp(x) : H;
    for (int j = 0; j < ny; ++j) {
      const double f = static_cast<double>(j) / (ny - 1);
      mesh.vertices[vid(i, j)] = {x, yb + (yt - yb) * f};
    }
  }
  if (params.jitter_seed != 0) {
    std::mt19937 rng(params.jitter_seed);
    std::uniform_real_distribution<double> d(-0.2, 0.2);
    for (int i = 1; i < nx - 1; ++i)
      for (int j = 1; j < ny - 1; ++j) {
        mesh.vertices[vid(i, j)][0] += d(rng) * dx;
        mesh.vertices[vid(i, j)][1] += d(rng) * (H / (ny - 1));
      }
  }

  mesh.triangles.reserve(static_cast<std::size_t>(nx - 1) * (ny - 1) * 2);
  for (int i = 0; i < nx - 1; ++i)
    for (int j = 0; j < ny - 1; ++j) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        mesh.triangles.push_back({v00, v10, v11});
        mesh.triangles.push_back({v00, v11, v01});
      } else {
        mesh.triangles.push_back({v00, v10, v01});
        mesh.triangles.push_back({v10, v11, v01});
      }
    }

  // Boundary walk, interior kept on the left throughout.
  auto wall_tag = [&](bool on_wedge_side, double x0, double x1, BoundaryTag base) {
    const bool on_ramp = on_wedge_side && std::max(x0, x1) > xs + 0.5 * dx;
    return on_ramp ? BoundaryTag::slip_wall : base;
  };
  for (int i = 0; i < nx - 1; ++i) {  // bottom, left to right
    const BoundaryTag tag = wall_tag(!params.wedge_on_top, i * dx, (i + 1) * dx,
                                     params.bottom_tag);
    mesh.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), tag});
  }
  for (int j = 0; j < ny - 1; ++j)  // right wall, upward
    mesh.boundary_edges.push_back(
        {vid(nx - 1, j), vid(nx - 1, j + 1), BoundaryTag::outflow_free});
  for (int i = nx - 1; i > 0; --i) {  // top, right to left
    const BoundaryTag tag = wall_tag(params.wedge_on_top, i * dx, (i - 1) * dx,
                                     params.top_tag);
    mesh.boundary_edges.push_back({vid(i, ny - 1), vid(i - 1, ny - 1), tag});
  }
  for (int j = ny - 1; j > 0; --j)  // left wall, downward
    mesh.boundary_edges.push_back(
        {vid(0, j), vid(0, j - 1), BoundaryTag::inflow_freestream});

  build_dual(mesh);
  return mesh;
}

Mesh2D read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_mesh: cannot open " + path);
  int line_no = 0;
  std::string line;
  auto next_line = [&]() -> std::istringstream {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line[0] != '#') return std::istringstream(line);
    }
    throw std::runtime_error("read_mesh: " + path + ": unexpected end of file after line " +
                             std::to_string(line_no));
  };
  auto parse_fail = [&](const std::string& what) {
    throw std::runtime_error("read_mesh: " + path + ":" + std::to_string(line_no) +
                             ": expected " + what);
  };

  Mesh2D mesh;
  long nv = 0, nt = 0, nbe = 0;
  {
    auto ss = next_line();
    if (!(ss >> nv >> nt >> nbe) || nv <= 0 || nt <= 0 || nbe < 0)
      parse_fail("header 'nv nt nbe'");
  }
  mesh.vertices.resize(nv);
  for (long i = 0; i < nv; ++i) {
    auto ss = next_line();
    if (!(ss >> mesh.vertices[i][0] >> mesh.vertices[i][1]))
      parse_fail("vertex coordinates 'x y'");
  }
  mesh.triangles.resize(nt);
  for (long t = 0; t < nt; ++t) {
    auto ss = next_line();
    int a, b, c;
    if (!(ss >> a >> b >> c) || a < 1 || b < 1 || c < 1 || a > nv || b > nv || c > nv)
      parse_fail("triangle 'i j k' (1-based)");
    mesh.triangles[t] = {a - 1, b - 1, c - 1};
  }
  mesh.boundary_edges.resize(nbe);
  for (long e = 0; e < nbe; ++e) {
    auto ss = next_line();
    int a, b;
    std::string tag;
    if (!(ss >> a >> b >> tag) || a < 1 || b < 1 || a > nv || b > nv ||
        !parse_boundary_tag(tag, mesh.boundary_edges[e].tag))
      parse_fail("boundary edge 'i j tag'");
    mesh.boundary_edges[e].a = a - 1;
    mesh.boundary_edges[e].b = b - 1;
  }
  build_dual(mesh);
  return mesh;
}

void write_mesh(const std::string& path, const Mesh2D& mesh) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("write_mesh: cannot open " + path);
  std::fprintf(f, "%d %d %zu\n", mesh.n_vertices(), mesh.n_triangles(),
               mesh.boundary_edges.size());
  for (const auto& v : mesh.vertices)
    std::fprintf(f, "%.17g %.17g\n", v[0], v[1]);
  for (const auto& T : mesh.triangles)
    std::fprintf(f, "%d %d %d\n", T[0] + 1, T[1] + 1, T[2] + 1);
  for (const auto& be : mesh.boundary_edges)
    std::fprintf(f, "%d %d %s\n", be.a + 1, be.b + 1, boundary_tag_name(be.tag));
  std::fclose(f);
}

}  // namespace adjflow
