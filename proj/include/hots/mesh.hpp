#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hots {

using Vec2 = Eigen::Vector2d;

// Linear triangle mesh. Triangles are stored CCW; each carries a region id
// used to look up material data, each boundary edge carries a tag id used
// to attach boundary conditions.
struct Triangle {
  std::array<int, 3> v;
  int region = 0;
};

struct BoundaryEdge {
  int a = 0, b = 0;  // node ids, endpoints of the edge
  int tag = 0;
};

class TriMesh {
 public:
  std::vector<Vec2> nodes;
  std::vector<Triangle> tris;
  std::vector<std::string> region_names{"default"};
  std::vector<BoundaryEdge> bedges;
  std::vector<std::string> tag_names;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_tris() const { return static_cast<int>(tris.size()); }

  double area(int t) const {
    const Triangle& e = tris[t];
    const Vec2& p0 = nodes[e.v[0]];
    const Vec2& p1 = nodes[e.v[1]];
    const Vec2& p2 = nodes[e.v[2]];
    return 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                  (p2.x() - p0.x()) * (p1.y() - p0.y()));
  }

  Vec2 centroid(int t) const {
    const Triangle& e = tris[t];
    return (nodes[e.v[0]] + nodes[e.v[1]] + nodes[e.v[2]]) / 3.0;
  }

  // Gradients of the three nodal shape functions, column j = grad N_j.
  Eigen::Matrix<double, 2, 3> shape_grads(int t) const {
    const Triangle& e = tris[t];
    const Vec2& p0 = nodes[e.v[0]];
    const Vec2& p1 = nodes[e.v[1]];
    const Vec2& p2 = nodes[e.v[2]];
    const double twoA = 2.0 * area(t);
    Eigen::Matrix<double, 2, 3> B;
    B(0, 0) = (p1.y() - p2.y()) / twoA;
    B(1, 0) = (p2.x() - p1.x()) / twoA;
    B(0, 1) = (p2.y() - p0.y()) / twoA;
    B(1, 1) = (p0.x() - p2.x()) / twoA;
    B(0, 2) = (p0.y() - p1.y()) / twoA;
    B(1, 2) = (p1.x() - p0.x()) / twoA;
    return B;
  }

  int region_id(const std::string& name) {
    for (size_t i = 0; i < region_names.size(); ++i)
      if (region_names[i] == name) return static_cast<int>(i);
    region_names.push_back(name);
    return static_cast<int>(region_names.size()) - 1;
  }

  int tag_id(const std::string& name) {
    for (size_t i = 0; i < tag_names.size(); ++i)
      if (tag_names[i] == name) return static_cast<int>(i);
    tag_names.push_back(name);
    return static_cast<int>(tag_names.size()) - 1;
  }

  int find_tag(const std::string& name) const {
    for (size_t i = 0; i < tag_names.size(); ++i)
      if (tag_names[i] == name) return static_cast<int>(i);
    return -1;
  }

  // All node ids lying on boundary edges with any of the given tags, sorted,
  // unique. Empty tag list means the whole boundary.
  std::vector<int> boundary_nodes(const std::vector<std::string>& tags = {}) const {
    std::vector<int> want;
    for (const auto& t : tags) {
      int id = find_tag(t);
      if (id < 0) throw std::runtime_error("unknown boundary tag: " + t);
      want.push_back(id);
    }
    std::vector<int> out;
    for (const auto& e : bedges) {
      if (!want.empty() &&
          std::find(want.begin(), want.end(), e.tag) == want.end())
        continue;
      out.push_back(e.a);
      out.push_back(e.b);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  double total_area() const {
    double s = 0;
    for (int t = 0; t < num_tris(); ++t) s += area(t);
    return s;
  }
};

// Structured crossed-triangle mesh of [0,Lx]x[0,Ly]: nx*ny cells, each split
// into 4 triangles around the cell center. Boundary tags: left, right,
// bottom, top.
inline TriMesh build_rect_mesh(int nx, int ny, double Lx = 1.0, double Ly = 1.0) {
  if (nx < 1 || ny < 1) throw std::runtime_error("build_rect_mesh: need nx,ny >= 1");
  TriMesh m;
  const double hx = Lx / nx, hy = Ly / ny;
  auto gid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.nodes.emplace_back(i * hx, j * hy);
  const int ncorner = (nx + 1) * (ny + 1);
  auto cid = [&](int i, int j) { return ncorner + j * nx + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      m.nodes.emplace_back((i + 0.5) * hx, (j + 0.5) * hy);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = cid(i, j);
      const int n00 = gid(i, j), n10 = gid(i + 1, j);
      const int n11 = gid(i + 1, j + 1), n01 = gid(i, j + 1);
      m.tris.push_back({{n00, n10, c}, 0});
      m.tris.push_back({{n10, n11, c}, 0});
      m.tris.push_back({{n11, n01, c}, 0});
      m.tris.push_back({{n01, n00, c}, 0});
    }
  const int t_left = m.tag_id("left"), t_right = m.tag_id("right");
  const int t_bottom = m.tag_id("bottom"), t_top = m.tag_id("top");
  for (int i = 0; i < nx; ++i) {
    m.bedges.push_back({gid(i, 0), gid(i + 1, 0), t_bottom});
    m.bedges.push_back({gid(i, ny), gid(i + 1, ny), t_top});
  }
  for (int j = 0; j < ny; ++j) {
    m.bedges.push_back({gid(0, j), gid(0, j + 1), t_left});
    m.bedges.push_back({gid(nx, j), gid(nx, j + 1), t_right});
  }
  return m;
}

// Axis-aligned box region used to mark inclusions / strips. Half-open test
// keeps strip tilings unambiguous; centroids never sit on cell edges for
// crossed meshes anyway.
struct RegionBox {
  std::string name;
  double x0, y0, x1, y1;
  bool contains(const Vec2& p) const {
    return p.x() >= x0 && p.x() < x1 && p.y() >= y0 && p.y() < y1;
  }
  double box_area() const { return (x1 - x0) * (y1 - y0); }
};

// Tags every triangle by the smallest box containing its centroid, falling
// back to default_region. Box areas break ties, so nested boxes behave like
// "innermost wins".
inline void tag_regions(TriMesh& m, const std::string& default_region,
                        const std::vector<RegionBox>& boxes) {
  const int def = m.region_id(default_region);
  std::vector<int> ids;
  ids.reserve(boxes.size());
  for (const auto& b : boxes) ids.push_back(m.region_id(b.name));
  for (int t = 0; t < m.num_tris(); ++t) {
    const Vec2 c = m.centroid(t);
    int best = def;
    double best_area = std::numeric_limits<double>::max();
    for (size_t k = 0; k < boxes.size(); ++k)
      if (boxes[k].contains(c) && boxes[k].box_area() < best_area) {
        best = ids[k];
        best_area = boxes[k].box_area();
      }
    m.tris[t].region = best;
  }
}

// Nearest-node lookup, used by line samplers and tests.
inline int nearest_node(const TriMesh& m, const Vec2& p) {
  int best = 0;
  double bd = std::numeric_limits<double>::max();
  for (int i = 0; i < m.num_nodes(); ++i) {
    const double d = (m.nodes[i] - p).squaredNorm();
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  return best;
}

// Point location for P1 interpolation. Returns triangle id and barycentric
// coordinates; tolerant of roundoff on edges. Linear scan is fine at the
// mesh sizes used here; a structured fast path handles the common case.
struct PointLocation {
  int tri = -1;
  std::array<double, 3> bary{};
};

inline PointLocation locate_point(const TriMesh& m, const Vec2& p) {
  PointLocation best;
  double best_neg = -std::numeric_limits<double>::max();
  for (int t = 0; t < m.num_tris(); ++t) {
    const Triangle& e = m.tris[t];
    const Vec2& p0 = m.nodes[e.v[0]];
    const Vec2& p1 = m.nodes[e.v[1]];
    const Vec2& p2 = m.nodes[e.v[2]];
    const double A = m.area(t);
    const double l0 = 0.5 * ((p1.x() - p.x()) * (p2.y() - p.y()) -
                             (p2.x() - p.x()) * (p1.y() - p.y())) / A;
    const double l1 = 0.5 * ((p2.x() - p.x()) * (p0.y() - p.y()) -
                             (p0.x() - p.x()) * (p2.y() - p.y())) / A;
    const double l2 = 1.0 - l0 - l1;
    const double neg = std::min({l0, l1, l2});
    if (neg > best_neg) {
      best_neg = neg;
      best.tri = t;
      best.bary = {l0, l1, l2};
    }
    if (neg >= 0.0) break;  // inside, done
  }
  return best;
}

inline double interp_scalar(const TriMesh& m, const Eigen::VectorXd& u,
                            const PointLocation& loc) {
  const Triangle& e = m.tris[loc.tri];
  return loc.bary[0] * u[e.v[0]] + loc.bary[1] * u[e.v[1]] +
         loc.bary[2] * u[e.v[2]];
}

}  // namespace hots
