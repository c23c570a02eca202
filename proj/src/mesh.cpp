#include "nldd/mesh.hpp"

#include "nldd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <string>

namespace nldd {
namespace {

constexpr double kGridTol = 1e-9;

int integer_ratio(double length, double h, const char* what) {
  if (!(h > 0.0) || !(length > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " and h must be positive");
  }
  const double ratio = length / h;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > kGridTol * std::max(1.0, ratio)) {
    throw Error(ErrorCode::NonIntegerSubdivision,
                std::string("h = ") + std::to_string(h) + " does not divide " + what + " = " +
                    std::to_string(length));
  }
  return static_cast<int>(rounded);
}

using Edge = std::pair<NodeId, NodeId>;

Edge make_edge(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

DofMap make_local_map(const TriMesh& mesh, const std::vector<int>& labels, int side,
                      const std::vector<NodeId>& interface_nodes) {
  DofMap map;
  map.global_to_local.assign(mesh.num_nodes(), -1);
  std::vector<bool> touched(mesh.num_nodes(), false);
  for (std::size_t t = 0; t < labels.size(); ++t) {
    if (labels[t] != side) continue;
    map.triangles.push_back(t);
    for (NodeId v : mesh.triangles()[t]) touched[static_cast<std::size_t>(v)] = true;
  }
  std::vector<bool> is_interface(mesh.num_nodes(), false);
  for (NodeId v : interface_nodes) is_interface[static_cast<std::size_t>(v)] = true;

  for (std::size_t v = 0; v < mesh.num_nodes(); ++v) {
    if (touched[v] && !mesh.on_boundary()[v] && !is_interface[v]) {
      map.local_to_global.push_back(static_cast<NodeId>(v));
    }
  }
  map.num_interior = static_cast<int>(map.local_to_global.size());
  for (NodeId v : interface_nodes) map.local_to_global.push_back(v);
  map.num_interface = static_cast<int>(interface_nodes.size());
  for (std::size_t k = 0; k < map.local_to_global.size(); ++k) {
    map.global_to_local[static_cast<std::size_t>(map.local_to_global[k])] = static_cast<int>(k);
  }
  return map;
}

}  // namespace

std::vector<NodeId> TriMesh::boundary_nodes() const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (on_boundary_[v]) out.push_back(static_cast<NodeId>(v));
  }
  return out;
}

NodeId TriMesh::find_node(Point p) const noexcept {
  const double fi = p.x / h_;
  const double fj = p.y / h_;
  const double ri = std::round(fi);
  const double rj = std::round(fj);
  if (std::abs(fi - ri) > kGridTol * std::max(1.0, std::abs(fi)) ||
      std::abs(fj - rj) > kGridTol * std::max(1.0, std::abs(fj))) {
    return -1;
  }
  const int i = static_cast<int>(ri);
  const int j = static_cast<int>(rj);
  if (i < 0 || i > nx_ || j < 0 || j > ny_) return -1;
  return node_at(i, j);
}

void TriMesh::write_nodes(std::ostream& os) const {
  const auto old = os.precision(17);
  for (const Point& p : nodes_) os << p.x << ' ' << p.y << '\n';
  os.precision(old);
}

void TriMesh::write_triangles(std::ostream& os) const {
  for (const Triangle& t : triangles_) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

TriMesh build_rect_mesh(double width, double height, double h) {
  TriMesh mesh;
  mesh.nx_ = integer_ratio(width, h, "width");
  mesh.ny_ = integer_ratio(height, h, "height");
  mesh.width_ = width;
  mesh.height_ = height;
  mesh.h_ = h;

  const int nx = mesh.nx_;
  const int ny = mesh.ny_;
  mesh.nodes_.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.nodes_.push_back({i * h, j * h});
      mesh.on_boundary_.push_back(i == 0 || j == 0 || i == nx || j == ny);
    }
  }
  mesh.triangles_.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const NodeId v00 = mesh.node_at(i, j);
      const NodeId v10 = mesh.node_at(i + 1, j);
      const NodeId v01 = mesh.node_at(i, j + 1);
      const NodeId v11 = mesh.node_at(i + 1, j + 1);
      mesh.triangles_.push_back({v00, v10, v11});
      mesh.triangles_.push_back({v00, v11, v01});
    }
  }
  return mesh;
}

DofMap global_dof_map(const TriMesh& mesh) {
  std::vector<int> labels(mesh.num_triangles(), 1);
  return make_local_map(mesh, labels, 1, {});
}

Decomposition decompose_vertical(const TriMesh& mesh, double x_cut) {
  const double fi = x_cut / mesh.h();
  const double ri = std::round(fi);
  if (std::abs(fi - ri) > kGridTol * std::max(1.0, std::abs(fi))) {
    throw Error(ErrorCode::CutOffGrid, "x_cut = " + std::to_string(x_cut) + " is not a mesh line");
  }
  if (ri <= 0.0 || ri >= mesh.nx()) {
    throw Error(ErrorCode::CutOffGrid, "x_cut = " + std::to_string(x_cut) + " is not inside the domain");
  }
  const double x = ri * mesh.h();
  return decompose_staircase(mesh, {{x, 0.0}, {x, mesh.height()}});
}

Decomposition decompose_staircase(const TriMesh& mesh, const std::vector<Point>& polyline) {
  if (polyline.size() < 2) throw Error(ErrorCode::DisconnectedPath, "polyline needs at least two points");

  // Expand corner points into the full sequence of grid nodes along the path.
  std::vector<NodeId> path;
  for (std::size_t k = 0; k < polyline.size(); ++k) {
    const NodeId v = mesh.find_node(polyline[k]);
    if (v < 0) {
      throw Error(ErrorCode::PathNotOnGrid, "point (" + std::to_string(polyline[k].x) + ", " +
                                                std::to_string(polyline[k].y) + ") is not a grid node");
    }
    if (k == 0) {
      path.push_back(v);
      continue;
    }
    const int w = mesh.nx() + 1;
    const int i0 = path.back() % w, j0 = path.back() / w;
    const int i1 = v % w, j1 = v / w;
    if (i0 == i1 && j0 == j1) throw Error(ErrorCode::DisconnectedPath, "repeated polyline point");
    if (i0 != i1 && j0 != j1) {
      throw Error(ErrorCode::PathNotOnGrid, "polyline segment is neither horizontal nor vertical");
    }
    const int di = (i1 > i0) - (i1 < i0);
    const int dj = (j1 > j0) - (j1 < j0);
    for (int i = i0 + di, j = j0 + dj;; i += di, j += dj) {
      path.push_back(mesh.node_at(i, j));
      if (i == i1 && j == j1) break;
    }
  }

  const auto& boundary = mesh.on_boundary();
  if (std::set<NodeId>(path.begin(), path.end()).size() != path.size()) {
    throw Error(ErrorCode::DisconnectedPath, "polyline intersects itself");
  }
  if (!boundary[static_cast<std::size_t>(path.front())] || !boundary[static_cast<std::size_t>(path.back())]) {
    throw Error(ErrorCode::DisconnectedPath, "polyline must start and end on the outer boundary");
  }
  for (std::size_t k = 1; k + 1 < path.size(); ++k) {
    if (boundary[static_cast<std::size_t>(path[k])]) {
      throw Error(ErrorCode::DisconnectedPath, "polyline touches the outer boundary before its end");
    }
  }

  std::set<Edge> cut;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) cut.insert(make_edge(path[k], path[k + 1]));

  // Flood fill over triangles, never crossing a cut edge.
  const auto& tris = mesh.triangles();
  std::map<Edge, std::vector<std::size_t>> edge_tris;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int e = 0; e < 3; ++e) edge_tris[make_edge(tris[t][e], tris[t][(e + 1) % 3])].push_back(t);
  }
  std::vector<int> labels(tris.size(), 0);
  auto fill = [&](std::size_t seed, int label) {
    std::queue<std::size_t> queue;
    labels[seed] = label;
    queue.push(seed);
    while (!queue.empty()) {
      const std::size_t t = queue.front();
      queue.pop();
      for (int e = 0; e < 3; ++e) {
        const Edge edge = make_edge(tris[t][e], tris[t][(e + 1) % 3]);
        if (cut.count(edge)) continue;
        for (std::size_t nb : edge_tris[edge]) {
          if (labels[nb] == 0) {
            labels[nb] = label;
            queue.push(nb);
          }
        }
      }
    }
  };
  fill(0, 1);
  const auto second = std::find(labels.begin(), labels.end(), 0);
  if (second == labels.end()) throw Error(ErrorCode::DisconnectedPath, "polyline does not split the domain");
  fill(static_cast<std::size_t>(second - labels.begin()), 2);
  if (std::find(labels.begin(), labels.end(), 0) != labels.end()) {
    throw Error(ErrorCode::DisconnectedPath, "polyline splits the domain into more than two parts");
  }

  Decomposition dec;
  dec.subdomain_of_triangle = std::move(labels);
  dec.interface_nodes.assign(path.begin() + 1, path.end() - 1);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) dec.interface_edges.push_back({path[k], path[k + 1]});
  dec.local[0] = make_local_map(mesh, dec.subdomain_of_triangle, 1, dec.interface_nodes);
  dec.local[1] = make_local_map(mesh, dec.subdomain_of_triangle, 2, dec.interface_nodes);
  return dec;
}

}  // namespace nldd
