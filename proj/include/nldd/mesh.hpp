#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace nldd {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using NodeId = int;
using Triangle = std::array<NodeId, 3>;

/// Structured triangulation of [0, width] x [0, height]. Each h x h cell is
/// split along its bottom-left to top-right diagonal; triangles are
/// counterclockwise. Node (i, j) has index j * (nx + 1) + i.
class TriMesh {
 public:
  TriMesh() = default;

  [[nodiscard]] const std::vector<Point>& nodes() const noexcept { return nodes_; }
  [[nodiscard]] const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  [[nodiscard]] const std::vector<bool>& on_boundary() const noexcept { return on_boundary_; }
  [[nodiscard]] std::vector<NodeId> boundary_nodes() const;

  [[nodiscard]] std::size_t num_nodes() const noexcept { return nodes_.size(); }
  [[nodiscard]] std::size_t num_triangles() const noexcept { return triangles_.size(); }

  [[nodiscard]] int nx() const noexcept { return nx_; }
  [[nodiscard]] int ny() const noexcept { return ny_; }
  [[nodiscard]] double width() const noexcept { return width_; }
  [[nodiscard]] double height() const noexcept { return height_; }
  [[nodiscard]] double h() const noexcept { return h_; }

  [[nodiscard]] NodeId node_at(int i, int j) const noexcept { return j * (nx_ + 1) + i; }
  /// Index of the grid node at p, or -1 when p is not a grid point.
  [[nodiscard]] NodeId find_node(Point p) const noexcept;

  /// Plain-text export: one "x y" line per node, one "i j k" line per
  /// triangle (zero-based).
  void write_nodes(std::ostream& os) const;
  void write_triangles(std::ostream& os) const;

  friend TriMesh build_rect_mesh(double width, double height, double h);

 private:
  std::vector<Point> nodes_;
  std::vector<Triangle> triangles_;
  std::vector<bool> on_boundary_;
  int nx_ = 0;
  int ny_ = 0;
  double width_ = 0.0;
  double height_ = 0.0;
  double h_ = 0.0;
};

/// Throws Error(NonIntegerSubdivision) unless h divides both sides.
[[nodiscard]] TriMesh build_rect_mesh(double width, double height, double h);

/// Degree-of-freedom numbering for one triangle subset: nodes touched by the
/// subset minus Dirichlet (boundary) nodes, interior block first, interface
/// block last in interface order.
struct DofMap {
  std::vector<std::size_t> triangles;        // indices into TriMesh::triangles()
  std::vector<NodeId> local_to_global;
  std::vector<int> global_to_local;          // -1 for nodes not in the map
  int num_interior = 0;
  int num_interface = 0;

  [[nodiscard]] int size() const noexcept { return num_interior + num_interface; }
};

/// Full-domain numbering: every non-boundary node, no interface block.
[[nodiscard]] DofMap global_dof_map(const TriMesh& mesh);

struct Decomposition {
  std::vector<int> subdomain_of_triangle;    // 1 or 2
  std::vector<NodeId> interface_nodes;       // ordered along the interface
  /// Consecutive interface segments, including the ones ending on the
  /// outer boundary.
  std::vector<std::array<NodeId, 2>> interface_edges;
  std::array<DofMap, 2> local;               // local[0] is subdomain 1

  [[nodiscard]] const DofMap& side(int s) const { return local.at(static_cast<std::size_t>(s - 1)); }
  [[nodiscard]] std::size_t num_interface() const noexcept { return interface_nodes.size(); }
};

/// Straight cut at x = x_cut; left triangles are subdomain 1.
[[nodiscard]] Decomposition decompose_vertical(const TriMesh& mesh, double x_cut);

/// Cut along a polyline of grid points joined by horizontal or vertical runs
/// of mesh edges, from one boundary point to another. Subdomain 1 is the side
/// containing the corner (0, 0).
[[nodiscard]] Decomposition decompose_staircase(const TriMesh& mesh, const std::vector<Point>& polyline);

}  // namespace nldd
