#pragma once

#include <array>
#include <iosfwd>
#include <variant>
#include <vector>

namespace twisttube {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

using Ring = std::vector<Point>;

namespace shape {

struct Disc {};

// Elliptic disc (1+eps)^2 x^2 + y^2 < 1. eps == 0 degenerates to the disc.
struct Ellipse {
  double eps = 0.0;
};

// Zigzag annular ribbon of the given level with radial band width.
struct Ribbon {
  int level = 1;
  double width = 0.1;
};

// Even-odd filled outer ring minus holes. Rings are implicitly closed.
struct PolygonWithHoles {
  Ring outer;
  std::vector<Ring> holes;
};

}  // namespace shape

using ShapeSpec =
    std::variant<shape::Disc, shape::Ellipse, shape::Ribbon, shape::PolygonWithHoles>;

struct GridNode {
  int i = 0;  // t2 = i * h
  int j = 0;  // t3 = j * h
  double t2 = 0.0;
  double t3 = 0.0;
};

// Grid directions of the four nearest-neighbour links.
enum class Link { east = 0, west = 1, north = 2, south = 3 };  // +i, -i, +j, -j

// Masked uniform grid centred at the origin. Nodes are stored row-major
// (j outer, i inner) so assembly order is reproducible.
//
// For every link that leaves the mask the cross section also records the
// fraction theta in (0, 1] of the spacing at which the link meets the
// continuum boundary; theta = 1 places the boundary on the exterior node.
class CrossSection {
 public:
  using LinkFractions = std::array<double, 4>;

  // Boundary fractions default to 1 (pure staircase).
  CrossSection(double h, int half_extent, std::vector<GridNode> nodes,
               std::vector<LinkFractions> fractions = {});

  double spacing() const { return h_; }
  int half_extent() const { return half_extent_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<GridNode>& nodes() const { return nodes_; }
  const GridNode& node(std::size_t k) const { return nodes_[k]; }

  // Dense index of grid point (i, j), or -1 when it is outside the mask.
  int index(int i, int j) const;
  bool contains(int i, int j) const { return index(i, j) >= 0; }

  // Neighbour index along `link`, or -1 when the link leaves the mask.
  int neighbor(std::size_t k, Link link) const;
  // Boundary fraction of an exterior link (1 for interior links).
  double boundary_fraction(std::size_t k, Link link) const {
    return fractions_[k][static_cast<int>(link)];
  }

  double radius() const { return radius_; }
  double area() const { return static_cast<double>(nodes_.size()) * h_ * h_; }

  // Lower-left and upper-right corners of the grid box.
  Point box_min() const;
  Point box_max() const;

  // True when every grid point within the 5x5 block around node k is interior,
  // i.e. the continuum boundary is at least 2h away.
  bool is_deep(std::size_t k) const;

 private:
  double h_;
  int half_extent_;
  std::vector<GridNode> nodes_;
  std::vector<LinkFractions> fractions_;
  std::vector<int> index_;
  double radius_ = 0.0;
};

// Exact membership predicate of the continuum shape (strict interior).
bool shape_contains(const ShapeSpec& spec, Point p);

// Validates the shape invariants; throws InvalidSpec.
void validate(const ShapeSpec& spec);

// Supremum of |t| over the continuum shape.
double analytic_radius(const ShapeSpec& spec);

// How links leaving the mask see the boundary.
enum class BoundaryTreatment {
  // Boundary fractions found by bisection on the shape predicate; gives
  // second-order eigenvalues.
  fitted,
  // All fractions 1: the boundary sits on the first exterior node.
  staircase,
};

CrossSection build_cross_section(const ShapeSpec& spec, double h,
                                 BoundaryTreatment treatment = BoundaryTreatment::fitted);

double radius(const CrossSection& cs);

// Outer and inner zigzag polygons of the ribbon of the given level.
Ring ribbon_outer_ring(int level);
Ring ribbon_inner_ring(int level, double width);

// Even-odd point-in-polygon test; points on an edge count as outside.
bool ring_contains(const Ring& ring, Point p);
bool on_ring_boundary(const Ring& ring, Point p);
bool ring_is_simple(const Ring& ring);

// CSV with columns i,j,t2,t3.
void write_cross_section_csv(const CrossSection& cs, std::ostream& out);

}  // namespace twisttube
