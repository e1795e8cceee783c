#include "twisttube/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "twisttube/errors.hpp"

namespace twisttube {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(Point a, Point b, Point p) {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  const double tol = 1e-12 * std::max(1.0, len);
  if (std::abs(cross(a, b, p)) > tol * std::max(1.0, len)) return false;
  return p.x >= std::min(a.x, b.x) - tol && p.x <= std::max(a.x, b.x) + tol &&
         p.y >= std::min(a.y, b.y) - tol && p.y <= std::max(a.y, b.y) + tol;
}

int orientation(Point a, Point b, Point c) {
  const double v = cross(a, b, c);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

Ring closed_stripped(const Ring& ring) {
  Ring r = ring;
  if (r.size() >= 2 && r.front().x == r.back().x && r.front().y == r.back().y) {
    r.pop_back();
  }
  return r;
}

Ring zigzag(int level, double outer_radius, double inner_radius) {
  const int rays = 1 << (level + 2);
  const double step = std::numbers::pi / static_cast<double>(1 << (level + 1));
  Ring ring;
  ring.reserve(rays);
  for (int j = 0; j < rays; ++j) {
    const double r = (j % 2 == 0) ? outer_radius : inner_radius;
    const double phi = step * j;
    ring.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  return ring;
}

void validate_ring(const Ring& raw, const char* what) {
  const Ring ring = closed_stripped(raw);
  if (ring.size() < 3) {
    throw InvalidSpec(fmt::format("{} ring needs at least 3 vertices", what));
  }
  for (const auto& p : ring) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw InvalidSpec(fmt::format("{} ring has a non-finite vertex", what));
    }
  }
  if (!ring_is_simple(ring)) {
    throw InvalidSpec(fmt::format("{} ring is self-intersecting", what));
  }
}

}  // namespace

CrossSection::CrossSection(double h, int half_extent, std::vector<GridNode> nodes,
                           std::vector<LinkFractions> fractions)
    : h_(h), half_extent_(half_extent), nodes_(std::move(nodes)), fractions_(std::move(fractions)) {
  if (fractions_.empty()) fractions_.assign(nodes_.size(), LinkFractions{1.0, 1.0, 1.0, 1.0});
  if (fractions_.size() != nodes_.size()) {
    throw InvalidSpec("one set of boundary fractions per node is required");
  }
  const int width = 2 * half_extent_ + 1;
  index_.assign(static_cast<std::size_t>(width) * width, -1);
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const auto& n = nodes_[k];
    index_[static_cast<std::size_t>(n.j + half_extent_) * width + (n.i + half_extent_)] =
        static_cast<int>(k);
    radius_ = std::max(radius_, std::hypot(n.t2, n.t3));
  }
}

int CrossSection::index(int i, int j) const {
  if (std::abs(i) > half_extent_ || std::abs(j) > half_extent_) return -1;
  const int width = 2 * half_extent_ + 1;
  return index_[static_cast<std::size_t>(j + half_extent_) * width + (i + half_extent_)];
}

int CrossSection::neighbor(std::size_t k, Link link) const {
  static constexpr int di[4] = {1, -1, 0, 0};
  static constexpr int dj[4] = {0, 0, 1, -1};
  const auto d = static_cast<int>(link);
  return index(nodes_[k].i + di[d], nodes_[k].j + dj[d]);
}

Point CrossSection::box_min() const {
  return {-half_extent_ * h_, -half_extent_ * h_};
}

Point CrossSection::box_max() const {
  return {half_extent_ * h_, half_extent_ * h_};
}

bool CrossSection::is_deep(std::size_t k) const {
  const auto& n = nodes_[k];
  for (int dj = -2; dj <= 2; ++dj) {
    for (int di = -2; di <= 2; ++di) {
      if (!contains(n.i + di, n.j + dj)) return false;
    }
  }
  return true;
}

bool on_ring_boundary(const Ring& raw, Point p) {
  const Ring ring = closed_stripped(raw);
  for (std::size_t a = 0; a < ring.size(); ++a) {
    const Point& u = ring[a];
    const Point& v = ring[(a + 1) % ring.size()];
    if (on_segment(u, v, p)) return true;
  }
  return false;
}

bool ring_contains(const Ring& raw, Point p) {
  const Ring ring = closed_stripped(raw);
  if (on_ring_boundary(ring, p)) return false;
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t a = 0, b = n - 1; a < n; b = a++) {
    const Point& u = ring[a];
    const Point& v = ring[b];
    if ((u.y > p.y) != (v.y > p.y)) {
      const double x_cross = (v.x - u.x) * (p.y - u.y) / (v.y - u.y) + u.x;
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool ring_is_simple(const Ring& raw) {
  const Ring ring = closed_stripped(raw);
  const std::size_t n = ring.size();
  if (n < 3) return false;
  double twice_area = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    const Point& u = ring[a];
    const Point& v = ring[(a + 1) % n];
    twice_area += u.x * v.y - v.x * u.y;
  }
  if (twice_area == 0.0) return false;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const bool adjacent = (b == a + 1) || (a == 0 && b == n - 1);
      if (adjacent) continue;
      if (segments_intersect(ring[a], ring[(a + 1) % n], ring[b], ring[(b + 1) % n])) {
        return false;
      }
    }
  }
  return true;
}

Ring ribbon_outer_ring(int level) { return zigzag(level, 2.0, 1.0); }

Ring ribbon_inner_ring(int level, double width) {
  return zigzag(level, 2.0 - width, 1.0 - width);
}

void validate(const ShapeSpec& spec) {
  std::visit(overloaded{
                 [](const shape::Disc&) {},
                 [](const shape::Ellipse& e) {
                   if (!(e.eps >= 0.0) || !std::isfinite(e.eps)) {
                     throw InvalidSpec(fmt::format("ellipse eps must be >= 0, got {}", e.eps));
                   }
                 },
                 [](const shape::Ribbon& r) {
                   if (r.level < 1 || r.level > 12) {
                     throw InvalidSpec(
                         fmt::format("ribbon level must be in [1, 12], got {}", r.level));
                   }
                   if (!(r.width > 0.0 && r.width < 1.0)) {
                     throw InvalidSpec(
                         fmt::format("ribbon width must lie in (0, 1), got {}", r.width));
                   }
                 },
                 [](const shape::PolygonWithHoles& p) {
                   validate_ring(p.outer, "outer");
                   for (const auto& hole : p.holes) validate_ring(hole, "hole");
                 },
             },
             spec);
}

bool shape_contains(const ShapeSpec& spec, Point p) {
  return std::visit(
      overloaded{
          [&](const shape::Disc&) { return p.x * p.x + p.y * p.y < 1.0; },
          [&](const shape::Ellipse& e) {
            const double a = 1.0 + e.eps;
            return a * a * p.x * p.x + p.y * p.y < 1.0;
          },
          [&](const shape::Ribbon& r) {
            return ring_contains(ribbon_outer_ring(r.level), p) &&
                   !ring_contains(ribbon_inner_ring(r.level, r.width), p) &&
                   !on_ring_boundary(ribbon_inner_ring(r.level, r.width), p);
          },
          [&](const shape::PolygonWithHoles& poly) {
            if (!ring_contains(poly.outer, p)) return false;
            for (const auto& hole : poly.holes) {
              if (ring_contains(hole, p) || on_ring_boundary(hole, p)) return false;
            }
            return true;
          },
      },
      spec);
}

double analytic_radius(const ShapeSpec& spec) {
  return std::visit(overloaded{
                        [](const shape::Disc&) { return 1.0; },
                        [](const shape::Ellipse&) { return 1.0; },
                        [](const shape::Ribbon&) { return 2.0; },
                        [](const shape::PolygonWithHoles& p) {
                          double r = 0.0;
                          for (const auto& v : p.outer) r = std::max(r, std::hypot(v.x, v.y));
                          return r;
                        },
                    },
                    spec);
}

CrossSection build_cross_section(const ShapeSpec& spec, double h, BoundaryTreatment treatment) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw InvalidSpec(fmt::format("grid spacing h must be positive, got {}", h));
  }
  validate(spec);

  const double extent = analytic_radius(spec);
  const int half = static_cast<int>(std::ceil(extent / h)) + 1;

  // Ribbon rings are built once instead of per node.
  const shape::Ribbon* ribbon = std::get_if<shape::Ribbon>(&spec);
  Ring outer;
  Ring inner;
  if (ribbon != nullptr) {
    outer = ribbon_outer_ring(ribbon->level);
    inner = ribbon_inner_ring(ribbon->level, ribbon->width);
  }

  const auto member = [&](Point p) {
    if (ribbon != nullptr) {
      return ring_contains(outer, p) && !ring_contains(inner, p) && !on_ring_boundary(inner, p);
    }
    return shape_contains(spec, p);
  };

  std::vector<GridNode> nodes;
  for (int j = -half; j <= half; ++j) {
    for (int i = -half; i <= half; ++i) {
      const Point p{i * h, j * h};
      if (member(p)) nodes.push_back({i, j, p.x, p.y});
    }
  }
  if (nodes.empty()) {
    throw EmptyMask(fmt::format("no grid node at spacing h={} lies inside the shape", h));
  }

  if (treatment == BoundaryTreatment::staircase) return CrossSection(h, half, std::move(nodes));
  CrossSection staircase(h, half, nodes);
  std::vector<CrossSection::LinkFractions> fractions(nodes.size());
  static constexpr int di[4] = {1, -1, 0, 0};
  static constexpr int dj[4] = {0, 0, 1, -1};
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    for (int d = 0; d < 4; ++d) {
      fractions[k][d] = 1.0;
      if (staircase.neighbor(k, static_cast<Link>(d)) >= 0) continue;
      // Bisection for a boundary crossing along the link.
      double lo = 0.0;
      double hi = 1.0;
      for (int it = 0; it < 52; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (member({nodes[k].t2 + mid * di[d] * h, nodes[k].t3 + mid * dj[d] * h})) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      fractions[k][d] = hi;
    }
  }
  return CrossSection(h, half, std::move(nodes), std::move(fractions));
}

double radius(const CrossSection& cs) { return cs.radius(); }

void write_cross_section_csv(const CrossSection& cs, std::ostream& out) {
  out << "i,j,t2,t3\n";
  for (const auto& n : cs.nodes()) {
    out << fmt::format("{},{},{:.17g},{:.17g}\n", n.i, n.j, n.t2, n.t3);
  }
}

}  // namespace twisttube
