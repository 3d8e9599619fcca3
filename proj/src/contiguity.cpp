#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "srpanova/error.hpp"
#include "srpanova/region_graph.hpp"

namespace srp {

namespace {

struct Box {
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(const Point& p) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  bool overlaps(const Box& o, double tol) const {
    return x0 <= o.x1 + tol && o.x0 <= x1 + tol && y0 <= o.y1 + tol && o.y0 <= y1 + tol;
  }
};

struct Segment {
  Point a, b;
  Box box;
};

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dist_point_segment(const Point& p, const Segment& s) {
  const double dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (s.a.x + t * dx), p.y - (s.a.y + t * dy));
}

bool touches(const Segment& s, const Segment& t, double tol) {
  if (!s.box.overlaps(t.box, tol)) return false;
  const double d1 = cross(s.a, s.b, t.a), d2 = cross(s.a, s.b, t.b);
  const double d3 = cross(t.a, t.b, s.a), d4 = cross(t.a, t.b, s.b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  return dist_point_segment(t.a, s) <= tol || dist_point_segment(t.b, s) <= tol ||
         dist_point_segment(s.a, t) <= tol || dist_point_segment(s.b, t) <= tol;
}

// Length of the collinear overlap of two segments, 0 when not collinear.
double shared_length(const Segment& s, const Segment& t, double tol) {
  if (!s.box.overlaps(t.box, tol)) return 0.0;
  const double len = std::hypot(s.b.x - s.a.x, s.b.y - s.a.y);
  if (len <= tol) return 0.0;
  if (std::abs(cross(s.a, s.b, t.a)) / len > tol || std::abs(cross(s.a, s.b, t.b)) / len > tol) {
    return 0.0;
  }
  const double ux = (s.b.x - s.a.x) / len, uy = (s.b.y - s.a.y) / len;
  auto proj = [&](const Point& p) { return (p.x - s.a.x) * ux + (p.y - s.a.y) * uy; };
  double lo = std::min(proj(t.a), proj(t.b));
  double hi = std::max(proj(t.a), proj(t.b));
  return std::max(0.0, std::min(hi, len) - std::max(lo, 0.0));
}

struct Prepared {
  Box box;
  std::vector<Segment> segments;
};

double ring_area(const Ring& r) {
  double a = 0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) a += r[i].x * r[i + 1].y - r[i + 1].x * r[i].y;
  return 0.5 * a;
}

Prepared prepare(const RegionGeometry& g, double tol) {
  if (g.polygons.empty()) throw InputError("empty geometry for region '" + g.region_id + "'");
  Prepared p;
  for (const auto& poly : g.polygons) {
    if (poly.empty()) throw InputError("empty polygon for region '" + g.region_id + "'");
    for (std::size_t r = 0; r < poly.size(); ++r) {
      Ring ring = poly[r];
      if (ring.size() >= 2 && (ring.front().x != ring.back().x || ring.front().y != ring.back().y)) {
        ring.push_back(ring.front());
      }
      if (ring.size() < 4) {
        throw InputError("invalid geometry for region '" + g.region_id +
                         "': ring with fewer than 3 distinct points");
      }
      for (const auto& pt : ring) {
        if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) {
          throw InputError("invalid geometry for region '" + g.region_id +
                           "': non-finite coordinate");
        }
      }
      if (r == 0 && std::abs(ring_area(ring)) <= tol * tol) {
        throw InputError("invalid geometry for region '" + g.region_id + "': zero-area ring");
      }
      for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
        Segment s{ring[i], ring[i + 1], {}};
        s.box.add(s.a);
        s.box.add(s.b);
        p.box.add(s.a);
        p.segments.push_back(s);
      }
    }
  }
  return p;
}

}  // namespace

ContiguityRule parse_contiguity_rule(const std::string& s) {
  if (s == "queen") return ContiguityRule::queen;
  if (s == "rook") return ContiguityRule::rook;
  throw InputError("unknown contiguity rule '" + s + "' (expected queen or rook)");
}

std::vector<EdgeRecord> contiguity_from_polygons(const std::vector<RegionGeometry>& geometries,
                                                 ContiguityRule rule, double tolerance) {
  std::vector<Prepared> prepared;
  prepared.reserve(geometries.size());
  for (const auto& g : geometries) prepared.push_back(prepare(g, tolerance));

  std::vector<EdgeRecord> edges;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    for (std::size_t j = i + 1; j < prepared.size(); ++j) {
      const auto& a = prepared[i];
      const auto& b = prepared[j];
      if (!a.box.overlaps(b.box, tolerance)) continue;
      std::vector<const Segment*> sa, sb;
      for (const auto& s : a.segments) {
        if (s.box.overlaps(b.box, tolerance)) sa.push_back(&s);
      }
      for (const auto& s : b.segments) {
        if (s.box.overlaps(a.box, tolerance)) sb.push_back(&s);
      }
      bool linked = false;
      for (const auto* s : sa) {
        for (const auto* t : sb) {
          linked = rule == ContiguityRule::queen ? touches(*s, *t, tolerance)
                                                 : shared_length(*s, *t, tolerance) > tolerance;
          if (linked) break;
        }
        if (linked) break;
      }
      if (linked) edges.emplace_back(geometries[i].region_id, geometries[j].region_id);
    }
  }
  return edges;
}

std::vector<RegionGeometry> read_geojson_geometries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
  if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features")) {
    throw InputError(path.string() + ": expected a GeoJSON FeatureCollection");
  }
  auto ring_of = [](const nlohmann::json& j) {
    Ring r;
    for (const auto& c : j) r.push_back(Point{c.at(0).get<double>(), c.at(1).get<double>()});
    return r;
  };
  std::vector<RegionGeometry> out;
  std::size_t n = 0;
  for (const auto& f : doc["features"]) {
    ++n;
    const auto& props = f.value("properties", nlohmann::json::object());
    if (!props.is_object() || !props.contains("region_id")) {
      throw InputError(path.string() + ": feature " + std::to_string(n) +
                       " lacks a region_id property");
    }
    RegionGeometry g;
    g.region_id = props["region_id"].is_string() ? props["region_id"].get<std::string>()
                                                 : props["region_id"].dump();
    const auto& geom = f.value("geometry", nlohmann::json());
    if (geom.is_null()) throw InputError("empty geometry for region '" + g.region_id + "'");
    try {
      const auto type = geom.at("type").get<std::string>();
      const auto& coords = geom.at("coordinates");
      if (type == "Polygon") {
        std::vector<Ring> poly;
        for (const auto& r : coords) poly.push_back(ring_of(r));
        g.polygons.push_back(std::move(poly));
      } else if (type == "MultiPolygon") {
        for (const auto& p : coords) {
          std::vector<Ring> poly;
          for (const auto& r : p) poly.push_back(ring_of(r));
          g.polygons.push_back(std::move(poly));
        }
      } else {
        throw InputError("invalid geometry for region '" + g.region_id + "': type " + type);
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError("invalid geometry for region '" + g.region_id + "': " + e.what());
    }
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace srp
