#include "topo/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace topo {

Lattice::Lattice(std::vector<Site> sites, std::string name)
    : sites_(std::move(sites)), name_(std::move(name)) {
  if (sites_.empty()) throw config_error("lattice has no sites");
  orb_offset_.resize(sites_.size());
  box_min_ = box_max_ = sites_[0].pos;
  int off = 0;
  for (size_t j = 0; j < sites_.size(); ++j) {
    if (sites_[j].orbitals < 1) throw config_error("orbital count must be >= 1");
    orb_offset_[j] = off;
    off += sites_[j].orbitals;
    box_min_.x = std::min(box_min_.x, sites_[j].pos.x);
    box_min_.y = std::min(box_min_.y, sites_[j].pos.y);
    box_max_.x = std::max(box_max_.x, sites_[j].pos.x);
    box_max_.y = std::max(box_max_.y, sites_[j].pos.y);
  }
  total_orbitals_ = off;
  orb_site_.resize(off);
  for (size_t j = 0; j < sites_.size(); ++j)
    for (int a = 0; a < sites_[j].orbitals; ++a) orb_site_[orb_offset_[j] + a] = static_cast<int>(j);

  min_spacing_ = inf;
  for (size_t j = 0; j < sites_.size(); ++j)
    for (size_t k = j + 1; k < sites_.size(); ++k)
      min_spacing_ = std::min(min_spacing_, dist(sites_[j].pos, sites_[k].pos));
  if (sites_.size() > 1 && min_spacing_ < 1e-9)
    throw config_error("duplicate site positions in lattice");
  if (sites_.size() == 1) min_spacing_ = 1.0;
}

double Lattice::boundary_margin(Vec2 p) const {
  double mx = std::min(p.x - box_min_.x, box_max_.x - p.x);
  double my = std::min(p.y - box_min_.y, box_max_.y - p.y);
  return std::min(mx, my);
}

Lattice build_lattice(const LatticeSpec& spec) {
  if (spec.lx < 1 || spec.ly < 1) throw config_error("lattice extent must be >= 1");
  if (spec.orbitals_per_site < 1) throw config_error("orbital count must be >= 1");
  const double a = spec.spacing;
  if (a <= 0.0) throw config_error("spacing must be positive");

  std::vector<Site> sites;
  switch (spec.kind) {
    case LatticeSpec::Kind::Square:
      sites.reserve(static_cast<size_t>(spec.lx) * spec.ly);
      for (int y = 0; y < spec.ly; ++y)
        for (int x = 0; x < spec.lx; ++x)
          sites.push_back({{a * x, a * y}, spec.orbitals_per_site});
      return Lattice(std::move(sites), "square");
    case LatticeSpec::Kind::Chain:
      if (spec.ly != 1) throw config_error("chain lattice requires ly = 1");
      for (int x = 0; x < spec.lx; ++x) sites.push_back({{a * x, 0.0}, spec.orbitals_per_site});
      return Lattice(std::move(sites), "chain");
    case LatticeSpec::Kind::Honeycomb: {
      // Two sites per cell; nearest-neighbour distance a / sqrt(3).
      const Vec2 a1{a, 0.0};
      const Vec2 a2{0.5 * a, 0.5 * std::sqrt(3.0) * a};
      const Vec2 delta{0.5 * a, 0.5 * a / std::sqrt(3.0)};
      sites.reserve(2 * static_cast<size_t>(spec.lx) * spec.ly);
      for (int y = 0; y < spec.ly; ++y)
        for (int x = 0; x < spec.lx; ++x) {
          Vec2 cell = static_cast<double>(x) * a1 + static_cast<double>(y) * a2;
          sites.push_back({cell, spec.orbitals_per_site});
          sites.push_back({cell + delta, spec.orbitals_per_site});
        }
      return Lattice(std::move(sites), "honeycomb");
    }
  }
  throw config_error("unknown lattice kind");
}

Region::Region(const Lattice& lat, std::vector<int> members)
    : lattice_(&lat), members_(std::move(members)), mask_(lat.num_sites(), 0) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  for (int j : members_) {
    if (j < 0 || j >= lat.num_sites()) throw config_error("region site id out of range");
    mask_[j] = 1;
  }
}

Region Region::complement() const {
  std::vector<int> out;
  out.reserve(lattice_->num_sites() - members_.size());
  for (int j = 0; j < lattice_->num_sites(); ++j)
    if (!mask_[j]) out.push_back(j);
  return Region(*lattice_, std::move(out));
}

Region Region::intersect(const Region& other) const {
  std::vector<int> out;
  for (int j : members_)
    if (other.contains(j)) out.push_back(j);
  return Region(*lattice_, std::move(out));
}

Region Region::unite(const Region& other) const {
  std::vector<int> out = members_;
  for (int j : other.members_)
    if (!contains(j)) out.push_back(j);
  return Region(*lattice_, std::move(out));
}

Region Region::minus(const Region& other) const {
  std::vector<int> out;
  for (int j : members_)
    if (!other.contains(j)) out.push_back(j);
  return Region(*lattice_, std::move(out));
}

Region full_region(const Lattice& lat) {
  std::vector<int> all(lat.num_sites());
  for (int j = 0; j < lat.num_sites(); ++j) all[j] = j;
  return Region(lat, std::move(all));
}

Region empty_region(const Lattice& lat) { return Region(lat, {}); }

Region half_plane(const Lattice& lat, char axis, double offset) {
  if (axis != 'x' && axis != 'y') throw config_error("half_plane axis must be 'x' or 'y'");
  std::vector<int> out;
  for (int j = 0; j < lat.num_sites(); ++j) {
    double c = (axis == 'x') ? lat.pos(j).x : lat.pos(j).y;
    if (c > offset) out.push_back(j);
  }
  return Region(lat, std::move(out));
}

Region half_plane_left_of(const Lattice& lat, Vec2 a, Vec2 b) {
  Vec2 d = b - a;
  if (norm(d) < 1e-12) throw config_error("degenerate line in half_plane_left_of");
  std::vector<int> out;
  for (int j = 0; j < lat.num_sites(); ++j)
    if (cross(d, lat.pos(j) - a) > 0.0) out.push_back(j);
  return Region(lat, std::move(out));
}

Region disk(const Lattice& lat, Vec2 center, double radius) {
  std::vector<int> out;
  for (int j = 0; j < lat.num_sites(); ++j)
    if (dist(lat.pos(j), center) < radius) out.push_back(j);
  return Region(lat, std::move(out));
}

Region annulus(const Lattice& lat, Vec2 center, double r_in, double r_out) {
  if (r_in >= r_out) throw config_error("annulus requires r_in < r_out");
  std::vector<int> out;
  for (int j = 0; j < lat.num_sites(); ++j) {
    double d = dist(lat.pos(j), center);
    if (d >= r_in && d < r_out) out.push_back(j);
  }
  return Region(lat, std::move(out));
}

Region segment_strip(const Lattice& lat, Vec2 a, Vec2 b, double w) {
  Vec2 d = b - a;
  double len2 = dot(d, d);
  std::vector<int> out;
  for (int j = 0; j < lat.num_sites(); ++j) {
    Vec2 p = lat.pos(j);
    double t = len2 > 0.0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
    if (dist(p, a + t * d) <= w) out.push_back(j);
  }
  return Region(lat, std::move(out));
}

namespace {
double wrap_angle(double t) {
  t = std::fmod(t, 2.0 * pi);
  if (t < 0.0) t += 2.0 * pi;
  return t;
}
}  // namespace

TriplePartition triple_partition(const Lattice& lat, Vec2 p,
                                 std::array<double, 3> ray_angles, int orientation,
                                 double theta_min) {
  if (orientation != 1 && orientation != -1)
    throw config_error("orientation must be +1 or -1");
  if (lat.boundary_margin(p) < 0.0) throw config_error("junction outside bounding box");
  for (int j = 0; j < lat.num_sites(); ++j)
    if (dist(lat.pos(j), p) < 1e-9)
      throw config_error("junction coincides with a lattice site");

  std::array<double, 3> r{wrap_angle(ray_angles[0]), wrap_angle(ray_angles[1]),
                          wrap_angle(ray_angles[2])};
  // Counterclockwise sector widths starting from each ray, in listed order.
  std::array<double, 3> width;
  for (int i = 0; i < 3; ++i) width[i] = wrap_angle(r[(i + 1) % 3] - r[i]);
  if (std::abs(width[0] + width[1] + width[2] - 2.0 * pi) > 1e-9)
    throw config_error("rays must be listed in counterclockwise cyclic order");
  for (double w : width)
    if (w <= theta_min) throw config_error("ray separation below theta_min");

  std::array<std::vector<int>, 3> members;
  for (int j = 0; j < lat.num_sites(); ++j) {
    Vec2 d = lat.pos(j) - p;
    double t = wrap_angle(std::atan2(d.y, d.x) - r[0]);
    int sector = (t < width[0]) ? 0 : (t < width[0] + width[1] ? 1 : 2);
    members[sector].push_back(j);
  }

  TriplePartition out;
  out.junction = p;
  out.orientation = orientation;
  out.ray_angles = r;
  if (orientation == +1) {
    out.a = Region(lat, std::move(members[0]));
    out.b = Region(lat, std::move(members[1]));
    out.c = Region(lat, std::move(members[2]));
  } else {
    // Clockwise cyclic order A -> B -> C: swap the roles of B and C.
    out.a = Region(lat, std::move(members[0]));
    out.b = Region(lat, std::move(members[2]));
    out.c = Region(lat, std::move(members[1]));
  }
  return out;
}

}  // namespace topo
