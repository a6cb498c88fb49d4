#pragma once

#include <array>
#include <string>
#include <vector>

#include "topo/common.hpp"

namespace topo {

// ---------------------------------------------------------------------------
// Finite 2d-embedded lattices, regions, and triple-junction partitions.
// All geometry queries used by the transport formulas flow through here.
// ---------------------------------------------------------------------------

struct LatticeSpec {
  enum class Kind { Square, Honeycomb, Chain };
  Kind kind = Kind::Square;
  int lx = 1;
  int ly = 1;
  int orbitals_per_site = 1;
  double spacing = 1.0;
};

struct Site {
  Vec2 pos;
  int orbitals = 1;
};

class Lattice {
 public:
  Lattice(std::vector<Site> sites, std::string name);

  int num_sites() const { return static_cast<int>(sites_.size()); }
  const Site& site(int j) const { return sites_[j]; }
  Vec2 pos(int j) const { return sites_[j].pos; }
  int orbitals(int j) const { return sites_[j].orbitals; }

  // First matrix index of site j; site j owns [offset, offset + orbitals).
  int orbital_offset(int j) const { return orb_offset_[j]; }
  int total_orbitals() const { return total_orbitals_; }
  int site_of_orbital(int a) const { return orb_site_[a]; }

  Vec2 box_min() const { return box_min_; }
  Vec2 box_max() const { return box_max_; }
  Vec2 center() const { return 0.5 * (box_min_ + box_max_); }
  double min_spacing() const { return min_spacing_; }
  const std::string& name() const { return name_; }

  // Distance from a point to the bounding box edge (inside positive).
  double boundary_margin(Vec2 p) const;

 private:
  std::vector<Site> sites_;
  std::vector<int> orb_offset_;
  std::vector<int> orb_site_;
  int total_orbitals_ = 0;
  Vec2 box_min_, box_max_;
  double min_spacing_ = 0.0;
  std::string name_;
};

Lattice build_lattice(const LatticeSpec& spec);

class Region {
 public:
  Region() = default;
  Region(const Lattice& lat, std::vector<int> members);

  const Lattice& lattice() const { return *lattice_; }
  bool contains(int j) const { return mask_[j] != 0; }
  const std::vector<int>& sites() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool empty() const { return members_.empty(); }

  Region complement() const;
  Region intersect(const Region& other) const;
  Region unite(const Region& other) const;
  Region minus(const Region& other) const;

 private:
  const Lattice* lattice_ = nullptr;
  std::vector<int> members_;     // sorted ascending
  std::vector<char> mask_;
};

Region full_region(const Lattice& lat);
Region empty_region(const Lattice& lat);

// Sites with coordinate along `axis` ('x' or 'y') strictly greater than offset.
Region half_plane(const Lattice& lat, char axis, double offset);
// Sites strictly left of the directed line a -> b.
Region half_plane_left_of(const Lattice& lat, Vec2 a, Vec2 b);
Region disk(const Lattice& lat, Vec2 center, double radius);
Region annulus(const Lattice& lat, Vec2 center, double r_in, double r_out);
// Sites within distance w of the segment [a, b].
Region segment_strip(const Lattice& lat, Vec2 a, Vec2 b, double w);

// Three noncompact angular sectors meeting at a junction point. The sectors
// are half-open in the counterclockwise direction, so sites exactly on a ray
// belong to the sector counterclockwise of it.
struct TriplePartition {
  Vec2 junction;
  Region a, b, c;
  int orientation = +1;  // +1: cyclic order A -> B -> C counterclockwise
  std::array<double, 3> ray_angles{};

  const Region& region(int idx) const { return idx == 0 ? a : (idx == 1 ? b : c); }
};

inline constexpr double default_theta_min = pi / 6.0;  // 30 degrees

TriplePartition triple_partition(const Lattice& lat, Vec2 p,
                                 std::array<double, 3> ray_angles,
                                 int orientation = +1,
                                 double theta_min = default_theta_min);

}  // namespace topo
