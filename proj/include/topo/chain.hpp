#pragma once

#include <array>
#include <map>
#include <optional>
#include <vector>

#include "topo/lattice.hpp"

namespace topo {

// ---------------------------------------------------------------------------
// Operator-valued n-chains (n = 0, 1, 2) over a finite lattice.
//
// Entries are stored once per sorted site tuple; reads apply the permutation
// sign, so skew-symmetry holds exactly. Absent tuples are zero. Tuples whose
// diameter exceeds the cutoff radius are never stored. Sums (boundary map,
// region restrictions) always run in ascending tuple order so results are
// bit-reproducible.
// ---------------------------------------------------------------------------

template <class Op>
struct op_traits;  // axpy / commutator / norm, specialized per backend

template <>
struct op_traits<double> {
  static void axpy(double& acc, double c, double x) { acc += c * x; }
  static double commutator(double, double) { return 0.0; }
  static double norm(double x) { return std::abs(x); }
};

using SiteTuple = std::array<int, 3>;  // unused slots = -1

template <class Op>
class NChain {
 public:
  NChain(int degree, const Lattice& lat, Op zero, double cutoff = inf)
      : degree_(degree), lat_(&lat), zero_(std::move(zero)), cutoff_(cutoff) {
    if (degree < 0 || degree > 2) throw config_error("chain degree must be 0, 1 or 2");
  }

  int degree() const { return degree_; }
  const Lattice& lattice() const { return *lat_; }
  double cutoff() const { return cutoff_; }
  const Op& zero() const { return zero_; }
  size_t num_entries() const { return entries_.size(); }

  void add_entry(SiteTuple idx, const Op& op) {
    auto [key, sign] = canonical(idx);
    if (diameter(key) > cutoff_) return;
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      Op v = zero_;
      op_traits<Op>::axpy(v, sign, op);
      entries_.emplace(key, std::move(v));
    } else {
      op_traits<Op>::axpy(it->second, sign, op);
    }
  }

  // Entry for an arbitrary index order, with the permutation sign applied.
  Op entry(SiteTuple idx) const {
    auto [key, sign] = canonical(idx);
    auto it = entries_.find(key);
    Op v = zero_;
    if (it != entries_.end()) op_traits<Op>::axpy(v, sign, it->second);
    return v;
  }

  bool has_entry(SiteTuple idx) const {
    auto [key, sign] = canonical(idx);
    (void)sign;
    return entries_.find(key) != entries_.end();
  }

  template <class F>
  void for_each_entry(F&& f) const {  // ascending sorted-tuple order
    for (const auto& [key, op] : entries_) f(key, op);
  }

  // Boundary map: (dM)_{j0..j_{n-1}} = sum_{j_n} M_{j0..j_n}.
  NChain boundary() const {
    if (degree_ == 0) throw compute_error("degree", "boundary of a 0-chain is undefined");
    NChain out(degree_ - 1, *lat_, zero_, cutoff_);
    if (degree_ == 1) {
      for (const auto& [key, op] : entries_) {
        out.add_entry({key[0], -1, -1}, op);
        Op neg = zero_;
        op_traits<Op>::axpy(neg, -1.0, op);
        out.add_entry({key[1], -1, -1}, neg);
      }
    } else {
      for (const auto& [key, op] : entries_) {
        Op neg = zero_;
        op_traits<Op>::axpy(neg, -1.0, op);
        out.add_entry({key[0], key[1], -1}, op);   // j2 = key[2]
        out.add_entry({key[0], key[2], -1}, neg);  // M_{acb} = -M_{abc}
        out.add_entry({key[1], key[2], -1}, op);   // M_{bca} = +M_{abc}
      }
    }
    return out;
  }

  // Restriction sum over tuples with index i confined to regions[i].
  Op restrict(const std::vector<Region>& regions) const {
    if (static_cast<int>(regions.size()) != degree_ + 1)
      throw config_error("restrict needs degree + 1 regions");
    for (const auto& r : regions)
      if (&r.lattice() != lat_) throw config_error("region/lattice mismatch in restrict");
    Op acc = zero_;
    if (degree_ == 0) {
      for (const auto& [key, op] : entries_)
        if (regions[0].contains(key[0])) op_traits<Op>::axpy(acc, 1.0, op);
    } else if (degree_ == 1) {
      for (const auto& [key, op] : entries_) {
        if (regions[0].contains(key[0]) && regions[1].contains(key[1]))
          op_traits<Op>::axpy(acc, 1.0, op);
        if (regions[0].contains(key[1]) && regions[1].contains(key[0]))
          op_traits<Op>::axpy(acc, -1.0, op);
      }
    } else {
      static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                      {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
      static const double sgn[6] = {1, -1, -1, 1, 1, -1};
      for (const auto& [key, op] : entries_) {
        for (int p = 0; p < 6; ++p) {
          if (regions[0].contains(key[perms[p][0]]) && regions[1].contains(key[perms[p][1]]) &&
              regions[2].contains(key[perms[p][2]]))
            op_traits<Op>::axpy(acc, sgn[p], op);
        }
      }
    }
    return acc;
  }

  void scale(double c) {
    for (auto& [key, op] : entries_) {
      Op v = zero_;
      op_traits<Op>::axpy(v, c, op);
      op = std::move(v);
    }
  }

  void add(const NChain& other) {
    if (other.degree_ != degree_) throw config_error("chain degree mismatch in add");
    for (const auto& [key, op] : other.entries_) add_entry(key, op);
  }

  double max_entry_norm() const {
    double m = 0.0;
    for (const auto& [key, op] : entries_) m = std::max(m, op_traits<Op>::norm(op));
    return m;
  }

 private:
  std::pair<SiteTuple, double> canonical(SiteTuple idx) const {
    int n = degree_ + 1;
    for (int i = 0; i < n; ++i)
      if (idx[i] < 0 || idx[i] >= lat_->num_sites())
        throw config_error("chain index out of range");
    double sign = 1.0;
    // insertion sort on the first n slots, tracking parity
    for (int i = 1; i < n; ++i)
      for (int k = i; k > 0 && idx[k - 1] > idx[k]; --k) {
        std::swap(idx[k - 1], idx[k]);
        sign = -sign;
      }
    for (int i = 1; i < n; ++i)
      if (idx[i] == idx[i - 1])
        throw config_error("chain tuple has repeated sites");
    for (int i = n; i < 3; ++i) idx[i] = -1;
    return {idx, sign};
  }

  double diameter(const SiteTuple& key) const {
    int n = degree_ + 1;
    double d = 0.0;
    for (int i = 0; i < n; ++i)
      for (int k = i + 1; k < n; ++k)
        d = std::max(d, dist(lat_->pos(key[i]), lat_->pos(key[k])));
    return d;
  }

  int degree_;
  const Lattice* lat_;
  Op zero_;
  double cutoff_;
  std::map<SiteTuple, Op> entries_;
};

// sum_j [F_j, op] over a 0-chain F, in ascending site order.
template <class Op>
Op chain_commutator(const NChain<Op>& chain0, const Op& op) {
  if (chain0.degree() != 0) throw config_error("chain_commutator needs a 0-chain");
  Op acc = chain0.zero();
  chain0.for_each_entry([&](const SiteTuple&, const Op& fj) {
    op_traits<Op>::axpy(acc, 1.0, op_traits<Op>::commutator(fj, op));
  });
  return acc;
}

}  // namespace topo
