#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "topo/chain.hpp"
#include "topo/filter.hpp"
#include "topo/lattice.hpp"

namespace topo {

// ---------------------------------------------------------------------------
// Exact-diagonalization engine for small interacting U(1)-symmetric fermion
// models. Orbitals are Jordan-Wigner ordered by their matrix index; basis
// states of a charge sector are occupation bitstrings listed in increasing
// numeric order. Charge-conserving operators are block-diagonal over sectors.
//
// Two execution modes: operator mode materializes dense sector eigensystems
// (dimension <= 4096) for filters, evolution and matrix exponentials;
// expectation mode uses sparse Lanczos + resolvent solves only.
// ---------------------------------------------------------------------------

struct HopTerm {
  int x = 0, y = 0;
  cplx amp;  // amp c^dag_x c_y + h.c.
};
struct OnsiteTerm {
  int x = 0;
  double energy = 0.0;  // energy n_x
};
struct DensityTerm {
  int x = 0, y = 0;
  double v = 0.0;  // v n_x n_y
};
struct RaiseTerm {  // amp c^dag_x + h.c.: violates U(1), used by guard tests
  int x = 0;
  cplx amp;
};
using Term = std::variant<HopTerm, OnsiteTerm, DensityTerm, RaiseTerm>;

int term_site(const Term& t, const Lattice& lat);  // lexicographically smallest support site
bool term_conserves_charge(const Term& t);

class SectorBasis {
 public:
  SectorBasis(int orbitals, int charge);
  int dim() const { return static_cast<int>(states_.size()); }
  std::uint64_t state(int i) const { return states_[i]; }
  int rank(std::uint64_t s) const;
  int orbitals() const { return orbitals_; }
  int charge() const { return charge_; }

 private:
  int orbitals_, charge_;
  std::vector<std::uint64_t> states_;
};

struct ManyBodyOperator {
  int displacement = 0;  // maps sector n -> n + displacement
  std::map<int, SpMat> blocks;
  bool hermitian = false;

  const SpMat* block(int n) const {
    auto it = blocks.find(n);
    return it == blocks.end() ? nullptr : &it->second;
  }
  double norm() const {
    double s = 0.0;
    for (const auto& [n, b] : blocks) s += b.squaredNorm();
    return std::sqrt(s);
  }
};

template <>
struct op_traits<ManyBodyOperator> {
  static void axpy(ManyBodyOperator& acc, double c, const ManyBodyOperator& x);
  static ManyBodyOperator commutator(const ManyBodyOperator& a, const ManyBodyOperator& b);
  static double norm(const ManyBodyOperator& x) { return x.norm(); }
};

struct GroundState {
  int sector = 0;
  Vec vector;
  double energy = 0.0;
  double gap = 0.0;           // to the first excited state within the sector
  double adjacent_gap = 0.0;  // min over n +- 1 of E0(m) - E0(n); informational
};

struct SectorEigen {
  RVec evals;
  Mat evecs;
};

class ManyBodyModel {
 public:
  ManyBodyModel(const Lattice& lat, std::vector<Term> terms,
                std::vector<int> sectors, std::size_t dim_cap = 2'000'000);

  const Lattice& lattice() const { return *lat_; }
  int orbitals() const { return orbitals_; }
  const std::vector<int>& sectors() const { return sectors_; }
  const std::vector<Term>& terms() const { return terms_; }
  const SectorBasis& basis(int n) const;

  ManyBodyOperator hamiltonian() const { return ham_; }
  const SpMat& hamiltonian_block(int n) const;

  // Many-body image of a subset of terms (or any term list on this basis set).
  ManyBodyOperator build_operator(const std::vector<Term>& terms) const;
  // Bilinear sum_xy a_xy c^dag_x c_y from a single-particle matrix.
  ManyBodyOperator bilinear(const Mat& a) const;
  ManyBodyOperator charge_site(int j) const;
  ManyBodyOperator charge_region(const Region& r) const;

  NChain<ManyBodyOperator> hamiltonian_chain() const;
  NChain<ManyBodyOperator> charge_chain() const;
  NChain<ManyBodyOperator> current_chain() const;

  GroundState ground_state(int sector) const;

  // Dense eigensystem of a sector block (operator mode; dim <= 4096).
  const SectorEigen& eigensystem(int sector) const;

  // Spectral filter of a charge-conserving operator, sector by sector.
  ManyBodyOperator filter_apply(const ManyBodyOperator& a, const FilterSpec& f) const;
  // Heisenberg evolution in operator mode.
  ManyBodyOperator evolve(const ManyBodyOperator& a, double t) const;

  // x solving (H - E0) x = (1 - |g><g|) v with x orthogonal to the ground
  // vector, by conjugate gradients. Residual <= tol * |v|.
  Vec resolvent_apply(const GroundState& g, const Vec& v, double tol = 1e-10) const;

  cplx expectation(const GroundState& g, const ManyBodyOperator& a) const;

  std::string fingerprint() const;

  ManyBodyOperator zero_operator() const { return ManyBodyOperator{0, {}, true}; }

 private:
  void check_term(const Term& t) const;
  SpMat term_block(const Term& t, int n_from) const;

  const Lattice* lat_;
  int orbitals_ = 0;
  std::vector<Term> terms_;
  std::vector<int> sectors_;
  std::size_t dim_cap_;
  mutable std::map<int, SectorBasis> bases_;
  ManyBodyOperator ham_;
  mutable std::map<int, SectorEigen> eig_;
};

inline constexpr int manybody_dense_cap = 4096;

}  // namespace topo
