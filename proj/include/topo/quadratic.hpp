#pragma once

#include <tuple>
#include <vector>

#include "topo/chain.hpp"
#include "topo/filter.hpp"
#include "topo/lattice.hpp"

namespace topo {

// ---------------------------------------------------------------------------
// Exact free-fermion engine. Every operator is a number-conserving bilinear
// sum_xy a_xy c^dag_x c_y represented by its single-particle matrix; ground
// state data is the projector onto occupied single-particle eigenstates.
//
// Conventions (pinned by the many-body cross-check tests):
//   <c^dag_x c_y> = P_yx, so <A> = tr(a P),
//   <AB> - <A><B>  = tr(a (1-P) b P).
// Hopping terms are split half-and-half between their two end sites, which
// makes the bond current J_jk = i (Pi_k h Pi_j - Pi_j h Pi_k) and gives the
// conservation law i[h, q_j] = (dJ)_j exactly.
// ---------------------------------------------------------------------------

struct QuadraticOperator {
  SpMat mat;
  bool hermitian = false;
};

template <>
struct op_traits<QuadraticOperator> {
  static void axpy(QuadraticOperator& acc, double c, const QuadraticOperator& x) {
    if (acc.mat.rows() == 0)
      acc.mat = SpMat(x.mat.rows(), x.mat.cols());
    acc.mat = (acc.mat + c * x.mat).pruned();
    acc.hermitian = acc.hermitian && x.hermitian;
  }
  static QuadraticOperator commutator(const QuadraticOperator& a, const QuadraticOperator& b) {
    QuadraticOperator out;
    out.mat = (a.mat * b.mat - b.mat * a.mat).pruned();
    out.hermitian = false;
    return out;
  }
  static double norm(const QuadraticOperator& x) { return x.mat.norm(); }
};

// One hopping amplitude t c^dag_x c_y (+ h.c. for x != y); x, y are orbital
// indices. Diagonal entries are on-site energies and must be real.
struct Hopping {
  int x = 0;
  int y = 0;
  cplx amp;
};

struct GaussianAmplitude {
  cplx amplitude;
  double phase = 0.0;            // continuously unwrapped along the process
  double min_modulus = 1.0;      // smallest |amplitude| along the branch
  std::vector<cplx> branch;      // amplitudes at the substep prefixes
};

class QuadraticModel {
 public:
  QuadraticModel(const Lattice& lat, std::vector<Hopping> hoppings, int num_occupied);

  const Lattice& lattice() const { return *lat_; }
  int dim() const { return static_cast<int>(eps_.size()); }
  int num_occupied() const { return nocc_; }
  double gap() const { return gap_; }
  double fermi_energy() const { return 0.5 * (eps_(nocc_ - 1) + eps_(nocc_)); }
  double spectral_span() const { return eps_(dim() - 1) - eps_(0); }
  const RVec& eigenvalues() const { return eps_; }
  const Mat& eigenvectors() const { return u_; }
  const Mat& projector() const { return p_; }
  const SpMat& hamiltonian() const { return h_; }
  const std::vector<Hopping>& hoppings() const { return hops_; }

  // 0/1 orbital indicator of a region (diagonal of Pi_R).
  RVec region_indicator(const Region& r) const;
  RVec site_indicator(int j) const;

  // Per-site Hamiltonian piece h_j = (Pi_j h + h Pi_j) / 2.
  SpMat site_ham(int j) const;
  SpMat charge_site(int j) const;

  NChain<QuadraticOperator> hamiltonian_chain() const;
  NChain<QuadraticOperator> charge_chain() const;
  // Bond current J_jk = i [h_k, q_j] - i [h_j, q_k]; entries only on bonds.
  NChain<QuadraticOperator> current_chain() const;

  // J restricted to pairs (j in r0, k in r1): i (Pi_r1 h Pi_r0 - Pi_r0 h Pi_r1).
  SpMat current_restrict(const Region& r0, const Region& r1) const;

  // Spectral quasi-adiabatic map; refuses if the filter gap threshold is not
  // below the single-particle gap.
  Mat filter_apply(const Mat& a, const FilterSpec& f) const;
  Mat filter_apply(const SpMat& a, const FilterSpec& f) const { return filter_apply(Mat(a), f); }

  // (dK)_R = I_Delta(i [h, q_R]) and the dressed charge q_R - (dK)_R.
  Mat boundary_k(const Region& r, const FilterSpec& f) const;
  Mat dressed_charge(const Region& r, const FilterSpec& f) const;

  // Heisenberg evolution of the single-particle matrix.
  Mat evolve(const Mat& a, double t) const;

  cplx expectation(const Mat& a) const;
  cplx expectation(const SpMat& a) const { return expectation(Mat(a)); }
  // <AB> - <A><B> = tr(a (1-P) b P)
  cplx connected_pairing(const Mat& a, const Mat& b) const;
  // <[A, B]> evaluated through occupied-empty pairings only
  cplx commutator_expectation(const Mat& a, const Mat& b) const;

  // <0| e^{X_1} ... e^{X_n} |0> = det((1-P) + e^{x_1}...e^{x_n} P).
  // Each exponent is split into `substeps` slices; the amplitude is tracked
  // along the resulting prefix chain to fix the phase branch.
  GaussianAmplitude gaussian_amplitude(const std::vector<Mat>& exponents,
                                       int substeps = 16) const;

  std::string fingerprint() const;

 private:
  const Lattice* lat_;
  std::vector<Hopping> hops_;
  SpMat h_;
  RVec eps_;
  Mat u_;
  Mat p_;
  int nocc_ = 0;
  double gap_ = 0.0;
};

inline constexpr int max_gaussian_factors = 64;
inline constexpr int max_dense_orbitals = 4000;

}  // namespace topo
