#include "topo/quadratic.hpp"

#include <cstdlib>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

namespace topo {

namespace {
bool wick_fault_injected() {
  static const bool fault = [] {
    const char* f = std::getenv("TOPOCURRENT_FAULT");
    return f != nullptr && std::string(f) == "wick-transpose";
  }();
  return fault;
}

SpMat left_diag(const RVec& d, const SpMat& m) {
  Vec dc = d.cast<cplx>();
  SpMat out = dc.asDiagonal() * m;
  return out;
}

SpMat right_diag(const SpMat& m, const RVec& d) {
  Vec dc = d.cast<cplx>();
  SpMat out = m * dc.asDiagonal();
  return out;
}
}  // namespace

QuadraticModel::QuadraticModel(const Lattice& lat, std::vector<Hopping> hoppings,
                               int num_occupied)
    : lat_(&lat), hops_(std::move(hoppings)), nocc_(num_occupied) {
  const int n = lat.total_orbitals();
  if (n > max_dense_orbitals)
    throw compute_error("size", "model exceeds the dense eigensolve cap of 4000 orbitals");
  if (nocc_ < 1 || nocc_ >= n)
    throw config_error("occupation must lie strictly between 0 and the orbital count");

  std::vector<Triplet> trips;
  trips.reserve(2 * hops_.size());
  for (const auto& hop : hops_) {
    if (hop.x < 0 || hop.x >= n || hop.y < 0 || hop.y >= n)
      throw config_error("hopping orbital index out of range");
    if (hop.x == hop.y) {
      if (std::abs(hop.amp.imag()) > 1e-12)
        throw config_error("on-site energies must be real");
      trips.emplace_back(hop.x, hop.x, hop.amp);
    } else {
      trips.emplace_back(hop.x, hop.y, hop.amp);
      trips.emplace_back(hop.y, hop.x, std::conj(hop.amp));
    }
  }
  h_ = SpMat(n, n);
  h_.setFromTriplets(trips.begin(), trips.end());

  Mat hd(h_);
  if ((hd - hd.adjoint()).norm() > 1e-10 * std::max(1.0, hd.norm()))
    throw config_error("hopping matrix is not Hermitian");

  Eigen::SelfAdjointEigenSolver<Mat> es(hd);
  eps_ = es.eigenvalues();
  u_ = es.eigenvectors();
  gap_ = eps_(nocc_) - eps_(nocc_ - 1);
  if (gap_ < 1e-8) {
    std::ostringstream msg;
    msg << "gapless spectrum at requested filling (measured gap " << gap_ << ")";
    throw compute_error("gapless", msg.str());
  }
  p_ = u_.leftCols(nocc_) * u_.leftCols(nocc_).adjoint();
}

RVec QuadraticModel::region_indicator(const Region& r) const {
  RVec q = RVec::Zero(dim());
  for (int j : r.sites())
    for (int a = 0; a < lat_->orbitals(j); ++a) q(lat_->orbital_offset(j) + a) = 1.0;
  return q;
}

RVec QuadraticModel::site_indicator(int j) const {
  RVec q = RVec::Zero(dim());
  for (int a = 0; a < lat_->orbitals(j); ++a) q(lat_->orbital_offset(j) + a) = 1.0;
  return q;
}

SpMat QuadraticModel::site_ham(int j) const {
  RVec pj = site_indicator(j);
  SpMat a = left_diag(pj, h_);
  SpMat b = right_diag(h_, pj);
  SpMat out = 0.5 * a + 0.5 * b;
  out.prune(cplx(0, 0));
  return out;
}

SpMat QuadraticModel::charge_site(int j) const {
  std::vector<Triplet> trips;
  for (int a = 0; a < lat_->orbitals(j); ++a) {
    int x = lat_->orbital_offset(j) + a;
    trips.emplace_back(x, x, cplx(1.0, 0.0));
  }
  SpMat out(dim(), dim());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

NChain<QuadraticOperator> QuadraticModel::hamiltonian_chain() const {
  QuadraticOperator zero{SpMat(dim(), dim()), true};
  NChain<QuadraticOperator> out(0, *lat_, zero);
  for (int j = 0; j < lat_->num_sites(); ++j)
    out.add_entry({j, -1, -1}, QuadraticOperator{site_ham(j), true});
  return out;
}

NChain<QuadraticOperator> QuadraticModel::charge_chain() const {
  QuadraticOperator zero{SpMat(dim(), dim()), true};
  NChain<QuadraticOperator> out(0, *lat_, zero);
  for (int j = 0; j < lat_->num_sites(); ++j)
    out.add_entry({j, -1, -1}, QuadraticOperator{charge_site(j), true});
  return out;
}

NChain<QuadraticOperator> QuadraticModel::current_chain() const {
  QuadraticOperator zero{SpMat(dim(), dim()), true};
  NChain<QuadraticOperator> out(1, *lat_, zero);
  // Collect bonded site pairs from the hopping list.
  std::vector<std::pair<int, int>> bonds;
  for (const auto& hop : hops_) {
    int j = lat_->site_of_orbital(hop.x);
    int k = lat_->site_of_orbital(hop.y);
    if (j == k) continue;
    bonds.emplace_back(std::min(j, k), std::max(j, k));
  }
  std::sort(bonds.begin(), bonds.end());
  bonds.erase(std::unique(bonds.begin(), bonds.end()), bonds.end());
  for (auto [j, k] : bonds) {
    RVec pj = site_indicator(j);
    RVec pk = site_indicator(k);
    SpMat kj = right_diag(left_diag(pk, h_), pj);
    SpMat jk_ = right_diag(left_diag(pj, h_), pk);
    SpMat jk = iu * kj - iu * jk_;
    out.add_entry({j, k, -1}, QuadraticOperator{jk, true});
  }
  return out;
}

SpMat QuadraticModel::current_restrict(const Region& r0, const Region& r1) const {
  RVec q0 = region_indicator(r0);
  RVec q1 = region_indicator(r1);
  SpMat a = right_diag(left_diag(q1, h_), q0);
  SpMat b = right_diag(left_diag(q0, h_), q1);
  SpMat out = iu * a - iu * b;
  out.prune(cplx(0, 0));
  return out;
}

Mat QuadraticModel::filter_apply(const Mat& a, const FilterSpec& f) const {
  if (f.delta <= 0.0 || f.delta >= gap_)
    throw compute_error("filter", "filter invalid: delta must lie in (0, gap)");
  return apply_filter_in_eigenbasis(a, eps_, u_, f);
}

Mat QuadraticModel::boundary_k(const Region& r, const FilterSpec& f) const {
  RVec q = region_indicator(r);
  Mat comm = iu * (Mat(h_) * q.cast<cplx>().asDiagonal() -
                   q.cast<cplx>().asDiagonal() * Mat(h_));
  return filter_apply(comm, f);
}

Mat QuadraticModel::dressed_charge(const Region& r, const FilterSpec& f) const {
  Mat out = -boundary_k(r, f);
  out += Mat(region_indicator(r).cast<cplx>().asDiagonal());
  return out;
}

Mat QuadraticModel::evolve(const Mat& a, double t) const {
  Mat b = u_.adjoint() * a * u_;
  for (Eigen::Index m = 0; m < b.rows(); ++m)
    for (Eigen::Index n = 0; n < b.cols(); ++n)
      b(m, n) *= std::exp(iu * ((eps_(m) - eps_(n)) * t));
  return u_ * b * u_.adjoint();
}

cplx QuadraticModel::expectation(const Mat& a) const {
  if (wick_fault_injected()) return (a * p_.transpose()).trace();
  return (a * p_).trace();
}

cplx QuadraticModel::connected_pairing(const Mat& a, const Mat& b) const {
  Mat bp = b * p_;
  Mat abp = a * bp;
  return abp.trace() - (a * p_ * bp).trace();
}

cplx QuadraticModel::commutator_expectation(const Mat& a, const Mat& b) const {
  return connected_pairing(a, b) - connected_pairing(b, a);
}

GaussianAmplitude QuadraticModel::gaussian_amplitude(const std::vector<Mat>& exponents,
                                                     int substeps) const {
  if (exponents.empty()) throw config_error("gaussian process needs at least one factor");
  if (static_cast<int>(exponents.size()) > max_gaussian_factors)
    throw config_error("gaussian process exceeds the configured factor cap");
  substeps = std::clamp(substeps, 1, 64);

  const int n = dim();
  Mat occ0 = Mat::Identity(n, n) - p_;

  GaussianAmplitude out;
  out.branch.reserve(exponents.size() * substeps + 1);
  out.branch.push_back(cplx(1.0, 0.0));
  out.phase = 0.0;
  out.min_modulus = 1.0;

  Mat g = Mat::Identity(n, n);
  double prev_arg = 0.0;
  // Apply the factors in operator order: the first exponent acts on |0> first.
  for (const Mat& x : exponents) {
    Mat slice = (x / static_cast<double>(substeps)).exp();
    for (int s = 0; s < substeps; ++s) {
      g = slice * g;
      cplx amp = (occ0 + g * p_).partialPivLu().determinant();
      out.branch.push_back(amp);
      out.min_modulus = std::min(out.min_modulus, std::abs(amp));
      double arg = std::arg(amp);
      out.phase += angle_diff(arg, prev_arg);
      prev_arg = arg;
    }
  }
  out.amplitude = out.branch.back();
  if (std::abs(out.amplitude) < 1e-8)
    throw compute_error("amplitude",
                        "process amplitude modulus below 1e-8: phase ill-conditioned");
  return out;
}

std::string QuadraticModel::fingerprint() const {
  std::ostringstream ss;
  ss << lat_->name() << ":" << lat_->num_sites() << ":" << nocc_ << ":";
  for (const auto& hop : hops_)
    ss << hop.x << "," << hop.y << "," << hop.amp.real() << "," << hop.amp.imag() << ";";
  return hex64(fnv1a(ss.str()));
}

}  // namespace topo
