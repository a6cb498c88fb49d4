#include "topo/manybody.hpp"

#include <algorithm>
#include <bit>
#include <random>
#include <sstream>

namespace topo {

namespace {

ManyBodyOperator scaled(const ManyBodyOperator& a, cplx c) {
  ManyBodyOperator out;
  out.displacement = a.displacement;
  out.hermitian = false;
  for (const auto& [n, b] : a.blocks) out.blocks[n] = SpMat(c * b);
  return out;
}

inline int parity_below(std::uint64_t s, int x) {
  std::uint64_t mask = (x == 0) ? 0ull : ((1ull << x) - 1ull);
  return (std::popcount(s & mask) & 1) ? -1 : 1;
}

// c_y then c^dag_x with Jordan-Wigner signs; returns false if annihilated.
inline bool hop_apply(std::uint64_t s, int x, int y, std::uint64_t& out, int& sign) {
  if (!((s >> y) & 1ull)) return false;
  sign = parity_below(s, y);
  std::uint64_t t = s ^ (1ull << y);
  if ((t >> x) & 1ull) return false;
  sign *= parity_below(t, x);
  out = t | (1ull << x);
  return true;
}

}  // namespace

int term_site(const Term& t, const Lattice& lat) {
  int orb = std::visit(
      [](const auto& tt) -> int {
        using T = std::decay_t<decltype(tt)>;
        if constexpr (std::is_same_v<T, HopTerm>) return std::min(tt.x, tt.y);
        else if constexpr (std::is_same_v<T, OnsiteTerm>) return tt.x;
        else if constexpr (std::is_same_v<T, DensityTerm>) return std::min(tt.x, tt.y);
        else return tt.x;
      },
      t);
  return lat.site_of_orbital(orb);
}

bool term_conserves_charge(const Term& t) {
  return !std::holds_alternative<RaiseTerm>(t);
}

SectorBasis::SectorBasis(int orbitals, int charge) : orbitals_(orbitals), charge_(charge) {
  if (orbitals < 1 || orbitals > 40) throw config_error("orbital count out of range for ED");
  if (charge < 0 || charge > orbitals) throw config_error("sector charge out of range");
  for (std::uint64_t s = 0; s < (1ull << orbitals); ++s)
    if (std::popcount(s) == charge) states_.push_back(s);
}

int SectorBasis::rank(std::uint64_t s) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), s);
  if (it == states_.end() || *it != s) throw compute_error("basis", "state not in sector");
  return static_cast<int>(it - states_.begin());
}

void op_traits<ManyBodyOperator>::axpy(ManyBodyOperator& acc, double c,
                                       const ManyBodyOperator& x) {
  if (acc.blocks.empty()) acc.displacement = x.displacement;
  else if (!x.blocks.empty() && acc.displacement != x.displacement)
    throw config_error("cannot add operators with different charge displacement");
  for (const auto& [n, b] : x.blocks) {
    auto it = acc.blocks.find(n);
    if (it == acc.blocks.end()) acc.blocks[n] = SpMat(c * b);
    else it->second = (it->second + c * b).pruned();
  }
  acc.hermitian = acc.hermitian && x.hermitian;
}

ManyBodyOperator op_traits<ManyBodyOperator>::commutator(const ManyBodyOperator& a,
                                                         const ManyBodyOperator& b) {
  ManyBodyOperator out;
  out.displacement = a.displacement + b.displacement;
  out.hermitian = false;
  std::vector<int> from;
  for (const auto& [n, blk] : b.blocks) from.push_back(n);
  for (const auto& [n, blk] : a.blocks)
    if (std::find(from.begin(), from.end(), n) == from.end()) from.push_back(n);
  std::sort(from.begin(), from.end());
  for (int n : from) {
    const SpMat* bn = b.block(n);
    const SpMat* a_up = a.block(n + b.displacement);
    const SpMat* an = a.block(n);
    const SpMat* b_up = b.block(n + a.displacement);
    SpMat acc;
    bool any = false;
    if (bn && a_up) {
      acc = SpMat((*a_up) * (*bn));
      any = true;
    }
    if (an && b_up) {
      SpMat ba = SpMat((*b_up) * (*an));
      acc = any ? SpMat(acc - ba) : SpMat(-1.0 * ba);
      any = true;
    }
    if (any) out.blocks[n] = acc.pruned();
  }
  return out;
}

ManyBodyModel::ManyBodyModel(const Lattice& lat, std::vector<Term> terms,
                             std::vector<int> sectors, std::size_t dim_cap)
    : lat_(&lat), orbitals_(lat.total_orbitals()), terms_(std::move(terms)),
      sectors_(std::move(sectors)), dim_cap_(dim_cap) {
  std::sort(sectors_.begin(), sectors_.end());
  sectors_.erase(std::unique(sectors_.begin(), sectors_.end()), sectors_.end());
  if (sectors_.empty()) throw config_error("model needs at least one charge sector");
  for (const Term& t : terms_) check_term(t);
  std::size_t total = 0;
  for (int n : sectors_) total += basis(n).dim();
  if (total > dim_cap_)
    throw compute_error("size", "Hilbert dimension exceeds the configured cap");
  ham_ = build_operator(terms_);
  ham_.hermitian = true;
}

void ManyBodyModel::check_term(const Term& t) const {
  if (!term_conserves_charge(t))
    throw config_error("term violates the U(1) charge symmetry");
  std::visit(
      [&](const auto& tt) {
        using T = std::decay_t<decltype(tt)>;
        if constexpr (std::is_same_v<T, HopTerm>) {
          if (tt.x == tt.y) throw config_error("hop term needs distinct orbitals");
          if (tt.x < 0 || tt.x >= orbitals_ || tt.y < 0 || tt.y >= orbitals_)
            throw config_error("term orbital out of range");
        } else if constexpr (std::is_same_v<T, OnsiteTerm>) {
          if (tt.x < 0 || tt.x >= orbitals_) throw config_error("term orbital out of range");
        } else if constexpr (std::is_same_v<T, DensityTerm>) {
          if (tt.x < 0 || tt.x >= orbitals_ || tt.y < 0 || tt.y >= orbitals_)
            throw config_error("term orbital out of range");
        }
      },
      t);
}

const SectorBasis& ManyBodyModel::basis(int n) const {
  auto it = bases_.find(n);
  if (it == bases_.end()) it = bases_.emplace(n, SectorBasis(orbitals_, n)).first;
  return it->second;
}

SpMat ManyBodyModel::term_block(const Term& t, int n) const {
  const SectorBasis& bas = basis(n);
  std::vector<Triplet> trips;
  std::visit(
      [&](const auto& tt) {
        using T = std::decay_t<decltype(tt)>;
        if constexpr (std::is_same_v<T, HopTerm>) {
          for (int i = 0; i < bas.dim(); ++i) {
            std::uint64_t s = bas.state(i);
            std::uint64_t out;
            int sign;
            if (hop_apply(s, tt.x, tt.y, out, sign))
              trips.emplace_back(bas.rank(out), i, tt.amp * static_cast<double>(sign));
            if (hop_apply(s, tt.y, tt.x, out, sign))
              trips.emplace_back(bas.rank(out), i, std::conj(tt.amp) * static_cast<double>(sign));
          }
        } else if constexpr (std::is_same_v<T, OnsiteTerm>) {
          for (int i = 0; i < bas.dim(); ++i)
            if ((bas.state(i) >> tt.x) & 1ull) trips.emplace_back(i, i, cplx(tt.energy, 0.0));
        } else if constexpr (std::is_same_v<T, DensityTerm>) {
          for (int i = 0; i < bas.dim(); ++i) {
            std::uint64_t s = bas.state(i);
            if (((s >> tt.x) & 1ull) && ((s >> tt.y) & 1ull))
              trips.emplace_back(i, i, cplx(tt.v, 0.0));
          }
        } else {
          throw config_error("term violates the U(1) charge symmetry");
        }
      },
      t);
  SpMat out(bas.dim(), bas.dim());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

ManyBodyOperator ManyBodyModel::build_operator(const std::vector<Term>& terms) const {
  ManyBodyOperator out;
  out.displacement = 0;
  out.hermitian = true;
  for (int n : sectors_) {
    SpMat acc(basis(n).dim(), basis(n).dim());
    for (const Term& t : terms) acc = (acc + term_block(t, n)).pruned();
    out.blocks[n] = acc;
  }
  return out;
}

ManyBodyOperator ManyBodyModel::bilinear(const Mat& a) const {
  ManyBodyOperator out;
  out.displacement = 0;
  out.hermitian = (a - a.adjoint()).norm() < 1e-12 * std::max(1.0, a.norm());
  for (int n : sectors_) {
    const SectorBasis& bas = basis(n);
    std::vector<Triplet> trips;
    for (int i = 0; i < bas.dim(); ++i) {
      std::uint64_t s = bas.state(i);
      for (int y = 0; y < orbitals_; ++y) {
        if (!((s >> y) & 1ull)) continue;
        for (int x = 0; x < orbitals_; ++x) {
          if (a(x, y) == cplx(0.0, 0.0)) continue;
          std::uint64_t outst;
          int sign;
          if (hop_apply(s, x, y, outst, sign))
            trips.emplace_back(bas.rank(outst), i, a(x, y) * static_cast<double>(sign));
        }
      }
    }
    SpMat blk(bas.dim(), bas.dim());
    blk.setFromTriplets(trips.begin(), trips.end());
    out.blocks[n] = blk;
  }
  return out;
}

ManyBodyOperator ManyBodyModel::charge_site(int j) const {
  std::vector<Term> ts;
  for (int a = 0; a < lat_->orbitals(j); ++a)
    ts.push_back(OnsiteTerm{lat_->orbital_offset(j) + a, 1.0});
  auto out = build_operator(ts);
  out.hermitian = true;
  return out;
}

ManyBodyOperator ManyBodyModel::charge_region(const Region& r) const {
  std::vector<Term> ts;
  for (int j : r.sites())
    for (int a = 0; a < lat_->orbitals(j); ++a)
      ts.push_back(OnsiteTerm{lat_->orbital_offset(j) + a, 1.0});
  auto out = build_operator(ts);
  out.hermitian = true;
  return out;
}

NChain<ManyBodyOperator> ManyBodyModel::hamiltonian_chain() const {
  NChain<ManyBodyOperator> out(0, *lat_, zero_operator());
  std::map<int, std::vector<Term>> by_site;
  for (const Term& t : terms_) by_site[term_site(t, *lat_)].push_back(t);
  for (const auto& [j, ts] : by_site) {
    auto op = build_operator(ts);
    op.hermitian = true;
    out.add_entry({j, -1, -1}, op);
  }
  return out;
}

NChain<ManyBodyOperator> ManyBodyModel::charge_chain() const {
  NChain<ManyBodyOperator> out(0, *lat_, zero_operator());
  for (int j = 0; j < lat_->num_sites(); ++j) out.add_entry({j, -1, -1}, charge_site(j));
  return out;
}

NChain<ManyBodyOperator> ManyBodyModel::current_chain() const {
  NChain<ManyBodyOperator> out(1, *lat_, zero_operator());
  std::map<int, std::vector<Term>> by_site;
  for (const Term& t : terms_) by_site[term_site(t, *lat_)].push_back(t);
  std::map<int, ManyBodyOperator> hj;
  for (const auto& [j, ts] : by_site) hj[j] = build_operator(ts);

  // Site pairs coupled through some term's support.
  std::vector<std::pair<int, int>> pairs;
  for (const Term& t : terms_) {
    int a = term_site(t, *lat_);
    std::vector<int> support;
    std::visit(
        [&](const auto& tt) {
          using T = std::decay_t<decltype(tt)>;
          if constexpr (std::is_same_v<T, HopTerm>) {
            support = {lat_->site_of_orbital(tt.x), lat_->site_of_orbital(tt.y)};
          } else if constexpr (std::is_same_v<T, DensityTerm>) {
            support = {lat_->site_of_orbital(tt.x), lat_->site_of_orbital(tt.y)};
          } else if constexpr (std::is_same_v<T, OnsiteTerm>) {
            support = {lat_->site_of_orbital(tt.x)};
          }
        },
        t);
    for (int s : support)
      if (s != a) pairs.emplace_back(std::min(a, s), std::max(a, s));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  for (auto [j, k] : pairs) {
    ManyBodyOperator qj = charge_site(j), qk = charge_site(k);
    ManyBodyOperator jk = zero_operator();
    auto it_k = hj.find(k);
    if (it_k != hj.end())
      op_traits<ManyBodyOperator>::axpy(
          jk, 1.0, scaled(op_traits<ManyBodyOperator>::commutator(it_k->second, qj), iu));
    auto it_j = hj.find(j);
    if (it_j != hj.end())
      op_traits<ManyBodyOperator>::axpy(
          jk, -1.0, scaled(op_traits<ManyBodyOperator>::commutator(it_j->second, qk), iu));
    jk.hermitian = true;
    out.add_entry({j, k, -1}, jk);
  }
  return out;
}

const SpMat& ManyBodyModel::hamiltonian_block(int n) const {
  const SpMat* b = ham_.block(n);
  if (!b) throw compute_error("sector", "sector not built in this model");
  return *b;
}

const SectorEigen& ManyBodyModel::eigensystem(int n) const {
  auto it = eig_.find(n);
  if (it != eig_.end()) return it->second;
  const SpMat& h = hamiltonian_block(n);
  if (h.rows() > manybody_dense_cap)
    throw compute_error("size", "sector too large for operator mode");
  Eigen::SelfAdjointEigenSolver<Mat> es{Mat(h)};
  SectorEigen se{es.eigenvalues(), es.eigenvectors()};
  return eig_.emplace(n, std::move(se)).first->second;
}

namespace {

// Lanczos with full reorthogonalization; deflates against `locked`.
std::pair<double, Vec> lanczos_lowest(const SpMat& h, const std::vector<Vec>& locked,
                                      std::uint64_t seed) {
  const int n = static_cast<int>(h.rows());
  const int m_max = std::min(n, 240);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Vec v = Vec::NullaryExpr(n, [&](Eigen::Index) { return cplx(gauss(rng), gauss(rng)); });
  auto project = [&](Vec& x) {
    for (const Vec& l : locked) x -= l.dot(x) * l;
  };
  project(v);
  v.normalize();

  std::vector<Vec> basis;
  std::vector<double> alpha, beta;
  Vec w;
  for (int it = 0; it < m_max; ++it) {
    basis.push_back(v);
    w = h * v;
    project(w);
    double a = std::real(v.dot(w));
    alpha.push_back(a);
    w -= a * v;
    if (it > 0) w -= beta.back() * basis[it - 1];
    for (const Vec& b : basis) w -= b.dot(w) * b;  // full reorthogonalization
    double bnorm = w.norm();
    if (bnorm < 1e-13) break;
    beta.push_back(bnorm);
    v = w / bnorm;
  }
  const int m = static_cast<int>(alpha.size());
  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    tri(i, i) = alpha[i];
    if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
  Vec ground = Vec::Zero(n);
  for (int i = 0; i < m; ++i) ground += es.eigenvectors()(i, 0) * basis[i];
  ground.normalize();
  return {es.eigenvalues()(0), ground};
}

}  // namespace

GroundState ManyBodyModel::ground_state(int sector) const {
  const SpMat& h = hamiltonian_block(sector);
  const int dim = static_cast<int>(h.rows());
  if (dim < 1) throw compute_error("sector", "empty sector");

  GroundState g;
  g.sector = sector;
  if (dim <= manybody_dense_cap) {
    const SectorEigen& se = eigensystem(sector);
    g.energy = se.evals(0);
    g.vector = se.evecs.col(0);
    g.gap = dim > 1 ? se.evals(1) - se.evals(0) : inf;
  } else {
    auto [e0, v0] = lanczos_lowest(h, {}, 0x9e3779b97f4a7c15ull);
    double resid = (h * v0 - e0 * v0).norm();
    if (resid > 1e-8 * std::max(1.0, std::abs(e0)))
      throw compute_error("convergence", "Lanczos ground state did not converge");
    auto [e1, v1] = lanczos_lowest(h, {v0}, 0xc2b2ae3d27d4eb4full);
    g.energy = e0;
    g.vector = v0;
    g.gap = e1 - e0;
  }
  if (g.gap < 1e-8)
    throw compute_error("degenerate",
                        "ground state is degenerate within the sector (gap < 1e-8)");

  g.adjacent_gap = inf;
  for (int m : {sector - 1, sector + 1}) {
    if (std::find(sectors_.begin(), sectors_.end(), m) == sectors_.end()) continue;
    const SpMat& hm = hamiltonian_block(m);
    if (hm.rows() == 0) continue;
    double e0m;
    if (hm.rows() <= manybody_dense_cap) e0m = eigensystem(m).evals(0);
    else e0m = lanczos_lowest(hm, {}, 0xa0761d6478bd642full).first;
    g.adjacent_gap = std::min(g.adjacent_gap, e0m - g.energy);
  }
  return g;
}

ManyBodyOperator ManyBodyModel::filter_apply(const ManyBodyOperator& a,
                                             const FilterSpec& f) const {
  if (a.displacement != 0)
    throw config_error("filter applies to charge-conserving operators only");
  ManyBodyOperator out;
  out.displacement = 0;
  out.hermitian = a.hermitian;
  for (const auto& [n, blk] : a.blocks) {
    const SectorEigen& se = eigensystem(n);
    out.blocks[n] = apply_filter_in_eigenbasis(Mat(blk), se.evals, se.evecs, f).sparseView();
  }
  return out;
}

ManyBodyOperator ManyBodyModel::evolve(const ManyBodyOperator& a, double t) const {
  if (a.displacement != 0) throw config_error("evolve supports charge-conserving operators");
  ManyBodyOperator out;
  out.displacement = 0;
  out.hermitian = a.hermitian;
  for (const auto& [n, blk] : a.blocks) {
    const SectorEigen& se = eigensystem(n);
    Mat b = se.evecs.adjoint() * Mat(blk) * se.evecs;
    for (Eigen::Index mm = 0; mm < b.rows(); ++mm)
      for (Eigen::Index nn = 0; nn < b.cols(); ++nn)
        b(mm, nn) *= std::exp(iu * ((se.evals(mm) - se.evals(nn)) * t));
    out.blocks[n] = (se.evecs * b * se.evecs.adjoint()).sparseView();
  }
  return out;
}

Vec ManyBodyModel::resolvent_apply(const GroundState& g, const Vec& v, double tol) const {
  const SpMat& h = hamiltonian_block(g.sector);
  Vec rhs = v - g.vector * (g.vector.dot(v));
  auto apply = [&](const Vec& x) -> Vec {
    Vec y = h * x - g.energy * x;
    y -= g.vector * (g.vector.dot(y));
    return y;
  };
  Vec x = Vec::Zero(v.size());
  Vec r = rhs;
  Vec p = r;
  double rr = std::real(r.dot(r));
  const double target = tol * std::max(1e-300, v.norm());
  for (int it = 0; it < 20000 && std::sqrt(rr) > target; ++it) {
    Vec ap = apply(p);
    double pap = std::real(p.dot(ap));
    if (!(pap > 0.0)) throw compute_error("solver", "resolvent CG breakdown");
    double alpha = rr / pap;
    x += alpha * p;
    r -= alpha * ap;
    double rr_new = std::real(r.dot(r));
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  if (std::sqrt(rr) > target) throw compute_error("solver", "resolvent CG did not converge");
  x -= g.vector * (g.vector.dot(x));
  return x;
}

cplx ManyBodyModel::expectation(const GroundState& g, const ManyBodyOperator& a) const {
  if (a.displacement != 0) return {0.0, 0.0};
  const SpMat* b = a.block(g.sector);
  if (!b) return {0.0, 0.0};
  return g.vector.dot((*b) * g.vector);
}

std::string ManyBodyModel::fingerprint() const {
  std::ostringstream ss;
  ss << lat_->name() << ":" << orbitals_ << ":";
  for (int n : sectors_) ss << n << ",";
  ss << ":";
  for (const Term& t : terms_) {
    std::visit(
        [&](const auto& tt) {
          using T = std::decay_t<decltype(tt)>;
          if constexpr (std::is_same_v<T, HopTerm>)
            ss << "h" << tt.x << "," << tt.y << "," << tt.amp.real() << "," << tt.amp.imag();
          else if constexpr (std::is_same_v<T, OnsiteTerm>)
            ss << "o" << tt.x << "," << tt.energy;
          else if constexpr (std::is_same_v<T, DensityTerm>)
            ss << "d" << tt.x << "," << tt.y << "," << tt.v;
          else
            ss << "r";
        },
        t);
    ss << ";";
  }
  return hex64(fnv1a(ss.str()));
}

}  // namespace topo
