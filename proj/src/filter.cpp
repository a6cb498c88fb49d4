#include "topo/filter.hpp"

#include <cmath>

namespace topo {

InGap in_gap_from_string(const std::string& s) {
  if (s == "linear-odd") return InGap::LinearOdd;
  if (s == "cubic-odd") return InGap::CubicOdd;
  if (s == "zero") return InGap::Zero;
  throw config_error("unknown in-gap interpolation: " + s);
}

std::string to_string(InGap g) {
  switch (g) {
    case InGap::LinearOdd: return "linear-odd";
    case InGap::CubicOdd: return "cubic-odd";
    case InGap::Zero: return "zero";
  }
  return "?";
}

cplx filter_response(const FilterSpec& f, double omega) {
  if (f.delta <= 0.0) throw config_error("filter delta must be positive");
  double w = omega;
  if (w == 0.0) return {0.0, 0.0};
  if (std::abs(w) >= f.delta) return {0.0, -1.0 / w};
  double d2 = f.delta * f.delta;
  switch (f.in_gap) {
    case InGap::LinearOdd:
      return {0.0, -w / d2};
    case InGap::CubicOdd:
      // value and slope both match -1/w at the gap edges
      return {0.0, -(2.0 * w / d2 - w * w * w / (d2 * d2))};
    case InGap::Zero:
      return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

cplx filter_response_smooth(const FilterSpec& f, double window, double omega) {
  if (omega == 0.0) return {0.0, 0.0};
  double dn = f.notch();
  double g = (1.0 - std::exp(-(omega * omega) / (dn * dn))) *
             std::exp(-(omega * omega) / (window * window));
  return {0.0, -g / omega};
}

double filter_weight(const FilterSpec& f, double window, double t) {
  double dn = f.notch();
  double a2 = std::sqrt(1.0 / (window * window) + 1.0 / (dn * dn));
  return -0.5 * (std::erf(0.5 * t * window) - std::erf(0.5 * t / a2));
}

double filter_weight_by_quadrature(const FilterSpec& f, double window, double t) {
  // W(t) = -(1/pi) int_0^inf g(w) sin(w t) dw with the smooth response -i g(w).
  const double w_cut = 8.0 * window;
  const int n = 200001;  // Simpson, odd count
  const double h = w_cut / (n - 1);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    double w = k * h;
    double g = (w == 0.0) ? 0.0 : -filter_response_smooth(f, window, w).imag();
    double val = g * std::sin(w * t);
    double coef = (k == 0 || k == n - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    acc += coef * val;
  }
  return -(acc * h / 3.0) / pi;
}

TimeGrid time_grid(const FilterSpec& f, double span, double& window_out) {
  if (span <= 0.0) span = 1.0;
  double window = f.window_width > 0.0 ? f.window_width : 600.0 * span;
  window_out = window;
  TimeGrid g;
  g.t_max = f.t_max > 0.0 ? f.t_max : 10.0 / f.notch();
  // Sampling rate keeps the alias of the windowed response negligible.
  double dt_auto = 2.0 * pi / (3.0 * window);
  g.dt = f.dt > 0.0 ? f.dt : dt_auto;
  if (g.dt > pi / (2.0 * span))
    throw compute_error("filter_dt", "time step too coarse for the spectral span");
  return g;
}

Mat apply_filter_in_eigenbasis(const Mat& a, const RVec& evals, const Mat& evecs,
                               const FilterSpec& f) {
  Mat b = evecs.adjoint() * a * evecs;
  for (Eigen::Index m = 0; m < b.rows(); ++m)
    for (Eigen::Index n = 0; n < b.cols(); ++n)
      b(m, n) *= filter_response(f, evals(m) - evals(n));
  return evecs * b * evecs.adjoint();
}

Mat time_domain_filter(const std::function<Mat(double)>& evolve, const FilterSpec& f,
                       double span) {
  double window = 0.0;
  TimeGrid g = time_grid(f, span, window);
  const int n = g.steps();
  Mat acc;
  for (int k = -n; k <= n; ++k) {
    double t = k * g.dt;
    double w = filter_weight(f, window, t);
    double coef = (k == -n || k == n) ? 0.5 : 1.0;  // trapezoid ends
    Mat term = evolve(t);
    if (acc.size() == 0) acc = Mat::Zero(term.rows(), term.cols());
    acc += (coef * w * g.dt) * term;
  }
  return acc;
}

FilterReport verify_filter(const FilterSpec& f, double span) {
  FilterReport rep;
  rep.in_gap = to_string(f.in_gap);
  rep.delta = f.delta;
  double window = 0.0;
  TimeGrid g = time_grid(f, span, window);
  rep.t_max = g.t_max;
  rep.dt = g.dt;

  const int samples = 4001;
  for (int k = 0; k < samples; ++k) {
    double w = f.delta + (span - f.delta) * k / (samples - 1.0);
    rep.out_of_gap_residual =
        std::max(rep.out_of_gap_residual, std::abs(filter_response(f, w) + iu / w));
    rep.smooth_out_of_gap_residual = std::max(
        rep.smooth_out_of_gap_residual, std::abs(filter_response_smooth(f, window, w) + iu / w));
    double wi = -f.delta + 2.0 * f.delta * k / (samples - 1.0);
    rep.oddness_residual = std::max(
        rep.oddness_residual, std::abs(filter_response(f, wi) + filter_response(f, -wi)));
  }
  rep.gap_edge_jump =
      std::abs(filter_response(f, f.delta * (1.0 - 1e-12)) - filter_response(f, f.delta));

  // L1 tail of the reconstructed W beyond t_max, relative to the total mass.
  auto l1 = [&](double a, double b, int n) {
    double h = (b - a) / n;
    double s = 0.0;
    for (int k = 0; k <= n; ++k) {
      double coef = (k == 0 || k == n) ? 0.5 : 1.0;
      s += coef * std::abs(filter_weight(f, window, a + k * h));
    }
    return s * h;
  };
  double total = l1(0.0, g.t_max, 40000);
  double tail = l1(g.t_max, 3.0 * g.t_max, 40000);
  rep.tail_fraction = tail / (total + tail);
  return rep;
}

}  // namespace topo
