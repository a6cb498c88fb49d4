#pragma once

#include <functional>

#include "topo/common.hpp"

namespace topo {

// ---------------------------------------------------------------------------
// Quasi-adiabatic filter. The frequency response is purely imaginary, odd,
// and equals -i/omega outside the gap threshold; the in-gap interpolation is
// a convention and ground-state quantities must not depend on it (tested).
//
// Two realizations:
//   * spectral: multiply matrix elements by what(E_m - E_n) in the eigenbasis
//     of the Hamiltonian (exact outside the gap by construction);
//   * time-domain: quadrature of W(t) * evolve(op, t), where W is the inverse
//     Fourier transform of a smooth notch/window response. Used only as an
//     independent cross-check of the spectral realization.
// ---------------------------------------------------------------------------

enum class InGap { LinearOdd, CubicOdd, Zero };

struct FilterSpec {
  double delta = 0.0;  // gap threshold; must satisfy 0 < delta < spectral gap
  InGap in_gap = InGap::LinearOdd;

  // Time-domain realization knobs; zero means "derive from delta and span".
  double t_max = 0.0;
  double dt = 0.0;
  double notch_width = 0.0;   // smooth in-gap notch scale (default delta / 4.1)
  double window_width = 0.0;  // gaussian high-frequency window (default from span)

  double notch() const { return notch_width > 0.0 ? notch_width : delta / 4.1; }
};

InGap in_gap_from_string(const std::string& s);
std::string to_string(InGap g);

// Spectral-realization frequency response.
cplx filter_response(const FilterSpec& f, double omega);

// Smooth response used by the time-domain realization:
//   -i (1 - exp(-(w/notch)^2)) exp(-(w/window)^2) / w
cplx filter_response_smooth(const FilterSpec& f, double window, double omega);

// W(t) for the smooth response; this is its inverse Fourier transform in
// closed form (difference of error functions).
double filter_weight(const FilterSpec& f, double window, double t);

// Same W(t) by direct numerical quadrature of the response (test oracle).
double filter_weight_by_quadrature(const FilterSpec& f, double window, double t);

struct TimeGrid {
  double t_max = 0.0;
  double dt = 0.0;
  int steps() const { return static_cast<int>(std::llround(t_max / dt)); }
};

// Derive quadrature parameters from the spectral span. Throws if a
// user-supplied dt fails the Nyquist check against the span.
TimeGrid time_grid(const FilterSpec& f, double span, double& window_out);

// Filter an operator given the eigen-system of the Hamiltonian:
// B = V^dag A V, B_mn *= what(E_m - E_n), return V B V^dag.
Mat apply_filter_in_eigenbasis(const Mat& a, const RVec& evals, const Mat& evecs,
                               const FilterSpec& f);

// Trapezoidal quadrature of W(t) evolve(t) over [-t_max, t_max].
// `evolve(t)` must return the Heisenberg-evolved operator at time t.
Mat time_domain_filter(const std::function<Mat(double)>& evolve, const FilterSpec& f,
                       double span);

struct FilterReport {
  double out_of_gap_residual = 0.0;  // max |what + i/w| over sampled |w| >= delta
  double oddness_residual = 0.0;
  double gap_edge_jump = 0.0;        // |what(delta^-) - what(delta^+)|
  double smooth_out_of_gap_residual = 0.0;
  double tail_fraction = 0.0;        // L1 mass of W beyond t_max / total
  double t_max = 0.0;
  double dt = 0.0;
  std::string in_gap;
  double delta = 0.0;
};

FilterReport verify_filter(const FilterSpec& f, double span = 10.0);

}  // namespace topo
