#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "dielmode/common.hpp"
#include "dielmode/coupling.hpp"
#include "dielmode/fft.hpp"
#include "dielmode/material.hpp"
#include "dielmode/parallel.hpp"

namespace dielmode {

// Ordered pick of modes out of a ModeBasis; no duplicates.
struct ModeSelection {
  std::vector<int> modes;  // indices into the basis (longitudinal first)

  static ModeSelection all(const ModeBasis& basis) {
    ModeSelection sel;
    for (int i = 0; i < basis.n_modes(); ++i) sel.modes.push_back(i);
    return sel;
  }

  void validate(const ModeBasis& basis) const {
    std::vector<char> seen(basis.n_modes(), 0);
    for (int m : modes) {
      if (m < 0 || m >= basis.n_modes())
        throw config_error("mode selection index out of range: " + std::to_string(m));
      if (seen[m]) throw config_error("duplicate mode in selection: " + std::to_string(m));
      seen[m] = 1;
    }
    if (modes.empty()) throw config_error("empty mode selection");
  }

  int size() const { return static_cast<int>(modes.size()); }
};

// System matrix at one Laplace point: diagonal 1/chi plus the family
// restoring terms plus the radiation blocks.
//   par  diagonal: 1/chi + 1/kappa_par + s S_par_par(mm)
//   perp diagonal: 1/chi + a^2 s^2 / (c0^2 kappa_perp) + s deltaS(mm)
//   off-diagonal : s S
inline MatrixXcd assemble_M(const ModeSelection& sel, const DrudeLorentz& material,
                            const ModeBasis& basis, const CouplingMatrix& S, complexd s,
                            double c0 = constants::c0) {
  const int q = sel.size();
  const complexd inv_chi = material.inv_chi(s);
  const double a = basis.mesh->a;
  MatrixXcd M(q, q);
  for (int i = 0; i < q; ++i) {
    const int gi = sel.modes[i];
    for (int j = 0; j < q; ++j) {
      const int gj = sel.modes[j];
      M(i, j) = s * S.S(gi, gj);
    }
    M(i, i) += inv_chi;
    if (basis.is_par(gi))
      M(i, i) += 1.0 / basis.kappa(gi);
    else
      M(i, i) += a * a * s * s / (c0 * c0 * basis.kappa(gi));
  }
  return M;
}

struct TransferAtResult {
  MatrixXcd H;
  double residual;  // || M H - I ||_max
};

inline TransferAtResult transfer_at(const MatrixXcd& M) {
  Eigen::PartialPivLU<MatrixXcd> lu(M);
  MatrixXcd H = lu.solve(MatrixXcd::Identity(M.rows(), M.cols()));
  const MatrixXcd R = M * H - MatrixXcd::Identity(M.rows(), M.cols());
  return {std::move(H), R.cwiseAbs().maxCoeff()};
}

struct SweepConfig {
  int n_freq = 4096;             // uniform samples on (0, omega_max]
  double omega_max = 0;          // 0: pick by the decay rule below
  double omega_cap = 0;          // pre-sweep upper bound; 0: 8 * omega_p
  double decay_fraction = 0.05;  // |H| has fallen below this fraction of its peak
  int presweep_points = 256;
  double window_fraction = 0.1;  // raised-cosine taper over the top of the band
  double contour_alpha = 1.0;    // sigma_c = alpha * domega for impulse sweeps
  int coupling_nodes = 65;       // spline nodes for S(s); 0 = evaluate exactly per sample
  double flag_residual = 1e-8;   // inversion residual above this flags the sample
};

struct TransferSample {
  std::vector<double> omega;  // n_freq points, omega_k = k * domega
  std::vector<MatrixXcd> H;
  MatrixXcd H_dc;          // extra sample at omega = 0 on the same contour
  double sigma_c = 0;      // real part of the sampling contour s = sigma_c + i omega
  double omega_max = 0;
  std::vector<double> residual;
  std::vector<char> flagged;
  int n_flagged = 0;
  double window_fraction = 0.1;
  double epsilon_used = 0;  // material regularization active during the sweep
};

// Cubic-spline (natural) interpolation of S(s) entries over the band; S is
// entire in s and varies on the scale c0/a, so a modest node count resolves
// it to far better accuracy than the kernel quadrature itself.
class CouplingInterpolant {
 public:
  CouplingInterpolant(const CouplingAssembler& assembler, double sigma_c, double omega_max,
                      int nodes) {
    if (nodes < 4) throw config_error("coupling interpolation needs at least 4 nodes");
    const int Q = assembler.basis().n_modes();
    omega_nodes_.resize(nodes);
    values_.assign(nodes, MatrixXcd(Q, Q));
    for (int k = 0; k < nodes; ++k) {
      omega_nodes_[k] = omega_max * k / (nodes - 1.0);
      values_[k] = assembler.evaluate(complexd(sigma_c, omega_nodes_[k])).S;
    }
    build();
  }

  MatrixXcd at(double omega) const {
    const int n = static_cast<int>(omega_nodes_.size());
    const double h = omega_nodes_[1] - omega_nodes_[0];
    int k = std::min(n - 2, std::max(0, static_cast<int>(omega / h)));
    const double x = (omega - omega_nodes_[k]) / h;
    // cubic Hermite from values and second derivatives
    const MatrixXcd& y0 = values_[k];
    const MatrixXcd& y1 = values_[k + 1];
    const MatrixXcd& m0 = second_[k];
    const MatrixXcd& m1 = second_[k + 1];
    const double a = 1.0 - x, b = x;
    return a * y0 + b * y1 +
           (h * h / 6.0) * ((a * a * a - a) * m0 + (b * b * b - b) * m1);
  }

 private:
  void build() {
    const int n = static_cast<int>(omega_nodes_.size());
    const double h = omega_nodes_[1] - omega_nodes_[0];
    second_.assign(n, MatrixXcd::Zero(values_[0].rows(), values_[0].cols()));
    // tridiagonal solve for natural spline second derivatives, entrywise
    std::vector<double> c(n, 0.0);
    std::vector<MatrixXcd> d(n, MatrixXcd::Zero(values_[0].rows(), values_[0].cols()));
    for (int k = 1; k < n - 1; ++k) {
      const double denom = 4.0 - c[k - 1];
      c[k] = 1.0 / denom;
      d[k] = ((values_[k + 1] - 2.0 * values_[k] + values_[k - 1]) * (6.0 / (h * h)) -
              d[k - 1]) /
             denom;
    }
    for (int k = n - 2; k >= 1; --k) second_[k] = d[k] - c[k] * second_[k + 1];
  }

  std::vector<double> omega_nodes_;
  std::vector<MatrixXcd> values_;
  std::vector<MatrixXcd> second_;
};

// Decay rule for the band edge: coarse sweep on (0, omega_cap], then the
// smallest grid point past the global |H| peak where the max entry magnitude
// has fallen below decay_fraction times the peak.
inline double select_omega_max(const CouplingAssembler& assembler, const DrudeLorentz& material,
                               const ModeSelection& sel, const SweepConfig& cfg,
                               double c0 = constants::c0) {
  if (cfg.omega_max > 0) return cfg.omega_max;
  const double cap = cfg.omega_cap > 0 ? cfg.omega_cap : 8.0 * material.omega_p;
  const int n = cfg.presweep_points;
  const double domega = cap / n;
  const double sigma = std::max(material.epsilon_shift(), cfg.contour_alpha * domega);
  std::vector<double> maxabs(n);
  CouplingInterpolant interp(assembler, sigma, cap, std::min(65, n));
  for (int k = 0; k < n; ++k) {
    const double w = (k + 1) * domega;
    const complexd s(sigma, w);
    const CouplingMatrix S{s, 0, assembler.basis().n_par, assembler.basis().n_perp, interp.at(w)};
    const MatrixXcd M = assemble_M(sel, material, assembler.basis(), S, s, c0);
    maxabs[k] = transfer_at(M).H.cwiseAbs().maxCoeff();
  }
  int kpeak = 0;
  for (int k = 1; k < n; ++k)
    if (maxabs[k] > maxabs[kpeak]) kpeak = k;
  for (int k = kpeak + 1; k < n; ++k)
    if (maxabs[k] < cfg.decay_fraction * maxabs[kpeak]) return (k + 1) * domega;
  return cap;
}

// Full sweep on s = sigma_c + i omega_k. The susceptibility is evaluated
// exactly at every sample; the coupling blocks come from the interpolant
// unless coupling_nodes == 0. Flagged samples (ill-conditioned inversions)
// are replaced by neighbor interpolation and reported.
inline TransferSample frequency_sweep(const CouplingAssembler& assembler,
                                      const DrudeLorentz& material, const ModeSelection& sel,
                                      const SweepConfig& cfg, double sigma_c,
                                      double c0 = constants::c0) {
  sel.validate(assembler.basis());
  TransferSample out;
  out.omega_max = select_omega_max(assembler, material, sel, cfg, c0);
  out.sigma_c = sigma_c;
  out.window_fraction = cfg.window_fraction;
  out.epsilon_used = material.epsilon_shift();
  const int n = cfg.n_freq;
  const double domega = out.omega_max / n;
  out.omega.resize(n);
  for (int k = 0; k < n; ++k) out.omega[k] = (k + 1) * domega;
  out.H.resize(n);
  out.residual.assign(n, 0.0);
  out.flagged.assign(n, 0);

  std::unique_ptr<CouplingInterpolant> interp;
  if (cfg.coupling_nodes > 0)
    interp = std::make_unique<CouplingInterpolant>(assembler, sigma_c, out.omega_max,
                                                   cfg.coupling_nodes);
  const int n_par = assembler.basis().n_par;
  const int n_perp = assembler.basis().n_perp;

  auto sample = [&](double w, MatrixXcd* H, double* resid) {
    const complexd s(sigma_c, w);
    CouplingMatrix S;
    if (interp) {
      S = CouplingMatrix{s, std::abs(s) * assembler.basis().mesh->a / c0, n_par, n_perp,
                         interp->at(w)};
    } else {
      S = assembler.evaluate(s);
    }
    const MatrixXcd M = assemble_M(sel, material, assembler.basis(), S, s, c0);
    auto r = transfer_at(M);
    *H = std::move(r.H);
    *resid = r.residual;
  };

  parallel_chunks(static_cast<std::size_t>(n), 64, [&](std::size_t, std::size_t k0, std::size_t k1) {
    for (std::size_t k = k0; k < k1; ++k) sample(out.omega[k], &out.H[k], &out.residual[k]);
  });
  double dc_resid = 0;
  sample(0.0, &out.H_dc, &dc_resid);

  for (int k = 0; k < n; ++k)
    if (!(out.residual[k] <= cfg.flag_residual)) {
      out.flagged[k] = 1;
      out.n_flagged++;
    }
  // replace flagged samples by linear interpolation from clean neighbors
  for (int k = 0; k < n; ++k) {
    if (!out.flagged[k]) continue;
    int lo = k - 1, hi = k + 1;
    while (lo >= 0 && out.flagged[lo]) --lo;
    while (hi < n && out.flagged[hi]) ++hi;
    if (lo >= 0 && hi < n) {
      const double x = double(k - lo) / double(hi - lo);
      out.H[k] = (1.0 - x) * out.H[lo] + x * out.H[hi];
    } else if (lo >= 0) {
      out.H[k] = out.H[lo];
    } else if (hi < n) {
      out.H[k] = out.H[hi];
    }
  }
  return out;
}

struct ImpulseResponse {
  std::vector<double> t;      // 2 n_freq points on [-T/2, T/2)
  std::vector<MatrixXd> h;    // real Q x Q per time point
  double dt = 0;
  double imag_residue_rel = 0;
  double anticausal_fraction = 0;
  double sigma_c = 0;
  double window_fraction = 0;

  MatrixXd at(double time) const {  // linear interpolation; zero outside grid
    if (h.empty()) throw numeric_error("empty impulse response");
    const double t0 = t.front();
    const double x = (time - t0) / dt;
    const int n = static_cast<int>(t.size());
    if (x <= 0) return MatrixXd::Zero(h[0].rows(), h[0].cols());
    if (x >= n - 1) return MatrixXd::Zero(h[0].rows(), h[0].cols());
    const int k = static_cast<int>(x);
    const double f = x - k;
    return (1.0 - f) * h[k] + f * h[k + 1];
  }
};

// Scalar synthesis core shared by the matrix and coordinate paths: Hermitian
// extension of band samples (spectrum[0] is the dc sample, spectrum[k] sits
// at k * domega), taper, inverse FFT, contour unwinding. Output is ordered
// on the two-sided axis t in [-T/2, T/2).
struct ScalarSynthesis {
  std::vector<double> t;
  std::vector<double> value;
  double dt = 0;
  double max_abs = 0, max_imag = 0;
  double energy = 0, anticausal_energy = 0;
};

inline ScalarSynthesis synthesize_time_series(const std::vector<complexd>& spectrum_with_dc,
                                              double domega, double sigma_c,
                                              double window_fraction) {
  const int nf = static_cast<int>(spectrum_with_dc.size()) - 1;
  if (nf < 2 || (nf & (nf - 1)) != 0)
    throw config_error("synthesis requires a power-of-two frequency count");
  const int N = 2 * nf;
  const double omega_max = nf * domega;
  const double dt = constants::pi / omega_max;

  auto window = [&](double w) {
    const double edge = (1.0 - window_fraction) * omega_max;
    if (w <= edge) return 1.0;
    const double x = (w - edge) / (omega_max - edge);
    return 0.5 * (1.0 + std::cos(constants::pi * x));
  };

  std::vector<complexd> spec(N);
  spec[0] = spectrum_with_dc[0];
  for (int k = 1; k < nf; ++k) {
    spec[k] = window(k * domega) * spectrum_with_dc[k];
    spec[N - k] = std::conj(spec[k]);
  }
  spec[nf] = 0.0;  // taper closes at the Nyquist bin, keeping the extension Hermitian
  ifft_radix2(spec);

  ScalarSynthesis out;
  out.dt = dt;
  out.t.resize(N);
  out.value.resize(N);
  const double scale = N * domega / (2.0 * constants::pi);
  for (int j = 0; j < N; ++j) {
    const double tj = (j - nf) * dt;
    out.t[j] = tj;
    const complexd v = spec[(j + nf) % N] * scale * std::exp(sigma_c * tj);
    out.value[j] = v.real();
    out.max_abs = std::max(out.max_abs, std::abs(v.real()));
    out.max_imag = std::max(out.max_imag, std::abs(v.imag()));
    const double p = v.real() * v.real();
    out.energy += p;
    if (tj < 0) out.anticausal_energy += p;
  }
  return out;
}

// Hermitian extension H(-omega) = conj(H(omega)), raised-cosine taper over
// the top window_fraction of the band, inverse FFT, then the exact e^{s_c t}
// unwinding of the Bromwich contour shift.
inline ImpulseResponse impulse_from_transfer(const TransferSample& ts) {
  const int nf = static_cast<int>(ts.omega.size());
  const int q = static_cast<int>(ts.H_dc.rows());
  const double domega = ts.omega[0];

  ImpulseResponse out;
  out.sigma_c = ts.sigma_c;
  out.window_fraction = ts.window_fraction;

  double max_h = 0, max_im = 0, e_total = 0, e_anti = 0;
  std::vector<complexd> spectrum(nf + 1);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) {
      spectrum[0] = ts.H_dc(a, b);
      for (int k = 1; k <= nf; ++k) spectrum[k] = ts.H[k - 1](a, b);
      const ScalarSynthesis syn =
          synthesize_time_series(spectrum, domega, ts.sigma_c, ts.window_fraction);
      if (out.h.empty()) {
        out.t = syn.t;
        out.dt = syn.dt;
        out.h.assign(syn.t.size(), MatrixXd::Zero(q, q));
      }
      for (std::size_t j = 0; j < syn.t.size(); ++j) out.h[j](a, b) = syn.value[j];
      max_h = std::max(max_h, syn.max_abs);
      max_im = std::max(max_im, syn.max_imag);
      e_total += syn.energy;
      e_anti += syn.anticausal_energy;
    }
  out.imag_residue_rel = max_h > 0 ? max_im / max_h : 0.0;
  out.anticausal_fraction = e_total > 0 ? e_anti / e_total : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Small-size closed forms of the diagonal responses
// ---------------------------------------------------------------------------

// par :  H(s) = wp^2 / (s^2 + s G + w0^2 + wp^2/kappa)
// perp:  H(s) = wp^2 / (delta s^2 + s G + w0^2),  delta = 1 + beta^2/kappa
// with the matching damped-sinusoid impulse responses. The overdamped branch
// switches sin -> sinh and is flagged.
struct ClosedFormResponse {
  bool parallel = true;
  double omega_p = 0, gamma = 0;
  double delta = 1;      // 1 + beta^2/kappa for the perp family
  double w2 = 0;         // restoring term: w0^2 + wp^2/kappa (par), w0^2 (perp)
  double inv_tau = 0;    // decay rate 1/tau
  double Omega = 0;      // oscillation frequency (or growth rate when overdamped)
  bool overdamped = false;
  bool ramp = false;     // Omega == 0 case: critically simple s^-2 response

  complexd H(complexd s) const {
    return omega_p * omega_p / (delta * s * s + gamma * s + w2);
  }
  double h(double t) const {
    if (t < 0) return 0.0;
    const double amp = omega_p * omega_p / delta;
    const double env = std::exp(-inv_tau * t);
    if (ramp) return amp * env * t;
    if (overdamped) return amp * env * std::sinh(Omega * t) / Omega;
    return amp * env * std::sin(Omega * t) / Omega;
  }
};

inline ClosedFormResponse small_size_closed_form(const DrudeLorentz& material, double kappa,
                                                 bool parallel, double beta) {
  ClosedFormResponse r;
  r.parallel = parallel;
  r.omega_p = material.omega_p;
  r.gamma = material.gamma;
  if (parallel) {
    r.delta = 1.0;
    r.w2 = material.omega_0 * material.omega_0 + material.omega_p * material.omega_p / kappa;
  } else {
    r.delta = 1.0 + beta * beta / kappa;
    r.w2 = material.omega_0 * material.omega_0;
  }
  r.inv_tau = material.gamma / (2.0 * r.delta);
  const double arg = r.w2 / r.delta - r.inv_tau * r.inv_tau;
  const double scale = std::max(r.w2 / r.delta, r.inv_tau * r.inv_tau);
  if (std::abs(arg) < 1e-12 * std::max(scale, 1e-300)) {
    r.ramp = true;
    r.Omega = 0.0;
  } else if (arg > 0) {
    r.Omega = std::sqrt(arg);
  } else {
    r.overdamped = true;
    r.Omega = std::sqrt(-arg);
  }
  return r;
}

}  // namespace dielmode
