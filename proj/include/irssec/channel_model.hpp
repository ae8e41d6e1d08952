#pragma once

#include <cstdint>

#include "irssec/rng.hpp"
#include "irssec/types.hpp"

namespace irssec {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point2& a, const Point2& b);

/// Scenario scalars for one IRS-assisted downlink. Defaults are the
/// desk-scale scenario (M=16, N_i=32, N_b=N_e=4) on the reference geometry.
struct SystemConfig {
  int M = 16;
  int N_b = 4;
  int N_e = 4;
  int N_i = 32;
  double P_dbm = 30.0;
  double sigma_b_dbm = -50.0;
  double sigma_e_dbm = -50.0;
  Point2 alice{0.0, 0.0};
  Point2 irs{50.0, 0.0};
  Point2 bob{55.0, 2.0};
  Point2 eve{45.0, 2.0};
  double nu_ai = 2.2;
  double nu_ib = 2.5;
  double nu_ie = 2.5;
  double nu_ab = 3.5;
  double nu_ae = 3.5;
  double rician_factor = 5.0;
  double c0_db = -30.0;
  double d0 = 1.0;
  std::uint64_t seed = 0;

  /// Throws DomainError when an invariant is violated.
  void validate() const;

  double power_mw() const;
  double sigma_b_mw() const;
  double sigma_e_mw() const;

  /// Full-size reference scenario (M=128, N_i=256, N_b=N_e=16).
  static SystemConfig reference();
};

/// Raw channels (pure propagation) and their noise-scaled versions. The
/// scaled matrices fold sqrt(P/sigma^2) of the receiving node into the
/// channel, so rates read log2(1 + ||H x||^2) with unit noise.
template <typename Real>
struct ChannelSet {
  CMatrix<Real> h_ab_raw;  // N_b x M
  CMatrix<Real> h_ae_raw;  // N_e x M
  CMatrix<Real> h_ai;      // N_i x M
  CMatrix<Real> h_ib_raw;  // N_b x N_i
  CMatrix<Real> h_ie_raw;  // N_e x N_i

  CMatrix<Real> h_ab;
  CMatrix<Real> h_ae;
  CMatrix<Real> h_ib;
  CMatrix<Real> h_ie;

  Eigen::Index M() const { return h_ab.cols(); }
  Eigen::Index N_b() const { return h_ab.rows(); }
  Eigen::Index N_e() const { return h_ae.rows(); }
  Eigen::Index N_i() const { return h_ai.rows(); }
};

using Channels = ChannelSet<double>;

/// C0 * (d/d0)^(-nu), C0 given in dB.
double path_loss(double d, double nu, double c0_db, double d0);

/// Half-wavelength ULA response: element k is exp(j*pi*k*sin(angle)).
CVectorXd steering_vector(double angle, int count);

/// sqrt(K/(1+K)) * los + sqrt(1/(1+K)) * G with G ~ CN(0,1) i.i.d.
CMatrixXd rician_matrix(const CMatrixXd& los, double rician_factor, Rng& rng);

/// LoS component a_r(pi - aod) a_t(aod)^H for a link from `from` to `to`.
CMatrixXd los_matrix(const Point2& from, const Point2& to, int rx_count, int tx_count);

/// Draws all five links. Each link pulls from its own stream seeded by
/// derive_seed(config.seed, link), so draws do not depend on evaluation order.
Channels generate_channels(const SystemConfig& config);

/// Same as above but seeds link streams from `seed` instead of config.seed.
Channels generate_channels(const SystemConfig& config, std::uint64_t seed);

/// Recomputes the scaled matrices from the raw ones.
void apply_noise_scaling(Channels& channels, const SystemConfig& config);

/// H + E with E ~ CN(0, delta_e * ||H||_F^2 / numel) i.i.d.
CMatrixXd inject_csi_error(const CMatrixXd& channel, double delta_e, Rng& rng);

/// Eve's channels as seen by Alice under NMSE delta_e: h_ae and h_ie (raw and
/// scaled) are perturbed; Bob's links and h_ai are untouched.
Channels estimate_eve_channels(const Channels& truth, const SystemConfig& config, double delta_e, Rng& rng);

/// Drops the IRS entirely (N_i = 0); the cascaded term vanishes identically.
Channels without_irs(const Channels& channels);

}  // namespace irssec
