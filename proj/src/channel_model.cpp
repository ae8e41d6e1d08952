#include "irssec/channel_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace irssec {

namespace {

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

void require(bool condition, const std::string& message) {
  if (!condition) throw DomainError("SystemConfig: " + message);
}

CMatrixXd link_gain(CMatrixXd small_scale, double d, double nu, const SystemConfig& config) {
  small_scale *= std::sqrt(path_loss(d, nu, config.c0_db, config.d0));
  return small_scale;
}

}  // namespace

double distance(const Point2& a, const Point2& b) { return std::hypot(b.x - a.x, b.y - a.y); }

void SystemConfig::validate() const {
  require(M >= 1, "M must be >= 1");
  require(N_b >= 1, "N_b must be >= 1");
  require(N_e >= 1, "N_e must be >= 1");
  require(N_i >= 0, "N_i must be >= 0");
  require(d0 > 0.0, "d0 must be positive");
  require(rician_factor >= 0.0 && std::isfinite(rician_factor), "rician_factor must be finite and >= 0");
  require(std::isfinite(P_dbm) && power_mw() > 0.0, "transmit power must be positive");
  require(std::isfinite(sigma_b_dbm) && sigma_b_mw() > 0.0, "sigma_b must be positive");
  require(std::isfinite(sigma_e_dbm) && sigma_e_mw() > 0.0, "sigma_e must be positive");
  for (double nu : {nu_ai, nu_ib, nu_ie, nu_ab, nu_ae}) require(std::isfinite(nu), "path-loss exponents must be finite");
}

double SystemConfig::power_mw() const { return dbm_to_mw(P_dbm); }
double SystemConfig::sigma_b_mw() const { return dbm_to_mw(sigma_b_dbm); }
double SystemConfig::sigma_e_mw() const { return dbm_to_mw(sigma_e_dbm); }

SystemConfig SystemConfig::reference() {
  SystemConfig config;
  config.M = 128;
  config.N_b = 16;
  config.N_e = 16;
  config.N_i = 256;
  return config;
}

double path_loss(double d, double nu, double c0_db, double d0) {
  if (!(d > 0.0)) throw DomainError("path_loss: distance must be positive");
  if (!(d0 > 0.0)) throw DomainError("path_loss: reference distance must be positive");
  return std::pow(10.0, c0_db / 10.0) * std::pow(d / d0, -nu);
}

CVectorXd steering_vector(double angle, int count) {
  if (count < 1) throw DomainError("steering_vector: count must be >= 1");
  const double phase = std::numbers::pi * std::sin(angle);
  CVectorXd a(count);
  for (int k = 0; k < count; ++k) a(k) = std::polar(1.0, phase * k);
  return a;
}

CMatrixXd rician_matrix(const CMatrixXd& los, double rician_factor, Rng& rng) {
  if (!(rician_factor >= 0.0)) throw DomainError("rician_matrix: rician factor must be >= 0");
  const double los_weight = rician_factor / (1.0 + rician_factor);
  const double nlos_weight = 1.0 / (1.0 + rician_factor);
  CMatrixXd nlos = complex_gaussian<double>(los.rows(), los.cols(), rng);
  if (los_weight == 0.0) return nlos;
  return std::sqrt(los_weight) * los + std::sqrt(nlos_weight) * nlos;
}

CMatrixXd los_matrix(const Point2& from, const Point2& to, int rx_count, int tx_count) {
  if (rx_count == 0 || tx_count == 0) return CMatrixXd::Zero(rx_count, tx_count);
  const double aod = std::atan2(to.y - from.y, to.x - from.x);
  const double aoa = std::numbers::pi - aod;
  return steering_vector(aoa, rx_count) * steering_vector(aod, tx_count).adjoint();
}

void apply_noise_scaling(Channels& channels, const SystemConfig& config) {
  const double scale_b = std::sqrt(config.power_mw() / config.sigma_b_mw());
  const double scale_e = std::sqrt(config.power_mw() / config.sigma_e_mw());
  channels.h_ab = scale_b * channels.h_ab_raw;
  channels.h_ib = scale_b * channels.h_ib_raw;
  channels.h_ae = scale_e * channels.h_ae_raw;
  channels.h_ie = scale_e * channels.h_ie_raw;
}

Channels generate_channels(const SystemConfig& config) { return generate_channels(config, config.seed); }

Channels generate_channels(const SystemConfig& config, std::uint64_t seed) {
  config.validate();
  const double d_ab = distance(config.alice, config.bob);
  const double d_ae = distance(config.alice, config.eve);
  const double d_ai = distance(config.alice, config.irs);
  const double d_ib = distance(config.irs, config.bob);
  const double d_ie = distance(config.irs, config.eve);
  if (d_ab == 0.0 || d_ae == 0.0) throw DomainError("generate_channels: coincident node positions");
  if (config.N_i > 0 && (d_ai == 0.0 || d_ib == 0.0 || d_ie == 0.0))
    throw DomainError("generate_channels: coincident node positions");

  auto stream = [seed](std::string_view link) { return Rng(derive_seed(seed, {string_key(link)})); };

  Channels ch;
  {
    Rng rng = stream("ab");
    ch.h_ab_raw = link_gain(complex_gaussian<double>(config.N_b, config.M, rng), d_ab, config.nu_ab, config);
  }
  {
    Rng rng = stream("ae");
    ch.h_ae_raw = link_gain(complex_gaussian<double>(config.N_e, config.M, rng), d_ae, config.nu_ae, config);
  }
  if (config.N_i > 0) {
    Rng rng_ai = stream("ai");
    ch.h_ai = link_gain(rician_matrix(los_matrix(config.alice, config.irs, config.N_i, config.M), config.rician_factor, rng_ai),
                        d_ai, config.nu_ai, config);
    Rng rng_ib = stream("ib");
    ch.h_ib_raw = link_gain(rician_matrix(los_matrix(config.irs, config.bob, config.N_b, config.N_i), config.rician_factor, rng_ib),
                            d_ib, config.nu_ib, config);
    Rng rng_ie = stream("ie");
    ch.h_ie_raw = link_gain(rician_matrix(los_matrix(config.irs, config.eve, config.N_e, config.N_i), config.rician_factor, rng_ie),
                            d_ie, config.nu_ie, config);
  } else {
    ch.h_ai.resize(0, config.M);
    ch.h_ib_raw.resize(config.N_b, 0);
    ch.h_ie_raw.resize(config.N_e, 0);
  }
  apply_noise_scaling(ch, config);
  return ch;
}

CMatrixXd inject_csi_error(const CMatrixXd& channel, double delta_e, Rng& rng) {
  if (!(delta_e >= 0.0)) throw DomainError("inject_csi_error: delta_e must be >= 0");
  if (delta_e == 0.0 || channel.size() == 0) return channel;
  const double variance = delta_e * channel.squaredNorm() / static_cast<double>(channel.size());
  if (variance == 0.0) return channel;
  return channel + std::sqrt(variance) * complex_gaussian<double>(channel.rows(), channel.cols(), rng);
}

Channels estimate_eve_channels(const Channels& truth, const SystemConfig& config, double delta_e, Rng& rng) {
  Channels estimate = truth;
  estimate.h_ae_raw = inject_csi_error(truth.h_ae_raw, delta_e, rng);
  estimate.h_ie_raw = inject_csi_error(truth.h_ie_raw, delta_e, rng);
  apply_noise_scaling(estimate, config);
  return estimate;
}

Channels without_irs(const Channels& channels) {
  Channels out;
  out.h_ab_raw = channels.h_ab_raw;
  out.h_ae_raw = channels.h_ae_raw;
  out.h_ab = channels.h_ab;
  out.h_ae = channels.h_ae;
  out.h_ai.resize(0, channels.M());
  out.h_ib_raw.resize(channels.N_b(), 0);
  out.h_ie_raw.resize(channels.N_e(), 0);
  out.h_ib.resize(channels.N_b(), 0);
  out.h_ie.resize(channels.N_e(), 0);
  return out;
}

}  // namespace irssec
