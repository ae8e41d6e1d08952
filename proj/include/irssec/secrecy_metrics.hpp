#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "irssec/channel_model.hpp"
#include "irssec/types.hpp"

namespace irssec {

/// Per-component amplitude a = sqrt(1/(2M)) of the one-bit alphabet {±a ± ja}.
template <typename Real = double>
Real one_bit_amplitude(Eigen::Index M) {
  return std::sqrt(Real(1) / (Real(2) * static_cast<Real>(M)));
}

/// A transmit vector whose every entry lies in {±a ± ja}. Only constructible
/// through quantization, so ‖x‖ = 1 holds by construction.
template <typename Real>
class OneBitPrecoderT {
 public:
  OneBitPrecoderT() = default;

  /// Entry m -> a (sign(Re s_m) + j sign(Im s_m)) with sign(0) := +1.
  template <typename Derived>
  static OneBitPrecoderT quantize(const Eigen::MatrixBase<Derived>& s) {
    const Eigen::Index M = s.size();
    if (M < 1) throw DomainError("quantize_one_bit: empty input");
    const Real a = one_bit_amplitude<Real>(M);
    OneBitPrecoderT out;
    out.x_.resize(M);
    for (Eigen::Index m = 0; m < M; ++m) {
      const auto v = s(m);
      out.x_(m) = Complex<Real>(std::real(v) >= Real(0) ? a : -a, std::imag(v) >= Real(0) ? a : -a);
    }
    return out;
  }

  const CVector<Real>& vector() const { return x_; }
  Eigen::Index size() const { return x_.size(); }

 private:
  CVector<Real> x_;
};

/// Unit-modulus IRS reflection coefficients.
template <typename Real>
class IrsPhasesT {
 public:
  IrsPhasesT() = default;

  static IrsPhasesT from_angles(const RVector<Real>& angles) {
    IrsPhasesT out;
    out.theta_.resize(angles.size());
    for (Eigen::Index n = 0; n < angles.size(); ++n) out.theta_(n) = std::polar(Real(1), angles(n));
    return out;
  }

  /// theta_n / |theta_n|; zero entries map to 1.
  template <typename Derived>
  static IrsPhasesT project(const Eigen::MatrixBase<Derived>& theta) {
    IrsPhasesT out;
    out.theta_.resize(theta.size());
    for (Eigen::Index n = 0; n < theta.size(); ++n) {
      const Real mag = std::abs(theta(n));
      out.theta_(n) = mag > Real(0) ? Complex<Real>(theta(n) / mag) : Complex<Real>(1);
    }
    return out;
  }

  const CVector<Real>& vector() const { return theta_; }
  Eigen::Index size() const { return theta_.size(); }

 private:
  CVector<Real> theta_;
};

using OneBitPrecoder = OneBitPrecoderT<double>;
using IrsPhases = IrsPhasesT<double>;

template <typename Derived>
OneBitPrecoderT<typename Eigen::NumTraits<typename Derived::Scalar>::Real> quantize_one_bit(
    const Eigen::MatrixBase<Derived>& s) {
  return OneBitPrecoderT<typename Eigen::NumTraits<typename Derived::Scalar>::Real>::quantize(s);
}

/// h_irs_rx diag(theta) h_ai + h_direct.
template <typename Real, typename DerivedTheta>
CMatrix<Real> composite_channel(const CMatrix<Real>& h_direct, const CMatrix<Real>& h_irs_rx, const CMatrix<Real>& h_ai,
                                const Eigen::MatrixBase<DerivedTheta>& theta) {
  if (h_irs_rx.rows() != h_direct.rows() || h_ai.cols() != h_direct.cols() || h_irs_rx.cols() != h_ai.rows() ||
      theta.size() != h_ai.rows())
    throw DomainError("composite_channel: shape mismatch");
  CMatrix<Real> out = h_direct;
  if (h_ai.rows() > 0) out.noalias() += h_irs_rx * theta.asDiagonal() * h_ai;
  return out;
}

/// H_b(theta) on the noise-scaled channels.
template <typename Real, typename DerivedTheta>
CMatrix<Real> bob_channel(const ChannelSet<Real>& ch, const Eigen::MatrixBase<DerivedTheta>& theta) {
  return composite_channel(ch.h_ab, ch.h_ib, ch.h_ai, theta);
}

template <typename Real, typename DerivedTheta>
CMatrix<Real> eve_channel(const ChannelSet<Real>& ch, const Eigen::MatrixBase<DerivedTheta>& theta) {
  return composite_channel(ch.h_ae, ch.h_ie, ch.h_ai, theta);
}

/// log2(1 + ‖h_eff x‖^2).
template <typename DerivedH, typename DerivedX>
auto rate(const Eigen::MatrixBase<DerivedH>& h_eff, const Eigen::MatrixBase<DerivedX>& x) {
  using Real = typename Eigen::NumTraits<typename DerivedH::Scalar>::Real;
  if (h_eff.cols() != x.size()) throw DomainError("rate: shape mismatch");
  return static_cast<Real>(std::log2(Real(1) + (h_eff * x).squaredNorm()));
}

/// log2 of the Bob/Eve SNR ratio, unclamped; this is what solvers maximize.
template <typename Real, typename DerivedX, typename DerivedTheta>
Real secrecy_log_ratio(const ChannelSet<Real>& ch, const Eigen::MatrixBase<DerivedX>& x,
                       const Eigen::MatrixBase<DerivedTheta>& theta) {
  return rate(bob_channel(ch, theta), x) - rate(eve_channel(ch, theta), x);
}

/// [R_b - R_e]^+ in bits per channel use.
template <typename Real, typename DerivedX, typename DerivedTheta>
Real secrecy_rate(const ChannelSet<Real>& ch, const Eigen::MatrixBase<DerivedX>& x,
                  const Eigen::MatrixBase<DerivedTheta>& theta) {
  return std::max(Real(0), secrecy_log_ratio(ch, x, theta));
}

template <typename Real>
Real secrecy_rate(const ChannelSet<Real>& ch, const OneBitPrecoderT<Real>& x, const IrsPhasesT<Real>& theta) {
  return secrecy_rate(ch, x.vector(), theta.vector());
}

struct Membership {
  bool member = false;
  double max_violation = 0.0;
};

/// Continuous characterization of the one-bit set: ‖x‖^2 = 1 together with
/// |Re x_m|, |Im x_m| <= a. The reported violation is the largest of
/// |‖x‖^2 - 1| and the box excesses.
template <typename Derived>
Membership one_bit_membership(const Eigen::MatrixBase<Derived>& x, double tolerance = 1e-9) {
  const Eigen::Index M = x.size();
  if (M < 1) throw DomainError("one_bit_membership: empty input");
  const double a = one_bit_amplitude<double>(M);
  double violation = std::abs(static_cast<double>(x.squaredNorm()) - 1.0);
  for (Eigen::Index m = 0; m < M; ++m) {
    violation = std::max(violation, std::abs(static_cast<double>(std::real(x(m)))) - a);
    violation = std::max(violation, std::abs(static_cast<double>(std::imag(x(m)))) - a);
  }
  return {violation <= tolerance, violation};
}

/// max_n | |theta_n| - 1 |.
template <typename Derived>
double unit_modulus_violation(const Eigen::MatrixBase<Derived>& theta) {
  double worst = 0.0;
  for (Eigen::Index n = 0; n < theta.size(); ++n) worst = std::max(worst, std::abs(std::abs(theta(n)) - 1.0));
  return worst;
}

/// max_m distance (per component) from x to its one-bit quantization.
template <typename Derived>
double alphabet_distance(const Eigen::MatrixBase<Derived>& x) {
  const auto snapped = quantize_one_bit(x);
  return (x - snapped.vector()).cwiseAbs().maxCoeff();
}

}  // namespace irssec
