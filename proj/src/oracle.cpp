#include "irssec/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

namespace irssec::oracle {

namespace {

CMatrixXd loop_composite(const CMatrixXd& direct, const CMatrixXd& irs_rx, const CMatrixXd& h_ai,
                         const CVectorXd& theta) {
  CMatrixXd out(direct.rows(), direct.cols());
  for (Eigen::Index r = 0; r < direct.rows(); ++r)
    for (Eigen::Index m = 0; m < direct.cols(); ++m) {
      cd acc = direct(r, m);
      for (Eigen::Index n = 0; n < theta.size(); ++n) acc += irs_rx(r, n) * theta(n) * h_ai(n, m);
      out(r, m) = acc;
    }
  return out;
}

double loop_power(const CMatrixXd& H, const CVectorXd& x) {
  double total = 0.0;
  for (Eigen::Index r = 0; r < H.rows(); ++r) {
    cd acc = 0.0;
    for (Eigen::Index m = 0; m < H.cols(); ++m) acc += H(r, m) * x(m);
    total += std::norm(acc);
  }
  return total;
}

double ratio_bits(double bob_power, double eve_power) { return std::log2((1.0 + bob_power) / (1.0 + eve_power)); }

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t cap) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (out > cap / std::max<std::uint64_t>(base, 1)) return cap + 1;
    out *= base;
  }
  return out;
}

void fill_phases(CVectorXd& theta, std::uint64_t index, int levels) {
  const double step = 2.0 * std::numbers::pi / levels;
  for (Eigen::Index n = theta.size() - 1; n >= 0; --n) {
    theta(n) = std::polar(1.0, step * static_cast<double>(index % levels));
    index /= levels;
  }
}

}  // namespace

double loop_log_ratio(const Channels& ch, const CVectorXd& x, const CVectorXd& theta) {
  const CMatrixXd Hb = loop_composite(ch.h_ab, ch.h_ib, ch.h_ai, theta);
  const CMatrixXd He = loop_composite(ch.h_ae, ch.h_ie, ch.h_ai, theta);
  return ratio_bits(loop_power(Hb, x), loop_power(He, x));
}

CVectorXd candidate_from_index(Eigen::Index M, std::uint64_t index) {
  const double a = std::sqrt(1.0 / (2.0 * static_cast<double>(M)));
  CVectorXd x(M);
  for (Eigen::Index m = M - 1; m >= 0; --m) {
    const unsigned digit = index & 3U;
    x(m) = cd((digit & 2U) ? a : -a, (digit & 1U) ? a : -a);
    index >>= 2;
  }
  return x;
}

EnumerationResult enumerate_precoders(const Channels& ch, const CVectorXd& theta, int max_M, unsigned threads) {
  const Eigen::Index M = ch.M();
  if (M > max_M) throw RefusalError("enumerate_precoders: M exceeds the enumeration guard");
  if (theta.size() != ch.N_i()) throw DomainError("enumerate_precoders: theta has the wrong length");
  const CMatrixXd Hb = loop_composite(ch.h_ab, ch.h_ib, ch.h_ai, theta);
  const CMatrixXd He = loop_composite(ch.h_ae, ch.h_ie, ch.h_ai, theta);
  const std::uint64_t total = std::uint64_t{1} << (2 * M);

  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, total / 4096)));

  struct Best {
    double value = -std::numeric_limits<double>::infinity();
    std::uint64_t index = 0;
  };
  std::vector<Best> shard_best(threads);
  auto work = [&](unsigned shard) {
    const std::uint64_t begin = total * shard / threads;
    const std::uint64_t end = total * (shard + 1) / threads;
    Best best;
    for (std::uint64_t k = begin; k < end; ++k) {
      const CVectorXd x = candidate_from_index(M, k);
      const double value = ratio_bits(loop_power(Hb, x), loop_power(He, x));
      if (value > best.value) best = {value, k};
    }
    shard_best[shard] = best;
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned s = 0; s < threads; ++s) pool.emplace_back(work, s);
    for (auto& t : pool) t.join();
  }
  // Shards are contiguous and ordered, so a strict comparison keeps the first index on ties.
  Best best = shard_best.front();
  for (const Best& b : shard_best)
    if (b.value > best.value) best = b;

  EnumerationResult out;
  out.index = best.index;
  out.x = candidate_from_index(M, best.index);
  out.log_ratio = best.value;
  out.secrecy = std::max(0.0, best.value);
  out.evaluated = total;
  return out;
}

PhaseGridResult grid_search_phases(const Channels& ch, const CVectorXd& x, int levels, GridMode mode,
                                   std::uint64_t budget) {
  if (levels < 1) throw DomainError("grid_search_phases: levels must be >= 1");
  if (x.size() != ch.M()) throw DomainError("grid_search_phases: x has the wrong length");
  const Eigen::Index N_i = ch.N_i();
  const std::uint64_t joint = checked_pow(static_cast<std::uint64_t>(levels), static_cast<std::uint64_t>(N_i), budget);
  const bool exhaustive = mode == GridMode::Exhaustive || (mode == GridMode::Auto && joint <= budget);
  if (mode == GridMode::Exhaustive && joint > budget) throw RefusalError("grid_search_phases: grid exceeds the budget");

  PhaseGridResult out;
  CVectorXd theta(N_i);
  if (exhaustive) {
    double best = -std::numeric_limits<double>::infinity();
    std::uint64_t best_index = 0;
    for (std::uint64_t k = 0; k < joint; ++k) {
      fill_phases(theta, k, levels);
      const double value = loop_log_ratio(ch, x, theta);
      if (value > best) {
        best = value;
        best_index = k;
      }
    }
    fill_phases(theta, best_index, levels);
    out.theta = theta;
    out.log_ratio = best;
    out.evaluated = joint;
    out.exhaustive = true;
  } else {
    const double step = 2.0 * std::numbers::pi / levels;
    theta.setConstant(cd(1.0, 0.0));
    double best = loop_log_ratio(ch, x, theta);
    std::uint64_t evaluated = 1;
    for (int sweep = 0; sweep < 100; ++sweep) {
      bool improved = false;
      for (Eigen::Index n = 0; n < N_i; ++n) {
        const cd keep = theta(n);
        cd best_value = keep;
        for (int k = 0; k < levels; ++k) {
          theta(n) = std::polar(1.0, step * k);
          const double value = loop_log_ratio(ch, x, theta);
          ++evaluated;
          if (value > best + 1e-15 * std::abs(best)) {
            best = value;
            best_value = theta(n);
            improved = true;
          }
        }
        theta(n) = best_value;
      }
      if (!improved) break;
    }
    out.theta = theta;
    out.log_ratio = best;
    out.evaluated = evaluated;
  }
  out.secrecy = std::max(0.0, out.log_ratio);
  return out;
}

JointResult joint_grid_enumeration(const Channels& ch, int levels, std::uint64_t budget) {
  const std::uint64_t phases = checked_pow(static_cast<std::uint64_t>(levels), static_cast<std::uint64_t>(ch.N_i()), budget);
  const std::uint64_t precoders = checked_pow(4, static_cast<std::uint64_t>(ch.M()), budget);
  if (phases > budget || precoders > budget || phases * precoders > budget)
    throw RefusalError("joint_grid_enumeration: search space exceeds the budget");
  JointResult out;
  out.log_ratio = -std::numeric_limits<double>::infinity();
  CVectorXd theta(ch.N_i());
  for (std::uint64_t k = 0; k < phases; ++k) {
    fill_phases(theta, k, levels);
    const EnumerationResult e = enumerate_precoders(ch, theta, 12, 1);
    if (e.log_ratio > out.log_ratio) {
      out.log_ratio = e.log_ratio;
      out.x = e.x;
      out.theta = theta;
    }
  }
  out.secrecy = std::max(0.0, out.log_ratio);
  return out;
}

Eigen::VectorXd finite_difference(const std::function<double(std::span<const double>)>& f,
                                  std::span<const double> point, double h) {
  if (!(h > 0.0)) throw DomainError("finite_difference: step must be positive");
  std::vector<double> p(point.begin(), point.end());
  Eigen::VectorXd grad(static_cast<Eigen::Index>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = f(p);
    p[i] = keep - h;
    const double down = f(p);
    p[i] = keep;
    if (!std::isfinite(up) || !std::isfinite(down)) throw NumericError("finite_difference: non-finite function value");
    grad(static_cast<Eigen::Index>(i)) = (up - down) / (2.0 * h);
  }
  return grad;
}

Eigen::VectorXd flatten(const CVectorXd& v) {
  Eigen::VectorXd out(2 * v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out(2 * i) = v(i).real();
    out(2 * i + 1) = v(i).imag();
  }
  return out;
}

CVectorXd unflatten(std::span<const double> coords) {
  CVectorXd out(static_cast<Eigen::Index>(coords.size() / 2));
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = cd(coords[2 * i], coords[2 * i + 1]);
  return out;
}

}  // namespace irssec::oracle
