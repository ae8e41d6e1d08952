#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "irssec/channel_model.hpp"

// Brute-force and numerical-differentiation references. Nothing in here calls
// into the solver evaluation path (composite_channel, rate, secrecy_rate):
// channels and rates are recomputed with explicit loops.
namespace irssec::oracle {

/// Secrecy log-ratio (bits, unclamped) computed with explicit loops.
double loop_log_ratio(const Channels& channels, const CVectorXd& x, const CVectorXd& theta);

/// Unit-norm one-bit vector number `index` in lexicographic order: entry 0 is
/// the most significant base-4 digit, digit d -> (d & 2 ? +a : -a) + j (d & 1 ? +a : -a).
CVectorXd candidate_from_index(Eigen::Index M, std::uint64_t index);

struct EnumerationResult {
  CVectorXd x;
  double secrecy = 0.0;    // clamped, bits
  double log_ratio = 0.0;  // unclamped, bits
  std::uint64_t index = 0;
  std::uint64_t evaluated = 0;
};

/// Exact maximizer over all 4^M one-bit vectors with theta held fixed. Ties
/// resolve to the lexicographically first candidate. Refuses M > max_M.
EnumerationResult enumerate_precoders(const Channels& channels, const CVectorXd& theta, int max_M = 12,
                                      unsigned threads = 0);

enum class GridMode { Auto, Exhaustive, CoordinateAscent };

struct PhaseGridResult {
  CVectorXd theta;
  double secrecy = 0.0;
  double log_ratio = 0.0;
  bool exhaustive = false;
  std::uint64_t evaluated = 0;
};

/// Best theta with every phase in {2 pi k / levels}. Exhaustive when
/// levels^N_i <= budget (Auto/Exhaustive), coordinate ascent otherwise (Auto)
/// or on request. Exhaustive mode over budget throws RefusalError.
PhaseGridResult grid_search_phases(const Channels& channels, const CVectorXd& x, int levels,
                                   GridMode mode = GridMode::Auto, std::uint64_t budget = 1'000'000);

struct JointResult {
  CVectorXd x;
  CVectorXd theta;
  double secrecy = 0.0;
  double log_ratio = 0.0;
};

/// Exhaustive over the phase grid and 4^M precoders jointly. Refuses
/// levels^N_i * 4^M > budget.
JointResult joint_grid_enumeration(const Channels& channels, int levels, std::uint64_t budget = 50'000'000);

/// Central differences (f(p + h e_i) - f(p - h e_i)) / 2h for every coordinate.
Eigen::VectorXd finite_difference(const std::function<double(std::span<const double>)>& f,
                                  std::span<const double> point, double h = 1e-6);

/// [Re v_0, Im v_0, Re v_1, ...].
Eigen::VectorXd flatten(const CVectorXd& v);
CVectorXd unflatten(std::span<const double> coords);

}  // namespace irssec::oracle
