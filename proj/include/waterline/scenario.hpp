#pragma once

// Random MIMO-OFDM instances.
//
// Each realization draws L complex Gaussian N x N tap matrices whose
// variances decay geometrically (decay^(l-1), normalized to sum 1; every
// entry additionally scaled by 1/N so that E[sum of eigenvalues] = N per
// subcarrier).  The frequency response on subcarrier j is the length-J DFT
// of the taps, and the eigenvalues of H_j^H H_j become the gains of N
// eigenchannels.  All N*J eigenchannels share one budget equal to J (unit
// power per subcarrier); the noise variance follows from
// SNR = P_sub / (N sigma^2) with P_sub = 1.
//
// Box bounds are gamma*u <= p <= tau*u.  With the default uniform
// normalization u is the equal share budget / (N J); the literal
// normalization uses u = P_sub / (4 N).
//
// Random numbers: std::mt19937_64 seeded per realization with
// splitmix64(seed + realization), uniforms from the top 53 bits, normals by
// Box-Muller.  Every step is fixed by the language standard, so the same
// seed gives the same instances everywhere.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "waterline/error.hpp"
#include "waterline/objective.hpp"
#include "waterline/problem.hpp"

namespace waterline {

enum class BoundNormalization { Uniform, Literal };

inline std::string_view to_string(BoundNormalization b) {
  return b == BoundNormalization::Uniform ? "uniform" : "literal";
}

enum class ScenarioObjective { InverseMse, LogCapacity };

inline std::string_view to_string(ScenarioObjective o) {
  return o == ScenarioObjective::InverseMse ? "inverse_mse" : "log_capacity";
}

struct ScenarioSpec {
  int antennas = 4;
  int taps = 7;
  double decay = 0.5;
  int subcarriers = 256;
  double snr_db = 10.0;
  double gamma = 0.0;
  double tau = kInf;
  int realizations = 1;
  std::uint64_t seed = 1;
  BoundNormalization normalization = BoundNormalization::Uniform;
  ScenarioObjective objective = ScenarioObjective::InverseMse;

  void validate() const {
    if (antennas < 1 || taps < 1 || subcarriers < 1) {
      throw Error(ErrorKind::InvalidProblem, "antennas, taps and subcarriers must be >= 1");
    }
    if (!(decay > 0.0) || !std::isfinite(decay)) throw Error(ErrorKind::InvalidProblem, "decay must be > 0");
    if (!std::isfinite(snr_db)) throw Error(ErrorKind::InvalidProblem, "snr_db must be finite");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error(ErrorKind::InvalidProblem, "gamma must be finite and >= 0");
    if (!(tau >= gamma)) throw Error(ErrorKind::InvalidProblem, "tau must be >= gamma");
    if (realizations < 1) throw Error(ErrorKind::InvalidProblem, "realizations must be >= 1");
  }

  double noise_variance() const { return 1.0 / (antennas * std::pow(10.0, snr_db / 10.0)); }
  double budget() const { return static_cast<double>(subcarriers); }
  double bound_unit() const {
    return normalization == BoundNormalization::Uniform ? 1.0 / antennas : 1.0 / (4.0 * antennas);
  }
};

struct ScenarioInstance {
  BoxProblem problem;
  std::vector<double> eigenvalues;  // subcarrier-major: index j * N + n
  int realization = 0;
  std::uint64_t sub_seed = 0;
  int resamples = 0;  // draws rejected for a (numerically) zero eigenvalue
  double noise_variance = 0.0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Portable complex Gaussian source.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Circularly symmetric complex normal with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance) {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-std::log(u1) * variance);  // sqrt(-2 ln u1 * variance / 2)
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  std::mt19937_64 engine_;
};

/// Tap variances decay^(l-1), normalized to sum 1.
inline std::vector<double> tap_variances(int taps, double decay) {
  std::vector<double> v(static_cast<std::size_t>(taps));
  double s = 0.0;
  for (int l = 0; l < taps; ++l) {
    v[static_cast<std::size_t>(l)] = std::pow(decay, l);
    s += v[static_cast<std::size_t>(l)];
  }
  for (auto& x : v) x /= s;
  return v;
}

/// Eigenvalues of H_j^H H_j for every subcarrier of one channel draw.
inline std::vector<double> draw_eigenvalues(const ScenarioSpec& spec, GaussianSource& rng) {
  const int N = spec.antennas;
  const int L = spec.taps;
  const int J = spec.subcarriers;
  const auto var = tap_variances(L, spec.decay);
  std::vector<Eigen::MatrixXcd> taps(static_cast<std::size_t>(L), Eigen::MatrixXcd(N, N));
  for (int l = 0; l < L; ++l) {
    for (int r = 0; r < N; ++r) {
      for (int c = 0; c < N; ++c) {
        taps[static_cast<std::size_t>(l)](r, c) = rng.complex_normal(var[static_cast<std::size_t>(l)] / N);
      }
    }
  }
  std::vector<double> eig;
  eig.reserve(static_cast<std::size_t>(N * J));
  Eigen::MatrixXcd H(N, N);
  for (int j = 0; j < J; ++j) {
    H.setZero();
    for (int l = 0; l < L; ++l) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) * l / J;
      H += taps[static_cast<std::size_t>(l)] * std::polar(1.0, angle);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.adjoint() * H, Eigen::EigenvaluesOnly);
    for (int n = 0; n < N; ++n) eig.push_back(es.eigenvalues()(n));
  }
  return eig;
}

inline ScenarioInstance generate_one(const ScenarioSpec& spec, int realization) {
  spec.validate();
  ScenarioInstance inst;
  inst.realization = realization;
  inst.sub_seed = splitmix64(spec.seed + static_cast<std::uint64_t>(realization));
  GaussianSource rng(inst.sub_seed);
  std::vector<double> eig;
  while (true) {
    eig = draw_eigenvalues(spec, rng);
    bool ok = true;
    for (double e : eig) ok = ok && e > 1e-14;
    if (ok) break;
    if (++inst.resamples > 100) throw Error(ErrorKind::InvalidProblem, "channel draws keep producing zero eigenvalues");
  }
  inst.eigenvalues = eig;
  inst.noise_variance = spec.noise_variance();

  const double s2 = inst.noise_variance;
  auto& pb = inst.problem;
  pb.budget = spec.budget();
  const double unit = spec.bound_unit();
  for (double lambda : eig) {
    if (spec.objective == ScenarioObjective::InverseMse) {
      // per-eigenchannel MSE sigma^2 / (sigma^2 + lambda p)
      pb.objectives.push_back(Objective::inverse_mse(s2, lambda, s2));
    } else {
      pb.objectives.push_back(Objective::log_capacity(1.0, lambda / s2, 1.0));
    }
    pb.lower.push_back(spec.gamma * unit);
    pb.upper.push_back(std::isfinite(spec.tau) ? spec.tau * unit : kInf);
  }
  pb.validate();
  return inst;
}

inline std::vector<ScenarioInstance> generate(const ScenarioSpec& spec) {
  spec.validate();
  std::vector<ScenarioInstance> out;
  out.reserve(static_cast<std::size_t>(spec.realizations));
  for (int r = 0; r < spec.realizations; ++r) out.push_back(generate_one(spec, r));
  return out;
}

/// Mean per-eigenchannel MSE of an allocation on an inverse-MSE instance.
inline double mean_mse(const BoxProblem& pb, std::span<const double> p) {
  return -total_utility(pb.objectives, p) / static_cast<double>(pb.size());
}

}  // namespace waterline
