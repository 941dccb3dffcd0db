#pragma once

#include <cmath>
#include <cstdint>

#include "sparsnn/errors.hpp"

namespace sparsnn {

enum class SurrogateKind { FastSigmoid, Atan, SpikeRateEscape, Sso };

// Backward-pass approximation of the spike derivative, evaluated at
// x = U - U_thr. Only the fields of the selected kind are consulted.
struct SurrogateSpec {
  SurrogateKind kind = SurrogateKind::FastSigmoid;

  double fs_k = 25.0;        // FS slope
  double atan_alpha = 2.0;   // ATAN sharpness
  double sre_k = 1.0;        // SRE peak scale
  double sre_beta = 1.0;     // SRE decay rate
  double u_thr = 1.0;        // SRE centering threshold
  double sso_mu = 0.0;       // SSO mean shift
  double sso_sigma2 = 0.25;  // SSO variance scale
  uint64_t rng_seed = 0;     // SSO stream seed

  void validate() const {
    switch (kind) {
      case SurrogateKind::FastSigmoid:
        if (!(fs_k > 0.0)) throw config_error("surrogate: fs_k must be > 0");
        break;
      case SurrogateKind::Atan:
        if (!(atan_alpha > 0.0)) throw config_error("surrogate: atan_alpha must be > 0");
        break;
      case SurrogateKind::SpikeRateEscape:
        if (!(sre_k > 0.0 && sre_beta > 0.0)) throw config_error("surrogate: sre_k, sre_beta must be > 0");
        break;
      case SurrogateKind::Sso:
        if (!(sso_sigma2 >= 0.0)) throw config_error("surrogate: sso_sigma2 must be >= 0");
        break;
    }
  }

  static SurrogateSpec fast_sigmoid(double k) {
    SurrogateSpec s;
    s.kind = SurrogateKind::FastSigmoid;
    s.fs_k = k;
    return s;
  }
  static SurrogateSpec atan(double alpha) {
    SurrogateSpec s;
    s.kind = SurrogateKind::Atan;
    s.atan_alpha = alpha;
    return s;
  }
  // Convenience constructor tying peak scale to decay rate, the common
  // plotting convention; both stay independently settable.
  static SurrogateSpec spike_rate_escape(double beta, double u_thr = 1.0) {
    SurrogateSpec s;
    s.kind = SurrogateKind::SpikeRateEscape;
    s.sre_k = beta;
    s.sre_beta = beta;
    s.u_thr = u_thr;
    return s;
  }
  static SurrogateSpec sso(double mu, double sigma2, uint64_t seed) {
    SurrogateSpec s;
    s.kind = SurrogateKind::Sso;
    s.sso_mu = mu;
    s.sso_sigma2 = sigma2;
    s.rng_seed = seed;
    return s;
  }
};

// Forward-pass spike decision; x >= 0 fires (matches the membrane step's
// non-strict threshold).
inline double heaviside(double x) { return x >= 0.0 ? 1.0 : 0.0; }

// Identifies one SSO sampling site so BPTT replays draw identical noise.
struct SsoKey {
  int layer = 0;
  int timestep = 0;
  int neuron = 0;
};

namespace detail {

inline uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based uniform in [0,1): keyed, never stateful.
inline double sso_uniform(uint64_t seed, const SsoKey& key) {
  uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  h = splitmix64(h ^ static_cast<uint64_t>(static_cast<uint32_t>(key.layer)));
  h = splitmix64(h ^ static_cast<uint64_t>(static_cast<uint32_t>(key.timestep)));
  h = splitmix64(h ^ static_cast<uint64_t>(static_cast<uint32_t>(key.neuron)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline double surrogate_grad(const SurrogateSpec& spec, double x, const SsoKey& key = {}) {
  if (!std::isfinite(x)) throw numeric_error("surrogate_grad: non-finite x");
  switch (spec.kind) {
    case SurrogateKind::FastSigmoid: {
      double d = 1.0 + spec.fs_k * std::fabs(x);
      return 1.0 / (d * d);
    }
    case SurrogateKind::Atan: {
      double s = M_PI * x * spec.atan_alpha / 2.0;
      return (1.0 / M_PI) / (1.0 + s * s);
    }
    case SurrogateKind::SpikeRateEscape:
      return spec.sre_k * std::exp(-spec.sre_beta * std::fabs(x + (spec.u_thr - 1.0)));
    case SurrogateKind::Sso: {
      if (x >= 0.0) return 1.0;
      double u = detail::sso_uniform(spec.rng_seed, key) - 0.5;
      return (u + spec.sso_mu) * spec.sso_sigma2;
    }
  }
  throw config_error("surrogate_grad: unknown kind");
}

// Smooth monotone primitive whose analytic derivative equals surrogate_grad
// exactly (normalization constant 1). Closed forms:
//   FS:   f(x) = x / (1 + k|x|)                          f' = 1/(1+k|x|)^2
//   ATAN: f(x) = (2/(pi^2 a)) * atan(pi a x / 2)         f' = (1/pi)/(1+(pi a x/2)^2)
//   SRE:  f(x) = sign(z) (k/b)(1 - e^{-b|z|}), z = x + (U_thr - 1)
// SSO has no deterministic primitive.
inline double relaxed_forward(const SurrogateSpec& spec, double x) {
  if (!std::isfinite(x)) throw numeric_error("relaxed_forward: non-finite x");
  switch (spec.kind) {
    case SurrogateKind::FastSigmoid:
      return x / (1.0 + spec.fs_k * std::fabs(x));
    case SurrogateKind::Atan:
      return (2.0 / (M_PI * M_PI * spec.atan_alpha)) * std::atan(M_PI * spec.atan_alpha * x / 2.0);
    case SurrogateKind::SpikeRateEscape: {
      double z = x + (spec.u_thr - 1.0);
      double mag = (spec.sre_k / spec.sre_beta) * (1.0 - std::exp(-spec.sre_beta * std::fabs(z)));
      return z >= 0.0 ? mag : -mag;
    }
    case SurrogateKind::Sso:
      throw config_error("relaxed_forward: SSO has no deterministic primitive");
  }
  throw config_error("relaxed_forward: unknown kind");
}

}  // namespace sparsnn
