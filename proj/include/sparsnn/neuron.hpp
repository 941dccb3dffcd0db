#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sparsnn/errors.hpp"
#include "sparsnn/tensor.hpp"

namespace sparsnn {

enum class ResetMode { Subtract, Zero };

// Leaky integrate-and-fire: u' = beta*u + syn, fire at u' >= theta.
struct LifParams {
  double beta = 0.5;     // decay factor, (0, 1]
  double theta = 1.0;    // firing threshold, > 0
  ResetMode reset = ResetMode::Subtract;

  void validate() const {
    if (!(beta > 0.0 && beta <= 1.0)) throw config_error("LifParams: beta must be in (0,1]");
    if (!(theta > 0.0)) throw config_error("LifParams: theta must be > 0");
  }
};

// RC-circuit neuron: u' = (1 - T/(R*C))*u + syn*(T/C).
struct LapParams {
  double R = 2.0;
  double C = 1.0;
  double T_step = 1.0;
  double theta = 1.0;
  ResetMode reset = ResetMode::Subtract;

  double decay() const { return 1.0 - T_step / (R * C); }
  double input_scale() const { return T_step / C; }

  void validate() const {
    if (!(R > 0.0 && C > 0.0 && T_step > 0.0)) throw config_error("LapParams: R, C, T_step must be > 0");
    double d = T_step / (R * C);
    if (!(d > 0.0 && d < 1.0)) throw config_error("LapParams: T_step/(R*C) must be in (0,1)");
    if (!(theta > 0.0)) throw config_error("LapParams: theta must be > 0");
  }

  // Equivalent parameters for a given LIF decay: T_step/C = 1 and
  // 1 - T_step/(R*C) = beta. The computed decay reproduces beta bit-exactly
  // whenever 1/(1-beta) round-trips in double (all dyadic beta do).
  static LapParams from_beta(double beta, double theta, ResetMode reset = ResetMode::Subtract) {
    if (!(beta > 0.0 && beta < 1.0)) throw config_error("from_beta: beta must be in (0,1)");
    LapParams p;
    p.T_step = 1.0;
    p.C = 1.0;
    p.R = 1.0 / (1.0 - beta);
    p.theta = theta;
    p.reset = reset;
    return p;
  }
};

// Equivalent capacitance for a decay factor: C = -1/ln(beta).
inline double beta_to_capacitance(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw config_error("beta_to_capacitance: beta must be in (0,1)");
  return -1.0 / std::log(beta);
}

namespace detail {

// Shared membrane update. Integrate, compare, reset happen within the same
// step; spiking is non-strict (u >= theta fires). The op order is identical
// for LIF and Lapicque so that matching (decay, input_scale) parameters give
// bit-identical trajectories.
inline std::vector<uint8_t> membrane_step(Vec& u, const Vec& syn, double decay, double input_scale,
                                          double theta, ResetMode reset) {
  if (u.size() != syn.size()) throw shape_error("membrane_step: syn shape != state shape");
  check_finite(syn, "synaptic input");
  std::vector<uint8_t> spikes(u.size(), 0);
  for (size_t i = 0; i < u.size(); ++i) {
    double v = decay * u[i] + syn[i] * input_scale;
    if (v >= theta) {
      spikes[i] = 1;
      u[i] = (reset == ResetMode::Subtract) ? v - theta : 0.0;
    } else {
      u[i] = v;
    }
  }
  return spikes;
}

}  // namespace detail

inline std::vector<uint8_t> lif_step(Vec& u, const Vec& syn, const LifParams& p) {
  return detail::membrane_step(u, syn, p.beta, 1.0, p.theta, p.reset);
}

inline std::vector<uint8_t> lapicque_step(Vec& u, const Vec& syn, const LapParams& p) {
  return detail::membrane_step(u, syn, p.decay(), p.input_scale(), p.theta, p.reset);
}

}  // namespace sparsnn
