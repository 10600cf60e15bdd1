#pragma once

#include <nlohmann/json.hpp>

namespace plasma_spike {

/// Dimension and exponent of the model -Δv = μ[v-1]₊ᵖ together with the
/// constants every other module derives from them.
struct ProblemConfig {
  int N = 3;
  double p = 2.0;
  double p_N = 3.0;      ///< N/(N-2), the upper end of the admissible window
  double omega_N = 0.0;  ///< volume of the unit ball in R^N
  double C_N = 0.0;      ///< 1/(N(N-2)ω_N), fundamental-solution constant

  /// |S^{N-1}| = N ω_N.
  double sphere_area() const { return N * omega_N; }
};

double unit_ball_volume(int N);

/// Validates 3 ≤ N and 1 < p < N/(N-2); throws std::invalid_argument otherwise.
ProblemConfig make_config(int N, double p);

/// Physical parameters (α, λ) recovered from the normalized model.
/// Only |alpha| enters any formula; alpha is stored with a non-positive sign.
struct PlasmaState {
  double alpha = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double mass_integral = 0.0;  ///< ∫[v-1]₊ᵖ
};

PlasmaState recover_plasma_state(double mu, double mass_integral, const ProblemConfig& config);

/// (λ/|α|^{1-p/p_N})^{N/2}; equals μ^{N/2}·∫[v-1]₊ᵖ.
double quantization_ratio(const PlasmaState& state, const ProblemConfig& config);

void to_json(nlohmann::json& j, const ProblemConfig& config);
void from_json(const nlohmann::json& j, ProblemConfig& config);
void to_json(nlohmann::json& j, const PlasmaState& state);

}  // namespace plasma_spike
