#include "plasma_spike/model_core.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace plasma_spike {

double unit_ball_volume(int N) {
  const double half = 0.5 * N;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

ProblemConfig make_config(int N, double p) {
  if (N < 3) {
    throw std::invalid_argument("dimension N must be at least 3, got " + std::to_string(N));
  }
  ProblemConfig c;
  c.N = N;
  c.p = p;
  c.p_N = static_cast<double>(N) / (N - 2);
  if (!(p > 1.0 && p < c.p_N)) {
    std::ostringstream msg;
    msg << "exponent p=" << p << " outside the admissible window (1, " << c.p_N << ") for N=" << N;
    throw std::invalid_argument(msg.str());
  }
  c.omega_N = unit_ball_volume(N);
  c.C_N = 1.0 / (N * (N - 2) * c.omega_N);
  return c;
}

PlasmaState recover_plasma_state(double mu, double mass_integral, const ProblemConfig& config) {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (!(mass_integral > 0.0)) throw std::invalid_argument("mass integral must be positive");
  const double p = config.p;
  const double abs_alpha = std::pow(mass_integral, -1.0 / p);
  PlasmaState s;
  s.alpha = -abs_alpha;
  s.lambda = mu * std::pow(abs_alpha, 1.0 - p);
  s.mu = mu;
  s.mass_integral = mass_integral;
  return s;
}

double quantization_ratio(const PlasmaState& state, const ProblemConfig& config) {
  if (!(state.lambda > 0.0) || state.alpha == 0.0) {
    throw std::invalid_argument("quantization_ratio needs lambda > 0 and alpha != 0");
  }
  const double abs_alpha = std::abs(state.alpha);
  const double base = state.lambda / std::pow(abs_alpha, 1.0 - config.p / config.p_N);
  return std::pow(base, 0.5 * config.N);
}

void to_json(nlohmann::json& j, const ProblemConfig& config) {
  j = nlohmann::json{{"N", config.N}, {"p", config.p}};
}

void from_json(const nlohmann::json& j, ProblemConfig& config) {
  config = make_config(j.at("N").get<int>(), j.at("p").get<double>());
}

void to_json(nlohmann::json& j, const PlasmaState& state) {
  j = nlohmann::json{{"alpha", state.alpha},
                     {"lambda", state.lambda},
                     {"mu", state.mu},
                     {"mass_integral", state.mass_integral}};
}

}  // namespace plasma_spike
