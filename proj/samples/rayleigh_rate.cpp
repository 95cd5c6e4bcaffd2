// Average rates at the default deployment under Rayleigh fading, for a few SNR values,
// then the same scenario with a line-of-sight kappa-mu intended link.
#include <cmath>
#include <cstdio>

#include "d2dgeo.hpp"

int main() {
  using namespace d2dgeo;
  ScenarioSpec s;
  std::printf("%8s %12s %12s %12s\n", "SNR dB", "R_c", "R_hat_d", "R_d");
  for (double snr : {0.0, 5.0, 10.0, 20.0}) {
    s.params.n0 = std::pow(10.0, -snr / 10.0);
    const auto r = avg_rates(s);
    std::printf("%8.1f %12.6f %12.6f %12.6f\n", snr, r.cellular, r.d2d_mode, r.potential_d2d);
  }

  s.params.n0 = std::pow(10.0, -0.5);
  s.fading_intended = parse_fading("kappa-mu:kappa=3,mu=2");
  const auto r = avg_rates(s);
  std::printf("kappa-mu(3,2) intended at 5 dB: R_c %.6f  R_hat_d %.6f\n", r.cellular, r.d2d_mode);
  return 0;
}
