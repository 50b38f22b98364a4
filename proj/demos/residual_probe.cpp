// Gray-Scott residuals of an untrained network at a few surface points.
#include <cstdio>

#include "impinn/geometry.hpp"
#include "impinn/network.hpp"
#include "impinn/physics.hpp"

int main() {
  using namespace impinn;
  network::NetworkConfig cfg;
  cfg.fourier_features = 16;
  cfg.width = 32;
  cfg.depth = 2;
  const auto emb = network::make_embedding(cfg);
  const auto params = network::init_params(cfg);
  const geometry::HeightField cloth;
  const physics::GrayScottParams gs;
  const double T = 2000.0;

  std::printf("%zu parameters\n", params.size());
  for (double u : {0.1, 0.5, 0.9}) {
    const double v = 1.0 - u, tau = 0.25;
    const auto out = network::forward_jet(params, emb, {u, v, tau});
    const auto U = physics::to_physical_time(out.U, T);
    const auto V = physics::to_physical_time(out.V, T);
    const auto m = geometry::metric_at(cloth, u, v);
    const auto r = physics::gray_scott_residual(U, V, m, gs, physics::modulated_feed(gs, u, v));
    std::printf("(%.1f, %.1f)  U %.5f  V %.5f  lapU %+.4e  r_U %+.4e  r_V %+.4e\n", u, v,
                U.value, V.value, physics::laplace_beltrami(U, m), r.r_U, r.r_V);
  }
}
