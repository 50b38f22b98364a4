// Geometry of the default cloth and a short finite-element run on it.
#include <cstdio>

#include "impinn/geometry.hpp"
#include "impinn/metrics.hpp"
#include "impinn/physics.hpp"
#include "impinn/sfem.hpp"

int main() {
  using namespace impinn;
  const geometry::HeightField cloth;
  const auto stats = metrics::curvature_stats(cloth, 201);
  std::printf("area %.4f, elevation [%.3f, %.3f], det g in [%.3f, %.3f] (mean %.3f)\n",
              stats.area, stats.z.min, stats.z.max, stats.det_g.min, stats.det_g.max,
              stats.det_g.mean);

  const auto m = geometry::metric_at(cloth, 0.3, 0.7);
  std::printf("g(0.3, 0.7) = [[%.4f, %.4f], [%.4f, %.4f]]\n", m.g[0][0], m.g[0][1], m.g[1][0],
              m.g[1][1]);

  sfem::ReferenceOptions opt;
  opt.n = 48;
  opt.dt = 1.0;
  opt.t_end = 200.0;
  opt.checkpoints = {50.0, 100.0};
  const auto run = sfem::run_reference(cloth, physics::GrayScottParams{},
                                       physics::InitialCondition{}, opt);
  for (const auto& s : run.snapshots) {
    const auto v = metrics::summarize(s.V);
    std::printf("t = %5.0f  V mean %.4f  std %.4f  max %.4f\n", s.time, v.mean, v.std, v.max);
  }
}
