#include <gtest/gtest.h>

#include "impinn/config.hpp"
#include "impinn/presets_data.hpp"
#include "impinn/trainer.hpp"

using namespace impinn;

// The ci-small profile (2000 epochs, batch 1024, m = 64) on the flat square.
TEST(DeskScale, FlatManifoldTrainingConverges) {
  auto c = config::apply_text({}, config::presets::kCiSmall, "ci-small");
  config::apply_override(c, "manifold.kind=\"flat\"");
  config::validate(c);
  const trainer::Problem prob{geometry::HeightField(config::manifold_spec(c)), c.physics.gs,
                              physics::InitialCondition(c.physics.ic), c.physics.mass_includes_v};
  const auto r = trainer::train(network::init_params(c.network), network::make_embedding(c.network),
                                prob, config::train_config(c, 1));
  ASSERT_FALSE(r.diverged);
  ASSERT_EQ(r.history.size(), 2000u);
  EXPECT_LT(r.history.back().l_bc, 1e-4);
  EXPECT_GE(r.history.front().total / r.history.back().total, 100.0);
}
