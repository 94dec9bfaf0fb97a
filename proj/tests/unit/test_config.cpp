#include <gtest/gtest.h>

#include "test_util.hpp"
#include "ulmtrack/config.hpp"
#include "ulmtrack/error.hpp"
#include "ulmtrack/experiment.hpp"

namespace ulmtrack {
namespace {

TEST(KeyValueConfig, SectionsCommentsAndLists) {
  const auto kv = KeyValueConfig::parse(R"(
top = 1
# a comment
[tracker]
sigma_a = 75.5   # trailing comment
a_init_mode = "paper_literal"

[sweep]
frame_rates = [15, 25.5, 35]
concentrations = ["low", "high"]
label = "a # not a comment"
)");
  EXPECT_EQ(kv.get_int("top"), 1);
  EXPECT_EQ(kv.get_double("tracker.sigma_a"), 75.5);
  EXPECT_EQ(kv.get_string("tracker.a_init_mode"), "paper_literal");
  EXPECT_EQ(kv.get_double_list("sweep.frame_rates"), (std::vector<double>{15, 25.5, 35}));
  EXPECT_EQ(kv.get_list("sweep.concentrations"), (std::vector<std::string>{"low", "high"}));
  EXPECT_EQ(kv.get_string("sweep.label"), "a # not a comment");
  EXPECT_FALSE(kv.has("sigma_a"));
  EXPECT_FALSE(kv.get_double("tracker.missing").has_value());
}

TEST(KeyValueConfig, ScalarIsSingletonList) {
  const auto kv = KeyValueConfig::parse("[s]\nx = 3\n");
  EXPECT_EQ(kv.get_double_list("s.x"), (std::vector<double>{3}));
}

TEST(KeyValueConfig, MalformedLines) {
  EXPECT_THROW(KeyValueConfig::parse("[tracker\n"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse("just words\n"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse(" = 3\n"), ConfigError);
  const auto kv = KeyValueConfig::parse("a = x1\nb = 2.5\n");
  EXPECT_THROW(kv.get_double("a"), ConfigError);
  EXPECT_THROW(kv.get_int("b"), ConfigError);
}

TEST(KeyValueConfig, MissingFile) {
  EXPECT_THROW(KeyValueConfig::load(testing::scratch_dir() / "none.toml"), ConfigError);
}

TEST(ExperimentConfig, OverridesDefaults) {
  const auto kv = KeyValueConfig::parse(R"(
[tracker]
sigma_a = 80
r_std = 4
min_track_len = 5
[flow]
s0 = 2.5
heart_rate = 60
[simulate]
noise = 2
duration = 12
preset = "curved3"
[render]
pixel = 2.5
gradient = "per_distance"
)");
  const auto c = experiment_config(kv);
  EXPECT_EQ(c.tracker.sigma_a_mm_s2, 80.0);
  EXPECT_EQ(c.tracker.r_std_um, 4.0);
  EXPECT_EQ(c.tracker.min_track_len, 5);
  EXPECT_EQ(c.tracker.v_max_mm_s, 20.0);
  EXPECT_EQ(c.flow.s0_mm_s, 2.5);
  EXPECT_EQ(c.flow.heart_rate_bpm, 60.0);
  EXPECT_EQ(c.loc_noise_std_um, 2.0);
  EXPECT_EQ(c.duration_s, 12.0);
  EXPECT_EQ(c.preset, "curved3");
  EXPECT_EQ(c.pixel_um, 2.5);
  EXPECT_EQ(c.gradient, GradientMode::per_distance);
}

TEST(ExperimentConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(experiment_config(KeyValueConfig::parse("[tracker]\nsigma = 3\n")), ConfigError);
  EXPECT_THROW(experiment_config(KeyValueConfig::parse("[render]\ncolour = red\n")), ConfigError);
  EXPECT_THROW(experiment_config(KeyValueConfig::parse("[tracker]\nr_std = -1\n")), ConfigError);
  EXPECT_THROW(experiment_config(KeyValueConfig::parse("[flow]\ns0 = 0\n")), ConfigError);
  EXPECT_THROW(experiment_config(KeyValueConfig::parse("[simulate]\npreset = maze\n")), ConfigError);
  EXPECT_THROW(experiment_config(KeyValueConfig::parse("[simulate]\nnoise = -1\n")), ConfigError);
}

TEST(SweepSpec, ReadsListsAndSeeds) {
  const auto kv = KeyValueConfig::parse(R"(
[sweep]
frame_rates = [25]
accelerations = [0, 75]
concentrations = [mid]
modes = [accel]
n_seeds = 3
)");
  const auto s = sweep_spec(kv, 10);
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{10, 11, 12}));
  EXPECT_EQ(s.modes, std::vector<MotionMode>{MotionMode::accel});
  EXPECT_EQ(s.cells().size(), 6u);

  const auto explicit_seeds = sweep_spec(KeyValueConfig::parse("[sweep]\nseeds = [4, 9]\n"), 1);
  EXPECT_EQ(explicit_seeds.seeds, (std::vector<std::uint64_t>{4, 9}));
  EXPECT_THROW(sweep_spec(KeyValueConfig::parse("[sweep]\nseeds = [x]\n"), 1), ConfigError);
  EXPECT_THROW(sweep_spec(KeyValueConfig::parse("[sweep]\nframe_rates = []\n"), 1), ConfigError);
  EXPECT_THROW(sweep_spec(KeyValueConfig::parse("[sweep]\nframe_rates = [-1]\n"), 1), ConfigError);
  EXPECT_THROW(sweep_spec(KeyValueConfig::parse("[sweep]\nn_seeds = 0\n"), 1), ConfigError);
}

}  // namespace
}  // namespace ulmtrack
