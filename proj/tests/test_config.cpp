#include <gtest/gtest.h>

#include <fstream>
#include <string>

#include "dpsim/experiment_config.hpp"

using namespace dpsim;
using namespace dpsim::literals;

namespace {

ExperimentConfig load(const std::string& text, std::vector<std::string> overrides = {}) {
  return load_config_text(text, "t.toml", false, overrides);
}

std::string error_of(const std::string& text) {
  try {
    load(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"(experiment = "m"
[app.a]
cores = 2
load_ops = 1000
)";

}  // namespace

TEST(Config, MinimalDefaults) {
  const auto c = load(kMinimal);
  EXPECT_EQ(c.experiment, "m");
  EXPECT_EQ(c.policy, sched::PolicyKind::cygnus);
  ASSERT_EQ(c.apps.size(), 1u);
  EXPECT_EQ(c.apps[0].cores, 2u);
  EXPECT_EQ(c.duration, 100_ms);
  EXPECT_EQ(c.warmup_time(), 10_ms);
}

TEST(Config, SectionsAndInfinity) {
  const auto c = load(R"cfg(policy = "cygnus"
duration_ms = 5
[sched]
n = "inf"
t_us = 2.5
preempt_us = 5
[cost]
msg_hop_cycles = 0
[app.x]
cores = 3
load_ops = 2e5
service = "bimodal(0.01, 1, 100)"
steering = "weights"
weights = [3, 1,
           1]
)cfg");
  EXPECT_EQ(c.sched.batch_pull_n, sched::SchedulerParams::kUnbounded);
  EXPECT_EQ(c.sched.quanta_t, SimTime::from_nanos(2500));
  EXPECT_EQ(c.sched.preemption_interval, 5_us);
  EXPECT_EQ(c.cost.msg_hop_cycles, 0u);
  EXPECT_EQ(c.apps[0].weights, (std::vector<double>{3, 1, 1}));
  EXPECT_EQ(c.apps[0].service.describe(), ServiceDist::bimodal(0.01, 1_us, 100_us).describe());
}

TEST(Config, UnknownKeyNamesLine) {
  const auto msg = error_of(std::string(kMinimal) + "bogus = 3\n");
  EXPECT_NE(msg.find("t.toml:5"), std::string::npos) << msg;
  EXPECT_NE(msg.find("bogus"), std::string::npos) << msg;
}

TEST(Config, DuplicateKeyRejected) {
  const auto msg = error_of(std::string(kMinimal) + "cores = 3\n");
  EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
}

TEST(Config, ValueErrors) {
  EXPECT_NE(error_of("policy = \"fifo\"\n[app.a]\nload_ops = 1\n").find("t.toml:1"), std::string::npos);
  EXPECT_FALSE(error_of("duration_ms = -5\n[app.a]\nload_ops = 1\n").empty());
  EXPECT_FALSE(error_of("[app.a]\nservice = \"gamma(1)\"\nload_ops = 1\n").empty());
  EXPECT_FALSE(error_of("experiment = \"none\"\n").empty());
}

TEST(Config, CentralizedNeedsIoCores) {
  EXPECT_FALSE(error_of("policy = \"centralized\"\n[app.a]\nload_ops = 1000\n").empty());
  EXPECT_TRUE(error_of("policy = \"centralized\"\n[sched]\nio_cores = 1\n[app.a]\nload_ops = 1000\n").empty());
}

TEST(Config, OverridesWinAndAcceptBareValues) {
  const auto c = load(kMinimal, {"policy=dfcfs", "app.a.cores=4", "sched.t_us=inf", "seeds=[4,5]"});
  EXPECT_EQ(c.policy, sched::PolicyKind::dfcfs);
  EXPECT_EQ(c.apps[0].cores, 4u);
  EXPECT_TRUE(c.sched.quanta_t.is_infinite());
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{4, 5}));
  EXPECT_THROW(load(kMinimal, {"nonsense"}), ConfigError);
}

TEST(Config, JsonForm) {
  const auto c = load_config_text(R"cfg({"experiment": "j", "policy": "stealing",
    "app": {"a": {"cores": 4, "load_ops": 1000, "service": "constant(2)"}},
    "sched": {"n": 8}})cfg",
                                  "t.json", true);
  EXPECT_EQ(c.experiment, "j");
  EXPECT_EQ(c.policy, sched::PolicyKind::stealing);
  EXPECT_EQ(c.sched.batch_pull_n, 8u);
  EXPECT_EQ(c.apps[0].cores, 4u);
}

TEST(Config, ServiceDsl) {
  EXPECT_EQ(render_service(parse_service("exponential(5)")), "exponential(5)");
  EXPECT_EQ(render_service(parse_service("uniform(2.5)")), "uniform(2.5)");
  EXPECT_EQ(render_service(parse_service("bimodal(0.005,1,1000)")), "bimodal(0.005,1,1000)");
  EXPECT_EQ(parse_service("constant(2)").sample(*std::make_unique<RngStream>(1, 1)), 2_us);
  EXPECT_THROW(parse_service("bimodal(2,1,1000)"), ConfigError);
  EXPECT_THROW(parse_service("exponential(0)"), ConfigError);
}

TEST(Presets, ShapesMatchTheirExperiments) {
  const auto bi = build_experiment("bimodal");
  const auto& d = std::get<dist::Bimodal>(bi.apps[0].service.variant());
  EXPECT_DOUBLE_EQ(d.p_long, 0.005);
  EXPECT_EQ(d.long_time, 1000_us);
  EXPECT_EQ(d.short_time, 1_us);

  const auto im = build_experiment("imbalanced");
  const auto& w = im.apps[0].weights;
  ASSERT_EQ(w.size(), 16u);
  EXPECT_DOUBLE_EQ(w.front() / w.back(), 10.0);
  EXPECT_EQ(std::count(w.begin(), w.end(), w.front()), 5);

  const auto ca = build_experiment("core_alloc_const");
  EXPECT_EQ(ca.total_cores, 8u);
  EXPECT_TRUE(std::holds_alternative<dist::Constant>(ca.apps[0].service.variant()));

  const auto iso = build_experiment("isolation");
  EXPECT_DOUBLE_EQ(iso.apps[1].offered_load_ops(), 31250.0);
  EXPECT_THROW(build_experiment("nope"), ConfigError);
}

TEST(Presets, RenderRoundTrip) {
  for (const auto& name : preset_names()) {
    const auto c = build_experiment(name);
    const auto text = render_config(c);
    const auto back = load_config_text(text, name, false);
    EXPECT_EQ(render_config(back), text) << name;
  }
}

TEST(Presets, ShippedConfigFilesMatchPresets) {
  for (const auto& name : preset_names()) {
    const std::string path = std::string(DPSIM_CONFIG_DIR) + "/" + name + ".toml";
    ASSERT_TRUE(std::ifstream(path).good()) << path;
    EXPECT_EQ(render_config(load_config_file(path)), render_config(build_experiment(name))) << name;
  }
}

TEST(Presets, PresetKeyInheritsAndOverrides) {
  const auto c = load("preset = \"isolation\"\npolicy = \"centralized\"\n[sched]\nio_cores = 2\n[app.lc]\ncores = 6\n");
  EXPECT_EQ(c.policy, sched::PolicyKind::centralized);
  EXPECT_EQ(c.apps.size(), 2u);
  EXPECT_EQ(c.apps[0].cores, 6u);
  EXPECT_EQ(c.apps[1].cores, 7u);
  EXPECT_EQ(c.sweep_app, "lc");
}

TEST(Sweep, AxisNames) {
  EXPECT_EQ(parse_sweep_axis("io_cores"), SweepAxis::io_cores);
  EXPECT_EQ(parse_sweep_axis("t_us"), SweepAxis::t);
  EXPECT_THROW(parse_sweep_axis("zz"), ConfigError);
}
