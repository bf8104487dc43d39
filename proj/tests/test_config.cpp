#include <cstdlib>
#include <string>

#include <gtest/gtest.h>

#include <blochcav/config.hpp>
#include <blochcav/errors.hpp>

namespace blochcav {
namespace {

RunConfig minimal() {
  return parse_config(R"({
    "physical": {"bloch_frequency_hz": 744.5},
    "scenario": {"cavity_detuning_kappa": 1.3, "initial_depth_er": -3}
  })");
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

TEST(Config, MinimalConfigFillsDefaults) {
  const auto c = minimal();
  EXPECT_EQ(c.numerics.n_sites, 128u);
  EXPECT_EQ(c.numerics.steps_per_period, 24000u);
  EXPECT_EQ(c.scenario.preset, "custom");
  EXPECT_TRUE(c.scenario.full);
  EXPECT_FALSE(c.scenario.ladder);
  EXPECT_EQ(c.threads, 1u);
}

TEST(Config, DumpRoundTrips) {
  for (const auto& name : preset_names()) {
    const auto c = preset(name);
    auto back = parse_config(dump_config(c));
    EXPECT_EQ(back.scenario.preset, "custom") << name;
    back.scenario.preset = c.scenario.preset;
    EXPECT_EQ(back, c) << name;
    EXPECT_EQ(dump_config(back), dump_config(c)) << name;
  }
}

TEST(Config, EmptyConfigIsAnError) {
  EXPECT_THROW(parse_config(""), ConfigError);
  EXPECT_THROW(parse_config("{}"), ConfigError);
  EXPECT_THROW(parse_config("[1, 2]"), ConfigError);
}

TEST(Config, UnknownKeysAndSectionsAreRejected) {
  EXPECT_NE(error_of(R"({"physical": {"bloch_frequency_hz": 744.5, "kapa_hz": 1000},
                         "scenario": {"cavity_detuning_kappa": 1.3, "initial_depth_er": -3}})")
                .find("physical.kapa_hz"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"scenario": {"preset": "fig4"}, "plots": {}})").find("plots"), std::string::npos);
}

TEST(Config, TypeErrorsNameTheField) {
  EXPECT_NE(error_of(R"({"scenario": {"preset": "fig4"}, "numerics": {"n_sites": "many"}})").find("numerics.n_sites"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"scenario": {"preset": "fig4"}, "numerics": {"n_sites": -4}})").find("numerics.n_sites"),
            std::string::npos);
}

TEST(Config, PresetCannotBeCombinedWithPhysical) {
  EXPECT_THROW(parse_config(R"({"scenario": {"preset": "fig4"}, "physical": {"kappa_hz": 2000}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"scenario": {"preset": "fig9"}})"), ConfigError);
}

TEST(Config, OverridesLayerOnPresets) {
  const auto c = parse_config(R"({"scenario": {"preset": "fig2a_uphill"}, "numerics": {"periods": 12}})");
  EXPECT_EQ(c.scenario.preset, "fig2a_uphill");
  EXPECT_EQ(c.numerics.periods, 12.0);
  EXPECT_EQ(c.scenario.cavity_detuning_kappa, 1.3);
  EXPECT_EQ(c.scenario.initial_depth_er, -3.0);
}

TEST(Config, PresetValues) {
  const auto up = preset("fig2a_uphill");
  EXPECT_EQ(up.physical.bloch_frequency_hz, 744.5);
  EXPECT_EQ(up.scenario.cavity_detuning_kappa, 1.3);
  EXPECT_EQ(up.scenario.initial, InitialState::Kind::delocalized);
  EXPECT_EQ(preset("fig2a_downhill").scenario.cavity_detuning_kappa, -0.7);
  const auto b = preset("fig2b_breathing");
  EXPECT_EQ(b.scenario.initial, InitialState::Kind::localized);
  EXPECT_EQ(b.scenario.cavity_detuning_kappa, -0.7);
  const auto sweep = preset("fig5_sweep");
  EXPECT_EQ(sweep.sweep.parameter, "delta0_kappa");
  EXPECT_EQ(sweep.sweep.values.size(), 9u);
  EXPECT_FALSE(preset("static_lattice").scenario.backaction);
  EXPECT_EQ(preset_names().size(), preset_descriptions().size());
}

TEST(Config, PhysicalConsistency) {
  const char* tail = R"(, "scenario": {"cavity_detuning_kappa": 1.3, "initial_depth_er": -3}})";
  auto with = [&](const std::string& physical) { return R"({"physical": )" + physical + tail; };
  EXPECT_NO_THROW(parse_config(with(R"({"bias_force_n": -1.43e-24})")));
  // both or neither of the tilt options
  EXPECT_THROW(parse_config(with(R"({"bloch_frequency_hz": 744.5, "bias_force_n": -1.43e-24})")), ConfigError);
  EXPECT_THROW(parse_config(with("{}")), ConfigError);
  // no coupling at all: use backaction false instead
  EXPECT_NE(error_of(with(R"({"bloch_frequency_hz": 744.5, "u0_hz": 0})")).find("backaction"), std::string::npos);
  // light shift and atom detuning must agree in sign
  EXPECT_THROW(parse_config(with(R"({"bloch_frequency_hz": 744.5, "atom_detuning_hz": 1e7})")), ConfigError);
}

TEST(Config, DetuningAndPumpChoices) {
  const char* head = R"({"physical": {"bloch_frequency_hz": 744.5}, "scenario": )";
  auto with = [&](const std::string& scenario) { return head + scenario + "}"; };
  EXPECT_THROW(parse_config(with(R"({"initial_depth_er": -3})")), ConfigError);
  EXPECT_THROW(parse_config(with(R"({"cavity_detuning_kappa": 1, "delta0_kappa": 1, "initial_depth_er": -3})")),
               ConfigError);
  EXPECT_THROW(parse_config(with(R"({"cavity_detuning_kappa": 1})")), ConfigError);
  EXPECT_THROW(parse_config(with(R"({"cavity_detuning_kappa": 1, "initial_depth_er": 3})")), ConfigError);
  EXPECT_THROW(parse_config(with(R"({"cavity_detuning_kappa": 1, "initial_depth_er": -3, "full": false})")),
               ConfigError);
  EXPECT_THROW(parse_config(with(R"({"cavity_detuning_kappa": 1, "initial_depth_er": -3, "label": "a/b"})")),
               ConfigError);
  EXPECT_NO_THROW(parse_config(R"({"physical": {"bloch_frequency_hz": 744.5, "pump_rate_hz": 3e5},
                                   "scenario": {"delta0_kappa": 1}})"));
}

TEST(Config, SweepReplacesTheScenarioDetuning) {
  EXPECT_THROW(parse_config(R"({"scenario": {"preset": "fig5_sweep", "delta0_kappa": 1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"scenario": {"preset": "fig5_sweep"}, "sweep": {"values": [1, 1]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"scenario": {"preset": "fig5_sweep"}, "sweep": {"parameter": "eta"}})"), ConfigError);
}

TEST(Config, NumericsAreChecked) {
  auto bad = [](const std::string& numerics) {
    return R"({"scenario": {"preset": "fig2a_uphill"}, "numerics": )" + numerics + "}";
  };
  EXPECT_THROW(parse_config(bad(R"({"n_sites": 100})")), ConfigError);
  EXPECT_THROW(parse_config(bad(R"({"points_per_period": 4})")), ConfigError);
  EXPECT_THROW(parse_config(bad(R"({"steps_per_period": 24001})")), ConfigError);
  EXPECT_THROW(parse_config(bad(R"({"ladder_range": 0})")), ConfigError);
  EXPECT_THROW(parse_config(bad(R"({"threads": 0})")), ConfigError);
}

class Environment : public ::testing::Test {
 protected:
  void TearDown() override {
    unsetenv("BLOCHCAV_OUTPUT_DIR");
    unsetenv("BLOCHCAV_THREADS");
  }
};

TEST_F(Environment, OverridesOutputAndThreads) {
  auto c = minimal();
  setenv("BLOCHCAV_OUTPUT_DIR", "/tmp/elsewhere", 1);
  setenv("BLOCHCAV_THREADS", "3", 1);
  apply_environment(c);
  EXPECT_EQ(c.output.dir, "/tmp/elsewhere");
  EXPECT_EQ(c.threads, 3u);
}

TEST_F(Environment, RejectsBadThreadCount) {
  auto c = minimal();
  for (const char* v : {"0", "two", "3x", "-1"}) {
    setenv("BLOCHCAV_THREADS", v, 1);
    EXPECT_THROW(apply_environment(c), ConfigError) << v;
  }
}

TEST(Config, LoadConfigNamesTheFile) {
  try {
    load_config("/nonexistent/run.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/run.json"), std::string::npos);
  }
}

}  // namespace
}  // namespace blochcav
