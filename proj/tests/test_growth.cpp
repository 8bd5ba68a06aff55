#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oectsim/config.hpp"
#include "oectsim/growth.hpp"

using namespace oectsim;

namespace {

ToolkitConfig cfg() { return default_config(); }
const GateSweep kSweep{-0.2, 0.6, 81};
constexpr double kVd = -0.4;

}  // namespace

TEST_CASE("deposition rate anchors and interpolation") {
    const GrowthModel model = cfg().growth;
    CHECK(deposition_rate(model, 0.6) == doctest::Approx(12.5).epsilon(1e-15));  // 100 nm / 8 s
    CHECK(deposition_rate(model, 0.7) == doctest::Approx(25.0).epsilon(1e-15));  // 200 nm / 8 s
    CHECK(deposition_rate(model, 0.65) == doctest::Approx(18.75).epsilon(1e-12));
    CHECK_THROWS_AS(deposition_rate(model, 0.45), CalibrationRangeError);
    CHECK_THROWS_AS(deposition_rate(model, 0.85), CalibrationRangeError);
}

TEST_CASE("morphology anchors") {
    const MorphologyTable table = cfg().morphology;
    const MorphologyRecord at06 = morphology(table, 0.6);
    CHECK(*at06.grain_size_nm == doctest::Approx(5.0));
    CHECK(at06.roughness_nm == doctest::Approx(4.0));
    const MorphologyRecord at07 = morphology(table, 0.7);
    CHECK(*at07.grain_size_nm == doctest::Approx(9.0));
    CHECK(at07.roughness_nm == doctest::Approx(8.0));

    const MorphologyRecord spin = spin_coated_morphology(table);
    CHECK_FALSE(spin.grain_size_nm.has_value());
    CHECK(spin.roughness_nm == doctest::Approx(3.0));

    CHECK_THROWS_AS(morphology(table, 0.55), CalibrationRangeError);
}

TEST_CASE("apply_ep_step") {
    const ToolkitConfig c = cfg();
    const DeviceState dev = make_pristine_device(c.device);

    SUBCASE("zero duration is the identity") {
        const DeviceState same = apply_ep_step(dev, EpCondition{0.6, 0.0}, c.growth);
        CHECK(same.layers().size() == dev.layers().size());
        CHECK(total_capacitance(same) == total_capacitance(dev));
    }

    SUBCASE("four noise-free 2 s steps at 0.6 V deposit 100 nm over four layers") {
        DeviceState state = dev;
        for (int k = 0; k < 4; ++k) state = apply_ep_step(state, EpCondition{0.6, 2.0}, c.growth);
        REQUIRE(state.layers().size() == 5);
        double ep_nm = 0.0;
        for (const auto& layer : state.layers())
            if (layer.origin == LayerOrigin::Electropolymerized) ep_nm += layer.thickness_m / units::kNm;
        CHECK(ep_nm == doctest::Approx(100.0).epsilon(1e-12));
    }

    SUBCASE("same seed, same inputs: bit-identical result") {
        RngStream a(99), b(99);
        const DeviceState s1 = apply_ep_step(dev, EpCondition{0.62, 2.0}, c.growth, &a);
        const DeviceState s2 = apply_ep_step(dev, EpCondition{0.62, 2.0}, c.growth, &b);
        REQUIRE(s1.layers().size() == s2.layers().size());
        CHECK(s1.layers().back().thickness_m == s2.layers().back().thickness_m);
        CHECK(s1.layers().back().mobility_m2_per_vs == s2.layers().back().mobility_m2_per_vs);
    }

    SUBCASE("capacitance strictly increases, spin-coated layer untouched") {
        RngStream rng(7);
        DeviceState state = dev;
        for (int k = 0; k < 12; ++k) {
            RngStream step = rng.fork(k);
            const double v = 0.5 + 0.3 * step.uniform01();
            const double duration = 0.5 + 3.0 * step.uniform01();
            const double c_before = total_capacitance(state);
            state = apply_ep_step(state, EpCondition{v, duration}, c.growth, &step);
            CHECK(total_capacitance(state) > c_before);
            CHECK(state.layers().front().mobility_m2_per_vs == dev.layers().front().mobility_m2_per_vs);
            CHECK(state.layers().front().thickness_m == dev.layers().front().thickness_m);
        }
    }

    SUBCASE("out-of-range potential propagates the calibration error") {
        CHECK_THROWS_AS(apply_ep_step(dev, EpCondition{0.9, 2.0}, c.growth), CalibrationRangeError);
    }
}

TEST_CASE("a 0.6 V step raises peak Gm while decay is inactive") {
    const ToolkitConfig c = cfg();
    GrowthModel model = c.growth;
    model.decay_enabled = false;
    DeviceState state = make_pristine_device(c.device);
    for (int k = 0; k < 8; ++k) {
        const double gm_before = peak_transconductance(state, kSweep, kVd).gm_s;
        state = apply_ep_step(state, EpCondition{0.6, 2.0}, model);
        CHECK(peak_transconductance(state, kSweep, kVd).gm_s > gm_before);
    }
}

TEST_CASE("far beyond the decay threshold a step depresses Gm while still adding capacitance") {
    const ToolkitConfig c = cfg();
    DeviceState state = make_pristine_device(c.device);
    // 10 steps x 25 nm = 250 nm of EP, well past the 150 nm threshold
    for (int k = 0; k < 10; ++k) state = apply_ep_step(state, EpCondition{0.6, 2.0}, c.growth);
    const double gm_before = peak_transconductance(state, kSweep, kVd).gm_s;
    const double c_before = total_capacitance(state);
    state = apply_ep_step(state, EpCondition{0.6, 2.0}, c.growth);
    CHECK(peak_transconductance(state, kSweep, kVd).gm_s <= gm_before);  // LTD regime
    CHECK(total_capacitance(state) > c_before);
}

TEST_CASE("trajectory placement against the unity line") {
    const ToolkitConfig c = cfg();
    const DeviceState dev = make_pristine_device(c.device);

    SUBCASE("kappa = 1 with decay off lands exactly on the line") {
        GrowthModel neutral = c.growth;
        neutral.mobility_factor = PotentialTable({{0.5, 1.0}, {0.8, 1.0}});
        neutral.decay_enabled = false;
        const auto points = gm_capacitance_trajectory(dev, {0.6, 2.0}, 5, kVd, kSweep, neutral);
        for (const auto& p : points) {
            CHECK(p.dgm_rel == doctest::Approx(p.dc_rel).epsilon(1e-12));
        }
    }
    SUBCASE("0.6 V runs above, 0.7 V below") {
        for (const auto& p : gm_capacitance_trajectory(dev, {0.6, 2.0}, 5, kVd, kSweep, c.growth))
            CHECK(p.dgm_rel > p.dc_rel);
        for (const auto& p : gm_capacitance_trajectory(dev, {0.7, 2.0}, 5, kVd, kSweep, c.growth))
            CHECK(p.dgm_rel < p.dc_rel);
    }
    SUBCASE("placement is decided by the sign of kappa * decay") {
        RngStream rng(31);
        for (int trial = 0; trial < 12; ++trial) {
            const double kappa = 0.4 + 1.6 * rng.uniform01();
            GrowthModel model = c.growth;
            model.mobility_factor = PotentialTable({{0.5, kappa}, {0.8, kappa}});
            model.decay_enabled = false;
            const auto points = gm_capacitance_trajectory(dev, {0.6, 2.0}, 3, kVd, kSweep, model);
            for (const auto& p : points) {
                if (kappa > 1.0 + 1e-9) CHECK(p.dgm_rel > p.dc_rel);
                if (kappa < 1.0 - 1e-9) CHECK(p.dgm_rel < p.dc_rel);
            }
        }
    }
    SUBCASE("long 0.7 V trajectories bend down once decay engages") {
        const auto points = gm_capacitance_trajectory(dev, {0.7, 2.0}, 5, kVd, kSweep, c.growth);
        CHECK(points[4].dgm_rel < points[3].dgm_rel);  // Gm itself decreasing
        CHECK(points[4].dc_rel > points[3].dc_rel);
    }
}

TEST_CASE("trajectories with the same master seed are reproducible") {
    const ToolkitConfig c = cfg();
    const DeviceState dev = make_pristine_device(c.device);
    RngStream a(1234), b(1234);
    const auto run1 = gm_capacitance_trajectory(dev, {0.6, 2.0}, 6, kVd, kSweep, c.growth, &a);
    const auto run2 = gm_capacitance_trajectory(dev, {0.6, 2.0}, 6, kVd, kSweep, c.growth, &b);
    REQUIRE(run1.size() == run2.size());
    for (std::size_t i = 0; i < run1.size(); ++i) {
        CHECK(run1[i].dgm_rel == run2[i].dgm_rel);
        CHECK(run1[i].dc_rel == run2[i].dc_rel);
    }
}

TEST_CASE("default calibration keeps kappa(0.6 V) > 1 > kappa(0.7 V)") {
    const GrowthModel model = cfg().growth;
    CHECK(model.mobility_factor.at(0.6) > 1.0);
    CHECK(model.mobility_factor.at(0.7) < 1.0);
}

TEST_CASE("growth model validation") {
    GrowthModel model = cfg().growth;
    model.rate_nm_per_s = PotentialTable({{0.5, -1.0}, {0.8, 2.0}});
    CHECK_THROWS_AS(model.validate(), std::invalid_argument);
    CHECK_THROWS_AS(PotentialTable({{0.7, 1.0}, {0.6, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS((EpCondition{0.6, -1.0}.validate()), std::invalid_argument);
}
