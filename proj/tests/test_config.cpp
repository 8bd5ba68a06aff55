#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>

#include "json.hpp"

#include "oectsim/config.hpp"

using namespace oectsim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("oectsim_cfg_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << text;
    return p;
}

}  // namespace

TEST_CASE("defaults validate and round-trip through the file format") {
    TempDir tmp;
    const ToolkitConfig defaults = default_config();
    defaults.validate();

    const fs::path file = write_file(tmp.path, "config.json", config_to_json(defaults));
    const ToolkitConfig loaded = load_config(file);
    CHECK(config_hash(loaded) == config_hash(defaults));
    CHECK(loaded.seed == defaults.seed);
    CHECK(loaded.growth.rate_nm_per_s.at(0.65) == defaults.growth.rate_nm_per_s.at(0.65));
    CHECK(loaded.growth.reference_mobility_m2_per_vs ==
          doctest::Approx(defaults.growth.reference_mobility_m2_per_vs));
    CHECK(loaded.policy.target_gm_s == defaults.policy.target_gm_s);
    CHECK(loaded.array.mobility_spread == defaults.array.mobility_spread);
}

TEST_CASE("unknown keys are rejected") {
    TempDir tmp;
    nlohmann::json root = nlohmann::json::parse(config_to_json(default_config()));

    SUBCASE("top level") {
        root["extra_section"] = 1;
        const fs::path file = write_file(tmp.path, "bad.json", root.dump());
        CHECK_THROWS_WITH_AS(load_config(file), doctest::Contains("unknown key 'extra_section'"),
                             ConfigError);
    }
    SUBCASE("inside a section") {
        root["device"]["typo_field"] = 3.0;
        const fs::path file = write_file(tmp.path, "bad.json", root.dump());
        CHECK_THROWS_WITH_AS(load_config(file), doctest::Contains("unknown key 'typo_field'"),
                             ConfigError);
    }
}

TEST_CASE("missing keys and malformed values are rejected") {
    TempDir tmp;
    nlohmann::json root = nlohmann::json::parse(config_to_json(default_config()));

    SUBCASE("missing section") {
        root.erase("circuit");
        CHECK_THROWS_WITH_AS(load_config(write_file(tmp.path, "bad.json", root.dump())),
                             doctest::Contains("missing section 'circuit'"), ConfigError);
    }
    SUBCASE("missing key") {
        root["device"].erase("vth_v");
        CHECK_THROWS_WITH_AS(load_config(write_file(tmp.path, "bad.json", root.dump())),
                             doctest::Contains("missing key 'vth_v'"), ConfigError);
    }
    SUBCASE("invalid JSON") {
        CHECK_THROWS_AS(load_config(write_file(tmp.path, "bad.json", "{ not json")), ConfigError);
    }
    SUBCASE("module invariant violations surface as config errors") {
        root["growth"]["rate_table_nm_per_s"] = nlohmann::json::array({{0.5, -2.0}, {0.8, 1.0}});
        CHECK_THROWS_AS(load_config(write_file(tmp.path, "bad.json", root.dump())), ConfigError);

        root = nlohmann::json::parse(config_to_json(default_config()));
        root["device"]["spin_thickness_nm"] = 0.0;
        CHECK_THROWS_AS(load_config(write_file(tmp.path, "bad.json", root.dump())), ConfigError);

        root = nlohmann::json::parse(config_to_json(default_config()));
        root["transient"]["spike_threshold"] = 1.5;
        CHECK_THROWS_AS(load_config(write_file(tmp.path, "bad.json", root.dump())), ConfigError);
    }
}

TEST_CASE("config hash tracks content") {
    const ToolkitConfig a = default_config();
    ToolkitConfig b = default_config();
    CHECK(config_hash(a) == config_hash(b));
    b.circuit.rs_ohm += 1.0;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("pristine device construction uses datasheet units") {
    const DeviceState dev = make_pristine_device(default_config().device);
    CHECK(dev.geometry().width_m == doctest::Approx(30e-6));
    CHECK(dev.layers().front().thickness_m == doctest::Approx(200e-9));
    CHECK(dev.layers().front().vol_capacitance_f_per_m3 == doctest::Approx(39e6));
}
