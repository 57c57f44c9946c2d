#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "splat2d/config.hpp"

using namespace splat2d;

TEST_CASE("defaults are the desk schedule") {
    const TrainConfig c;
    CHECK(c.target.width == 128);
    CHECK(c.target.height == 128);
    CHECK(c.n_init == 50);
    CHECK(c.iterations == 5000);
    CHECK(c.densify_interval == 50);
    CHECK(c.densify_start == 250);
    CHECK(c.densify_stop == 2500);
    CHECK(c.densify.weight_alpha == 0.8);
    CHECK(c.densify.weight_beta == 25.0);
    CHECK(c.densify.weight_p == 15.0);
    CHECK(c.lr_position_init == 1.6e-4);
    CHECK(c.lr_opacity == 0.05);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("config text") {
    TrainConfig c;
    apply_config_text(c, "# comment\n\niterations = 300   # trailing\n policy=gdags\ntau_p = 1e-3\nbackground = 0.1, 0.2,0.3\n");
    CHECK(c.iterations == 300);
    CHECK(c.densify.policy == DensifyPolicy::Gdags);
    CHECK(c.densify.tau_p == 1e-3);
    CHECK(c.background == Rgb{0.1, 0.2, 0.3});

    CHECK_THROWS_AS(apply_config_text(c, "iteratons = 3"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, "iterations 3"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, "iterations = 3.5"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, "tau_p = fast"), ConfigError);
    CHECK_THROWS_AS(apply_config_text(c, "policy = best"), ConfigError);
}

TEST_CASE("every key round-trips through text") {
    TrainConfig c;
    c.iterations = 777;
    c.densify.tau_p = 0.1 + 0.2;
    c.lr_color = 1.0 / 3.0;
    c.out_dir = "some/dir";
    TrainConfig d;
    apply_config_text(d, config_to_text(c));
    for (const auto& k : config_keys()) CHECK(get_config_value(c, k.name) == get_config_value(d, k.name));
    CHECK(d.densify.tau_p == c.densify.tau_p);
    CHECK(d.lr_color == c.lr_color);
}

TEST_CASE("validation") {
    TrainConfig c;
    c.densify_stop = c.iterations + 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.densify_interval = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    CHECK_THROWS_AS(set_config_value(c, "seed", "-1"), ConfigError);
}

TEST_CASE("config file") {
    const auto path = std::filesystem::temp_directory_path() / "splat2d_test.cfg";
    {
        std::ofstream out(path);
        out << "n_init = 7\nloss = mse\n";
    }
    TrainConfig c;
    apply_config_file(c, path);
    CHECK(c.n_init == 7);
    CHECK(c.loss == LossKind::MSE);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(apply_config_file(c, path), ConfigError);
}

TEST_CASE("number formatting") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.02214076e23}) {
        CHECK(parse_double(format_double(v)) == v);
        CHECK(parse_double(format_double17(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(parse_int("42") == 42);
    CHECK_THROWS(parse_int("4x"));
    CHECK_THROWS(parse_double(""));
}
