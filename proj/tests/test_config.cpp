#include "dsf_doctest.hpp"

#include "dsfusion/config.hpp"
#include "test_helpers.hpp"

#include <fstream>

using namespace dsfusion;

TEST_SUITE_BEGIN("config");

TEST_CASE("defaults match the published schedule") {
  TrainConfig cfg;
  CHECK(cfg.learning_rate == doctest::Approx(1e-5));
  CHECK(cfg.batch_size == 4);
  CHECK(cfg.epochs == 20);
  CHECK(cfg.model.decoder.num_iterations == 3);
  CHECK(cfg.model.decoder.num_classes == 2);
  CHECK(cfg.loss.alpha == doctest::Approx(1.0));
  CHECK(cfg.loss.beta == doctest::Approx(0.1));
  CHECK(cfg.loss.w_d == doctest::Approx(1.0));
  CHECK(cfg.loss.w_g == doctest::Approx(1.0));
  CHECK(cfg.loss.w_n == doctest::Approx(1.0));
  CHECK(cfg.model.encoder.num_blocks == 12);
  CHECK((cfg.model.encoder.tap_layers == std::array<int64_t, 4>{3, 6, 9, 12}));
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("encoder invariants rejected") {
  EncoderConfig e;
  SUBCASE("size not divisible by patch") {
    e.image_size = 100;
    e.patch_size = 8;
    CHECK_THROWS_AS(e.validate(), std::invalid_argument);
  }
  SUBCASE("embed not divisible by heads") {
    e.embed_dim = 65;
    CHECK_THROWS_AS(e.validate(), std::invalid_argument);
  }
  SUBCASE("taps not increasing") {
    e.tap_layers = {3, 3, 9, 12};
    CHECK_THROWS_AS(e.validate(), std::invalid_argument);
  }
  SUBCASE("tap beyond depth") {
    e.tap_layers = {3, 6, 9, 13};
    CHECK_THROWS_AS(e.validate(), std::invalid_argument);
  }
}

TEST_CASE("file parsing, comments, precedence") {
  const auto options = parse_config_text(
      "# a comment\n"
      "learning_rate = 2e-4  # trailing comment\n"
      "encoder.tap_layers = 2, 4, 6, 8\n"
      "\n"
      "decoder.num_iterations = 2\n");
  TrainConfig cfg;
  apply_options(cfg, options);
  CHECK(cfg.learning_rate == doctest::Approx(2e-4));
  CHECK((cfg.model.encoder.tap_layers == std::array<int64_t, 4>{2, 4, 6, 8}));
  CHECK(cfg.model.decoder.num_iterations == 2);

  // CLI overrides win because they are applied after the file.
  const auto dir = testutil::scratch_dir("config");
  std::ofstream(dir + "/a.cfg") << "epochs = 7\nbatch_size = 2\n";
  auto loaded = load_train_config(dir + "/a.cfg", {"epochs=9"});
  CHECK(loaded.epochs == 9);
  CHECK(loaded.batch_size == 2);
}

TEST_CASE("unknown keys and malformed values fail loudly") {
  TrainConfig cfg;
  CHECK_THROWS_AS(apply_options(cfg, {{"learning_rat", "1"}}), std::invalid_argument);
  CHECK_THROWS_AS(apply_options(cfg, {{"epochs", "five"}}), std::invalid_argument);
  CHECK_THROWS_AS(apply_options(cfg, {{"deterministic", "maybe"}}), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("no equals sign here"), std::invalid_argument);
}

TEST_CASE("round trip through to_options") {
  TrainConfig cfg;
  cfg.learning_rate = 3.5e-4;
  cfg.seed = 1234;
  cfg.model.fusion.enabled = false;
  cfg.model.encoder.tap_layers = {1, 5, 7, 12};
  cfg.loss.beta = 0.25;
  cfg.data_dir = "some/dir";

  TrainConfig rebuilt;
  apply_options(rebuilt, to_options(cfg));
  CHECK(rebuilt.learning_rate == doctest::Approx(cfg.learning_rate));
  CHECK(rebuilt.seed == cfg.seed);
  CHECK(rebuilt.model.fusion.enabled == cfg.model.fusion.enabled);
  CHECK(rebuilt.model.encoder.tap_layers == cfg.model.encoder.tap_layers);
  CHECK(rebuilt.loss.beta == doctest::Approx(cfg.loss.beta));
  CHECK(rebuilt.data_dir == cfg.data_dir);
}

TEST_SUITE_END();
