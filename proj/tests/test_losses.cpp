#include "dsf_doctest.hpp"

#include "dsfusion/losses.hpp"
#include "test_helpers.hpp"

using namespace dsfusion;
using testutil::to_map3;
using testutil::to_vec;

namespace {

FeaturePyramid random_pyramid(int64_t channels, int64_t image, Branch branch,
                              torch::Generator& gen) {
  FeaturePyramid p;
  p.branch = branch;
  for (int i = 0; i < 4; ++i) {
    const auto s = image / (4LL << i);
    p.levels[i] = torch::randn({1, channels, s, s}, gen).to(torch::kFloat64);
  }
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("losses");

TEST_CASE("depth gradients: constants, ramps, and the difference oracle") {
  auto constant = torch::full({5, 7}, 3.25, torch::kFloat64);
  auto [cx, cy] = depth_gradients(constant);
  CHECK(cx.abs().max().item<double>() == 0.0);
  CHECK(cy.abs().max().item<double>() == 0.0);

  // D(x, y) = column index: unit x-gradient in the interior, zero last col.
  auto ramp = torch::arange(0, 6, torch::kFloat64).repeat({4, 1});
  auto [rx, ry] = depth_gradients(ramp);
  CHECK(ry.abs().max().item<double>() == 0.0);
  for (int64_t y = 0; y < 4; ++y) {
    for (int64_t x = 0; x < 5; ++x) CHECK(rx[y][x].item<double>() == doctest::Approx(1.0));
    CHECK(rx[y][5].item<double>() == 0.0);
  }

  torch::manual_seed(11);
  auto random = torch::rand({4, 4}, torch::kFloat64);
  auto [dx, dy] = depth_gradients(random);
  std::vector<double> ox, oy;
  oracle::depth_gradients(to_vec(random), 4, 4, ox, oy);
  auto vx = to_vec(dx);
  auto vy = to_vec(dy);
  for (size_t i = 0; i < ox.size(); ++i) {
    CHECK(vx[i] == doctest::Approx(ox[i]).epsilon(1e-12));
    CHECK(vy[i] == doctest::Approx(oy[i]).epsilon(1e-12));
  }
}

TEST_CASE("surface normals: plane identities and unit length") {
  auto constant = torch::full({4, 4}, 0.5, torch::kFloat64);
  auto n = normals_from_depth(constant);
  CHECK(n.index({0}).abs().max().item<double>() == 0.0);
  CHECK(n.index({1}).abs().max().item<double>() == 0.0);
  CHECK(n.index({2}).min().item<double>() == doctest::Approx(1.0));

  // D = x: interior normals proportional to (-1, 0, 1) / sqrt(2).
  auto ramp = torch::arange(0, 5, torch::kFloat64).repeat({4, 1});
  auto nr = normals_from_depth(ramp);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(nr.index({0, 1, 1}).item<double>() == doctest::Approx(-inv_sqrt2));
  CHECK(nr.index({1, 1, 1}).item<double>() == doctest::Approx(0.0));
  CHECK(nr.index({2, 1, 1}).item<double>() == doctest::Approx(inv_sqrt2));

  torch::manual_seed(12);
  auto random = torch::rand({6, 6}, torch::kFloat64) * 2 - 1;
  auto lengths = normals_from_depth(random).norm(2, 0);
  CHECK((lengths - 1.0).abs().max().item<double>() < 1e-6);
}

TEST_CASE("geometric loss identities") {
  LossConfig cfg;
  torch::manual_seed(13);
  auto d = torch::rand({5, 5}, torch::kFloat64);

  CHECK(geometric_loss(d, d, cfg).item<double>() == 0.0);

  // Constant offset: derivative terms vanish, value term is |c|.
  const double c = 0.37;
  auto shifted = d + c;
  CHECK(geometric_loss(shifted, d, cfg).item<double>() == doctest::Approx(c).epsilon(1e-12));

  cfg.w_d = 2.0;
  CHECK(geometric_loss(shifted, d, cfg).item<double>() == doctest::Approx(2 * c).epsilon(1e-12));

  // Symmetry of the three terms as defined.
  torch::manual_seed(14);
  auto a = torch::rand({4, 4}, torch::kFloat64);
  auto b = torch::rand({4, 4}, torch::kFloat64);
  LossConfig def;
  CHECK(geometric_loss(a, b, def).item<double>() ==
        doctest::Approx(geometric_loss(b, a, def).item<double>()).epsilon(1e-12));

  CHECK_THROWS(geometric_loss(a, torch::rand({4, 5}, torch::kFloat64), def));
}

TEST_CASE("geometric loss matches the term-by-term oracle on random 4x4 pairs") {
  LossConfig cfg;
  cfg.w_d = 0.8;
  cfg.w_g = 1.3;
  cfg.w_n = 0.6;
  for (int seed = 0; seed < 100; ++seed) {
    torch::manual_seed(seed);
    auto d = torch::rand({4, 4}, torch::kFloat64);
    auto g = torch::rand({4, 4}, torch::kFloat64);
    const double ours = geometric_loss(d, g, cfg).item<double>();
    const double ref = oracle::geometric_loss(to_vec(d), to_vec(g), 4, 4, cfg.w_d, cfg.w_g, cfg.w_n);
    CHECK(std::abs(ours - ref) < 1e-9);
  }
}

TEST_CASE("semantic loss: confident, uniform, oracle, and id range") {
  // Overwhelming margin on the true class drives the loss to zero.
  auto confident = torch::zeros({2, 2, 2}, torch::kFloat64);
  confident.index_put_({1}, 200.0);
  auto target_ones = torch::ones({2, 2}, torch::kLong);
  CHECK(semantic_loss(confident, target_ones).item<double>() < 1e-12);

  // Uniform logits over two classes: ln 2 per pixel.
  auto uniform = torch::zeros({2, 3, 3}, torch::kFloat64);
  auto target = torch::zeros({3, 3}, torch::kLong);
  CHECK(semantic_loss(uniform, target).item<double>() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  for (int seed = 0; seed < 100; ++seed) {
    torch::manual_seed(seed);
    auto logits = torch::randn({2, 2, 2}, torch::kFloat64);
    auto ids = torch::randint(0, 2, {2, 2}, torch::kLong);
    const double ours = semantic_loss(logits, ids).item<double>();
    const double ref = oracle::semantic_loss(to_map3(logits), testutil::to_ids(ids));
    CHECK(std::abs(ours - ref) < 1e-9);
  }

  auto bad = torch::full({2, 2}, 2, torch::kLong);
  CHECK_THROWS(semantic_loss(uniform.index({torch::indexing::Slice(), torch::indexing::Slice(0, 2),
                                            torch::indexing::Slice(0, 2)}),
                             bad));
  CHECK_THROWS(semantic_loss(uniform, torch::full({3, 3}, -1, torch::kLong)));
}

TEST_CASE("analytic gradients match central finite differences at 4x4") {
  torch::manual_seed(15);
  auto d0 = torch::rand({4, 4}, torch::kFloat64);
  auto g = torch::rand({4, 4}, torch::kFloat64);

  // Each geometric term alone, then the sum.
  for (const auto& [wd, wg, wn] : std::vector<std::array<double, 3>>{
           {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}}) {
    LossConfig cfg;
    cfg.w_d = wd;
    cfg.w_g = wg;
    cfg.w_n = wn;
    auto d = d0.clone().set_requires_grad(true);
    geometric_loss(d, g, cfg).backward();
    auto numeric = testutil::finite_difference_grad(
        [&](const torch::Tensor& x) { return geometric_loss(x, g, cfg).item<double>(); }, d0);
    CHECK(testutil::max_relative_error(d.grad(), numeric) < 1e-4);
  }

  auto logits0 = torch::randn({2, 4, 4}, torch::kFloat64);
  auto ids = torch::randint(0, 2, {4, 4}, torch::kLong);
  auto logits = logits0.clone().set_requires_grad(true);
  semantic_loss(logits, ids).backward();
  auto numeric = testutil::finite_difference_grad(
      [&](const torch::Tensor& x) { return semantic_loss(x, ids).item<double>(); }, logits0);
  CHECK(testutil::max_relative_error(logits.grad(), numeric) < 1e-4);
}

TEST_CASE("total loss assembly over iterations and scales") {
  const int64_t channels = 8;
  const int64_t image = 32;
  torch::manual_seed(16);
  auto gen = at::detail::createCPUGenerator(16);

  FusionConfig fusion;
  DecoderConfig dcfg;
  dcfg.num_iterations = 1;
  IterativeDecoder decoder(channels, fusion, dcfg);
  decoder->to(torch::kFloat64);

  auto dp = random_pyramid(channels, image, Branch::kDepth, gen);
  auto sp = random_pyramid(channels, image, Branch::kSegmentation, gen);
  auto depth_gt = torch::rand({1, image, image}, torch::kFloat64);
  auto seg_gt = torch::randint(0, 2, {1, image, image}, torch::kLong);

  LossConfig cfg;
  cfg.beta = 0.1;

  SUBCASE("single iteration reduces to the scale-averaged hybrid loss") {
    auto states = decoder->run_iterations(dp, sp);
    auto breakdown = total_loss(states, decoder, depth_gt, seg_gt, cfg);

    double geo = 0, sem = 0;
    for (int level = 0; level < 4; ++level) {
      auto preds = decoder->predict_level(states[0], level, image, image);
      geo += geometric_loss(preds.depth, depth_gt, cfg).item<double>();
      sem += semantic_loss(preds.seg_logits, seg_gt).item<double>();
    }
    geo /= 4;
    sem /= 4;
    CHECK(breakdown.total.item<double>() ==
          doctest::Approx(cfg.alpha * geo + cfg.beta * sem).epsilon(1e-10));
    CHECK(breakdown.per_iteration.size() == 1);
  }

  SUBCASE("identical per-iteration losses sum with the n/N ramp to 2L") {
    auto states = decoder->run_iterations(dp, sp);
    // Three iterations with identical features: per-iteration losses all L.
    std::vector<IterationState> replicated;
    for (int n = 1; n <= 3; ++n) {
      auto s = states[0];
      s.iteration_index = n;
      replicated.push_back(s);
    }
    auto one = total_loss({states[0]}, decoder, depth_gt, seg_gt, cfg);
    auto three = total_loss(replicated, decoder, depth_gt, seg_gt, cfg);
    CHECK(three.total.item<double>() ==
          doctest::Approx(2.0 * one.total.item<double>()).epsilon(1e-10));

    // With the ramp disabled every iteration weighs 1.
    LossConfig no_ramp = cfg;
    no_ramp.iteration_ramp = false;
    auto flat = total_loss(replicated, decoder, depth_gt, seg_gt, no_ramp);
    CHECK(flat.total.item<double>() ==
          doctest::Approx(3.0 * one.total.item<double>()).epsilon(1e-10));
  }

  SUBCASE("total is monotone in each per-iteration component") {
    auto states = decoder->run_iterations(dp, sp);
    std::vector<IterationState> base, worse;
    for (int n = 1; n <= 3; ++n) {
      auto s = states[0];
      s.iteration_index = n;
      base.push_back(s);
      worse.push_back(s);
    }
    // Perturb only iteration 2's features: the total must move by exactly
    // the ramp weight (2/3) times that iteration's component change, so it
    // is monotone in each per-iteration loss.
    for (auto& level : worse[1].depth) level = level * 3.0 + 1.0;
    auto a = total_loss(base, decoder, depth_gt, seg_gt, cfg);
    auto b = total_loss(worse, decoder, depth_gt, seg_gt, cfg);
    const double delta_iter = b.per_iteration[1].item<double>() - a.per_iteration[1].item<double>();
    REQUIRE(delta_iter != 0.0);
    CHECK(b.total.item<double>() - a.total.item<double>() ==
          doctest::Approx((2.0 / 3.0) * delta_iter).epsilon(1e-9));
  }
}

TEST_SUITE_END();
