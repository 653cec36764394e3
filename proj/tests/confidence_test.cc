#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "sparseview/confidence.h"
#include "sparseview/field.h"
#include "sparseview/rng.h"
#include "test_util.h"

namespace sparseview {
namespace {

Camera camera_of(int w, int h) {
  Camera cam;
  cam.width = w;
  cam.height = h;
  return cam;
}

ImageBuffer random_image(int w, int h, Rng& rng) {
  ImageBuffer img(w, h);
  for (double& v : img.values()) v = rng.uniform();
  return img;
}

FieldParams tiny_teacher() {
  FieldArchitecture arch;
  arch.trunk_layers = 2;
  arch.trunk_width = 16;
  arch.position_frequencies = 3;
  arch.direction_frequencies = 1;
  return FieldParams::initialize(arch, 6);
}

TEST(EnsembleConfigTest, Validation) {
  EXPECT_NO_THROW(EnsembleConfig{}.validate());
  EXPECT_NO_THROW((EnsembleConfig{{0.0}, 1}.validate()));
  EXPECT_THROW((EnsembleConfig{{0.0, 0.0}, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((EnsembleConfig{{0.0, 1.0}, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((EnsembleConfig{{}, 1}.validate()), std::invalid_argument);
}

TEST(RenderEnsembleTest, ShapesAndPlainZeroRatio) {
  const FieldParams teacher = tiny_teacher();
  const Camera cam = testing::small_camera(16);
  RenderConfig render;
  render.samples = 16;
  render.jitter = true;
  render.seed = 3;
  const auto stack = render_ensemble(teacher, cam, EnsembleConfig{}, render);
  ASSERT_EQ(stack.size(), 4u);
  for (const auto& img : stack) {
    EXPECT_EQ(img.width(), 16);
    EXPECT_EQ(img.height(), 16);
  }
  const ImageBuffer plain = render_image(FieldSource(teacher), cam, render).image;
  EXPECT_EQ(stack[0], plain);
  EXPECT_NE(stack[3], plain);
  const auto single = render_ensemble(teacher, cam, EnsembleConfig{{0.0}, 9}, render);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0], plain);
}

TEST(EpistemicMapTest, IdenticalStackIsUniformlyMaximal) {
  Rng rng(1);
  const ImageBuffer img = random_image(5, 4, rng);
  const std::vector<ImageBuffer> stack{img, img, img};
  for (double s : epistemic_map(stack)) EXPECT_EQ(s, 0.0);
}

TEST(EpistemicMapTest, PerturbedPixelIsStrictlyLowest) {
  Rng rng(2);
  const ImageBuffer img = random_image(5, 4, rng);
  std::vector<ImageBuffer> stack{img, img, img};
  stack[1].set(3, 2, {0.0, 0.5, 1.0});
  const auto scores = epistemic_map(stack);
  const std::size_t target = 2 * 5 + 3;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i != target) {
      EXPECT_LT(scores[target], scores[i]);
    }
  }
}

TEST(EpistemicMapTest, HandVariance) {
  const std::vector<ImageBuffer> stack{ImageBuffer(2, 2, {0, 0, 0}), ImageBuffer(2, 2, {0.2, 0.2, 0.2})};
  for (double s : epistemic_map(stack)) EXPECT_NEAR(s, -0.01, 1e-15);
  EXPECT_THROW(epistemic_map(std::vector<ImageBuffer>{stack[0]}), std::invalid_argument);
}

TEST(EpistemicMapTest, PermutationInvariantAndDuplicationPreservesOrder) {
  Rng rng(3);
  std::vector<ImageBuffer> stack;
  for (int i = 0; i < 4; ++i) stack.push_back(random_image(6, 6, rng));
  const auto base = epistemic_map(stack);
  std::vector<ImageBuffer> shuffled{stack[2], stack[0], stack[3], stack[1]};
  EXPECT_EQ(epistemic_map(shuffled), base);

  std::vector<ImageBuffer> doubled = stack;
  doubled.insert(doubled.end(), stack.begin(), stack.end());
  const auto dup = epistemic_map(doubled);
  auto order = [](const std::vector<double>& s) {
    std::vector<std::size_t> idx(s.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s[a] > s[b]; });
    return idx;
  };
  EXPECT_EQ(order(dup), order(base));
}

TEST(EnsembleMeanTest, Average) {
  const std::vector<ImageBuffer> stack{ImageBuffer(1, 1, {0, 0.5, 1}), ImageBuffer(1, 1, {1, 0.5, 0})};
  EXPECT_EQ(ensemble_mean(stack).pixel(0), (Rgb{0.5, 0.5, 0.5}));
}

TEST(HsvMaskTest, ThresholdSemantics) {
  ImageBuffer img(2, 1);
  img.set(0, 0, {0.2, 0.0, 0.0});
  img.set(1, 0, {0.5, 0.0, 0.0});
  const auto all = hsv_mask(img, {0.0, 0.0});
  EXPECT_EQ(all, (std::vector<std::uint8_t>{1, 1}));
  EXPECT_EQ(hsv_mask(img, {0.3, 0.0}), (std::vector<std::uint8_t>{0, 1}));
  const ImageBuffer gray(3, 3, {0.5, 0.5, 0.5});
  for (auto m : hsv_mask(gray, {1.0, 1.0})) EXPECT_EQ(m, 0);
  EXPECT_THROW(hsv_mask(gray, {1.5, 0.0}), std::invalid_argument);
}

TEST(SelectPseudoTest, KappaOneSelectsEverything) {
  Rng rng(4);
  const ImageBuffer render = random_image(4, 4, rng);
  std::vector<double> scores(16);
  for (double& s : scores) s = rng.uniform();
  const std::vector<std::uint8_t> pass(16, 1);
  const PseudoLabelSet set = select_pseudo(scores, pass, render, camera_of(4, 4), 1.0);
  ASSERT_EQ(set.labels.size(), 16u);
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_EQ(set.labels[i].pixel, (Pixel{static_cast<int>(i % 4), static_cast<int>(i / 4)}));
    EXPECT_EQ(set.labels[i].rgb, render.pixel(i));
  }
}

TEST(SelectPseudoTest, DisjointHalvesSplitEvenly) {
  // Passing half has the higher scores, so the global top 5 and the failing top 5 are disjoint.
  std::vector<double> scores(100);
  std::vector<std::uint8_t> pass(100);
  for (int i = 0; i < 100; ++i) {
    pass[i] = i < 50;
    scores[i] = i < 50 ? 1.0 + i : -1.0 * i;
  }
  const PseudoLabelSet set =
      select_pseudo(scores, pass, ImageBuffer(10, 10), camera_of(10, 10), 0.10);
  ASSERT_EQ(set.labels.size(), 10u);
  int from_pass = 0;
  for (const auto& l : set.labels) from_pass += pass[l.pixel.y * 10 + l.pixel.x];
  EXPECT_EQ(from_pass, 5);
}

TEST(SelectPseudoTest, UniformScoresSelectRowMajorPrefix) {
  const std::vector<double> scores(100, 0.0);
  const std::vector<std::uint8_t> pass(100, 1);
  const PseudoLabelSet set =
      select_pseudo(scores, pass, ImageBuffer(10, 10), camera_of(10, 10), 0.10);
  const auto idx = set.pixel_indices();
  EXPECT_EQ(idx, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
}

TEST(SelectPseudoTest, RandomizedCardinalityAgainstOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 3 + static_cast<int>(rng.below(20));
    const int h = 3 + static_cast<int>(rng.below(20));
    const std::size_t p = static_cast<std::size_t>(w * h);
    const double kappa = rng.uniform(0.01, 1.0);
    std::vector<double> scores(p);
    for (double& s : scores) s = std::floor(rng.uniform() * 8.0);  // plenty of ties
    const std::vector<std::uint8_t> trivial(p, 1);
    const PseudoLabelSet set = select_pseudo(scores, trivial, ImageBuffer(w, h), camera_of(w, h), kappa);
    EXPECT_EQ(set.labels.size(), static_cast<std::size_t>(std::ceil(kappa * p - 1e-9)));

    // Nontrivial mask: union of two ranked prefixes, computed independently.
    std::vector<std::uint8_t> mask(p);
    for (auto& m : mask) m = rng.uniform() < 0.6;
    std::vector<std::size_t> all(p), fail;
    std::iota(all.begin(), all.end(), 0);
    auto by_score = [&](std::size_t a, std::size_t b) {
      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
    };
    std::sort(all.begin(), all.end(), by_score);
    for (std::size_t i : all) {
      if (!mask[i]) fail.push_back(i);
    }
    std::set<std::size_t> expected;
    if (fail.empty()) {
      for (std::size_t k = 0; k < static_cast<std::size_t>(std::ceil(kappa * p - 1e-9)); ++k) expected.insert(all[k]);
    } else {
      const auto g = static_cast<std::size_t>(std::ceil(0.5 * kappa * p - 1e-9));
      const auto f = std::min(fail.size(), static_cast<std::size_t>(std::ceil(0.5 * kappa * p - 1e-9)));
      for (std::size_t k = 0; k < g; ++k) expected.insert(all[k]);
      for (std::size_t k = 0; k < f; ++k) expected.insert(fail[k]);
    }
    const PseudoLabelSet masked = select_pseudo(scores, mask, ImageBuffer(w, h), camera_of(w, h), kappa);
    const auto idx = masked.pixel_indices();
    EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()), expected);
    EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
    EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), idx.size());
  }
}

TEST(SelectPseudoTest, RejectsBadArguments) {
  const std::vector<double> scores(4, 0.0);
  const std::vector<std::uint8_t> pass(4, 1);
  EXPECT_THROW(select_pseudo(scores, pass, ImageBuffer(2, 2), camera_of(2, 2), 0.0), std::invalid_argument);
  EXPECT_THROW(select_pseudo(scores, pass, ImageBuffer(2, 2), camera_of(2, 2), 1.5), std::invalid_argument);
  EXPECT_THROW(select_pseudo(scores, pass, ImageBuffer(2, 3), camera_of(2, 2), 0.5), std::invalid_argument);
}

TEST(MapSimilarityTest, JaccardCases) {
  const std::vector<std::size_t> a{1, 2, 3};
  EXPECT_EQ(map_similarity(a, a), 1.0);
  EXPECT_EQ(map_similarity(a, std::vector<std::size_t>{4, 5}), 0.0);
  EXPECT_EQ(map_similarity(std::vector<std::size_t>{}, std::vector<std::size_t>{}), 1.0);
  std::vector<std::size_t> x(10), y(10);
  std::iota(x.begin(), x.end(), 0);
  std::iota(y.begin(), y.end(), 2);
  EXPECT_NEAR(map_similarity(x, y), 8.0 / 12.0, 1e-15);
}

TEST(PseudoLabelIoTest, RoundTrip) {
  PseudoLabelSet set;
  set.camera = camera_of(4, 4);
  set.labels = {{{1, 2}, {0.1, 0.2, 0.30000000000000004}}, {{3, 3}, {1, 0, 0.5}}};
  const auto path = testing::temp_dir("confidence") / "labels.txt";
  write_pseudo_labels(path, set);
  const auto back = read_pseudo_labels(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].pixel, set.labels[0].pixel);
  EXPECT_EQ(back[0].rgb, set.labels[0].rgb);
  EXPECT_EQ(back[1].rgb, set.labels[1].rgb);
  EXPECT_TRUE(set.contains({3, 3}));
  EXPECT_FALSE(set.contains({0, 0}));
}

}  // namespace
}  // namespace sparseview
