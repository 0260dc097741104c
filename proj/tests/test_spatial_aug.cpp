#include <gtest/gtest.h>

#include <algorithm>

#include "test_util.hpp"

using namespace cocoaug;
using namespace cocoaug::testing;

namespace {
ImageRecord record(int w, int h) { return {1, "a.png", w, h, Json::object()}; }
}  // namespace

TEST(SpatialAug, CenterCropForFraction) {
  EXPECT_EQ(center_crop_for_fraction(record(100, 200), 0.80), (CropWindow{10, 20, 90, 180}));
  EXPECT_EQ(center_crop_for_fraction(record(200, 100), 0.80), (CropWindow{20, 10, 180, 90}));
  EXPECT_EQ(center_crop_for_fraction(record(123, 77), 1.0), (CropWindow{0, 0, 123, 77}));
  EXPECT_EQ(crop_size_for_fraction(3, 3, 0.01), (CropSize{1, 1}));
}

TEST(SpatialAug, CropSizeRoundsHalfUpAndKeepsAspect) {
  // 0.5 * 5 = 2.5 -> 3; long side 3 * 9 / 5 = 5.4 -> 5
  EXPECT_EQ(crop_size_for_fraction(5, 9, 0.5), (CropSize{3, 5}));
  // short side 4 -> 2; long side 2 * 7 / 4 = 3.5 -> 4
  EXPECT_EQ(crop_size_for_fraction(7, 4, 0.5), (CropSize{4, 2}));
}

TEST(SpatialAug, SampledFractionsStayInRange) {
  const CropSpec spec(CropKind::Center, 0.80, 0.99);
  Rng rng(5);
  const auto im = record(640, 480);
  for (int i = 0; i < 1000; ++i) {
    const auto s = sample_center_crop(rng, im, spec);
    EXPECT_GE(s.fraction, 0.80);
    EXPECT_LE(s.fraction, 0.99);
    EXPECT_TRUE(window_fits(s.window, 640, 480));
    EXPECT_EQ(s.window, center_crop_for_fraction(im, s.fraction));
  }
  EXPECT_THROW(CropSpec(CropKind::Center, 0.9, 0.8), ValidationError);
  EXPECT_THROW(CropSpec(CropKind::Center, 0.0, 0.8), ValidationError);
  EXPECT_THROW(CropSpec(CropKind::Center, 0.5, 1.2), ValidationError);
  EXPECT_THROW(sample_center_crop(rng, im, CropSpec(CropKind::RandomSized, 0.6, 0.8)), ValidationError);
}

TEST(SpatialAug, RandomSizedCrop) {
  Rng rng(3);
  EXPECT_EQ(random_sized_crop_for_fraction(rng, record(50, 70), 1.0), (CropWindow{0, 0, 50, 70}));
  for (int i = 0; i < 500; ++i) {
    const auto w = random_sized_crop_for_fraction(rng, record(100, 100), 0.60);
    EXPECT_EQ(w.width(), 60);
    EXPECT_EQ(w.height(), 60);
    EXPECT_GE(w.x_min, 0);
    EXPECT_LE(w.x_min, 40);
    EXPECT_GE(w.y_min, 0);
    EXPECT_LE(w.y_min, 40);
  }
  const CropSpec spec(CropKind::RandomSized, 0.6, 0.8);
  Rng a(8), b(8);
  for (int i = 0; i < 50; ++i) {
    const auto sa = sample_random_sized_crop(a, record(321, 123), spec);
    const auto sb = sample_random_sized_crop(b, record(321, 123), spec);
    EXPECT_EQ(sa.window, sb.window);
    EXPECT_GE(sa.fraction, 0.6);
    EXPECT_LE(sa.fraction, 0.8);
  }
}

TEST(SpatialAug, CropWithAnnotationsExamples) {
  const ImageRecord im = record(200, 100);
  const Image pixels = make_image(200, 100);
  const std::vector<Annotation> anns = {make_annotation(1, 1, 1, {0, 0, 40, 30}),
                                        make_annotation(2, 1, 1, {50, 10, 20, 20}),
                                        make_annotation(3, 1, 1, {180, 90, 10, 5})};
  {
    const auto full = crop_with_annotations(im, pixels, anns, {0, 0, 200, 100});
    // the small corner box falls under the area-ratio floor even uncropped
    EXPECT_EQ(full.annotations, std::vector<Annotation>(anns.begin(), anns.begin() + 2));
    EXPECT_EQ(cv::norm(full.pixels, pixels, cv::NORM_INF), 0.0);
  }
  const auto r = crop_with_annotations(im, pixels, anns, {30, 0, 130, 100});
  EXPECT_EQ(r.record.width, 100);
  EXPECT_EQ(r.record.height, 100);
  EXPECT_EQ(r.pixels.size(), cv::Size(100, 100));
  EXPECT_EQ(r.pixels.at<cv::Vec3b>(5, 7), pixels.at<cv::Vec3b>(5, 37));
  ASSERT_EQ(r.annotations.size(), 2u);
  EXPECT_EQ(r.annotations[0].bbox, (Box{0, 0, 10, 30}));
  EXPECT_EQ(r.annotations[0].loss_mode, LossMode::IgnoreLoss);
  EXPECT_DOUBLE_EQ(r.annotations[0].area, 300.0);
  EXPECT_EQ(r.annotations[1].bbox, (Box{20, 10, 20, 20}));
  EXPECT_EQ(r.annotations[1].loss_mode, LossMode::Keep);
  EXPECT_EQ(r.verdicts, (std::vector<Verdict>{Verdict::IgnoreLoss, Verdict::Keep, Verdict::Discard}));
}

TEST(SpatialAug, CropRejectsBadWindow) {
  EXPECT_THROW(crop_annotations(record(10, 10), {}, {0, 0, 11, 10}), ValidationError);
  EXPECT_THROW(crop_annotations(record(10, 10), {}, {5, 0, 5, 10}), ValidationError);
}

TEST(SpatialAug, EmittedBoxesMatchIndependentDecisions) {
  std::mt19937 gen(31);
  for (int trial = 0; trial < 300; ++trial) {
    const int W = 20 + static_cast<int>(gen() % 100), H = 20 + static_cast<int>(gen() % 100);
    std::vector<Annotation> anns;
    for (int k = 0; k < 8; ++k) {
      const double x = gen() % (W - 1), y = gen() % (H - 1);
      const double w = 1 + gen() % static_cast<unsigned>(W - x), h = 1 + gen() % static_cast<unsigned>(H - y);
      anns.push_back(make_annotation(k + 1, 1, 1, {x, y, w, h}));
    }
    Rng rng(static_cast<std::uint64_t>(trial));
    const auto window =
        sample_random_sized_crop(rng, record(W, H), CropSpec(CropKind::RandomSized, 0.3, 1.0)).window;
    const auto r = crop_annotations(record(W, H), anns, window);

    std::vector<Verdict> independent;
    std::size_t kept = 0;
    for (const auto& a : anns) {
      independent.push_back(clip_decision(a.bbox, window).verdict);
      kept += independent.back() != Verdict::Discard;
    }
    auto sorted = [](std::vector<Verdict> v) {
      std::sort(v.begin(), v.end());
      return v;
    };
    EXPECT_EQ(sorted(r.verdicts), sorted(independent));
    EXPECT_EQ(r.annotations.size(), kept);
    EXPECT_LE(r.annotations.size(), anns.size());
    for (const auto& a : r.annotations) {
      EXPECT_GE(a.bbox.x, 0);
      EXPECT_GE(a.bbox.y, 0);
      EXPECT_LE(a.bbox.right(), window.width());
      EXPECT_LE(a.bbox.bottom(), window.height());
    }
  }
}
