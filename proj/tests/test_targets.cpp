#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "msa/error.hpp"
#include "msa/io.hpp"
#include "msa/losses.hpp"
#include "msa/targets.hpp"
#include "msa/tensor_io.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace msa;

namespace {

PredictionCurves random_predictions(std::mt19937_64& rng, Index frames) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PredictionCurves p{Curve<double>(frames), ClassMatrix<double>(kNumClasses, frames)};
  for (Index i = 0; i < frames; ++i) {
    p.boundary(i) = u(rng);
    for (Index c = 0; c < kNumClasses; ++c) p.function(c, i) = u(rng);
  }
  return p;
}

TargetTensor random_masked_target(std::mt19937_64& rng, Index frames) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, kNumClasses - 1), bit(0, 1);
  TargetTensor t;
  t.boundary = Curve<double>(frames);
  t.boundary_mask = Mask(frames);
  t.function = ClassMatrix<double>::Zero(kNumClasses, frames);
  t.function_mask = Mask(frames);
  for (Index i = 0; i < frames; ++i) {
    t.boundary(i) = u(rng);
    t.boundary_mask(i) = static_cast<std::uint8_t>(bit(rng));
    t.function_mask(i) = static_cast<std::uint8_t>(bit(rng));
    if (t.function_mask(i)) t.function(cls(rng), i) = 1.0;
  }
  return t;
}

}  // namespace

TEST_SUITE("targets") {
  TEST_CASE("frame grid") {
    auto g = FrameGrid::for_duration(42.0, 10.0);
    CHECK(g.count() == 420);
    CHECK(FrameGrid::for_duration(4.2, 10.0).count() == 42);
    CHECK(FrameGrid::for_duration(4.21, 10.0).count() == 43);
    CHECK(g.center(0) == doctest::Approx(0.05));
    CHECK(g.fits(42.0));
    CHECK_FALSE(g.fits(43.0));
    CHECK_THROWS_AS(FrameGrid::for_duration(10.0, 0.0), InvalidArgument);
  }

  TEST_CASE("single full-song segment") {
    Annotation ann("s", 10, {Segment(0, 10, StructuralFunction::kChorus)});
    auto t = rasterize(ann, FrameGrid::for_duration(10, 10));
    REQUIRE(t.frames() == 100);
    CHECK((t.function.row(code(StructuralFunction::kChorus)) == 1.0).all());
    CHECK(t.function.sum() == 100.0);
    CHECK((t.function_mask == 1).all());
    CHECK((t.boundary_mask == 1).all());
  }

  TEST_CASE("boundary pulse value at a frame center") {
    Annotation ann("s", 10, {Segment(0, 5, StructuralFunction::kVerse), Segment(5, 10, StructuralFunction::kChorus)});
    auto t = rasterize(ann, FrameGrid::for_duration(10, 10), 0.5);
    const double expected = 0.5 * (1.0 + std::cos(std::numbers::pi * 0.05 / 0.5));
    CHECK(expected == doctest::Approx(0.976).epsilon(1e-3));
    CHECK(t.boundary(50) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(t.boundary(49) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(t.boundary(44) == 0.0);
    CHECK(t.boundary(45) > 0.0);
    CHECK(t.boundary(20) == 0.0);
    CHECK((t.boundary >= 0.0).all());
    CHECK((t.boundary <= 1.0).all());
  }

  TEST_CASE("pulse symmetry") {
    for (double d = 0.0; d <= 0.5; d += 0.01) CHECK(boundary_pulse(d, 0.5) == boundary_pulse(-d, 0.5));
    CHECK(boundary_pulse(0.0, 0.5) == 1.0);
    CHECK(boundary_pulse(0.6, 0.5) == 0.0);
  }

  TEST_CASE("excerpt padding is unsupervised") {
    PartialAnnotation p("x", 42, {Segment(9, 32, StructuralFunction::kChorus)});
    auto grid = FrameGrid::for_duration(42, 10);
    auto t = rasterize(p, grid);
    CHECK((t.function_mask != 0).count() == 230);
    for (Index i = 0; i < grid.count(); ++i) {
      const bool inside = grid.center(i) >= 9.0 && grid.center(i) < 32.0;
      CHECK(t.function_mask(i) == (inside ? 1 : 0));
      CHECK(t.function.col(i).sum() == (inside ? 1.0 : 0.0));
      const bool boundary_supervised = grid.center(i) >= 8.5 && grid.center(i) <= 32.5;
      CHECK(t.boundary_mask(i) == (boundary_supervised ? 1 : 0));
    }
    CHECK_THROWS_AS(rasterize(p, FrameGrid::for_duration(40, 10)), GridMismatch);
  }

  TEST_CASE("mask duality on random partial annotations") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const double dur = 5.0 + 60.0 * u(rng);
      std::vector<Segment> segs;
      double t = 0.0;
      while (true) {
        const double s = t + 5.0 * u(rng);
        const double e = s + 0.05 + 10.0 * u(rng);
        if (e > dur) break;
        segs.emplace_back(s, e, static_cast<StructuralFunction>(rng() % kNumClasses));
        t = e;
      }
      PartialAnnotation p("p", dur, segs);
      auto grid = FrameGrid::for_duration(dur, 10);
      auto tt = rasterize(p, grid);
      for (Index i = 0; i < grid.count(); ++i) {
        const Segment* hit = p.as_annotation().segment_at(grid.center(i));
        CHECK(tt.function_mask(i) == (hit ? 1 : 0));
        if (hit) CHECK(tt.function(code(hit->label()), i) == 1.0);
        CHECK(tt.function.col(i).sum() == (hit ? 1.0 : 0.0));
      }
    }
  }

  TEST_CASE("masked function loss closed forms") {
    TargetTensor t;
    t.boundary = Curve<double>::Zero(3);
    t.boundary_mask = Mask::Zero(3);
    t.function = ClassMatrix<double>::Zero(kNumClasses, 3);
    t.function_mask = Mask::Zero(3);
    PredictionCurves p{Curve<double>::Constant(3, 0.5), ClassMatrix<double>::Constant(kNumClasses, 3, 0.5)};

    auto empty = masked_function_loss(p, t);
    CHECK(empty.loss == 0.0);
    CHECK(empty.frames_counted == 0);
    CHECK(masked_boundary_loss(p, t).frames_counted == 0);

    t.function_mask(1) = 1;
    t.function(code(StructuralFunction::kChorus), 1) = 1.0;
    auto half = masked_function_loss(p, t);
    CHECK(half.frames_counted == 1);
    CHECK(half.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    PredictionCurves perfect{t.boundary, t.function};
    CHECK(masked_function_loss(perfect, t).loss < 1e-5);

    t.boundary_mask(2) = 1;
    t.boundary(2) = 1.0;
    auto b = masked_boundary_loss(p, t);
    CHECK(b.frames_counted == 1);
    CHECK(b.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(masked_boundary_loss(PredictionCurves{t.boundary, t.function}, t).loss < 1e-5);

    PredictionCurves wrong{Curve<double>::Zero(4), ClassMatrix<double>::Zero(kNumClasses, 4)};
    CHECK_THROWS_AS(masked_function_loss(wrong, t), ShapeMismatch);
    CHECK_THROWS_AS(masked_boundary_loss(wrong, t), ShapeMismatch);
  }

  TEST_CASE("losses ignore masked-out predictions exactly") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> wild(-5.0, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
      const Index n = 1 + static_cast<Index>(rng() % 300);
      auto t = random_masked_target(rng, n);
      auto p = random_predictions(rng, n);
      auto q = p;
      for (Index i = 0; i < n; ++i) {
        if (!t.function_mask(i)) for (Index c = 0; c < kNumClasses; ++c) q.function(c, i) = wild(rng);
        if (!t.boundary_mask(i)) q.boundary(i) = wild(rng);
      }
      CHECK(masked_function_loss(p, t).loss == masked_function_loss(q, t).loss);
      CHECK(masked_boundary_loss(p, t).loss == masked_boundary_loss(q, t).loss);
      CHECK((masked_function_loss_gradient(p, t) == masked_function_loss_gradient(q, t)).all());
    }
  }

  TEST_CASE("analytic gradients match central differences") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> p01(0.1, 0.9);
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
      const Index n = 12;
      auto t = random_masked_target(rng, n);
      auto p = random_predictions(rng, n);
      for (Index i = 0; i < n; ++i) {
        p.boundary(i) = p01(rng);
        for (Index c = 0; c < kNumClasses; ++c) p.function(c, i) = p01(rng);
      }
      const auto g = masked_function_loss_gradient(p, t);
      const auto gb = masked_boundary_loss_gradient(p, t);
      for (Index i = 0; i < n; ++i) {
        for (Index c = 0; c < kNumClasses; ++c) {
          auto f = [&](double x) {
            auto q = p;
            q.function(c, i) = x;
            return masked_function_loss(q, t).loss;
          };
          const double fd = oracle::central_difference(f, p.function(c, i), h);
          CHECK(g(c, i) == doctest::Approx(fd).epsilon(1e-4).scale(1e-12));
        }
        auto fb = [&](double x) {
          auto q = p;
          q.boundary(i) = x;
          return masked_boundary_loss(q, t).loss;
        };
        CHECK(gb(i) == doctest::Approx(oracle::central_difference(fb, p.boundary(i), h)).epsilon(1e-4));
      }
    }
  }

  TEST_CASE("templated kernels also run in single precision") {
    TargetTensorT<float> t;
    t.boundary = Curve<float>::Ones(2);
    t.boundary_mask = Mask::Ones(2);
    t.function = ClassMatrix<float>::Zero(kNumClasses, 2);
    t.function.row(0).setOnes();
    t.function_mask = Mask::Ones(2);
    PredictionCurvesT<float> p{Curve<float>::Constant(2, 0.5f), ClassMatrix<float>::Constant(kNumClasses, 2, 0.5f)};
    CHECK(masked_function_loss(p, t).loss == doctest::Approx(std::log(2.0)).epsilon(1e-6));
    CHECK(masked_boundary_loss(p, t).loss == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  }

  TEST_CASE("chunk windows") {
    auto w = chunk_windows(420, 10, 24, 12);
    REQUIRE(w.size() == 3);
    CHECK(w[0].offset == 0);
    CHECK(w[1].offset == 120);
    CHECK(w[2].offset == 180);
    for (const auto& x : w) CHECK(x.length == 240);

    auto exact = chunk_windows(240, 10, 24, 12);
    REQUIRE(exact.size() == 1);
    CHECK(exact[0].valid == 240);

    auto longer = chunk_windows(100, 10, kWindow24s, 12);
    REQUIRE(longer.size() == 1);
    CHECK(longer[0].length == 240);
    CHECK(longer[0].valid == 100);

    Annotation ann("s", 10, {Segment(0, 10, StructuralFunction::kVerse)});
    auto t = rasterize(ann, FrameGrid::for_duration(10, 10));
    auto padded = extract(t, longer[0]);
    CHECK(padded.frames() == 240);
    CHECK((padded.function_mask.head(100) == 1).all());
    CHECK((padded.function_mask.tail(140) == 0).all());
    CHECK((padded.boundary_mask.tail(140) == 0).all());
    CHECK((padded.function.rightCols(140) == 0.0).all());
    CHECK(extract(as_predictions(t), longer[0]).frames() == 240);

    CHECK_THROWS_AS(chunk_windows(100, 10, 24, 0), InvalidArgument);
    CHECK_THROWS_AS(chunk_windows(1000, 10, 24, 30), InvalidArgument);
  }

  TEST_CASE("chunk windows cover every frame") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 500; ++trial) {
      const Index frames = 1 + static_cast<Index>(rng() % 2000);
      const double window = (rng() % 2) ? kWindow24s : kWindow36s;
      const double hop = 0.5 + static_cast<double>(rng() % static_cast<unsigned>(window * 10 - 4)) / 10.0;
      auto ws = chunk_windows(frames, 10, window, hop);
      std::vector<int> seen(static_cast<std::size_t>(frames), 0);
      for (const auto& w : ws) {
        CHECK(w.offset >= 0);
        CHECK(w.offset + w.valid <= frames);
        for (Index i = 0; i < w.valid; ++i) seen[static_cast<std::size_t>(w.offset + i)] = 1;
      }
      CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    }
  }

  TEST_CASE("tensor files round-trip bit for bit") {
    test::TempDir dir("tensor");
    std::mt19937_64 rng(2);
    auto t = random_masked_target(rng, 137);
    const auto grid = FrameGrid(10, 137);
    write_target_tensor(dir.path(), "a", t, grid, 13.7);
    auto back = read_target_tensor(dir.path(), "a");
    CHECK((back.boundary == t.boundary.cast<float>().cast<double>()).all());
    CHECK((back.function == t.function).all());
    CHECK((back.boundary_mask == t.boundary_mask).all());
    CHECK((back.function_mask == t.function_mask).all());

    write_target_tensor(dir.path(), "b", back, grid, 13.7);
    CHECK(read_file(dir / "a.f32") == read_file(dir / "b.f32"));
    CHECK(read_file(dir / "a.mask") == read_file(dir / "b.mask"));
    CHECK(read_file(dir / "a.f32").size() == 137 * 8 * 4);

    // Little-endian float32, channels x frames: byte 4..7 is boundary of frame 1.
    const auto bytes = read_file(dir / "a.f32");
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 + b])) << (8 * b);
    CHECK(std::bit_cast<float>(bits) == static_cast<float>(t.boundary(1)));

    auto raw = read_raw_matrix(dir.path(), "a");
    CHECK(raw.duration == 13.7);
    CHECK(raw.channels == tensor_channel_names());
    CHECK_THROWS_AS(write_target_tensor(dir.path(), "c", t, FrameGrid(10, 10), 1.0), GridMismatch);
    CHECK_THROWS_AS(read_target_tensor(dir.path(), "missing"), IoError);
  }
}
