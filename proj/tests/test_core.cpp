#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wavesrc/core.hpp"
#include "wavesrc/error.hpp"

using namespace wavesrc;

TEST(Signal, PulseIsCausal) {
  const Signal sig;
  EXPECT_EQ(sig(-1.0), 0.0);
  EXPECT_EQ(sig(0.0), 0.0);
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> neg(-100.0, -1e-300);
  for (int n = 0; n < 1000; ++n) ASSERT_EQ(sig(neg(gen)), 0.0);
}

TEST(Signal, PulseAtCenter) {
  const Signal sig;
  EXPECT_NEAR(sig(3.0), -0.988032, 1e-6);
  EXPECT_DOUBLE_EQ(sig(3.0), std::sin(30.0));
  EXPECT_DOUBLE_EQ(sig(1.7), std::sin(17.0) * std::exp(-0.3 * 1.3 * 1.3));
}

TEST(Signal, TabulatedInterpolatesLinearly) {
  const Signal sig(TabulatedSignal{{0.0, 1.0, 2.0}, {0.0, 2.0, -2.0}});
  EXPECT_DOUBLE_EQ(sig(0.5), 1.0);
  EXPECT_DOUBLE_EQ(sig(1.25), 1.0);
  EXPECT_EQ(sig(-0.5), 0.0);
  EXPECT_EQ(sig(2.5), 0.0);
}

TEST(Signal, TabulatedRejectsBadTables) {
  EXPECT_THROW(Signal(TabulatedSignal{{0.0, 1.0}, {1.0, 0.0}}), ValidationError);
  EXPECT_THROW(Signal(TabulatedSignal{{0.0, 0.0}, {0.0, 1.0}}), ValidationError);
  EXPECT_THROW(Signal(TabulatedSignal{{0.0, 1.0}, {0.0}}), ValidationError);
}

TEST(TimeGrid, SamplesStartAtFirstStep) {
  const TimeGrid tg(15.0, 64);
  EXPECT_EQ(tg.at(0), 0.0);
  EXPECT_DOUBLE_EQ(tg.sample(0), 15.0 / 64.0);
  EXPECT_DOUBLE_EQ(tg.sample(63), 15.0);
  EXPECT_EQ(tg.samples().size(), 64u);
  EXPECT_THROW(TimeGrid(0.0, 4), ValidationError);
  EXPECT_THROW(TimeGrid(1.0, 0), ValidationError);
}

TEST(Sensors, SphereLayout) {
  const SensorArray s = sphere_sensors(5.0, 8, 8);
  ASSERT_EQ(s.size(), 64u);
  EXPECT_NEAR(s[0].x, 0.975452, 1e-6);
  EXPECT_NEAR(s[0].y, 0.0, 1e-15);
  EXPECT_NEAR(s[0].z, 4.903926, 1e-6);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(norm(s[i]), 5.0, 1e-12);
  // phi-major: index 1 shares phi with index 0, index 8 starts the next ring.
  EXPECT_DOUBLE_EQ(s[1].z, s[0].z);
  EXPECT_LT(s[8].z, s[0].z);
}

TEST(Sensors, SingleSensor) {
  const SensorArray s = sphere_sensors(1.0, 1, 1);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(s[0].x, 1.0, 1e-15);
  EXPECT_NEAR(s[0].y, 0.0, 1e-15);
  EXPECT_NEAR(s[0].z, 0.0, 1e-15);
}

TEST(Sensors, Subsets) {
  const std::vector<std::size_t> left{0, 1, 2, 3};
  const std::vector<std::size_t> upper{1, 2, 3, 4};
  const SensorArray full = sphere_sensors(5.0, 8, 8);
  const SensorArray l = sphere_sensors(5.0, 8, 8, {}, left);
  const SensorArray u = sphere_sensors(5.0, 8, 8, upper, {});
  ASSERT_EQ(l.size(), 32u);
  ASSERT_EQ(u.size(), 32u);
  EXPECT_EQ(l[4], full[8]);
  EXPECT_EQ(u[31], full[31]);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_GT(u[i].z, 0.0);
  const std::vector<std::size_t> bad{9};
  EXPECT_THROW(sphere_sensors(5.0, 8, 8, bad, {}), ValidationError);
}

TEST(Sensors, RejectsDuplicates) {
  EXPECT_THROW(SensorArray({{1, 0, 0}, {1, 0, 0}}), ValidationError);
  EXPECT_THROW(SensorArray({}), ValidationError);
}

TEST(Grid, TwentyOneCubed) {
  const SamplingGrid g({-2, -2, -2}, {2, 2, 2}, {21, 21, 21});
  EXPECT_EQ(g.size(), 9261u);
  EXPECT_NEAR(g.spacing().x, 0.2, 1e-15);
  EXPECT_EQ(g.point(std::size_t{0}), (Vec3{-2, -2, -2}));
  EXPECT_EQ(g.point(g.size() - 1), (Vec3{2, 2, 2}));
}

TEST(Grid, FiftyOneCubed) {
  const SamplingGrid g({-3, -3, -3}, {3, 3, 3}, {51, 51, 51});
  EXPECT_EQ(g.size(), 132651u);
  EXPECT_NEAR(g.spacing().y, 0.12, 1e-15);
}

TEST(Grid, Corners) {
  const auto pts = grid_points(SamplingGrid({0, 0, 0}, {1, 1, 1}, {2, 2, 2}));
  ASSERT_EQ(pts.size(), 8u);
  EXPECT_EQ(pts[1], (Vec3{0, 0, 1}));
  EXPECT_EQ(pts[2], (Vec3{0, 1, 0}));
  EXPECT_EQ(pts[4], (Vec3{1, 0, 0}));
}

TEST(Grid, IndexRoundTrip) {
  const SamplingGrid g({-1, 0, 2}, {1, 3, 5}, {4, 5, 6});
  for (std::size_t l = 0; l < g.size(); ++l) ASSERT_EQ(g.index_of(g.cell_of(l)), l);
}

TEST(Grid, Validation) {
  EXPECT_THROW(SamplingGrid({0, 0, 0}, {-1, 1, 1}, {3, 3, 3}), ValidationError);
  EXPECT_THROW(SamplingGrid({0, 0, 0}, {1, 1, 1}, {0, 3, 3}), ValidationError);
  const SamplingGrid g({-2, -2, -2}, {2, 2, 2}, {5, 5, 5});
  EXPECT_THROW(require_sensors_outside(SensorArray({{0, 0, 0}}), g), ValidationError);
  EXPECT_NO_THROW(require_sensors_outside(sphere_sensors(5.0, 4, 4), g));
}

TEST(Sources, Validation) {
  EXPECT_THROW(StaticSourceSet({{{0, 0, 0}, 1.0}, {{0, 0, 0}, 2.0}}), ValidationError);
  EXPECT_THROW(StaticSourceSet({{{0, 0, 0}, -1.0}}), ValidationError);
  EXPECT_THROW(StaticSourceSet({}), ValidationError);
}

TEST(Trajectory, VelocityMatchesFiniteDifference) {
  const std::vector<Trajectory> paths{Trajectory(CircleModulatedPath{}), Trajectory(HelixPath{}),
                                      Trajectory(ExpandingHelixPath{}), Trajectory(StationaryPath{{1, 2, 3}})};
  const double T = 2.0 * kPi;
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> time(0.01 * T, 0.99 * T);
  for (const auto& p : paths) {
    for (int n = 0; n < 100; ++n) {
      const double t = time(gen);
      const double h = 1e-5;
      const Vec3 fd = (p.position(t + h) - p.position(t - h)) / (2.0 * h);
      const Vec3 v = p.velocity(t);
      ASSERT_LT(norm(v - fd) / (1.0 + norm(v)), 1e-6) << "t=" << t;
    }
  }
}

TEST(Trajectory, KnownPoints) {
  const Trajectory s1(CircleModulatedPath{});
  EXPECT_NEAR(norm(s1.position(0.0) - Vec3{2.3, 0, 0}), 0.0, 1e-15);
  const Trajectory s2(HelixPath{});
  EXPECT_NEAR(norm(s2.position(kPi) - Vec3{0, 2, 0}), 0.0, 1e-14);
  const Trajectory s3(ExpandingHelixPath{});
  EXPECT_NEAR(norm(s3.position(0.0) - Vec3{0, 0, -2}), 0.0, 1e-15);
}

TEST(Trajectory, PiecewiseLinear) {
  const Trajectory p(PiecewiseLinearPath{{0.0, 1.0, 3.0}, {{0, 0, 0}, {1, 0, 0}, {1, 2, 0}}});
  EXPECT_EQ(p.position(0.5), (Vec3{0.5, 0, 0}));
  EXPECT_EQ(p.position(2.0), (Vec3{1, 1, 0}));
  EXPECT_EQ(p.position(-1.0), (Vec3{0, 0, 0}));
  EXPECT_EQ(p.position(9.0), (Vec3{1, 2, 0}));
  EXPECT_NEAR(norm(p.velocity(2.0) - Vec3{0, 1, 0}), 0.0, 1e-6);
  EXPECT_THROW(Trajectory(PiecewiseLinearPath{{1.0, 0.0}, {{0, 0, 0}, {1, 0, 0}}}), ValidationError);
}

namespace {

MeasurementSet ones(std::size_t nx, std::size_t nt) {
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < nx; ++i) pts.push_back({static_cast<double>(i) + 3.0, 0, 0});
  return MeasurementSet{SensorArray(pts), TimeGrid(1.0, nt), 1.0, Matrix(nx, nt, 1.0), std::nullopt,
                        Provenance::External};
}

}  // namespace

TEST(Noise, ZeroLevelIsIdentity) {
  MeasurementSet d = ones(3, 10);
  d.samples(1, 2) = -0.3;
  const MeasurementSet n = add_noise(d, 0.0, 99);
  EXPECT_EQ(n.samples, d.samples);
  ASSERT_TRUE(n.noise.has_value());
  EXPECT_EQ(n.noise->generator, kNoiseGeneratorId);
}

TEST(Noise, DeterministicAndBounded) {
  const MeasurementSet d = ones(8, 64);
  const MeasurementSet a = add_noise(d, 0.05, 42);
  const MeasurementSet b = add_noise(d, 0.05, 42);
  const MeasurementSet c = add_noise(d, 0.05, 43);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
  for (double v : a.samples.data()) {
    ASSERT_GE(v, 0.95);
    ASSERT_LE(v, 1.05);
  }
  EXPECT_THROW(add_noise(d, -0.1, 1), ValidationError);
}

TEST(Noise, DrawsFollowDocumentedStream) {
  const MeasurementSet d = ones(2, 3);
  const MeasurementSet n = add_noise(d, 0.5, 5);
  std::mt19937_64 gen(5);
  for (double v : n.samples.data()) {
    const double r = 2.0 * static_cast<double>(gen() >> 11) * 0x1.0p-53 - 1.0;
    ASSERT_EQ(v, (1.0 + 0.5 * r) * 1.0);
  }
}

TEST(Measurements, Validate) {
  MeasurementSet d = ones(2, 4);
  EXPECT_NO_THROW(d.validate());
  d.samples(0, 0) = std::nan("");
  EXPECT_THROW(d.validate(), ValidationError);
  MeasurementSet e = ones(2, 4);
  e.samples = Matrix(3, 4);
  EXPECT_THROW(e.validate(), ValidationError);
}

TEST(Provenance, StringRoundTrip) {
  for (Provenance p : {Provenance::Static, Provenance::Moving, Provenance::External})
    EXPECT_EQ(provenance_from_string(to_string(p)), p);
  EXPECT_THROW(provenance_from_string("bogus"), ValidationError);
}
