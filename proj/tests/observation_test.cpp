#include <gtest/gtest.h>

#include "debias/observation.hpp"

using namespace debias;

TEST(ObservationSet, RejectsEmptyAndHeterogeneous) {
  EXPECT_THROW(ObservationSet(std::vector<Observation>{}), Error);
  std::vector<Observation> mixed{EuclideanPoint{Vector::Ones(2)}, EuclideanPoint{Vector::Ones(3)}};
  try {
    ObservationSet bad(mixed);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos);
  }
  std::vector<Observation> kinds{EuclideanPoint{Vector::Ones(2)}, WeightedEmpirical::dirac(Vector::Ones(2))};
  EXPECT_THROW(ObservationSet{kinds}, Error);
  Vector nan = Vector::Ones(2);
  nan[0] = std::nan("");
  EXPECT_THROW(ObservationSet::from_points({nan}), Error);
  WeightedEmpirical w{{Vector::Ones(1), Vector::Zero(1)}, {0.5, 0.4}};
  EXPECT_THROW(w.validate(), Error);
}

TEST(ObservationSet, MeanAndWeightedMean) {
  const auto set = ObservationSet::from_points({Vector::Constant(2, 1.0), Vector::Constant(2, 3.0), Vector::Constant(2, 8.0)});
  EXPECT_TRUE(coords_of(set.mean()).isApprox(Vector::Constant(2, 4.0)));
  const std::vector<std::uint32_t> counts{2, 0, 1};
  EXPECT_TRUE(coords_of(set.weighted_mean(counts)).isApprox(Vector::Constant(2, 10.0 / 3.0)));
  EXPECT_EQ(set.as_matrix().rows(), 3);
}

TEST(ObservationSet, DiracMixtureMergesDuplicates) {
  Vector a(1), b(1);
  a << 0.0;
  b << 1.0;
  const auto set = ObservationSet::diracs({a, b, a});
  const auto m = std::get<WeightedEmpirical>(set.mean());
  ASSERT_EQ(m.support.size(), 2u);
  EXPECT_EQ(m.support[0][0], 0.0);
  EXPECT_NEAR(m.weights[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.weights[1], 1.0 / 3.0, 1e-15);
  m.validate();
}

TEST(ObservationSet, ResampleMeanIsDeterministicPerStream) {
  RandomStream s(1);
  std::vector<Vector> pts;
  for (int i = 0; i < 10; ++i) pts.push_back(Vector::Constant(1, i));
  const auto set = ObservationSet::from_points(pts);
  RandomStream a = s.split(4), b = s.split(4);
  EXPECT_EQ(coords_of(set.resample_mean(a)), coords_of(set.resample_mean(b)));
}

TEST(ObservationSet, FingerprintTracksContent) {
  const auto a = ObservationSet::from_points({Vector::Ones(2), Vector::Zero(2)});
  const auto b = ObservationSet::from_points({Vector::Ones(2), Vector::Zero(2)});
  const auto c = ObservationSet::from_points({Vector::Zero(2), Vector::Ones(2)});
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  EXPECT_NE(a.fingerprint(), c.fingerprint());
}

TEST(PairedDiracSet, SidesResampleIndependently) {
  std::vector<Vector> xs, ys;
  for (int i = 0; i < 5; ++i) xs.push_back(Vector::Constant(1, i));
  for (int i = 0; i < 7; ++i) ys.push_back(Vector::Constant(1, 10 + i));
  PairedDiracSet set(ObservationSet::diracs(xs), ObservationSet::diracs(ys));
  RandomStream s(3);
  const auto r = set.resample_mean(s);
  double wx = 0, wy = 0;
  for (double w : r.p.weights) wx += w;
  for (double w : r.q.weights) wy += w;
  EXPECT_NEAR(wx, 1.0, 1e-12);
  EXPECT_NEAR(wy, 1.0, 1e-12);
  for (const auto& v : r.q.support) EXPECT_GE(v[0], 10.0);
  EXPECT_THROW(PairedDiracSet(ObservationSet::from_points(xs), ObservationSet::diracs(ys)), Error);
}
