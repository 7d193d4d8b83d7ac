#include <gmodes/io.hpp>
#include <gmodes/modes.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "support.hpp"

using gmodes::BigFloat;
using gmodes::Box;
using gmodes::Cube;
using gmodes::Interval;
using gmodes::IntervalFamily;
using gmodes::Mixture;
using gmodes::ModeMethod;
using gmodes::PrecisionContext;
using gmodes::ScopedPrecision;

namespace {

const PrecisionContext kHw = PrecisionContext::hardware();

Mixture<double> single_gaussian(int d = 1) { return Mixture<double>(d, std::vector<double>(d, 0.0), {1.0}, true); }

Interval<double> region(double lo, double hi) { return {lo, hi}; }

double min_gap_step(const Mixture<double>& m) {
  auto c = m.centers_double();
  std::sort(c.begin(), c.end());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c[i] > c[i - 1]) gap = std::min(gap, c[i] - c[i - 1]);
  return std::isfinite(gap) ? std::min(gap / 8, 0.125) : 0.125;
}

}  // namespace

TEST(CountModes1d, SingleGaussian) {
  const auto r = gmodes::count_modes_1d(single_gaussian(), region(-5, 5), 0.125, kHw);
  ASSERT_EQ(r.count, 1u);
  EXPECT_LT(std::fabs(r.locations[0][0]), 1e-6);
  EXPECT_FALSE(r.certified);
  EXPECT_EQ(r.method, ModeMethod::sign_change);
  EXPECT_EQ(r.precision_bits, 53);
}

TEST(CountModes1d, SeparatedAndOverlappingComponents) {
  EXPECT_EQ(gmodes::count_modes_1d(gmodes::make_gamma(10.0, 2), region(-25, 25), 1.25, kHw).count, 5u);
  EXPECT_EQ(gmodes::count_modes_1d(gmodes::make_gamma(0.1, 2), region(-5, 5), 0.0125, kHw).count, 1u);
}

TEST(CountModes1d, LatticeDoubleBackend) {
  for (int n = 3; n <= 18; ++n) {
    const double a = gmodes::critical_spacing<double>(n);
    const double s = std::sqrt(M_PI * n);
    const auto r = gmodes::count_modes_1d(gmodes::make_faN(a, n), region(-s, s), a / 8, kHw);
    EXPECT_GE(static_cast<int>(r.count), n - 1) << "N=" << n;
  }
}

TEST(CountModes1d, LocationsInsideRegionAndSeparated) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 30; ++t) {
    const auto m = testing_support::random_mixture_1d(rng);
    const double step = min_gap_step(m);
    const auto r = gmodes::count_modes_1d(m, region(-13, 13), step, kHw);
    ASSERT_EQ(r.count, r.locations.size());
    for (std::size_t i = 0; i < r.locations.size(); ++i) {
      EXPECT_TRUE(r.search_region.strictly_contains(r.locations[i]));
      if (i > 0) {
        EXPECT_GT(r.locations[i][0] - r.locations[i - 1][0], step * 1e-6);
      }
    }
  }
}

TEST(CountModes1d, Errors) {
  const auto m = single_gaussian();
  EXPECT_THROW(gmodes::count_modes_1d(m, region(1, 1), 0.1, kHw), std::invalid_argument);
  EXPECT_THROW(gmodes::count_modes_1d(m, region(2, -2), 0.1, kHw), std::invalid_argument);
  EXPECT_THROW(gmodes::count_modes_1d(m, region(-1, 1), 0.0, kHw), std::invalid_argument);
  EXPECT_THROW(gmodes::count_modes_1d(m, region(-1, 1), -0.1, kHw), std::invalid_argument);
  EXPECT_THROW(gmodes::count_modes_1d(gmodes::make_gamma(1.0, 2), region(-5, 5), 0.2, kHw),
               std::invalid_argument);
  EXPECT_THROW(gmodes::count_modes_1d(single_gaussian(2), region(-1, 1), 0.1, kHw), std::invalid_argument);
}

TEST(CountModes1d, ScaleInvariance) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> uc(-6, 2);
  for (int t = 0; t < 40; ++t) {
    const auto m = testing_support::random_mixture_1d(rng);
    const double step = min_gap_step(m);
    const auto base = gmodes::count_modes_1d(m, region(-13, 13), step, kHw);
    const auto scaled = gmodes::count_modes_1d(m.scaled(std::pow(10.0, uc(rng))), region(-13, 13), step, kHw);
    ASSERT_EQ(base.count, scaled.count) << "trial " << t;
    for (std::size_t i = 0; i < base.count; ++i)
      EXPECT_NEAR(base.locations[i][0], scaled.locations[i][0], 2 * step * 1e-6);
  }
}

TEST(CountModes1d, FootnoteMaximaExceedMinimaByOne) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 40; ++t) {
    const auto m = testing_support::random_mixture_1d(rng);
    const auto scan = gmodes::scan_critical_points_1d(m, region(-14, 14), min_gap_step(m), kHw);
    EXPECT_EQ(scan.maxima.count, scan.minima.size() + 1) << "trial " << t;
  }
  const double a = gmodes::critical_spacing<double>(8);
  const auto scan = gmodes::scan_critical_points_1d(gmodes::make_faN(a, 8), region(-30, 30), a / 8, kHw);
  EXPECT_EQ(scan.maxima.count, scan.minima.size() + 1);
}

TEST(CountModes1d, SymmetricConstructionsHaveSymmetricModes) {
  for (int n : {3, 6, 10}) {
    const int bits = gmodes::required_bits(n);
    ScopedPrecision p(bits);
    const auto ctx = PrecisionContext::for_bits(bits);
    const BigFloat a = gmodes::critical_spacing<BigFloat>(n);
    const BigFloat half = a * BigFloat(n) / BigFloat(2) + BigFloat(4);
    const auto r = gmodes::count_modes_1d(gmodes::make_faN(a, n), Interval<BigFloat>{-half, half},
                                          a / BigFloat(8), ctx);
    const double tol = 2 * to_double(a / BigFloat(8)) * 1e-6;
    ASSERT_GT(r.count, 0u);
    for (std::size_t i = 0; i < r.count; ++i)
      EXPECT_NEAR(r.locations[i][0], -r.locations[r.count - 1 - i][0], tol) << "N=" << n;
  }
}

TEST(Certified1d, SingleGaussianUnitInterval) {
  IntervalFamily<double> fam{{{-1.0, 1.0}}};
  const auto r = gmodes::certified_lower_bound_1d(single_gaussian(), fam, kHw);
  EXPECT_EQ(r.count, 1u);
  EXPECT_TRUE(r.certified);
  EXPECT_EQ(r.method, ModeMethod::interval_certificate);
  EXPECT_EQ(r.locations[0][0], 0.0);
}

TEST(Certified1d, TiesAreNotCounted) {
  // Flat density between two far components: midpoint equals both ends.
  IntervalFamily<double> fam{{{100.0, 102.0}}};
  EXPECT_EQ(gmodes::certified_lower_bound_1d(single_gaussian(), fam, kHw).count, 0u);
}

TEST(Certified1d, RejectsOverlap) {
  IntervalFamily<double> fam{{{-1.0, 1.0}, {0.5, 2.0}}};
  EXPECT_THROW(gmodes::certified_lower_bound_1d(single_gaussian(), fam, kHw), std::invalid_argument);
  IntervalFamily<double> touching{{{1.0, 3.0}, {-1.0, 1.0}}};
  EXPECT_NO_THROW(gmodes::certified_lower_bound_1d(single_gaussian(), touching, kHw));
}

TEST(Certified1d, LatticeCellsTouchAndStayInside) {
  ScopedPrecision p(128);
  const BigFloat a = gmodes::critical_spacing<BigFloat>(7);
  const BigFloat s = a * BigFloat(7) / BigFloat(2);
  const auto fam = IntervalFamily<BigFloat>::lattice_cells(a, -s, s);
  ASSERT_EQ(fam.intervals.size(), 7u);
  for (std::size_t i = 0; i < fam.intervals.size(); ++i) {
    EXPECT_LE(to_double(abs(fam.intervals[i].lo) - s), 1e-30);
    EXPECT_LE(to_double(fam.intervals[i].hi - s), 1e-30);
    if (i > 0) {
      EXPECT_EQ(fam.intervals[i].lo, fam.intervals[i - 1].hi);
    }
  }
}

TEST(Certified1d, LatticeAtRequiredBits) {
  for (int n = 3; n <= 40; ++n) {
    const int bits = gmodes::required_bits(n);
    ScopedPrecision p(bits);
    const auto ctx = PrecisionContext::for_bits(bits);
    const BigFloat a = gmodes::critical_spacing<BigFloat>(n);
    const BigFloat s = a * BigFloat(n) / BigFloat(2);
    const auto fam = IntervalFamily<BigFloat>::lattice_cells(a, -s, s);
    const auto r = gmodes::certified_lower_bound_1d(gmodes::make_faN(a, n), fam, ctx);
    EXPECT_GE(static_cast<int>(r.count), n - 1) << "N=" << n;
    EXPECT_EQ(r.precision_bits, bits);
  }
}

TEST(Certified1d, OuterIntervalOfGamma) {
  for (int n : {8, 16, 24}) {
    const int bits = gmodes::required_bits(n);
    ScopedPrecision p(bits);
    const auto ctx = PrecisionContext::for_bits(bits);
    const BigFloat a = gmodes::critical_spacing<BigFloat>(n);
    const BigFloat r0 = sqrt(BigFloat::pi() * BigFloat(n));
    const auto fam = IntervalFamily<BigFloat>::lattice_cells(a, BigFloat(3) * r0, BigFloat(5) * r0);
    const auto r = gmodes::certified_lower_bound_1d(gmodes::make_Gamma<BigFloat>(n), fam, ctx);
    EXPECT_GE(static_cast<int>(r.count), n - 1) << "N=" << n;
  }
}

TEST(Certified1d, OrderingCertifiedScanSilverman) {
  for (int n = 3; n <= 14; ++n) {
    const int bits = gmodes::required_bits(n);
    ScopedPrecision p(bits);
    const auto ctx = PrecisionContext::for_bits(bits);
    const BigFloat a = gmodes::critical_spacing<BigFloat>(n);
    const BigFloat s = a * BigFloat(n) / BigFloat(2);
    const auto m = gmodes::make_faN(a, n);
    const auto cert = gmodes::certified_lower_bound_1d(m, IntervalFamily<BigFloat>::lattice_cells(a, -s, s), ctx);
    const auto scan = gmodes::count_modes_1d(m, Interval<BigFloat>{-s, s}, a / BigFloat(8), ctx);
    EXPECT_LE(cert.count, scan.count) << "N=" << n;
    EXPECT_LE(scan.count, m.size()) << "N=" << n;
  }
}

TEST(Certified1d, MonotoneInPrecision) {
  for (int n : {6, 12, 20}) {
    std::size_t prev = 0;
    for (int bits : {64, 96, 128, 192, 256}) {
      ScopedPrecision p(bits);
      const auto ctx = PrecisionContext::for_bits(bits);
      const BigFloat a = gmodes::critical_spacing<BigFloat>(n);
      const BigFloat s = a * BigFloat(n) / BigFloat(2);
      const auto r = gmodes::certified_lower_bound_1d(gmodes::make_faN(a, n),
                                                      IntervalFamily<BigFloat>::lattice_cells(a, -s, s), ctx);
      EXPECT_GE(r.count, prev) << "N=" << n << " bits=" << bits;
      prev = r.count;
    }
  }
}

TEST(Lipschitz, ClosedForms) {
  const double g1 = std::exp(-0.5) / std::sqrt(2 * M_PI);
  EXPECT_NEAR(gmodes::lipschitz_bound(single_gaussian()), g1, 1e-16);
  EXPECT_NEAR(g1, 0.24197, 1e-5);
  const auto faN = gmodes::make_faN(0.9, 6);
  EXPECT_NEAR(gmodes::lipschitz_bound(faN), 13 * g1, 1e-14);
  const double g2 = gmodes::lipschitz_bound(Mixture<double>(2, {0.0, 0.0}, {1.0}, false));
  EXPECT_NEAR(g2, std::exp(-0.5) / (2 * M_PI), 1e-16);
  EXPECT_NEAR(g2, 0.09653, 1e-5);
}

TEST(Lipschitz, BoundsSampledGradients) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> ux(-5, 5);
  for (int d : {1, 2, 3}) {
    const auto m = testing_support::random_mixture_d(rng, d, 5);
    const double lip = gmodes::lipschitz_bound(m);
    for (int i = 0; i < 500; ++i) {
      std::vector<double> x(d);
      for (auto& v : x) v = ux(rng);
      const auto g = gmodes::density_gradient(m, std::span<const double>(x), kHw);
      double n2 = 0;
      for (double v : g) n2 += v * v;
      EXPECT_LE(std::sqrt(n2), lip);
    }
  }
}

TEST(Cubes, SingleGaussianUnitCube) {
  const auto m = single_gaussian(2);
  const std::vector<Cube<double>> cubes{{{0.0, 0.0}, 1.0}};
  const auto r = gmodes::count_modes_cube_d(m, cubes, 1.0 / 16, kHw);
  EXPECT_EQ(r.count, 1u);
  EXPECT_TRUE(r.certified);
  EXPECT_EQ(r.method, ModeMethod::cube_certificate);
  EXPECT_EQ(r.locations[0], (std::vector<double>{0.0, 0.0}));
}

TEST(Cubes, TailCubeIsRejected) {
  const auto m = single_gaussian(2);
  const Cube<double> tail{{40.0, 40.0}, 1.0};
  const auto cert = gmodes::certify_cube(m, tail, 1.0 / 16, kHw);
  EXPECT_EQ(cert.verdict, gmodes::CubeVerdict::too_coarse);
  std::vector<gmodes::CubeVerdict> v;
  const std::vector<Cube<double>> cubes{{{0.0, 0.0}, 1.0}, tail};
  const auto r = gmodes::count_modes_cube_d(m, cubes, 1.0 / 16, kHw, gmodes::CubeSlack::lipschitz, &v);
  EXPECT_EQ(r.count, 1u);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[1], gmodes::CubeVerdict::too_coarse);
}

TEST(Cubes, OffCenterCubeIsNotCertified) {
  const auto m = single_gaussian(2);
  const std::vector<Cube<double>> cubes{{{2.0, 0.0}, 0.5}};
  EXPECT_EQ(gmodes::count_modes_cube_d(m, cubes, 0.125, kHw).count, 0u);
  EXPECT_EQ(gmodes::count_modes_cube_d(m, cubes, 0.125, kHw, gmodes::CubeSlack::curvature).count, 0u);
}

TEST(Cubes, Errors) {
  const auto m = single_gaussian(2);
  const std::vector<Cube<double>> overlap{{{0.0, 0.0}, 1.0}, {{1.5, 0.0}, 1.0}};
  EXPECT_THROW(gmodes::count_modes_cube_d(m, overlap, 0.125, kHw), std::invalid_argument);
  const std::vector<Cube<double>> one{{{0.0, 0.0}, 1.0}};
  EXPECT_THROW(gmodes::count_modes_cube_d(m, one, 0.5, kHw), std::invalid_argument);
  EXPECT_THROW(gmodes::count_modes_cube_d(single_gaussian(1), std::vector<Cube<double>>{{{0.0}, 1.0}}, 0.1, kHw),
               std::invalid_argument);
  const std::vector<Cube<double>> wrong_dim{{{0.0, 0.0, 0.0}, 1.0}};
  EXPECT_THROW(gmodes::count_modes_cube_d(m, wrong_dim, 0.125, kHw), std::invalid_argument);
}

TEST(Cubes, LatticeCubesCoverTheBox) {
  const auto cubes = gmodes::lattice_cubes(1.0, 2, 2.6);
  EXPECT_EQ(cubes.size(), 25u);
  for (const auto& c : cubes)
    for (double v : c.center) EXPECT_LE(std::fabs(v) + c.half_width, 2.6);
}

TEST(Cubes, LatticeInTwoDimensions) {
  // N = 4 with the default constants: (N - 1)^2 = 9 cubes must certify.
  ScopedPrecision p(128);
  const auto ctx = PrecisionContext::for_bits(128);
  const int n = 4;
  const BigFloat a = BigFloat(2) * sqrt(BigFloat::pi()) / sqrt(BigFloat(n));
  const BigFloat bound = sqrt(BigFloat::pi()) * sqrt(BigFloat(n));
  const auto m = gmodes::make_lattice_d(a, n, 2);
  const auto cubes = gmodes::lattice_cubes(a, 2, bound);
  const auto r = gmodes::count_modes_cube_d_adaptive(m, cubes, a / BigFloat(8), a / BigFloat(8192), ctx);
  EXPECT_GE(r.count, 9u);
  const auto oracle = gmodes::dense_grid_oracle(m, Box{{-5.0, -5.0}, {5.0, 5.0}}, 12, ctx);
  EXPECT_LE(r.count, oracle.count);
}

TEST(Oracle, SingleGaussian) {
  const auto r = gmodes::dense_grid_oracle(single_gaussian(), Box{{-5.0}, {5.0}}, 100, kHw);
  ASSERT_EQ(r.count, 1u);
  EXPECT_LT(std::fabs(r.locations[0][0]), 0.01);
  EXPECT_FALSE(r.certified);
  EXPECT_EQ(r.method, ModeMethod::dense_grid_oracle);
}

TEST(Oracle, AgreesWithScanOnConstructions) {
  const auto g = gmodes::make_gamma(10.0, 2);
  EXPECT_EQ(gmodes::dense_grid_oracle(g, Box{{-25.0}, {25.0}}, 100, kHw).count, 5u);
  EXPECT_EQ(gmodes::count_modes_1d(g, region(-25, 25), 1.25, kHw).count, 5u);

  const int n = 10;
  const int bits = gmodes::required_bits(n);
  ScopedPrecision p(bits);
  const auto ctx = PrecisionContext::for_bits(bits);
  const BigFloat a = gmodes::critical_spacing<BigFloat>(n);
  const auto m = gmodes::make_faN(a, n);
  const BigFloat half = a * BigFloat(n) + BigFloat(4);
  const auto scan = gmodes::count_modes_1d(m, Interval<BigFloat>{-half, half}, a / BigFloat(8), ctx);
  const double h = to_double(half);
  const auto oracle = gmodes::dense_grid_oracle(m, Box{{-h}, {h}}, 200, ctx);
  EXPECT_EQ(scan.count, oracle.count);
}

TEST(Oracle, RandomMixturesMatchScan) {
  std::mt19937_64 rng(20260101);
  int mismatches = 0;
  for (int t = 0; t < 50; ++t) {
    const auto m = testing_support::random_mixture_1d(rng, 7);
    const auto scan = gmodes::count_modes_1d(m, region(-16, 16), min_gap_step(m), kHw);
    const auto oracle = gmodes::dense_grid_oracle(m, Box{{-16.0}, {16.0}}, 200, kHw);
    if (scan.count != oracle.count) ++mismatches;
    EXPECT_EQ(scan.count, oracle.count) << "trial " << t;
  }
  EXPECT_EQ(mismatches, 0);
}

TEST(Oracle, PlateauMergesIntoOneMode) {
  // Two equal components far apart produce two separate modes, each a
  // single strict maximum.
  const Mixture<double> m(1, {-4.0, 4.0}, {0.5, 0.5}, true);
  EXPECT_EQ(gmodes::dense_grid_oracle(m, Box{{-10.0}, {10.0}}, 50, kHw).count, 2u);
}

TEST(Oracle, GridGuardAndErrors) {
  const auto m = single_gaussian(3);
  EXPECT_THROW(gmodes::dense_grid_oracle(m, Box{{-50.0, -50.0, -50.0}, {50.0, 50.0, 50.0}}, 10, kHw),
               std::invalid_argument);
  EXPECT_THROW(gmodes::dense_grid_oracle(m, Box{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}, 0, kHw), std::invalid_argument);
  EXPECT_THROW(gmodes::dense_grid_oracle(m, Box{{0.0}, {1.0}}, 10, kHw), std::invalid_argument);
  EXPECT_THROW(gmodes::dense_grid_oracle(m, Box{{0.0, 1.0, 0.0}, {1.0, 1.0, 1.0}}, 10, kHw), std::invalid_argument);
}

TEST(Oracle, TwoDimensionalRandomMixturesContainCertifiedCubes) {
  // A certified cube always holds a local maximum, so the oracle on a box
  // containing every cube finds at least as many.
  std::mt19937_64 rng(25);
  for (int t = 0; t < 10; ++t) {
    const auto m = testing_support::random_mixture_d(rng, 2, 4);
    std::vector<Cube<double>> cubes;
    for (std::size_t k = 0; k < m.size(); ++k) {
      const auto c = m.center(k);
      cubes.push_back({{c[0], c[1]}, 0.25});
    }
    bool disjoint = true;
    for (std::size_t i = 0; i < cubes.size(); ++i)
      for (std::size_t k = i + 1; k < cubes.size(); ++k)
        disjoint = disjoint && (std::fabs(cubes[i].center[0] - cubes[k].center[0]) >= 0.5 ||
                                std::fabs(cubes[i].center[1] - cubes[k].center[1]) >= 0.5);
    if (!disjoint) continue;
    const auto cert = gmodes::count_modes_cube_d(m, cubes, 1.0 / 64, kHw, gmodes::CubeSlack::curvature);
    const auto oracle = gmodes::dense_grid_oracle(m, Box{{-6.0, -6.0}, {6.0, 6.0}}, 40, kHw);
    EXPECT_LE(cert.count, oracle.count) << "trial " << t;
  }
}

TEST(Json, ModeReportRoundTrip) {
  const auto r = gmodes::count_modes_1d(gmodes::make_gamma(10.0, 2), region(-25, 25), 1.25, kHw);
  const auto back = gmodes::mode_report_from_json(nlohmann::json::parse(gmodes::to_json(r).dump()));
  EXPECT_EQ(back, r);
  const auto j = gmodes::to_json(r);
  for (const char* key : {"count", "locations", "certified", "method", "precision_bits", "region"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["method"], "sign_change");
}

TEST(Json, MixtureRoundTrip) {
  const auto m = gmodes::make_lattice_d(0.7, 2, 2);
  const auto back = gmodes::mixture_from_json<double>(gmodes::mixture_to_json(m));
  EXPECT_EQ(back.dim(), 2);
  EXPECT_EQ(back.centers(), m.centers());
  EXPECT_EQ(back.weights(), m.weights());
  EXPECT_THROW(gmodes::mixture_from_json<double>(nlohmann::json::parse(R"({"dim":2,"centers":[[1]],"weights":[1]})")),
               std::invalid_argument);
}

TEST(Json, UnknownMethodRejected) {
  EXPECT_THROW(gmodes::mode_method_from_string("newton"), std::invalid_argument);
}
