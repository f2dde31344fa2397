#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <utility>
#include <vector>

#include "pvstab/errors.hpp"
#include "pvstab/stability.hpp"

using namespace pvstab;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kLT = 20.884311632518504e-6;
constexpr double kTol = 1e-3 * 100.0 * kPi;  // default decision band

InverterParams sample_params() {
  InverterParams p;
  p.kp = 0.001;
  p.kr = 1.0;
  p.kd = 0.0017;
  p.omega0 = 100.0 * kPi;
  p.omega_i = kPi;
  p.Vdc = 553.0;
  p.L1 = 90.0e-6;
  p.L2 = 18.0e-6;
  p.Cf = 182.0e-6;
  p.Ts = 50.0e-6;
  p.lambda = 1.0;
  p.fsw = 10000.0;
  return p;
}

GridImpedance calibrated_grid() {
  GridParams g;
  g.mode = GridMode::Ratings;
  g.ratings.S_stepup_VA = 6.3e6;
  g.ratings.Us_pct = 10.5;
  g.ratings.U_H_V = 110e3;
  g.ratings.U_L_V = 10e3;
  g.ratings.r_line_ohm_per_km = 0.21;
  g.ratings.x_line_ohm_per_km = 0.34;
  g.ratings.length_km = 20.0;
  g.ratings.base_voltage_V = 270.0;
  g.ratings.Lg_scale = 9.6;
  return resolve_grid(g, 100.0 * kPi);
}

PlantGroup group(const std::string& label, int count, double Td_s) {
  PlantGroup g;
  g.label = label;
  g.params = sample_params();
  g.params.Td = Td_s;
  g.LT = kLT;
  g.count = count;
  return g;
}

SystemModel default_plant() {
  return compose({group("plant", 2, 75e-6)}, calibrated_grid());
}

// True when the inclusive intervals `inner` cover a subset of `outer`.
bool intervals_subset(const std::vector<std::pair<int, int>>& inner,
                      const std::vector<std::pair<int, int>>& outer) {
  for (const auto& [lo, hi] : inner)
    for (int n = lo; n <= hi; ++n) {
      bool covered = false;
      for (const auto& [olo, ohi] : outer)
        if (n >= olo && n <= ohi) covered = true;
      if (!covered) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("classify on hand-built polynomials") {
  // (s + 1 - j)(s + 1 + j): both roots at Re = -1.
  const Polynomial damped = poly_from_roots(1.0, {{-1.0, 1.0}, {-1.0, -1.0}});
  StabilityVerdict v = classify(damped, 0.3);
  CHECK(v.stable);
  CHECK_FALSE(v.marginal);
  CHECK(v.max_real == doctest::Approx(-1.0));
  CHECK(v.dominant.size() == 2);  // the conjugate pair ties for dominance
  CHECK(v.margin_tol == 0.3);

  // (s - 0.1)(s + 5): one right-half-plane root.
  const Polynomial rhp = poly_from_roots(1.0, {{0.1, 0.0}, {-5.0, 0.0}});
  v = classify(rhp, 0.05);
  CHECK_FALSE(v.stable);
  CHECK_FALSE(v.marginal);
  CHECK(v.max_real == doctest::Approx(0.1));
  REQUIRE(v.dominant.size() == 1);
  CHECK(v.dominant[0].real() == doctest::Approx(0.1));

  // Same polynomial inside a wide decision band: still unstable, but flagged
  // as numerically undecided.
  v = classify(rhp, 0.2);
  CHECK_FALSE(v.stable);
  CHECK(v.marginal);

  // s (s + 3): a root on the axis is marginal under any small band.
  v = classify(Polynomial({0.0, 3.0, 1.0}), 1e-9);
  CHECK_FALSE(v.stable);
  CHECK(v.marginal);
  CHECK(std::abs(v.max_real) <= 1e-12);

  CHECK_THROWS_AS(classify(damped, -1.0), InputError);
  CHECK_THROWS_AS(classify(Polynomial::constant(1.0), 0.0), DomainError);
}

TEST_CASE("count sweep straddling both boundaries of the sample plant") {
  const SystemModel m = default_plant();
  const auto verdicts = sweep_counts(m, "plant", {19, 20, 776, 777}, kTol);
  REQUIRE(verdicts.size() == 4);

  // 19 inverters: comfortably stable.
  CHECK(verdicts[0].stable);
  CHECK_FALSE(verdicts[0].marginal);
  CHECK(verdicts[0].max_real == doctest::Approx(-0.3582).epsilon(1e-2));

  // 20 inverters: the dominant pair has crossed, inside the decision band.
  CHECK_FALSE(verdicts[1].stable);
  CHECK(verdicts[1].marginal);
  CHECK(verdicts[1].max_real == doctest::Approx(0.0830).epsilon(1e-2));

  // 776: still (barely) unstable; 777: back to stable.
  CHECK_FALSE(verdicts[2].stable);
  CHECK(verdicts[3].stable);
  CHECK(verdicts[2].max_real > verdicts[3].max_real);

  CHECK_THROWS_AS(sweep_counts(m, "plant", {0}, kTol), InputError);
  CHECK_THROWS_AS(sweep_counts(m, "plant", {10001}, kTol), InputError);
  CHECK_THROWS_AS(sweep_counts(m, "nope", {5}, kTol), InputError);
}

TEST_CASE("find_ranges reproduces the sample plant's bimodal stable set") {
  const SystemModel m = default_plant();
  const StabilityRange r = find_ranges(m, "plant", 1000, kTol);

  CHECK(r.swept_label == "plant");
  CHECK(r.n_max == 1000);
  CHECK(r.first_unstable == 20);
  CHECK(r.last_unstable == 776);
  REQUIRE(r.stable_intervals.size() == 2);
  CHECK(r.stable_intervals[0] == std::pair<int, int>{1, 19});
  CHECK(r.stable_intervals[1] == std::pair<int, int>{777, 1000});

  REQUIRE(r.boundaries.size() == 2);
  for (const RangeBoundary& b : r.boundaries) {
    CHECK(std::abs(b.stable_side - b.unstable_side) == 1);
    CHECK(b.max_real_stable < -kTol);
    CHECK(b.max_real_unstable >= -kTol);
  }
  CHECK(r.boundaries[0].stable_side == 19);
  CHECK(r.boundaries[0].unstable_side == 20);
  CHECK(r.boundaries[1].stable_side == 777);
  CHECK(r.boundaries[1].unstable_side == 776);

  CHECK_THROWS_AS(find_ranges(m, "plant", 0, kTol), InputError);
  CHECK_THROWS_AS(find_ranges(m, "plant", 10001, kTol), InputError);
  CHECK_THROWS_AS(find_ranges(m, "plant", 1000, -1.0), InputError);
}

TEST_CASE("delay sweep orders boundaries monotonically in the delay") {
  const SystemModel m = default_plant();
  const std::vector<double> delays = {0.0, 67.5e-6, 75e-6, 82.5e-6};
  const auto rows = delay_sweep(m, "plant", delays, 1000, kTol);
  REQUIRE(rows.size() == 4);

  // No delay: stable for every count in range (degenerate encoding).
  CHECK(rows[0].first_unstable == 1001);
  CHECK(rows[0].last_unstable == 0);
  CHECK(rows[0].stable_intervals ==
        std::vector<std::pair<int, int>>{{1, 1000}});

  CHECK(rows[1].first_unstable == 46);
  CHECK(rows[1].last_unstable == 676);
  CHECK(rows[2].first_unstable == 20);
  CHECK(rows[2].last_unstable == 776);
  CHECK(rows[3].first_unstable == 9);
  CHECK(rows[3].last_unstable == 867);

  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].first_unstable < rows[i - 1].first_unstable);
    CHECK(rows[i].last_unstable > rows[i - 1].last_unstable);
  }
  // Every delayed row is a union of exactly two stable intervals.
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i].stable_intervals.size() == 2);

  CHECK_THROWS_AS(delay_sweep(m, "plant", {-1e-6}, 1000, kTol), InputError);
}

TEST_CASE("delay sweep is deterministic across repeated values") {
  const SystemModel m = default_plant();
  const auto rows = delay_sweep(m, "plant", {75e-6, 75e-6}, 1000, kTol);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].first_unstable == rows[1].first_unstable);
  CHECK(rows[0].last_unstable == rows[1].last_unstable);
  CHECK(rows[0].stable_intervals == rows[1].stable_intervals);
}

TEST_CASE("mixed-delay plants: slower added groups shrink the stable set") {
  const GridImpedance g = calibrated_grid();
  // Same swept group, same added count, but the added inverters' delay
  // differs: the faster fleet must leave at least as much room.
  const SystemModel with_fast =
      compose({group("orig", 8, 67.5e-6), group("swept", 1, 75e-6)}, g);
  const SystemModel with_slow =
      compose({group("orig", 8, 82.5e-6), group("swept", 1, 75e-6)}, g);

  const StabilityRange rf = find_ranges(with_fast, "swept", 1000, kTol);
  const StabilityRange rs = find_ranges(with_slow, "swept", 1000, kTol);

  CHECK(rf.first_unstable == 18);
  CHECK(rf.last_unstable == 767);
  CHECK(rs.first_unstable == 2);
  CHECK(rs.last_unstable == 769);
  CHECK(rf.fixed_counts.at("orig") == 8);

  CHECK(intervals_subset(rs.stable_intervals, rf.stable_intervals));
  CHECK_FALSE(intervals_subset(rf.stable_intervals, rs.stable_intervals));
}

TEST_CASE("locus trace follows the dominant branches across the boundary") {
  const SystemModel m = default_plant();
  const PoleLocus locus = locus_trace(m, "plant", 2, 30, 4);

  CHECK(locus.swept_label == "plant");
  CHECK(locus.count_min == 2);
  CHECK(locus.count_max == 30);
  CHECK(locus.top_k == 4);
  CHECK(locus.warnings.empty());
  REQUIRE(locus.rows.size() == 29u * 4u);

  // Rows are grouped by count and sorted by branch id inside each count.
  std::map<int, std::vector<LocusRow>> by_count;
  for (const LocusRow& r : locus.rows) by_count[r.count].push_back(r);
  REQUIRE(by_count.size() == 29);
  for (const auto& [count, rows] : by_count) {
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i < rows.size(); ++i)
      CHECK(rows[i - 1].branch_id < rows[i].branch_id);
  }

  // The first four branch ids are opened at the starting count.
  for (int b = 1; b <= 4; ++b)
    CHECK(std::any_of(by_count.at(2).begin(), by_count.at(2).end(),
                      [&](const LocusRow& r) { return r.branch_id == b; }));

  const auto max_re = [&](int count) {
    double worst = -1e300;
    for (const LocusRow& r : by_count.at(count))
      worst = std::max(worst, r.pole.real());
    return worst;
  };
  CHECK(max_re(19) < 0.0);  // matches the count-sweep boundary at 20
  CHECK(max_re(20) > 0.0);

  // Single-count trace is allowed; malformed ranges are not.
  CHECK(locus_trace(m, "plant", 5, 5, 3).rows.size() == 3);
  CHECK_THROWS_AS(locus_trace(m, "plant", 0, 5, 3), InputError);
  CHECK_THROWS_AS(locus_trace(m, "plant", 5, 4, 3), InputError);
  CHECK_THROWS_AS(locus_trace(m, "plant", 2, 5, 0), InputError);
  CHECK_THROWS_AS(locus_trace(m, "nope", 2, 5, 3), InputError);
}
