#include <doctest.h>

#include <set>

#include "plantar/regress.hpp"
#include "plantar/synth.hpp"
#include "test_support.hpp"

using namespace plantar;
using namespace plantar::synth;
using testing::code_of;

namespace {

SquatConfig short_squat() {
  SquatConfig s;
  s.duration_s = 4.0;
  return s;
}

}  // namespace

TEST_CASE("noiseless trajectory is the configured sinusoid") {
  SquatConfig s = short_squat();
  s.noise_sd_deg.fill(0.0);
  const auto traj = squat_trajectory(s);
  REQUIRE(traj.size() == 200);
  CHECK(traj[0].t_ms == 0);
  CHECK(traj[199].t_ms == 3980);
  // Quarter period (0.5 s) for the knee, phase 0: neutral + amplitude.
  CHECK(traj[25].deg[1] == doctest::Approx(45.0 + 40.0).epsilon(1e-12));
  CHECK(traj[0].deg[0] == doctest::Approx(10.0 + 12.0 * std::sin(-0.35)).epsilon(1e-12));
}

TEST_CASE("trajectory noise is seeded") {
  SquatConfig s = short_squat();
  s.seed = 5;
  const auto a = squat_trajectory(s);
  const auto b = squat_trajectory(s);
  s.seed = 6;
  const auto c = squat_trajectory(s);
  CHECK(a[10].deg == b[10].deg);
  CHECK(a[10].deg != c[10].deg);
}

TEST_CASE("foot model geometry") {
  const FootModel f = make_foot_model(3);
  CHECK_NOTHROW(validate(f));
  std::size_t left = 0, right = 0;
  for (std::size_t i = 0; i < kPixelCount; ++i) {
    if (f.side[i] == 0) ++left;
    if (f.side[i] == 1) ++right;
    if (f.mask[i]) {
      CHECK(f.stiffness[i] > 0.0);
      CHECK(f.recruitment[i] >= 0.0);
      CHECK(f.recruitment[i] < 0.9);
    }
  }
  CHECK(left == right);
  CHECK(left > 150);
  // Same seed, same maps; different seed, different stiffness.
  CHECK(make_foot_model(3).stiffness == f.stiffness);
  CHECK(make_foot_model(4).stiffness != f.stiffness);
  CHECK(make_foot_model(4).mask == f.mask);

  FootModel bad = f;
  bad.stiffness[0] = 1.0;  // off the footprint
  CHECK(code_of([&] { validate(bad); }) == Errc::InvalidArgument);
  bad = f;
  bad.mask.pop_back();
  CHECK(code_of([&] { validate(bad); }) == Errc::DimensionMismatch);
}

TEST_CASE("pressure frames carry the body weight on the footprint") {
  const FootModel f = make_foot_model(1);
  const SquatConfig s = short_squat();
  std::mt19937_64 rng(1);
  for (const auto& pose : squat_trajectory(s)) {
    const auto frame = pressure_from_pose(pose, f, s, PressureModel{}, rng);
    REQUIRE(frame.total() == doctest::Approx(f.body_weight).epsilon(1e-12));
    for (std::size_t i = 0; i < kPixelCount; ++i) {
      REQUIRE(frame.values[i] >= 0.0);
      if (!f.mask[i]) REQUIRE(frame.values[i] == 0.0);
    }
  }
}

TEST_CASE("deeper squats shift load toward the toes") {
  const FootModel f = make_foot_model(2);
  SquatConfig s;
  PressureModel m;
  m.tissue_noise = 0.0;
  std::mt19937_64 rng(0);
  auto anterior_share = [&](double u) {
    AngleSample pose;
    for (std::size_t c = 0; c < kChannelCount; ++c) pose.deg[c] = s.neutral_deg[c] + u * s.amplitude_deg[c];
    const auto frame = pressure_from_pose(pose, f, s, m, rng);
    double front = 0.0;
    for (std::size_t i = 0; i < kPixelCount; ++i) {
      if (grid_cell(i).row < 24) front += frame.values[i];
    }
    return front / frame.total();
  };
  CHECK(anterior_share(1.0) > anterior_share(0.0));
  CHECK(anterior_share(0.0) > anterior_share(-1.0));
}

TEST_CASE("rubber blur conserves force and spreads load") {
  const FootModel f = make_foot_model(7);
  const SquatConfig s = short_squat();
  std::mt19937_64 rng(7);
  const auto frame = pressure_from_pose(squat_trajectory(s)[30], f, s, {}, rng);
  const auto out = apply_condition(std::span(&frame, 1), make_condition_transform(Condition::B_rubber, f));
  CHECK(out[0].total() == doctest::Approx(frame.total()).epsilon(1e-12));
  std::size_t loaded_before = 0, loaded_after = 0;
  for (std::size_t i = 0; i < kPixelCount; ++i) {
    loaded_before += frame.values[i] > 0.0;
    loaded_after += out[0].values[i] > 0.0;
  }
  CHECK(loaded_after > loaded_before);
  const auto same = apply_condition(std::span(&frame, 1), make_condition_transform(Condition::A_nothing, f));
  CHECK(same[0].values == frame.values);
}

TEST_CASE("plastic plates replace each foot with a clipped affine field") {
  const FootModel f = make_foot_model(8);
  const auto transform = make_condition_transform(Condition::C_plastic, f);
  REQUIRE(transform.plates.size() == 2);
  const SquatConfig s = short_squat();
  std::mt19937_64 rng(8);
  const auto frame = pressure_from_pose(squat_trajectory(s)[60], f, s, {}, rng);
  const auto out = apply_condition(std::span(&frame, 1), transform)[0];
  CHECK(out.total() == doctest::Approx(frame.total()).epsilon(1e-12));

  for (const auto& p : transform.plates) {
    // Positive cells lie on one plane: second differences vanish along rows and columns.
    for (int r = p.row0; r <= p.row1; ++r) {
      for (int c = p.col0 + 1; c < p.col1; ++c) {
        const double a = out.at(r, c - 1), b = out.at(r, c), d = out.at(r, c + 1);
        if (a > 0.0 && b > 0.0 && d > 0.0) REQUIRE(std::abs(a - 2.0 * b + d) < 1e-9);
      }
    }
    // The raw fit reproduces an exactly affine input.
    PressureFrame plane;
    for (int r = p.row0; r <= p.row1; ++r) {
      for (int c = p.col0; c <= p.col1; ++c) plane.values[flat_index(r, c)] = 2.0 + 0.5 * r - 0.25 * c;
    }
    const auto fit = plate_affine_field(plane, p);
    std::size_t k = 0;
    for (int r = p.row0; r <= p.row1; ++r) {
      for (int c = p.col0; c <= p.col1; ++c, ++k) {
        REQUIRE(fit[k] == doctest::Approx(plane.values[flat_index(r, c)]).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("generated trials are valid and reproducible") {
  const FootModel f = make_foot_model(9);
  const SquatConfig s = short_squat();
  const auto a = generate_trial(11, Condition::C_plastic, s, f);
  const auto b = generate_trial(11, Condition::C_plastic, s, f);
  const auto c = generate_trial(12, Condition::C_plastic, s, f);
  CHECK_NOTHROW(validate_trial(a));
  CHECK(a.size() == 200);
  CHECK(a.condition == Condition::C_plastic);
  CHECK(a.frames[50].values == b.frames[50].values);
  CHECK(a.angles[50].deg == b.angles[50].deg);
  CHECK(a.frames[50].values != c.frames[50].values);
  for (const auto& fr : a.frames) REQUIRE(fr.total() == doctest::Approx(f.body_weight).epsilon(1e-9));
}

TEST_CASE("batch plan of the default experiment") {
  const BatchSpec spec;
  const auto plan = plan_batch(spec);
  CHECK(plan.size() == 77);
  std::set<std::string> ids;
  std::set<std::uint64_t> seeds;
  std::array<int, 3> per_condition{0, 0, 0};
  for (const auto& t : plan) {
    ids.insert(t.trial_id);
    seeds.insert(t.trial_seed);
    ++per_condition[static_cast<std::size_t>(t.condition)];
  }
  CHECK(ids.size() == 77);
  CHECK(seeds.size() == 77);
  CHECK(per_condition == std::array<int, 3>{35, 21, 21});
  CHECK(plan.front().trial_id == "P01_A1");
  CHECK(plan.back().trial_id == "P07_C3");
  // Trials of one participant share the foot.
  CHECK(plan[0].foot_seed == plan[10].foot_seed);
  CHECK(plan[0].foot_seed != plan[11].foot_seed);

  BatchSpec bad;
  bad.participants = 0;
  CHECK(code_of([&] { plan_batch(bad); }) == Errc::InvalidArgument);
}

TEST_CASE("derive_seed separates tags") {
  CHECK(derive_seed(1, {1}) != derive_seed(1, {2}));
  CHECK(derive_seed(1, {1, 2}) != derive_seed(1, {2, 1}));
  CHECK(derive_seed(1, {1}) != derive_seed(2, {1}));
  CHECK(derive_seed(1, {3, 4}) == derive_seed(1, {3, 4}));
}

TEST_CASE("default condition-A trials validate at R^2 >= 0.9") {
  const SquatConfig s;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto t = generate_trial(seed, Condition::A_nothing, s, make_foot_model(seed));
    for (const auto& ch : train_eval_trial(t, {}).channels) {
      CAPTURE(seed);
      REQUIRE(ch.ok());
      CHECK(ch.report->r2 >= 0.9);
    }
  }
}

TEST_CASE("a rigid plate lowers accuracy on paired seeds") {
  const SquatConfig s;
  std::array<double, kChannelCount> a{}, c{};
  for (std::uint64_t seed : {4, 5, 6}) {
    const FootModel f = make_foot_model(seed);
    const auto fa = train_eval_trial(generate_trial(seed, Condition::A_nothing, s, f), {});
    const auto fc = train_eval_trial(generate_trial(seed, Condition::C_plastic, s, f), {});
    for (std::size_t k = 0; k < kChannelCount; ++k) {
      a[k] += fa.channels[k].report->r2;
      c[k] += fc.channels[k].report->r2;
    }
  }
  for (std::size_t k = 0; k < kChannelCount; ++k) CHECK(c[k] < a[k]);
}

TEST_CASE("neutral pose loads the footprint around its centroid") {
  const FootModel f = make_foot_model(12);
  SquatConfig s;
  PressureModel m;
  m.tissue_noise = 0.0;
  std::mt19937_64 rng(0);
  AngleSample pose;
  pose.deg = s.neutral_deg;
  const auto frame = pressure_from_pose(pose, f, s, m, rng);
  double r = 0.0, c = 0.0, mr = 0.0, mc = 0.0, n = 0.0;
  for (std::size_t i = 0; i < kPixelCount; ++i) {
    const auto cell = grid_cell(i);
    r += frame.values[i] * cell.row;
    c += frame.values[i] * cell.col;
    if (f.mask[i]) {
      mr += cell.row;
      mc += cell.col;
      n += 1.0;
    }
  }
  CHECK(std::abs(r / frame.total() - mr / n) < 1.0);
  CHECK(std::abs(c / frame.total() - mc / n) < 1.0);
}

TEST_CASE("zero amplitude and noise hold every channel at neutral") {
  SquatConfig s = short_squat();
  s.amplitude_deg.fill(0.0);
  s.noise_sd_deg.fill(0.0);
  for (const auto& a : squat_trajectory(s)) CHECK(a.deg == s.neutral_deg);
}
