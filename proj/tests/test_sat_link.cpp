#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "heqkd/sat_link.hpp"

using namespace heqkd;

TEST_CASE("diffraction loss anchors, low-orbit link") {
  const LinkParams leo = LinkParams::leo_preset();
  REQUIRE(leo.fixed_db() == Catch::Approx(10.0));
  REQUIRE(friis_loss_db(leo, 400e3) == Catch::Approx(28.0).margin(0.5));
  REQUIRE(friis_loss_db(leo, 1000e3) == Catch::Approx(36.0).margin(0.5));
}

TEST_CASE("diffraction loss anchors, geostationary link") {
  const double geo_range = 35786e3;
  REQUIRE(LinkParams::geo_preset().fixed_db() == Catch::Approx(6.0));
  REQUIRE(friis_loss_db(LinkParams::geo_preset(3.0), geo_range) ==
          Catch::Approx(47.0).margin(1.0));
  REQUIRE(friis_loss_db(LinkParams::geo_preset(1.0), geo_range) ==
          Catch::Approx(57.0).margin(1.0));
}

TEST_CASE("diffraction term clamps at 0 dB for short ranges") {
  LinkParams l;
  l.fixed_loss_rx_db = 0.0;
  l.fixed_loss_analysis_db = 0.0;
  REQUIRE(friis_loss_db(l, 1.0) == 0.0);
  REQUIRE_THROWS_AS(friis_loss_db(l, 0.0), std::invalid_argument);
  l.d_t = 0.0;
  REQUIRE_THROWS_AS(friis_loss_db(l, 100.0), std::invalid_argument);
}

TEST_CASE("loss is monotone in range") {
  const LinkParams leo = LinkParams::leo_preset();
  double prev = 0.0;
  for (double r : {3e5, 5e5, 1e6, 2e6, 4e7}) {
    const double l = friis_loss_db(leo, r);
    REQUIRE(l > prev);
    prev = l;
  }
}

TEST_CASE("slant range geometry") {
  OrbitParams orbit;
  orbit.altitude = 400e3;
  // zenith: range equals altitude exactly
  REQUIRE(slant_range(orbit, 90.0) == Catch::Approx(400e3).margin(1.0));
  // horizon: sqrt(2 R h + h^2)
  const double horizon = std::sqrt(2.0 * kEarthRadius * 400e3 + 400e3 * 400e3);
  REQUIRE(slant_range(orbit, 0.0) == Catch::Approx(horizon).margin(1.0));
  // 20 degrees: approx 984 km for a 400 km orbit
  REQUIRE(slant_range(orbit, 20.0) == Catch::Approx(984e3).margin(5e3));
  // monotone decreasing in elevation
  double prev = 1e18;
  for (double el = 0.0; el <= 90.0; el += 5.0) {
    const double r = slant_range(orbit, el);
    REQUIRE(r < prev);
    prev = r;
  }
  REQUIRE_THROWS_AS(slant_range(orbit, -1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(slant_range(orbit, 91.0), std::invalid_argument);
}

TEST_CASE("relativistic time-bin shift") {
  REQUIRE(doppler_shift(0.0, 1.5e-9) == 0.0);
  // sign follows the velocity sign
  REQUIRE(doppler_shift(7000.0, 1.5e-9) > 0.0);
  REQUIRE(doppler_shift(-7000.0, 1.5e-9) < 0.0);
  // first order: beta * tau * c
  const double v = 5000.0;
  const double first_order = v / kSpeedOfLight * 1.5e-9 * kSpeedOfLight;
  REQUIRE(doppler_shift(v, 1.5e-9) == Catch::Approx(first_order).epsilon(1e-4));
  REQUIRE_THROWS_AS(doppler_shift(kSpeedOfLight, 1.5e-9), std::invalid_argument);
}

TEST_CASE("pass profile of a zenith pass") {
  OrbitParams orbit;  // 400 km, 20..90 deg
  const LinkParams leo = LinkParams::leo_preset();
  const PassProfile prof = pass_profile(orbit, leo);
  REQUIRE(prof.samples.size() > 10);

  // duration: published order ~180 s between 20-degree crossings; the
  // circular-orbit model gives ~240 s. accept 150..300.
  const double duration = prof.samples.back().t - prof.samples.front().t;
  REQUIRE(duration > 150.0);
  REQUIRE(duration < 300.0);

  // end points at the acquisition elevation, midpoint at culmination
  REQUIRE(prof.samples.front().elevation == Catch::Approx(20.0).margin(0.2));
  REQUIRE(prof.samples.back().elevation == Catch::Approx(20.0).margin(0.2));
  const PassSample& mid = prof.samples[prof.samples.size() / 2];
  REQUIRE(mid.elevation == Catch::Approx(90.0).margin(0.5));
  REQUIRE(mid.range == Catch::Approx(orbit.altitude).epsilon(1e-3));

  // approach-then-recede: v_los < 0 before culmination, > 0 after
  REQUIRE(prof.samples.front().v_los < -1000.0);
  REQUIRE(prof.samples.back().v_los > 1000.0);
  REQUIRE(std::abs(mid.v_los) < 100.0);

  // Doppler swing across the pass, published value ~20 um
  const double swing = (prof.samples.back().doppler - prof.samples.front().doppler) * 1e6;
  REQUIRE(swing == Catch::Approx(20.0).margin(2.0));

  // loss tracks range through the same Friis model
  for (const auto& s : prof.samples)
    REQUIRE(s.loss_db == Catch::Approx(friis_loss_db(leo, s.range)).margin(1e-9));
}

TEST_CASE("lower culmination gives a shorter, lossier pass") {
  OrbitParams lowpass;
  lowpass.max_elevation = 30.0;
  const LinkParams leo = LinkParams::leo_preset();
  const PassProfile low = pass_profile(lowpass, leo);
  const PassProfile high = pass_profile(OrbitParams{}, leo);
  const double dur_low = low.samples.back().t - low.samples.front().t;
  const double dur_high = high.samples.back().t - high.samples.front().t;
  REQUIRE(dur_low < dur_high);
  double min_loss_low = 1e9, min_loss_high = 1e9;
  for (const auto& s : low.samples) min_loss_low = std::min(min_loss_low, s.loss_db);
  for (const auto& s : high.samples) min_loss_high = std::min(min_loss_high, s.loss_db);
  REQUIRE(min_loss_low > min_loss_high);
}

TEST_CASE("orbit validation") {
  OrbitParams o;
  o.max_elevation = 10.0;  // below min_elevation
  REQUIRE_THROWS_AS(o.validate(), std::invalid_argument);
  o.max_elevation = 95.0;
  REQUIRE_THROWS_AS(o.validate(), std::invalid_argument);
  o = OrbitParams{};
  o.time_step = 0.0;
  REQUIRE_THROWS_AS(o.validate(), std::invalid_argument);
  o = OrbitParams{};
  o.altitude = -1.0;
  REQUIRE_THROWS_AS(o.validate(), std::invalid_argument);
}

TEST_CASE("pass csv export") {
  OrbitParams orbit;
  orbit.time_step = 30.0;
  std::ostringstream os;
  write_pass_profile_csv(os, pass_profile(orbit, LinkParams::leo_preset()));
  REQUIRE(os.str().rfind("t_s,elevation_deg,range_m,v_los_mps,doppler_um,loss_db", 0) == 0);
}
