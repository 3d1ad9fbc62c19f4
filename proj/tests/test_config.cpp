#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "heqkd/config.hpp"

using namespace heqkd;

TEST_CASE("defaults parse from an empty document") {
  std::istringstream in("");
  const RunConfig cfg = parse_config(in);
  REQUIRE(cfg.mode == QberMode::Paper);
  REQUIRE(cfg.seed == 1);
  REQUIRE(cfg.rep_rate == 400e6);
  REQUIRE(cfg.eta_a == 0.3);
  REQUIRE(cfg.sec.eps_sec == 1e-9);
  REQUIRE(cfg.sec.eps_cor == 1e-15);
}

TEST_CASE("full document round-trips values") {
  std::istringstream in(R"(
# comment line
[run]
mode = fock
seed = 99

[system]
rep_rate_hz = 80e6   # trailing comment
duration_s = 10
background_xi = 2e-6
alice_transmission = 0.25
eps_sec = 1e-10

[sweep]
loss_db_min = 5
loss_db_max = 15
loss_db_step = 5

[link]
receiver_diameter_m = 3.0
analysis_loss_in_channel = false

[orbit]
max_elevation_deg = 60

[mc]
n_pulses = 12345
eavesdropper = hv_intercept

[crosstalk]
dimension = 2
)");
  const RunConfig cfg = parse_config(in);
  REQUIRE(cfg.mode == QberMode::Fock);
  REQUIRE(cfg.seed == 99);
  REQUIRE(cfg.rep_rate == 80e6);
  REQUIRE(cfg.duration == 10.0);
  REQUIRE(cfg.xi == 2e-6);
  REQUIRE(cfg.eta_a == 0.25);
  REQUIRE(cfg.sec.eps_sec == 1e-10);
  REQUIRE(cfg.link.d_r == 3.0);
  REQUIRE_FALSE(cfg.link.analysis_loss_in_channel);
  REQUIRE(cfg.orbit.max_elevation == 60.0);
  REQUIRE(cfg.mc_n_pulses == 12345);
  REQUIRE(cfg.mc_eve == Eavesdropper::HvIntercept);
  REQUIRE(cfg.xt_dimension == 2);

  const SystemConfig sc = cfg.system_config(Protocol::HEQKD);
  REQUIRE(sc.mode == QberMode::Fock);
  REQUIRE(sc.rep_rate == 80e6);
  REQUIRE(sc.loss_grid_db == std::vector<double>{5.0, 10.0, 15.0});
  REQUIRE(sc.err.d == 4);
  const SystemConfig sb = cfg.system_config(Protocol::BBM92);
  REQUIRE(sb.err.d == 2);
}

TEST_CASE("errors carry line numbers") {
  auto expect_error = [](const std::string& doc, const std::string& needle) {
    std::istringstream in(doc);
    try {
      parse_config(in);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      INFO(e.what());
      REQUIRE(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error("[nosuch]\n", "line 1");
  expect_error("[nosuch]\n", "unknown section");
  expect_error("[system]\nbogus_key = 1\n", "line 2");
  expect_error("[system]\nbogus_key = 1\n", "unknown key");
  expect_error("[system]\nrep_rate_hz = fast\n", "not a number");
  expect_error("[system]\nrep_rate_hz = 1e6x\n", "not a number");
  expect_error("[link]\nanalysis_loss_in_channel = yes\n", "true|false");
  expect_error("[mc]\neavesdropper = mallory\n", "none|hv_intercept");
  expect_error("[run]\nmode = classical\n", "paper|fock");
  expect_error("key_without_section = 1\n", "outside any section");
  expect_error("[system\n", "malformed section");
  expect_error("[system]\njust some text\n", "key = value");
  expect_error("[system]\nrep_rate_hz =\n", "empty");
}

TEST_CASE("physical ranges validated after parsing") {
  auto expect_invalid = [](const std::string& doc) {
    std::istringstream in(doc);
    REQUIRE_THROWS_AS(parse_config(in), ConfigError);
  };
  expect_invalid("[sweep]\nloss_db_step = 0\n");
  expect_invalid("[sweep]\nloss_db_min = 20\nloss_db_max = 10\n");
  expect_invalid("[mc]\ndimension = 3\n");
  expect_invalid("[mc]\nn_pulses = 0\n");
  expect_invalid("[crosstalk]\ndimension = 5\n");
  expect_invalid("[orbit]\nmax_elevation_deg = 120\n");
  expect_invalid("[stab]\nupdate_rate_hz = 0\n");
  expect_invalid("[system]\neps_sec = 2\n");
}

TEST_CASE("missing file raises ConfigError") {
  REQUIRE_THROWS_AS(parse_config_file("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("measured e_d defaults survive unless overridden") {
  {
    std::istringstream in("");
    const SystemConfig sc = parse_config(in).system_config(Protocol::HEQKD);
    REQUIRE(sc.err.e_d == Catch::Approx(default_heqkd_error_params().e_d));
  }
  {
    std::istringstream in("[system]\nheqkd_e_d = 0.02\nbbm92_e_d = 0.005\n");
    const RunConfig cfg = parse_config(in);
    REQUIRE(cfg.system_config(Protocol::HEQKD).err.e_d == 0.02);
    REQUIRE(cfg.system_config(Protocol::BBM92).err.e_d == 0.005);
  }
}
