#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "xbar/design_space.hpp"

using namespace xbar;

namespace {

DesignPoint reference_point() {
  DesignPoint p;
  p.weights_total = 250e6;
  p.t_int = 1e-7;
  p.r_wire = 0.1;
  p.array_n = 2048;
  p.tile_num = 128;
  p.e_adc = 5e-12;
  return p;
}

} // namespace

TEST_CASE("speed bound") {
  DesignPoint p = reference_point();
  SUBCASE("250M weights at 100 ns integration give 5e15 Op/s exactly") {
    CHECK(ops_per_second_bound(p) == 5.0e15);
  }
  SUBCASE("no weights, no throughput") {
    p.weights_total = 0.0;
    CHECK(ops_per_second_bound(p) == 0.0);
  }
  SUBCASE("unit share factor makes both bounds coincide") {
    p.mac_total = p.weights_total;
    p.share_max = 1.0;
    CHECK(ops_per_second_bound(p) == 2.0 * p.weights_total / p.t_int);
  }
  SUBCASE("the MAC-side bound can be the tighter one") {
    p.mac_total = p.weights_total;
    p.share_max = 4.0;
    CHECK(ops_per_second_bound(p) == doctest::Approx(5.0e15 / 4.0));
  }
}

TEST_CASE("resistance bound") {
  DesignPoint p = reference_point();
  SUBCASE("2048 cells at 100 mOhm per cell need about 4.19 MOhm") {
    CHECK(min_device_resistance(p) == doctest::Approx(4.194304e6).epsilon(1e-12));
    CHECK(min_device_resistance(p) >= 4.0e6);
    CHECK(min_device_resistance(p) <= 5.5e6);
  }
  SUBCASE("unit scale") {
    p.array_n = 1;
    CHECK(min_device_resistance(p) == doctest::Approx(1.0));
  }
  SUBCASE("doubling N quadruples the bound") {
    const double r1 = min_device_resistance(p);
    p.array_n *= 2;
    CHECK(min_device_resistance(p) == doctest::Approx(4.0 * r1).epsilon(1e-12));
  }
  SUBCASE("the budget constant is exposed") {
    p.ir_budget = 0.05;
    CHECK(min_device_resistance(p) == doctest::Approx(2.0 * 4.194304e6).epsilon(1e-12));
  }
}

TEST_CASE("voltage bound shares the crossbar formula") {
  DesignPoint p = reference_point();
  p.r_dev = 5e6;
  CHECK(min_voltage(p) == doctest::Approx(0.20594547161809607).epsilon(1e-12));
  // derived R_dev: uses the Eq-style resistance bound instead
  p.r_dev = 0.0;
  const double v = min_voltage(p);
  CHECK(v == doctest::Approx(10.0 * std::sqrt(2048.0 * 4.194304e6 * 1.380649e-23 * 300.0 / 1e-7))
                 .epsilon(1e-12));
}

TEST_CASE("area bound") {
  DesignPoint p = reference_point();
  p.pitch = 200e-9;
  SUBCASE("reference point runs about 85.9 mm^2") {
    const AreaBound a = area_lower_bound(p);
    CHECK(a.efficiency_free == doctest::Approx(8.589934592e-5).epsilon(1e-12));
    CHECK(a.with_efficiency == a.efficiency_free); // efficiency 1
    p.array_efficiency = 0.5;
    CHECK(area_lower_bound(p).with_efficiency ==
          doctest::Approx(2.0 * 8.589934592e-5).epsilon(1e-12));
  }
  SUBCASE("no tiles, no area") {
    p.tile_num = 0.0;
    CHECK(area_lower_bound(p).with_efficiency == 0.0);
  }
  SUBCASE("halving the pitch quarters the area") {
    const double a1 = area_lower_bound(p).with_efficiency;
    p.pitch /= 2.0;
    CHECK(area_lower_bound(p).with_efficiency == doctest::Approx(a1 / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("energy efficiency bound") {
  DesignPoint p = reference_point();
  p.r_dev = 5e6;
  SUBCASE("reference point clears 1e14 Op/J") {
    const double bound = energy_efficiency_bound(p);
    CHECK(bound > 1e14);
    CHECK(bound < 1e15); // hundreds of TOp/J, not POp/J
  }
  SUBCASE("monotone decreasing in the ADC energy") {
    double prev = energy_efficiency_bound(p);
    for (double e : {1e-11, 5e-11, 2e-10, 1e-9}) {
      p.e_adc = e;
      const double b = energy_efficiency_bound(p);
      CHECK(b < prev);
      prev = b;
    }
  }
  SUBCASE("monotone decreasing in the read voltage") {
    p.v_read = 0.1;
    double prev = energy_efficiency_bound(p);
    for (double v : {0.2, 0.4, 0.8}) {
      p.v_read = v;
      const double b = energy_efficiency_bound(p);
      CHECK(b < prev);
      prev = b;
    }
  }
  SUBCASE("huge ADC energy drives the bound toward zero") {
    p.e_adc = 1.0;
    CHECK(energy_efficiency_bound(p) < 1e7);
  }
  SUBCASE("with no ADC term, doubling t_int at fixed V halves the bound") {
    p.e_adc = 0.0;
    p.v_read = 0.2;
    const double b1 = energy_efficiency_bound(p);
    p.t_int *= 2.0;
    CHECK(energy_efficiency_bound(p) == doctest::Approx(b1 / 2.0).epsilon(1e-12));
  }
  SUBCASE("r_aver defaults to twice the device resistance") {
    DesignPoint q = reference_point();
    q.r_dev = 5e6;
    q.v_read = 0.2;
    DesignPoint explicit_raver = q;
    explicit_raver.r_aver = 1e7;
    CHECK(energy_efficiency_bound(q) ==
          doctest::Approx(energy_efficiency_bound(explicit_raver)).epsilon(1e-12));
  }
}

TEST_CASE("cross-consistency at the reference operating point") {
  DesignPoint p = reference_point();
  CHECK(min_device_resistance(p) >= 4.0e6);
  CHECK(min_device_resistance(p) <= 5.5e6);
  CHECK(ops_per_second_bound(p) == 5.0e15);
  const double v = min_voltage(p);
  CHECK(v >= 0.15);
  CHECK(v <= 0.30);
}

TEST_CASE("dimensional sanity across random positive inputs") {
  DesignPoint p = reference_point();
  for (double scale : {0.5, 1.0, 3.0}) {
    p.weights_total = 250e6 * scale;
    CHECK(ops_per_second_bound(p) == doctest::Approx(5.0e15 * scale));
  }
  p = reference_point();
  const double a1 = area_lower_bound(p).with_efficiency;
  p.tile_num *= 3.0;
  CHECK(area_lower_bound(p).with_efficiency == doctest::Approx(3.0 * a1));
}

TEST_CASE("sweep grids") {
  SUBCASE("single point grid emits a single row") {
    SweepGrid grid;
    grid.axes["array_n"] = {1024.0};
    const auto rows = sweep(grid, reference_point());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].point.array_n == 1024.0);
    CHECK(rows[0].ops_bound == 5.0e15);
  }
  SUBCASE("empty grid is an error") {
    SweepGrid grid;
    CHECK_THROWS_AS(sweep(grid, reference_point()), ConfigError);
  }
  SUBCASE("cartesian product covers every combination") {
    SweepGrid grid;
    grid.axes["array_n"] = {512.0, 1024.0, 2048.0};
    grid.axes["tile_num"] = {64.0, 128.0};
    const auto rows = sweep(grid, reference_point());
    REQUIRE(rows.size() == 6);
    // monotone trends along the sweep
    for (const auto& row : rows) {
      CHECK(row.min_r_dev == doctest::Approx(row.point.array_n * row.point.array_n * 0.1 / 0.1));
      CHECK(row.min_v > 0.0);
      CHECK(row.op_per_joule > 0.0);
    }
  }
  SUBCASE("the shipped grid file loads and reproduces the narrative checkpoints") {
    const auto path = std::filesystem::path(XBAR_SOURCE_DIR) / "data/grids/fig6.grid";
    const SweepGrid grid = SweepGrid::load(path);
    const auto rows = sweep(grid);
    REQUIRE(rows.size() == 6);
    bool found_reference = false;
    for (const auto& row : rows) {
      if (row.point.array_n == 2048.0 && row.point.tile_num == 128.0) {
        found_reference = true;
        CHECK(row.ops_bound == 5.0e15);
        CHECK(row.min_r_dev >= 4.0e6);
        CHECK(row.min_r_dev <= 5.5e6);
        CHECK(row.min_v >= 0.15);
        CHECK(row.min_v <= 0.30);
      }
    }
    CHECK(found_reference);
    // resistance and voltage bounds rise with the array size
    double prev_r = 0.0, prev_v = 0.0;
    for (double n : {512.0, 1024.0, 2048.0}) {
      for (const auto& row : rows) {
        if (row.point.array_n == n && row.point.tile_num == 64.0) {
          CHECK(row.min_r_dev > prev_r);
          CHECK(row.min_v > prev_v);
          prev_r = row.min_r_dev;
          prev_v = row.min_v;
        }
      }
    }
  }
  SUBCASE("csv output has one line per row plus a header") {
    SweepGrid grid;
    grid.axes["array_n"] = {512.0, 1024.0};
    const auto rows = sweep(grid, reference_point());
    std::ostringstream out;
    write_sweep_csv(rows, out);
    const std::string text = out.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(text.find("ops_bound_per_s") != std::string::npos);
  }
  SUBCASE("unknown grid keys are parse errors with a line number") {
    const auto tmp = std::filesystem::temp_directory_path() / "xbar_bad.grid";
    {
      std::ofstream out(tmp);
      out << "array_n = 512\n";
      out << "banana = 7\n";
    }
    try {
      SweepGrid::load(tmp);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
    std::filesystem::remove(tmp);
  }
}

TEST_CASE("invalid design points are rejected") {
  DesignPoint p = reference_point();
  p.t_int = 0.0;
  CHECK_THROWS_AS(ops_per_second_bound(p), ConfigError);
  p = reference_point();
  p.array_efficiency = 1.5;
  CHECK_THROWS_AS(area_lower_bound(p), ConfigError);
  p = reference_point();
  p.snr_target = 0.0;
  CHECK_THROWS_AS(min_voltage(p), ConfigError);
}
