#include "xbar/bitslice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xbar/rng.hpp"

namespace xbar {

void SlicePlan::validate() const {
  if (rows < 1 || cols < 1) throw ConfigError("slice plan needs rows, cols >= 1");
  if (weight_bits < 1 || input_bits < 1) throw ConfigError("slice plan needs W, I >= 1");
  if (bits_per_cell < 1 || bits_per_cell > 4)
    throw ConfigError("bits_per_cell must be in [1, 4]");
  if (num_slices * bits_per_cell < weight_bits)
    throw ConfigError("num_slices * bits_per_cell must cover weight_bits");
  if (tile_rows < 1 || tile_cols < 1) throw ConfigError("tile dimensions must be >= 1");
  if (grid_rows != (rows + tile_rows - 1) / tile_rows ||
      grid_cols != (cols + tile_cols - 1) / tile_cols)
    throw ConfigError("tile grid does not cover the logical matrix");
}

SlicePlan plan_slices(int rows, int cols, int weight_bits, int input_bits, int bits_per_cell,
                      int tile_rows, int tile_cols) {
  SlicePlan p;
  p.rows = rows;
  p.cols = cols;
  p.weight_bits = weight_bits;
  p.input_bits = input_bits;
  p.bits_per_cell = bits_per_cell;
  if (bits_per_cell >= 1) p.num_slices = (weight_bits + bits_per_cell - 1) / bits_per_cell;
  p.tile_rows = tile_rows;
  p.tile_cols = tile_cols;
  if (tile_rows >= 1 && tile_cols >= 1) {
    p.grid_rows = (rows + tile_rows - 1) / tile_rows;
    p.grid_cols = (cols + tile_cols - 1) / tile_cols;
  }
  p.validate();
  return p;
}

std::string SlicePlan::to_text() const {
  std::ostringstream out;
  out << "xbar-slice-plan 1\n";
  out << "rows " << rows << "\n";
  out << "cols " << cols << "\n";
  out << "weight_bits " << weight_bits << "\n";
  out << "input_bits " << input_bits << "\n";
  out << "bits_per_cell " << bits_per_cell << "\n";
  out << "num_slices " << num_slices << "\n";
  out << "tile_rows " << tile_rows << "\n";
  out << "tile_cols " << tile_cols << "\n";
  out << "grid_rows " << grid_rows << "\n";
  out << "grid_cols " << grid_cols << "\n";
  out << "differential " << (differential ? 1 : 0) << "\n";
  return out.str();
}

SlicePlan SlicePlan::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "xbar-slice-plan 1")
    throw ParseError("not a slice-plan document");
  SlicePlan p;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    long long value = 0;
    ls >> key >> value;
    if (!ls) throw ParseError("slice plan: bad line '" + line + "'");
    if (key == "rows") p.rows = static_cast<int>(value);
    else if (key == "cols") p.cols = static_cast<int>(value);
    else if (key == "weight_bits") p.weight_bits = static_cast<int>(value);
    else if (key == "input_bits") p.input_bits = static_cast<int>(value);
    else if (key == "bits_per_cell") p.bits_per_cell = static_cast<int>(value);
    else if (key == "num_slices") p.num_slices = static_cast<int>(value);
    else if (key == "tile_rows") p.tile_rows = static_cast<int>(value);
    else if (key == "tile_cols") p.tile_cols = static_cast<int>(value);
    else if (key == "grid_rows") p.grid_rows = static_cast<int>(value);
    else if (key == "grid_cols") p.grid_cols = static_cast<int>(value);
    else if (key == "differential") p.differential = value != 0;
    else throw ParseError("slice plan: unknown key '" + key + "'");
  }
  p.validate();
  return p;
}

void QuantizedMatrix::validate(int weight_bits) const {
  if (rows < 1 || cols < 1 ||
      values.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw DimensionError("quantized matrix shape mismatch");
  if (!(scale > 0.0)) throw ConfigError("quantized matrix scale must be > 0");
  const std::int64_t lo = -(std::int64_t{1} << (weight_bits - 1));
  const std::int64_t hi = (std::int64_t{1} << (weight_bits - 1)) - 1;
  for (std::int64_t v : values)
    if (v < lo || v > hi)
      throw ConfigError("quantized entry " + std::to_string(v) + " outside " +
                        std::to_string(weight_bits) + "-bit signed range");
}

TilePair& TileSet::tile(int slice, int gr, int gc) {
  return tiles[(static_cast<std::size_t>(slice) * plan.grid_rows + gr) * plan.grid_cols + gc];
}

const TilePair& TileSet::tile(int slice, int gr, int gc) const {
  return tiles[(static_cast<std::size_t>(slice) * plan.grid_rows + gr) * plan.grid_cols + gc];
}

double TileSet::level_unit() const {
  const auto& dev = tiles.front().plus.device();
  return dev.window() / plan.levels_per_cell();
}

int exact_adc_bits(int rows, int bits_per_cell) {
  const std::int64_t max_sum =
      static_cast<std::int64_t>(rows) * ((std::int64_t{1} << bits_per_cell) - 1);
  int bits = 1;
  while (((std::int64_t{1} << bits) - 1) < max_sum) ++bits;
  return bits;
}

TileSet make_tile_set(const SlicePlan& plan, const DeviceParams& device,
                      const CrossbarConfig& base_config, std::uint64_t seed, int adc_bits) {
  plan.validate();
  device.validate();
  if (device.bits_per_cell != 0 && plan.bits_per_cell > device.bits_per_cell)
    throw ConfigError("plan wants " + std::to_string(plan.bits_per_cell) +
                      " bits/cell but device '" + device.name + "' stores " +
                      std::to_string(device.bits_per_cell));

  CrossbarConfig cfg = base_config;
  cfg.rows = plan.tile_rows;
  cfg.cols = plan.tile_cols;
  cfg.adc_bits = adc_bits > 0 ? adc_bits : exact_adc_bits(plan.tile_rows, plan.bits_per_cell);
  // One ADC code per weight-level unit of charge.
  const double unit = device.window() / plan.levels_per_cell();
  const double lsb = unit * cfg.v_read * cfg.t_int;
  cfg.adc_full_scale_charge = lsb * static_cast<double>((std::int64_t{1} << cfg.adc_bits) - 1);
  if (cfg.adc_share > cfg.cols || cfg.cols % cfg.adc_share != 0) cfg.adc_share = 1;
  cfg.validate();

  TileSet set;
  set.plan = plan;
  const std::size_t count = static_cast<std::size_t>(plan.num_slices) * plan.grid_rows *
                            static_cast<std::size_t>(plan.grid_cols);
  set.tiles.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    set.tiles.push_back(TilePair{
        CrossbarState::make(cfg, device, substream(seed, "tile-plus", t)),
        CrossbarState::make(cfg, device, substream(seed, "tile-minus", t)),
    });
  }
  return set;
}

namespace {

struct CellTarget {
  int slice;
  int gr, gc;   // tile coordinates
  int lr, lc;   // local cell inside the tile
  bool positive; // which side of the pair holds the magnitude
  int level;
};

// Write-verify a single cell toward `target_g`. Returns true when verified.
bool write_verify_cell(CrossbarState& tile, int i, int j, double target_g, double tol,
                       int max_pulses, std::uint64_t seed, ProgramReport& report) {
  const DeviceParams& dev = tile.device();
  int pulses = 0;
  for (int iter = 0; iter <= max_pulses; ++iter) {
    const double g_read = tile.read_cell(i, j, substream(seed, "verify", iter));
    ++report.verify_reads;
    const double err = g_read - target_g;
    if (std::abs(err) <= tol) return true;
    if (pulses >= max_pulses) return false;
    try {
      if (err < 0.0) {
        tile.pulse_cell(i, j, PulseDirection::up, substream(seed, "pulse", iter));
      } else if (dev.response_kind == ResponseKind::one_sided) {
        tile.reset_cell(i, j); // the one-sided depression path
      } else {
        tile.pulse_cell(i, j, PulseDirection::down, substream(seed, "pulse", iter));
      }
    } catch (const DeviceWornError&) {
      return false;
    }
    ++pulses;
    ++report.total_pulses;
    report.write_energy += dev.write_energy;
  }
  return false;
}

} // namespace

ProgramReport program_weights(const SlicePlan& plan, const QuantizedMatrix& weights,
                              TileSet& tiles, std::uint64_t rng_seed,
                              const WriteVerifyOptions& options) {
  plan.validate();
  weights.validate(plan.weight_bits);
  if (weights.rows != plan.rows || weights.cols != plan.cols)
    throw DimensionError("weights do not match the slice plan geometry");
  if (tiles.plan.to_text() != plan.to_text())
    throw DimensionError("tile set was built for a different plan");

  const DeviceParams& dev = tiles.tiles.front().plus.device();
  const double unit = tiles.level_unit();
  const double tol = options.tolerance_frac * dev.window();

  ProgramReport report;
  double sq_residual = 0.0;

  for (int i = 0; i < plan.rows; ++i) {
    for (int j = 0; j < plan.cols; ++j) {
      const std::int64_t w = weights.at(i, j);
      const std::uint64_t mag = static_cast<std::uint64_t>(w < 0 ? -w : w);
      const bool positive = w >= 0;
      const int gr = i / plan.tile_rows, lr = i % plan.tile_rows;
      const int gc = j / plan.tile_cols, lc = j % plan.tile_cols;
      for (int s = 0; s < plan.num_slices; ++s) {
        const int level =
            static_cast<int>((mag >> (s * plan.bits_per_cell)) & ((1u << plan.bits_per_cell) - 1));
        // Both pair members get programmed: one to the slice level, the other
        // to baseline.
        for (int side = 0; side < 2; ++side) {
          const bool is_plus = side == 0;
          const int cell_level = (is_plus == positive) ? level : 0;
          const double target = dev.g_min + cell_level * unit;
          CrossbarState& tile = is_plus ? tiles.tile(s, gr, gc).plus : tiles.tile(s, gr, gc).minus;
          report.cells_total += 1;
          if (cell_level != 0) report.cells_programmed += 1;

          bool ok;
          if (options.exact_write) {
            tile.set_cell(lr, lc, target);
            ++report.verify_reads;
            ok = true;
          } else {
            const std::uint64_t seed =
                substream(rng_seed, "wv", static_cast<std::uint64_t>(s),
                          static_cast<std::uint64_t>(i) * plan.cols + j,
                          static_cast<std::uint64_t>(side));
            ok = write_verify_cell(tile, lr, lc, target, tol, options.max_pulses, seed, report);
          }
          if (ok) {
            report.cells_verified += 1;
          } else {
            report.failures.push_back({s, i, j, is_plus});
          }
          const double resid = std::abs(tile.at(lr, lc).g - target);
          report.max_residual_g = std::max(report.max_residual_g, resid);
          sq_residual += resid * resid;
          const std::int64_t got_level = std::llround((tile.at(lr, lc).g - dev.g_min) / unit);
          report.max_level_error =
              std::max(report.max_level_error, std::abs(got_level - cell_level));
        }
      }
    }
  }
  if (report.cells_total > 0)
    report.rms_residual_g = std::sqrt(sq_residual / static_cast<double>(report.cells_total));
  return report;
}

std::string ProgramReport::to_text() const {
  std::ostringstream out;
  out << "xbar-program-report 1\n";
  out << "cells_total " << cells_total << "\n";
  out << "cells_programmed " << cells_programmed << "\n";
  out << "cells_verified " << cells_verified << "\n";
  out << "cells_failed " << failures.size() << "\n";
  for (const auto& f : failures)
    out << "failure slice=" << f.slice << " row=" << f.row << " col=" << f.col
        << " side=" << (f.positive ? "plus" : "minus") << "\n";
  out << "total_pulses " << total_pulses << "\n";
  out << "verify_reads " << verify_reads << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", write_energy);
  out << "write_energy_j " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", max_residual_g);
  out << "max_residual_g " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.17g", rms_residual_g);
  out << "rms_residual_g " << buf << "\n";
  out << "max_level_error " << max_level_error << "\n";
  return out.str();
}

BitsliceResult mvm_bitsliced(const TileSet& tiles, std::span<const std::int64_t> x, MvmMode mode,
                             std::uint64_t rng_seed) {
  const SlicePlan& plan = tiles.plan;
  if (static_cast<int>(x.size()) != plan.rows)
    throw DimensionError("input vector length does not match plan rows");
  const std::int64_t in_lo = -(std::int64_t{1} << (plan.input_bits - 1));
  const std::int64_t in_hi = (std::int64_t{1} << (plan.input_bits - 1)) - 1;
  for (std::int64_t v : x)
    if (v < in_lo || v > in_hi)
      throw ConfigError("input entry " + std::to_string(v) + " outside " +
                        std::to_string(plan.input_bits) + "-bit signed range");

  const DeviceParams& dev = tiles.tiles.front().plus.device();
  const CrossbarConfig& tile_cfg = tiles.tiles.front().plus.config();
  const double unit = tiles.level_unit();

  BitsliceResult result;
  result.values.assign(plan.cols, 0);
  std::vector<double> acc(plan.cols, 0.0);
  std::vector<double> v_in(plan.tile_rows);

  // phase 0 streams max(x, 0), phase 1 streams max(-x, 0), subtracted digitally
  for (int phase = 0; phase < 2; ++phase) {
    const double phase_sign = phase == 0 ? 1.0 : -1.0;
    for (int t = 0; t < plan.input_bits; ++t) {
      for (int gr = 0; gr < plan.grid_rows; ++gr) {
        const int row0 = gr * plan.tile_rows;
        const int nrows = std::min(plan.tile_rows, plan.rows - row0);
        int active = 0;
        for (int r = 0; r < plan.tile_rows; ++r) {
          std::uint64_t mag = 0;
          if (r < nrows) {
            const std::int64_t xv = x[row0 + r];
            const std::int64_t u = phase == 0 ? std::max<std::int64_t>(xv, 0)
                                              : std::max<std::int64_t>(-xv, 0);
            mag = static_cast<std::uint64_t>(u);
          }
          const bool bit = (mag >> t) & 1u;
          v_in[r] = bit ? tile_cfg.v_read : 0.0;
          active += bit ? 1 : 0;
        }
        if (active == 0) continue;
        // Baseline charge from g_min cells, removed digitally after conversion.
        const double baseline_codes = active * dev.g_min / unit;

        for (int s = 0; s < plan.num_slices; ++s) {
          const double significance = std::ldexp(1.0, s * plan.bits_per_cell + t);
          for (int gc = 0; gc < plan.grid_cols; ++gc) {
            const int col0 = gc * plan.tile_cols;
            const int ncols = std::min(plan.tile_cols, plan.cols - col0);
            const TilePair& pair = tiles.tile(s, gr, gc);
            for (int side = 0; side < 2; ++side) {
              const CrossbarState& tile = side == 0 ? pair.plus : pair.minus;
              const std::uint64_t seed =
                  substream(rng_seed, "mvm", (static_cast<std::uint64_t>(phase) << 32) | t,
                            (static_cast<std::uint64_t>(s) << 32) | gr,
                            (static_cast<std::uint64_t>(gc) << 1) | side);
              std::vector<double> currents =
                  mode == MvmMode::ideal ? mvm_ideal(tile, v_in, &result.stats)
                                         : mvm_nonideal(tile, v_in, seed, &result.stats);
              const std::vector<int> codes = adc_quantize(currents, tile, &result.stats);
              const double side_sign = side == 0 ? 1.0 : -1.0;
              for (int c = 0; c < ncols; ++c) {
                const double partial = static_cast<double>(codes[c]) - baseline_codes;
                acc[col0 + c] += phase_sign * side_sign * significance * partial;
              }
            }
          }
        }
      }
    }
  }
  for (int j = 0; j < plan.cols; ++j) result.values[j] = std::llround(acc[j]);
  return result;
}

} // namespace xbar
