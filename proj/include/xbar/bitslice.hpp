#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "xbar/crossbar.hpp"

namespace xbar {

/// Layout of a signed W-bit logical matrix across differential conductance
/// pairs, bit slices and physical tiles.
///
/// Numeric convention: logical entries are W-bit two's-complement integers in
/// [-2^(W-1), 2^(W-1)-1]. Each entry is mapped sign-magnitude onto its
/// differential pair: the magnitude's bit slices go to the G+ tiles for
/// non-negative entries and to the G- tiles for negative ones, the other side
/// staying at baseline. Inputs are streamed bit-serially LSB-first, negative
/// inputs in a separate second phase subtracted digitally.
struct SlicePlan {
  int rows = 0; ///< logical M
  int cols = 0; ///< logical N
  int weight_bits = 0;
  int input_bits = 0;
  int bits_per_cell = 0;
  int num_slices = 0; ///< ceil(weight_bits / bits_per_cell)
  int tile_rows = 0;
  int tile_cols = 0;
  int grid_rows = 0; ///< ceil(rows / tile_rows)
  int grid_cols = 0;
  bool differential = true;

  int levels_per_cell() const { return (1 << bits_per_cell) - 1; }
  void validate() const;
  std::string to_text() const;
  static SlicePlan from_text(const std::string& text);
};

/// Deterministic row-major plan covering the logical matrix.
/// bits_per_cell is capped at 4 (ADC overhead dominates beyond that).
SlicePlan plan_slices(int rows, int cols, int weight_bits, int input_bits, int bits_per_cell,
                      int tile_rows, int tile_cols);

/// Integer weight matrix with a real scale factor (weight = entry * scale).
struct QuantizedMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::int64_t> values; // row-major
  double scale = 1.0;

  std::int64_t at(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
  void validate(int weight_bits) const;
};

struct TilePair {
  CrossbarState plus;
  CrossbarState minus;
};

/// The physical arrays backing one SlicePlan: tiles[slice][grid_r][grid_c]
/// differential pairs, all sharing one electrical config.
struct TileSet {
  SlicePlan plan;
  std::vector<TilePair> tiles;

  TilePair& tile(int slice, int gr, int gc);
  const TilePair& tile(int slice, int gr, int gc) const;
  /// Conductance per weight level in one cell.
  double level_unit() const;
};

/// ADC bits that make per-slice column sums exact for any input:
/// ceil(log2(rows * (2^bits_per_cell - 1) + 1)).
int exact_adc_bits(int rows, int bits_per_cell);

/// Builds fresh tiles (all cells at g_min). The ADC is calibrated so one code
/// step equals one weight-level unit of charge; `adc_bits` 0 picks
/// exact_adc_bits for the tile. Throws ConfigError when the plan asks for more
/// bits per cell than the device stores.
TileSet make_tile_set(const SlicePlan& plan, const DeviceParams& device,
                      const CrossbarConfig& base_config, std::uint64_t seed, int adc_bits = 0);

struct WriteVerifyOptions {
  double tolerance_frac = 0.01; ///< acceptance band as a fraction of the window
  int max_pulses = 200;         ///< retry cap per cell
  /// Ideal transfer channel: write targets directly instead of pulsing.
  bool exact_write = false;
};

struct FlaggedCell {
  int slice = 0;
  int row = 0;
  int col = 0;
  bool positive = true;
};

struct ProgramReport {
  std::int64_t cells_total = 0;
  std::int64_t cells_programmed = 0; ///< cells needing a nonzero target
  std::int64_t cells_verified = 0;
  std::vector<FlaggedCell> failures;
  std::int64_t total_pulses = 0;
  std::int64_t verify_reads = 0;
  double write_energy = 0.0;
  double max_residual_g = 0.0;
  double rms_residual_g = 0.0;
  std::int64_t max_level_error = 0;

  std::string to_text() const;
};

/// Closed-loop write-verify weight transfer (pulse, read, compare, repeat up
/// to the retry cap). Cells that fail verification are flagged in the report.
ProgramReport program_weights(const SlicePlan& plan, const QuantizedMatrix& weights,
                              TileSet& tiles, std::uint64_t rng_seed,
                              const WriteVerifyOptions& options = {});

enum class MvmMode { ideal, nonideal };

struct BitsliceResult {
  std::vector<std::int64_t> values;
  MvmStats stats;
};

/// Bit-serial MVM: streams each input bit-plane through every slice,
/// quantizes per tile column, and reconstructs
/// sum_s sum_t 2^(s*b + t) * partial(s, t) with digital differential
/// subtraction. In ideal mode with sufficient ADC bits the result equals the
/// exact integer matrix-vector product.
BitsliceResult mvm_bitsliced(const TileSet& tiles, std::span<const std::int64_t> x, MvmMode mode,
                             std::uint64_t rng_seed);

} // namespace xbar
