#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "xbar/bitslice.hpp"
#include "xbar/crossbar.hpp"
#include "xbar/design_space.hpp"
#include "xbar/device.hpp"
#include "xbar/io.hpp"
#include "xbar/rng.hpp"
#include "xbar/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

xbar::DeviceParams resolve_device(const std::string& spec) {
  for (const auto& name : xbar::device_preset_names())
    if (name == spec) return xbar::device_preset(name);
  if (!fs::exists(spec))
    throw xbar::ConfigError("device '" + spec + "' is neither a preset nor a file");
  return xbar::load_device_params(spec);
}

xbar::CrossbarConfig electrical_config(const xbar::KvConfig& cfg) {
  xbar::CrossbarConfig c;
  c.rows = 1;
  c.cols = 1;
  c.r_wire = cfg.get_double("r_wire", 0.0);
  c.v_read = cfg.get_double("v_read", 0.2);
  c.t_int = cfg.get_double("t_int", 1e-7);
  c.temperature = cfg.get_double("temperature", 300.0);
  c.adc_bits = static_cast<int>(cfg.get_int("adc_bits", 8));
  c.adc_energy_per_sample = cfg.get_double("adc_energy", 5e-12);
  c.adc_share = static_cast<int>(cfg.get_int("adc_share", 1));
  const std::string solver = cfg.get("ir_solver", "exact");
  if (solver == "exact") c.ir_mode = xbar::IrSolverMode::exact;
  else if (solver == "approximate") c.ir_mode = xbar::IrSolverMode::approximate;
  else throw xbar::ConfigError("ir_solver must be 'exact' or 'approximate'");
  return c;
}

json stats_json(const xbar::MvmStats& s) {
  return json{{"array_energy_j", s.array_energy},
              {"adc_energy_j", s.adc_energy},
              {"total_energy_j", s.total_energy()},
              {"adc_conversions", s.adc_conversions},
              {"adc_saturations", s.adc_saturations},
              {"conversion_slots", s.conversion_slots},
              {"integration_windows", s.integration_windows},
              {"mvm_count", s.mvm_count}};
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw xbar::SimError("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

std::vector<int> parse_dims(const std::string& text) {
  std::vector<int> dims;
  std::istringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) dims.push_back(std::stoi(token));
  return dims;
}

bool is_preset_name(const std::string& name) {
  for (const auto& n : xbar::device_preset_names())
    if (n == name) return true;
  return false;
}

// -- mvm ----------------------------------------------------------------------

int cmd_mvm(const std::string& config_path, const std::string& out_dir,
            const std::string& mode_override, std::int64_t seed_override, bool check_oracle) {
  const xbar::KvConfig cfg = xbar::KvConfig::load(config_path);
  const std::uint64_t seed =
      seed_override >= 0 ? static_cast<std::uint64_t>(seed_override) : cfg.get_int("seed", 1);
  const std::string mode = mode_override.empty() ? cfg.get("mode", "ideal") : mode_override;
  const fs::path out(out_dir);
  fs::create_directories(out);

  const xbar::CsvMatrix matrix = xbar::load_csv_matrix(cfg.get("matrix"));
  const std::vector<double> vec = xbar::load_csv_vector(cfg.get("vector"));
  if (static_cast<int>(vec.size()) != matrix.rows)
    throw xbar::DimensionError("vector length does not match matrix rows");

  xbar::MvmStats stats;
  json accounting;
  bool oracle_ok = true;

  if (mode == "ideal" || mode == "nonideal") {
    xbar::CrossbarConfig xcfg = electrical_config(cfg);
    xcfg.rows = matrix.rows;
    xcfg.cols = matrix.cols;
    if (xcfg.cols % xcfg.adc_share != 0) xcfg.adc_share = 1;
    const xbar::DeviceParams device = resolve_device(cfg.get("device", "ideal"));
    xbar::CrossbarState tile = xbar::CrossbarState::make(xcfg, device, seed);
    for (int i = 0; i < matrix.rows; ++i)
      for (int j = 0; j < matrix.cols; ++j) tile.set_cell(i, j, matrix.at(i, j));

    const std::vector<double> currents =
        mode == "ideal" ? xbar::mvm_ideal(tile, vec, &stats)
                        : xbar::mvm_nonideal(tile, vec, xbar::substream(seed, "mvm"), &stats);
    xbar::write_csv_vector(currents, out / "currents.csv");
    xbar::export_column_currents_csv(currents, out / "columns_debug.csv");

    if (check_oracle) {
      for (int j = 0; j < matrix.cols && oracle_ok; ++j) {
        double expect = 0.0;
        for (int i = 0; i < matrix.rows; ++i) expect += matrix.at(i, j) * vec[i];
        if (mode == "ideal" &&
            std::abs(currents[j] - expect) > 1e-12 * std::max(1.0, std::abs(expect)))
          oracle_ok = false;
      }
      accounting["oracle_check"] = oracle_ok ? "pass" : "fail";
    }
    accounting["mode"] = mode;
    accounting["rows"] = matrix.rows;
    accounting["cols"] = matrix.cols;
  } else if (mode == "bitsliced") {
    const int wbits = static_cast<int>(cfg.get_int("weight_bits", 4));
    const int ibits = static_cast<int>(cfg.get_int("input_bits", 4));
    const int bpc = static_cast<int>(cfg.get_int("bits_per_cell", 1));
    const int tr = static_cast<int>(cfg.get_int("tile_rows", 128));
    const int tc = static_cast<int>(cfg.get_int("tile_cols", 128));
    const xbar::SlicePlan plan =
        xbar::plan_slices(matrix.rows, matrix.cols, wbits, ibits, bpc,
                          std::min(tr, matrix.rows), std::min(tc, matrix.cols));

    xbar::QuantizedMatrix qm;
    qm.rows = matrix.rows;
    qm.cols = matrix.cols;
    for (int i = 0; i < matrix.rows; ++i)
      for (int j = 0; j < matrix.cols; ++j)
        qm.values.push_back(static_cast<std::int64_t>(std::llround(matrix.at(i, j))));
    qm.validate(wbits);
    std::vector<std::int64_t> x(vec.size());
    for (std::size_t i = 0; i < vec.size(); ++i) x[i] = std::llround(vec[i]);

    const xbar::DeviceParams device = resolve_device(cfg.get("device", "ideal"));
    xbar::TileSet tiles = xbar::make_tile_set(plan, device, electrical_config(cfg), seed);
    xbar::WriteVerifyOptions wv;
    wv.exact_write = cfg.get_bool("exact_write", true);
    wv.tolerance_frac = cfg.get_double("tolerance_frac", 0.01);
    wv.max_pulses = static_cast<int>(cfg.get_int("max_pulses", 200));
    const xbar::ProgramReport prog = xbar::program_weights(plan, qm, tiles, seed, wv);

    const std::string submode = cfg.get("electrical_mode", "ideal");
    const xbar::BitsliceResult result = xbar::mvm_bitsliced(
        tiles, x, submode == "nonideal" ? xbar::MvmMode::nonideal : xbar::MvmMode::ideal,
        xbar::substream(seed, "mvm"));
    const std::vector<double> as_double(result.values.begin(), result.values.end());
    xbar::write_csv_vector(as_double, out / "result.csv");
    stats = result.stats;

    if (check_oracle) {
      for (int j = 0; j < matrix.cols && oracle_ok; ++j) {
        std::int64_t expect = 0;
        for (int i = 0; i < matrix.rows; ++i) expect += qm.at(i, j) * x[i];
        if (submode == "ideal" && result.values[j] != expect) oracle_ok = false;
      }
      accounting["oracle_check"] = oracle_ok ? "pass" : "fail";
    }
    accounting["mode"] = "bitsliced";
    accounting["program_pulses"] = prog.total_pulses;
    std::ofstream pf(out / "plan.txt");
    pf << plan.to_text();
  } else {
    throw xbar::ConfigError("mode must be ideal, nonideal or bitsliced");
  }

  accounting["stats"] = stats_json(stats);
  write_json(accounting, out / "accounting.json");
  xbar::write_manifest(out / "manifest.txt", cfg, seed, "mvm");
  if (check_oracle && !oracle_ok) {
    std::cerr << "oracle check failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// -- bounds -------------------------------------------------------------------

int cmd_bounds(const std::string& grid_path, const std::string& out_path,
               const std::string& config_path) {
  xbar::DesignPoint base;
  if (!config_path.empty()) {
    const xbar::KvConfig cfg = xbar::KvConfig::load(config_path);
    for (const auto& [key, value] : cfg.entries())
      if (!xbar::set_design_field(base, key, std::stod(value)))
        throw xbar::ConfigError("unknown design parameter '" + key + "'");
  }
  const xbar::SweepGrid grid = xbar::SweepGrid::load(grid_path);
  const auto rows = xbar::sweep(grid, base);
  std::ofstream out(out_path);
  if (!out) throw xbar::SimError("cannot write '" + out_path + "'");
  xbar::write_sweep_csv(rows, out);
  std::cout << rows.size() << " design points written to " << out_path << "\n";
  return kExitOk;
}

// -- train ----------------------------------------------------------------------

xbar::Dataset load_dataset(const xbar::KvConfig& cfg) {
  const std::string source = cfg.get("dataset");
  if (source == "blobs")
    return xbar::Dataset::make_blobs(static_cast<int>(cfg.get_int("blob_dim", 64)),
                                     static_cast<int>(cfg.get_int("blob_classes", 3)),
                                     static_cast<int>(cfg.get_int("blob_per_class", 40)),
                                     cfg.get_double("blob_noise", 0.15),
                                     cfg.get_int("blob_seed", 1));
  if (source == "idx")
    return xbar::Dataset::load_idx(cfg.get("idx_images"), cfg.get("idx_labels"));
  return xbar::Dataset::load_csv(source);
}

void write_metrics_csv(const xbar::TrainResult& result, const fs::path& path) {
  std::ofstream out(path);
  out << "epoch,mean_loss,train_accuracy,pulses,update_energy_j\n";
  char buf[256];
  for (const auto& m : result.epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%s,%lld,%s\n", m.epoch,
                  xbar::format_double(m.mean_loss).c_str(),
                  xbar::format_double(m.train_accuracy).c_str(),
                  static_cast<long long>(m.pulses),
                  xbar::format_double(m.update_energy).c_str());
    out << buf;
  }
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::int64_t seed_override, const std::string& resume_dir) {
  const xbar::KvConfig cfg = xbar::KvConfig::load(config_path);
  const std::uint64_t seed =
      seed_override >= 0 ? static_cast<std::uint64_t>(seed_override) : cfg.get_int("seed", 1);
  const fs::path out(out_dir);
  fs::create_directories(out);

  const xbar::Dataset data = load_dataset(cfg);
  const std::size_t train_count = static_cast<std::size_t>(
      cfg.get_int("train_count", static_cast<std::int64_t>(data.size() * 3 / 4)));
  const auto [train_set, test_set] = data.split(train_count, seed);

  xbar::NetworkSpec spec;
  spec.dims = parse_dims(cfg.get("dims"));
  if (spec.dims.front() != data.dim)
    throw xbar::ConfigError("first network dim must equal the dataset dim");
  const std::string act = cfg.get("activation", "sigmoid");
  if (act == "relu") spec.activation = xbar::Activation::relu;
  else if (act == "sigmoid") spec.activation = xbar::Activation::sigmoid;
  else throw xbar::ConfigError("activation must be relu or sigmoid");
  spec.eta = cfg.get_double("eta", 0.1);
  spec.epochs = static_cast<int>(cfg.get_int("epochs", 3));
  spec.seed = seed;
  spec.validate();

  const std::string mode = cfg.get("mode", "analog");
  json summary;
  summary["mode"] = mode;
  summary["train_samples"] = train_set.size();
  summary["test_samples"] = test_set.size();

  if (mode == "float") {
    xbar::FloatNet net = xbar::FloatNet::init(spec, seed);
    const xbar::TrainResult result = xbar::train(net, train_set, seed);
    const xbar::EvalReport eval = xbar::evaluate(net, test_set);
    write_metrics_csv(result, out / "metrics.csv");
    summary["test_accuracy"] = eval.accuracy;
    summary["final_loss"] = result.epochs.back().mean_loss;
  } else if (mode == "analog") {
    xbar::AnalogOptions opt;
    opt.device = resolve_device(cfg.get("device", "ideal"));
    opt.tile_base = electrical_config(cfg);
    opt.weight_clip = cfg.get_double("weight_clip", 2.0);
    opt.zero_shift = cfg.get_bool("zero_shift", true);
    opt.noisy_read = cfg.get_bool("noisy_read", false);
    opt.quantized_read = cfg.get_bool("quantized_read", false);
    opt.pulse_length = static_cast<int>(cfg.get_int("pulse_length", 32));
    opt.one_sided_pair_trick = cfg.get_bool("one_sided_pair_trick", true);
    opt.reprogram_fallback = cfg.get_bool("reprogram_fallback", false);

    xbar::AnalogNet net = xbar::AnalogNet::init(spec, opt, seed);
    if (!resume_dir.empty()) {
      for (int l = 0; l < spec.layer_count(); ++l) {
        for (const char* side : {"plus", "minus"}) {
          const fs::path snap =
              fs::path(resume_dir) / ("layer" + std::to_string(l) + "_" + side + ".snap");
          const xbar::CrossbarState loaded = xbar::load_snapshot(snap);
          xbar::CrossbarState& dst = side[0] == 'p' ? net.layer(l).plus : net.layer(l).minus;
          if (loaded.config().rows != dst.config().rows ||
              loaded.config().cols != dst.config().cols)
            throw xbar::ConfigError("snapshot '" + snap.string() + "' shape mismatch");
          for (int i = 0; i < dst.config().rows; ++i)
            for (int j = 0; j < dst.config().cols; ++j) dst.at(i, j) = loaded.at(i, j);
        }
      }
      summary["resumed_from"] = resume_dir;
    }
    // conductance snapshots before and after training; the snapshot format
    // stores devices by preset name
    const bool snapshot_ok = is_preset_name(opt.device.name);
    if (snapshot_ok)
      for (int l = 0; l < spec.layer_count(); ++l) {
        xbar::save_snapshot(net.layer(l).plus,
                            out / ("initial_layer" + std::to_string(l) + "_plus.snap"));
        xbar::save_snapshot(net.layer(l).minus,
                            out / ("initial_layer" + std::to_string(l) + "_minus.snap"));
      }

    const xbar::TrainResult result = xbar::train(net, train_set, seed);
    const xbar::EvalReport eval = xbar::evaluate(net, test_set, xbar::substream(seed, "eval"));
    write_metrics_csv(result, out / "metrics.csv");
    if (snapshot_ok)
      for (int l = 0; l < spec.layer_count(); ++l) {
        xbar::save_snapshot(net.layer(l).plus,
                            out / ("layer" + std::to_string(l) + "_plus.snap"));
        xbar::save_snapshot(net.layer(l).minus,
                            out / ("layer" + std::to_string(l) + "_minus.snap"));
      }
    summary["test_accuracy"] = eval.accuracy;
    summary["final_loss"] = result.epochs.back().mean_loss;
    summary["total_pulses"] = result.total_pulses;
    summary["update_energy_j"] = result.update_energy;
    summary["fallback_reprograms"] = result.fallback_reprograms;
    summary["forward_stats"] = stats_json(result.mvm_stats);
    summary["eval_stats"] = stats_json(eval.stats);
  } else {
    throw xbar::ConfigError("mode must be float or analog");
  }

  write_json(summary, out / "summary.json");
  xbar::write_manifest(out / "manifest.txt", cfg, seed, "train");
  std::cout << "test_accuracy " << summary["test_accuracy"] << "\n";
  return kExitOk;
}

// -- program --------------------------------------------------------------------

int cmd_program(const std::string& config_path, const std::string& out_dir,
                std::int64_t seed_override) {
  const xbar::KvConfig cfg = xbar::KvConfig::load(config_path);
  const std::uint64_t seed =
      seed_override >= 0 ? static_cast<std::uint64_t>(seed_override) : cfg.get_int("seed", 1);
  const fs::path out(out_dir);
  fs::create_directories(out);

  const xbar::CsvMatrix matrix = xbar::load_csv_matrix(cfg.get("weights"));
  const int wbits = static_cast<int>(cfg.get_int("weight_bits", 4));
  const xbar::SlicePlan plan = xbar::plan_slices(
      matrix.rows, matrix.cols, wbits, static_cast<int>(cfg.get_int("input_bits", 1)),
      static_cast<int>(cfg.get_int("bits_per_cell", 1)),
      std::min(static_cast<int>(cfg.get_int("tile_rows", 128)), matrix.rows),
      std::min(static_cast<int>(cfg.get_int("tile_cols", 128)), matrix.cols));

  xbar::QuantizedMatrix qm;
  qm.rows = matrix.rows;
  qm.cols = matrix.cols;
  for (int i = 0; i < matrix.rows; ++i)
    for (int j = 0; j < matrix.cols; ++j)
      qm.values.push_back(static_cast<std::int64_t>(std::llround(matrix.at(i, j))));
  qm.validate(wbits);

  const xbar::DeviceParams device = resolve_device(cfg.get("device", "rram"));
  xbar::TileSet tiles = xbar::make_tile_set(plan, device, electrical_config(cfg), seed);
  xbar::WriteVerifyOptions wv;
  wv.tolerance_frac = cfg.get_double("tolerance_frac", 0.01);
  wv.max_pulses = static_cast<int>(cfg.get_int("max_pulses", 200));
  wv.exact_write = cfg.get_bool("exact_write", false);
  const xbar::ProgramReport report = xbar::program_weights(plan, qm, tiles, seed, wv);

  {
    std::ofstream rf(out / "report.txt");
    rf << report.to_text();
    std::ofstream pf(out / "plan.txt");
    pf << plan.to_text();
  }
  if (is_preset_name(device.name)) {
    for (int s = 0; s < plan.num_slices; ++s)
      for (int gr = 0; gr < plan.grid_rows; ++gr)
        for (int gc = 0; gc < plan.grid_cols; ++gc) {
          const std::string base = "slice" + std::to_string(s) + "_r" + std::to_string(gr) +
                                   "_c" + std::to_string(gc);
          xbar::save_snapshot(tiles.tile(s, gr, gc).plus, out / (base + "_plus.snap"));
          xbar::save_snapshot(tiles.tile(s, gr, gc).minus, out / (base + "_minus.snap"));
        }
  }
  xbar::write_manifest(out / "manifest.txt", cfg, seed, "program");
  std::cout << "verified " << report.cells_verified << "/" << report.cells_total << " cells, "
            << report.total_pulses << " pulses\n";
  return report.failures.empty() ? kExitOk : kExitRuntime;
}

// -- devices --------------------------------------------------------------------

int cmd_devices(const std::string& one) {
  for (const auto& name : xbar::device_preset_names()) {
    if (!one.empty() && one != name) continue;
    const xbar::DeviceParams p = xbar::device_preset(name);
    std::printf("%-6s response=%-22s bits=%d g=[%.3g, %.3g] S", p.name.c_str(),
                xbar::to_string(p.response_kind).c_str(), p.bits_per_cell, p.g_min, p.g_max);
    if (p.g_min > 0.0) std::printf(" on/off=%.3g", p.on_off_ratio());
    if (p.response_kind != xbar::ResponseKind::one_sided)
      std::printf(" steps=%lld", static_cast<long long>(xbar::programming_steps(p)));
    std::printf(" drift=%s endurance=%.1g\n", xbar::to_string(p.drift_kind).c_str(),
                p.endurance);
  }
  if (!one.empty() && !is_preset_name(one)) {
    std::cerr << "unknown preset '" << one << "'\n";
    return kExitUsage;
  }
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crossbar compute-in-memory simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", mode_override, grid_path, out_path = "bounds.csv";
  std::string resume_dir, preset_name;
  std::int64_t seed_override = -1;
  bool check_oracle = false;

  auto* mvm = app.add_subcommand("mvm", "analog / bit-sliced matrix-vector product");
  mvm->add_option("--config", config_path, "run configuration file")->required();
  mvm->add_option("--out", out_dir, "output directory");
  mvm->add_option("--mode", mode_override, "ideal | nonideal | bitsliced");
  mvm->add_option("--seed", seed_override, "master seed override");
  mvm->add_flag("--check-oracle", check_oracle, "compare against the direct product");

  auto* bounds = app.add_subcommand("bounds", "co-design bound sweep");
  bounds->add_option("--grid", grid_path, "sweep grid file")->required();
  bounds->add_option("--out", out_path, "output CSV");
  bounds->add_option("--config", config_path, "base design-point overrides");

  auto* train = app.add_subcommand("train", "train a network on simulated crossbars");
  train->add_option("--config", config_path, "run configuration file")->required();
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--seed", seed_override, "master seed override");
  train->add_option("--resume", resume_dir, "continue from snapshots in this directory");

  auto* program = app.add_subcommand("program", "weight transfer onto tiles");
  program->add_option("--config", config_path, "run configuration file")->required();
  program->add_option("--out", out_dir, "output directory");
  program->add_option("--seed", seed_override, "master seed override");

  auto* devices = app.add_subcommand("devices", "list device presets");
  devices->add_option("--preset", preset_name, "show a single preset");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (mvm->parsed())
      return cmd_mvm(config_path, out_dir, mode_override, seed_override, check_oracle);
    if (bounds->parsed()) return cmd_bounds(grid_path, out_path, config_path);
    if (train->parsed()) return cmd_train(config_path, out_dir, seed_override, resume_dir);
    if (program->parsed()) return cmd_program(config_path, out_dir, seed_override);
    if (devices->parsed()) return cmd_devices(preset_name);
  } catch (const xbar::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
