// tsfact: verify factorization chains, list ladder solutions and spectra,
// and write the built-in preset configs.
//
// Exit codes: 0 success, 1 residuals over tolerance (or a chain that cannot
// be built), 2 bad configuration or I/O failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "tsfact/tsfact.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_residual = 1;
constexpr int exit_config = 2;

struct IoError : tsfact::Error {
  using Error::Error;
};

std::string read_input(const std::string& path) {
  try {
    return tsfact::read_text_file(path);
  } catch (const tsfact::Error& e) {
    throw IoError(e.what());
  }
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  try {
    tsfact::write_text_file(out_path, text);
  } catch (const tsfact::Error& e) {
    throw IoError(e.what());
  }
}

tsfact::ChainConfig load_config(const std::string& path) {
  return tsfact::parse_chain_config_text(read_input(path));
}

int cmd_verify(const std::string& config_path, const std::string& report_path) {
  const auto cfg = load_config(config_path);
  auto built = tsfact::build_chain(cfg);
  const auto rep = tsfact::verify_chain(cfg, built);
  emit(tsfact::dump_json(rep.json), report_path);
  std::cerr << (rep.ok ? "verify: all residuals within tolerance\n"
                       : "verify: residuals over tolerance\n");
  return rep.ok ? exit_ok : exit_residual;
}

int cmd_ladder(const std::string& config_path, std::size_t level, std::size_t max_level,
               const std::string& out_path) {
  const auto cfg = load_config(config_path);
  auto built = tsfact::build_chain(cfg);
  auto& chain = built.chain;
  if (!chain.verify(cfg.tolerances.comm))
    std::cerr << "ladder: warning, not every level verifies; unverified levels are skipped\n";
  std::vector<tsfact::LadderSolution> sols;
  tsfact::Json arr = tsfact::Json::array();
  // lowering stops at the first unverified level, so clamp the range
  std::size_t top = max_level;
  for (std::size_t j = level; j < max_level; ++j)
    if (!chain.verified(j)) {
      top = j;
      break;
    }
  if (top > level) sols = tsfact::solutions_from_kernels(chain, level, top);
  for (const auto& s : sols) {
    auto j = tsfact::solution_to_json(s);
    j["eigen_residual"] = tsfact::eigen_residual(chain, s);
    arr.push_back(j);
  }
  tsfact::Json out;
  out["level"] = level;
  out["max_level"] = max_level;
  out["solutions"] = arr;
  emit(tsfact::dump_json(out), out_path);
  return exit_ok;
}

int cmd_spectrum(const std::string& config_path, std::size_t level,
                 const std::string& out_path) {
  const auto cfg = load_config(config_path);
  auto built = tsfact::build_chain(cfg);
  const auto pairs = tsfact::dense_spectrum_oracle(built.chain, level);
  emit(tsfact::spectrum_csv(built.chain, level, pairs), out_path);
  return exit_ok;
}

int cmd_preset(const std::string& name, const std::vector<long>& window,
               const std::string& out_path) {
  std::optional<std::pair<long, long>> w;
  if (!window.empty()) w = std::pair<long, long>{window.at(0), window.at(1)};
  const auto cfg = tsfact::preset_config(name, w);
  emit(tsfact::dump_json(tsfact::chain_config_to_json(cfg)), out_path);
  return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factorization chains of ladder operators on discrete time scales"};
  app.require_subcommand(1);

  std::string config_path, out_path, report_path;
  std::size_t level = 0, max_level = 0;

  auto* verify = app.add_subcommand("verify", "build a chain and report its residuals");
  verify->add_option("--config", config_path, "chain config JSON")->required();
  verify->add_option("--report", report_path, "write the report here instead of stdout");

  auto* ladder = app.add_subcommand("ladder", "solutions generated from kernels");
  ladder->add_option("--config", config_path, "chain config JSON")->required();
  ladder->add_option("--level", level, "level the solutions are lowered to")->required();
  ladder->add_option("--max-level", max_level, "highest kernel level")->required();
  ladder->add_option("--out", out_path, "output file");

  auto* spectrum = app.add_subcommand("spectrum", "dense eigenpairs of A_k*A_k as CSV");
  spectrum->add_option("--config", config_path, "chain config JSON")->required();
  spectrum->add_option("--level", level, "level k")->required();
  spectrum->add_option("--out", out_path, "output file");

  std::string preset_name;
  std::vector<long> window;
  auto* preset = app.add_subcommand("preset", "write a built-in config");
  preset->add_option("name", preset_name, "z-example | square-spectrum | q-derivative")
      ->required();
  preset->add_option("--window", window, "integer window a b (z-example)")
      ->expected(2)
      ->allow_extra_args(false);
  preset->add_option("--out", out_path, "output file");

  std::string kind = "integer";
  tsfact::GridParams gp;
  bool min_cut = false, max_cut = false;
  auto* grid = app.add_subcommand("grid", "print the points of a grid");
  grid->add_option("--config", config_path, "take the grid from a chain config");
  grid->add_option("--kind", kind, "integer | q_lattice | qh_lattice");
  grid->add_option("--a", gp.a, "integer grid: first point");
  grid->add_option("--b", gp.b, "integer grid: last point");
  grid->add_option("--c", gp.c, "q-lattice: largest point");
  grid->add_option("--q", gp.q, "q-lattice: ratio in (0, 1)");
  grid->add_option("--shift", gp.h, "qh-lattice: affine shift h");
  grid->add_option("--count", gp.count, "q-lattice: number of steps N");
  grid->add_flag("--min-cut", min_cut, "the minimum is a truncation cut");
  grid->add_flag("--max-cut", max_cut, "the maximum is a truncation cut");
  grid->add_option("--out", out_path, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? exit_ok : exit_config;
  }

  try {
    if (*verify) return cmd_verify(config_path, report_path);
    if (*ladder) return cmd_ladder(config_path, level, max_level, out_path);
    if (*spectrum) return cmd_spectrum(config_path, level, out_path);
    if (*preset) return cmd_preset(preset_name, window, out_path);
    if (*grid) {
      tsfact::TimeScaleGrid g;
      if (!config_path.empty()) {
        g = load_config(config_path).build_grid();
      } else {
        if (min_cut) gp.min_is_true_min = 0;
        if (max_cut) gp.max_is_true_max = 0;
        g = tsfact::build_grid(kind, gp);
      }
      emit(tsfact::dump_json(tsfact::grid_to_json(g)), out_path);
      return exit_ok;
    }
  } catch (const tsfact::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const tsfact::GridError& e) {
    std::cerr << "grid error: " << e.what() << '\n';
    return exit_config;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return exit_config;
  } catch (const tsfact::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_residual;
  }
  return exit_config;
}
