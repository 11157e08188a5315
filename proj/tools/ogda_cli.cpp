// ogda: runs experiment configs and presets, certifies matrix games.

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ogda/equilibrium.hpp"
#include "ogda/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartial = 3;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ogda::raise(ogda::ErrorCode::kIoError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ogda::DenseMatrix read_matrix_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<ogda::Vector> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ogda::Vector row;
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      const std::string tok = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
        ogda::raise(ogda::ErrorCode::kParseError, path + " line " + std::to_string(line_no) + ": bad entry '" + tok + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      ogda::raise(ogda::ErrorCode::kParseError, path + " line " + std::to_string(line_no) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) ogda::raise(ogda::ErrorCode::kParseError, path + ": no rows");
  ogda::Vector flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return ogda::DenseMatrix(rows.size(), rows.front().size(), std::move(flat));
}

int run_config(const ogda::ExperimentConfig& cfg) {
  const auto report = ogda::run_experiment(cfg);
  const auto dir = std::filesystem::path(cfg.output_dir) / ogda::to_string(cfg.preset);
  std::cout << "wrote " << report.manifest.size() << " files to " << dir.string() << "\n";
  for (const auto& c : report.cells) {
    if (c.diverged_at) std::cout << c.label() << " diverged at t = " << *c.diverged_at << "\n";
    for (const auto& w : c.warnings) std::cerr << "warning: " << c.label() << ": " << w << "\n";
  }
  return report.any_diverged() ? kExitPartial : kExitOk;
}

int exit_code_for(const ogda::Error& e) {
  switch (e.code()) {
    case ogda::ErrorCode::kParseError:
    case ogda::ErrorCode::kValidationError: return kExitValidation;
    default: return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimistic mirror descent experiments for constrained saddle-point problems"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "YAML config path")->required();

  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::string out_dir = "out";
  auto* preset = app.add_subcommand("preset", "Run a built-in preset with its default settings");
  preset->add_option("name", preset_name, "fig1 | curved | strongly_convex | power_toy | multi_ne | custom")->required();
  preset->add_option("--seed", seed, "Game seed (fig1, custom)");
  preset->add_option("--steps", steps, "Iterations per cell");
  preset->add_option("--out", out_dir, "Output directory");

  std::string matrix_path;
  auto* certify = app.add_subcommand("certify", "Solve a matrix game given as CSV and print its equilibrium data");
  certify->add_option("matrix", matrix_path, "CSV with M rows of N numbers")->required();

  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*version) {
      std::cout << "ogda " << ogda::kVersion << "\n";
      return kExitOk;
    }
    if (*run) return run_config(ogda::parse_config(read_text(config_path)));
    if (*preset) {
      const auto which = ogda::parse_preset(preset_name);
      if (!which) ogda::raise(ogda::ErrorCode::kValidationError, "unknown preset '" + preset_name + "'");
      auto cfg = ogda::parse_config("preset: " + ogda::to_string(*which) + "\n");
      if (seed) {
        if (cfg.preset != ogda::Preset::kFig1 && cfg.preset != ogda::Preset::kCustom) {
          ogda::raise(ogda::ErrorCode::kValidationError, "--seed only applies to fig1 and custom");
        }
        cfg.seed = *seed;
      }
      if (steps) cfg.steps = *steps;
      cfg.output_dir = out_dir;
      cfg.emit_svg = true;
      ogda::validate(cfg);
      return run_config(cfg);
    }
    if (*certify) {
      const auto g = read_matrix_csv(matrix_path);
      std::cout << "M: " << g.rows() << "\nN: " << g.cols() << "\n" << ogda::equilibrium_text(ogda::solve_matrix_game(g));
      return kExitOk;
    }
  } catch (const ogda::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
