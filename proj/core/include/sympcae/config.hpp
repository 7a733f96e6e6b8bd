#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sympcae/architecture.hpp"
#include "sympcae/latent.hpp"
#include "sympcae/pde.hpp"
#include "sympcae/train.hpp"

namespace sympcae {

struct ExperimentConfig {
  std::string name = "wave-desk";
  PdeConfig pde;
  // Grid sizes and latent dimension are filled in per run from pde and r.
  ArchitectureSpec model;
  TrainConfig train;
  LatentConfig latent;
  std::vector<Index> r_list{1, 2, 3};
  std::uint64_t seed = 1234;
  std::string out_dir = "out";
  // The latent rollout runs to this multiple of the training horizon.
  Index horizon_factor = 2;

  void validate() const;
  // Architecture for latent dimension r on this problem's grid.
  ArchitectureSpec model_for(Index r) const;
};

// Names of the built-in presets.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

// Parsed "key = value" lines grouped by [section]; '#' and ';' start comments.
using IniData = std::map<std::string, std::map<std::string, std::string>>;
IniData parse_ini(const std::string& text);

// Starts from the preset named in [run] preset (default: <pde kind>-desk)
// and applies every key in the file. Unknown sections or keys are errors.
ExperimentConfig config_from_ini(const IniData& ini);
ExperimentConfig load_config(const std::filesystem::path& path);

// Serializes every field in the format accepted by config_from_ini.
std::string to_ini(const ExperimentConfig& c);

}  // namespace sympcae
