#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sympcae/config.hpp"
#include "sympcae/io.hpp"

namespace sympcae {

// File layout of one experiment directory.
struct RunPaths {
  fs::path dir;

  fs::path snapshots() const { return dir / "snapshots.ssnp"; }
  // Same integration continued to horizon_factor times the training horizon.
  fs::path extended() const { return dir / "snapshots_ext.ssnp"; }
  fs::path hamiltonian() const { return dir / "hamiltonian.csv"; }
  fs::path autoencoder(Index r) const { return dir / ("ae_r" + std::to_string(r) + ".scae"); }
  fs::path ae_loss(Index r) const { return dir / ("ae_r" + std::to_string(r) + "_loss.csv"); }
  fs::path psd(Index r) const { return dir / ("psd_r" + std::to_string(r) + ".scae"); }
  fs::path metrics() const { return dir / "metrics.csv"; }
  fs::path time_errors(Index r) const { return dir / ("rel_time_err_r" + std::to_string(r) + ".csv"); }
  fs::path sympnet(Index r) const { return dir / ("sympnet_r" + std::to_string(r) + ".scae"); }
  fs::path sympnet_loss(Index r) const { return dir / ("sympnet_r" + std::to_string(r) + "_loss.csv"); }
  fs::path latent_errors(Index r) const { return dir / ("latent_r" + std::to_string(r) + ".csv"); }
  fs::path latent_states(Index r) const { return dir / ("latent_r" + std::to_string(r) + ".ssnp"); }
  fs::path field(const std::string& name) const { return dir / ("field_" + name + ".csv"); }
};

// Training matrix: the first nt recorded states.
Mat training_matrix(const SnapshotFile& s);

struct GenerateReport {
  Index states = 0;
  Index dim = 0;
  double max_relative_drift = 0.0;
};
GenerateReport cmd_generate(const ExperimentConfig& cfg, std::ostream& log);

struct TrainReport {
  Index r = 0;
  double final_loss = 0.0;
  double seconds = 0.0;
};
std::vector<TrainReport> cmd_train_ae(const ExperimentConfig& cfg, std::ostream& log);
std::vector<TrainReport> cmd_train_psd(const ExperimentConfig& cfg, std::ostream& log);

struct MetricsRow {
  Index r = 0;
  double eps_psd = 0.0;
  double eps_sympcae = 0.0;
};
std::vector<MetricsRow> cmd_eval(const ExperimentConfig& cfg, std::ostream& log);

struct LatentReport {
  Index r = 0;
  Index train_steps = 0;
  // rel_time_err of the decoded rollout at every recorded step.
  std::vector<double> errors;
  bool diverged = false;
  double max_error() const;
  double train_mean() const;
  double test_mean() const;
};
std::vector<LatentReport> cmd_latent(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace sympcae
