#include "sympcae/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

namespace sympcae {

namespace {

SnapshotSource source_of(PdeKind k) {
  switch (k) {
    case PdeKind::Wave: return SnapshotSource::Wave;
    case PdeKind::Nls: return SnapshotSource::Nls;
    case PdeKind::SineGordon: return SnapshotSource::SineGordon;
  }
  return SnapshotSource::Wave;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SnapshotFile load_snapshots(const ExperimentConfig& cfg, const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing " + path.string() + " (run generate first)");
  SnapshotFile s = read_snapshots(path);
  if (s.states.rows() != 2 * cfg.pde.half_dim()) {
    throw ShapeError(path.string() + ": state dimension " + std::to_string(s.states.rows()) +
                     " does not match the configured grid (" + std::to_string(2 * cfg.pde.half_dim()) + ")");
  }
  return s;
}

Checkpoint load_checkpoint(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) throw IoError("missing " + path.string() + " (run " + hint + " first)");
  return read_checkpoint(path);
}

Mat reconstruct_all(const Autoencoder& ae, const Mat& X) {
  Mat Y(X.rows(), X.cols());
  for (Index j = 0; j < X.cols(); ++j) Y.col(j) = ae.reconstruct(X.col(j));
  return Y;
}

// Seeds derived per stage so commands can be rerun independently.
std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage, Index r) {
  return seed * 1000003ULL + stage * 101ULL + static_cast<std::uint64_t>(r);
}

void write_loss(const fs::path& path, const std::vector<EpochRecord>& hist) {
  CsvTable t({"epoch", "loss", "lr"});
  for (const auto& e : hist) t.add_row({std::to_string(e.epoch), format_number(e.loss), format_number(e.lr)});
  t.write(path);
}

// Position field used for heatmaps: space by time for 1D problems, the grid
// at the last training state for 2D problems.
Mat position_field(const ExperimentConfig& cfg, const Mat& X) {
  const Index n = cfg.pde.half_dim();
  if (cfg.pde.kind != PdeKind::SineGordon) return X.topRows(n);
  const Vec q = X.col(X.cols() - 1).head(n);
  Mat grid(cfg.pde.n2, cfg.pde.n);
  for (Index j = 0; j < cfg.pde.n2; ++j)
    for (Index i = 0; i < cfg.pde.n; ++i) grid(j, i) = q[i + cfg.pde.n * j];
  return grid;
}

}  // namespace

Mat training_matrix(const SnapshotFile& s) {
  if (s.states.cols() < 2) throw ShapeError("snapshot file holds fewer than two states");
  return s.states.leftCols(s.states.cols() - 1);
}

GenerateReport cmd_generate(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const RunPaths paths{cfg.out_dir};
  fs::create_directories(paths.dir);
  PdeConfig ext = cfg.pde;
  ext.nt = cfg.pde.nt * cfg.horizon_factor;
  ext.t_end = cfg.pde.t_end * static_cast<double>(cfg.horizon_factor);
  const auto t0 = std::chrono::steady_clock::now();
  const Trajectory traj = generate(ext);
  const Index keep = cfg.pde.nt + 1;

  SnapshotFile s{source_of(cfg.pde.kind), traj.dt, traj.n1, traj.n2, traj.states.leftCols(keep)};
  write_snapshots(paths.snapshots(), s);
  s.states = traj.states;
  write_snapshots(paths.extended(), s);

  CsvTable h({"step", "t", "H", "rel_drift"});
  const double h0 = traj.hamiltonian.front();
  double drift = 0.0;
  for (Index i = 0; i < keep; ++i) {
    const double hi = traj.hamiltonian[static_cast<std::size_t>(i)];
    const double rel = std::abs(hi - h0) / std::max(std::abs(h0), 1e-300);
    drift = std::max(drift, rel);
    h.add_row({std::to_string(i), format_number(traj.times[static_cast<std::size_t>(i)]), format_number(hi),
               format_number(rel)});
  }
  h.write(paths.hamiltonian());
  log << "generate: " << to_string(cfg.pde.kind) << " " << keep << " states of dim " << traj.states.rows()
      << ", max relative H drift " << format_number(drift) << " (" << format_number(seconds_since(t0)) << " s)\n";
  return {keep, traj.states.rows(), drift};
}

std::vector<TrainReport> cmd_train_ae(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const RunPaths paths{cfg.out_dir};
  const Mat X = training_matrix(load_snapshots(cfg, paths.snapshots()));
  std::vector<TrainReport> out;
  for (Index r : cfg.r_list) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(stage_seed(cfg.seed, 1, r));
    Autoencoder ae = build_autoencoder(cfg.model_for(r), rng);
    ae.freeze_pooling(X.col(0));
    TrainConfig tc = cfg.train;
    tc.seed = stage_seed(cfg.seed, 2, r);
    const Index every = std::max<Index>(1, tc.epochs / 10);
    const auto hist = train_autoencoder(ae, X, tc, [&](const EpochRecord& e) {
      if (e.epoch % every == 0 || e.epoch == tc.epochs) {
        log << "train-ae r=" << r << " epoch " << e.epoch << " loss " << format_number(e.loss) << "\n";
        log.flush();
      }
    });
    Checkpoint ck = make_checkpoint(ae);
    ck.meta["r"] = std::to_string(r);
    ck.meta["seed"] = std::to_string(cfg.seed);
    ck.meta["epochs"] = std::to_string(tc.epochs);
    write_checkpoint(paths.autoencoder(r), ck);
    write_loss(paths.ae_loss(r), hist);
    TrainReport rep{r, hist.empty() ? 0.0 : hist.back().loss, seconds_since(t0)};
    log << "train-ae r=" << r << " done in " << format_number(rep.seconds) << " s\n";
    out.push_back(rep);
  }
  return out;
}

std::vector<TrainReport> cmd_train_psd(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const RunPaths paths{cfg.out_dir};
  const Mat X = training_matrix(load_snapshots(cfg, paths.snapshots()));
  std::vector<TrainReport> out;
  for (Index r : cfg.r_list) {
    const auto t0 = std::chrono::steady_clock::now();
    PsdFitReport fit;
    const PsdBasis basis = psd_fit(X, r, &fit);
    if (fit.padded) log << "train-psd r=" << r << ": k exceeds numerical rank " << fit.numerical_rank << ", basis padded\n";
    Checkpoint ck = make_checkpoint(basis);
    ck.meta["r"] = std::to_string(r);
    write_checkpoint(paths.psd(r), ck);
    const Mat Y = basis.decode_all(basis.encode_all(X));
    TrainReport rep{r, (X - Y).squaredNorm(), seconds_since(t0)};
    log << "train-psd r=" << r << " squared error " << format_number(rep.final_loss) << " ("
        << format_number(rep.seconds) << " s)\n";
    out.push_back(rep);
  }
  return out;
}

std::vector<MetricsRow> cmd_eval(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const RunPaths paths{cfg.out_dir};
  const SnapshotFile snaps = load_snapshots(cfg, paths.snapshots());
  const Mat X = training_matrix(snaps);
  CsvTable metrics({"r", "eps_psd", "eps_sympcae"});
  std::vector<MetricsRow> out;
  std::string fields = matrix_csv(position_field(cfg, X));
  write_file_atomic(paths.field("true"), fields);
  for (Index r : cfg.r_list) {
    const PsdBasis basis = psd_basis_from(load_checkpoint(paths.psd(r), "train-psd"));
    const Autoencoder ae = autoencoder_from(load_checkpoint(paths.autoencoder(r), "train-ae"));
    if (basis.n() != cfg.pde.half_dim() || ae.encoder.in_dim() != X.rows()) {
      throw ShapeError("checkpoints for r=" + std::to_string(r) + " do not match the snapshot dimension");
    }
    const Mat Yp = basis.decode_all(basis.encode_all(X));
    const Mat Ya = reconstruct_all(ae, X);
    MetricsRow row{r, relative_frobenius_error(X, Yp), relative_frobenius_error(X, Ya)};
    if (!std::isfinite(row.eps_sympcae)) throw NumericError("non-finite reconstruction for r=" + std::to_string(r));
    metrics.add_row({std::to_string(r), format_number(row.eps_psd), format_number(row.eps_sympcae)});

    const Vec ep = relative_column_errors(X, Yp);
    const Vec ea = relative_column_errors(X, Ya);
    CsvTable te({"step", "t", "eps_psd", "eps_sympcae"});
    for (Index j = 0; j < X.cols(); ++j) {
      te.add_row({std::to_string(j), format_number(static_cast<double>(j) * snaps.dt), format_number(ep[j]),
                  format_number(ea[j])});
    }
    te.write(paths.time_errors(r));
    write_file_atomic(paths.field("psd_r" + std::to_string(r)), matrix_csv(position_field(cfg, Yp)));
    write_file_atomic(paths.field("sympcae_r" + std::to_string(r)), matrix_csv(position_field(cfg, Ya)));
    log << "eval r=" << r << " eps_psd " << format_number(row.eps_psd) << " eps_sympcae "
        << format_number(row.eps_sympcae) << "\n";
    out.push_back(row);
  }
  metrics.write(paths.metrics());
  return out;
}

double LatentReport::max_error() const {
  return errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end());
}

double LatentReport::train_mean() const {
  const Index n = std::min<Index>(train_steps + 1, static_cast<Index>(errors.size()));
  if (n == 0) return 0.0;
  return std::accumulate(errors.begin(), errors.begin() + n, 0.0) / static_cast<double>(n);
}

double LatentReport::test_mean() const {
  const Index first = train_steps + 1;
  if (static_cast<Index>(errors.size()) <= first) return 0.0;
  return std::accumulate(errors.begin() + first, errors.end(), 0.0) /
         static_cast<double>(static_cast<Index>(errors.size()) - first);
}

std::vector<LatentReport> cmd_latent(const ExperimentConfig& cfg, std::ostream& log) {
  cfg.validate();
  const RunPaths paths{cfg.out_dir};
  const SnapshotFile snaps = load_snapshots(cfg, paths.snapshots());
  const SnapshotFile ext = load_snapshots(cfg, paths.extended());
  const Index steps = cfg.pde.nt * cfg.horizon_factor;
  if (ext.states.cols() != steps + 1) throw ShapeError("extended snapshot file does not cover the test horizon");
  std::vector<LatentReport> out;
  for (Index r : cfg.r_list) {
    const Autoencoder ae = autoencoder_from(load_checkpoint(paths.autoencoder(r), "train-ae"));
    Mat Z(2 * r, snaps.states.cols());
    for (Index j = 0; j < Z.cols(); ++j) Z.col(j) = ae.encode(snaps.states.col(j));

    Rng rng(stage_seed(cfg.seed, 3, r));
    SympNetSpec ns = cfg.latent.net;
    ns.half_dim = r;
    ModelGraph phi = build_sympnet(ns, rng);
    TrainConfig tc = cfg.latent.train;
    tc.seed = stage_seed(cfg.seed, 4, r);
    const Index every = std::max<Index>(1, tc.epochs / 10);
    const auto hist = sympnet_train(phi, Z, tc, [&](const EpochRecord& e) {
      if (e.epoch % every == 0 || e.epoch == tc.epochs) {
        log << "latent r=" << r << " epoch " << e.epoch << " loss " << format_number(e.loss) << "\n";
        log.flush();
      }
    });
    Checkpoint ck = make_sympnet_checkpoint(phi);
    ck.meta["r"] = std::to_string(r);
    ck.meta["seed"] = std::to_string(cfg.seed);
    write_checkpoint(paths.sympnet(r), ck);
    write_loss(paths.sympnet_loss(r), hist);

    const LatentRollout roll = sympnet_rollout(phi, Z.col(0), steps);
    write_snapshots(paths.latent_states(r), {SnapshotSource::Latent, snaps.dt, r, 1, roll.states});

    LatentReport rep;
    rep.r = r;
    rep.train_steps = cfg.pde.nt;
    rep.diverged = roll.diverged;
    CsvTable t({"step", "t", "rel_time_err", "window"});
    for (Index j = 0; j < roll.states.cols(); ++j) {
      const Vec x = ext.states.col(j);
      const double e = (x - ae.decode(roll.states.col(j))).norm() / x.norm();
      rep.errors.push_back(e);
      t.add_row({std::to_string(j), format_number(static_cast<double>(j) * snaps.dt), format_number(e),
                 j <= cfg.pde.nt ? "train" : "test"});
    }
    t.write(paths.latent_errors(r));
    log << "latent r=" << r << " max rel_time_err " << format_number(rep.max_error()) << " (train mean "
        << format_number(rep.train_mean()) << ", test mean " << format_number(rep.test_mean()) << ")\n";
    if (roll.diverged) {
      throw NumericError("latent rollout for r=" + std::to_string(r) + " became non-finite", roll.failed_step);
    }
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace sympcae
