#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sympcae/config.hpp"
#include "sympcae/experiment.hpp"
#include "sympcae/verify.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Options {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<long> r;
};

sympcae::ExperimentConfig resolve(const Options& o) {
  if (!o.config.empty() && !o.preset.empty()) throw sympcae::ConfigError("--config and --preset are exclusive");
  sympcae::ExperimentConfig c;
  if (!o.config.empty()) {
    c = sympcae::load_config(o.config);
  } else {
    c = sympcae::preset(o.preset.empty() ? "wave-desk" : o.preset);
    c.out_dir = "out/" + c.name;
  }
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.out_dir = o.out;
  if (!o.r.empty()) c.r_list.assign(o.r.begin(), o.r.end());
  c.validate();
  return c;
}

int exit_code(const sympcae::Error& e) {
  return e.kind() == sympcae::ErrorKind::Numeric ? kExitNumeric : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symplectic convolutional autoencoders and latent SympNets"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "Experiment config file")->check(CLI::ExistingFile);
  app.add_option("--preset", o.preset, "Built-in preset (wave|nls|sg)-(desk|paper)");
  app.add_option("--seed", o.seed, "Override the run seed");
  app.add_option("--out", o.out, "Output directory");

  auto* generate = app.add_subcommand("generate", "Integrate the PDE and write snapshot files");
  auto* train_ae = app.add_subcommand("train-ae", "Train the symplectic autoencoder for each r");
  auto* train_psd = app.add_subcommand("train-psd", "Fit the PSD basis for each r");
  auto* eval = app.add_subcommand("eval", "Write reconstruction metrics and field grids");
  auto* latent = app.add_subcommand("latent", "Train a SympNet on latent trajectories and roll it out");
  auto* verify = app.add_subcommand("verify", "Run the structural self-check suite");
  auto* show = app.add_subcommand("show-config", "Print the resolved configuration");
  auto* run = app.add_subcommand("run", "generate, train-psd, train-ae, eval and latent in sequence");
  for (auto* sub : {train_ae, train_psd, eval, latent, run}) {
    sub->add_option("-r,--latent", o.r, "Latent dimensions (overrides the config r list)")->delimiter(',');
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      const auto results = sympcae::run_verify(o.seed.value_or(1234), std::cout);
      for (const auto& r : results) {
        if (!r.ok) return kExitNumeric;
      }
      return 0;
    }
    const sympcae::ExperimentConfig cfg = resolve(o);
    if (show->parsed()) {
      std::cout << sympcae::to_ini(cfg);
    } else if (generate->parsed()) {
      sympcae::cmd_generate(cfg, std::cout);
    } else if (train_ae->parsed()) {
      sympcae::cmd_train_ae(cfg, std::cout);
    } else if (train_psd->parsed()) {
      sympcae::cmd_train_psd(cfg, std::cout);
    } else if (eval->parsed()) {
      sympcae::cmd_eval(cfg, std::cout);
    } else if (latent->parsed()) {
      sympcae::cmd_latent(cfg, std::cout);
    } else if (run->parsed()) {
      sympcae::cmd_generate(cfg, std::cout);
      sympcae::cmd_train_psd(cfg, std::cout);
      sympcae::cmd_train_ae(cfg, std::cout);
      sympcae::cmd_eval(cfg, std::cout);
      if (cfg.pde.kind != sympcae::PdeKind::SineGordon) sympcae::cmd_latent(cfg, std::cout);
    }
  } catch (const sympcae::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
