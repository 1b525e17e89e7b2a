#include <iostream>

#include <CLI11.hpp>

#include "cmv/cli.hpp"
#include "cmv/error.hpp"

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> inputs;
  std::string out;
  std::string lexicons;
  std::string format;
  std::string variant;
  std::string task;
  std::string pos_sidecar;
  std::optional<std::uint64_t> seed;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON run configuration");
  sub->add_option("--input", f.inputs, "Input corpus file (repeatable)");
  sub->add_option("--out", f.out, "Workspace directory");
  sub->add_option("--lexicons", f.lexicons, "Resource directory");
  sub->add_option("--format", f.format, "Input format: normalized or cmv_dump");
  sub->add_option("--variant", f.variant, "root-reply, full-path or root-truncated");
  sub->add_option("--task", f.task, "pair or malleability");
  sub->add_option("--pos-sidecar", f.pos_sidecar, "Pre-tagged comments file");
  sub->add_option("--seed", f.seed, "Random seed");
}

cmv::cli::RunConfig resolve(const Flags& f) {
  auto cfg = f.config.empty() ? cmv::cli::RunConfig{} : cmv::cli::load_config(f.config);
  if (!f.inputs.empty()) cfg.inputs = f.inputs;
  if (!f.out.empty()) cfg.out = f.out;
  if (!f.lexicons.empty()) cfg.lexicons = f.lexicons;
  if (!f.format.empty()) cfg.input_format = f.format;
  if (!f.variant.empty()) cfg.variant = f.variant;
  if (!f.task.empty()) cfg.task = f.task;
  if (!f.pos_sidecar.empty()) cfg.pos_sidecar = f.pos_sidecar;
  if (f.seed) cfg.seed = f.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persuasion analysis pipeline for ChangeMyView discussion trees"};
  app.require_subcommand(1);
  Flags flags;
  using Cmd = void (*)(const cmv::cli::RunConfig&);
  const std::vector<std::tuple<std::string, std::string, Cmd>> commands{
      {"ingest", "Validate and normalize input trees", cmv::cli::cmd_ingest},
      {"dynamics", "Interaction-dynamics tables", cmv::cli::cmd_dynamics},
      {"pairs", "Matched argument pairs and malleability instances", cmv::cli::cmd_pairs},
      {"features", "Feature matrices", cmv::cli::cmd_features},
      {"train", "Fit and cross-validate models", cmv::cli::cmd_train},
      {"eval", "Heldout evaluation against the word-count baseline", cmv::cli::cmd_eval},
      {"significance", "Per-feature significance tables", cmv::cli::cmd_significance},
      {"run", "Every stage in order", cmv::cli::cmd_run},
  };
  std::string chosen;
  Cmd cmd = nullptr;
  for (const auto& [name, help, fn] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_flags(sub, flags);
    sub->callback([&chosen, &cmd, name = name, fn = fn] {
      chosen = name;
      cmd = fn;
    });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cmv::cli::kValidation;
  }
  cmv::cli::RunConfig cfg;
  try {
    cfg = resolve(flags);
  } catch (const cmv::Error& e) {
    std::cerr << "cmv " << chosen << ": " << e.what() << "\n";
    return cmv::cli::kValidation;
  }
  return cmv::cli::guarded(chosen, cmd, cfg);
}
