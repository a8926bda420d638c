#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>

#include <CLI11.hpp>

#include "cyclicpls/errors.hpp"
#include "cyclicpls/report.hpp"
#include "cyclicpls/simgen.hpp"

namespace cpls::cli {

namespace {

struct EstimationFlags {
  std::string model;
  std::string data;
  std::string out;
  std::string format = "json";
  std::string scheme;
  std::string missing = "listwise";
  std::string direction = "ce_gt_se";
  int bootstrap = 500;
  double level = 0.95;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int max_iter = 300;
  bool target_controls = false;
  unsigned threads = 0;
};

void add_estimation_flags(CLI::App* cmd, EstimationFlags& f, bool cyclic) {
  cmd->add_option("--model", f.model, "model document (JSON)")->required();
  cmd->add_option("--data", f.data, "CSV data file")->required();
  cmd->add_option("--out", f.out, "report path (stdout when omitted)");
  cmd->add_option("--format", f.format, "json, text or both")
      ->check(CLI::IsMember({"json", "text", "both"}));
  cmd->add_option("--bootstrap", f.bootstrap, "bootstrap replicates (0 disables)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--level", f.level, "confidence level");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--scheme", f.scheme, "inner weighting scheme")
      ->check(CLI::IsMember({"centroid", "factorial", "path"}));
  cmd->add_option("--tol", f.tol, "outer-weight convergence tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", f.max_iter, "iteration cap")->check(CLI::PositiveNumber);
  cmd->add_option("--missing", f.missing, "listwise or mean")
      ->check(CLI::IsMember({"listwise", "mean"}));
  cmd->add_option("--threads", f.threads, "bootstrap worker threads (0: all cores)");
  if (cyclic) {
    cmd->add_option("--direction", f.direction, "reinforcement test alternative")
        ->check(CLI::IsMember({"ce_gt_se", "se_gt_ce", "two_sided"}));
    cmd->add_flag("--target-controls", f.target_controls,
                  "keep sequential paths among targets in the step-2 model");
  }
}

RunConfig to_config(const EstimationFlags& f) {
  RunConfig c;
  c.missing = parse_missing_policy(f.missing);
  c.pls.tol = f.tol;
  c.pls.max_iter = f.max_iter;
  if (!f.scheme.empty()) c.pls.scheme = parse_scheme(f.scheme);
  c.bootstrap = f.bootstrap;
  c.level = f.level;
  c.seed = f.seed;
  c.direction = parse_direction(f.direction);
  c.include_target_paths = f.target_controls;
  c.threads = f.threads;
  if (c.bootstrap > 0 && c.bootstrap < 100) {
    throw ValidationError("--bootstrap needs 0 or at least 100 replicates");
  }
  if (!(c.level > 0.0 && c.level < 1.0)) throw ValidationError("--level must lie in (0, 1)");
  return c;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write '" + path + "'");
  file << content;
  if (!file) throw IoError("write to '" + path + "' failed");
}

void emit(const RunResult& result, const RunConfig& config, const EstimationFlags& f,
          std::ostream& out) {
  const std::string json_text = report_json(result, config).dump(2) + "\n";
  const std::string text = report_text(result, config);
  if (f.out.empty()) {
    if (f.format != "text") out << json_text;
    if (f.format != "json") out << text;
    return;
  }
  if (f.format == "json") {
    write_file(f.out, json_text);
  } else if (f.format == "text") {
    write_file(f.out, text);
  } else {
    write_file(f.out, json_text);
    write_file(f.out + ".txt", text);
  }
}

int guarded(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kOk;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::invalid_argument& e) {
    err << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const EstimationError& e) {
    err << "estimation error: " << e.what() << '\n';
    return kEstimation;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"PLS path modeling with two-step cyclic effect estimation", "cyclicpls"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  EstimationFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "estimate the sequential model");
  add_estimation_flags(fit_cmd, fit_flags, false);

  EstimationFlags cyc_flags;
  auto* cyc_cmd = app.add_subcommand("cyclic", "two-step cyclic estimation and reinforcement tests");
  add_estimation_flags(cyc_cmd, cyc_flags, true);

  std::string population;
  std::string sim_out;
  std::optional<std::uint64_t> sim_seed;
  std::optional<Eigen::Index> sim_n;
  auto* sim_cmd = app.add_subcommand("simulate", "generate synthetic data from a population");
  sim_cmd->add_option("--population", population, "population document (JSON)")->required();
  sim_cmd->add_option("--out", sim_out, "CSV output; ground truth goes to <stem>.truth.json")
      ->required();
  sim_cmd->add_option("--seed", sim_seed, "override the population seed");
  sim_cmd->add_option("--n", sim_n, "override the sample size");

  std::string val_model;
  std::string val_data;
  auto* val_cmd = app.add_subcommand("validate", "check a model document (and data columns)");
  val_cmd->add_option("--model", val_model, "model document (JSON)")->required();
  val_cmd->add_option("--data", val_data, "CSV data file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kValidation;
  }

  if (*fit_cmd || *cyc_cmd) {
    const bool cyclic = static_cast<bool>(*cyc_cmd);
    const EstimationFlags& f = cyclic ? cyc_flags : fit_flags;
    return guarded(
        [&] {
          const RunConfig config = to_config(f);
          const ModelSpec spec = load_model(f.model);
          const RawTable raw = load_table(f.data);
          const RunResult result = cyclic ? run_cyclic(spec, raw, config) : run_fit(spec, raw, config);
          emit(result, config, f, out);
        },
        err);
  }

  if (*sim_cmd) {
    return guarded(
        [&] {
          PopulationSpec pop = load_population(population);
          if (sim_seed) pop.seed = *sim_seed;
          if (sim_n) pop.n = *sim_n;
          const RawTable table = generate(pop);
          std::ostringstream csv;
          write_table(csv, table);
          write_file(sim_out, csv.str());
          const auto sidecar = std::filesystem::path(sim_out).replace_extension(".truth.json");
          write_file(sidecar.string(), population_sidecar(pop).dump(2) + "\n");
        },
        err);
  }

  return guarded(
      [&] {
        const ModelSpec spec = load_model(val_model);
        ValidationReport report;
        if (val_data.empty()) {
          report = validate_model(spec);
        } else {
          const RawTable raw = load_table(val_data);
          report = validate_model(spec, {raw.header.begin(), raw.header.end()});
        }
        if (report.ok()) {
          out << "model is estimable\n";
          return;
        }
        for (const auto& v : report.violations) out << v.code << ": " << v.message << '\n';
        throw ValidationError(std::to_string(report.violations.size()) + " violation(s)");
      },
      err);
}

}  // namespace cpls::cli
