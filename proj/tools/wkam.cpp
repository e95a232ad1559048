#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wkam/commands.hpp"
#include "wkam/parallel.hpp"

namespace {

int run_report(const std::string& out_dir) {
  namespace fs = std::filesystem;
  bool any = false;
  const auto dump_json = [&](const std::string& file, const std::string& title) {
    const fs::path path = fs::path(out_dir) / file;
    if (!fs::exists(path)) return;
    any = true;
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    std::cout << "== " << title << " (" << path.string() << ")\n" << j.dump(2) << "\n";
  };
  dump_json("certificate.json", "critical certificate");
  dump_json("mather_checks.json", "Mather LP and checks");
  const fs::path grushin = fs::path(out_dir) / "grushin_report.txt";
  if (fs::exists(grushin)) {
    any = true;
    std::cout << "== grushin demo (" << grushin.string() << ")\n"
              << std::ifstream(grushin).rdbuf() << "\n";
  }
  if (!any) {
    std::cout << "no run artifacts found in " << out_dir << "\n";
    return wkam::kExitConfigError;
  }
  return wkam::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weak-KAM / Aubry-Mather solver for control-affine systems on the torus"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  int threads = 1;

  for (const char* verb : {"critical", "aubry", "mather", "grushin-demo", "report"}) {
    auto* sub = app.add_subcommand(verb);
    sub->add_option("--config", config_path, "path to the JSON run configuration");
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--out", out_override, "override the output directory");
    sub->add_option("--threads", threads, "worker threads (speed only, never results)");
  }

  CLI11_PARSE(app, argc, argv);
  wkam::thread_count() = threads;
  const std::string verb = app.get_subcommands().front()->get_name();

  try {
    if (verb == "report") {
      return run_report(out_override.value_or("out"));
    }
    if (config_path.empty()) throw wkam::ConfigError("--config is required");
    wkam::RunConfig cfg = wkam::load_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (out_override) cfg.output_dir = *out_override;

    if (verb == "critical") {
      const auto bundle = wkam::cmd_critical(cfg);
      std::cout << "c_longtime " << bundle.cert.c_longtime << "  c_ergodic "
                << bundle.cert.c_ergodic << "  c_lower " << bundle.cert.c_lower << "  c_upper "
                << bundle.cert.c_upper << "  gap " << bundle.cert.gap << "\n";
    } else if (verb == "aubry") {
      const auto out = wkam::cmd_aubry(cfg);
      std::cout << "aubry set: " << out.aubry.nodes.size() << " nodes (eps " << out.aubry.eps_used
                << ", c " << out.c << ")\n";
    } else if (verb == "mather") {
      const auto out = wkam::cmd_mather(cfg);
      std::cout << "LP value " << out.lp.value << ", support " << out.lp.mu.atoms.size()
                << " atoms, inclusion " << (out.inclusion.ok ? "ok" : "FAILED")
                << ", graph residual " << out.graph_residual << "\n";
    } else if (verb == "grushin-demo") {
      const auto rep = wkam::cmd_grushin_demo(cfg);
      std::cout << "c_est " << rep.c_est << " <= bound " << rep.rhs << " : ok\n";
    }
    return wkam::kExitOk;
  } catch (const wkam::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return wkam::kExitConfigError;
  } catch (const wkam::NonConvergence& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return wkam::kExitNonConvergence;
  } catch (const wkam::SandwichViolation& e) {
    std::cerr << "check failure: " << e.what() << "\n";
    return wkam::kExitCheckFailure;
  } catch (const wkam::CheckFailure& e) {
    std::cerr << "check failure: " << e.what() << "\n";
    return wkam::kExitCheckFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
