// qlsfi command-line driver.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qls/error.hpp"
#include "qls/io/pipeline.hpp"
#include "qls/parallel.hpp"

namespace {

const char* kind_name(qls::ErrorKind k) {
  switch (k) {
    case qls::ErrorKind::InvalidParameter: return "config";
    case qls::ErrorKind::Numerical: return "numerical";
    case qls::ErrorKind::Io: return "io";
  }
  return "unknown";
}

int report(int code, const std::string& kind, const std::string& tag, const std::string& message) {
  nlohmann::json rec{{"error", tag}, {"kind", kind}, {"exit_code", code}, {"message", message}};
  std::cerr << rec.dump() << "\n";
  return code;
}

int resolve_threads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("QLS_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw qls::Error(qls::ErrorKind::Config, "config", std::string("QLS_THREADS must be a positive integer, got '") + env + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strong-field ionization driven by quantum light"};
  app.require_subcommand(1);

  std::string config_path, output_dir = ".", tier;
  std::vector<std::string> overrides;
  int threads = 0;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--output", output_dir, "Directory for result containers");
  app.add_option("--threads", threads, "Worker threads (default: QLS_THREADS or hardware)");
  app.add_option("--set", overrides, "Dotted-path override key=value (repeatable)")->take_all();
  app.add_option("--tier", tier, "Preset tier")->check(CLI::IsMember(qls::tier_names()));

  auto sub = [&](const char* name, const char* help) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };
  auto* ground = sub("ground-state", "Field-free ground state");
  auto* full = sub("run-full", "Joint electron-photon propagation");
  auto* qrep = sub("run-qrep", "Q-representation ensemble");
  auto* rrep = sub("run-rrep", "R-representation ensemble");
  auto* spectrum = sub("spectrum", "Classical-drive photoelectron spectrum");
  auto* pdist = sub("photon-dist", "Initial and Q-representation photon distributions");
  auto* quad = sub("quadrature-check", "Resolution-of-identity check of the alpha quadrature");

  auto* compare = sub("compare", "Compare one array of two containers");
  std::string file_a, file_b, array_name = "pes", metric = "l1";
  compare->add_option("a", file_a, "First container")->required();
  compare->add_option("b", file_b, "Second container")->required();
  compare->add_option("--array", array_name, "Array name");
  compare->add_option("--metric", metric, "l1 | linf");

  auto* converge = sub("converge", "Convergence sweep along one axis");
  std::string axis;
  std::vector<double> levels;
  converge->add_option("--axis", axis, "dt | nx | band | quadrature")->required();
  converge->add_option("--levels", levels, "Comma-separated levels (>= 3)")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(2, "config", "usage", e.what());
  }

  try {
    const int n_threads = resolve_threads(threads);
    if (n_threads > 0) qls::set_default_threads(n_threads);

    if (*compare) {
      const auto a = qls::Container::read(file_a);
      const auto b = qls::Container::read(file_b);
      const double v = qls::compare_arrays(a, b, array_name, metric);
      std::cout << nlohmann::json{{"array", array_name}, {"metric", metric}, {"value", v}}.dump() << "\n";
      return 0;
    }

    nlohmann::json doc = nlohmann::json::object();
    const qls::RunConfig cfg = config_path.empty() ? qls::resolve_config(doc, tier, overrides)
                                                   : qls::load_config(config_path, tier, overrides);

    qls::Container out;
    std::string name;
    if (*converge) {
      out = qls::run_converge(cfg, axis, levels, n_threads);
      name = "converge-" + axis;
    } else {
      const qls::Setup s = qls::make_setup(cfg, n_threads);
      if (*ground) out = qls::run_ground_state(s), name = "ground-state";
      else if (*full) out = qls::run_full(s), name = "run-full";
      else if (*qrep) out = qls::run_qrep(s).container, name = "run-qrep";
      else if (*rrep) out = qls::run_rrep(s).container, name = "run-rrep";
      else if (*spectrum) out = qls::run_spectrum(s), name = "spectrum";
      else if (*pdist) out = qls::run_photon_dist(s), name = "photon-dist";
      else if (*quad) out = qls::run_quadrature_check(s), name = "quadrature-check";
    }

    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec) throw qls::Error(qls::ErrorKind::Io, "io", "cannot create '" + output_dir + "': " + ec.message());
    const std::string path = (std::filesystem::path(output_dir) / (name + ".qls")).string();
    out.write(path);
    for (const auto& w : out.diagnostics.value("warnings", nlohmann::json::array()))
      std::cerr << "warning: " << w.get<std::string>() << "\n";
    std::cout << path << "\n";
    return 0;
  } catch (const qls::Error& e) {
    return report(e.exit_code(), kind_name(e.kind()), e.tag(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return report(2, "config", "config", e.what());
  } catch (const std::bad_alloc&) {
    return report(3, "numerical", "out-of-memory", "allocation failed");
  } catch (const std::exception& e) {
    return report(3, "numerical", "internal", e.what());
  }
}
