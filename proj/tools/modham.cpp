#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "modham/cli.hpp"

using namespace modham;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discretized modular Hamiltonians of the free scalar field in 1+1 dimensions"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(MODHAM_VERSION));

  std::map<std::string, std::string> single;
  std::map<std::string, std::vector<std::string>> repeated;
  std::map<std::string, CLI::Option*> given;
  auto add = [&](const std::string& key, const std::string& help) {
    given[key] = app.add_option("--" + key, single[key], help);
  };
  auto add_list = [&](const std::string& key, const std::string& help) {
    given[key] = app.add_option("--" + key, repeated[key], help)->delimiter(',');
  };
  add("region", "wedge | interval");
  add("edge", "wedge edge (a grid node)");
  add("left", "interval left end (a grid node)");
  add("right", "interval right end (a grid node)");
  add_list("mass", "mass m > 0; repeat or comma-separate for a ladder");
  add("cells", "number of grid cells N on [-b, b]");
  add("halfwidth", "box half-width b");
  add("digits", "working decimal digits (default 300 or $MODHAM_DIGITS)");
  add("mode", "standard | split");
  add("sigma", "probe width (default 0.05 x region extent)");
  add_list("mu", "probe centre; repeat or comma-separate");
  add("mu-range", "probe centres lo:hi:step");
  add("out", "output path, - for standard output");
  add_list("rung", "convergence rung N:b:digits; repeat or comma-separate");
  bool complement = false;
  bool full_precision = false;
  auto* complement_flag = app.add_flag("--complement", complement, "use the complement of the region");
  auto* full_flag = app.add_flag("--full-precision", full_precision, "write every digit instead of 30");
  bool allow_small_box = false;
  auto* small_box_flag = app.add_flag("--allow-small-box", allow_small_box, "skip the b >= 2 max|boundary| check");
  std::string config_file;
  app.add_option("--config", config_file, "key = value file; flags override it");
  double tolerance_scale = 1.0;
  app.add_option("--tolerance-scale", tolerance_scale, "loosen the quadrature tolerance (selfcheck fault injection)")
      ->group("");

  auto* kernel = app.add_subcommand("kernel", "write M_-(x, y) on the grid nodes as x,y,value");
  auto* scan = app.add_subcommand("scan", "write smeared M_- per probe centre as mu,value,analytic_ref,abs_gap");
  auto* converge = app.add_subcommand("converge", "repeat a scan over (N, b, digits) rungs");
  auto* selfcheck = app.add_subcommand("selfcheck", "run the built-in consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigFailure;
  }

  try {
    if (selfcheck->parsed()) {
      cli::SelfcheckOptions options;
      if (given["digits"]->count() > 0) options.digits = std::stoi(single["digits"]);
      options.tolerance_scale = tolerance_scale;
      return cli::cmd_selfcheck(options, std::cout, std::cerr);
    }

    cli::RunConfig config = cli::default_config();
    if (!config_file.empty()) cli::load_config_file(config, config_file);
    for (const auto& [key, option] : given) {
      if (option->count() == 0) continue;
      if (repeated.count(key) > 0)
        cli::apply_setting(config, key, join(repeated[key]));
      else
        cli::apply_setting(config, key, single[key]);
    }
    if (complement_flag->count() > 0) config.complement = complement;
    if (full_flag->count() > 0) config.full_precision = full_precision;
    if (small_box_flag->count() > 0) config.allow_small_box = allow_small_box;

    if (kernel->parsed()) return cli::cmd_kernel(config, std::cerr);
    if (scan->parsed()) return cli::cmd_scan(config, std::cerr);
    if (converge->parsed()) return cli::cmd_converge(config, std::cerr);
  } catch (const ForbiddenSpectrum& e) {
    std::cerr << "modham: spectral failure: " << e.what() << "\n";
    return cli::kSpectralFailure;
  } catch (const cli::ConfigError& e) {
    std::cerr << "modham: configuration error: " << e.what() << "\n";
    return cli::kConfigFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "modham: configuration error: " << e.what() << "\n";
    return cli::kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "modham: error: " << e.what() << "\n";
    return cli::kSpectralFailure;
  }
  return cli::kConfigFailure;
}
