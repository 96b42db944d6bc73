#include "modham/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "oracles.hpp"

#ifndef MODHAM_VERSION
#define MODHAM_VERSION "unknown"
#endif

namespace modham::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
  return out;
}

int parse_int(const std::string& key, const std::string& text) {
  int value = 0;
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const auto t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

Real parse_real(const PrecisionContext& ctx, const std::string& key, const std::string& text) {
  try {
    return Real(ctx, trim(text));
  } catch (const ParseError&) {
    throw ConfigError(key + ": '" + text + "' is not a decimal number");
  }
}

Rung parse_rung(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("rung: expected N:b:digits, got '" + text + "'");
  return Rung{parse_int("rung", parts[0]), parts[1], parse_int("rung", parts[2])};
}

std::string rung_text(const Rung& r) {
  return std::to_string(r.cells) + ":" + r.half_width + ":" + std::to_string(r.digits);
}

PrecisionContext context_for(int digits) {
  try {
    return PrecisionContext(digits);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("digits: ") + e.what());
  }
}

PipelineConfig pipeline_config(const PrecisionContext& ctx, const RunConfig& config, const std::string& mass, int cells,
                               const std::string& half_width) {
  PipelineConfig p{make_region(ctx, config), parse_real(ctx, "mass", mass), cells,
                   parse_real(ctx, "halfwidth", half_width), parse_basis_mode(config.mode), APowerOptions{}};
  p.compute_plus = false;
  return p;
}

void check_probes(const PrecisionContext& ctx, const RunConfig& config, const std::string& half_width) {
  const auto mus = probe_centres(ctx, config);
  if (mus.empty()) return;
  const Real b = parse_real(ctx, "halfwidth", half_width);
  const Real sigma = probe_width(ctx, config);
  for (const Real& mu : mus)
    if (!(abs(mu) + sigma * 6 < b))
      throw ConfigError("probe at mu = " + mu.to_string(10) + " with sigma = " + sigma.to_string(6) +
                        " reaches the box edge (|mu| + 6 sigma >= b = " + half_width + ")");
}

std::string header(const std::string& command, const RunConfig& config) {
  std::ostringstream h;
  h << "# modham " << MODHAM_VERSION << "\n# command: " << command << "\n";
  for (const auto& [k, v] : echo(config)) h << "# config: " << k << " = " << v << "\n";
  return h.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content << std::flush;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  f << content;
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

std::string spectrum_summary(const ModularResult& r) {
  std::ostringstream h;
  h << "# digits: " << r.grid.context().decimal_digits() << "\n";
  h << "# basis_size: " << r.basis.size() << "\n";
  h << "# structural_dim: " << r.structural_dim << " (eigenvalue " << r.structural_eigenvalue << ")\n";
  h << "# min_gap: " << r.min_gap.to_string(6) << "\n";
  h << "# epsilon: " << r.epsilon.to_string(6) << "\n";
  if (!r.b_eigenvalues.empty()) {
    h << "# lambda_min: " << r.b_eigenvalues.front().to_string(12) << "\n";
    h << "# lambda_max: " << r.b_eigenvalues.back().to_string(12) << "\n";
  }
  h << "# chi_idempotence: " << r.chi_idempotence.to_string(6) << "\n";
  h << "# quadrature_error: " << r.quadrature.error_estimate.to_string(6) << " (level " << r.quadrature.level << ")\n";
  for (const auto& w : r.warnings) h << "# warning: " << w << "\n";
  return h.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ModularResult run_logged(const PrecisionContext& ctx, const PipelineConfig& p, const std::string& mass,
                         std::ostream& progress) {
  progress << "modham: " << p.region.describe() << " m=" << mass << " N=" << p.n_cells
           << " b=" << p.half_width.to_string(6) << " digits=" << ctx.decimal_digits() << std::endl;
  const auto t0 = std::chrono::steady_clock::now();
  ModularResult r = run_pipeline(ctx, p);
  progress << "modham: pipeline done in " << std::fixed << std::setprecision(1) << seconds_since(t0)
           << std::defaultfloat << " s, min_gap " << r.min_gap.to_string(3) << std::endl;
  for (const auto& w : r.warnings) progress << "modham: warning: " << w << std::endl;
  return r;
}

}  // namespace

RunConfig default_config() {
  RunConfig c;
  if (const char* env = std::getenv("MODHAM_DIGITS"); env != nullptr && *env != '\0')
    c.digits = parse_int("MODHAM_DIGITS", env);
  return c;
}

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "region") {
    c.region = value;
  } else if (key == "edge") {
    c.edge = value;
  } else if (key == "left") {
    c.left = value;
  } else if (key == "right") {
    c.right = value;
  } else if (key == "complement") {
    c.complement = parse_bool(key, value);
  } else if (key == "mass") {
    c.masses = split(value, ',');
  } else if (key == "cells") {
    c.cells = parse_int(key, value);
  } else if (key == "halfwidth") {
    c.half_width = value;
  } else if (key == "digits") {
    c.digits = parse_int(key, value);
  } else if (key == "mode") {
    c.mode = value;
  } else if (key == "sigma") {
    c.sigma = value;
  } else if (key == "mu") {
    c.mus = value.empty() ? std::vector<std::string>{} : split(value, ',');
  } else if (key == "mu-range") {
    c.mu_range = value;
  } else if (key == "out") {
    c.out = value;
  } else if (key == "full-precision") {
    c.full_precision = parse_bool(key, value);
  } else if (key == "allow-small-box") {
    c.allow_small_box = parse_bool(key, value);
  } else if (key == "rung") {
    c.rungs.clear();
    for (const auto& r : split(value, ',')) c.rungs.push_back(parse_rung(r));
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

void load_config_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(number) + ": expected 'key = value'");
    try {
      apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

std::vector<std::pair<std::string, std::string>> echo(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("region", c.region);
  if (c.region == "wedge") {
    out.emplace_back("edge", c.edge);
  } else {
    out.emplace_back("left", c.left);
    out.emplace_back("right", c.right);
  }
  out.emplace_back("complement", c.complement ? "true" : "false");
  out.emplace_back("mass", join(c.masses, ","));
  out.emplace_back("cells", std::to_string(c.cells));
  out.emplace_back("halfwidth", c.half_width);
  out.emplace_back("digits", std::to_string(c.digits));
  out.emplace_back("mode", c.mode);
  out.emplace_back("sigma", c.sigma.value_or("default"));
  out.emplace_back("mu", join(c.mus, ","));
  out.emplace_back("mu-range", c.mu_range.value_or(""));
  out.emplace_back("full-precision", c.full_precision ? "true" : "false");
  out.emplace_back("allow-small-box", c.allow_small_box ? "true" : "false");
  std::vector<std::string> rungs;
  for (const auto& r : c.rungs) rungs.push_back(rung_text(r));
  out.emplace_back("rung", join(rungs, ","));
  return out;
}

RegionSpec make_region(const PrecisionContext& ctx, const RunConfig& config) {
  RegionSpec r = [&] {
    if (config.region == "wedge") return RegionSpec::wedge(parse_real(ctx, "edge", config.edge));
    if (config.region == "interval")
      return RegionSpec::interval(parse_real(ctx, "left", config.left), parse_real(ctx, "right", config.right));
    throw ConfigError("region: expected wedge or interval, got '" + config.region + "'");
  }();
  return config.complement ? r.complemented() : r;
}

Real probe_width(const PrecisionContext& ctx, const RunConfig& config) {
  if (config.sigma) {
    Real s = parse_real(ctx, "sigma", *config.sigma);
    if (s.sign() <= 0) throw ConfigError("sigma must be positive");
    return s;
  }
  Real extent = config.region == "wedge"
                    ? parse_real(ctx, "halfwidth", config.half_width) - parse_real(ctx, "edge", config.edge)
                    : parse_real(ctx, "right", config.right) - parse_real(ctx, "left", config.left);
  if (extent.sign() <= 0) throw ConfigError("region has no extent inside the box; give --sigma");
  return extent * Real::ratio(ctx, 1, 20);
}

std::vector<Real> parse_mu_range(const PrecisionContext& ctx, const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("mu-range: expected lo:hi:step, got '" + text + "'");
  const Real lo = parse_real(ctx, "mu-range", parts[0]);
  const Real hi = parse_real(ctx, "mu-range", parts[1]);
  const Real step = parse_real(ctx, "mu-range", parts[2]);
  if (step.sign() <= 0) throw ConfigError("mu-range: step must be positive");
  if (hi < lo) throw ConfigError("mu-range: hi must not be below lo");
  Real count = (hi - lo) / step + pow10(ctx, -ctx.decimal_digits() / 2);
  mpfr_floor(count.raw(), count.raw());
  if (count > 100000L) throw ConfigError("mu-range: more than 100000 points");
  std::vector<Real> out;
  for (long k = 0; k <= count.to_long(); ++k) out.push_back(lo + step * k);
  return out;
}

std::vector<Real> probe_centres(const PrecisionContext& ctx, const RunConfig& config) {
  std::vector<Real> out;
  for (const auto& m : config.mus) out.push_back(parse_real(ctx, "mu", m));
  if (config.mu_range)
    for (Real& m : parse_mu_range(ctx, *config.mu_range)) out.push_back(std::move(m));
  std::sort(out.begin(), out.end(), [](const Real& a, const Real& b) { return a < b; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] == out[i - 1]) throw ConfigError("mu list contains the duplicate " + out[i].to_string(10));
  return out;
}

void validate(const RunConfig& config) {
  const PrecisionContext ctx = context_for(config.digits);
  if (config.region != "wedge" && config.region != "interval")
    throw ConfigError("region: expected wedge or interval, got '" + config.region + "'");
  try {
    parse_basis_mode(config.mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("mode: ") + e.what());
  }
  if (config.masses.empty()) throw ConfigError("mass: at least one mass is required");
  for (const auto& m : config.masses)
    if (parse_real(ctx, "mass", m).sign() <= 0)
      throw ConfigError("mass must be positive (approach m = 0 through small m), got '" + m + "'");
  if (config.out.empty()) throw ConfigError("out: empty path (use - for standard output)");

  std::vector<Rung> shapes{Rung{config.cells, config.half_width, config.digits}};
  for (const auto& r : config.rungs) shapes.push_back(r);
  for (const auto& r : shapes) {
    const PrecisionContext rc = context_for(r.digits);
    try {
      Grid grid(rc, r.cells, parse_real(rc, "halfwidth", r.half_width));
      if (grid.half_width().sign() <= 0) throw ConfigError("halfwidth must be positive");
      build_basis(grid, make_region(rc, config), parse_basis_mode(config.mode));
    } catch (const GeometryError& e) {
      throw ConfigError("N = " + std::to_string(r.cells) + ", b = " + r.half_width + ": " + e.what());
    }
    check_probes(rc, config, r.half_width);
    if (!config.allow_small_box) {
      const Real b = parse_real(rc, "halfwidth", r.half_width);
      for (const Real& x : make_region(rc, config).boundaries())
        if (abs(x) * 2 > b)
          throw ConfigError("b = " + r.half_width + " is less than twice the region boundary at " + x.to_string(10) +
                            "; box effects dominate (pass --allow-small-box to run anyway)");
    }
  }
}

std::string format_value(const Real& x, bool full_precision) { return x.to_string(full_precision ? 0 : 30); }

std::string output_path_for_mass(const RunConfig& config, const std::string& mass) {
  if (config.masses.size() <= 1) return config.out;
  if (config.out == "-") throw ConfigError("a mass ladder writes one file per mass; give --out PATH");
  const std::filesystem::path p(config.out);
  std::filesystem::path named = p.parent_path() / (p.stem().string() + "_m" + mass + p.extension().string());
  return named.string();
}

int cmd_kernel(const RunConfig& config, std::ostream& progress) {
  validate(config);
  if (config.masses.size() != 1) throw ConfigError("kernel takes exactly one mass");
  const PrecisionContext ctx(config.digits);
  const PipelineConfig p = pipeline_config(ctx, config, config.masses.front(), config.cells, config.half_width);
  const ModularResult r = run_logged(ctx, p, config.masses.front(), progress);
  const KernelSamples ks = kernel_on_grid(r.m_minus, r.basis, r.grid, p.region);

  std::ostringstream out;
  out << header("kernel", config) << spectrum_summary(r);
  out << "# band_mass: " << ks.band_mass.to_string(12) << "\n";
  out << "# off_band_mass: " << ks.off_band_mass.to_string(12) << "\n";
  out << "# antidiagonal_mass: " << ks.antidiagonal_mass.to_string(12) << "\n";
  out << "x,y,value\n";
  const bool full = config.full_precision;
  for (std::size_t i = 0; i < ks.nodes.size(); ++i) {
    const std::string xi = format_value(ks.nodes[i], full);
    for (std::size_t l = 0; l < ks.nodes.size(); ++l)
      out << xi << "," << format_value(ks.nodes[l], full) << "," << format_value(ks.values(i, l), full) << "\n";
  }
  write_output(config.out, out.str());
  return kSuccess;
}

int cmd_scan(const RunConfig& config, std::ostream& progress) {
  validate(config);
  const PrecisionContext ctx(config.digits);
  if (probe_centres(ctx, config).empty()) throw ConfigError("scan needs at least one --mu or a --mu-range");
  for (const auto& mass : config.masses) output_path_for_mass(config, mass);

  const Real sigma = probe_width(ctx, config);
  for (const auto& mass : config.masses) {
    const PipelineConfig p = pipeline_config(ctx, config, mass, config.cells, config.half_width);
    const ModularResult r = run_logged(ctx, p, mass, progress);
    const auto entries = mu_scan(r, probe_centres(ctx, config), sigma);

    std::ostringstream out;
    out << header("scan", config) << "# mass: " << mass << "\n# sigma: " << sigma.to_string(12) << "\n"
        << spectrum_summary(r) << "mu,value,analytic_ref,abs_gap\n";
    for (const auto& e : entries) {
      out << format_value(e.mu, config.full_precision) << "," << format_value(e.value, config.full_precision) << ",";
      if (e.reference)
        out << format_value(*e.reference, config.full_precision) << ","
            << format_value(abs(e.value - *e.reference), config.full_precision);
      else
        out << ",";
      out << "\n";
    }
    write_output(output_path_for_mass(config, mass), out.str());
  }
  return kSuccess;
}

int cmd_converge(const RunConfig& config, std::ostream& progress) {
  validate(config);
  if (config.rungs.empty()) throw ConfigError("converge needs at least one --rung N:b:digits");
  if (config.masses.size() != 1) throw ConfigError("converge takes exactly one mass");
  if (probe_centres(context_for(config.digits), config).empty())
    throw ConfigError("converge needs at least one --mu or a --mu-range");

  const std::string& mass = config.masses.front();
  std::vector<std::optional<Real>> previous;
  bool any_success = false;
  std::ostringstream out;
  out << header("converge", config) << "cells,half_width,digits,mu,value,diff,min_gap,wall_seconds,status\n";
  for (const auto& rung : config.rungs) {
    const PrecisionContext ctx(rung.digits);
    const auto mus = probe_centres(ctx, config);
    if (previous.empty()) previous.resize(mus.size());
    const std::string prefix = std::to_string(rung.cells) + "," + rung.half_width + "," + std::to_string(rung.digits) + ",";
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const PipelineConfig p = pipeline_config(ctx, config, mass, rung.cells, rung.half_width);
      const ModularResult r = run_logged(ctx, p, mass, progress);
      const auto entries = mu_scan(r, mus, probe_width(ctx, config));
      std::ostringstream wall;
      wall << std::fixed << std::setprecision(3) << seconds_since(t0);
      for (std::size_t i = 0; i < entries.size(); ++i) {
        out << prefix << format_value(entries[i].mu, config.full_precision) << ","
            << format_value(entries[i].value, config.full_precision) << ",";
        if (previous[i]) out << format_value(entries[i].value - *previous[i], config.full_precision);
        out << "," << r.min_gap.to_string(6) << "," << wall.str() << ",ok\n";
        previous[i] = entries[i].value;
      }
      any_success = true;
    } catch (const ForbiddenSpectrum& e) {
      progress << "modham: rung " << rung_text(rung) << ": " << e.what() << std::endl;
      std::ostringstream wall;
      wall << std::fixed << std::setprecision(3) << seconds_since(t0);
      for (const Real& mu : mus)
        out << prefix << format_value(mu, config.full_precision) << ",,," << e.gap().to_string(6) << "," << wall.str()
            << ",forbidden_spectrum\n";
    }
  }
  write_output(config.out, out.str());
  return any_success ? kSuccess : kSpectralFailure;
}

namespace {

using Check = std::function<std::string(const PrecisionContext&, const SelfcheckOptions&)>;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

void require_close(const Real& got, const Real& want, const Real& tol, const std::string& what) {
  const Real d = abs(got - want);
  if (!(d <= tol))
    throw std::runtime_error(what + ": got " + got.to_string(20) + ", expected " + want.to_string(20) +
                             " (|diff| " + d.to_string(3) + " > " + tol.to_string(3) + ")");
}

Matrix from_rows(const PrecisionContext& ctx, const std::vector<std::vector<long>>& rows) {
  Matrix m(ctx, rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = Real(ctx, rows[i][j]);
  return m;
}

Real tight(const PrecisionContext& ctx) { return pow10(ctx, -(ctx.decimal_digits() - 10)); }

std::string check_gram(const PrecisionContext& ctx, const SelfcheckOptions&) {
  Grid grid(ctx, 8, Real(ctx, 2L));  // h = 1/2
  BasisSet std_basis = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kStandard);
  require_close(std_basis.gram(2, 2), Real::ratio(ctx, 1, 3), tight(ctx), "diagonal 2h/3");
  require_close(std_basis.gram(2, 3), Real::ratio(ctx, 1, 12), tight(ctx), "adjacent h/6");
  require_close(std_basis.gram(2, 4), Real(ctx), tight(ctx), "non-adjacent");
  BasisSet split = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kSplit);
  bool found = false;
  for (std::size_t j = 0; j < split.size(); ++j)
    if (split.elements[j].shape != Element::Shape::kHat) {
      require_close(split.gram(j, j), Real::ratio(ctx, 1, 6), tight(ctx), "half-hat self overlap h/3");
      found = true;
    }
  require(found, "split basis has no half-hats");
  return "2h/3, h/6, h/3 at h = 1/2";
}

std::string check_cholesky(const PrecisionContext& ctx, const SelfcheckOptions&) {
  Matrix l = cholesky(Matrix::diagonal(ctx, {Real(ctx, 4L), Real(ctx, 9L)}));
  require_close(l(0, 0), Real(ctx, 2L), tight(ctx), "sqrt 4");
  require_close(l(1, 1), Real(ctx, 3L), tight(ctx), "sqrt 9");
  Matrix l2 = cholesky(from_rows(ctx, {{2, 1}, {1, 2}}));
  require_close(l2(0, 0), sqrt(Real(ctx, 2L)), tight(ctx), "L00");
  require_close(l2(1, 0), Real(ctx, 1L) / sqrt(Real(ctx, 2L)), tight(ctx), "L10");
  require_close(l2(1, 1), sqrt(Real::ratio(ctx, 3, 2)), tight(ctx), "L11");
  require(l2(0, 1).is_zero(), "upper triangle not zero");
  return "diag(4,9) and [[2,1],[1,2]]";
}

std::string check_invert(const PrecisionContext& ctx, const SelfcheckOptions&) {
  Matrix d = invert(Matrix::diagonal(ctx, {Real(ctx, 2L), Real(ctx, 4L)}));
  require_close(d(0, 0), Real::ratio(ctx, 1, 2), tight(ctx), "1/2");
  require_close(d(1, 1), Real::ratio(ctx, 1, 4), tight(ctx), "1/4");
  Matrix u = invert(from_rows(ctx, {{1, 1}, {0, 1}}));
  require(max_abs_difference(u, from_rows(ctx, {{1, -1}, {0, 1}})) <= tight(ctx), "[[1,1],[0,1]] inverse");
  return "diag(2,4) and [[1,1],[0,1]]";
}

std::string check_eigen(const PrecisionContext& ctx, const SelfcheckOptions&) {
  SymEigen a = sym_eigen(from_rows(ctx, {{0, 1}, {1, 0}}));
  require_close(a.eigenvalues[0], Real(ctx, -1L), tight(ctx), "lambda_0");
  require_close(a.eigenvalues[1], Real(ctx, 1L), tight(ctx), "lambda_1");
  SymEigen b = sym_eigen(from_rows(ctx, {{2, 1}, {1, 2}}));
  require_close(b.eigenvalues[0], Real(ctx, 1L), tight(ctx), "lambda_0");
  require_close(b.eigenvalues[1], Real(ctx, 3L), tight(ctx), "lambda_1");
  return "[[0,1],[1,0]] and [[2,1],[1,2]]";
}

std::string check_arcoth(const PrecisionContext& ctx, const SelfcheckOptions&) {
  const Real tol = pow10(ctx, -(ctx.decimal_digits() - 30));
  const Real tiny = pow10(ctx, -20);
  for (const Real& x : {Real(ctx, 1L) + tiny, Real::ratio(ctx, 3, 2), Real(ctx, -2L), Real(ctx, 100000L)})
    require_close(coth(arcoth(x)), x, tol * abs(x), "coth(arcoth(" + x.to_string(8) + "))");
  const Real reference(ctx, oracle::arcoth_one_plus_ten_pow(20, ctx.decimal_digits() + 5));
  require_close(arcoth(Real(ctx, 1L) + tiny), reference, tight(ctx), "arcoth(1 + 1e-20) against series");
  return "round trip and arcoth(1 + 1e-20)";
}

std::string check_chi(const PrecisionContext& ctx, const SelfcheckOptions&) {
  Grid grid(ctx, 8, Real(ctx, 2L));
  BasisSet basis = build_basis(grid, RegionSpec::wedge(Real(ctx, -2L)), BasisMode::kStandard);
  require(max_abs_difference(chi_matrix(basis, grid, RegionSpec::wedge(Real(ctx, -2L))), basis.gram) <= tight(ctx),
          "region covering every support: X != Gram");
  require(chi_matrix(basis, grid, RegionSpec::wedge(Real(ctx, 2L))).max_abs() <= tight(ctx),
          "region covering no support: X != 0");
  BasisSet split = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kSplit);
  Matrix p = orthonormal_frame(split, chi_matrix(split, grid, RegionSpec::wedge(Real(ctx, 0L))));
  require(max_abs_difference(multiply(p, p), p) <= pow10(ctx, -(ctx.decimal_digits() - 20)),
          "split-mode chi is not idempotent");
  return "X = Gram, X = 0, split projector";
}

std::string check_gate(const PrecisionContext& ctx, const SelfcheckOptions&) {
  const std::size_t n = 4;
  const Matrix id = Matrix::identity(ctx, n);
  const Matrix b = build_B(Matrix(ctx, n, n), id, id);
  try {
    spectrum_gate(b, pow10(ctx, -ctx.decimal_digits()));
  } catch (const ForbiddenSpectrum& e) {
    require_close(e.lambda(), Real(ctx, -1L), tight(ctx), "reported eigenvalue");
    return "chi = 0 gives B = -1 and is rejected";
  }
  throw std::runtime_error("B = -1 passed the spectral gate");
}

std::string check_smear(const PrecisionContext& ctx, const SelfcheckOptions&) {
  Grid grid(ctx, 160, Real(ctx, 4L));  // h = 1/20
  BasisSet basis = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kStandard);
  const GaussianProbe wide{Real::ratio(ctx, 3, 10), Real::ratio(ctx, 3, 10)};
  require_close(smear(basis.gram, basis, grid, wide), Real(ctx, 1L), Real(ctx, 1e-3), "<g, g>");
  Matrix mx(ctx, basis.size(), basis.size());
  const Real& h = grid.spacing();
  for (std::size_t j = 0; j < basis.size(); ++j) {
    const Real& xj = grid.node(basis.elements[j].node);
    mx(j, j) = xj * h * 2 / 3;
    if (j + 1 < basis.size()) {
      mx(j, j + 1) = (xj + grid.node(basis.elements[j + 1].node)) * h / 12;
      mx(j + 1, j) = mx(j, j + 1);
    }
  }
  const GaussianProbe narrow{Real::ratio(ctx, 3, 10), Real::ratio(ctx, 1, 10)};
  require_close(smear(mx, basis, grid, narrow), Real::ratio(ctx, 3, 10), Real(ctx, 1e-3), "<g, x g>");
  return "normalization and multiplication by x";
}

std::string check_a_power_structure(const PrecisionContext& ctx, const SelfcheckOptions& options) {
  APowerOptions ao;
  ao.tolerance_scale = options.tolerance_scale;
  Grid grid(ctx, 16, Real(ctx, 4L));
  BasisSet basis = build_basis(grid, RegionSpec::wedge(Real(ctx, 0L)), BasisMode::kStandard);
  const Matrix a = a_power_matrix(basis, grid, Real(ctx, 1L), Real::ratio(ctx, -1, 4), ao).matrix;
  require_close(a(1, 3), a(2, 4), tight(ctx), "Toeplitz (1,3) vs (2,4)");
  const Real m(ctx, 1000L);
  Matrix big = a_power_matrix(basis, grid, m, Real::ratio(ctx, -1, 4), ao).matrix;
  big *= sqrt(m);
  const Real rel = max_abs_difference(big, basis.gram) / basis.gram.max_abs();
  require(rel < Real(ctx, 1e-4), "large-mass limit m^{1/2} A^{-1/4} -> Gram off by " + rel.to_string(3));
  return "Toeplitz and large-mass limit";
}

std::string check_position_space(const PrecisionContext& ctx, const SelfcheckOptions& options) {
  const int digits = std::min(ctx.decimal_digits(), 50);
  const PrecisionContext c(digits);
  APowerOptions ao;
  ao.tolerance_scale = options.tolerance_scale;
  Grid grid(c, 16, Real(c, 4L));  // h = 1/2
  BasisSet basis = build_basis(grid, RegionSpec::wedge(Real(c, 0L)), BasisMode::kStandard);
  const Matrix a = a_power_matrix(basis, grid, Real(c, 1L), Real::ratio(c, -1, 4), ao).matrix;
  const Real tol = pow10(c, -(digits - 10));
  for (int offset = 0; offset < 5; ++offset) {
    const Real reference(c, oracle::bessel_kernel_entry("1", "0.5", offset, digits + 5));
    require_close(a(5, 5 + static_cast<std::size_t>(offset)), reference, tol,
                  "offset " + std::to_string(offset));
  }
  return "5 entries, m = 1, h = 1/2, " + std::to_string(digits) + " digits";
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options, std::ostream& progress) {
  const PrecisionContext ctx = context_for(options.digits);
  const std::vector<std::pair<std::string, Check>> checks{
      {"gram_closed_forms", check_gram},
      {"cholesky", check_cholesky},
      {"invert", check_invert},
      {"sym_eigen", check_eigen},
      {"arcoth_coth_round_trip", check_arcoth},
      {"chi_matrix", check_chi},
      {"spectral_gate", check_gate},
      {"smear", check_smear},
      {"a_power_structure", check_a_power_structure},
      {"momentum_vs_position", check_position_space},
  };
  std::vector<CheckResult> results;
  for (const auto& [name, fn] : checks) {
    progress << "modham: selfcheck " << name << std::endl;
    CheckResult r{name, false, ""};
    try {
      r.detail = fn(ctx, options);
      r.passed = true;
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    results.push_back(std::move(r));
  }
  return results;
}

int cmd_selfcheck(const SelfcheckOptions& options, std::ostream& out, std::ostream& progress) {
  const auto results = run_selfcheck(options, progress);
  int failed = 0;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    if (!r.passed) ++failed;
  }
  out << (failed ? std::to_string(failed) + " check(s) failed" : "all checks passed") << "\n";
  return failed ? kSelfcheckFailed : kSuccess;
}

}  // namespace modham::cli
