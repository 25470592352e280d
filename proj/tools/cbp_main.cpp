#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cbp/bootstrap.hpp"
#include "cbp/control.hpp"
#include "cbp/csv_io.hpp"
#include "cbp/em.hpp"
#include "cbp/errors.hpp"
#include "cbp/likelihood.hpp"
#include "cbp/mle.hpp"
#include "cbp/offspring.hpp"
#include "cbp/rng.hpp"
#include "cbp/sample.hpp"
#include "cbp/simulate.hpp"
#include "cbp/trees.hpp"

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// small shared helpers

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& field : cbp::split_csv_line(text)) {
    if (field.empty()) throw cbp::SchemaError("empty entry in numeric list '" + text + "'");
    char* end = nullptr;
    double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || *end != '\0')
      throw cbp::SchemaError("not a number in list: '" + field + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& field : cbp::split_csv_line(text)) {
    char* end = nullptr;
    long v = std::strtol(field.c_str(), &end, 10);
    if (end == field.c_str() || *end != '\0')
      throw cbp::SchemaError("not an integer in list: '" + field + "'");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<cbp::ControlKind> parse_family_list(const std::string& text) {
  std::vector<cbp::ControlKind> out;
  for (const auto& field : cbp::split_csv_line(text))
    out.push_back(cbp::control_kind_from_string(field));
  return out;
}

std::string join_doubles(const std::vector<double>& values) {
  std::vector<std::string> fields;
  fields.reserve(values.size());
  for (double v : values) fields.push_back(cbp::format_double(v));
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += fields[i];
  }
  return out;
}

// Writes metadata lines, a header, and body rows to a file or stdout ("-").
void write_table(const std::string& path, const cbp::CsvMetadata& meta,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  auto emit = [&](std::ostream& out) {
    for (const auto& [key, value] : meta.entries) out << "# " << key << "=" << value << "\n";
    out << cbp::join_csv(header) << "\n";
    for (const auto& row : rows) out << cbp::join_csv(row) << "\n";
  };
  if (path == "-") {
    emit(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw cbp::IoError("cannot open for writing: " + path);
  emit(out);
  if (!out) throw cbp::IoError("failed writing: " + path);
}

// ---------------------------------------------------------------------------
// config-file support: JSON object whose keys mirror the long option names
// ('-' replaced by '_'). Explicit command-line flags take precedence; unknown
// keys are rejected.

struct Binding {
  std::string key;
  std::string flag;
  std::function<void(const json&)> apply;
};

Binding bind_double(const std::string& key, double& target) {
  return {key, "--" + key, [&target, key](const json& v) {
            if (!v.is_number()) throw cbp::SchemaError("config key '" + key + "' must be a number");
            target = v.get<double>();
          }};
}

Binding bind_int64(const std::string& key, std::int64_t& target) {
  return {key, "--" + key, [&target, key](const json& v) {
            if (!v.is_number_integer()) throw cbp::SchemaError("config key '" + key + "' must be an integer");
            target = v.get<std::int64_t>();
          }};
}

Binding bind_int(const std::string& key, int& target) {
  return {key, "--" + key, [&target, key](const json& v) {
            if (!v.is_number_integer()) throw cbp::SchemaError("config key '" + key + "' must be an integer");
            target = v.get<int>();
          }};
}

Binding bind_uint64(const std::string& key, std::uint64_t& target) {
  return {key, "--" + key, [&target, key](const json& v) {
            if (!v.is_number_unsigned() && !v.is_number_integer())
              throw cbp::SchemaError("config key '" + key + "' must be an integer");
            target = v.get<std::uint64_t>();
          }};
}

Binding bind_string(const std::string& key, std::string& target) {
  return {key, "--" + key, [&target, key](const json& v) {
            if (!v.is_string()) throw cbp::SchemaError("config key '" + key + "' must be a string");
            target = v.get<std::string>();
          }};
}

Binding bind_flag(const std::string& key, bool& target) {
  return {key, "--" + key, [&target, key](const json& v) {
            if (!v.is_boolean()) throw cbp::SchemaError("config key '" + key + "' must be a boolean");
            target = v.get<bool>();
          }};
}

// Numeric list given either as a JSON array or as a "a,b,c" string.
Binding bind_double_list(const std::string& key, std::string& target) {
  return {key, "--" + key, [&target, key](const json& v) {
            if (v.is_string()) {
              target = v.get<std::string>();
            } else if (v.is_array()) {
              std::vector<double> values;
              for (const auto& item : v) {
                if (!item.is_number())
                  throw cbp::SchemaError("config key '" + key + "' must hold numbers");
                values.push_back(item.get<double>());
              }
              target = join_doubles(values);
            } else {
              throw cbp::SchemaError("config key '" + key + "' must be an array or string");
            }
          }};
}

void apply_config(CLI::App* cmd, const std::string& path, const std::vector<Binding>& bindings) {
  if (path.empty()) return;
  std::ifstream in(path);
  if (!in) throw cbp::IoError("cannot open config: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw cbp::SchemaError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw cbp::SchemaError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const Binding* binding = nullptr;
    for (const auto& b : bindings)
      if (b.key == key) {
        binding = &b;
        break;
      }
    if (!binding) throw cbp::SchemaError("unknown config key '" + key + "'");
    std::string flag = binding->flag;
    for (auto& c : flag)
      if (c == '_') c = '-';
    if (cmd->count(flag) > 0) continue;  // explicit flags win over the file
    binding->apply(value);
  }
}

// ---------------------------------------------------------------------------
// command: simulate

struct SimulateArgs {
  std::string family = "binomial";
  double theta = 1.5;
  std::string p;
  std::int64_t z0 = 1;
  std::int64_t generations = 30;
  std::uint64_t seed = 1;
  std::string output = "-";
  std::string config;
};

void run_simulate(CLI::App* cmd, SimulateArgs& a) {
  apply_config(cmd, a.config,
               {bind_string("family", a.family), bind_double("theta", a.theta),
                bind_double_list("p", a.p), bind_int64("z0", a.z0),
                bind_int64("generations", a.generations), bind_uint64("seed", a.seed),
                bind_string("output", a.output)});
  if (a.p.empty()) throw cbp::SchemaError("simulate needs --p (offspring probabilities)");
  cbp::OffspringDistribution p(parse_double_list(a.p));
  cbp::ControlFamily family(cbp::control_kind_from_string(a.family), a.theta);
  if (a.generations < 1) throw cbp::DomainError("simulate needs generations >= 1");
  if (a.z0 < 0) throw cbp::DomainError("simulate needs z0 >= 0");
  auto tree = cbp::simulate(p, family, a.z0, static_cast<int>(a.generations), a.seed);
  cbp::CsvMetadata meta;
  meta.add("command", "simulate");
  meta.add("family", a.family);
  meta.add("theta", cbp::format_double(a.theta));
  meta.add("p", a.p);
  meta.add("z0", std::to_string(a.z0));
  meta.add("generations", std::to_string(a.generations));
  meta.add("seed", std::to_string(a.seed));
  cbp::write_full_tree_csv(a.output, tree, meta);
}

// ---------------------------------------------------------------------------
// command: mle

struct MleArgs {
  std::string input;
  std::string family = "binomial";
  double level = 0.95;
  bool evolve = false;
  std::string output = "-";
  std::string config;
};

void mle_rows(const cbp::FullTreeSample& tree, cbp::ControlKind kind, double level,
              std::int64_t label_n, std::vector<std::vector<std::string>>& rows) {
  auto mle = cbp::estimate(tree, kind);
  auto cis = cbp::confidence_intervals(mle, tree, level);
  auto push = [&](const std::string& name, double value, const cbp::Interval* ci) {
    std::vector<std::string> row{std::to_string(label_n), name, cbp::format_double(value)};
    if (ci) {
      row.push_back(cbp::format_double(ci->lo));
      row.push_back(cbp::format_double(ci->hi));
    } else {
      row.emplace_back();
      row.emplace_back();
    }
    rows.push_back(std::move(row));
  };
  for (int k = 0; k <= mle.p_hat.s_max(); ++k)
    push("p" + std::to_string(k), mle.p_hat[k], &cis.p[static_cast<std::size_t>(k)]);
  push("theta", mle.theta_hat, nullptr);
  push("m", mle.m_hat, &cis.m);
  push("sigma2", mle.sigma2_hat, &cis.sigma2);
  push("mu", mle.mu_hat, &cis.mu);
  push("tau", mle.tau_hat, &cis.tau);
}

void run_mle(CLI::App* cmd, MleArgs& a) {
  apply_config(cmd, a.config,
               {bind_string("input", a.input), bind_string("family", a.family),
                bind_double("level", a.level), bind_flag("evolve", a.evolve),
                bind_string("output", a.output)});
  if (a.input.empty()) throw cbp::SchemaError("mle needs --input (full-tree csv)");
  auto tree = cbp::read_full_tree_csv(a.input);
  auto kind = cbp::control_kind_from_string(a.family);
  cbp::CsvMetadata meta;
  meta.add("command", "mle");
  meta.add("input", a.input);
  meta.add("family", a.family);
  meta.add("level", cbp::format_double(a.level));
  meta.add("evolve", a.evolve ? "true" : "false");
  std::vector<std::vector<std::string>> rows;
  if (a.evolve) {
    for (int l = 1; l <= tree.n(); ++l) {
      try {
        mle_rows(tree.prefix(l), kind, a.level, l, rows);
      } catch (const cbp::Error& e) {
        meta.add("skipped_n_" + std::to_string(l), e.what());
      }
    }
    if (rows.empty()) throw cbp::DegenerateError("no prefix admitted the complete-data MLE");
  } else {
    mle_rows(tree, kind, a.level, tree.n(), rows);
  }
  write_table(a.output, meta, {"n", "parameter", "estimate", "ci_low", "ci_high"}, rows);
}

// ---------------------------------------------------------------------------
// command: em

struct EmArgs {
  std::string input;
  std::string scheme = "progenitors";
  std::string family = "binomial";
  int s_max = 3;
  double tol = 1e-6;
  std::int64_t max_iters = 50000;
  std::string init_p;
  double init_theta = 0.5;
  std::int64_t multi_start = 0;
  std::uint64_t seed = 1;
  std::string trace;
  bool evolve = false;
  int threads = 0;
  std::string output = "-";
  std::string config;
};

void em_rows(const cbp::EmFit& fit, std::int64_t label_n,
             std::vector<std::vector<std::string>>& rows,
             const std::vector<std::pair<std::string, std::string>>& extra) {
  auto push = [&](const std::string& name, const std::string& value) {
    rows.push_back({std::to_string(label_n), name, value, "", ""});
  };
  for (int k = 0; k <= fit.p.s_max(); ++k)
    push("p" + std::to_string(k), cbp::format_double(fit.p[k]));
  push("theta", cbp::format_double(fit.theta));
  push("m", cbp::format_double(fit.m));
  push("sigma2", cbp::format_double(fit.sigma2));
  push("mu", cbp::format_double(fit.mu));
  push("loglik", cbp::format_double(fit.loglik));
  push("iterations", std::to_string(fit.iterations));
  push("converged", fit.converged ? "1" : "0");
  for (const auto& [name, value] : extra) push(name, value);
}

void write_trace(const std::string& path, const std::vector<cbp::EmTraceRow>& trace, int s_max) {
  std::vector<std::string> header{"iteration"};
  for (int k = 0; k <= s_max; ++k) header.push_back("p" + std::to_string(k));
  header.emplace_back("theta");
  header.emplace_back("loglik");
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : trace) {
    std::vector<std::string> fields{std::to_string(row.iteration)};
    for (double v : row.p) fields.push_back(cbp::format_double(v));
    fields.push_back(cbp::format_double(row.theta));
    fields.push_back(cbp::format_double(row.loglik));
    rows.push_back(std::move(fields));
  }
  write_table(path, {}, header, rows);
}

void run_em(CLI::App* cmd, EmArgs& a) {
  apply_config(cmd, a.config,
               {bind_string("input", a.input), bind_string("scheme", a.scheme),
                bind_string("family", a.family), bind_int("s_max", a.s_max),
                bind_double("tol", a.tol), bind_int64("max_iters", a.max_iters),
                bind_double_list("init_p", a.init_p), bind_double("init_theta", a.init_theta),
                bind_int64("multi_start", a.multi_start), bind_uint64("seed", a.seed),
                bind_string("trace", a.trace), bind_flag("evolve", a.evolve),
                bind_int("threads", a.threads), bind_string("output", a.output)});
  if (a.input.empty()) throw cbp::SchemaError("em needs --input");
  cbp::Scheme scheme = cbp::scheme_from_string(a.scheme);
  cbp::EmConfig cfg{a.tol, a.max_iters, cbp::control_kind_from_string(a.family), a.s_max};
  if (a.s_max < 1) throw cbp::DomainError("em needs s_max >= 1");
  std::vector<double> init_p =
      a.init_p.empty()
          ? std::vector<double>(static_cast<std::size_t>(a.s_max) + 1, 1.0 / (a.s_max + 1))
          : parse_double_list(a.init_p);
  if (a.multi_start > 0 && scheme == cbp::Scheme::progenitors)
    throw cbp::SchemaError("--multi-start applies to the sizes scheme only");

  cbp::CsvMetadata meta;
  meta.add("command", "em");
  meta.add("input", a.input);
  meta.add("scheme", a.scheme);
  meta.add("family", a.family);
  meta.add("s_max", std::to_string(a.s_max));
  meta.add("tol", cbp::format_double(a.tol));
  meta.add("max_iters", std::to_string(a.max_iters));
  if (a.multi_start > 0) {
    meta.add("multi_start", std::to_string(a.multi_start));
    meta.add("seed", std::to_string(a.seed));
  } else {
    meta.add("init_p", a.init_p.empty() ? "uniform" : a.init_p);
    meta.add("init_theta", cbp::format_double(a.init_theta));
  }
  meta.add("evolve", a.evolve ? "true" : "false");

  std::optional<cbp::ProgenitorSample> progenitors;
  std::optional<cbp::SizesSample> sizes;
  if (scheme == cbp::Scheme::progenitors)
    progenitors = cbp::read_progenitor_csv(a.input);
  else
    sizes = cbp::read_sizes_csv(a.input);

  std::vector<cbp::EmTraceRow> trace_rows;
  std::vector<cbp::EmTraceRow>* trace = a.trace.empty() ? nullptr : &trace_rows;
  if (a.evolve && trace) throw cbp::SchemaError("--trace cannot be combined with --evolve");

  auto fit_once = [&](std::int64_t prefix_n, std::vector<std::vector<std::string>>& rows) {
    std::vector<std::pair<std::string, std::string>> extra;
    cbp::EmFit fit = [&] {
      if (scheme == cbp::Scheme::progenitors) {
        cbp::ProgenitorSample sub{
            {progenitors->z.begin(), progenitors->z.begin() + prefix_n + 1},
            {progenitors->phi.begin(), progenitors->phi.begin() + prefix_n}};
        return cbp::em_fit_progenitors(sub, init_p, a.init_theta, cfg, trace);
      }
      cbp::SizesSample sub{{sizes->z.begin(), sizes->z.begin() + prefix_n + 1}};
      if (a.multi_start > 0) {
        auto ms = cbp::multi_start(sub, a.multi_start,
                                   a.evolve ? cbp::derive_seed(a.seed, static_cast<std::uint64_t>(prefix_n))
                                            : a.seed,
                                   cfg, a.threads);
        std::int64_t n_conv = 0, n_fail = 0;
        for (const auto& s : ms.starts) {
          if (s.failed) ++n_fail;
          else if (s.fit->converged) ++n_conv;
        }
        extra.emplace_back("best_start", std::to_string(ms.best_start));
        extra.emplace_back("converged_starts", std::to_string(n_conv));
        extra.emplace_back("failed_starts", std::to_string(n_fail));
        return ms.best;
      }
      return cbp::em_fit_sizes(sub, init_p, a.init_theta, cfg, trace);
    }();
    em_rows(fit, prefix_n, rows, extra);
  };

  std::int64_t full_n = scheme == cbp::Scheme::progenitors
                            ? progenitors->n()
                            : sizes->n();
  std::vector<std::vector<std::string>> rows;
  if (a.evolve) {
    for (std::int64_t l = 1; l <= full_n; ++l) {
      try {
        fit_once(l, rows);
      } catch (const cbp::Error& e) {
        meta.add("skipped_n_" + std::to_string(l), e.what());
      }
    }
    if (rows.empty()) throw cbp::DegenerateError("no prefix admitted an EM fit");
  } else {
    fit_once(full_n, rows);
  }
  write_table(a.output, meta, {"n", "parameter", "estimate", "ci_low", "ci_high"}, rows);
  if (trace) write_trace(a.trace, trace_rows, a.s_max);
}

// ---------------------------------------------------------------------------
// command: loglik

struct LoglikArgs {
  std::string input;
  std::string scheme = "sizes";
  std::string family = "binomial";
  double theta = 1.5;
  std::string p;
  std::string output = "-";
  std::string config;
};

void run_loglik(CLI::App* cmd, LoglikArgs& a) {
  apply_config(cmd, a.config,
               {bind_string("input", a.input), bind_string("scheme", a.scheme),
                bind_string("family", a.family), bind_double("theta", a.theta),
                bind_double_list("p", a.p), bind_string("output", a.output)});
  if (a.input.empty()) throw cbp::SchemaError("loglik needs --input");
  if (a.p.empty()) throw cbp::SchemaError("loglik needs --p (offspring probabilities)");
  cbp::OffspringDistribution p(parse_double_list(a.p));
  cbp::ControlFamily family(cbp::control_kind_from_string(a.family), a.theta);
  std::int64_t offending = -1;
  double value;
  if (cbp::scheme_from_string(a.scheme) == cbp::Scheme::progenitors)
    value = cbp::loglik_progenitors(cbp::read_progenitor_csv(a.input), p, family, &offending);
  else
    value = cbp::loglik_sizes(cbp::read_sizes_csv(a.input), p, family, &offending);
  cbp::CsvMetadata meta;
  meta.add("command", "loglik");
  meta.add("input", a.input);
  meta.add("scheme", a.scheme);
  meta.add("family", a.family);
  meta.add("theta", cbp::format_double(a.theta));
  meta.add("p", a.p);
  write_table(a.output, meta, {"loglik", "offending_generation"},
              {{cbp::format_double(value), offending < 0 ? "" : std::to_string(offending)}});
}

// ---------------------------------------------------------------------------
// command: scan

struct ScanArgs {
  std::string input;
  std::string scheme = "progenitors";
  std::string families = "binomial,negative_binomial,poisson";
  std::string s_max_grid = "3,4,5,6";
  double tol = 1e-6;
  std::int64_t max_iters = 50000;
  std::int64_t multi_start = 10;
  std::uint64_t seed = 1;
  std::string aic_mode = "corrected";
  int threads = 0;
  std::string output = "-";
  std::string config;
};

void run_scan(CLI::App* cmd, ScanArgs& a) {
  apply_config(cmd, a.config,
               {bind_string("input", a.input), bind_string("scheme", a.scheme),
                bind_string("families", a.families), bind_string("s_max_grid", a.s_max_grid),
                bind_double("tol", a.tol), bind_int64("max_iters", a.max_iters),
                bind_int64("multi_start", a.multi_start), bind_uint64("seed", a.seed),
                bind_string("aic_mode", a.aic_mode), bind_int("threads", a.threads),
                bind_string("output", a.output)});
  if (a.input.empty()) throw cbp::SchemaError("scan needs --input");
  auto families = parse_family_list(a.families);
  auto grid = parse_int_list(a.s_max_grid);
  bool plain;
  if (a.aic_mode == "plain") plain = true;
  else if (a.aic_mode == "corrected") plain = false;
  else throw cbp::SchemaError("--aic-mode must be plain or corrected");

  cbp::EmConfig cfg{a.tol, a.max_iters, cbp::ControlKind::binomial, 3};
  cbp::ScanResult result;
  if (cbp::scheme_from_string(a.scheme) == cbp::Scheme::progenitors)
    result = cbp::scan_progenitors(cbp::read_progenitor_csv(a.input), families, grid, cfg,
                                   plain, a.threads);
  else
    result = cbp::scan_sizes(cbp::read_sizes_csv(a.input), families, grid, cfg, a.multi_start,
                             a.seed, plain, a.threads);

  cbp::CsvMetadata meta;
  meta.add("command", "scan");
  meta.add("input", a.input);
  meta.add("scheme", a.scheme);
  meta.add("families", a.families);
  meta.add("s_max_grid", a.s_max_grid);
  meta.add("aic_mode", a.aic_mode);
  if (result.best_index >= 0) {
    const auto& best = result.cells[static_cast<std::size_t>(result.best_index)];
    meta.add("best_family", cbp::to_string(best.kind));
    meta.add("best_s_max", std::to_string(best.s_max));
  }
  for (const auto& cell : result.cells)
    if (cell.failed)
      meta.add("cell_error_" + cbp::to_string(cell.kind) + "_" + std::to_string(cell.s_max),
               cell.error);

  std::vector<std::string> header{"s_max", "iterations"};
  for (auto kind : families) {
    header.push_back(cbp::to_string(kind) + "_loglik");
    header.push_back(cbp::to_string(kind) + "_aic");
  }
  std::vector<std::vector<std::string>> rows;
  std::size_t idx = 0;
  for (int s : grid) {
    std::vector<std::string> row{std::to_string(s), ""};
    for (std::size_t f = 0; f < families.size(); ++f) {
      const auto& cell = result.cells[idx++];
      if (cell.failed) {
        row.emplace_back();
        row.emplace_back();
        continue;
      }
      if (f == 0) row[1] = std::to_string(cell.iterations);
      row.push_back(cbp::format_double(cell.loglik));
      row.push_back(cbp::format_double(cell.aic));
    }
    rows.push_back(std::move(row));
  }
  write_table(a.output, meta, header, rows);
}

// ---------------------------------------------------------------------------
// command: bootstrap

struct BootstrapArgs {
  std::string p;
  double theta = 1.5;
  std::string family = "binomial";
  std::string scheme = "progenitors";
  std::int64_t reps = 500;
  std::int64_t generations = 30;
  std::int64_t z0 = 1;
  std::uint64_t seed = 1;
  std::int64_t sizes_starts = 10;
  double tol = 1e-6;
  std::int64_t max_iters = 50000;
  std::string truth;
  int threads = 0;
  std::string replicates_out;
  std::string eff_against;
  std::string output = "-";
  std::string config;
};

// Reads parameter,mse pairs back from a summary written by this command.
cbp::BootstrapSummary read_summary_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cbp::IoError("cannot open for reading: " + path);
  cbp::BootstrapSummary summary;
  std::string line;
  int col_param = -1, col_mse = -1;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = cbp::split_csv_line(line);
    if (!header_seen) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "parameter") col_param = static_cast<int>(i);
        if (fields[i] == "mse") col_mse = static_cast<int>(i);
      }
      if (col_param < 0 || col_mse < 0)
        throw cbp::SchemaError("summary csv needs parameter and mse columns: " + path);
      header_seen = true;
      continue;
    }
    if (static_cast<int>(fields.size()) <= std::max(col_param, col_mse))
      throw cbp::SchemaError("short row in summary csv: " + path);
    summary.param_names.push_back(fields[static_cast<std::size_t>(col_param)]);
    char* end = nullptr;
    const std::string& text = fields[static_cast<std::size_t>(col_mse)];
    double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str()) throw cbp::SchemaError("bad mse value in summary csv: " + path);
    summary.mse.push_back(v);
  }
  if (summary.param_names.empty()) throw cbp::SchemaError("empty summary csv: " + path);
  return summary;
}

void run_bootstrap(CLI::App* cmd, BootstrapArgs& a) {
  apply_config(cmd, a.config,
               {bind_double_list("p", a.p), bind_double("theta", a.theta),
                bind_string("family", a.family), bind_string("scheme", a.scheme),
                bind_int64("reps", a.reps), bind_int64("generations", a.generations),
                bind_int64("z0", a.z0), bind_uint64("seed", a.seed),
                bind_int64("sizes_starts", a.sizes_starts), bind_double("tol", a.tol),
                bind_int64("max_iters", a.max_iters), bind_double_list("truth", a.truth),
                bind_int("threads", a.threads),
                bind_string("replicates_out", a.replicates_out),
                bind_string("eff_against", a.eff_against), bind_string("output", a.output)});
  if (a.p.empty()) throw cbp::SchemaError("bootstrap needs --p (generating offspring law)");
  cbp::OffspringDistribution p(parse_double_list(a.p));
  auto kind = cbp::control_kind_from_string(a.family);
  cbp::ControlFamily::validate_theta(kind, a.theta);

  cbp::EmFit fit;
  fit.p = p;
  fit.theta = a.theta;
  fit.m = p.mean();
  fit.sigma2 = p.variance();
  fit.mu = cbp::ControlFamily::mu_value(kind, a.theta);

  std::vector<double> truth;
  if (a.truth.empty()) {
    truth = p.probs();
    truth.push_back(fit.m);
    truth.push_back(fit.sigma2);
    truth.push_back(fit.mu);
  } else {
    truth = parse_double_list(a.truth);
  }

  cbp::BootstrapConfig cfg;
  cfg.n_reps = a.reps;
  cfg.n_generations = a.generations;
  cfg.z0 = a.z0;
  cfg.master_seed = a.seed;
  cfg.sizes_starts = a.sizes_starts;
  cfg.em = cbp::EmConfig{a.tol, a.max_iters, kind, p.s_max()};
  cfg.n_threads = a.threads;
  auto summary = cbp::bootstrap(fit, cbp::scheme_from_string(a.scheme), cfg, truth);

  std::vector<double> eff;
  if (!a.eff_against.empty()) {
    auto other = read_summary_csv(a.eff_against);
    eff = cbp::efficiency(summary, other);
  }

  cbp::CsvMetadata meta;
  meta.add("command", "bootstrap");
  meta.add("family", a.family);
  meta.add("scheme", a.scheme);
  meta.add("p", a.p);
  meta.add("theta", cbp::format_double(a.theta));
  meta.add("reps", std::to_string(a.reps));
  meta.add("generations", std::to_string(a.generations));
  meta.add("z0", std::to_string(a.z0));
  meta.add("seed", std::to_string(a.seed));
  meta.add("sizes_starts", std::to_string(a.sizes_starts));
  meta.add("truth", join_doubles(truth));
  meta.add("n_success", std::to_string(summary.n_success));
  meta.add("n_failed", std::to_string(summary.n_failed));
  meta.add("n_extinct", std::to_string(summary.n_extinct));
  if (!a.eff_against.empty()) meta.add("eff_against", a.eff_against);

  std::vector<std::string> header{"parameter", "mse"};
  if (!eff.empty()) header.emplace_back("eff");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t j = 0; j < summary.param_names.size(); ++j) {
    std::vector<std::string> row{summary.param_names[j], cbp::format_double(summary.mse[j])};
    if (!eff.empty()) row.push_back(cbp::format_double(eff[j]));
    rows.push_back(std::move(row));
  }
  write_table(a.output, meta, header, rows);

  if (!a.replicates_out.empty()) {
    std::vector<std::vector<std::string>> rep_rows;
    for (std::size_t r = 0; r < static_cast<std::size_t>(summary.n_success); ++r)
      for (std::size_t j = 0; j < summary.param_names.size(); ++j)
        rep_rows.push_back({std::to_string(r), summary.param_names[j],
                            cbp::format_double(summary.replicates[j][r])});
    write_table(a.replicates_out, {}, {"replicate_id", "parameter", "value"}, rep_rows);
  }
}

// ---------------------------------------------------------------------------
// command: trees

struct TreesArgs {
  std::int64_t z_max = 167;
  std::string s_max_list = "3,4,5";
  std::string output = "-";
  std::string config;
};

void run_trees(CLI::App* cmd, TreesArgs& a) {
  apply_config(cmd, a.config,
               {bind_int64("z_max", a.z_max), bind_string("s_max_list", a.s_max_list),
                bind_string("output", a.output)});
  auto s_values = parse_int_list(a.s_max_list);
  if (s_values.empty()) throw cbp::SchemaError("trees needs at least one s_max value");
  std::vector<std::vector<cbp::BmaxRow>> tables;
  for (int s : s_values) tables.push_back(cbp::bmax_table(a.z_max, s));

  cbp::CsvMetadata meta;
  meta.add("command", "trees");
  meta.add("z_max", std::to_string(a.z_max));
  meta.add("s_max_list", a.s_max_list);
  std::vector<std::string> header{"z"};
  for (int s : s_values) {
    header.push_back("b_max_smax" + std::to_string(s));
    header.push_back("b_star_max_smax" + std::to_string(s));
  }
  std::vector<std::vector<std::string>> rows;
  for (std::int64_t z = 1; z <= a.z_max; ++z) {
    std::vector<std::string> row{std::to_string(z)};
    for (const auto& table : tables) {
      const auto& r = table[static_cast<std::size_t>(z - 1)];
      row.push_back(std::to_string(r.b_max));
      row.push_back(std::to_string(r.b_star_max));
    }
    rows.push_back(std::move(row));
  }
  write_table(a.output, meta, header, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controlled branching processes: simulation, estimation, model selection"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a full family tree");
  sim_cmd->add_option("--family", sim.family, "Control family: binomial, poisson, negative_binomial");
  sim_cmd->add_option("--theta", sim.theta, "Control parameter");
  sim_cmd->add_option("--p", sim.p, "Offspring probabilities p0,p1,...");
  sim_cmd->add_option("--z0", sim.z0, "Initial population size");
  sim_cmd->add_option("--generations", sim.generations, "Number of generations");
  sim_cmd->add_option("--seed", sim.seed, "Random seed");
  sim_cmd->add_option("--output,-o", sim.output, "Output csv ('-' for stdout)");
  sim_cmd->add_option("--config", sim.config, "JSON config file");

  MleArgs mle;
  auto* mle_cmd = app.add_subcommand("mle", "Complete-data maximum likelihood estimates");
  mle_cmd->add_option("--input,-i", mle.input, "Full-tree csv");
  mle_cmd->add_option("--family", mle.family, "Control family");
  mle_cmd->add_option("--level", mle.level, "Confidence level");
  mle_cmd->add_flag("--evolve", mle.evolve, "Emit estimates for every prefix length");
  mle_cmd->add_option("--output,-o", mle.output, "Output csv");
  mle_cmd->add_option("--config", mle.config, "JSON config file");

  EmArgs em;
  auto* em_cmd = app.add_subcommand("em", "EM estimation from incomplete samples");
  em_cmd->add_option("--input,-i", em.input, "Sample csv");
  em_cmd->add_option("--scheme", em.scheme, "progenitors or sizes");
  em_cmd->add_option("--family", em.family, "Control family");
  em_cmd->add_option("--s-max", em.s_max, "Offspring support bound");
  em_cmd->add_option("--tol", em.tol, "Convergence tolerance");
  em_cmd->add_option("--max-iters", em.max_iters, "Iteration cap");
  em_cmd->add_option("--init-p", em.init_p, "Initial offspring law (default uniform)");
  em_cmd->add_option("--init-theta", em.init_theta, "Initial control parameter");
  em_cmd->add_option("--multi-start", em.multi_start, "Random starts (sizes scheme)");
  em_cmd->add_option("--seed", em.seed, "Multi-start master seed");
  em_cmd->add_option("--trace", em.trace, "Per-iteration trace csv");
  em_cmd->add_flag("--evolve", em.evolve, "Re-fit on every prefix length");
  em_cmd->add_option("--threads", em.threads, "Worker threads (0 = auto)");
  em_cmd->add_option("--output,-o", em.output, "Output csv");
  em_cmd->add_option("--config", em.config, "JSON config file");

  LoglikArgs ll;
  auto* ll_cmd = app.add_subcommand("loglik", "Exact observed-data log-likelihood");
  ll_cmd->add_option("--input,-i", ll.input, "Sample csv");
  ll_cmd->add_option("--scheme", ll.scheme, "progenitors or sizes");
  ll_cmd->add_option("--family", ll.family, "Control family");
  ll_cmd->add_option("--theta", ll.theta, "Control parameter");
  ll_cmd->add_option("--p", ll.p, "Offspring probabilities p0,p1,...");
  ll_cmd->add_option("--output,-o", ll.output, "Output csv");
  ll_cmd->add_option("--config", ll.config, "JSON config file");

  ScanArgs scan;
  auto* scan_cmd = app.add_subcommand("scan", "Fit a family / s_max grid and rank by AIC");
  scan_cmd->add_option("--input,-i", scan.input, "Sample csv");
  scan_cmd->add_option("--scheme", scan.scheme, "progenitors or sizes");
  scan_cmd->add_option("--families", scan.families, "Comma-separated family list");
  scan_cmd->add_option("--s-max-grid", scan.s_max_grid, "Comma-separated s_max values");
  scan_cmd->add_option("--tol", scan.tol, "Convergence tolerance");
  scan_cmd->add_option("--max-iters", scan.max_iters, "Iteration cap");
  scan_cmd->add_option("--multi-start", scan.multi_start, "Starts per sizes-scheme cell");
  scan_cmd->add_option("--seed", scan.seed, "Master seed for sizes-scheme cells");
  scan_cmd->add_option("--aic-mode", scan.aic_mode, "corrected (small-sample) or plain");
  scan_cmd->add_option("--threads", scan.threads, "Worker threads (0 = auto)");
  scan_cmd->add_option("--output,-o", scan.output, "Output csv");
  scan_cmd->add_option("--config", scan.config, "JSON config file");

  BootstrapArgs boot;
  auto* boot_cmd = app.add_subcommand("bootstrap", "Parametric bootstrap of the EM estimators");
  boot_cmd->add_option("--p", boot.p, "Generating offspring law p0,p1,...");
  boot_cmd->add_option("--theta", boot.theta, "Generating control parameter");
  boot_cmd->add_option("--family", boot.family, "Control family");
  boot_cmd->add_option("--scheme", boot.scheme, "Re-fit scheme: progenitors or sizes");
  boot_cmd->add_option("--reps", boot.reps, "Number of replicates");
  boot_cmd->add_option("--generations", boot.generations, "Generations per replicate");
  boot_cmd->add_option("--z0", boot.z0, "Initial population size");
  boot_cmd->add_option("--seed", boot.seed, "Master seed");
  boot_cmd->add_option("--sizes-starts", boot.sizes_starts, "Multi-start width for sizes re-fits");
  boot_cmd->add_option("--tol", boot.tol, "EM tolerance");
  boot_cmd->add_option("--max-iters", boot.max_iters, "EM iteration cap");
  boot_cmd->add_option("--truth", boot.truth, "Reference values (default: generating values)");
  boot_cmd->add_option("--threads", boot.threads, "Worker threads (0 = auto)");
  boot_cmd->add_option("--replicates-out", boot.replicates_out, "Long-form replicate csv");
  boot_cmd->add_option("--eff-against", boot.eff_against, "Summary csv to compare against");
  boot_cmd->add_option("--output,-o", boot.output, "Output csv");
  boot_cmd->add_option("--config", boot.config, "JSON config file");

  TreesArgs trees;
  auto* trees_cmd = app.add_subcommand("trees", "Transition-tree cardinality table");
  trees_cmd->add_option("--z-max", trees.z_max, "Largest generation size");
  trees_cmd->add_option("--s-max-list", trees.s_max_list, "Comma-separated s_max values");
  trees_cmd->add_option("--output,-o", trees.output, "Output csv");
  trees_cmd->add_option("--config", trees.config, "JSON config file");

  try {
    app.parse(argc, argv);
    if (sim_cmd->parsed()) run_simulate(sim_cmd, sim);
    if (mle_cmd->parsed()) run_mle(mle_cmd, mle);
    if (em_cmd->parsed()) run_em(em_cmd, em);
    if (ll_cmd->parsed()) run_loglik(ll_cmd, ll);
    if (scan_cmd->parsed()) run_scan(scan_cmd, scan);
    if (boot_cmd->parsed()) run_bootstrap(boot_cmd, boot);
    if (trees_cmd->parsed()) run_trees(trees_cmd, trees);
    return 0;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(cbp::ExitCode::schema);
  } catch (const cbp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(cbp::ExitCode::internal);
  }
}
