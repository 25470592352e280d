#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbp/bootstrap.hpp"
#include "cbp/control.hpp"
#include "cbp/csv_io.hpp"
#include "cbp/em.hpp"
#include "cbp/errors.hpp"
#include "cbp/likelihood.hpp"
#include "cbp/mle.hpp"
#include "cbp/offspring.hpp"
#include "cbp/sample.hpp"
#include "cbp/simulate.hpp"
#include "cbp/trees.hpp"

namespace py = pybind11;

namespace {

cbp::ControlKind kind_of(const std::string& name) {
  return cbp::control_kind_from_string(name);
}

std::vector<cbp::ControlKind> kinds_of(const std::vector<std::string>& names) {
  std::vector<cbp::ControlKind> kinds;
  kinds.reserve(names.size());
  for (const auto& n : names) kinds.push_back(kind_of(n));
  return kinds;
}

cbp::EmConfig make_em_config(double tol, std::int64_t max_iters, const std::string& family,
                             int s_max) {
  return cbp::EmConfig{tol, max_iters, kind_of(family), s_max};
}

std::vector<double> default_init_p(const std::optional<std::vector<double>>& init_p,
                                   int s_max) {
  if (init_p) return *init_p;
  return std::vector<double>(static_cast<std::size_t>(s_max) + 1, 1.0 / (s_max + 1));
}

py::dict multi_start_to_py(const cbp::MultiStartResult& ms) {
  std::int64_t n_converged = 0, n_failed = 0;
  for (const auto& s : ms.starts) {
    if (s.failed) ++n_failed;
    else if (s.fit->converged) ++n_converged;
  }
  py::dict out;
  out["best"] = ms.best;
  out["best_start"] = ms.best_start;
  out["n_starts"] = static_cast<std::int64_t>(ms.starts.size());
  out["converged_starts"] = n_converged;
  out["failed_starts"] = n_failed;
  return out;
}

py::dict scan_to_py(const cbp::ScanResult& result) {
  py::list cells;
  for (const auto& cell : result.cells) {
    py::dict d;
    d["family"] = cbp::to_string(cell.kind);
    d["s_max"] = cell.s_max;
    d["failed"] = cell.failed;
    if (cell.failed) {
      d["error"] = cell.error;
    } else {
      d["fit"] = *cell.fit;
      d["loglik"] = cell.loglik;
      d["aic"] = cell.aic;
      d["iterations"] = cell.iterations;
    }
    cells.append(d);
  }
  py::dict out;
  out["cells"] = cells;
  out["best_index"] = result.best_index;
  return out;
}

cbp::EmFit generator_fit(std::vector<double> p, double theta, cbp::ControlKind kind) {
  cbp::EmFit fit;
  fit.p = cbp::OffspringDistribution(std::move(p));
  fit.theta = theta;
  fit.m = fit.p.mean();
  fit.sigma2 = fit.p.variance();
  fit.mu = cbp::ControlFamily::mu_value(kind, theta);
  return fit;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Controlled branching processes: simulation, estimation, model selection";

  // Error taxonomy. Registration order matters: the base translator is
  // registered first so the derived ones (registered later) are tried first.
  py::register_exception<cbp::Error>(m, "CbpError", PyExc_RuntimeError);
  py::register_exception<cbp::SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<cbp::DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<cbp::DegenerateError>(m, "DegenerateError", PyExc_RuntimeError);
  py::register_exception<cbp::IoError>(m, "IoError", PyExc_OSError);

  // --- basic model objects --------------------------------------------------

  py::class_<cbp::OffspringDistribution>(m, "OffspringDistribution")
      .def(py::init<std::vector<double>>(), py::arg("probs"))
      .def_property_readonly("probs", &cbp::OffspringDistribution::probs)
      .def_property_readonly("s_max", &cbp::OffspringDistribution::s_max)
      .def("mean", &cbp::OffspringDistribution::mean)
      .def("variance", &cbp::OffspringDistribution::variance)
      .def("__len__",
           [](const cbp::OffspringDistribution& d) { return d.s_max() + 1; })
      .def("__getitem__",
           [](const cbp::OffspringDistribution& d, int k) {
             if (k < 0 || k > d.s_max()) throw py::index_error();
             return d[k];
           })
      .def("__repr__", [](const cbp::OffspringDistribution& d) {
        std::string r = "OffspringDistribution([";
        for (int k = 0; k <= d.s_max(); ++k)
          r += (k ? ", " : "") + cbp::format_double(d[k]);
        return r + "])";
      });

  py::class_<cbp::ControlFamily>(m, "ControlFamily")
      .def(py::init([](const std::string& kind, double theta) {
             return cbp::ControlFamily(kind_of(kind), theta);
           }),
           py::arg("kind"), py::arg("theta"))
      .def_property_readonly(
          "kind", [](const cbp::ControlFamily& f) { return cbp::to_string(f.kind()); })
      .def_property_readonly("theta", &cbp::ControlFamily::theta)
      .def_property_readonly("mu", &cbp::ControlFamily::mu)
      .def_property_readonly("mu_prime", &cbp::ControlFamily::mu_prime)
      .def("pmf", &cbp::ControlFamily::pmf, py::arg("k"), py::arg("j"))
      .def("log_pmf", &cbp::ControlFamily::log_pmf, py::arg("k"), py::arg("j"))
      .def("__repr__", [](const cbp::ControlFamily& f) {
        return "ControlFamily('" + cbp::to_string(f.kind()) +
               "', theta=" + cbp::format_double(f.theta()) + ")";
      });

  m.def(
      "mu_value",
      [](const std::string& kind, double theta) {
        return cbp::ControlFamily::mu_value(kind_of(kind), theta);
      },
      py::arg("kind"), py::arg("theta"));
  m.def(
      "mu_inverse",
      [](const std::string& kind, double x) {
        return cbp::ControlFamily::mu_inverse(kind_of(kind), x);
      },
      py::arg("kind"), py::arg("x"));

  // --- samples ----------------------------------------------------------------

  py::class_<cbp::FullTreeSample>(m, "FullTreeSample")
      .def(py::init<std::int64_t, std::vector<std::vector<std::int64_t>>>(),
           py::arg("z0"), py::arg("counts"))
      .def_property_readonly("z0", &cbp::FullTreeSample::z0)
      .def_property_readonly("counts", &cbp::FullTreeSample::counts)
      .def_property_readonly("n", &cbp::FullTreeSample::n)
      .def_property_readonly("s_max", &cbp::FullTreeSample::s_max)
      .def("sizes", &cbp::FullTreeSample::sizes)
      .def("phis", &cbp::FullTreeSample::phis)
      .def("prefix", &cbp::FullTreeSample::prefix, py::arg("generations"))
      .def("__repr__", [](const cbp::FullTreeSample& t) {
        return "FullTreeSample(n=" + std::to_string(t.n()) +
               ", s_max=" + std::to_string(t.s_max()) + ")";
      });

  py::class_<cbp::ProgenitorSample>(m, "ProgenitorSample")
      .def(py::init([](std::vector<std::int64_t> z, std::vector<std::int64_t> phi) {
             cbp::ProgenitorSample s{std::move(z), std::move(phi)};
             s.validate();
             return s;
           }),
           py::arg("z"), py::arg("phi"))
      .def_readonly("z", &cbp::ProgenitorSample::z)
      .def_readonly("phi", &cbp::ProgenitorSample::phi)
      .def_property_readonly("n", &cbp::ProgenitorSample::n);

  py::class_<cbp::SizesSample>(m, "SizesSample")
      .def(py::init([](std::vector<std::int64_t> z) {
             cbp::SizesSample s{std::move(z)};
             s.validate();
             return s;
           }),
           py::arg("z"))
      .def_readonly("z", &cbp::SizesSample::z)
      .def_property_readonly("n", &cbp::SizesSample::n);

  m.def("project_progenitors", &cbp::project_progenitors, py::arg("tree"));
  m.def("project_sizes", &cbp::project_sizes, py::arg("tree"));

  m.def("read_full_tree_csv", &cbp::read_full_tree_csv, py::arg("path"));
  m.def("read_progenitor_csv", &cbp::read_progenitor_csv, py::arg("path"));
  m.def("read_sizes_csv", &cbp::read_sizes_csv, py::arg("path"));
  m.def(
      "write_full_tree_csv",
      [](const std::string& path, const cbp::FullTreeSample& tree) {
        cbp::write_full_tree_csv(path, tree);
      },
      py::arg("path"), py::arg("tree"));

  // --- simulation ---------------------------------------------------------------

  m.def(
      "simulate",
      [](std::vector<double> p, const std::string& family, double theta, std::int64_t z0,
         int generations, std::uint64_t seed) {
        return cbp::simulate(cbp::OffspringDistribution(std::move(p)),
                             cbp::ControlFamily(kind_of(family), theta), z0, generations,
                             seed);
      },
      py::arg("p"), py::arg("family") = "binomial", py::arg("theta") = 1.5,
      py::arg("z0") = 1, py::arg("generations") = 30, py::arg("seed") = 1);

  // --- complete-data estimation ----------------------------------------------

  py::class_<cbp::CompleteMle>(m, "CompleteMle")
      .def_property_readonly(
          "kind", [](const cbp::CompleteMle& x) { return cbp::to_string(x.kind); })
      .def_property_readonly(
          "p_hat", [](const cbp::CompleteMle& x) { return x.p_hat.probs(); })
      .def_readonly("m_hat", &cbp::CompleteMle::m_hat)
      .def_readonly("sigma2_hat", &cbp::CompleteMle::sigma2_hat)
      .def_readonly("mu_hat", &cbp::CompleteMle::mu_hat)
      .def_readonly("theta_hat", &cbp::CompleteMle::theta_hat)
      .def_readonly("tau_hat", &cbp::CompleteMle::tau_hat)
      .def("__repr__", [](const cbp::CompleteMle& x) {
        return "CompleteMle(m_hat=" + cbp::format_double(x.m_hat) +
               ", mu_hat=" + cbp::format_double(x.mu_hat) + ")";
      });

  py::class_<cbp::Interval>(m, "Interval")
      .def_readonly("lo", &cbp::Interval::lo)
      .def_readonly("hi", &cbp::Interval::hi)
      .def("__repr__", [](const cbp::Interval& i) {
        return "Interval(" + cbp::format_double(i.lo) + ", " + cbp::format_double(i.hi) +
               ")";
      });

  py::class_<cbp::CompleteCis>(m, "CompleteCis")
      .def_readonly("level", &cbp::CompleteCis::level)
      .def_readonly("p", &cbp::CompleteCis::p)
      .def_readonly("m", &cbp::CompleteCis::m)
      .def_readonly("sigma2", &cbp::CompleteCis::sigma2)
      .def_readonly("mu", &cbp::CompleteCis::mu)
      .def_readonly("tau", &cbp::CompleteCis::tau);

  m.def(
      "estimate",
      [](const cbp::FullTreeSample& tree, const std::string& family) {
        return cbp::estimate(tree, kind_of(family));
      },
      py::arg("tree"), py::arg("family") = "binomial");
  m.def("confidence_intervals", &cbp::confidence_intervals, py::arg("mle"),
        py::arg("tree"), py::arg("level") = 0.95);

  // --- EM ----------------------------------------------------------------------

  py::class_<cbp::EmFit>(m, "EmFit")
      .def_property_readonly("p", [](const cbp::EmFit& f) { return f.p.probs(); })
      .def_readonly("theta", &cbp::EmFit::theta)
      .def_readonly("m", &cbp::EmFit::m)
      .def_readonly("sigma2", &cbp::EmFit::sigma2)
      .def_readonly("mu", &cbp::EmFit::mu)
      .def_readonly("iterations", &cbp::EmFit::iterations)
      .def_readonly("converged", &cbp::EmFit::converged)
      .def_readonly("loglik", &cbp::EmFit::loglik)
      .def("__repr__", [](const cbp::EmFit& f) {
        return "EmFit(m=" + cbp::format_double(f.m) + ", mu=" + cbp::format_double(f.mu) +
               ", loglik=" + cbp::format_double(f.loglik) +
               ", iterations=" + std::to_string(f.iterations) + ")";
      });

  m.def(
      "em_fit_progenitors",
      [](const cbp::ProgenitorSample& sample, std::optional<std::vector<double>> init_p,
         double init_theta, double tol, std::int64_t max_iters, const std::string& family,
         int s_max) {
        return cbp::em_fit_progenitors(sample, default_init_p(init_p, s_max), init_theta,
                                       make_em_config(tol, max_iters, family, s_max));
      },
      py::arg("sample"), py::arg("init_p") = std::nullopt, py::arg("init_theta") = 0.5,
      py::arg("tol") = 1e-6, py::arg("max_iters") = 50000, py::arg("family") = "binomial",
      py::arg("s_max") = 3);
  m.def(
      "em_fit_sizes",
      [](const cbp::SizesSample& sample, std::optional<std::vector<double>> init_p,
         double init_theta, double tol, std::int64_t max_iters, const std::string& family,
         int s_max) {
        return cbp::em_fit_sizes(sample, default_init_p(init_p, s_max), init_theta,
                                 make_em_config(tol, max_iters, family, s_max));
      },
      py::arg("sample"), py::arg("init_p") = std::nullopt, py::arg("init_theta") = 0.5,
      py::arg("tol") = 1e-6, py::arg("max_iters") = 50000, py::arg("family") = "binomial",
      py::arg("s_max") = 3);
  m.def(
      "multi_start",
      [](const cbp::SizesSample& sample, std::int64_t n_starts, std::uint64_t seed,
         double tol, std::int64_t max_iters, const std::string& family, int s_max,
         int threads) {
        return multi_start_to_py(cbp::multi_start(
            sample, n_starts, seed, make_em_config(tol, max_iters, family, s_max), threads));
      },
      py::arg("sample"), py::arg("n_starts") = 300, py::arg("seed") = 1,
      py::arg("tol") = 1e-6, py::arg("max_iters") = 50000, py::arg("family") = "binomial",
      py::arg("s_max") = 3, py::arg("threads") = 0);

  // --- likelihood and model selection -----------------------------------------

  m.def(
      "loglik_progenitors",
      [](const cbp::ProgenitorSample& sample, std::vector<double> p,
         const std::string& family, double theta) {
        std::int64_t offending = -1;
        double value =
            cbp::loglik_progenitors(sample, cbp::OffspringDistribution(std::move(p)),
                                    cbp::ControlFamily(kind_of(family), theta), &offending);
        return py::make_tuple(value, offending);
      },
      py::arg("sample"), py::arg("p"), py::arg("family") = "binomial",
      py::arg("theta") = 1.5);
  m.def(
      "loglik_sizes",
      [](const cbp::SizesSample& sample, std::vector<double> p, const std::string& family,
         double theta) {
        std::int64_t offending = -1;
        double value =
            cbp::loglik_sizes(sample, cbp::OffspringDistribution(std::move(p)),
                              cbp::ControlFamily(kind_of(family), theta), &offending);
        return py::make_tuple(value, offending);
      },
      py::arg("sample"), py::arg("p"), py::arg("family") = "binomial",
      py::arg("theta") = 1.5);

  m.def("aic", &cbp::aic, py::arg("loglik"), py::arg("n_params"), py::arg("n_obs"));
  m.def("aic_plain", &cbp::aic_plain, py::arg("loglik"), py::arg("n_params"));

  m.def(
      "scan_progenitors",
      [](const cbp::ProgenitorSample& sample, const std::vector<std::string>& families,
         const std::vector<int>& s_max_grid, double tol, std::int64_t max_iters,
         bool plain_aic, int threads) {
        return scan_to_py(cbp::scan_progenitors(sample, kinds_of(families), s_max_grid,
                                                make_em_config(tol, max_iters, "binomial", 3),
                                                plain_aic, threads));
      },
      py::arg("sample"),
      py::arg("families") =
          std::vector<std::string>{"binomial", "negative_binomial", "poisson"},
      py::arg("s_max_grid") = std::vector<int>{3, 4, 5, 6}, py::arg("tol") = 1e-6,
      py::arg("max_iters") = 50000, py::arg("plain_aic") = false, py::arg("threads") = 0);
  m.def(
      "scan_sizes",
      [](const cbp::SizesSample& sample, const std::vector<std::string>& families,
         const std::vector<int>& s_max_grid, std::int64_t n_starts, std::uint64_t seed,
         double tol, std::int64_t max_iters, bool plain_aic, int threads) {
        return scan_to_py(cbp::scan_sizes(sample, kinds_of(families), s_max_grid,
                                          make_em_config(tol, max_iters, "binomial", 3),
                                          n_starts, seed, plain_aic, threads));
      },
      py::arg("sample"),
      py::arg("families") =
          std::vector<std::string>{"binomial", "negative_binomial", "poisson"},
      py::arg("s_max_grid") = std::vector<int>{3, 4, 5, 6}, py::arg("n_starts") = 10,
      py::arg("seed") = 1, py::arg("tol") = 1e-6, py::arg("max_iters") = 50000,
      py::arg("plain_aic") = false, py::arg("threads") = 0);

  // --- bootstrap -----------------------------------------------------------------

  py::class_<cbp::BootstrapSummary>(m, "BootstrapSummary")
      .def_readonly("param_names", &cbp::BootstrapSummary::param_names)
      .def_readonly("replicates", &cbp::BootstrapSummary::replicates)
      .def_readonly("mse", &cbp::BootstrapSummary::mse)
      .def_readonly("n_success", &cbp::BootstrapSummary::n_success)
      .def_readonly("n_failed", &cbp::BootstrapSummary::n_failed)
      .def_readonly("n_extinct", &cbp::BootstrapSummary::n_extinct)
      .def("__repr__", [](const cbp::BootstrapSummary& s) {
        return "BootstrapSummary(n_success=" + std::to_string(s.n_success) +
               ", n_failed=" + std::to_string(s.n_failed) + ")";
      });

  m.def(
      "bootstrap",
      [](std::vector<double> p, double theta, const std::string& family,
         const std::string& scheme, std::int64_t reps, std::int64_t generations,
         std::int64_t z0, std::uint64_t seed, std::int64_t sizes_starts, double tol,
         std::int64_t max_iters, std::optional<std::vector<double>> truth, int threads) {
        cbp::ControlKind kind = kind_of(family);
        cbp::EmFit fit = generator_fit(std::move(p), theta, kind);
        cbp::BootstrapConfig cfg;
        cfg.n_reps = reps;
        cfg.n_generations = generations;
        cfg.z0 = z0;
        cfg.master_seed = seed;
        cfg.sizes_starts = sizes_starts;
        cfg.em = cbp::EmConfig{tol, max_iters, kind, fit.p.s_max()};
        cfg.n_threads = threads;
        std::vector<double> t = truth ? *truth : [&] {
          auto v = fit.p.probs();
          v.push_back(fit.m);
          v.push_back(fit.sigma2);
          v.push_back(fit.mu);
          return v;
        }();
        return cbp::bootstrap(fit, cbp::scheme_from_string(scheme), cfg, t);
      },
      py::arg("p"), py::arg("theta"), py::arg("family") = "binomial",
      py::arg("scheme") = "progenitors", py::arg("reps") = 500,
      py::arg("generations") = 30, py::arg("z0") = 1, py::arg("seed") = 1,
      py::arg("sizes_starts") = 10, py::arg("tol") = 1e-6, py::arg("max_iters") = 50000,
      py::arg("truth") = std::nullopt, py::arg("threads") = 0);
  m.def("efficiency", &cbp::efficiency, py::arg("a"), py::arg("b"));

  // --- transition-tree counting ---------------------------------------------------

  m.def("count_b", &cbp::count_b, py::arg("phi_star"), py::arg("z_next"), py::arg("s_max"));
  m.def("count_b_star", &cbp::count_b_star, py::arg("z_l"), py::arg("z_next"),
        py::arg("s_max"));
  m.def("b_max", &cbp::b_max, py::arg("z_l"), py::arg("s_max"));
  m.def("b_star_max", &cbp::b_star_max, py::arg("z_l"), py::arg("s_max"));
  m.def(
      "bmax_table",
      [](std::int64_t z_max, int s_max) {
        py::list rows;
        for (const auto& row : cbp::bmax_table(z_max, s_max))
          rows.append(py::make_tuple(row.z, row.b_max, row.b_star_max));
        return rows;
      },
      py::arg("z_max"), py::arg("s_max"));
  m.def(
      "enumerate_fixed",
      [](std::int64_t phi_star, std::int64_t z_next, int s_max) {
        py::list out;
        for (const auto& config : cbp::enumerate_fixed(phi_star, z_next, s_max))
          out.append(config.counts);
        return out;
      },
      py::arg("phi_star"), py::arg("z_next"), py::arg("s_max"));
}
