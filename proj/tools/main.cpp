// legnet: LEG Net inference engine CLI.
//
// Subcommands: reproduce-tables, propagate, converge, check, estimate,
// simulate. Exit codes: 0 success, 1 validation/config error, 2 numeric
// failure (frozen margin, non-convergence, golden mismatch).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "legnet/classifier.hpp"
#include "legnet/errors.hpp"
#include "legnet/io.hpp"
#include "legnet/net.hpp"
#include "legnet/reference_tables.hpp"

namespace {

using namespace legnet;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;

std::string fmt7(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.7f", x);
  return buf;
}

std::string fmt_exact(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

enum class Format { Table, Rows };

Format to_format(const std::string& name) {
  if (name == "table") return Format::Table;
  if (name == "rows") return Format::Rows;
  throw ValidationError("--format must be 'table' or 'rows'");
}

io::NetDocument load_net_document(const std::string& path) {
  return io::parse_net_document(io::read_file(path), path);
}

// ---------------------------------------------------------------------------
// reproduce-tables

LegNet figure2_net() {
  std::vector<double> table(golden::kFigure2Table.begin(),
                            golden::kFigure2Table.end());
  return LegNet({Cmd({"I1", "I2", "O"}, std::move(table), 2)});
}

struct NamedRow {
  int sweep = 0;
  std::string variable;
  double p_i1 = 0.0, p_i2 = 0.0, p_o = 0.0, error = 0.0;
};

std::vector<NamedRow> project_rows(const ConvergenceReport& report) {
  std::size_t i1 = 0, i2 = 0;
  for (std::size_t k = 0; k < report.targets.size(); ++k) {
    if (report.targets[k].var == "I1") i1 = k;
    if (report.targets[k].var == "I2") i2 = k;
  }
  std::vector<NamedRow> rows;
  for (const auto& row : report.rows) {
    rows.push_back({row.sweep, row.updated, row.evidence_marginals[i1],
                    row.evidence_marginals[i2], row.tracked_marginals[0],
                    row.error});
  }
  return rows;
}

double golden_mismatch(const std::vector<NamedRow>& rows,
                       std::span<const golden::Row> expected) {
  double worst = std::numeric_limits<double>::infinity();
  if (rows.size() != expected.size()) return worst;
  worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    worst = std::max({worst, std::abs(rows[i].p_i1 - expected[i][0]),
                      std::abs(rows[i].p_i2 - expected[i][1]),
                      std::abs(rows[i].p_o - expected[i][2]),
                      std::abs(rows[i].error - expected[i][3])});
  }
  return worst;
}

int run_reproduce_tables(Format format) {
  const LegNet net = figure2_net();
  const Evidence order_a{{"I1", golden::kEvidenceI1},
                         {"I2", golden::kEvidenceI2}};
  const Evidence order_b{{"I2", golden::kEvidenceI2},
                         {"I1", golden::kEvidenceI1}};
  const std::vector<VariableId> track{"O"};

  // tol small enough that no row converges before the sweep budget runs out
  auto single_pass = [&](const Evidence& ev) {
    return project_rows(converge(net, ev, 1e-15, 1, track).second);
  };
  auto three_sweeps = [&](const Evidence& ev) {
    return project_rows(converge(net, ev, 1e-15, 3, track).second);
  };

  struct TableRun {
    const char* title;
    const char* tag;
    std::vector<NamedRow> rows;
    std::span<const golden::Row> expected;
    double tol;
    bool iterated;
  };
  const std::vector<TableRun> runs = {
      {"Table 1(a)", "table1a", single_pass(order_a), golden::kTable1a,
       golden::kTable1Tol, false},
      {"Table 1(b)", "table1b", single_pass(order_b), golden::kTable1b,
       golden::kTable1Tol, false},
      {"Table 2(a)", "table2a", three_sweeps(order_a), golden::kTable2a,
       golden::kTable2Tol, true},
      {"Table 2(b)", "table2b", three_sweeps(order_b), golden::kTable2b,
       golden::kTable2Tol, true},
  };

  bool all_ok = true;
  for (const auto& run : runs) {
    const double mismatch = golden_mismatch(run.rows, run.expected);
    const bool ok = mismatch <= run.tol;
    all_ok = all_ok && ok;
    if (format == Format::Table) {
      std::cout << run.title << "\n";
      if (run.iterated) {
        std::printf("%-10s %-9s %-10s %-10s %-10s %s\n", "Iteration",
                    "Variable", "P(I1)", "P(I2)", "P(O)", "Error");
        for (const auto& r : run.rows) {
          std::printf("%-10d %-9s %s  %s  %s  %s\n", r.sweep,
                      r.variable.c_str(), fmt7(r.p_i1).c_str(),
                      fmt7(r.p_i2).c_str(), fmt7(r.p_o).c_str(),
                      fmt7(r.error).c_str());
        }
      } else {
        std::printf("%-9s %-10s %-10s %-10s %s\n", "Variable", "P(I1)",
                    "P(I2)", "P(O)", "Error");
        for (const auto& r : run.rows) {
          std::printf("%-9s %s  %s  %s  %s\n", r.variable.c_str(),
                      fmt7(r.p_i1).c_str(), fmt7(r.p_i2).c_str(),
                      fmt7(r.p_o).c_str(), fmt7(r.error).c_str());
        }
      }
      std::printf("golden check: %s (max deviation %.3g, tolerance %.0e)\n\n",
                  ok ? "OK" : "MISMATCH", mismatch, run.tol);
    } else {
      for (const auto& r : run.rows) {
        std::cout << run.tag << " " << r.sweep << " " << r.variable << " "
                  << fmt7(r.p_i1) << " " << fmt7(r.p_i2) << " " << fmt7(r.p_o)
                  << " " << fmt7(r.error) << "\n";
      }
      std::cout << "golden " << run.tag << " " << (ok ? "ok" : "mismatch")
                << " " << fmt_exact(mismatch) << "\n";
    }
  }
  if (!all_ok) {
    std::cerr << "error: computed values deviate from the golden tables\n";
    return kExitNumeric;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// propagate / converge

Evidence resolve_evidence(const std::string& flag,
                          const io::NetDocument& doc) {
  if (!flag.empty()) return io::parse_evidence_string(flag);
  if (!doc.evidence.empty()) return doc.evidence;
  throw ValidationError("no evidence given: pass --evidence or add an "
                        "evidence block to the net file");
}

int run_propagate(const std::string& net_path, const std::string& evidence,
                  const std::string& order, Format format) {
  const auto doc = load_net_document(net_path);
  LegNet net = io::to_net(doc);
  Evidence ev = resolve_evidence(evidence, doc);
  if (order == "sorted") {
    std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
      return a.var < b.var;
    });
  } else if (order != "given") {
    throw ValidationError("--order must be 'given' or 'sorted'");
  }
  for (const auto& t : ev) {
    net = set_evidence(net, t.var, t.p);
  }
  if (format == Format::Table) {
    std::printf("%-12s %s\n", "Variable", "Marginal");
    for (const auto& v : net.variables()) {
      std::printf("%-12s %s\n", v.c_str(), fmt7(marginal_of(net, v)).c_str());
    }
  } else {
    for (const auto& v : net.variables()) {
      std::cout << "marginal " << v << " " << fmt_exact(marginal_of(net, v))
                << "\n";
    }
  }
  return kExitOk;
}

int run_converge(const std::string& net_path, const std::string& evidence,
                 double tol, int max_iter, const std::string& track_flag,
                 Format format) {
  const auto doc = load_net_document(net_path);
  const LegNet net = io::to_net(doc);
  const Evidence ev = resolve_evidence(evidence, doc);

  std::vector<VariableId> track;
  if (!track_flag.empty()) {
    std::stringstream stream(track_flag);
    std::string item;
    while (std::getline(stream, item, ',')) track.push_back(item);
  } else {
    for (const auto& v : net.variables()) {
      if (std::none_of(ev.begin(), ev.end(), [&](const auto& t) {
            return t.var == v;
          })) {
        track.push_back(v);
      }
    }
  }

  const auto [result, report] = converge(net, ev, tol, max_iter, track);
  (void)result;

  if (format == Format::Table) {
    std::printf("%-10s %-9s", "Iteration", "Variable");
    for (const auto& t : report.targets) {
      std::printf(" %-10s", ("P(" + t.var + ")").c_str());
    }
    for (const auto& v : report.tracked) {
      std::printf(" %-10s", ("P(" + v + ")").c_str());
    }
    std::printf(" %s\n", "Error");
    for (const auto& row : report.rows) {
      std::printf("%-10d %-9s", row.sweep, row.updated.c_str());
      for (double m : row.evidence_marginals) {
        std::printf(" %s ", fmt7(m).c_str());
      }
      for (double m : row.tracked_marginals) {
        std::printf(" %s ", fmt7(m).c_str());
      }
      std::printf(" %s\n", fmt7(row.error).c_str());
    }
    std::printf("%s after %d sweep(s)\n",
                report.converged ? "converged" : "did not converge",
                report.sweeps_used);
  } else {
    for (const auto& row : report.rows) {
      std::cout << "row " << row.sweep << " " << row.updated;
      for (double m : row.evidence_marginals) std::cout << " " << fmt_exact(m);
      for (double m : row.tracked_marginals) std::cout << " " << fmt_exact(m);
      std::cout << " " << fmt_exact(row.error) << "\n";
    }
    std::cout << "converged " << (report.converged ? "true" : "false") << " "
              << report.sweeps_used << "\n";
  }
  if (!report.converged) {
    std::cerr << "error: did not reach tolerance " << tol << " within "
              << max_iter << " sweep(s)\n";
    return kExitNumeric;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// check / estimate / simulate

int run_check(const std::string& net_path, Format format) {
  const auto doc = load_net_document(net_path);
  const LegNet net = io::to_net(doc);
  const auto diagnostics = validate(net);
  if (format == Format::Rows) {
    for (const auto& d : diagnostics) std::cout << "diagnostic " << d << "\n";
    std::cout << "consistency_error " << fmt_exact(consistency_error(net))
              << "\n";
  } else {
    for (const auto& d : diagnostics) std::cout << d << "\n";
    std::printf("consistency error: %.3g\n", consistency_error(net));
  }
  if (!diagnostics.empty()) {
    std::cerr << "error: net failed validation with "
              << diagnostics.size() << " diagnostic(s)\n";
    return kExitConfig;
  }
  std::cout << "ok\n";
  return kExitOk;
}

int run_estimate(const std::string& constraints_path,
                 const std::string& out_path) {
  const auto doc = load_net_document(constraints_path);
  const auto estimated = io::estimate_from_document(doc);
  io::write_file(out_path, io::serialize_net_document(estimated));
  std::cout << "wrote " << out_path << "\n";
  return kExitOk;
}

int run_simulate(const std::string& scenario_path, const std::string& out_path,
                 Format format) {
  const auto scenario_doc =
      io::parse_scenario_document(io::read_file(scenario_path), scenario_path);
  const auto net_path =
      (std::filesystem::path(scenario_path).parent_path() /
       scenario_doc.net_path)
          .string();
  const auto net_doc = load_net_document(net_path);
  const sim::Scenario scenario = io::build_scenario(scenario_doc, net_doc);
  const sim::PerformanceReport report = sim::simulate(scenario);

  auto rows_output = [&](std::ostream& out) {
    out << "report objects " << report.object_count << " slots "
        << report.slot_count << "\n";
    auto emit = [&](const char* name, const sim::PipelineResult& r) {
      out << "pipeline " << name << " correct_yes " << r.counts.correct_yes
          << " correct_no " << r.counts.correct_no << " wrong_yes "
          << r.counts.wrong_yes << " wrong_no " << r.counts.wrong_no
          << " unknown " << r.counts.unknown << " score "
          << fmt_exact(r.counts.score) << "\n";
      for (std::size_t slot = 0; slot < r.labels.size(); ++slot) {
        for (std::size_t i = 0; i < r.labels[slot].size(); ++i) {
          out << "trace " << name << " " << slot << " " << i << " "
              << sim::label_name(r.labels[slot][i]) << " "
              << fmt_exact(r.probabilities[slot][i]) << "\n";
        }
      }
    };
    if (report.markov.has_value()) emit("markov", *report.markov);
    if (report.legnet.has_value()) emit("legnet", *report.legnet);
  };

  if (format == Format::Rows) {
    rows_output(std::cout);
  } else {
    std::printf("%zu object(s), %d slot(s)\n", report.object_count,
                report.slot_count);
    std::printf("%-8s %9s %9s %8s %8s %8s %10s\n", "Pipeline", "CorrectY",
                "CorrectN", "WrongY", "WrongN", "Unknown", "Score");
    auto emit = [&](const char* name, const sim::PipelineResult& r) {
      std::printf("%-8s %9lld %9lld %8lld %8lld %8lld %10.1f\n", name,
                  static_cast<long long>(r.counts.correct_yes),
                  static_cast<long long>(r.counts.correct_no),
                  static_cast<long long>(r.counts.wrong_yes),
                  static_cast<long long>(r.counts.wrong_no),
                  static_cast<long long>(r.counts.unknown), r.counts.score);
    };
    if (report.markov.has_value()) emit("markov", *report.markov);
    if (report.legnet.has_value()) emit("legnet", *report.legnet);
    std::printf("runtime: %.3f s\n", report.runtime_seconds);
  }
  if (!out_path.empty()) {
    std::ostringstream buffer;
    rows_output(buffer);
    io::write_file(out_path, buffer.str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LEG Net inference engine: minimum-information updating over "
               "component marginal distributions, a Markov-chain baseline, "
               "and a slot-based classification simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // --format may follow the subcommand

  std::string format_name = "table";
  app.add_option("--format", format_name, "Output format: table or rows")
      ->capture_default_str();

  auto* reproduce = app.add_subcommand(
      "reproduce-tables",
      "Run the built-in worked example and check it against golden values");

  std::string net_path, evidence_flag, order_flag = "given";
  auto* propagate =
      app.add_subcommand("propagate", "Apply evidence in a single pass");
  propagate->add_option("--net", net_path, "Net file")->required();
  propagate->add_option("--evidence", evidence_flag,
                        "Evidence list VAR=P[,VAR=P...]");
  propagate->add_option("--order", order_flag, "Update order: given or sorted")
      ->capture_default_str();

  double tol = 1e-9;
  int max_iter = 100;
  std::string track_flag;
  auto* converge_cmd = app.add_subcommand(
      "converge", "Iterate evidence sweeps until the marginals settle");
  converge_cmd->add_option("--net", net_path, "Net file")->required();
  converge_cmd->add_option("--evidence", evidence_flag,
                           "Evidence list VAR=P[,VAR=P...]");
  converge_cmd->add_option("--tol", tol, "Convergence tolerance")
      ->capture_default_str();
  converge_cmd->add_option("--max-iter", max_iter, "Maximum sweeps")
      ->capture_default_str();
  converge_cmd->add_option("--track", track_flag,
                           "Extra variables to report (default: all "
                           "non-evidence variables)");

  auto* check = app.add_subcommand(
      "check", "Validate a net file and report diagnostics");
  check->add_option("--net", net_path, "Net file")->required();

  std::string constraints_path, out_path;
  auto* estimate = app.add_subcommand(
      "estimate", "Solve a constraint net into explicit tables");
  estimate->add_option("--constraints", constraints_path, "Constraint file")
      ->required();
  estimate->add_option("--out", out_path, "Output net file")->required();

  std::string scenario_path, report_path;
  auto* simulate =
      app.add_subcommand("simulate", "Run a classification scenario");
  simulate->add_option("--scenario", scenario_path, "Scenario file")
      ->required();
  simulate->add_option("--out", report_path,
                       "Also write the machine-readable report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const Format format = to_format(format_name);
    if (app.got_subcommand(reproduce)) return run_reproduce_tables(format);
    if (app.got_subcommand(propagate)) {
      return run_propagate(net_path, evidence_flag, order_flag, format);
    }
    if (app.got_subcommand(converge_cmd)) {
      return run_converge(net_path, evidence_flag, tol, max_iter, track_flag,
                          format);
    }
    if (app.got_subcommand(check)) return run_check(net_path, format);
    if (app.got_subcommand(estimate)) {
      return run_estimate(constraints_path, out_path);
    }
    if (app.got_subcommand(simulate)) {
      return run_simulate(scenario_path, report_path, format);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
