#include "qip/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using qip::cli::RunConfig;

namespace {

void add_formula(CLI::App* app, RunConfig& cfg) {
  app->add_option("--formula", cfg.formula, "prenex QBF text");
  app->add_option("--formula-file", cfg.formula_file, "file holding the QBF");
}

void add_output(CLI::App* app, RunConfig& cfg) {
  app->add_option("--output", cfg.output, "write the report here instead of stdout");
  app->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
}

int fail(int code, const std::string& msg) {
  std::cerr << "qipsim: " << msg << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator for the GF(2^k) sum-check interactive proof for TQBF"};
  app.require_subcommand(1);
  app.set_version_flag("--version", qip::cli::kVersion);
  RunConfig cfg;

  auto* classical = app.add_subcommand("classical", "classical protocol runs")->require_subcommand(1);
  auto* c_run = classical->add_subcommand("run", "sampled protocol executions");
  auto* c_exh = classical->add_subcommand("exhaustive", "exact acceptance over all challenges");
  for (auto* sub : {c_run, c_exh}) {
    add_formula(sub, cfg);
    sub->add_option("--k", cfg.k, "field size exponent")->required();
    sub->add_option("--prover", cfg.prover, "honest, random or optimal");
    sub->add_option("--seed", cfg.seed, "run seed");
    add_output(sub, cfg);
  }
  c_run->add_option("--trials", cfg.trials, "number of executions");
  c_run->add_flag("--transcripts", cfg.transcripts, "include full transcripts");

  auto* quantum = app.add_subcommand("quantum", "entangled prover simulation")->require_subcommand(1);
  auto* q_run = quantum->add_subcommand("run", "exact acceptance of the parallel-repetition verifier");
  add_formula(q_run, cfg);
  q_run->add_option("--k", cfg.k, "field size exponent")->required();
  q_run->add_option("--m", cfg.m, "number of parallel rows");
  q_run->add_option("--prover", cfg.prover, "honest, lookahead:full or biased:valid");
  q_run->add_option("--u", cfg.u_mode, "exhaustive or sample");
  q_run->add_option("--samples", cfg.samples, "u vectors to sample");
  q_run->add_option("--seed", cfg.seed, "sampling seed");
  q_run->add_flag("--dense-check", cfg.dense_check, "compare against a dense state-vector simulation");
  q_run->add_flag("--events", cfg.events, "report A and B_U event probabilities");
  q_run->add_flag("--timing", cfg.timing, "include wall-clock time");
  add_output(q_run, cfg);

  auto* bound = app.add_subcommand("bound", "evaluate the soundness bound");
  bound->add_option("--xlen", cfg.xlen, "input length");
  bound->add_option("--n", cfg.n, "number of variables");
  bound->add_option("--N", cfg.N, "number of rounds (overrides --n)");
  bound->add_option("--d", cfg.d, "degree bound");
  bound->add_option("--m", cfg.bm, "rows");
  bound->add_option("--k", cfg.bk, "field size exponent");
  add_output(bound, cfg);

  auto* field = app.add_subcommand("field", "field utilities")->require_subcommand(1);
  auto* f_table = field->add_subcommand("table", "multiplication table");
  f_table->add_option("--k", cfg.k, "field size exponent")->required();
  add_output(f_table, cfg);

  CLI11_PARSE(app, argc, argv);

  for (auto* sub : {c_run, c_exh, q_run, bound, f_table})
    if (sub->parsed()) cfg.command = (sub->get_parent() == &app ? "" : sub->get_parent()->get_name() + " ") + sub->get_name();

  try {
    const std::string text = qip::cli::render(qip::cli::run_command(cfg), cfg.format);
    if (cfg.output) {
      std::ofstream out(*cfg.output, std::ios::binary);
      if (!out) return fail(2, "invalid input: cannot write " + *cfg.output);
      out << text;
    } else {
      std::cout << text;
    }
  } catch (const qip::ParseError& e) {
    return fail(3, e.what());
  } catch (const qip::SizeLimitError& e) {
    return fail(4, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(2, std::string("invalid input: ") + e.what());
  } catch (const std::out_of_range& e) {
    return fail(2, std::string("invalid input: ") + e.what());
  } catch (const std::exception& e) {
    return fail(1, std::string("error: ") + e.what());
  }
  return 0;
}
