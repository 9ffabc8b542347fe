// Command-line front end: simulate datasets and urn traces, discover bivariate
// structure, answer interventional queries, emit oracle tables, and run the
// full method-comparison sweep.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dofinetti/dofinetti.hpp"

namespace {

using namespace dofinetti;

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open input file: " + path);
  return is;
}

Dag parse_dag_edges(const std::string& text, int num_vars_hint) {
  std::vector<std::pair<int, int>> edges;
  int max_var = -1;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto arrow = item.find("->");
    if (arrow == std::string::npos) throw std::runtime_error("bad edge '" + item + "'");
    const int from = std::stoi(item.substr(0, arrow));
    const int to = std::stoi(item.substr(arrow + 2));
    edges.push_back({from, to});
    max_var = std::max({max_var, from, to});
  }
  const int d = num_vars_hint > 0 ? num_vars_hint : max_var + 1;
  return Dag(d, std::move(edges));
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal discovery and effect estimation in exchangeable multi-environment data"};
  app.require_subcommand(1);

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "Sample a multi-environment dataset (CSV out)");
  std::string sim_graph = "x->y", sim_dag, sim_cards, sim_out;
  double sim_alpha = 1.0, sim_beta = 3.0, sim_conc = 1.0;
  int sim_envs = 1000, sim_positions = 2;
  std::uint64_t sim_seed = 0;
  sim->add_option("--graph", sim_graph, "Bivariate graph: x->y, y->x, indep");
  sim->add_option("--alpha", sim_alpha, "Beta prior alpha");
  sim->add_option("--beta", sim_beta, "Beta prior beta");
  sim->add_option("--envs", sim_envs, "Number of environments")->required();
  sim->add_option("--positions", sim_positions, "Positions per environment");
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--dag", sim_dag, "General mode: edge list like 0->1,1->2");
  sim->add_option("--cards", sim_cards, "General mode: per-variable cardinalities, e.g. 2,2,3");
  sim->add_option("--concentration", sim_conc, "General mode: Dirichlet concentration");
  sim->add_option("-o,--out", sim_out, "Output CSV path (default stdout)");

  // ---- discover ----
  auto* disc = app.add_subcommand("discover", "Identify the bivariate graph (report out)");
  std::string disc_data, disc_method = "definetti", disc_out;
  double disc_sig = 0.05;
  std::uint64_t disc_seed = 0;
  disc->add_option("--data", disc_data, "Dataset CSV")->required();
  disc->add_option("--significance", disc_sig, "Test level");
  disc->add_option("--method", disc_method, "definetti or iid");
  disc->add_option("--seed", disc_seed, "Orientation seed for the iid baseline");
  disc->add_option("-o,--out", disc_out, "Output path (default stdout)");

  // ---- effect ----
  auto* eff = app.add_subcommand("effect", "Answer a query file (table out)");
  std::string eff_data, eff_table, eff_dag, eff_query, eff_out, eff_zero = "error";
  double eff_smoothing = 0.0;
  int eff_num_vars = 0;
  eff->add_option("--data", eff_data, "Dataset CSV (fitted with fit_joint)");
  eff->add_option("--table", eff_table, "Pre-fitted table in text format");
  eff->add_option("--dag", eff_dag, "x->y / y->x / indep, or an edge list like 0->1,1->2")
      ->required();
  eff->add_option("--num-vars", eff_num_vars, "Variable count for edge-list DAGs");
  eff->add_option("--query", eff_query, "Query description file")->required();
  eff->add_option("--smoothing", eff_smoothing, "Additive smoothing for the histogram fit");
  eff->add_option("--zero-mass", eff_zero, "Zero-mass context policy: error or uniform");
  eff->add_option("-o,--out", eff_out, "Output path (default stdout)");

  // ---- urn ----
  auto* urn = app.add_subcommand("urn", "Run the causal Polya urn (trace CSV out)");
  double urn_alpha = 1.0, urn_beta = 1.0;
  int urn_steps = 100;
  std::uint64_t urn_seed = 0;
  std::vector<std::string> urn_interventions;
  std::string urn_out;
  urn->add_option("--alpha", urn_alpha, "Initial black balls per compartment (integer)");
  urn->add_option("--beta", urn_beta, "Initial white balls per compartment (integer)");
  urn->add_option("--steps", urn_steps, "Number of draws");
  urn->add_option("--seed", urn_seed, "RNG seed");
  urn->add_option("--intervene", urn_interventions, "Forced X draws, pos=value (repeatable)");
  urn->add_option("-o,--out", urn_out, "Output CSV path (default stdout)");

  // ---- sweep ----
  auto* sweep = app.add_subcommand("sweep", "Run the method-comparison sweep (CSVs + SVG out)");
  std::string sweep_config, sweep_outdir;
  sweep->add_option("--config", sweep_config, "Experiment config file")->required();
  sweep->add_option("--out-dir", sweep_outdir, "Override the config's output_dir");

  // ---- oracle ----
  auto* ora = app.add_subcommand("oracle", "Emit analytic/quadrature tables (table out)");
  std::string ora_graph = "x->y", ora_method = "analytic", ora_out;
  double ora_alpha = 1.0, ora_beta = 3.0;
  int ora_positions = 2;
  std::size_t ora_nodes = 64;
  std::vector<std::string> ora_interventions;
  ora->add_option("--graph", ora_graph, "Bivariate graph");
  ora->add_option("--alpha", ora_alpha, "Beta prior alpha");
  ora->add_option("--beta", ora_beta, "Beta prior beta");
  ora->add_option("--positions", ora_positions, "Positions in the block");
  ora->add_option("--method", ora_method, "analytic or quadrature");
  ora->add_option("--nodes", ora_nodes, "Quadrature nodes");
  ora->add_option("--intervene", ora_interventions,
                  "var,pos,value (repeatable); absent emits the observational block");
  ora->add_option("-o,--out", ora_out, "Output path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      std::ofstream file;
      if (sim_dag.empty()) {
        sample_icm_bivariate(parse_bivariate_graph(sim_graph), BetaPrior(sim_alpha, sim_beta),
                             sim_envs, sim_positions, sim_seed)
            .write_csv(open_output(file, sim_out));
      } else {
        const Dag dag = parse_dag_edges(sim_dag, 0);
        const std::vector<int> cards =
            sim_cards.empty() ? std::vector<int>(dag.num_vars(), 2) : parse_int_list(sim_cards);
        sample_icm_general(dag, cards, sim_conc, sim_envs, sim_positions, sim_seed)
            .write_csv(open_output(file, sim_out));
      }
    } else if (*disc) {
      auto is = open_input(disc_data);
      const ExchangeableDataset data = ExchangeableDataset::read_csv(is);
      std::ofstream file;
      std::ostream& os = open_output(file, disc_out);
      if (disc_method == "definetti") {
        discover_bivariate_report(data, disc_sig).write_text(os);
      } else if (disc_method == "iid") {
        const BivariateGraph g = discover_bivariate_iid_baseline(data, disc_sig, disc_seed);
        os << "significance = " << disc_sig << "\n"
           << "graph = " << to_string(g) << "\n";
      } else {
        throw std::runtime_error("unknown discover method: " + disc_method);
      }
    } else if (*eff) {
      if (eff_data.empty() == eff_table.empty()) {
        throw std::runtime_error("effect: give exactly one of --data or --table");
      }
      std::optional<JointTable> table;
      if (!eff_table.empty()) {
        auto is = open_input(eff_table);
        table = JointTable::read_text(is);
      } else {
        auto is = open_input(eff_data);
        table = fit_joint(ExchangeableDataset::read_csv(is), eff_smoothing);
      }
      Dag dag = (eff_dag == "x->y" || eff_dag == "y->x" || eff_dag == "indep")
                    ? Dag::bivariate(parse_bivariate_graph(eff_dag))
                    : parse_dag_edges(eff_dag, eff_num_vars);
      auto qis = open_input(eff_query);
      const Query query = parse_query_file(qis);
      const ZeroMassPolicy policy =
          eff_zero == "uniform" ? ZeroMassPolicy::kUniform : ZeroMassPolicy::kThrow;
      std::size_t fallbacks = 0;
      const JointTable answer = answer_query(*table, dag, query, policy, &fallbacks);
      std::ofstream file;
      answer.write_text(open_output(file, eff_out));
      if (fallbacks > 0) {
        std::cerr << "warning: " << fallbacks << " zero-mass context(s) fell back to uniform\n";
      }
    } else if (*urn) {
      std::map<int, int> forced;
      for (const auto& item : urn_interventions) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw std::runtime_error("bad --intervene '" + item + "'");
        forced[std::stoi(item.substr(0, eq))] = std::stoi(item.substr(eq + 1));
      }
      const UrnTrace trace =
          polya_urn_run(BetaPrior(urn_alpha, urn_beta), urn_steps, forced, urn_seed);
      std::ofstream file;
      trace.write_csv(open_output(file, urn_out));
    } else if (*sweep) {
      auto is = open_input(sweep_config);
      ExperimentConfig config = ExperimentConfig::parse(is);
      if (!sweep_outdir.empty()) config.output_dir = sweep_outdir;
      const SweepResult result = run_sweep(config);
      std::cerr << "wrote " << result.trials_path << ", " << result.summary_path << ", "
                << result.plot_path << "\n";
    } else if (*ora) {
      const BivariateGraph graph = parse_bivariate_graph(ora_graph);
      const BetaPrior prior(ora_alpha, ora_beta);
      InterventionSet intervention;
      for (const auto& item : ora_interventions) {
        const std::vector<int> t = parse_int_list(item);
        if (t.size() != 3) throw std::runtime_error("bad --intervene '" + item + "'");
        intervention.add(t[0], t[1], t[2]);
      }
      JointTable table =
          intervention.empty()
              ? (ora_method == "quadrature"
                     ? quadrature_block_table(graph, prior, ora_positions, ora_nodes)
                     : analytic_block_table(graph, prior, ora_positions))
              : (ora_method == "quadrature"
                     ? quadrature_post_interventional(graph, prior, intervention, ora_positions,
                                                      ora_nodes)
                     : analytic_post_interventional(graph, prior, intervention, ora_positions));
      std::ofstream file;
      table.write_text(open_output(file, ora_out));
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
