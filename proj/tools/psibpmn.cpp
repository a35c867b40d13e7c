// psibpmn: compile transaction networks to BPMN, simulate and audit models.
//
// Exit codes: 0 success, 1 validation or conformance failure, 2 usage or I/O.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "psibpmn/bpmn_xml.hpp"
#include "psibpmn/compiler.hpp"
#include "psibpmn/coverage.hpp"
#include "psibpmn/error.hpp"
#include "psibpmn/simulator.hpp"

using namespace psibpmn;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorCode::Io, "cannot write " + path);
}

DetailLevel level_of(const std::string& text) {
  auto level = parse_detail_level(text);
  if (!level) throw CLI::ValidationError("--level", "expected happy, dissent or complete");
  return *level;
}

struct Bounds {
  int rerequest = 1, redeclare = 1, revocations = 1;
  void add(CLI::App* cmd) {
    cmd->add_option("--max-rerequest", rerequest, "re-Request loop bound")->check(CLI::NonNegativeNumber);
    cmd->add_option("--max-redeclare", redeclare, "re-Declare loop bound")->check(CLI::NonNegativeNumber);
    cmd->add_option("--max-revocations", revocations, "revocations per transaction")
        ->check(CLI::NonNegativeNumber);
  }
  LoopBounds get() const { return LoopBounds{rerequest, redeclare, revocations}; }
};

int report_violations(const std::vector<Violation>& vs) {
  for (const auto& v : vs) {
    std::cerr << to_string(v.severity) << ": " << to_string(v.rule);
    for (const auto& id : v.ids) std::cerr << " " << id;
    if (!v.message.empty()) std::cerr << ": " << v.message;
    std::cerr << "\n";
  }
  return has_errors(vs) ? 1 : 0;
}

void print_sequence(const char* label, const std::vector<Act>& seq) {
  std::cerr << "  " << label << ":";
  for (Act a : seq) std::cerr << " " << to_string(a);
  std::cerr << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compile DEMO transaction networks into BPMN collaborations and check them"};
  app.require_subcommand(1);

  std::string net_path, model_path, out_path, level_text = "complete";
  bool allow_breach = false;

  auto* validate = app.add_subcommand("validate", "check a network document");
  validate->add_option("network", net_path, "network JSON")->required();
  validate->add_flag("--allow-composition-breach", allow_breach, "report breaches as warnings");

  bool layout_grid = false, force = false;
  auto* generate = app.add_subcommand("generate", "compile a network into BPMN 2.0 XML");
  generate->add_option("network", net_path, "network JSON")->required();
  generate->add_option("--level", level_text, "happy | dissent | complete")->required();
  generate->add_option("--out", out_path, "output .bpmn file")->required();
  generate->add_flag("--layout-grid", layout_grid, "emit a simple diagram section");
  generate->add_flag("--allow-composition-breach", allow_breach);
  generate->add_flag("--force", force, "write even if the model does not lint clean");

  std::string mapping_path, annotations_path, report_path, format_text = "csv";
  bool heuristic = false, decimal_comma = false;
  auto* analyze = app.add_subcommand("analyze", "coverage matrix of a model");
  analyze->add_option("model", model_path, "BPMN 2.0 XML file")->required();
  analyze->add_option("--network", net_path, "network JSON")->required();
  analyze->add_option("--mapping", mapping_path, "explicit act mapping JSON");
  analyze->add_option("--annotations", annotations_path, "implicit act annotations JSON");
  analyze->add_flag("--heuristic-names", heuristic, "match node names and tags");
  analyze->add_option("--report", report_path, "report file")->required();
  analyze->add_option("--format", format_text, "csv | text")->check(CLI::IsMember({"csv", "text"}));
  analyze->add_flag("--decimal-comma", decimal_comma, "write percentages as 44,6%");

  Bounds bounds;
  bool exhaustive = false, random = false;
  std::uint64_t seed = 0;
  std::size_t runs = 100, max_states = 1'000'000;
  std::string traces_path;
  auto* simulate = app.add_subcommand("simulate", "explore the compiled model");
  simulate->add_option("network", net_path, "network JSON")->required();
  simulate->add_option("--level", level_text, "happy | dissent | complete")->required();
  auto* ex_flag = simulate->add_flag("--exhaustive", exhaustive, "enumerate all interleavings");
  auto* rnd_flag = simulate->add_flag("--random", random, "seeded random runs");
  ex_flag->excludes(rnd_flag);
  simulate->add_option("--seed", seed, "random seed")->needs(rnd_flag);
  simulate->add_option("--runs", runs, "number of random runs")->needs(rnd_flag);
  simulate->add_option("--max-states", max_states, "state cap");
  simulate->add_option("--traces", traces_path, "JSON lines trace dump");
  bounds.add(simulate);

  auto* conformance = app.add_subcommand("conformance", "compare the model with the oracle");
  conformance->add_option("network", net_path, "network JSON")->required();
  conformance->add_option("--level", level_text, "happy | dissent | complete")->required();
  conformance->add_option("--max-states", max_states, "state cap");
  bounds.add(conformance);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, std::cerr, std::cerr);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      auto net = parse_network_spec(read_file(net_path));
      ValidationOptions vo;
      vo.allow_composition_breach = allow_breach;
      return report_violations(validate_network(net, vo));
    }
    if (*generate) {
      auto net = parse_network_spec(read_file(net_path));
      CompileOptions co;
      co.allow_composition_breach = allow_breach;
      auto model = compile(net, level_of(level_text), co);
      SerializeOptions so;
      so.force = force;
      so.layout_grid = layout_grid;
      write_file(out_path, serialize(model, so));
      std::cerr << "wrote " << out_path << " (" << model.pools.size() << " pools, "
                << model.node_count() << " nodes)\n";
      return 0;
    }
    if (*analyze) {
      auto net = parse_network_spec(read_file(net_path));
      auto model = parse_bpmn(read_file(model_path));
      ClassifyOptions co;
      if (!mapping_path.empty()) co.mapping = parse_mapping(read_file(mapping_path));
      co.heuristic_names = heuristic;
      AnnotationSet ann;
      if (!annotations_path.empty()) ann = parse_annotations(read_file(annotations_path));
      auto matrix = classify_acts(net, model, co, ann);
      for (const auto& w : matrix.warnings) std::cerr << "warning: " << w << "\n";
      auto format = format_text == "text" ? ReportFormat::Text : ReportFormat::Csv;
      write_file(report_path, render_matrix(matrix, format, decimal_comma));
      auto t = matrix.total();
      std::cerr << "Total Implemented = " << t.implemented() << " (in " << t.total() << ") = "
                << percent(t.implemented(), t.total(), decimal_comma) << "\n";
      return 0;
    }
    if (*simulate) {
      auto net = parse_network_spec(read_file(net_path));
      auto model = compile(net, level_of(level_text));
      ExploreOptions o;
      o.bounds = bounds.get();
      o.max_states = max_states;
      if (random) {
        o.mode = ExploreMode::Random;
        o.seed = seed;
        o.runs = runs;
      }
      ExploreStats stats;
      auto traces = explore(model, o, &stats);
      std::map<Outcome, std::size_t> outcomes;
      for (const auto& t : traces) ++outcomes[t.outcome];
      std::cerr << traces.size() << " distinct traces";
      if (!random) std::cerr << ", " << stats.states << " states";
      std::cerr << "\n";
      for (const auto& [oc, n] : outcomes) std::cerr << "  " << to_string(oc) << ": " << n << "\n";
      if (!traces_path.empty()) {
        std::ostringstream os;
        write_traces_jsonl(os, traces);
        write_file(traces_path, os.str());
      }
      return 0;
    }
    if (*conformance) {
      auto net = parse_network_spec(read_file(net_path));
      auto level = level_of(level_text);
      auto verdict = check_conformance(net, level, bounds.get(), max_states);
      std::cerr << (verdict.conformant ? "Conformant" : "NonConformant") << " ("
                << verdict.stats.states << " states)\n";
      for (const auto& tv : verdict.transactions) {
        if (tv.missing.empty() && tv.spurious.empty()) continue;
        std::cerr << tv.transaction << ": " << tv.missing.size() << " missing, "
                  << tv.spurious.size() << " spurious\n";
        for (const auto& s : tv.missing) print_sequence("missing", s);
        for (const auto& s : tv.spurious) print_sequence("spurious", s);
      }
      return verdict.conformant ? 0 : 1;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == ErrorCode::Io ? 2 : 1;
  }
  return 2;
}
