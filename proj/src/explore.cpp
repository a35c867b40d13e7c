#include <algorithm>
#include <iterator>
#include <ostream>
#include <random>
#include <unordered_map>

#include "json.hpp"
#include "psibpmn/compiler.hpp"
#include "psibpmn/error.hpp"
#include "psibpmn/simulator.hpp"

namespace psibpmn {

namespace {

[[noreturn]] void state_limit(std::size_t cap) {
  throw Error(ErrorCode::StateSpaceLimitExceeded,
              "more than " + std::to_string(cap) + " states");
}

Trace prepend(const std::vector<TraceEvent>& head, const Trace& tail) {
  Trace t;
  t.events.reserve(head.size() + tail.events.size());
  t.events = head;
  t.events.insert(t.events.end(), tail.events.begin(), tail.events.end());
  t.outcome = tail.outcome;
  return t;
}

// Serial reference: depth-first search memoizing the trace suffixes of
// every visited state.
class SerialExplorer {
 public:
  SerialExplorer(const Simulator& sim, std::size_t cap) : sim_(sim), cap_(cap) {}

  const TraceSet& run(const InstanceState& s) {
    auto key = s.key();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() + on_stack_.size() >= cap_) state_limit(cap_);
    on_stack_.insert(key);
    TraceSet out;
    auto steps = sim_.enabled_steps(s);
    if (steps.empty()) out.insert(Trace{{}, sim_.outcome(s)});
    for (const auto& step : steps) {
      ++transitions_;
      std::vector<TraceEvent> ev;
      auto next = sim_.apply(s, step, &ev);
      if (on_stack_.count(next.key())) continue;  // silent cycle; no new behavior
      for (const auto& tail : run(next)) out.insert(prepend(ev, tail));
    }
    on_stack_.erase(key);
    return memo_.emplace(std::move(key), std::move(out)).first->second;
  }

  std::size_t states() const { return memo_.size(); }
  std::size_t transitions() const { return transitions_; }

 private:
  const Simulator& sim_;
  std::size_t cap_;
  std::unordered_map<std::string, TraceSet> memo_;
  std::set<std::string> on_stack_;
  std::size_t transitions_ = 0;
};

struct Edge {
  std::size_t to;
  std::vector<TraceEvent> events;
};

// Level-synchronous breadth-first construction of the state graph. Each
// level's successors are computed in parallel and merged serially in frontier
// order, so state numbering does not depend on the schedule.
TraceSet explore_parallel(const Simulator& sim, std::size_t cap, ExploreStats* stats) {
  std::vector<InstanceState> states{sim.initial_state()};
  std::unordered_map<std::string, std::size_t> ids{{states[0].key(), 0}};
  std::vector<std::vector<Edge>> edges(1);
  std::vector<std::size_t> frontier{0};
  std::size_t transitions = 0;

  while (!frontier.empty()) {
    std::vector<std::vector<std::pair<InstanceState, std::vector<TraceEvent>>>> succ(frontier.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      const auto& s = states[frontier[k]];
      for (const auto& step : sim.enabled_steps(s)) {
        std::vector<TraceEvent> ev;
        auto next = sim.apply(s, step, &ev);
        succ[k].emplace_back(std::move(next), std::move(ev));
      }
    }
    std::vector<std::size_t> next_frontier;
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      for (auto& [next, ev] : succ[k]) {
        ++transitions;
        auto key = next.key();
        auto [it, fresh] = ids.emplace(std::move(key), states.size());
        if (fresh) {
          if (states.size() >= cap) state_limit(cap);
          states.push_back(std::move(next));
          edges.emplace_back();
          next_frontier.push_back(it->second);
        }
        edges[frontier[k]].push_back(Edge{it->second, std::move(ev)});
      }
    }
    frontier = std::move(next_frontier);
  }

  // Trace suffixes in post-order; back edges (silent cycles) are skipped.
  const std::size_t n = states.size();
  std::vector<TraceSet> suffix(n);
  std::vector<std::uint8_t> mark(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  mark[0] = 1;
  while (!stack.empty()) {
    auto& [u, e] = stack.back();
    if (e < edges[u].size()) {
      std::size_t v = edges[u][e++].to;
      if (mark[v] == 0) {
        mark[v] = 1;
        stack.emplace_back(v, 0);
      }
      continue;
    }
    std::size_t done = u;
    stack.pop_back();
    if (edges[done].empty()) suffix[done].insert(Trace{{}, sim.outcome(states[done])});
    for (const auto& edge : edges[done])
      if (mark[edge.to] == 2)
        for (const auto& tail : suffix[edge.to]) suffix[done].insert(prepend(edge.events, tail));
    mark[done] = 2;
  }
  if (stats) *stats = ExploreStats{n, transitions};
  return std::move(suffix[0]);
}

TraceSet explore_random(const Simulator& sim, const ExploreOptions& o) {
  std::vector<Trace> runs(o.runs);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t r = 0; r < o.runs; ++r) {
    std::mt19937_64 rng(o.seed * 0x9E3779B97F4A7C15ULL + r);
    auto s = sim.initial_state();
    Trace t;
    t.outcome = Outcome::BoundExhausted;
    for (std::size_t n = 0; n < o.max_steps; ++n) {
      auto steps = sim.enabled_steps(s);
      if (steps.empty()) {
        t.outcome = sim.outcome(s);
        break;
      }
      std::uniform_int_distribution<std::size_t> pick(0, steps.size() - 1);
      s = sim.apply(s, steps[pick(rng)], &t.events);
    }
    runs[r] = std::move(t);
  }
  return TraceSet(runs.begin(), runs.end());
}

}  // namespace

TraceSet explore(const BpmnModel& model, const ExploreOptions& options, ExploreStats* stats) {
  Simulator sim(model, options.bounds);
  if (options.mode == ExploreMode::Random) {
    if (stats) *stats = ExploreStats{};
    return explore_random(sim, options);
  }
  if (options.parallel) return explore_parallel(sim, options.max_states, stats);
  SerialExplorer ex(sim, options.max_states);
  TraceSet out = ex.run(sim.initial_state());
  if (stats) *stats = ExploreStats{ex.states(), ex.transitions()};
  return out;
}

void write_traces_jsonl(std::ostream& out, const TraceSet& traces) {
  for (const auto& t : traces) {
    nlohmann::ordered_json line;
    line["events"] = nlohmann::ordered_json::array();
    for (const auto& e : t.events) {
      nlohmann::ordered_json ev;
      ev["tk"] = e.transaction;
      ev["act"] = std::string(to_string(e.act));
      if (e.undo) ev["undo"] = true;
      line["events"].push_back(std::move(ev));
    }
    line["outcome"] = std::string(to_string(t.outcome));
    out << line.dump() << '\n';
  }
}

std::map<std::string, Language> project(const TraceSet& traces) {
  std::map<std::string, Language> out;
  for (const auto& t : traces) {
    std::map<std::string, std::vector<Act>> per;
    for (const auto& e : t.events)
      if (!e.undo) per[e.transaction].push_back(e.act);
    for (auto& [tx, seq] : per) out[tx].insert(std::move(seq));
  }
  return out;
}

Verdict check_conformance(const BpmnModel& model, DetailLevel level, const LoopBounds& bounds,
                          std::size_t max_states) {
  ExploreOptions o;
  o.bounds = bounds;
  o.max_states = max_states;
  Verdict v;
  auto traces = explore(model, o, &v.stats);
  auto projected = project(traces);
  const auto oracle = bounded_language(level, bounds);
  Simulator sim(model, bounds);
  for (const auto& tx : sim.transactions()) {
    TransactionVerdict tv;
    tv.transaction = tx;
    const auto& got = projected[tx];
    std::set_difference(oracle.begin(), oracle.end(), got.begin(), got.end(),
                        std::inserter(tv.missing, tv.missing.end()));
    std::set_difference(got.begin(), got.end(), oracle.begin(), oracle.end(),
                        std::inserter(tv.spurious, tv.spurious.end()));
    v.conformant = v.conformant && tv.missing.empty() && tv.spurious.empty();
    v.transactions.push_back(std::move(tv));
  }
  return v;
}

Verdict check_conformance(const TransactionNetwork& net, DetailLevel level,
                          const LoopBounds& bounds, std::size_t max_states) {
  return check_conformance(compile(net, level), level, bounds, max_states);
}

}  // namespace psibpmn
