#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "psibpmn/compiler.hpp"
#include "psibpmn/error.hpp"
#include "psibpmn/simulator.hpp"
#include "support.hpp"

using namespace psibpmn;

namespace {

BpmnModel single(DetailLevel level) { return compile(testing::load_network("single.json"), level); }

const std::vector<Act> kHappy = {Act::Request, Act::Promise, Act::Execute, Act::Declare,
                                 Act::Accept};

bool is_core(Act a) { return std::find(kHappy.begin(), kHappy.end(), a) != kHappy.end(); }

void remove_node(BpmnModel& m, const std::string& id) {
  for (auto& p : m.pools) {
    std::erase_if(p.nodes, [&](const FlowNode& n) { return n.id == id; });
    std::erase_if(p.flows, [&](const SequenceFlow& f) { return f.source == id || f.target == id; });
  }
  std::erase_if(m.message_flows,
                [&](const MessageFlow& f) { return f.source == id || f.target == id; });
}

}  // namespace

TEST_CASE("initial step of the happy flow") {
  Simulator sim(single(DetailLevel::HappyFlow));
  auto s0 = sim.initial_state();
  auto steps = sim.enabled_steps(s0);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0].kind == Step::Kind::Fire);
  CHECK(sim.describe(steps[0]).find("tk01_i_request_startevent") != std::string::npos);

  std::vector<TraceEvent> events;
  auto s1 = sim.apply(s0, steps[0], &events);
  CHECK(events.empty());
  CHECK(s1 != s0);
  CHECK(sim.transactions() == std::vector<std::string>{"TK01"});
}

TEST_CASE("happy flow has one trace") {
  ExploreStats stats;
  auto traces = explore(single(DetailLevel::HappyFlow), {}, &stats);
  REQUIRE(traces.size() == 1);
  const auto& t = *traces.begin();
  CHECK(t.outcome == Outcome::Accepted);
  std::vector<Act> acts;
  for (const auto& e : t.events) acts.push_back(e.act);
  CHECK(acts == kHappy);
  CHECK(stats.states == 7);

  std::ostringstream os;
  write_traces_jsonl(os, traces);
  const auto jsonl = os.str();
  CHECK(jsonl.find(R"("outcome":"Accepted")") != std::string::npos);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 1);
}

TEST_CASE("dissent traces are valid pattern runs") {
  auto traces = explore(single(DetailLevel::WithDissent));
  CHECK(traces.size() > 1);
  for (const auto& [tx, lang] : project(traces))
    for (const auto& seq : lang) CHECK_NOTHROW(run_trace(seq));
}

TEST_CASE("random runs are reproducible") {
  ExploreOptions o;
  o.mode = ExploreMode::Random;
  o.seed = 42;
  o.runs = 200;
  auto model = single(DetailLevel::Complete);
  auto a = explore(model, o);
  auto b = explore(model, o);
  CHECK(a == b);
  CHECK(!a.empty());
  auto all = explore(model);
  for (const auto& t : a) CHECK(all.count(t) == 1);
}

TEST_CASE("serial and parallel exploration agree") {
  for (const char* name : {"single.json", "poc1.json"})
    for (DetailLevel level : {DetailLevel::HappyFlow, DetailLevel::WithDissent}) {
      auto model = compile(testing::load_network(name), level);
      ExploreOptions serial;
      serial.parallel = false;
      ExploreStats ss, ps;
      auto s = explore(model, serial, &ss);
      auto p = explore(model, {}, &ps);
      CHECK(s == p);
      CHECK(ss.states == ps.states);
    }
  ExploreOptions serial;
  serial.parallel = false;
  auto model = single(DetailLevel::Complete);
  CHECK(explore(model, serial) == explore(model));
}

TEST_CASE("conformance of a single transaction") {
  for (DetailLevel level : {DetailLevel::HappyFlow, DetailLevel::WithDissent, DetailLevel::Complete})
    CHECK(check_conformance(testing::load_network("single.json"), level, LoopBounds{}).conformant);
  CHECK(check_conformance(testing::load_network("single.json"), DetailLevel::Complete,
                          LoopBounds{2, 2, 2})
            .conformant);
}

TEST_CASE("happy flow of a network conforms") {
  CHECK(check_conformance(testing::load_network("poc1.json"), DetailLevel::HappyFlow, LoopBounds{})
            .conformant);
}

TEST_CASE("a missing accept is detected") {
  auto model = single(DetailLevel::HappyFlow);
  remove_node(model, "tk01_i_accept_sendtask");
  auto v = check_conformance(model, DetailLevel::HappyFlow, LoopBounds{});
  CHECK_FALSE(v.conformant);
  REQUIRE(v.transactions.size() == 1);
  CHECK(v.transactions[0].missing.count(kHappy) == 1);
  auto traces = explore(model);
  REQUIRE(traces.size() == 1);
  CHECK(traces.begin()->outcome == Outcome::Deadlock);
}

TEST_CASE("compensations follow the rollback chain") {
  auto traces = explore(single(DetailLevel::Complete));
  int checked = 0;
  for (const auto& t : traces) {
    std::vector<Act> history;
    std::optional<Act> pending;
    std::vector<Act> undone;
    auto settle = [&] {
      if (!pending) return;
      if (!undone.empty()) {
        auto chain = rollback_chain(run_trace(history), *pending);
        CHECK(undone == chain);
        history.resize(history.size() - chain.size());
        ++checked;
      }
      pending.reset();
      undone.clear();
    };
    for (const auto& e : t.events) {
      if (e.undo) {
        CHECK(pending.has_value());
        undone.push_back(e.act);
        continue;
      }
      if (e.act == Act::Allow || e.act == Act::Refuse) continue;
      settle();
      if (is_revocation(e.act)) pending = e.act;
      else if (is_core(e.act) && history.size() < kHappy.size() && kHappy[history.size()] == e.act)
        history.push_back(e.act);
    }
    settle();
  }
  CHECK(checked > 0);
}

TEST_CASE("state cap") {
  ExploreOptions o;
  o.max_states = 50;
  auto model = single(DetailLevel::Complete);
  for (bool parallel : {true, false}) {
    o.parallel = parallel;
    try {
      explore(model, o);
      FAIL("expected StateSpaceLimitExceeded");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::StateSpaceLimitExceeded);
    }
  }
}

TEST_CASE("a parallel join needs a token on every incoming flow") {
  BpmnModel m;
  m.id = "join";
  Pool p;
  p.id = "pool_A01";
  p.actor = "A01";
  auto node = [&](const std::string& id, NodeKind kind) {
    p.nodes.push_back(FlowNode{id, kind, "", std::nullopt, "", false});
  };
  auto flow = [&](const std::string& s, const std::string& t) {
    p.flows.push_back(SequenceFlow{"sf_" + s + "__" + t, s, t, ""});
  };
  node("s1", NodeKind::StartEvent);
  node("s2", NodeKind::StartEvent);
  node("t", NodeKind::Task);
  node("x", NodeKind::Task);
  node("j", NodeKind::ParallelGateway);
  node("e", NodeKind::EndEvent);
  flow("s1", "t");
  flow("s2", "t");
  flow("t", "j");
  flow("x", "j");
  flow("j", "e");
  m.pools.push_back(p);

  Simulator sim(m);
  auto s = sim.initial_state();
  // both starts feed the same branch; x never runs
  for (int i = 0; i < 4; ++i) {
    auto steps = sim.enabled_steps(s);
    REQUIRE_FALSE(steps.empty());
    for (const auto& st : steps) CHECK(sim.describe(st) != "fire j");
    s = sim.apply(s, steps.front());
  }
  CHECK(sim.enabled_steps(s).empty());
  CHECK(sim.outcome(s) == Outcome::Deadlock);
}
