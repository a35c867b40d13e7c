#include <algorithm>

#include "doctest.h"
#include "psibpmn/bpmn.hpp"
#include "psibpmn/compiler.hpp"
#include "support.hpp"

using namespace psibpmn;

namespace {

BpmnModel single_happy() {
  return compile(testing::load_network("single.json"), DetailLevel::HappyFlow);
}

bool has_rule(const std::vector<LintFinding>& fs, LintRule rule, const std::string& el = "") {
  return std::any_of(fs.begin(), fs.end(), [&](const LintFinding& f) {
    return f.rule == rule && (el.empty() || f.element == el);
  });
}

Pool& pool_of(BpmnModel& m, const std::string& node) {
  return m.pools[static_cast<std::size_t>(m.pool_of(node))];
}

}  // namespace

TEST_CASE("node kinds parse case-insensitively") {
  CHECK(parse_node_kind("eventbasedgateway") == NodeKind::EventBasedGateway);
  CHECK(parse_node_kind("SendTask") == NodeKind::SendTask);
  CHECK_FALSE(parse_node_kind("subProcess"));
  CHECK(to_string(NodeKind::TerminateEndEvent) == "TerminateEndEvent");
}

TEST_CASE("compiled model lints clean") {
  auto m = single_happy();
  CHECK(lint_model(m).empty());
  CHECK(m.find_node("tk01_e_execute_task") != nullptr);
  CHECK(m.find_node("nope") == nullptr);
  CHECK(m.pool_of("tk01_i_request_sendtask") != m.pool_of("tk01_e_execute_task"));
  CHECK(m.pool_of("nope") == -1);
  CHECK(m.node_count() == 12);
}

TEST_CASE("lint mutations") {
  auto m = single_happy();

  SUBCASE("no start") {
    for (auto& p : m.pools)
      for (auto& n : p.nodes)
        if (n.kind == NodeKind::StartEvent || n.kind == NodeKind::MessageStartEvent)
          n.kind = NodeKind::Task;
    CHECK(has_rule(lint_model(m), LintRule::NoStart));
  }
  SUBCASE("duplicate id") {
    auto& p = pool_of(m, "tk01_e_execute_task");
    p.nodes.push_back(*m.find_node("tk01_e_execute_task"));
    CHECK(has_rule(lint_model(m), LintRule::DuplicateId, "tk01_e_execute_task"));
  }
  SUBCASE("dangling sequence flow") {
    auto& p = pool_of(m, "tk01_e_execute_task");
    p.flows.push_back(SequenceFlow{"sf_x", "tk01_e_execute_task", "ghost", ""});
    CHECK(has_rule(lint_model(m), LintRule::DanglingFlow, "sf_x"));
  }
  SUBCASE("cross-pool sequence flow") {
    auto& p = pool_of(m, "tk01_e_execute_task");
    p.flows.push_back(SequenceFlow{"sf_x", "tk01_e_execute_task", "tk01_i_accept_sendtask", ""});
    CHECK(has_rule(lint_model(m), LintRule::CrossPoolSequenceFlow, "sf_x"));
  }
  SUBCASE("message flow inside a pool") {
    m.message_flows.push_back(
        MessageFlow{"mf_x", "tk01_e_promise_sendtask", "tk01_e_accept_messagecatchevent", ""});
    CHECK(has_rule(lint_model(m), LintRule::MessageFlowInsidePool, "mf_x"));
  }
  SUBCASE("message flow into a task") {
    m.message_flows.push_back(
        MessageFlow{"mf_x", "tk01_i_request_sendtask", "tk01_e_execute_task", ""});
    CHECK(has_rule(lint_model(m), LintRule::DanglingFlow, "mf_x"));
  }
  SUBCASE("missing incoming and unreachable") {
    auto& p = pool_of(m, "tk01_e_execute_task");
    std::erase_if(p.flows, [](const SequenceFlow& f) { return f.target == "tk01_e_execute_task"; });
    auto fs = lint_model(m);
    CHECK(has_rule(fs, LintRule::MissingIncoming, "tk01_e_execute_task"));
    CHECK(has_rule(fs, LintRule::UnreachableNode, "tk01_e_declare_sendtask"));
  }
  SUBCASE("missing outgoing") {
    auto& p = pool_of(m, "tk01_e_execute_task");
    std::erase_if(p.flows, [](const SequenceFlow& f) { return f.source == "tk01_e_execute_task"; });
    CHECK(has_rule(lint_model(m), LintRule::MissingOutgoing, "tk01_e_execute_task"));
  }
  SUBCASE("event-based gateway needs two catch targets") {
    auto& p = pool_of(m, "tk01_i_promise_messagecatchevent");
    p.nodes.push_back(FlowNode{"ebg", NodeKind::EventBasedGateway, "", std::nullopt, "", false});
    for (auto& f : p.flows)
      if (f.target == "tk01_i_promise_messagecatchevent") f.target = "ebg";
    p.flows.push_back(SequenceFlow{"sf_ebg", "ebg", "tk01_i_promise_messagecatchevent", ""});
    CHECK(has_rule(lint_model(m), LintRule::EventBasedGatewayFanout, "ebg"));

    // a second outgoing to a task is still not a valid fan-out
    p.nodes.push_back(FlowNode{"t2", NodeKind::Task, "", std::nullopt, "", false});
    p.nodes.push_back(FlowNode{"end2", NodeKind::EndEvent, "", std::nullopt, "", false});
    p.flows.push_back(SequenceFlow{"sf_ebg2", "ebg", "t2", ""});
    p.flows.push_back(SequenceFlow{"sf_t2", "t2", "end2", ""});
    CHECK(has_rule(lint_model(m), LintRule::EventBasedGatewayFanout, "ebg"));
  }
  SUBCASE("degenerate gateway") {
    auto& p = pool_of(m, "tk01_e_execute_task");
    p.nodes.push_back(FlowNode{"xg", NodeKind::ExclusiveGateway, "", std::nullopt, "", false});
    for (auto& f : p.flows)
      if (f.target == "tk01_e_execute_task") f.target = "xg";
    p.flows.push_back(SequenceFlow{"sf_xg", "xg", "tk01_e_execute_task", ""});
    CHECK(has_rule(lint_model(m), LintRule::DegenerateGateway, "xg"));
  }
  SUBCASE("bad attachment") {
    auto& p = pool_of(m, "tk01_e_execute_task");
    p.nodes.push_back(FlowNode{"cb", NodeKind::CompensationBoundaryEvent, "", std::nullopt,
                               "tk01_e_request_messagestartevent", false});
    CHECK(has_rule(lint_model(m), LintRule::BadAttachment, "cb"));
  }
  SUBCASE("foreign nodes are exempt") {
    auto& p = pool_of(m, "tk01_e_execute_task");
    p.nodes.push_back(FlowNode{"sub", NodeKind::Task, "", std::nullopt, "", true});
    CHECK(lint_model(m).empty());
  }
}

TEST_CASE("canonicalize sorts pools, nodes and flows") {
  auto m = single_happy();
  auto shuffled = m;
  std::reverse(shuffled.pools.begin(), shuffled.pools.end());
  for (auto& p : shuffled.pools) {
    std::reverse(p.nodes.begin(), p.nodes.end());
    std::reverse(p.flows.begin(), p.flows.end());
  }
  std::reverse(shuffled.message_flows.begin(), shuffled.message_flows.end());
  CHECK_FALSE(shuffled == m);
  canonicalize(shuffled);
  CHECK(shuffled == m);
}

TEST_CASE("revocation scope") {
  FlowNode n;
  n.meta = NodeTag{"TK01", Act::RevokeAccept, Role::Initiator, false};
  CHECK(in_revocation_scope(n));
  n.meta->act = Act::Accept;
  CHECK_FALSE(in_revocation_scope(n));
}
