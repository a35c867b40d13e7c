#include "psibpmn/bpmn.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <set>

namespace psibpmn {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::StartEvent: return "StartEvent";
    case NodeKind::MessageStartEvent: return "MessageStartEvent";
    case NodeKind::Task: return "Task";
    case NodeKind::SendTask: return "SendTask";
    case NodeKind::MessageCatchEvent: return "MessageCatchEvent";
    case NodeKind::EventBasedGateway: return "EventBasedGateway";
    case NodeKind::ExclusiveGateway: return "ExclusiveGateway";
    case NodeKind::ParallelGateway: return "ParallelGateway";
    case NodeKind::CompensationThrowEvent: return "CompensationThrowEvent";
    case NodeKind::CompensationBoundaryEvent: return "CompensationBoundaryEvent";
    case NodeKind::CompensationHandlerTask: return "CompensationHandlerTask";
    case NodeKind::EndEvent: return "EndEvent";
    case NodeKind::TerminateEndEvent: return "TerminateEndEvent";
  }
  return "?";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(c)));
  for (int k = 0; k <= static_cast<int>(NodeKind::TerminateEndEvent); ++k) {
    auto kind = static_cast<NodeKind>(k);
    std::string name;
    for (char c : to_string(kind)) name.push_back(static_cast<char>(std::tolower(c)));
    if (name == lower) return kind;
  }
  return std::nullopt;
}

const FlowNode* BpmnModel::find_node(std::string_view node_id) const {
  for (const auto& pool : pools)
    for (const auto& n : pool.nodes)
      if (n.id == node_id) return &n;
  return nullptr;
}

int BpmnModel::pool_of(std::string_view node_id) const {
  for (std::size_t p = 0; p < pools.size(); ++p)
    for (const auto& n : pools[p].nodes)
      if (n.id == node_id) return static_cast<int>(p);
  return -1;
}

std::size_t BpmnModel::node_count() const {
  std::size_t n = 0;
  for (const auto& pool : pools) n += pool.nodes.size();
  return n;
}

void canonicalize(BpmnModel& model) {
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(model.pools.begin(), model.pools.end(),
            [](const Pool& a, const Pool& b) { return a.actor < b.actor; });
  for (auto& pool : model.pools) {
    std::sort(pool.nodes.begin(), pool.nodes.end(), by_id);
    std::sort(pool.flows.begin(), pool.flows.end(), by_id);
  }
  std::sort(model.message_flows.begin(), model.message_flows.end(), by_id);
}

bool in_revocation_scope(const FlowNode& node) {
  if (node.kind == NodeKind::CompensationThrowEvent ||
      node.kind == NodeKind::CompensationBoundaryEvent ||
      node.kind == NodeKind::CompensationHandlerTask)
    return true;
  if (!node.meta) return false;
  if (node.meta->reentry) return true;
  Act a = node.meta->act;
  return is_revocation(a) || a == Act::Allow || a == Act::Refuse;
}

std::string_view to_string(LintRule rule) {
  switch (rule) {
    case LintRule::NoStart: return "NoStart";
    case LintRule::DuplicateId: return "DuplicateId";
    case LintRule::EventBasedGatewayFanout: return "EventBasedGatewayFanout";
    case LintRule::DanglingFlow: return "DanglingFlow";
    case LintRule::CrossPoolSequenceFlow: return "CrossPoolSequenceFlow";
    case LintRule::MessageFlowInsidePool: return "MessageFlowInsidePool";
    case LintRule::MissingIncoming: return "MissingIncoming";
    case LintRule::MissingOutgoing: return "MissingOutgoing";
    case LintRule::DegenerateGateway: return "DegenerateGateway";
    case LintRule::BadAttachment: return "BadAttachment";
    case LintRule::UnreachableNode: return "UnreachableNode";
  }
  return "?";
}

namespace {

bool is_start(NodeKind k) { return k == NodeKind::StartEvent || k == NodeKind::MessageStartEvent; }
bool is_end(NodeKind k) { return k == NodeKind::EndEvent || k == NodeKind::TerminateEndEvent; }
bool is_detached(NodeKind k) {
  return k == NodeKind::CompensationBoundaryEvent || k == NodeKind::CompensationHandlerTask;
}
bool is_gateway(NodeKind k) {
  return k == NodeKind::EventBasedGateway || k == NodeKind::ExclusiveGateway ||
         k == NodeKind::ParallelGateway;
}

}  // namespace

std::vector<LintFinding> lint_model(const BpmnModel& model) {
  std::vector<LintFinding> out;
  auto add = [&](LintRule r, std::string el, std::string msg) {
    out.push_back(LintFinding{r, std::move(el), std::move(msg)});
  };

  std::map<std::string, int> owner;  // node id -> pool index
  std::map<std::string, const FlowNode*> nodes;
  bool any_start = false;
  for (std::size_t p = 0; p < model.pools.size(); ++p) {
    for (const auto& n : model.pools[p].nodes) {
      if (!owner.emplace(n.id, static_cast<int>(p)).second)
        add(LintRule::DuplicateId, n.id, "node id used more than once");
      nodes[n.id] = &n;
      any_start = any_start || is_start(n.kind);
    }
  }
  if (!any_start) add(LintRule::NoStart, model.id, "model has no start event");

  std::map<std::string, int> incoming, outgoing;
  std::map<std::string, std::vector<std::string>> succ;
  for (std::size_t p = 0; p < model.pools.size(); ++p) {
    for (const auto& f : model.pools[p].flows) {
      auto s = owner.find(f.source);
      auto t = owner.find(f.target);
      if (s == owner.end() || t == owner.end()) {
        add(LintRule::DanglingFlow, f.id, "sequence flow references a missing node");
        continue;
      }
      if (s->second != static_cast<int>(p) || t->second != static_cast<int>(p)) {
        add(LintRule::CrossPoolSequenceFlow, f.id, "sequence flow leaves its pool");
        continue;
      }
      ++outgoing[f.source];
      ++incoming[f.target];
      succ[f.source].push_back(f.target);
    }
  }

  for (const auto& m : model.message_flows) {
    auto s = owner.find(m.source);
    auto t = owner.find(m.target);
    if (s == owner.end() || t == owner.end()) {
      add(LintRule::DanglingFlow, m.id, "message flow references a missing node");
      continue;
    }
    if (s->second == t->second)
      add(LintRule::MessageFlowInsidePool, m.id, "message flow connects nodes of one pool");
    auto sk = nodes[m.source]->kind;
    auto tk = nodes[m.target]->kind;
    if (sk != NodeKind::SendTask && sk != NodeKind::Task)
      add(LintRule::DanglingFlow, m.id, "message flow source cannot send");
    if (tk != NodeKind::MessageStartEvent && tk != NodeKind::MessageCatchEvent)
      add(LintRule::DanglingFlow, m.id, "message flow target cannot receive");
  }

  for (const auto& [id, n] : nodes) {
    if (n->foreign) continue;
    if (is_detached(n->kind)) {
      auto host = nodes.find(n->attached_to);
      bool ok = host != nodes.end() &&
                (n->kind == NodeKind::CompensationBoundaryEvent
                     ? (host->second->kind == NodeKind::Task ||
                        host->second->kind == NodeKind::SendTask)
                     : host->second->kind == NodeKind::CompensationBoundaryEvent);
      if (!ok) add(LintRule::BadAttachment, id, "compensation element is not attached properly");
      continue;
    }
    if (!is_start(n->kind) && incoming[id] == 0)
      add(LintRule::MissingIncoming, id, "node has no incoming sequence flow");
    if (!is_end(n->kind) && outgoing[id] == 0)
      add(LintRule::MissingOutgoing, id, "node has no outgoing sequence flow");
    if (n->kind == NodeKind::EventBasedGateway) {
      const auto& targets = succ[id];
      bool catches = std::all_of(targets.begin(), targets.end(), [&](const auto& t) {
        return nodes[t]->kind == NodeKind::MessageCatchEvent;
      });
      if (targets.size() < 2 || !catches)
        add(LintRule::EventBasedGatewayFanout, id,
            "event-based gateway needs at least two outgoing catch events");
    } else if (is_gateway(n->kind) && incoming[id] < 2 && outgoing[id] < 2) {
      add(LintRule::DegenerateGateway, id, "gateway neither splits nor joins");
    }
  }

  // reachability from start events
  std::set<std::string> seen;
  std::deque<std::string> queue;
  for (const auto& [id, n] : nodes)
    if (is_start(n->kind)) {
      seen.insert(id);
      queue.push_back(id);
    }
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (const auto& v : succ[u])
      if (seen.insert(v).second) queue.push_back(v);
  }
  for (const auto& [id, n] : nodes)
    if (!n->foreign && !is_detached(n->kind) && !seen.count(id))
      add(LintRule::UnreachableNode, id, "no path from a start event");
  return out;
}

}  // namespace psibpmn
