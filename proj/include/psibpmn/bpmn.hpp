#pragma once

// The subset of a BPMN 2.0 collaboration the transaction mapping needs:
// one pool per actor, flow nodes, sequence flows and message flows.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psibpmn/psi.hpp"

namespace psibpmn {

enum class NodeKind {
  StartEvent,
  MessageStartEvent,
  Task,
  SendTask,
  MessageCatchEvent,  // always interrupting
  EventBasedGateway,
  ExclusiveGateway,
  ParallelGateway,
  CompensationThrowEvent,
  CompensationBoundaryEvent,
  CompensationHandlerTask,
  EndEvent,
  TerminateEndEvent,
};

std::string_view to_string(NodeKind kind);
std::optional<NodeKind> parse_node_kind(std::string_view text);  // case-insensitive

/// Which transaction act a node belongs to, and from which side.
struct NodeTag {
  std::string transaction;
  Act act = Act::Request;
  Role role = Role::Initiator;
  /// Message that repositions the counterparty after an allowed revocation;
  /// it carries the act it re-emits but does not perform it again.
  bool reentry = false;

  bool operator==(const NodeTag&) const = default;
};

struct FlowNode {
  std::string id;
  NodeKind kind = NodeKind::Task;
  std::string name;
  std::optional<NodeTag> meta;
  /// Boundary event: the task it is attached to. Compensation handler: the
  /// boundary event that activates it.
  std::string attached_to;
  /// Element outside the supported subset, kept as an opaque Task.
  bool foreign = false;

  bool operator==(const FlowNode&) const = default;
};

struct SequenceFlow {
  std::string id;
  std::string source;
  std::string target;
  /// Guard understood by the simulator: "loop:rerequest", "loop:redeclare",
  /// "performed:<Act>". Empty means unconditional.
  std::string condition;

  bool operator==(const SequenceFlow&) const = default;
};

struct Pool {
  std::string id;
  std::string name;
  std::string actor;  // ActorRole id
  std::vector<FlowNode> nodes;
  std::vector<SequenceFlow> flows;

  bool operator==(const Pool&) const = default;
};

struct MessageFlow {
  std::string id;
  std::string source;
  std::string target;
  std::string name;

  bool operator==(const MessageFlow&) const = default;
};

struct BpmnModel {
  std::string id;
  std::vector<Pool> pools;
  std::vector<MessageFlow> message_flows;

  bool operator==(const BpmnModel&) const = default;

  const FlowNode* find_node(std::string_view node_id) const;
  /// Index of the pool holding the node, or -1.
  int pool_of(std::string_view node_id) const;
  std::size_t node_count() const;
};

/// Sorts pools by actor id, and nodes and flows by id.
void canonicalize(BpmnModel& model);

/// Is the node part of a revocation branch rather than the normal flow.
bool in_revocation_scope(const FlowNode& node);

enum class LintRule {
  NoStart,
  DuplicateId,
  EventBasedGatewayFanout,
  DanglingFlow,
  CrossPoolSequenceFlow,
  MessageFlowInsidePool,
  MissingIncoming,
  MissingOutgoing,
  DegenerateGateway,
  BadAttachment,
  UnreachableNode,
};

std::string_view to_string(LintRule rule);

struct LintFinding {
  LintRule rule;
  std::string element;  // offending node or flow id
  std::string message;
};

/// Structural soundness checks; empty iff the model is sound.
std::vector<LintFinding> lint_model(const BpmnModel& model);

}  // namespace psibpmn
