#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "psibpmn/bpmn.hpp"
#include "psibpmn/network.hpp"

namespace psibpmn {

struct CompileOptions {
  std::string model_id = "semantified";
  /// Accept networks whose only errors are composition-rule breaches.
  bool allow_composition_breach = false;
};

/// One pool per actor; each transaction contributes an initiator and an
/// executor fragment at the requested level of detail, and dependencies are
/// woven into the parent executor flow. Throws Error{ValidationFailed}.
BpmnModel compile(const TransactionNetwork& net, DetailLevel level,
                  const CompileOptions& options = {});

/// Node id of the deterministic scheme
/// `<tk>_<i|e>_<act>_<kind>[_re][_<n>|_h<n>]`, all lowercase.
std::string scheme_node_id(std::string_view transaction, Role role, Act act, NodeKind kind,
                           bool reentry = false);

/// Recovers a tag from an id that follows the scheme. The transaction id
/// comes back lowercased.
std::optional<NodeTag> tag_from_node_id(std::string_view id);

using CensusKey = std::pair<std::string, Act>;
using Census = std::map<CensusKey, std::vector<std::string>>;

/// Tagged node ids per (transaction, act); untagged models give an empty map.
Census element_census(const BpmnModel& model);

}  // namespace psibpmn
