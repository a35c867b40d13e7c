#pragma once

#include <string>
#include <string_view>

#include "psibpmn/bpmn.hpp"

namespace psibpmn {

inline constexpr std::string_view kBpmnModelNs = "http://www.omg.org/spec/BPMN/20100524/MODEL";
/// Extension namespace carrying node tags and actor ids.
inline constexpr std::string_view kMetaNs = "urn:psibpmn:meta";

struct SerializeOptions {
  bool force = false;        // skip the lint precondition
  bool layout_grid = false;  // emit a column-per-pool diagram section
};

/// Throws Error{LintFailed} unless the model lints clean or force is set.
std::string serialize(const BpmnModel& model, const SerializeOptions& options = {});

/// Throws Error{XmlSyntaxError|NotBpmn}. Unsupported flow elements come back
/// as foreign Tasks.
BpmnModel parse_bpmn(std::string_view xml);

}  // namespace psibpmn
