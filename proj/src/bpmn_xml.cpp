#include "psibpmn/bpmn_xml.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <map>
#include <set>
#include <sstream>

#include "psibpmn/compiler.hpp"
#include "psibpmn/error.hpp"

namespace psibpmn {

namespace {

std::string esc(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string process_id(const Pool& pool) { return "process_" + pool.actor; }

class Writer {
 public:
  explicit Writer(std::ostringstream& os) : os_(os) {}

  void node(const FlowNode& n, const std::string& ind) {
    std::string attrs = " id=\"" + esc(n.id) + "\"";
    if (!n.name.empty()) attrs += " name=\"" + esc(n.name) + "\"";
    if (n.meta) {
      attrs += " psi:transaction=\"" + esc(n.meta->transaction) + "\"";
      attrs += " psi:act=\"" + std::string(to_string(n.meta->act)) + "\"";
      attrs += " psi:role=\"" + std::string(to_string(n.meta->role)) + "\"";
      if (n.meta->reentry) attrs += " psi:reentry=\"true\"";
    }
    if (n.foreign) attrs += " psi:foreign=\"true\"";
    auto leaf = [&](const char* el, std::string extra = {}) {
      os_ << ind << "<bpmn:" << el << attrs << extra << "/>\n";
    };
    auto with = [&](const char* el, const char* def, std::string extra = {}) {
      os_ << ind << "<bpmn:" << el << attrs << extra << ">\n"
          << ind << "  <bpmn:" << def << "/>\n"
          << ind << "</bpmn:" << el << ">\n";
    };
    switch (n.kind) {
      case NodeKind::StartEvent: leaf("startEvent"); break;
      case NodeKind::MessageStartEvent: with("startEvent", "messageEventDefinition"); break;
      case NodeKind::Task: leaf("task"); break;
      case NodeKind::SendTask: leaf("sendTask"); break;
      case NodeKind::MessageCatchEvent:
        with("intermediateCatchEvent", "messageEventDefinition");
        break;
      case NodeKind::EventBasedGateway: leaf("eventBasedGateway"); break;
      case NodeKind::ExclusiveGateway: leaf("exclusiveGateway"); break;
      case NodeKind::ParallelGateway: leaf("parallelGateway"); break;
      case NodeKind::CompensationThrowEvent:
        with("intermediateThrowEvent", "compensateEventDefinition");
        break;
      case NodeKind::CompensationBoundaryEvent:
        with("boundaryEvent", "compensateEventDefinition",
             " attachedToRef=\"" + esc(n.attached_to) + "\"");
        break;
      case NodeKind::CompensationHandlerTask: leaf("task", " isForCompensation=\"true\""); break;
      case NodeKind::EndEvent: leaf("endEvent"); break;
      case NodeKind::TerminateEndEvent: with("endEvent", "terminateEventDefinition"); break;
    }
  }

  void flow(const SequenceFlow& f, const std::string& ind) {
    os_ << ind << "<bpmn:sequenceFlow id=\"" << esc(f.id) << "\" sourceRef=\"" << esc(f.source)
        << "\" targetRef=\"" << esc(f.target) << "\"";
    if (f.condition.empty()) {
      os_ << "/>\n";
      return;
    }
    os_ << ">\n"
        << ind << "  <bpmn:conditionExpression xsi:type=\"bpmn:tFormalExpression\">"
        << esc(f.condition) << "</bpmn:conditionExpression>\n"
        << ind << "</bpmn:sequenceFlow>\n";
  }

 private:
  std::ostringstream& os_;
};

void write_diagram(std::ostringstream& os, const BpmnModel& m) {
  constexpr int kColumn = 400, kRow = 80, kWidth = 100, kHeight = 60;
  os << "  <bpmndi:BPMNDiagram id=\"diagram_" << esc(m.id) << "\">\n"
     << "    <bpmndi:BPMNPlane id=\"plane_" << esc(m.id) << "\" bpmnElement=\"" << esc(m.id)
     << "\">\n";
  auto shape = [&](const std::string& el, int x, int y, int w, int h) {
    os << "      <bpmndi:BPMNShape id=\"shape_" << esc(el) << "\" bpmnElement=\"" << esc(el)
       << "\">\n"
       << "        <dc:Bounds x=\"" << x << "\" y=\"" << y << "\" width=\"" << w
       << "\" height=\"" << h << "\"/>\n"
       << "      </bpmndi:BPMNShape>\n";
  };
  for (std::size_t p = 0; p < m.pools.size(); ++p) {
    const auto& pool = m.pools[p];
    int x = static_cast<int>(p) * kColumn;
    shape(pool.id, x, 0, kColumn - 40, static_cast<int>(pool.nodes.size() + 1) * kRow);
    for (std::size_t r = 0; r < pool.nodes.size(); ++r)
      shape(pool.nodes[r].id, x + 130, 40 + static_cast<int>(r) * kRow, kWidth, kHeight);
  }
  os << "    </bpmndi:BPMNPlane>\n"
     << "  </bpmndi:BPMNDiagram>\n";
}

}  // namespace

std::string serialize(const BpmnModel& model, const SerializeOptions& options) {
  if (!options.force) {
    auto findings = lint_model(model);
    if (!findings.empty()) {
      std::string msg = "model is not sound:";
      for (const auto& f : findings)
        msg += " " + std::string(to_string(f.rule)) + "(" + f.element + ")";
      throw Error(ErrorCode::LintFailed, msg);
    }
  }
  BpmnModel m = model;
  canonicalize(m);

  std::ostringstream os;
  Writer w(os);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<bpmn:definitions xmlns:bpmn=\"" << kBpmnModelNs << "\""
     << " xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\""
     << " xmlns:psi=\"" << kMetaNs << "\"";
  if (options.layout_grid)
    os << " xmlns:bpmndi=\"http://www.omg.org/spec/BPMN/20100524/DI\""
       << " xmlns:dc=\"http://www.omg.org/spec/DD/20100524/DC\"";
  os << " id=\"definitions_" << esc(m.id) << "\" targetNamespace=\"urn:psibpmn:model:"
     << esc(m.id) << "\">\n";

  os << "  <bpmn:collaboration id=\"" << esc(m.id) << "\">\n";
  for (const auto& pool : m.pools)
    os << "    <bpmn:participant id=\"" << esc(pool.id) << "\" name=\"" << esc(pool.name)
       << "\" processRef=\"" << esc(process_id(pool)) << "\" psi:actor=\"" << esc(pool.actor)
       << "\"/>\n";
  for (const auto& mf : m.message_flows)
    os << "    <bpmn:messageFlow id=\"" << esc(mf.id) << "\" name=\"" << esc(mf.name)
       << "\" sourceRef=\"" << esc(mf.source) << "\" targetRef=\"" << esc(mf.target) << "\"/>\n";
  os << "  </bpmn:collaboration>\n";

  for (const auto& pool : m.pools) {
    os << "  <bpmn:process id=\"" << esc(process_id(pool)) << "\" isExecutable=\"false\">\n";
    for (const auto& n : pool.nodes) w.node(n, "    ");
    for (const auto& f : pool.flows) w.flow(f, "    ");
    for (const auto& n : pool.nodes)
      if (n.kind == NodeKind::CompensationHandlerTask && !n.attached_to.empty())
        os << "    <bpmn:association id=\"assoc_" << esc(n.id) << "\" sourceRef=\""
           << esc(n.attached_to) << "\" targetRef=\"" << esc(n.id)
           << "\" associationDirection=\"One\"/>\n";
    os << "  </bpmn:process>\n";
  }
  if (options.layout_grid) write_diagram(os, m);
  os << "</bpmn:definitions>\n";
  return os.str();
}

namespace {

using boost::property_tree::ptree;

// Qualified-name resolution against the prefixes declared on the root.
class Names {
 public:
  explicit Names(const ptree& root) {
    if (auto attrs = root.get_child_optional("<xmlattr>"))
      for (const auto& [k, v] : *attrs) {
        if (k == "xmlns")
          ns_[""] = v.data();
        else if (k.rfind("xmlns:", 0) == 0)
          ns_[k.substr(6)] = v.data();
      }
  }

  // Local name when `qname` lives in `ns`, otherwise empty.
  std::string local(const std::string& qname, std::string_view ns) const {
    auto colon = qname.find(':');
    std::string prefix = colon == std::string::npos ? "" : qname.substr(0, colon);
    auto it = ns_.find(prefix);
    if (it == ns_.end() || it->second != ns) return {};
    return colon == std::string::npos ? qname : qname.substr(colon + 1);
  }

  std::string attr(const ptree& el, std::string_view ns, const std::string& name) const {
    if (auto attrs = el.get_child_optional("<xmlattr>"))
      for (const auto& [k, v] : *attrs) {
        if (ns.empty() ? k == name : local(k, ns) == name) return v.data();
      }
    return {};
  }

 private:
  std::map<std::string, std::string> ns_;
};

const std::set<std::string> kIgnored = {
    "documentation", "extensionElements", "laneSet", "association", "textAnnotation",
    "dataObject", "dataObjectReference", "dataStoreReference", "ioSpecification", "property",
    "incoming", "outgoing", "group", "dataInputAssociation", "dataOutputAssociation"};

bool has_child(const ptree& el, const Names& names, const char* local) {
  for (const auto& [k, _] : el)
    if (names.local(k, kBpmnModelNs) == local) return true;
  return false;
}

}  // namespace

BpmnModel parse_bpmn(std::string_view xml) {
  std::size_t first = xml.find_first_not_of(" \t\r\n");
  if (xml.substr(0, 3) == "\xEF\xBB\xBF") first = xml.find_first_not_of(" \t\r\n", 3);
  if (first == std::string_view::npos || xml[first] != '<')
    throw Error(ErrorCode::XmlSyntaxError, "document does not start with markup");
  ptree doc;
  try {
    std::istringstream in{std::string(xml)};
    boost::property_tree::read_xml(in, doc);
  } catch (const boost::property_tree::xml_parser_error& e) {
    throw Error(ErrorCode::XmlSyntaxError, e.what());
  }
  const ptree* root = nullptr;
  std::string root_name;
  for (const auto& [k, v] : doc)
    if (k != "<xmlcomment>" && k != "<xmlattr>") {
      root = &v;
      root_name = k;
      break;
    }
  if (!root) throw Error(ErrorCode::XmlSyntaxError, "no root element");
  Names names(*root);
  if (names.local(root_name, kBpmnModelNs) != "definitions")
    throw Error(ErrorCode::NotBpmn, "root is not a BPMN 2.0 definitions element");
  auto attr = [&](const ptree& el, const std::string& n) { return names.attr(el, "", n); };
  auto meta_attr = [&](const ptree& el, const std::string& n) { return names.attr(el, kMetaNs, n); };

  BpmnModel m;
  m.id = attr(*root, "id");
  std::map<std::string, std::pair<std::string, std::string>> participant;  // process -> (pool id, name)
  std::map<std::string, std::string> actor_of;                            // process -> actor
  for (const auto& [k, el] : *root) {
    if (names.local(k, kBpmnModelNs) != "collaboration") continue;
    m.id = attr(el, "id");
    for (const auto& [ck, c] : el) {
      auto local = names.local(ck, kBpmnModelNs);
      if (local == "participant") {
        auto proc = attr(c, "processRef");
        participant[proc] = {attr(c, "id"), attr(c, "name")};
        auto actor = meta_attr(c, "actor");
        if (!actor.empty()) actor_of[proc] = actor;
      } else if (local == "messageFlow") {
        m.message_flows.push_back(
            MessageFlow{attr(c, "id"), attr(c, "sourceRef"), attr(c, "targetRef"), attr(c, "name")});
      }
    }
  }

  for (const auto& [k, el] : *root) {
    if (names.local(k, kBpmnModelNs) != "process") continue;
    Pool pool;
    auto pid = attr(el, "id");
    if (auto it = participant.find(pid); it != participant.end()) {
      pool.id = it->second.first;
      pool.name = it->second.second;
    } else {
      pool.id = pid;
    }
    if (auto it = actor_of.find(pid); it != actor_of.end())
      pool.actor = it->second;
    else
      pool.actor = pool.id.rfind("pool_", 0) == 0 ? pool.id.substr(5) : pool.id;

    std::map<std::string, std::string> handler_source;  // handler -> boundary event
    for (const auto& [ck, c] : el) {
      auto local = names.local(ck, kBpmnModelNs);
      if (local.empty() || local == "<xmlattr>") continue;
      if (local == "sequenceFlow") {
        std::string cond;
        for (const auto& [gk, g] : c)
          if (names.local(gk, kBpmnModelNs) == "conditionExpression") cond = g.data();
        pool.flows.push_back(
            SequenceFlow{attr(c, "id"), attr(c, "sourceRef"), attr(c, "targetRef"), cond});
        continue;
      }
      if (local == "association") {
        handler_source[attr(c, "targetRef")] = attr(c, "sourceRef");
        continue;
      }
      if (kIgnored.count(local)) continue;

      FlowNode n;
      n.id = attr(c, "id");
      n.name = attr(c, "name");
      if (n.id.empty()) continue;
      std::optional<NodeKind> kind;
      if (local == "startEvent") {
        kind = has_child(c, names, "messageEventDefinition") ? NodeKind::MessageStartEvent
                                                             : NodeKind::StartEvent;
      } else if (local == "task") {
        kind = attr(c, "isForCompensation") == "true" ? NodeKind::CompensationHandlerTask
                                                       : NodeKind::Task;
      } else if (local == "sendTask") {
        kind = NodeKind::SendTask;
      } else if (local == "intermediateCatchEvent") {
        if (has_child(c, names, "messageEventDefinition")) kind = NodeKind::MessageCatchEvent;
      } else if (local == "eventBasedGateway") {
        kind = NodeKind::EventBasedGateway;
      } else if (local == "exclusiveGateway") {
        kind = NodeKind::ExclusiveGateway;
      } else if (local == "parallelGateway") {
        kind = NodeKind::ParallelGateway;
      } else if (local == "intermediateThrowEvent") {
        if (has_child(c, names, "compensateEventDefinition"))
          kind = NodeKind::CompensationThrowEvent;
      } else if (local == "boundaryEvent") {
        if (has_child(c, names, "compensateEventDefinition")) {
          kind = NodeKind::CompensationBoundaryEvent;
          n.attached_to = attr(c, "attachedToRef");
        }
      } else if (local == "endEvent") {
        kind = has_child(c, names, "terminateEventDefinition") ? NodeKind::TerminateEndEvent
                                                               : NodeKind::EndEvent;
      }
      n.kind = kind.value_or(NodeKind::Task);
      n.foreign = !kind || meta_attr(c, "foreign") == "true";

      auto act = parse_act(meta_attr(c, "act"));
      auto tx = meta_attr(c, "transaction");
      if (act && !tx.empty()) {
        NodeTag tag;
        tag.transaction = tx;
        tag.act = *act;
        tag.role = meta_attr(c, "role") == "Executor" ? Role::Executor : Role::Initiator;
        tag.reentry = meta_attr(c, "reentry") == "true";
        n.meta = tag;
      } else {
        n.meta = tag_from_node_id(n.id);
      }
      pool.nodes.push_back(std::move(n));
    }
    for (auto& n : pool.nodes)
      if (n.kind == NodeKind::CompensationHandlerTask)
        if (auto it = handler_source.find(n.id); it != handler_source.end())
          n.attached_to = it->second;
    m.pools.push_back(std::move(pool));
  }
  canonicalize(m);
  return m;
}

}  // namespace psibpmn
