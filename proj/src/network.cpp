#include "psibpmn/network.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include <json.hpp>

#include "psibpmn/error.hpp"

namespace psibpmn {

using nlohmann::json;

const ActorRole* TransactionNetwork::find_actor(std::string_view id) const {
  auto it = std::find_if(actors.begin(), actors.end(), [&](const auto& a) { return a.id == id; });
  return it == actors.end() ? nullptr : &*it;
}

const TransactionKind* TransactionNetwork::find_transaction(std::string_view id) const {
  auto it = std::find_if(transactions.begin(), transactions.end(),
                         [&](const auto& t) { return t.id == id; });
  return it == transactions.end() ? nullptr : &*it;
}

const Dependency* TransactionNetwork::parent_of(std::string_view id) const {
  auto it = std::find_if(dependencies.begin(), dependencies.end(),
                         [&](const auto& d) { return d.child == id; });
  return it == dependencies.end() ? nullptr : &*it;
}

std::vector<Dependency> TransactionNetwork::children_of(std::string_view id) const {
  std::vector<Dependency> out;
  for (const auto& d : dependencies)
    if (d.parent == id) out.push_back(d);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.child < b.child; });
  return out;
}

std::string_view to_string(DependencyKind kind) {
  switch (kind) {
    case DependencyKind::RaP: return "RaP";
    case DependencyKind::RaE: return "RaE";
    case DependencyKind::RaD: return "RaD";
  }
  return "?";
}

std::optional<DependencyKind> parse_dependency_kind(std::string_view text) {
  if (text == "RaP") return DependencyKind::RaP;
  if (text == "RaE") return DependencyKind::RaE;
  if (text == "RaD") return DependencyKind::RaD;
  return std::nullopt;
}

std::string_view to_string(DetailLevel level) {
  switch (level) {
    case DetailLevel::HappyFlow: return "HappyFlow";
    case DetailLevel::WithDissent: return "WithDissent";
    case DetailLevel::Complete: return "Complete";
  }
  return "?";
}

std::optional<DetailLevel> parse_detail_level(std::string_view text) {
  if (text == "happy" || text == "HappyFlow") return DetailLevel::HappyFlow;
  if (text == "dissent" || text == "WithDissent") return DetailLevel::WithDissent;
  if (text == "complete" || text == "Complete") return DetailLevel::Complete;
  return std::nullopt;
}

bool is_valid_id_token(std::string_view id) {
  if (id.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(id.front())) return false;
  return std::all_of(id.begin() + 1, id.end(),
                     [&](char c) { return alpha(c) || digit(c) || c == '_'; });
}

namespace {

std::string required_string(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string())
    throw Error(ErrorCode::SyntaxError,
                std::string(where) + ": missing string field '" + key + "'");
  return it->get<std::string>();
}

std::string required_id(const json& obj, const char* key, std::string_view where) {
  auto id = required_string(obj, key, where);
  if (!is_valid_id_token(id))
    throw Error(ErrorCode::SyntaxError, std::string(where) + ": malformed id '" + id + "'");
  return id;
}

const json& required_array(const json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || !it->is_array())
    throw Error(ErrorCode::SyntaxError, std::string("missing array '") + key + "'");
  return *it;
}

}  // namespace

TransactionNetwork parse_network_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::SyntaxError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::SyntaxError, "top level must be an object");

  TransactionNetwork net;
  std::set<std::string> actor_ids;
  for (const auto& a : required_array(doc, "actors")) {
    if (!a.is_object()) throw Error(ErrorCode::SyntaxError, "actor entry must be an object");
    ActorRole actor{required_id(a, "id", "actor"), required_string(a, "name", "actor")};
    if (!actor_ids.insert(actor.id).second)
      throw Error(ErrorCode::DuplicateId, "actor '" + actor.id + "'");
    net.actors.push_back(std::move(actor));
  }

  std::set<std::string> tx_ids;
  std::set<std::string> product_ids;
  for (const auto& t : required_array(doc, "transactions")) {
    if (!t.is_object()) throw Error(ErrorCode::SyntaxError, "transaction entry must be an object");
    TransactionKind tk;
    tk.id = required_id(t, "id", "transaction");
    tk.name = required_string(t, "name", "transaction " + tk.id);
    tk.initiator = required_id(t, "initiator", "transaction " + tk.id);
    tk.executor = required_id(t, "executor", "transaction " + tk.id);
    auto res = t.find("result");
    if (res == t.end() || !res->is_object())
      throw Error(ErrorCode::SyntaxError, "transaction " + tk.id + ": missing object 'result'");
    tk.result.id = required_id(*res, "id", "result of " + tk.id);
    tk.result.phrase = required_string(*res, "phrase", "result of " + tk.id);
    if (!tx_ids.insert(tk.id).second) throw Error(ErrorCode::DuplicateId, "transaction '" + tk.id + "'");
    if (!product_ids.insert(tk.result.id).second)
      throw Error(ErrorCode::DuplicateId, "product kind '" + tk.result.id + "'");
    for (const auto* actor : {&tk.initiator, &tk.executor})
      if (!actor_ids.count(*actor))
        throw Error(ErrorCode::UnknownReference,
                    "transaction " + tk.id + " references undeclared actor '" + *actor + "'");
    net.transactions.push_back(std::move(tk));
  }

  auto deps = doc.find("dependencies");
  if (deps != doc.end()) {
    if (!deps->is_array()) throw Error(ErrorCode::SyntaxError, "'dependencies' must be an array");
    for (const auto& d : *deps) {
      if (!d.is_object()) throw Error(ErrorCode::SyntaxError, "dependency entry must be an object");
      Dependency dep;
      dep.parent = required_id(d, "parent", "dependency");
      dep.child = required_id(d, "child", "dependency");
      auto kind_text = required_string(d, "kind", "dependency");
      auto kind = parse_dependency_kind(kind_text);
      if (!kind) throw Error(ErrorCode::SyntaxError, "unknown dependency kind '" + kind_text + "'");
      dep.kind = *kind;
      for (const auto* tx : {&dep.parent, &dep.child})
        if (!tx_ids.count(*tx))
          throw Error(ErrorCode::UnknownReference,
                      "dependency references undeclared transaction '" + *tx + "'");
      net.dependencies.push_back(std::move(dep));
    }
  }
  return net;
}

std::string serialize_network_spec(const TransactionNetwork& net) {
  json doc = json::object();
  doc["actors"] = json::array();
  for (const auto& a : net.actors) doc["actors"].push_back({{"id", a.id}, {"name", a.name}});
  doc["transactions"] = json::array();
  for (const auto& t : net.transactions) {
    doc["transactions"].push_back({{"id", t.id},
                                   {"name", t.name},
                                   {"initiator", t.initiator},
                                   {"executor", t.executor},
                                   {"result", {{"id", t.result.id}, {"phrase", t.result.phrase}}}});
  }
  doc["dependencies"] = json::array();
  for (const auto& d : net.dependencies)
    doc["dependencies"].push_back(
        {{"parent", d.parent}, {"child", d.child}, {"kind", std::string(to_string(d.kind))}});
  return doc.dump(2) + "\n";
}

std::string_view to_string(ViolationRule rule) {
  switch (rule) {
    case ViolationRule::EmptyName: return "EmptyName";
    case ViolationRule::ProductPhrase: return "ProductPhrase";
    case ViolationRule::InitiatorIsExecutor: return "InitiatorIsExecutor";
    case ViolationRule::SelfDependency: return "SelfDependency";
    case ViolationRule::MultipleParents: return "MultipleParents";
    case ViolationRule::CycleDetected: return "CycleDetected";
    case ViolationRule::CompositionRuleBreach: return "CompositionRuleBreach";
    case ViolationRule::NoRoot: return "NoRoot";
  }
  return "?";
}

std::string_view to_string(Severity severity) {
  return severity == Severity::Error ? "error" : "warning";
}

namespace {

bool has_one_bracketed_segment(std::string_view phrase) {
  int segments = 0;
  bool open = false;
  for (char c : phrase) {
    if (c == '[') {
      if (open) return false;
      open = true;
    } else if (c == ']') {
      if (!open) return false;
      open = false;
      ++segments;
    }
  }
  return !open && segments == 1;
}

// Ids of transactions that lie on a cycle, each cycle reported once by its
// smallest member.
std::vector<std::vector<std::string>> find_cycles(const TransactionNetwork& net) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& t : net.transactions) adj[t.id];
  for (const auto& d : net.dependencies)
    if (d.parent != d.child) adj[d.parent].push_back(d.child);
  for (auto& [_, v] : adj) std::sort(v.begin(), v.end());

  std::map<std::string, int> color;  // 0 white, 1 grey, 2 black
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> cycles;
  std::set<std::set<std::string>> seen;

  auto dfs = [&](auto&& self, const std::string& u) -> void {
    color[u] = 1;
    stack.push_back(u);
    for (const auto& v : adj[u]) {
      if (color[v] == 1) {
        auto from = std::find(stack.begin(), stack.end(), v);
        std::vector<std::string> cyc(from, stack.end());
        std::set<std::string> key(cyc.begin(), cyc.end());
        if (seen.insert(key).second) cycles.push_back(std::move(cyc));
      } else if (color[v] == 0) {
        self(self, v);
      }
    }
    stack.pop_back();
    color[u] = 2;
  };
  for (const auto& [id, _] : adj)
    if (color[id] == 0) dfs(dfs, id);
  return cycles;
}

}  // namespace

std::vector<Violation> validate_network(const TransactionNetwork& net,
                                        const ValidationOptions& options) {
  std::vector<Violation> out;
  auto add = [&](ViolationRule rule, Severity sev, std::vector<std::string> ids, std::string msg) {
    out.push_back(Violation{rule, sev, std::move(ids), std::move(msg)});
  };

  for (const auto& a : net.actors)
    if (a.name.empty()) add(ViolationRule::EmptyName, Severity::Error, {a.id}, "actor has no name");

  for (const auto& t : net.transactions) {
    if (t.name.empty())
      add(ViolationRule::EmptyName, Severity::Error, {t.id}, "transaction has no name");
    if (!has_one_bracketed_segment(t.result.phrase))
      add(ViolationRule::ProductPhrase, Severity::Error, {t.id, t.result.id},
          "result phrase must contain exactly one [bracketed] product");
    if (t.initiator == t.executor)
      add(ViolationRule::InitiatorIsExecutor, Severity::Error, {t.id, t.initiator},
          "initiator and executor must be distinct actors");
  }

  std::map<std::string, std::vector<std::string>> parents;
  for (const auto& d : net.dependencies) {
    if (d.parent == d.child) {
      add(ViolationRule::SelfDependency, Severity::Error, {d.parent},
          "transaction depends on itself");
      continue;
    }
    parents[d.child].push_back(d.parent);
    const auto* parent = net.find_transaction(d.parent);
    const auto* child = net.find_transaction(d.child);
    if (parent && child && child->initiator != parent->executor) {
      add(ViolationRule::CompositionRuleBreach,
          options.allow_composition_breach ? Severity::Warning : Severity::Error,
          {d.parent, d.child},
          "initiator " + child->initiator + " of " + d.child + " is not the executor " +
              parent->executor + " of " + d.parent);
    }
  }
  for (const auto& [child, ps] : parents) {
    if (ps.size() > 1) {
      std::vector<std::string> ids{child};
      ids.insert(ids.end(), ps.begin(), ps.end());
      add(ViolationRule::MultipleParents, Severity::Error, ids, child + " has more than one parent");
    }
  }
  for (auto& cyc : find_cycles(net))
    add(ViolationRule::CycleDetected, Severity::Error, cyc, "dependency cycle");

  bool has_root = std::any_of(net.transactions.begin(), net.transactions.end(),
                              [&](const auto& t) { return !parents.count(t.id); });
  if (!has_root) add(ViolationRule::NoRoot, Severity::Error, {}, "network has no root transaction");
  return out;
}

bool has_errors(const std::vector<Violation>& violations) {
  return std::any_of(violations.begin(), violations.end(),
                     [](const auto& v) { return v.severity == Severity::Error; });
}

std::vector<std::string> execution_order(const TransactionNetwork& net) {
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> children;
  for (const auto& t : net.transactions) indegree[t.id] = 0;
  for (const auto& d : net.dependencies) {
    ++indegree[d.child];
    children[d.parent].push_back(d.child);
  }
  for (auto& [_, v] : children) std::sort(v.begin(), v.end());

  std::deque<std::string> ready;
  for (const auto& [id, deg] : indegree)  // map iteration is id-ordered
    if (deg == 0) ready.push_back(id);

  std::vector<std::string> order;
  while (!ready.empty()) {
    auto id = ready.front();
    ready.pop_front();
    order.push_back(id);
    for (const auto& c : children[id])
      if (--indegree[c] == 0) ready.push_back(c);
  }
  if (order.size() != indegree.size())
    throw Error(ErrorCode::CycleDetected, "dependency graph is not acyclic");
  return order;
}

}  // namespace psibpmn
