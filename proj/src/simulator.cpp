#include "psibpmn/simulator.hpp"

#include <algorithm>
#include <map>

#include "psibpmn/error.hpp"

namespace psibpmn {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Accepted: return "Accepted";
    case Outcome::Stopped: return "Stopped";
    case Outcome::Terminated: return "Terminated";
    case Outcome::BoundExhausted: return "BoundExhausted";
    case Outcome::Deadlock: return "Deadlock";
  }
  return "?";
}

std::string InstanceState::key() const {
  std::string k(tokens.begin(), tokens.end());
  k.reserve(k.size() + world.size() * 7);
  for (const auto& w : world) {
    k.push_back(static_cast<char>(w.history));
    k.push_back(static_cast<char>(w.stopped | (w.terminated << 1) | (w.revoking << 2)));
    k.push_back(static_cast<char>(w.rerequest));
    k.push_back(static_cast<char>(w.redeclare));
    k.push_back(static_cast<char>(w.revocations));
  }
  return k;
}

Simulator::Simulator(BpmnModel model, LoopBounds bounds)
    : model_(std::move(model)), bounds_(bounds) {
  std::map<std::string, int> index;
  std::set<std::string> tx_ids;
  for (std::size_t p = 0; p < model_.pools.size(); ++p)
    for (const auto& n : model_.pools[p].nodes) {
      index.emplace(n.id, static_cast<int>(nodes_.size()));
      NodeInfo info;
      info.node = &n;
      info.pool = static_cast<int>(p);
      nodes_.push_back(info);
      if (n.meta) tx_ids.insert(n.meta->transaction);
    }
  txs_.assign(tx_ids.begin(), tx_ids.end());
  for (auto& info : nodes_) {
    const auto& n = *info.node;
    if (n.meta)
      info.tx = static_cast<int>(std::lower_bound(txs_.begin(), txs_.end(), n.meta->transaction) -
                                 txs_.begin());
    info.scope = in_revocation_scope(n);
    info.emits = n.meta && !n.meta->reentry &&
                 (n.kind == NodeKind::Task || n.kind == NodeKind::SendTask);
  }

  for (const auto& pool : model_.pools)
    for (const auto& f : pool.flows) {
      auto s = index.find(f.source);
      auto t = index.find(f.target);
      if (s == index.end() || t == index.end()) continue;
      FlowInfo fi{s->second, t->second, Guard::None, Act::Request};
      if (f.condition == "loop:rerequest") {
        fi.guard = Guard::ReRequest;
      } else if (f.condition == "loop:redeclare") {
        fi.guard = Guard::ReDeclare;
      } else if (f.condition.rfind("performed:", 0) == 0) {
        if (auto a = parse_act(std::string_view(f.condition).substr(10))) {
          fi.guard = Guard::Performed;
          fi.performed = *a;
        }
      }
      nodes_[fi.source].out.push_back(static_cast<int>(flows_.size()));
      ++nodes_[fi.target].in_degree;
      if (nodes_[fi.source].node->kind == NodeKind::EventBasedGateway)
        nodes_[fi.target].ebg_preds.push_back(fi.source);
      flows_.push_back(fi);
    }
  for (const auto& m : model_.message_flows) {
    auto s = index.find(m.source);
    auto t = index.find(m.target);
    if (s == index.end() || t == index.end()) continue;
    nodes_[s->second].msg_targets.push_back(t->second);
    nodes_[t->second].has_msg_in = true;
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) owner_.push_back(static_cast<int>(i));
  for (auto& f : flows_) {
    auto& target = nodes_[f.target];
    if (target.node->kind != NodeKind::ParallelGateway || target.in_degree < 2) continue;
    f.slot = static_cast<int>(owner_.size());
    owner_.push_back(f.target);
    target.slots.push_back(f.slot);
  }
  for (auto& info : nodes_)
    info.trigger = info.node->kind == NodeKind::MessageCatchEvent && !info.has_msg_in &&
                   info.tx >= 0;
  for (auto& info : nodes_)
    if (info.node->kind == NodeKind::EventBasedGateway)
      for (int f : info.out)
        if (nodes_[flows_[f].target].trigger) info.listener = true;
}

InstanceState Simulator::initial_state() const {
  InstanceState s;
  s.tokens.assign(owner_.size(), 0);
  s.world.assign(txs_.size(), TxWorld{});
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].node->kind == NodeKind::StartEvent) s.tokens[i] = 1;
  return s;
}

bool Simulator::ready(const InstanceState& s, int c) const {
  const auto& info = nodes_[c];
  if (info.node->kind == NodeKind::MessageStartEvent) return true;
  if (info.node->kind != NodeKind::MessageCatchEvent) return false;
  if (s.tokens[c]) return true;
  return std::any_of(info.ebg_preds.begin(), info.ebg_preds.end(),
                     [&](int p) { return s.tokens[p] > 0; });
}

bool Simulator::blocked(const InstanceState& s, int i) const {
  const auto& info = nodes_[i];
  if (info.tx < 0 || info.scope) return false;
  auto k = info.node->kind;
  return (k == NodeKind::Task || k == NodeKind::SendTask) && s.world[info.tx].revoking;
}

bool Simulator::trigger_ok(const InstanceState& s, int tx) const {
  const auto& w = s.world[tx];
  return w.history >= 1 && !w.stopped && !w.terminated && !w.revoking &&
         w.revocations < bounds_.revocations;
}

bool Simulator::guard_ok(const InstanceState& s, int tx, const FlowInfo& f) const {
  if (f.guard == Guard::None || tx < 0) return true;
  const auto& w = s.world[tx];
  switch (f.guard) {
    case Guard::ReRequest: return w.rerequest < bounds_.rerequest;
    case Guard::ReDeclare: return w.redeclare < bounds_.redeclare;
    case Guard::Performed:
      return is_core_act(f.performed) && w.history > core_index(f.performed);
    default: return true;
  }
}

std::vector<Step> Simulator::enabled_steps(const InstanceState& s) const {
  std::vector<Step> out;
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    const auto& info = nodes_[i];
    if (!s.tokens[i] && info.slots.empty()) continue;
    switch (info.node->kind) {
      case NodeKind::StartEvent:
      case NodeKind::CompensationThrowEvent:
        out.push_back(Step{Step::Kind::Fire, i});
        break;
      case NodeKind::Task:
      case NodeKind::SendTask:
      case NodeKind::CompensationHandlerTask:
        if (blocked(s, i)) break;
        if (info.msg_targets.empty()) {
          out.push_back(Step{Step::Kind::Fire, i});
        } else {
          for (int t : info.msg_targets)
            if (ready(s, t)) out.push_back(Step{Step::Kind::Deliver, i, t});
        }
        break;
      case NodeKind::MessageCatchEvent:
        if (info.trigger && trigger_ok(s, info.tx)) out.push_back(Step{Step::Kind::Fire, i});
        break;
      case NodeKind::EventBasedGateway:
        for (int f : info.out) {
          int c = flows_[f].target;
          if (nodes_[c].trigger && trigger_ok(s, nodes_[c].tx))
            out.push_back(Step{Step::Kind::Fire, c, -1, i});
        }
        break;
      case NodeKind::ExclusiveGateway:
        for (int f : info.out)
          if (guard_ok(s, info.tx, flows_[f])) out.push_back(Step{Step::Kind::Branch, i, -1, -1, f});
        break;
      case NodeKind::ParallelGateway:
        if (std::all_of(info.slots.begin(), info.slots.end(), [&](int k) { return s.tokens[k] > 0; }))
          out.push_back(Step{Step::Kind::Fire, i});
        break;
      default:
        break;
    }
  }
  return out;
}

void Simulator::effects(InstanceState& s, int i, std::vector<TraceEvent>* events) const {
  const auto& info = nodes_[i];
  if (info.tx < 0) return;
  auto& w = s.world[info.tx];
  const auto& tag = *info.node->meta;
  if (info.node->kind == NodeKind::CompensationThrowEvent) {
    if (is_core_act(tag.act) && w.history > core_index(tag.act)) {
      w.history = static_cast<std::uint8_t>(core_index(tag.act));
      if (events) events->push_back(TraceEvent{tag.transaction, tag.act, true});
    }
    return;
  }
  if (info.trigger) {
    w.revoking = true;
    ++w.revocations;
    return;
  }
  if (info.emits) {
    if (events) events->push_back(TraceEvent{tag.transaction, tag.act, false});
    if (is_core_act(tag.act))
      w.history = std::max<std::uint8_t>(w.history, static_cast<std::uint8_t>(core_index(tag.act) + 1));
    if (tag.act == Act::Stop) w.stopped = true;
  }
  // An allowed revocation interrupts the normal flow of the transaction.
  if (tag.act == Act::Allow && (info.node->kind == NodeKind::SendTask ||
                                info.node->kind == NodeKind::MessageCatchEvent)) {
    for (std::size_t j = 0; j < owner_.size(); ++j) {
      const auto& o = nodes_[owner_[j]];
      if (o.pool == info.pool && o.tx == info.tx && !o.scope) s.tokens[j] = 0;
    }
  }
}

void Simulator::arrive(InstanceState& s, int flow) const {
  if (int k = flows_[flow].slot; k >= 0) {
    if (s.tokens[k] < 255) ++s.tokens[k];
    return;
  }
  const int i = flows_[flow].target;
  const auto& info = nodes_[i];
  switch (info.node->kind) {
    case NodeKind::EndEvent:
      return;
    case NodeKind::TerminateEndEvent:
      for (std::size_t j = 0; j < owner_.size(); ++j)
        if (nodes_[owner_[j]].pool == info.pool && nodes_[owner_[j]].tx == info.tx) s.tokens[j] = 0;
      if (info.tx >= 0) {
        s.world[info.tx].terminated = true;
        s.world[info.tx].revoking = false;
      }
      return;
    default:
      if (s.tokens[i] < 255) ++s.tokens[i];
  }
}

void Simulator::produce(InstanceState& s, int i, int only_flow) const {
  for (int f : nodes_[i].out)
    if (only_flow < 0 || f == only_flow) arrive(s, f);
}

InstanceState Simulator::apply(const InstanceState& state, const Step& step,
                               std::vector<TraceEvent>* events) const {
  InstanceState s = state;
  const int i = step.node;
  const auto& info = nodes_[i];
  switch (step.kind) {
    case Step::Kind::Branch: {
      --s.tokens[i];
      const auto& f = flows_[step.flow];
      if (info.tx >= 0) {
        if (f.guard == Guard::ReRequest) ++s.world[info.tx].rerequest;
        if (f.guard == Guard::ReDeclare) ++s.world[info.tx].redeclare;
      }
      produce(s, i, step.flow);
      break;
    }
    case Step::Kind::Fire: {
      if (step.via >= 0)
        --s.tokens[step.via];
      else if (!info.slots.empty())
        for (int k : info.slots) --s.tokens[k];
      else
        --s.tokens[i];
      effects(s, i, events);
      produce(s, i);
      break;
    }
    case Step::Kind::Deliver: {
      --s.tokens[i];
      effects(s, i, events);
      produce(s, i);
      const int t = step.target;
      const auto& rinfo = nodes_[t];
      if (rinfo.node->kind == NodeKind::MessageCatchEvent) {
        if (s.tokens[t]) {
          --s.tokens[t];
        } else {
          for (int p : rinfo.ebg_preds)
            if (s.tokens[p]) {
              --s.tokens[p];
              break;
            }
        }
      }
      if (info.node->meta && rinfo.tx >= 0 &&
          (info.node->meta->reentry || info.node->meta->act == Act::Refuse))
        s.world[rinfo.tx].revoking = false;
      effects(s, t, events);
      produce(s, t);
      break;
    }
  }
  return s;
}

Outcome Simulator::outcome(const InstanceState& s) const {
  for (std::size_t i = 0; i < owner_.size(); ++i)
    if (s.tokens[i] && !nodes_[owner_[i]].listener) return Outcome::Deadlock;
  bool any_terminated = false, any_stopped = false, all_accepted = true, any_started = false;
  for (const auto& w : s.world) {
    if (w.history == 0 && !w.terminated) continue;
    any_started = true;
    any_terminated = any_terminated || w.terminated;
    any_stopped = any_stopped || w.stopped;
    all_accepted = all_accepted && w.history == kCoreActs.size();
  }
  if (any_terminated) return Outcome::Terminated;
  if (any_stopped) return Outcome::Stopped;
  if (any_started && all_accepted) return Outcome::Accepted;
  return Outcome::Deadlock;
}

std::string Simulator::describe(const Step& step) const {
  const auto& n = *nodes_[step.node].node;
  switch (step.kind) {
    case Step::Kind::Fire: return "fire " + n.id;
    case Step::Kind::Deliver: return "send " + n.id + " -> " + nodes_[step.target].node->id;
    case Step::Kind::Branch: return "take " + n.id + " -> " + nodes_[flows_[step.flow].target].node->id;
  }
  return n.id;
}

}  // namespace psibpmn
