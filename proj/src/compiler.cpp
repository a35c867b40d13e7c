#include "psibpmn/compiler.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "psibpmn/error.hpp"

namespace psibpmn {

namespace {

std::string lower(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

const char* role_token(Role r) { return r == Role::Initiator ? "i" : "e"; }

}  // namespace

std::string scheme_node_id(std::string_view transaction, Role role, Act act, NodeKind kind,
                           bool reentry) {
  std::string id = lower(transaction) + "_" + role_token(role) + "_" + lower(to_string(act)) +
                   "_" + lower(to_string(kind));
  if (reentry) id += "_re";
  return id;
}

std::optional<NodeTag> tag_from_node_id(std::string_view id) {
  static const std::regex re(R"(^([a-z][a-z0-9_]*)_(i|e)_([a-z]+)_([a-z]+)(_re)?(_h?[0-9]+)?$)");
  std::cmatch m;
  if (!std::regex_match(id.data(), id.data() + id.size(), m, re)) return std::nullopt;
  auto act = parse_act(m[3].str());
  auto kind = parse_node_kind(m[4].str());
  if (!act || !kind) return std::nullopt;
  NodeTag tag;
  tag.transaction = m[1].str();
  tag.role = m[2].str() == "i" ? Role::Initiator : Role::Executor;
  tag.act = *act;
  tag.reentry = m[5].matched;
  return tag;
}

Census element_census(const BpmnModel& model) {
  Census out;
  for (const auto& pool : model.pools)
    for (const auto& n : pool.nodes)
      if (n.meta) out[{n.meta->transaction, n.meta->act}].push_back(n.id);
  for (auto& [_, ids] : out) std::sort(ids.begin(), ids.end());
  return out;
}

namespace {

struct InitiatorSide {
  std::string entry;  // where the parent (or the start event) enters
  std::string exit;   // the Accept send; control continues after it
};

struct ExecutorSide {
  std::string promise;
  std::string execute;
  std::string declare;
  std::string await_accept;  // node that follows the first Declare
};

class ModelBuilder {
 public:
  ModelBuilder(const TransactionNetwork& net, DetailLevel level) : net_(net), level_(level) {
    for (const auto& t : net.transactions)
      for (const auto* a : {&t.initiator, &t.executor})
        if (!pools_.count(*a)) {
          const auto* actor = net.find_actor(*a);
          Pool p;
          p.actor = *a;
          p.id = "pool_" + *a;
          p.name = actor ? actor->name : *a;
          pools_.emplace(*a, std::move(p));
        }
  }

  std::string node(const TransactionKind& tk, Role role, Act act, NodeKind kind,
                   std::string name, bool reentry = false) {
    std::string base = scheme_node_id(tk.id, role, act, kind, reentry);
    int n = ++dup_[base];
    std::string id = n == 1 ? base : base + "_" + std::to_string(n);
    add_node(tk, role, FlowNode{id, kind, std::move(name),
                                NodeTag{tk.id, act, role, reentry}, {}, false});
    if (level_ == DetailLevel::Complete && !reentry && is_core_act(act) &&
        (kind == NodeKind::Task || kind == NodeKind::SendTask))
      add_compensation(tk, role, act, id);
    return id;
  }

  void flow(const std::string& src, const std::string& tgt, std::string condition = {}) {
    auto& pool = pools_.at(node_actor_.at(src));
    pool.flows.push_back(SequenceFlow{"sf_" + src + "__" + tgt, src, tgt, std::move(condition)});
  }

  void message(const std::string& src, const std::string& tgt, Act act) {
    messages_.push_back(MessageFlow{"mf_" + src + "__" + tgt, src, tgt, std::string(act_label(act))});
  }

  BpmnModel finish(std::string id) {
    BpmnModel m;
    m.id = std::move(id);
    for (auto& [_, pool] : pools_) m.pools.push_back(std::move(pool));
    m.message_flows = std::move(messages_);
    canonicalize(m);
    return m;
  }

  const TransactionNetwork& net() const { return net_; }
  DetailLevel level() const { return level_; }

 private:
  void add_node(const TransactionKind& tk, Role role, FlowNode n) {
    const auto& actor = role == Role::Initiator ? tk.initiator : tk.executor;
    node_actor_[n.id] = actor;
    pools_.at(actor).nodes.push_back(std::move(n));
  }

  void add_compensation(const TransactionKind& tk, Role role, Act act, const std::string& task) {
    std::string name = std::string(to_string(act)) + "⁻¹";
    std::string bbase = scheme_node_id(tk.id, role, act, NodeKind::CompensationBoundaryEvent);
    int bn = ++dup_[bbase];
    std::string boundary = bn == 1 ? bbase : bbase + "_" + std::to_string(bn);
    add_node(tk, role, FlowNode{boundary, NodeKind::CompensationBoundaryEvent, name,
                                NodeTag{tk.id, act, role, false}, task, false});
    std::string hbase = scheme_node_id(tk.id, role, act, NodeKind::CompensationHandlerTask);
    int hn = ++dup_[hbase];
    add_node(tk, role, FlowNode{hbase + "_h" + std::to_string(hn), NodeKind::CompensationHandlerTask,
                                name, NodeTag{tk.id, act, role, false}, boundary, false});
  }

  const TransactionNetwork& net_;
  DetailLevel level_;
  std::map<std::string, Pool> pools_;
  std::map<std::string, std::string> node_actor_;
  std::map<std::string, int> dup_;
  std::vector<MessageFlow> messages_;
};

std::string label(Act act, const TransactionKind& tk) {
  return std::string(act_label(act)) + " " + tk.name;
}

// Nodes of the normal flow that revocation paths land on.
struct Landing {
  std::string i_request_again;  // initiator decision after a decline
  std::string i_await_declare;  // initiator waiting for the first declaration
  std::string i_await_redeclare;
  std::string e_await_rerequest;
  std::string e_after_reject;  // executor decision after a rejection
  std::string e_declare;
};

class TransactionCompiler {
 public:
  TransactionCompiler(ModelBuilder& b, const TransactionKind& tk, bool root)
      : b_(b), tk_(tk), root_(root) {}

  InitiatorSide initiator() {
    const auto level = b_.level();
    const auto I = Role::Initiator;
    InitiatorSide side;
    std::string start;
    if (root_) start = b_.node(tk_, I, Act::Request, NodeKind::StartEvent, "Need for " + tk_.name);

    std::string first_normal;
    if (level == DetailLevel::Complete) {
      init_i_ = b_.node(tk_, I, Act::Request, NodeKind::ParallelGateway, "INITIAL GATEWAY");
      side.entry = init_i_;
    }

    auto req = b_.node(tk_, I, Act::Request, NodeKind::SendTask, label(Act::Request, tk_));
    first_normal = req;
    if (side.entry.empty()) side.entry = req;
    if (!init_i_.empty()) b_.flow(init_i_, req);
    if (!start.empty()) b_.flow(start, side.entry);
    i_request_ = req;

    if (level == DetailLevel::HappyFlow) {
      auto cp = b_.node(tk_, I, Act::Promise, NodeKind::MessageCatchEvent,
                        label(Act::Promise, tk_) + " received");
      auto cd = b_.node(tk_, I, Act::Declare, NodeKind::MessageCatchEvent,
                        label(Act::Declare, tk_) + " received");
      auto acc = b_.node(tk_, I, Act::Accept, NodeKind::SendTask, label(Act::Accept, tk_));
      b_.flow(req, cp);
      b_.flow(cp, cd);
      b_.flow(cd, acc);
      i_catch_promise_ = cp;
      i_catch_declare_ = cd;
      i_accept_ = acc;
    } else {
      auto gpd = b_.node(tk_, I, Act::Promise, NodeKind::EventBasedGateway,
                         "Await promise or decline " + tk_.name);
      auto cp = b_.node(tk_, I, Act::Promise, NodeKind::MessageCatchEvent,
                        label(Act::Promise, tk_) + " received");
      auto cdl = b_.node(tk_, I, Act::Decline, NodeKind::MessageCatchEvent,
                         label(Act::Decline, tk_) + " received");
      auto xdl = b_.node(tk_, I, Act::Decline, NodeKind::ExclusiveGateway,
                         "Request again " + tk_.name + "?");
      auto req2 = b_.node(tk_, I, Act::Request, NodeKind::SendTask, label(Act::Request, tk_) + " again");
      auto stop = b_.node(tk_, I, Act::Stop, NodeKind::SendTask, label(Act::Stop, tk_));
      auto end_stop = b_.node(tk_, I, Act::Stop, NodeKind::EndEvent, tk_.name + " stopped");
      auto cd = b_.node(tk_, I, Act::Declare, NodeKind::MessageCatchEvent,
                        label(Act::Declare, tk_) + " received");
      auto xar = b_.node(tk_, I, Act::Accept, NodeKind::ExclusiveGateway,
                         "Product of " + tk_.name + " acceptable?");
      auto acc = b_.node(tk_, I, Act::Accept, NodeKind::SendTask, label(Act::Accept, tk_));
      auto rej = b_.node(tk_, I, Act::Reject, NodeKind::SendTask, label(Act::Reject, tk_));
      auto gds = b_.node(tk_, I, Act::Reject, NodeKind::EventBasedGateway,
                         "Await declare or stop " + tk_.name);
      auto cd2 = b_.node(tk_, I, Act::Declare, NodeKind::MessageCatchEvent,
                         label(Act::Declare, tk_) + " received again");
      auto cst = b_.node(tk_, I, Act::Stop, NodeKind::MessageCatchEvent,
                         label(Act::Stop, tk_) + " received");
      auto end_st2 = b_.node(tk_, I, Act::Stop, NodeKind::EndEvent, tk_.name + " stopped");
      b_.flow(req, gpd);
      b_.flow(gpd, cp);
      b_.flow(gpd, cdl);
      b_.flow(cp, cd);
      b_.flow(cdl, xdl);
      b_.flow(xdl, req2, "loop:rerequest");
      b_.flow(xdl, stop);
      b_.flow(req2, gpd);
      b_.flow(stop, end_stop);
      b_.flow(cd, xar);
      b_.flow(xar, acc);
      b_.flow(xar, rej);
      b_.flow(rej, gds);
      b_.flow(gds, cd2);
      b_.flow(gds, cst);
      b_.flow(cd2, xar);
      b_.flow(cst, end_st2);
      i_catch_promise_ = cp;
      i_catch_declare_ = cd;
      i_catch_declare2_ = cd2;
      i_catch_decline_ = cdl;
      i_request2_ = req2;
      i_stop_ = stop;
      i_catch_stop_ = cst;
      i_reject_ = rej;
      i_accept_ = acc;
      landing_.i_request_again = xdl;
      landing_.i_await_declare = cd;
      landing_.i_await_redeclare = gds;
    }
    if (root_) {
      auto end = b_.node(tk_, I, Act::Accept, NodeKind::EndEvent, tk_.name + " accepted");
      b_.flow(i_accept_, end);
    }
    side.exit = i_accept_;
    return side;
  }

  ExecutorSide executor() {
    const auto level = b_.level();
    const auto E = Role::Executor;
    ExecutorSide side;
    auto start = b_.node(tk_, E, Act::Request, NodeKind::MessageStartEvent,
                         label(Act::Request, tk_) + " received");
    e_start_ = start;
    std::string head = start;
    if (level == DetailLevel::Complete) {
      init_e_ = b_.node(tk_, E, Act::Request, NodeKind::ParallelGateway, "INITIAL GATEWAY");
      b_.flow(start, init_e_);
      head = init_e_;
    }
    auto pro = b_.node(tk_, E, Act::Promise, NodeKind::SendTask, label(Act::Promise, tk_));
    auto exe = b_.node(tk_, E, Act::Execute, NodeKind::Task, label(Act::Execute, tk_));
    auto dec = b_.node(tk_, E, Act::Declare, NodeKind::SendTask, label(Act::Declare, tk_));
    side.promise = pro;
    side.execute = exe;
    side.declare = dec;
    e_promise_ = pro;
    e_declare_ = dec;

    if (level == DetailLevel::HappyFlow) {
      auto ca = b_.node(tk_, E, Act::Accept, NodeKind::MessageCatchEvent,
                        label(Act::Accept, tk_) + " received");
      auto end = b_.node(tk_, E, Act::Accept, NodeKind::EndEvent, tk_.name + " accepted");
      b_.flow(head, pro);
      b_.flow(ca, end);
      side.await_accept = ca;
      e_catch_accept_ = ca;
    } else {
      auto xpd = b_.node(tk_, E, Act::Promise, NodeKind::ExclusiveGateway,
                         "Able to produce " + tk_.name + "?");
      auto dcl = b_.node(tk_, E, Act::Decline, NodeKind::SendTask, label(Act::Decline, tk_));
      auto grs = b_.node(tk_, E, Act::Decline, NodeKind::EventBasedGateway,
                         "Await request or stop " + tk_.name);
      auto creq2 = b_.node(tk_, E, Act::Request, NodeKind::MessageCatchEvent,
                           label(Act::Request, tk_) + " received again");
      auto cst = b_.node(tk_, E, Act::Stop, NodeKind::MessageCatchEvent,
                         label(Act::Stop, tk_) + " received");
      auto end_st = b_.node(tk_, E, Act::Stop, NodeKind::EndEvent, tk_.name + " stopped");
      auto gar = b_.node(tk_, E, Act::Accept, NodeKind::EventBasedGateway,
                         "Await accept or reject " + tk_.name);
      auto ca = b_.node(tk_, E, Act::Accept, NodeKind::MessageCatchEvent,
                        label(Act::Accept, tk_) + " received");
      auto end = b_.node(tk_, E, Act::Accept, NodeKind::EndEvent, tk_.name + " accepted");
      auto crj = b_.node(tk_, E, Act::Reject, NodeKind::MessageCatchEvent,
                         label(Act::Reject, tk_) + " received");
      auto xrd = b_.node(tk_, E, Act::Reject, NodeKind::ExclusiveGateway,
                         "Rejection of " + tk_.name + " valid?");
      auto dec2 = b_.node(tk_, E, Act::Declare, NodeKind::SendTask, label(Act::Declare, tk_) + " again");
      auto stop = b_.node(tk_, E, Act::Stop, NodeKind::SendTask, label(Act::Stop, tk_));
      auto end_stop = b_.node(tk_, E, Act::Stop, NodeKind::EndEvent, tk_.name + " stopped");
      b_.flow(head, xpd);
      b_.flow(xpd, pro);
      b_.flow(xpd, dcl);
      b_.flow(dcl, grs);
      b_.flow(grs, creq2);
      b_.flow(grs, cst);
      b_.flow(creq2, xpd);
      b_.flow(cst, end_st);
      b_.flow(gar, ca);
      b_.flow(gar, crj);
      b_.flow(ca, end);
      b_.flow(crj, xrd);
      b_.flow(xrd, dec2, "loop:redeclare");
      b_.flow(xrd, stop);
      b_.flow(dec2, gar);
      b_.flow(stop, end_stop);
      side.await_accept = gar;
      e_catch_accept_ = ca;
      e_catch_reject_ = crj;
      e_decline_ = dcl;
      e_catch_request2_ = creq2;
      e_catch_stop_ = cst;
      e_declare2_ = dec2;
      e_stop_ = stop;
      landing_.e_await_rerequest = grs;
      landing_.e_after_reject = xrd;
      landing_.e_declare = dec;
    }
    return side;
  }

  void messages() {
    b_.message(i_request_, e_start_, Act::Request);
    b_.message(e_promise_, i_catch_promise_, Act::Promise);
    b_.message(e_declare_, i_catch_declare_, Act::Declare);
    b_.message(i_accept_, e_catch_accept_, Act::Accept);
    if (b_.level() == DetailLevel::HappyFlow) return;
    b_.message(i_request2_, e_catch_request2_, Act::Request);
    b_.message(e_decline_, i_catch_decline_, Act::Decline);
    b_.message(i_stop_, e_catch_stop_, Act::Stop);
    b_.message(e_declare2_, i_catch_declare2_, Act::Declare);
    b_.message(i_reject_, e_catch_reject_, Act::Reject);
    b_.message(e_stop_, i_catch_stop_, Act::Stop);
  }

  // Revocation branches of both sides; requires the dissent nodes.
  void revocations() {
    const auto I = Role::Initiator;
    const auto E = Role::Executor;
    auto& b = b_;
    const auto& tk = tk_;
    auto cthrow = [&](Role r, Act a) {
      return b.node(tk, r, a, NodeKind::CompensationThrowEvent, std::string(to_string(a)) + "⁻¹");
    };
    auto chain = [&](std::string from, Role r, std::initializer_list<Act> acts) {
      for (Act a : acts) {
        auto t = cthrow(r, a);
        b.flow(from, t);
        from = t;
      }
      return from;
    };

    // initiator listener
    auto irg = b.node(tk, I, Act::RevokeRequest, NodeKind::EventBasedGateway,
                      "Revocation gateway " + tk.name);
    b.flow(init_i_, irg);
    auto i_trr = b.node(tk, I, Act::RevokeRequest, NodeKind::MessageCatchEvent,
                        label(Act::RevokeRequest, tk) + " triggered");
    auto i_tra = b.node(tk, I, Act::RevokeAccept, NodeKind::MessageCatchEvent,
                        label(Act::RevokeAccept, tk) + " triggered");
    auto i_crp = b.node(tk, I, Act::RevokePromise, NodeKind::MessageCatchEvent,
                        label(Act::RevokePromise, tk) + " received");
    auto i_crd = b.node(tk, I, Act::RevokeDeclare, NodeKind::MessageCatchEvent,
                        label(Act::RevokeDeclare, tk) + " received");
    for (const auto& c : {i_trr, i_tra, i_crp, i_crd}) b.flow(irg, c);

    // executor listener
    auto erg = b.node(tk, E, Act::RevokePromise, NodeKind::EventBasedGateway,
                      "Revocation gateway " + tk.name);
    b.flow(init_e_, erg);
    auto e_trp = b.node(tk, E, Act::RevokePromise, NodeKind::MessageCatchEvent,
                        label(Act::RevokePromise, tk) + " triggered");
    auto e_trd = b.node(tk, E, Act::RevokeDeclare, NodeKind::MessageCatchEvent,
                        label(Act::RevokeDeclare, tk) + " triggered");
    auto e_crr = b.node(tk, E, Act::RevokeRequest, NodeKind::MessageCatchEvent,
                        label(Act::RevokeRequest, tk) + " received");
    auto e_cra = b.node(tk, E, Act::RevokeAccept, NodeKind::MessageCatchEvent,
                        label(Act::RevokeAccept, tk) + " received");
    for (const auto& c : {e_trp, e_trd, e_crr, e_cra}) b.flow(erg, c);

    // Triggering side: send the revocation, wait for the decision.
    struct Trigger {
      std::string allow, refuse;
    };
    auto trigger = [&](Role r, Act rev, const std::string& trigger_catch,
                       const std::string& listener) -> Trigger {
      auto send = b.node(tk, r, rev, NodeKind::SendTask, label(rev, tk));
      auto wait = b.node(tk, r, rev, NodeKind::EventBasedGateway, "Await decision on " + label(rev, tk));
      auto allow = b.node(tk, r, Act::Allow, NodeKind::MessageCatchEvent,
                          label(Act::Allow, tk) + " " + std::string(act_label(rev)) + " received");
      auto refuse = b.node(tk, r, Act::Refuse, NodeKind::MessageCatchEvent,
                           label(Act::Refuse, tk) + " " + std::string(act_label(rev)) + " received");
      b.flow(trigger_catch, send);
      b.flow(send, wait);
      b.flow(wait, allow);
      b.flow(wait, refuse);
      b.flow(refuse, listener);
      revoke_send_[rev] = send;
      return {allow, refuse};
    };
    // Deciding side: allow only when the target was performed.
    struct Decider {
      std::string allow_branch_head, allow_send, refuse_send;
    };
    auto decider = [&](Role r, Act rev, const std::string& catch_node,
                       const std::string& listener) -> Decider {
      auto x = b.node(tk, r, rev, NodeKind::ExclusiveGateway, "Allow " + label(rev, tk) + "?");
      auto refuse = b.node(tk, r, Act::Refuse, NodeKind::SendTask,
                           label(Act::Refuse, tk) + " " + std::string(act_label(rev)));
      b.flow(catch_node, x);
      b.flow(x, refuse);
      b.flow(refuse, listener);
      return {x, {}, refuse};
    };
    auto allow_send = [&](Role r, Act rev) {
      return b.node(tk, r, Act::Allow, NodeKind::SendTask,
                    label(Act::Allow, tk) + " " + std::string(act_label(rev)));
    };
    auto resume = [&](Role r, Act rev, const std::string& from, const std::string& landing,
                      const std::string& listener) {
      auto split = b.node(tk, r, rev, NodeKind::ParallelGateway, "Resume " + tk.name);
      b.flow(from, split);
      b.flow(split, landing);
      b.flow(split, listener);
    };
    const std::string perf = "performed:";

    // Revoke request: initiator triggers, executor decides, both terminate.
    {
      auto t = trigger(I, Act::RevokeRequest, i_trr, irg);
      auto d = decider(E, Act::RevokeRequest, e_crr, erg);
      auto allow = allow_send(E, Act::RevokeRequest);
      b.flow(d.allow_branch_head, allow, perf + "Request");
      auto e_sync = b.node(tk, E, Act::RevokeRequest, NodeKind::MessageCatchEvent,
                           tk.name + " accept rolled back", true);
      b.flow(allow, e_sync);
      auto e_last = chain(e_sync, E, {Act::Declare, Act::Execute, Act::Promise});
      auto e_done = b.node(tk, E, Act::RevokeRequest, NodeKind::SendTask,
                           tk.name + " production rolled back", true);
      b.flow(e_last, e_done);
      auto e_term = b.node(tk, E, Act::RevokeRequest, NodeKind::TerminateEndEvent,
                           tk.name + " revoked");
      b.flow(e_done, e_term);

      auto i_last = chain(t.allow, I, {Act::Accept});
      auto i_sync = b.node(tk, I, Act::RevokeRequest, NodeKind::SendTask,
                           tk.name + " accept rolled back", true);
      b.flow(i_last, i_sync);
      auto i_done = b.node(tk, I, Act::RevokeRequest, NodeKind::MessageCatchEvent,
                           tk.name + " production rolled back", true);
      b.flow(i_sync, i_done);
      auto i_rest = chain(i_done, I, {Act::Request});
      auto i_term = b.node(tk, I, Act::RevokeRequest, NodeKind::TerminateEndEvent,
                           tk.name + " revoked");
      b.flow(i_rest, i_term);

      b.message(revoke_send_[Act::RevokeRequest], e_crr, Act::RevokeRequest);
      b.message(allow, t.allow, Act::Allow);
      b.message(d.refuse_send, t.refuse, Act::Refuse);
      b.message(i_sync, e_sync, Act::RevokeRequest);
      b.message(e_done, i_done, Act::RevokeRequest);
    }
    // Revoke accept: initiator triggers, executor decides; lands in rejection.
    {
      auto t = trigger(I, Act::RevokeAccept, i_tra, irg);
      auto d = decider(E, Act::RevokeAccept, e_cra, erg);
      auto allow = allow_send(E, Act::RevokeAccept);
      b.flow(d.allow_branch_head, allow, perf + "Accept");
      auto e_reentry = b.node(tk, E, Act::Reject, NodeKind::MessageCatchEvent,
                              label(Act::Reject, tk) + " after revocation", true);
      b.flow(allow, e_reentry);
      resume(E, Act::RevokeAccept, e_reentry, landing_.e_after_reject, erg);

      auto i_last = chain(t.allow, I, {Act::Accept});
      auto i_reentry = b.node(tk, I, Act::Reject, NodeKind::SendTask,
                              label(Act::Reject, tk) + " after revocation", true);
      b.flow(i_last, i_reentry);
      resume(I, Act::RevokeAccept, i_reentry, landing_.i_await_redeclare, irg);

      b.message(revoke_send_[Act::RevokeAccept], e_cra, Act::RevokeAccept);
      b.message(allow, t.allow, Act::Allow);
      b.message(d.refuse_send, t.refuse, Act::Refuse);
      b.message(i_reentry, e_reentry, Act::Reject);
    }
    // Revoke promise: executor triggers, initiator decides; lands in decline.
    {
      auto t = trigger(E, Act::RevokePromise, e_trp, erg);
      auto d = decider(I, Act::RevokePromise, i_crp, irg);
      auto i_last = chain(d.allow_branch_head, I, {Act::Accept});
      fix_condition(d.allow_branch_head, perf + "Promise");
      auto allow = allow_send(I, Act::RevokePromise);
      b.flow(i_last, allow);
      auto i_reentry = b.node(tk, I, Act::Decline, NodeKind::MessageCatchEvent,
                              label(Act::Decline, tk) + " after revocation", true);
      b.flow(allow, i_reentry);
      resume(I, Act::RevokePromise, i_reentry, landing_.i_request_again, irg);

      auto e_last = chain(t.allow, E, {Act::Declare, Act::Execute, Act::Promise});
      auto e_reentry = b.node(tk, E, Act::Decline, NodeKind::SendTask,
                              label(Act::Decline, tk) + " after revocation", true);
      b.flow(e_last, e_reentry);
      resume(E, Act::RevokePromise, e_reentry, landing_.e_await_rerequest, erg);

      b.message(revoke_send_[Act::RevokePromise], i_crp, Act::RevokePromise);
      b.message(allow, t.allow, Act::Allow);
      b.message(d.refuse_send, t.refuse, Act::Refuse);
      b.message(e_reentry, i_reentry, Act::Decline);
    }
    // Revoke declare: executor triggers, initiator decides; production resumes.
    {
      auto t = trigger(E, Act::RevokeDeclare, e_trd, erg);
      auto d = decider(I, Act::RevokeDeclare, i_crd, irg);
      auto i_last = chain(d.allow_branch_head, I, {Act::Accept});
      fix_condition(d.allow_branch_head, perf + "Declare");
      auto allow = allow_send(I, Act::RevokeDeclare);
      b.flow(i_last, allow);
      auto i_reentry = b.node(tk, I, Act::Promise, NodeKind::MessageCatchEvent,
                              label(Act::Promise, tk) + " after revocation", true);
      b.flow(allow, i_reentry);
      resume(I, Act::RevokeDeclare, i_reentry, landing_.i_await_declare, irg);

      auto e_last = chain(t.allow, E, {Act::Declare, Act::Execute});
      auto e_reentry = b.node(tk, E, Act::Promise, NodeKind::SendTask,
                              label(Act::Promise, tk) + " after revocation", true);
      b.flow(e_last, e_reentry);
      auto reexec = b.node(tk, E, Act::Execute, NodeKind::Task, label(Act::Execute, tk) + " again");
      resume(E, Act::RevokeDeclare, e_reentry, reexec, erg);
      b.flow(reexec, landing_.e_declare);

      b.message(revoke_send_[Act::RevokeDeclare], i_crd, Act::RevokeDeclare);
      b.message(allow, t.allow, Act::Allow);
      b.message(d.refuse_send, t.refuse, Act::Refuse);
      b.message(e_reentry, i_reentry, Act::Promise);
    }
  }

 private:
  // The first flow out of an allow-decision gateway carries the guard.
  void fix_condition(const std::string& gateway, std::string condition) {
    pending_conditions_.emplace_back(gateway, std::move(condition));
  }

 public:
  std::vector<std::pair<std::string, std::string>> pending_conditions_;

 private:
  ModelBuilder& b_;
  const TransactionKind& tk_;
  bool root_;
  Landing landing_;
  std::string init_i_, init_e_;
  std::string i_request_, i_request2_, i_catch_promise_, i_catch_declare_, i_catch_declare2_,
      i_catch_decline_, i_stop_, i_catch_stop_, i_reject_, i_accept_;
  std::string e_start_, e_promise_, e_declare_, e_declare2_, e_catch_accept_, e_catch_reject_,
      e_decline_, e_catch_request2_, e_catch_stop_, e_stop_;
  std::map<Act, std::string> revoke_send_;
};

}  // namespace

BpmnModel compile(const TransactionNetwork& net, DetailLevel level, const CompileOptions& options) {
  ValidationOptions vo;
  vo.allow_composition_breach = options.allow_composition_breach;
  auto violations = validate_network(net, vo);
  if (net.transactions.empty() || has_errors(violations)) {
    std::string msg = "network is not valid:";
    for (const auto& v : violations)
      if (v.severity == Severity::Error) msg += " " + std::string(to_string(v.rule));
    if (net.transactions.empty()) msg += " (no transactions)";
    throw Error(ErrorCode::ValidationFailed, msg);
  }

  ModelBuilder b(net, level);
  std::map<std::string, InitiatorSide> initiators;
  std::map<std::string, ExecutorSide> executors;
  std::vector<std::pair<std::string, std::string>> guarded;

  for (const auto& id : execution_order(net)) {
    const auto& tk = *net.find_transaction(id);
    TransactionCompiler tc(b, tk, net.parent_of(id) == nullptr);
    initiators[id] = tc.initiator();
    executors[id] = tc.executor();
    tc.messages();
    if (level == DetailLevel::Complete) tc.revocations();
    guarded.insert(guarded.end(), tc.pending_conditions_.begin(), tc.pending_conditions_.end());
  }

  // Weave children into their parent's executor flow.
  for (const auto& id : execution_order(net)) {
    const auto& tk = *net.find_transaction(id);
    const auto& ex = executors[id];
    auto children = net.children_of(id);
    auto of_kind = [&](DependencyKind k) {
      std::vector<std::string> out;
      for (const auto& d : children)
        if (d.kind == k) out.push_back(d.child);
      return out;
    };
    auto weave_sync = [&](const std::string& from, const std::string& to, Act at,
                          const std::vector<std::string>& kids) {
      if (kids.empty()) {
        b.flow(from, to);
      } else if (kids.size() == 1) {
        b.flow(from, initiators[kids[0]].entry);
        b.flow(initiators[kids[0]].exit, to);
      } else {
        auto split = b.node(tk, Role::Executor, at, NodeKind::ParallelGateway,
                            "Request dependent transactions of " + tk.name);
        auto join = b.node(tk, Role::Executor, at, NodeKind::ParallelGateway,
                           "Dependent transactions of " + tk.name + " accepted");
        b.flow(from, split);
        for (const auto& k : kids) {
          b.flow(split, initiators[k].entry);
          b.flow(initiators[k].exit, join);
        }
        b.flow(join, to);
      }
    };
    weave_sync(ex.promise, ex.execute, Act::Promise, of_kind(DependencyKind::RaP));
    weave_sync(ex.execute, ex.declare, Act::Execute, of_kind(DependencyKind::RaE));
    auto async_kids = of_kind(DependencyKind::RaD);
    if (async_kids.empty()) {
      b.flow(ex.declare, ex.await_accept);
    } else {
      auto split = b.node(tk, Role::Executor, Act::Declare, NodeKind::ParallelGateway,
                          "Request dependent transactions of " + tk.name);
      b.flow(ex.declare, split);
      b.flow(split, ex.await_accept);
      // the accept wait has other incoming flows, so keep its split binary
      auto fan = split;
      if (async_kids.size() > 1) {
        fan = b.node(tk, Role::Executor, Act::Declare, NodeKind::ParallelGateway,
                     "Dependent transactions of " + tk.name);
        b.flow(split, fan);
      }
      for (const auto& k : async_kids) {
        const auto& child = *net.find_transaction(k);
        auto end = b.node(child, Role::Initiator, Act::Accept, NodeKind::EndEvent,
                          child.name + " accepted");
        b.flow(fan, initiators[k].entry);
        b.flow(initiators[k].exit, end);
      }
    }
  }

  auto model = b.finish(options.model_id);
  // Allow branches of initiator-side deciders are created before their guard
  // is known; stamp the guard onto the gateway's compensation-side flow.
  for (const auto& [gateway, condition] : guarded) {
    for (auto& pool : model.pools)
      for (auto& f : pool.flows)
        if (f.source == gateway) {
          const auto* target = model.find_node(f.target);
          if (target && target->kind == NodeKind::CompensationThrowEvent) f.condition = condition;
        }
  }
  return model;
}

}  // namespace psibpmn
