#include "psibpmn/psi.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <tuple>

#include "psibpmn/error.hpp"

namespace psibpmn {

std::string_view to_string(Act act) {
  switch (act) {
    case Act::Request: return "Request";
    case Act::Promise: return "Promise";
    case Act::Execute: return "Execute";
    case Act::Declare: return "Declare";
    case Act::Accept: return "Accept";
    case Act::Decline: return "Decline";
    case Act::Reject: return "Reject";
    case Act::RevokeRequest: return "RevokeRequest";
    case Act::RevokePromise: return "RevokePromise";
    case Act::RevokeDeclare: return "RevokeDeclare";
    case Act::RevokeAccept: return "RevokeAccept";
    case Act::Allow: return "Allow";
    case Act::Refuse: return "Refuse";
    case Act::Stop: return "Stop";
  }
  return "?";
}

std::string_view act_label(Act act) {
  switch (act) {
    case Act::RevokeRequest: return "Revoke Request";
    case Act::RevokePromise: return "Revoke Promise";
    case Act::RevokeDeclare: return "Revoke Declare";
    case Act::RevokeAccept: return "Revoke Accept";
    default: return to_string(act);
  }
}

std::optional<Act> parse_act(std::string_view text) {
  for (Act a : kAllActs) {
    if (text == to_string(a) || text == act_label(a)) return a;
    // case-insensitive, spaces ignored ("revoke request", "REQUEST")
    std::string canon, want;
    for (char c : text)
      if (c != ' ' && c != '_') canon.push_back(static_cast<char>(std::tolower(c)));
    for (char c : to_string(a)) want.push_back(static_cast<char>(std::tolower(c)));
    if (canon == want) return a;
  }
  return std::nullopt;
}

std::string_view to_string(Role role) {
  return role == Role::Initiator ? "Initiator" : "Executor";
}

Role counterparty(Role role) {
  return role == Role::Initiator ? Role::Executor : Role::Initiator;
}

bool is_core_act(Act act) {
  return std::find(kCoreActs.begin(), kCoreActs.end(), act) != kCoreActs.end();
}

bool is_revocation(Act act) {
  return act == Act::RevokeRequest || act == Act::RevokePromise || act == Act::RevokeDeclare ||
         act == Act::RevokeAccept;
}

std::size_t core_index(Act act) {
  auto it = std::find(kCoreActs.begin(), kCoreActs.end(), act);
  return static_cast<std::size_t>(it - kCoreActs.begin());
}

Role revoker_of(Act revocation) {
  return (revocation == Act::RevokeRequest || revocation == Act::RevokeAccept) ? Role::Initiator
                                                                                : Role::Executor;
}

Act revocation_target(Act revocation) {
  switch (revocation) {
    case Act::RevokeRequest: return Act::Request;
    case Act::RevokePromise: return Act::Promise;
    case Act::RevokeDeclare: return Act::Declare;
    case Act::RevokeAccept: return Act::Accept;
    default: throw Error(ErrorCode::NotEnabled, std::string(to_string(revocation)) + " is not a revocation");
  }
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Initial: return "Initial";
    case Phase::Requested: return "Requested";
    case Phase::Promised: return "Promised";
    case Phase::Executed: return "Executed";
    case Phase::Declared: return "Declared";
    case Phase::Accepted: return "Accepted";
    case Phase::Rejected: return "Rejected";
    case Phase::Declined: return "Declined";
    case Phase::Stopped: return "Stopped";
    case Phase::Terminated: return "Terminated";
  }
  return "?";
}

bool TransactionState::performed(Act core) const {
  return std::find(history.begin(), history.end(), core) != history.end();
}

std::string to_string(const RollbackChain& chain) {
  std::string out;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i) out += ", ";
    out += to_string(chain[i]);
    out += "⁻¹";
  }
  return out;
}

namespace {

bool revocable_phase(Phase p) {
  return p != Phase::Initial && p != Phase::Stopped && p != Phase::Terminated;
}

// Where an allowed revocation repositions the transaction.
Phase landing_phase(Act revocation) {
  switch (revocation) {
    case Act::RevokeAccept: return Phase::Rejected;
    case Act::RevokeDeclare: return Phase::Promised;
    case Act::RevokePromise: return Phase::Declined;
    default: return Phase::Terminated;
  }
}

// First history position undone by an allowed revocation. Revoking a
// declaration also undoes the execution it reported.
std::size_t rollback_cut(Act revocation) {
  switch (revocation) {
    case Act::RevokeAccept: return 4;
    case Act::RevokeDeclare: return 2;
    case Act::RevokePromise: return 1;
    default: return 0;
  }
}

}  // namespace

std::set<Act> allowed_acts(const TransactionState& s, Role role) {
  if (s.pending) {
    if (role == counterparty(s.pending->by)) return {Act::Allow, Act::Refuse};
    return {};
  }
  std::set<Act> out;
  const bool ini = role == Role::Initiator;
  switch (s.phase) {
    case Phase::Initial:
      if (ini) out.insert(Act::Request);
      return out;  // nothing performed yet, nothing to revoke
    case Phase::Requested:
      if (!ini) out.insert({Act::Promise, Act::Decline});
      break;
    case Phase::Promised:
      if (!ini) out.insert(Act::Execute);
      break;
    case Phase::Executed:
      if (!ini) out.insert(Act::Declare);
      break;
    case Phase::Declared:
      if (ini) out.insert({Act::Accept, Act::Reject});
      break;
    case Phase::Rejected:
      if (!ini) out.insert({Act::Declare, Act::Stop});
      break;
    case Phase::Declined:
      if (ini) out.insert({Act::Request, Act::Stop});
      break;
    case Phase::Accepted:
    case Phase::Stopped:
    case Phase::Terminated:
      break;
  }
  if (revocable_phase(s.phase)) {
    if (ini)
      out.insert({Act::RevokeRequest, Act::RevokeAccept});
    else
      out.insert({Act::RevokePromise, Act::RevokeDeclare});
  }
  return out;
}

std::set<Act> effective_acts(const TransactionState& s, Role role) {
  auto out = allowed_acts(s, role);
  if (s.pending) {
    if (!s.performed(revocation_target(s.pending->act))) out.erase(Act::Allow);
    return out;
  }
  std::erase_if(out, [&](Act a) { return is_revocation(a) && !s.performed(revocation_target(a)); });
  return out;
}

RollbackChain rollback_chain(const TransactionState& s, Act revocation) {
  Act target = revocation_target(revocation);
  if (!s.performed(target))
    throw Error(ErrorCode::TargetNotPerformed,
                std::string(to_string(revocation)) + ": " + std::string(to_string(target)) +
                    " has not been performed");
  const std::size_t cut = rollback_cut(revocation);
  RollbackChain chain;
  for (std::size_t i = s.history.size(); i > cut; --i) chain.push_back(s.history[i - 1]);
  return chain;
}

Resolution resolve_revocation(const TransactionState& s, Act revocation, Role by,
                              Decision decision) {
  if (!s.pending || s.pending->act != revocation)
    throw Error(ErrorCode::NoPendingRevocation,
                std::string(to_string(revocation)) + " is not pending");
  if (by != counterparty(s.pending->by))
    throw Error(ErrorCode::WrongDecider, std::string(to_string(by)) + " triggered " +
                                             std::string(to_string(revocation)) +
                                             " and cannot decide it");
  TransactionState next = s;
  next.pending.reset();
  if (!s.performed(revocation_target(revocation)))
    return {std::move(next), ResolutionOutcome::AutoRefused, {}};
  if (decision == Decision::Refuse) return {std::move(next), ResolutionOutcome::Refused, {}};

  auto chain = rollback_chain(s, revocation);
  next.history.resize(next.history.size() - chain.size());
  next.phase = landing_phase(revocation);
  return {std::move(next), ResolutionOutcome::Allowed, std::move(chain)};
}

TransactionState apply_act(const TransactionState& s, Act act, Role role) {
  if (!allowed_acts(s, role).count(act))
    throw Error(ErrorCode::NotEnabled, std::string(to_string(act)) + " by " +
                                           std::string(to_string(role)) + " in phase " +
                                           std::string(to_string(s.phase)));
  if (act == Act::Allow || act == Act::Refuse)
    return resolve_revocation(s, s.pending->act, role,
                              act == Act::Allow ? Decision::Allow : Decision::Refuse)
        .state;

  TransactionState next = s;
  if (is_revocation(act)) {
    next.pending = PendingRevocation{act, role};
    return next;
  }
  auto push = [&](Act a) {
    if (!next.performed(a)) next.history.push_back(a);
  };
  switch (act) {
    case Act::Request:
      push(Act::Request);
      next.phase = Phase::Requested;
      break;
    case Act::Promise:
      push(Act::Promise);
      next.phase = Phase::Promised;
      break;
    case Act::Decline: next.phase = Phase::Declined; break;
    case Act::Execute:
      push(Act::Execute);
      next.phase = Phase::Executed;
      break;
    case Act::Declare:
      push(Act::Declare);
      next.phase = Phase::Declared;
      break;
    case Act::Accept:
      push(Act::Accept);
      next.phase = Phase::Accepted;
      break;
    case Act::Reject: next.phase = Phase::Rejected; break;
    case Act::Stop: next.phase = Phase::Stopped; break;
    default: break;
  }
  return next;
}

std::optional<Role> infer_role(const TransactionState& s, Act act) {
  switch (act) {
    case Act::Request:
    case Act::Accept:
    case Act::Reject:
    case Act::RevokeRequest:
    case Act::RevokeAccept: return Role::Initiator;
    case Act::Promise:
    case Act::Execute:
    case Act::Declare:
    case Act::Decline:
    case Act::RevokePromise:
    case Act::RevokeDeclare: return Role::Executor;
    case Act::Stop:
      if (s.phase == Phase::Declined) return Role::Initiator;
      if (s.phase == Phase::Rejected) return Role::Executor;
      return std::nullopt;
    case Act::Allow:
    case Act::Refuse:
      if (s.pending) return counterparty(s.pending->by);
      return std::nullopt;
  }
  return std::nullopt;
}

TraceError::TraceError(std::size_t step, const Error& cause)
    : Error(cause.code(), "step " + std::to_string(step) + ": " + cause.what()), step_(step) {}

TransactionState run_trace(const std::vector<TraceStep>& steps, TransactionState state) {
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& step = steps[i];
    try {
      auto role = step.role ? step.role : infer_role(state, step.act);
      if (!role)
        throw Error(ErrorCode::NotEnabled, std::string(to_string(step.act)) + " in phase " +
                                               std::string(to_string(state.phase)));
      state = apply_act(state, step.act, *role);
      if (step.decision && is_revocation(step.act))
        state = resolve_revocation(state, step.act, counterparty(*role), *step.decision).state;
    } catch (const Error& e) {
      throw TraceError(i, e);
    }
  }
  return state;
}

TransactionState run_trace(const std::vector<Act>& acts, TransactionState start) {
  std::vector<TraceStep> steps;
  steps.reserve(acts.size());
  for (Act a : acts) steps.push_back(TraceStep{a, std::nullopt, std::nullopt});
  return run_trace(steps, std::move(start));
}

namespace {

struct LanguageState {
  TransactionState tx;
  int rerequest = 0;
  int redeclare = 0;
  int revocations = 0;

  auto operator<=>(const LanguageState&) const = default;
};

class LanguageEnumerator {
 public:
  LanguageEnumerator(DetailLevel level, const LoopBounds& bounds) : level_(level), bounds_(bounds) {}

  const std::set<std::vector<Act>>& suffixes(const LanguageState& s) {
    if (auto it = memo_.find(s); it != memo_.end()) return it->second;
    std::set<std::vector<Act>> out;
    bool any = false;
    for (Role role : {Role::Initiator, Role::Executor}) {
      for (Act act : enabled(s, role)) {
        any = true;
        LanguageState next = s;
        if (act == Act::Request && s.tx.phase == Phase::Declined) ++next.rerequest;
        if (act == Act::Declare && s.tx.phase == Phase::Rejected) ++next.redeclare;
        if (is_revocation(act)) ++next.revocations;
        next.tx = apply_act(s.tx, act, role);
        for (const auto& tail : suffixes(next)) {
          std::vector<Act> seq{act};
          seq.insert(seq.end(), tail.begin(), tail.end());
          out.insert(std::move(seq));
        }
      }
    }
    if (!any) out.insert(std::vector<Act>{});
    return memo_.emplace(s, std::move(out)).first->second;
  }

 private:
  std::vector<Act> enabled(const LanguageState& s, Role role) const {
    std::vector<Act> out;
    for (Act a : allowed_acts(s.tx, role)) {
      switch (a) {
        case Act::Request:
          if (s.tx.phase == Phase::Declined && s.rerequest >= bounds_.rerequest) continue;
          break;
        case Act::Declare:
          if (s.tx.phase == Phase::Rejected && s.redeclare >= bounds_.redeclare) continue;
          break;
        case Act::Decline:
        case Act::Reject:
        case Act::Stop:
          if (level_ == DetailLevel::HappyFlow) continue;
          break;
        case Act::RevokeRequest:
        case Act::RevokePromise:
        case Act::RevokeDeclare:
        case Act::RevokeAccept:
          if (level_ != DetailLevel::Complete || s.revocations >= bounds_.revocations) continue;
          break;
        case Act::Allow:
          if (!s.tx.performed(revocation_target(s.tx.pending->act))) continue;
          break;
        default: break;
      }
      out.push_back(a);
    }
    return out;
  }

  DetailLevel level_;
  LoopBounds bounds_;
  std::map<LanguageState, std::set<std::vector<Act>>> memo_;
};

}  // namespace

std::set<std::vector<Act>> bounded_language(DetailLevel level, const LoopBounds& bounds) {
  LanguageEnumerator e(level, bounds);
  return e.suffixes(LanguageState{});
}

}  // namespace psibpmn
