#pragma once

// Executable form of the complete DEMO transaction pattern. Every function
// here is a pure transition over value-typed states.

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "psibpmn/error.hpp"
#include "psibpmn/network.hpp"

namespace psibpmn {

enum class Act {
  Request,
  Promise,
  Execute,
  Declare,
  Accept,
  Decline,
  Reject,
  RevokeRequest,
  RevokePromise,
  RevokeDeclare,
  RevokeAccept,
  Allow,
  Refuse,
  Stop,
};

inline constexpr std::size_t kActCount = 14;
inline constexpr std::array<Act, kActCount> kAllActs = {
    Act::Request,       Act::Promise,       Act::Execute,       Act::Declare,      Act::Accept,
    Act::Decline,       Act::Reject,        Act::RevokeRequest, Act::RevokePromise,
    Act::RevokeDeclare, Act::RevokeAccept,  Act::Allow,         Act::Refuse,       Act::Stop};

/// The five acts of the happy flow, in the order they are performed.
inline constexpr std::array<Act, 5> kCoreActs = {Act::Request, Act::Promise, Act::Execute,
                                                 Act::Declare, Act::Accept};

enum class Role { Initiator, Executor };

std::string_view to_string(Act act);
/// Human label, e.g. "Revoke Request".
std::string_view act_label(Act act);
std::optional<Act> parse_act(std::string_view text);
std::string_view to_string(Role role);
Role counterparty(Role role);

bool is_core_act(Act act);
bool is_revocation(Act act);
/// Execute is the only production act.
inline bool is_production_act(Act act) { return act == Act::Execute; }
/// Position of a core act in the happy flow (Request = 0).
std::size_t core_index(Act act);
/// The role entitled to trigger a revocation.
Role revoker_of(Act revocation);
/// The act a revocation cancels.
Act revocation_target(Act revocation);

enum class Phase {
  Initial,
  Requested,
  Promised,
  Executed,
  Declared,
  Accepted,
  Rejected,
  Declined,
  Stopped,
  Terminated,
};

std::string_view to_string(Phase phase);

struct PendingRevocation {
  Act act;
  Role by;

  bool operator==(const PendingRevocation&) const = default;
  auto operator<=>(const PendingRevocation&) const = default;
};

struct TransactionState {
  Phase phase = Phase::Initial;
  /// Performed core acts not rolled back; always a prefix of kCoreActs.
  std::vector<Act> history;
  std::optional<PendingRevocation> pending;

  bool operator==(const TransactionState&) const = default;
  auto operator<=>(const TransactionState&) const = default;

  bool performed(Act core) const;
};

/// Acts to undo, most recent first.
using RollbackChain = std::vector<Act>;
std::string to_string(const RollbackChain& chain);  // "Accept⁻¹, Declare⁻¹"

/// Every act apply_act accepts from `role`, including revocations whose
/// target was never performed (those resolve to an automatic refusal).
std::set<Act> allowed_acts(const TransactionState& state, Role role);

/// allowed_acts without the revocations that can only be auto-refused and,
/// while such a revocation is pending, without Allow.
std::set<Act> effective_acts(const TransactionState& state, Role role);

/// Throws Error{NotEnabled}. Allow/Refuse resolve the pending revocation.
TransactionState apply_act(const TransactionState& state, Act act, Role role);

/// Throws Error{TargetNotPerformed} when the revoked act is not in history.
RollbackChain rollback_chain(const TransactionState& state, Act revocation);

enum class Decision { Allow, Refuse };
enum class ResolutionOutcome { Allowed, Refused, AutoRefused };

struct Resolution {
  TransactionState state;
  ResolutionOutcome outcome;
  RollbackChain undone;  // empty unless Allowed
};

/// Throws Error{NoPendingRevocation|WrongDecider}.
Resolution resolve_revocation(const TransactionState& state, Act revocation, Role by,
                              Decision decision);

/// A run_trace failure; carries the zero-based index of the failing step and
/// the code of the underlying error.
class TraceError : public Error {
 public:
  TraceError(std::size_t step, const Error& cause);
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

struct TraceStep {
  Act act;
  std::optional<Role> role;  // inferred when absent
  /// On a revocation step: resolve it immediately with this decision.
  std::optional<Decision> decision;
};

/// The role that performs `act` next from `state` (Stop and Allow/Refuse
/// depend on the state). Nullopt when no role can.
std::optional<Role> infer_role(const TransactionState& state, Act act);

/// Folds apply_act over the steps; throws TraceError on the first failure.
TransactionState run_trace(const std::vector<TraceStep>& steps,
                           TransactionState start = TransactionState{});
TransactionState run_trace(const std::vector<Act>& acts,
                           TransactionState start = TransactionState{});

struct LoopBounds {
  int rerequest = 1;
  int redeclare = 1;
  int revocations = 1;

  bool operator==(const LoopBounds&) const = default;
};

/// All maximal act sequences the pattern admits at `level` within `bounds`.
/// Revocations include auto-refused triggers, whose only resolution is Refuse.
std::set<std::vector<Act>> bounded_language(DetailLevel level, const LoopBounds& bounds);

}  // namespace psibpmn
