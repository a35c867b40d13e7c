#pragma once

// Token play over compiled collaborations and bounded conformance against
// the transaction-pattern oracle.
//
// Messages are exchanged by rendezvous: a send fires only when its receiver
// is waiting, and the send and the catch happen in one step.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "psibpmn/bpmn.hpp"
#include "psibpmn/network.hpp"
#include "psibpmn/psi.hpp"

namespace psibpmn {

enum class Outcome { Accepted, Stopped, Terminated, BoundExhausted, Deadlock };

std::string_view to_string(Outcome outcome);

struct TraceEvent {
  std::string transaction;
  Act act = Act::Request;
  bool undo = false;  // a compensation of `act`

  auto operator<=>(const TraceEvent&) const = default;
};

struct Trace {
  std::vector<TraceEvent> events;
  Outcome outcome = Outcome::Deadlock;

  auto operator<=>(const Trace&) const = default;
};

using TraceSet = std::set<Trace>;

/// Facts the simulator keeps per transaction.
struct TxWorld {
  std::uint8_t history = 0;  // length of the performed prefix of the core acts
  bool stopped = false;
  bool terminated = false;
  bool revoking = false;  // a self-triggered revocation awaits its decision
  std::uint8_t rerequest = 0;
  std::uint8_t redeclare = 0;
  std::uint8_t revocations = 0;

  auto operator<=>(const TxWorld&) const = default;
};

struct InstanceState {
  /// Per node in Simulator node order, then one slot per incoming flow of
  /// each parallel join.
  std::vector<std::uint8_t> tokens;
  std::vector<TxWorld> world;        // per transaction

  auto operator<=>(const InstanceState&) const = default;
  std::string key() const;
};

struct Step {
  enum class Kind { Fire, Deliver, Branch };
  Kind kind = Kind::Fire;
  int node = -1;    // firing node; the sender for Deliver
  int target = -1;  // Deliver: receiving node
  int via = -1;     // event-based gateway whose token a catch consumes
  int flow = -1;    // Branch: chosen sequence flow

  auto operator<=>(const Step&) const = default;
};

class Simulator {
 public:
  explicit Simulator(BpmnModel model, LoopBounds bounds = {});

  InstanceState initial_state() const;
  std::vector<Step> enabled_steps(const InstanceState& state) const;
  /// Fires one step; act events it performs are appended to `events`.
  InstanceState apply(const InstanceState& state, const Step& step,
                      std::vector<TraceEvent>* events = nullptr) const;
  /// Classification of a state with no enabled step.
  Outcome outcome(const InstanceState& state) const;
  std::string describe(const Step& step) const;

  const BpmnModel& model() const { return model_; }
  const std::vector<std::string>& transactions() const { return txs_; }
  const LoopBounds& bounds() const { return bounds_; }

 private:
  enum class Guard { None, ReRequest, ReDeclare, Performed };
  struct NodeInfo {
    const FlowNode* node = nullptr;
    int pool = -1;
    int tx = -1;
    std::vector<int> out;  // sequence flow indices
    int in_degree = 0;
    std::vector<int> slots;  // parallel join: token slot per incoming flow
    std::vector<int> msg_targets;
    std::vector<int> ebg_preds;
    bool has_msg_in = false;
    bool scope = false;  // revocation scope
    bool trigger = false;
    bool listener = false;
    bool emits = false;
  };
  struct FlowInfo {
    int source = -1;
    int target = -1;
    Guard guard = Guard::None;
    Act performed = Act::Request;
    int slot = -1;  // token slot when the target is a parallel join
  };

  bool ready(const InstanceState& s, int catch_node) const;
  bool blocked(const InstanceState& s, int node) const;
  bool trigger_ok(const InstanceState& s, int tx) const;
  bool guard_ok(const InstanceState& s, int tx, const FlowInfo& f) const;
  void effects(InstanceState& s, int node, std::vector<TraceEvent>* events) const;
  void produce(InstanceState& s, int node, int only_flow = -1) const;
  void arrive(InstanceState& s, int flow) const;

  BpmnModel model_;
  LoopBounds bounds_;
  std::vector<NodeInfo> nodes_;
  std::vector<FlowInfo> flows_;
  std::vector<int> owner_;  // token slot -> node
  std::vector<std::string> txs_;
};

enum class ExploreMode { Exhaustive, Random };

struct ExploreOptions {
  ExploreMode mode = ExploreMode::Exhaustive;
  LoopBounds bounds;
  std::size_t max_states = 1'000'000;
  /// Exhaustive: build the state graph level by level on all threads.
  /// Off selects the serial depth-first reference.
  bool parallel = true;
  std::uint64_t seed = 0;
  std::size_t runs = 100;
  std::size_t max_steps = 10'000;
};

struct ExploreStats {
  std::size_t states = 0;
  std::size_t transitions = 0;
};

/// Throws Error{StateSpaceLimitExceeded}.
TraceSet explore(const BpmnModel& model, const ExploreOptions& options = {},
                 ExploreStats* stats = nullptr);

void write_traces_jsonl(std::ostream& out, const TraceSet& traces);

using Language = std::set<std::vector<Act>>;

/// Act sequences per transaction, compensations dropped. Transactions that
/// never start in a trace contribute nothing for it.
std::map<std::string, Language> project(const TraceSet& traces);

struct TransactionVerdict {
  std::string transaction;
  Language missing;   // oracle only
  Language spurious;  // model only
};

struct Verdict {
  bool conformant = true;
  std::vector<TransactionVerdict> transactions;
  ExploreStats stats;
};

Verdict check_conformance(const BpmnModel& model, DetailLevel level, const LoopBounds& bounds,
                          std::size_t max_states = 1'000'000);
/// Compiles the network and checks the result.
Verdict check_conformance(const TransactionNetwork& net, DetailLevel level,
                          const LoopBounds& bounds, std::size_t max_states = 1'000'000);

}  // namespace psibpmn
