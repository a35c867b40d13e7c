#include <random>

#include "doctest.h"
#include "psibpmn/error.hpp"
#include "psibpmn/psi.hpp"

using namespace psibpmn;

namespace {

const std::vector<Act> kHappy = {Act::Request, Act::Promise, Act::Execute, Act::Declare,
                                 Act::Accept};

TransactionState after(const std::vector<Act>& acts) { return run_trace(acts); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

std::set<Act> without_revocations(std::set<Act> acts) {
  std::erase_if(acts, [](Act a) { return is_revocation(a); });
  return acts;
}

}  // namespace

TEST_CASE("allowed acts") {
  CHECK(allowed_acts(TransactionState{}, Role::Initiator) == std::set<Act>{Act::Request});
  CHECK(allowed_acts(TransactionState{}, Role::Executor).empty());

  auto requested = after({Act::Request});
  CHECK(allowed_acts(requested, Role::Executor) ==
        std::set<Act>{Act::Promise, Act::Decline, Act::RevokePromise, Act::RevokeDeclare});
  CHECK(effective_acts(requested, Role::Executor) == std::set<Act>{Act::Promise, Act::Decline});

  auto rejected = after({Act::Request, Act::Promise, Act::Execute, Act::Declare, Act::Reject});
  CHECK(without_revocations(allowed_acts(rejected, Role::Executor)) ==
        std::set<Act>{Act::Declare, Act::Stop});

  auto pending = apply_act(after(kHappy), Act::RevokeAccept, Role::Initiator);
  CHECK(allowed_acts(pending, Role::Executor) == std::set<Act>{Act::Allow, Act::Refuse});
  CHECK(allowed_acts(pending, Role::Initiator).empty());
}

TEST_CASE("apply act") {
  auto s = apply_act(TransactionState{}, Act::Request, Role::Initiator);
  CHECK(s.phase == Phase::Requested);
  CHECK(s.history == std::vector<Act>{Act::Request});

  CHECK(code_of([] { apply_act(TransactionState{}, Act::Promise, Role::Executor); }) ==
        ErrorCode::NotEnabled);

  auto declared = after({Act::Request, Act::Promise, Act::Execute, Act::Declare});
  auto rejected = apply_act(declared, Act::Reject, Role::Initiator);
  CHECK(rejected.phase == Phase::Rejected);
  CHECK(rejected.history == declared.history);

  auto redeclared = apply_act(rejected, Act::Declare, Role::Executor);
  CHECK(redeclared.phase == Phase::Declared);
  CHECK(redeclared.history == declared.history);
}

TEST_CASE("rollback chains") {
  auto accepted = after(kHappy);
  CHECK(rollback_chain(accepted, Act::RevokeDeclare) ==
        RollbackChain{Act::Accept, Act::Declare, Act::Execute});
  CHECK(to_string(rollback_chain(accepted, Act::RevokeDeclare)) == "Accept⁻¹, Declare⁻¹, Execute⁻¹");

  auto declared = after({Act::Request, Act::Promise, Act::Execute, Act::Declare});
  CHECK(rollback_chain(declared, Act::RevokeDeclare) == RollbackChain{Act::Declare, Act::Execute});
  CHECK(rollback_chain(accepted, Act::RevokeAccept) == RollbackChain{Act::Accept});
  CHECK(rollback_chain(accepted, Act::RevokePromise) ==
        RollbackChain{Act::Accept, Act::Declare, Act::Execute, Act::Promise});
  CHECK(rollback_chain(accepted, Act::RevokeRequest) ==
        RollbackChain{Act::Accept, Act::Declare, Act::Execute, Act::Promise, Act::Request});

  CHECK(code_of([] { rollback_chain(after({Act::Request}), Act::RevokeAccept); }) ==
        ErrorCode::TargetNotPerformed);
}

TEST_CASE("revocation resolution") {
  auto accepted = after(kHappy);
  SUBCASE("allowed revoke accept lands in Rejected") {
    auto p = apply_act(accepted, Act::RevokeAccept, Role::Initiator);
    auto r = resolve_revocation(p, Act::RevokeAccept, Role::Executor, Decision::Allow);
    CHECK(r.outcome == ResolutionOutcome::Allowed);
    CHECK(r.state.phase == Phase::Rejected);
    CHECK(r.state.history ==
          std::vector<Act>{Act::Request, Act::Promise, Act::Execute, Act::Declare});
    CHECK(r.undone == RollbackChain{Act::Accept});
  }
  SUBCASE("allowed revoke request terminates with empty history") {
    auto p = apply_act(accepted, Act::RevokeRequest, Role::Initiator);
    auto r = resolve_revocation(p, Act::RevokeRequest, Role::Executor, Decision::Allow);
    CHECK(r.state.phase == Phase::Terminated);
    CHECK(r.state.history.empty());
  }
  SUBCASE("revoking an unperformed act is refused automatically") {
    auto promised = after({Act::Request, Act::Promise});
    auto p = apply_act(promised, Act::RevokeAccept, Role::Initiator);
    auto r = resolve_revocation(p, Act::RevokeAccept, Role::Executor, Decision::Allow);
    CHECK(r.outcome == ResolutionOutcome::AutoRefused);
    CHECK(r.state == promised);
  }
  SUBCASE("refuse leaves the state as it was") {
    auto p = apply_act(accepted, Act::RevokeDeclare, Role::Executor);
    auto r = resolve_revocation(p, Act::RevokeDeclare, Role::Initiator, Decision::Refuse);
    CHECK(r.outcome == ResolutionOutcome::Refused);
    CHECK(r.state == accepted);
  }
  SUBCASE("errors") {
    CHECK(code_of([&] {
            resolve_revocation(accepted, Act::RevokeAccept, Role::Executor, Decision::Allow);
          }) == ErrorCode::NoPendingRevocation);
    auto p = apply_act(accepted, Act::RevokeAccept, Role::Initiator);
    CHECK(code_of([&] {
            resolve_revocation(p, Act::RevokeAccept, Role::Initiator, Decision::Allow);
          }) == ErrorCode::WrongDecider);
    CHECK(code_of([&] { apply_act(p, Act::RevokePromise, Role::Executor); }) ==
          ErrorCode::NotEnabled);
  }
}

TEST_CASE("landing phases of allowed revocations") {
  const std::pair<Act, Phase> cases[] = {{Act::RevokeAccept, Phase::Rejected},
                                         {Act::RevokeDeclare, Phase::Promised},
                                         {Act::RevokePromise, Phase::Declined},
                                         {Act::RevokeRequest, Phase::Terminated}};
  for (auto [rev, phase] : cases) {
    auto s = run_trace(std::vector<TraceStep>{{Act::Request}, {Act::Promise}, {Act::Execute},
                                              {Act::Declare}, {Act::Accept},
                                              {rev, std::nullopt, Decision::Allow}});
    CHECK(s.phase == phase);
  }
}

TEST_CASE("run trace") {
  CHECK(run_trace(kHappy).phase == Phase::Accepted);
  CHECK(run_trace({Act::Request, Act::Decline, Act::Request, Act::Promise, Act::Execute,
                   Act::Declare, Act::Accept})
            .phase == Phase::Accepted);
  CHECK(run_trace({Act::Request, Act::Promise, Act::Execute, Act::Declare, Act::Reject, Act::Stop})
            .phase == Phase::Stopped);
  CHECK(run_trace({Act::Request, Act::Promise, Act::Execute, Act::Declare, Act::Accept,
                   Act::RevokeDeclare, Act::Allow, Act::Execute, Act::Declare, Act::Accept})
            .phase == Phase::Accepted);
  try {
    run_trace({Act::Request, Act::Promise, Act::Declare});
    FAIL("expected a trace error");
  } catch (const TraceError& e) {
    CHECK(e.step() == 2);
    CHECK(e.code() == ErrorCode::NotEnabled);
  }
}

TEST_CASE("random walks agree with allowed_acts") {
  std::mt19937 rng(2024);
  int walks = 0;
  for (; walks < 2000; ++walks) {
    TransactionState s;
    for (int step = 0; step < 40; ++step) {
      // every act from every role: apply succeeds iff allowed
      for (Role r : {Role::Initiator, Role::Executor})
        for (Act a : kAllActs) {
          bool allowed = allowed_acts(s, r).count(a) > 0;
          bool ok = true;
          try {
            auto next = apply_act(s, a, r);
            if (is_revocation(a) && !s.performed(revocation_target(a))) {
              auto res = resolve_revocation(next, a, counterparty(r), Decision::Allow);
              CHECK(res.outcome == ResolutionOutcome::AutoRefused);
              CHECK(res.state.phase == s.phase);
              CHECK(res.state.history == s.history);
            }
          } catch (const Error&) {
            ok = false;
          }
          CHECK(ok == allowed);
        }
      std::vector<std::pair<Act, Role>> moves;
      for (Role r : {Role::Initiator, Role::Executor})
        for (Act a : allowed_acts(s, r)) moves.emplace_back(a, r);
      if (moves.empty()) break;
      auto [a, r] = moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(rng)];
      auto before = s;
      s = apply_act(s, a, r);
      // history stays a prefix of the happy flow
      REQUIRE(s.history.size() <= kHappy.size());
      CHECK(std::equal(s.history.begin(), s.history.end(), kHappy.begin()));
      if (s.phase == Phase::Accepted) CHECK(s.history == kHappy);
      if (s.phase == Phase::Initial) CHECK(s.history.empty());
      if (a == Act::Refuse) {
        CHECK(s.phase == before.phase);
        CHECK(s.history == before.history);
      }
      if (a == Act::Allow && before.performed(revocation_target(before.pending->act))) {
        auto chain = rollback_chain(before, before.pending->act);
        // contiguous inverse-chronological suffix
        for (std::size_t i = 0; i < chain.size(); ++i)
          CHECK(chain[i] == before.history[before.history.size() - 1 - i]);
        CHECK(s.history.size() + chain.size() == before.history.size());
      }
    }
  }
  CHECK(walks >= 1000);
}

TEST_CASE("bounded language") {
  auto happy = bounded_language(DetailLevel::HappyFlow, LoopBounds{});
  CHECK(happy == std::set<std::vector<Act>>{kHappy});
  auto dissent = bounded_language(DetailLevel::WithDissent, LoopBounds{});
  CHECK(dissent.size() == 10);
  for (const auto& seq : bounded_language(DetailLevel::Complete, LoopBounds{})) {
    auto s = run_trace(seq);
    CHECK((s.phase == Phase::Accepted || s.phase == Phase::Stopped ||
           s.phase == Phase::Terminated));
  }
}
