#include <set>

#include "doctest.h"
#include "psibpmn/compiler.hpp"
#include "psibpmn/error.hpp"
#include "support.hpp"

using namespace psibpmn;

namespace {

const DetailLevel kLevels[] = {DetailLevel::HappyFlow, DetailLevel::WithDissent,
                               DetailLevel::Complete};

std::set<std::string> actors_of(const TransactionNetwork& net) {
  std::set<std::string> out;
  for (const auto& t : net.transactions) {
    out.insert(t.initiator);
    out.insert(t.executor);
  }
  return out;
}

}  // namespace

TEST_CASE("single transaction, happy flow") {
  auto m = compile(testing::load_network("single.json"), DetailLevel::HappyFlow);
  REQUIRE(m.pools.size() == 2);
  CHECK(m.pools[0].actor == "A01");
  CHECK(m.pools[1].actor == "A02");
  CHECK(m.pools[0].nodes.size() == 6);
  CHECK(m.pools[1].nodes.size() == 6);
  CHECK(m.message_flows.size() == 4);
  CHECK(lint_model(m).empty());

  auto* req = m.find_node("tk01_i_request_sendtask");
  REQUIRE(req != nullptr);
  CHECK(req->kind == NodeKind::SendTask);
  REQUIRE(req->meta);
  CHECK(req->meta->transaction == "TK01");
  CHECK(req->meta->act == Act::Request);
  CHECK(req->meta->role == Role::Initiator);
  CHECK(m.find_node("tk01_e_request_messagestartevent")->kind == NodeKind::MessageStartEvent);
}

TEST_CASE("scheme node ids") {
  CHECK(scheme_node_id("TK01", Role::Executor, Act::RevokeAccept, NodeKind::MessageCatchEvent) ==
        "tk01_e_revokeaccept_messagecatchevent");
  CHECK(scheme_node_id("TK01", Role::Initiator, Act::Promise, NodeKind::SendTask, true) ==
        "tk01_i_promise_sendtask_re");

  auto tag = tag_from_node_id("tk03_e_declare_sendtask_2");
  REQUIRE(tag);
  CHECK(tag->transaction == "tk03");
  CHECK(tag->act == Act::Declare);
  CHECK(tag->role == Role::Executor);
  CHECK_FALSE(tag->reentry);
  auto re = tag_from_node_id("tk01_i_promise_messagecatchevent_re");
  REQUIRE(re);
  CHECK(re->reentry);
  CHECK_FALSE(tag_from_node_id("Task_0xyz"));
  CHECK_FALSE(tag_from_node_id("tk01_q_request_sendtask"));
}

TEST_CASE("element census") {
  auto net = testing::load_network("poc1.json");
  auto complete = element_census(compile(net, DetailLevel::Complete));
  CHECK(complete.size() == 56);
  for (const auto& [key, ids] : complete) CHECK_MESSAGE(!ids.empty(), key.first);

  auto happy = element_census(compile(net, DetailLevel::HappyFlow));
  CHECK(happy.size() == 20);
  for (const auto& [key, ids] : happy) {
    bool core = key.second == Act::Request || key.second == Act::Promise ||
                key.second == Act::Execute || key.second == Act::Declare ||
                key.second == Act::Accept;
    CHECK(core);
  }

  auto untagged = compile(net, DetailLevel::HappyFlow);
  for (auto& p : untagged.pools)
    for (auto& n : p.nodes) {
      n.meta.reset();
      n.id = "n" + std::to_string(&n - p.nodes.data()) + "_" + p.id;
    }
  CHECK(element_census(untagged).empty());
}

TEST_CASE("invalid networks do not compile") {
  try {
    compile(TransactionNetwork{}, DetailLevel::HappyFlow);
    FAIL("expected ValidationFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationFailed);
  }
  CHECK_THROWS_AS(compile(testing::load_network("cyclic.json"), DetailLevel::HappyFlow), Error);
}

TEST_CASE("composition breach is opt-in") {
  auto net = testing::load_network("poc1.json");
  const auto dep = net.dependencies.front();
  auto tx = [&](const std::string& id) -> TransactionKind& {
    for (auto& t : net.transactions)
      if (t.id == id) return t;
    FAIL("no transaction " << id);
    throw;
  };
  auto& child = tx(dep.child);
  const auto& parent = tx(dep.parent);
  // hand the child to an actor other than the parent executor
  for (const auto& a : net.actors)
    if (a.id != parent.executor && a.id != child.executor) {
      child.initiator = a.id;
      break;
    }
  CHECK_THROWS_AS(compile(net, DetailLevel::HappyFlow), Error);
  CompileOptions o;
  o.allow_composition_breach = true;
  CHECK_NOTHROW(compile(net, DetailLevel::HappyFlow, o));
}

TEST_CASE("structural properties") {
  for (const char* name : {"single.json", "poc1.json", "poc2.json"}) {
    auto net = testing::load_network(name);
    std::size_t prev = 0;
    for (DetailLevel level : kLevels) {
      auto m = compile(net, level);
      CHECK_MESSAGE(lint_model(m).empty(), name);
      CHECK(m.pools.size() == actors_of(net).size());
      CHECK(m.node_count() > prev);
      prev = m.node_count();
      CHECK(compile(net, level) == m);
    }
  }
}

TEST_CASE("random networks compile to sound models") {
  std::mt19937 rng(7);
  for (int i = 0; i < 60; ++i) {
    auto net = testing::random_network(rng, 1 + i % 6);
    REQUIRE_FALSE(has_errors(validate_network(net)));
    for (DetailLevel level : kLevels) {
      auto m = compile(net, level);
      auto findings = lint_model(m);
      CHECK_MESSAGE(findings.empty(), (findings.empty() ? "" : findings[0].element));
      CHECK(m.pools.size() == actors_of(net).size());
      CHECK(element_census(m).size() >= 5 * net.transactions.size());
    }
  }
}
