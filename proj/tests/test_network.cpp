#include <algorithm>
#include <map>

#include "doctest.h"
#include "psibpmn/error.hpp"
#include "psibpmn/network.hpp"
#include "support.hpp"

using namespace psibpmn;
using psibpmn::testing::load_network;

namespace {

bool has_rule(const std::vector<Violation>& vs, ViolationRule rule) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.rule == rule; });
}

ErrorCode code_of(const std::string& text) {
  try {
    parse_network_spec(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Io;
}

const char* kTwoTx = R"({
  "actors": [{"id": "A01", "name": "Client"}, {"id": "A02", "name": "Shop"},
             {"id": "A03", "name": "Carrier"}],
  "transactions": [
    {"id": "TK01", "name": "Selling", "initiator": "A01", "executor": "A02",
     "result": {"id": "PK01", "phrase": "[sale] is done"}},
    {"id": "TK02", "name": "Shipping", "initiator": "%INI%", "executor": "A03",
     "result": {"id": "PK02", "phrase": "[shipment] is done"}}],
  "dependencies": [{"parent": "TK01", "child": "TK02", "kind": "RaP"}]
})";

std::string two_tx(const std::string& initiator) {
  std::string s = kTwoTx;
  s.replace(s.find("%INI%"), 5, initiator);
  return s;
}

}  // namespace

TEST_CASE("PoC1 parses into 5 actors, 4 transactions and 3 dependencies") {
  auto net = load_network("poc1.json");
  CHECK(net.actors.size() == 5);
  CHECK(net.transactions.size() == 4);
  REQUIRE(net.dependencies.size() == 3);
  CHECK(net.dependencies[0] == Dependency{"TK01", "TK02", DependencyKind::RaP});
  CHECK(net.dependencies[1] == Dependency{"TK02", "TK03", DependencyKind::RaE});
  CHECK(net.dependencies[2] == Dependency{"TK03", "TK04", DependencyKind::RaE});
}

TEST_CASE("PoC2 parses into 7 actors, 6 transactions and 5 dependencies") {
  auto net = load_network("poc2.json");
  CHECK(net.actors.size() == 7);
  CHECK(net.transactions.size() == 6);
  REQUIRE(net.dependencies.size() == 5);
  CHECK(net.dependencies[3] == Dependency{"TK03", "TK05", DependencyKind::RaP});
  CHECK(net.dependencies[4] == Dependency{"TK01", "TK06", DependencyKind::RaE});
}

TEST_CASE("parse errors") {
  CHECK(code_of(two_tx("A99")) == ErrorCode::UnknownReference);
  CHECK(code_of("{\"actors\": [") == ErrorCode::SyntaxError);
  CHECK(code_of("[]") == ErrorCode::SyntaxError);
  std::string dup = two_tx("A02");
  dup.replace(dup.find("\"TK02\", \"name\""), 6, "\"TK01\"");
  CHECK(code_of(dup) == ErrorCode::DuplicateId);
  std::string bad_id = two_tx("A02");
  bad_id.replace(bad_id.find("\"A03\", \"name\""), 5, "\"3rd\"");
  CHECK(code_of(bad_id) == ErrorCode::SyntaxError);
}

TEST_CASE("validation of the PoC fixtures is clean") {
  CHECK(validate_network(load_network("poc1.json")).empty());
  CHECK(validate_network(load_network("poc2.json")).empty());
}

TEST_CASE("cycles and composition breaches are violations") {
  auto cyc = validate_network(load_network("cyclic.json"));
  CHECK(has_rule(cyc, ViolationRule::CycleDetected));

  auto breach = parse_network_spec(two_tx("A01"));
  auto vs = validate_network(breach);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].rule == ViolationRule::CompositionRuleBreach);
  CHECK(vs[0].severity == Severity::Error);
  ValidationOptions lenient;
  lenient.allow_composition_breach = true;
  vs = validate_network(breach, lenient);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].severity == Severity::Warning);
  CHECK_FALSE(has_errors(vs));
}

TEST_CASE("structural rules") {
  auto net = parse_network_spec(two_tx("A02"));
  SUBCASE("initiator equals executor") {
    net.transactions[1].executor = "A02";
    CHECK(has_rule(validate_network(net), ViolationRule::InitiatorIsExecutor));
  }
  SUBCASE("self dependency") {
    net.dependencies.push_back({"TK02", "TK02", DependencyKind::RaE});
    CHECK(has_rule(validate_network(net), ViolationRule::SelfDependency));
  }
  SUBCASE("two parents") {
    net.transactions.push_back(net.transactions[0]);
    net.transactions.back().id = "TK03";
    net.dependencies.push_back({"TK03", "TK02", DependencyKind::RaE});
    CHECK(has_rule(validate_network(net), ViolationRule::MultipleParents));
  }
  SUBCASE("product phrase without a bracketed product") {
    net.transactions[0].result.phrase = "sale is done";
    CHECK(has_rule(validate_network(net), ViolationRule::ProductPhrase));
  }
  SUBCASE("empty name") {
    net.actors[0].name = "";
    CHECK(has_rule(validate_network(net), ViolationRule::EmptyName));
  }
}

TEST_CASE("execution order") {
  CHECK(execution_order(load_network("poc1.json")) ==
        std::vector<std::string>{"TK01", "TK02", "TK03", "TK04"});
  CHECK(execution_order(load_network("poc2.json")) ==
        std::vector<std::string>{"TK01", "TK02", "TK06", "TK03", "TK04", "TK05"});
  CHECK(execution_order(load_network("single.json")) == std::vector<std::string>{"TK01"});
  CHECK_THROWS_AS(execution_order(load_network("cyclic.json")), Error);
}

TEST_CASE("execution order respects every edge of random networks") {
  std::mt19937 rng(7);
  for (int round = 0; round < 200; ++round) {
    auto net = psibpmn::testing::random_network(rng, 1 + round % 8);
    CHECK(validate_network(net).empty());
    auto order = execution_order(net);
    REQUIRE(order.size() == net.transactions.size());
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    CHECK(pos.size() == order.size());
    for (const auto& d : net.dependencies) CHECK(pos[d.parent] < pos[d.child]);
  }
}

TEST_CASE("serialize then parse is the identity") {
  for (const char* name : {"poc1.json", "poc2.json", "single.json"}) {
    auto net = load_network(name);
    auto again = parse_network_spec(serialize_network_spec(net));
    CHECK(again == net);
    CHECK(serialize_network_spec(again) == serialize_network_spec(net));
  }
}
