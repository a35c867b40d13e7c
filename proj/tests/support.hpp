#pragma once

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "psibpmn/network.hpp"

namespace psibpmn::testing {

inline std::string fixture(const std::string& name) {
  std::ifstream in(std::string(PSIBPMN_FIXTURES) + "/" + name, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline TransactionNetwork load_network(const std::string& name) {
  return parse_network_spec(fixture(name));
}

// A valid network of `count` transactions shaped as a forest: every child is
// initiated by its parent's executor.
inline TransactionNetwork random_network(std::mt19937& rng, int count) {
  TransactionNetwork net;
  auto actor = [&](int i) {
    char id[16];
    std::snprintf(id, sizeof id, "A%02d", i);
    return std::string(id);
  };
  auto tk = [](int i) {
    char id[16];
    std::snprintf(id, sizeof id, "TK%02d", i);
    return std::string(id);
  };
  int actors = 0;
  auto new_actor = [&] {
    auto id = actor(++actors);
    net.actors.push_back(ActorRole{id, "Actor " + id});
    return id;
  };
  const DependencyKind kinds[] = {DependencyKind::RaP, DependencyKind::RaE, DependencyKind::RaD};
  for (int i = 1; i <= count; ++i) {
    TransactionKind t;
    t.id = tk(i);
    t.name = "Transaction " + std::to_string(i);
    t.result = ProductKind{"PK" + t.id.substr(2), "[product " + std::to_string(i) + "] exists"};
    bool root = i == 1 || std::uniform_int_distribution<int>(0, 4)(rng) == 0;
    if (root) {
      t.initiator = new_actor();
    } else {
      int p = std::uniform_int_distribution<int>(1, i - 1)(rng);
      const auto& parent = net.transactions[static_cast<std::size_t>(p - 1)];
      t.initiator = parent.executor;
      net.dependencies.push_back(
          Dependency{parent.id, t.id, kinds[std::uniform_int_distribution<int>(0, 2)(rng)]});
    }
    // reuse an actor now and then so pools host several roles
    if (actors > 1 && std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
      std::string pick;
      do pick = actor(std::uniform_int_distribution<int>(1, actors)(rng));
      while (pick == t.initiator);
      t.executor = pick;
    } else {
      t.executor = new_actor();
    }
    net.transactions.push_back(std::move(t));
  }
  return net;
}

}  // namespace psibpmn::testing
