#pragma once

// Declarative transaction network: actors, transaction kinds and the
// dependencies that chain them together.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace psibpmn {

struct ActorRole {
  std::string id;
  std::string name;

  bool operator==(const ActorRole&) const = default;
};

struct ProductKind {
  std::string id;
  std::string phrase;  // e.g. "[budget] has been changed"

  bool operator==(const ProductKind&) const = default;
};

struct TransactionKind {
  std::string id;
  std::string name;
  std::string initiator;  // ActorRole id
  std::string executor;   // ActorRole id
  ProductKind result;

  bool operator==(const TransactionKind&) const = default;
};

/// Point in the parent's executor flow after which the child is requested.
enum class DependencyKind { RaP, RaE, RaD };

struct Dependency {
  std::string parent;
  std::string child;
  DependencyKind kind = DependencyKind::RaP;

  bool operator==(const Dependency&) const = default;
};

struct TransactionNetwork {
  std::vector<ActorRole> actors;
  std::vector<TransactionKind> transactions;
  std::vector<Dependency> dependencies;

  bool operator==(const TransactionNetwork&) const = default;

  const ActorRole* find_actor(std::string_view id) const;
  const TransactionKind* find_transaction(std::string_view id) const;
  /// First dependency whose child is `id`, if any.
  const Dependency* parent_of(std::string_view id) const;
  /// Dependencies with parent `id`, ordered by child id.
  std::vector<Dependency> children_of(std::string_view id) const;
};

enum class DetailLevel { HappyFlow, WithDissent, Complete };

std::string_view to_string(DependencyKind kind);
std::optional<DependencyKind> parse_dependency_kind(std::string_view text);
std::string_view to_string(DetailLevel level);
/// Accepts "happy", "dissent", "complete" and the enumerator names.
std::optional<DetailLevel> parse_detail_level(std::string_view text);

bool is_valid_id_token(std::string_view id);

/// Parses the JSON network document. Resolves references but performs no
/// structural validation. Throws Error{SyntaxError|UnknownReference|DuplicateId}.
TransactionNetwork parse_network_spec(std::string_view json_text);

/// Canonical JSON text; parse_network_spec(serialize_network_spec(n)) == n.
std::string serialize_network_spec(const TransactionNetwork& net);

enum class Severity { Error, Warning };

enum class ViolationRule {
  EmptyName,
  ProductPhrase,
  InitiatorIsExecutor,
  SelfDependency,
  MultipleParents,
  CycleDetected,
  CompositionRuleBreach,
  NoRoot,
};

std::string_view to_string(ViolationRule rule);
std::string_view to_string(Severity severity);

struct Violation {
  ViolationRule rule;
  Severity severity = Severity::Error;
  std::vector<std::string> ids;
  std::string message;
};

struct ValidationOptions {
  /// Downgrades child.initiator != parent.executor to a warning.
  bool allow_composition_breach = false;
};

std::vector<Violation> validate_network(const TransactionNetwork& net,
                                        const ValidationOptions& options = {});

bool has_errors(const std::vector<Violation>& violations);

/// Parents before children; roots and siblings in ascending id order,
/// breadth first. Throws Error{CycleDetected}.
std::vector<std::string> execution_order(const TransactionNetwork& net);

}  // namespace psibpmn
