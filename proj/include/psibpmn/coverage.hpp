#pragma once

// Classification of every (transaction, act) pair of a network against an
// existing model plus expert annotations.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psibpmn/bpmn.hpp"
#include "psibpmn/network.hpp"
#include "psibpmn/psi.hpp"

namespace psibpmn {

enum class ActStatus { Explicit, Implicit, NotImplemented };

std::string_view to_string(ActStatus status);

/// Row order of the coverage matrix.
inline constexpr std::array<Act, kActCount> kMatrixRows = {
    Act::Request,       Act::Promise,       Act::Execute,       Act::Declare,
    Act::Accept,        Act::Decline,       Act::Reject,        Act::RevokeRequest,
    Act::RevokePromise, Act::RevokeDeclare, Act::RevokeAccept,  Act::Allow,
    Act::Stop,          Act::Refuse};

struct Annotation {
  std::string transaction;
  Act act = Act::Request;
  std::string note;
};
using AnnotationSet = std::vector<Annotation>;

struct ExplicitLink {
  std::string transaction;
  Act act = Act::Request;
  std::string node_id;
};
using ExplicitMapping = std::vector<ExplicitLink>;

/// JSON array of {transaction, act, status:"implicit", note}.
/// Throws Error{SyntaxError|UnknownAnnotationKey}.
AnnotationSet parse_annotations(std::string_view json);
/// JSON array of {transaction, act, nodeId}. Throws Error{SyntaxError|UnknownAnnotationKey}.
ExplicitMapping parse_mapping(std::string_view json);

struct Tally {
  int explicit_ = 0;
  int implicit = 0;
  int not_implemented = 0;

  int implemented() const { return explicit_ + implicit; }
  int total() const { return explicit_ + implicit + not_implemented; }
  bool operator==(const Tally&) const = default;
};

struct CoverageCell {
  ActStatus status = ActStatus::NotImplemented;
  std::vector<std::string> evidence;
};

struct CoverageMatrix {
  std::vector<std::string> transactions;     // columns
  std::vector<std::vector<CoverageCell>> cells;  // [row][column], rows as kMatrixRows
  std::vector<std::string> warnings;

  const CoverageCell& at(Act act, std::string_view transaction) const;
  Tally row(std::size_t r) const;
  Tally column(std::size_t c) const;
  Tally total() const;
};

struct ClassifyOptions {
  std::optional<ExplicitMapping> mapping;
  /// Also count name matches of "<act label> <transaction name>" and node tags.
  bool heuristic_names = false;
};

/// Throws Error{UnknownAnnotationKey} for annotations or links naming a
/// transaction outside the network.
CoverageMatrix classify_acts(const TransactionNetwork& net, const BpmnModel& model,
                             const ClassifyOptions& options, const AnnotationSet& annotations);

/// 100 * count / total, rounded half-up to one decimal.
std::string percent(int count, int total, bool decimal_comma = false);

enum class ReportFormat { Csv, Text };

std::string render_matrix(const CoverageMatrix& matrix, ReportFormat format,
                          bool decimal_comma = false);

}  // namespace psibpmn
